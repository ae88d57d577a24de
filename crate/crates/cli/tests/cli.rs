use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use purikit::spectra::{assemble_density, make_distribution, Basis, DistributionKind, DistributionParams, Spectrum};
use purikit::tensor::DensityMatrix;
use serde_json::Value;
use tempfile::TempDir;

fn purikit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_purikit"))
        .args(args)
        .env_remove("PURIKIT_DENSE_CAP")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = purikit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let idx = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[idx].clone()).collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_density(dir: &TempDir, name: &str, rho: &DensityMatrix) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string(rho).unwrap()).unwrap();
    p
}

fn random_density(sites: usize, seed: u64) -> DensityMatrix {
    let params = DistributionParams { seed, ..Default::default() };
    let spec = make_distribution(DistributionKind::Random, 1 << sites, &params).unwrap();
    assemble_density(&spec, &Basis::RandomHaar { seed }, 2).unwrap()
}

#[test]
fn counterexample_writes_csv_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ce.csv");
    ok(&["counterexample", "--t", "6", "--no-psd", "--out", path_str(&out)]);
    let rows = csv_rows(&out);
    assert_eq!(column(&rows, "rank_s"), ["3"]);
    assert_eq!(column(&rows, "phi_sq_sr"), ["3"]);
    let side = json(&dir.path().join("ce.json"));
    assert_eq!(side["schema_version"], 1);
    assert_eq!(side["status"], "ok");
    assert_eq!(side["config"]["command"], "counterexample");
    assert_eq!(side["config"]["args"]["t"], serde_json::json!([6]));
    assert_eq!(side["config"]["seed"], 0);
    assert!(side["library_version"].is_string());
    assert!(side["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn counterexample_power_of_two_family() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pow.csv");
    ok(&["counterexample", "--t", "4,8,16,32,64", "--layout", "binary", "--no-psd", "--out", path_str(&out)]);
    let rows = csv_rows(&out);
    assert!(column(&rows, "phi_sq_sr").iter().all(|v| v == "3"));
    assert!(column(&rows, "osr_max").iter().all(|v| v.parse::<usize>().unwrap() <= 3));
    // a single diagonal qubit carries operator Schmidt rank at most 2
    assert_eq!(column(&rows, "osr_cuts")[1], "2;3;3;3;2");
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["counterexample", "--t", "4,5", "--psd-r", "2,3", "--restarts", "3", "--seed", "11"];
    ok(&[&args[..], &["--out", path_str(&a)]].concat());
    ok(&[&args[..], &["--out", path_str(&b), "--jobs", "1"]].concat());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn bench_distributions_bands() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bench.csv");
    ok(&[
        "bench-distributions",
        "--kinds",
        "uniform,equally_spaced,exponential",
        "--n",
        "100",
        "--out",
        path_str(&out),
    ]);
    let rows = csv_rows(&out);
    let kinds = column(&rows, "kind");
    let dist = column(&rows, "distance");
    for (k, d) in kinds.iter().zip(&dist) {
        if k == "uniform" {
            assert!(d.parse::<f64>().unwrap() < 1e-7);
        }
    }
    let side = json(&dir.path().join("bench.json"));
    let fits = side["summary"]["decay_fits"].as_array().unwrap();
    let b = |kind: &str| {
        fits.iter().find(|f| f["kind"] == kind).unwrap()["fit"]["b"].as_f64().unwrap()
    };
    assert!((1.0..=3.0).contains(&b("equally_spaced")));
    assert!((0.8..=1.8).contains(&b("exponential")));
}

#[test]
fn poly_export_uniform_is_flat() {
    let out = ok(&["poly-export", "--kind", "uniform", "--n", "10", "--k", "1", "--grid", "3"]);
    let body = String::from_utf8(out.stdout).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("k,point,lambda,p,p_minus_lambda,boundary"));
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        let lambda: f64 = f[2].parse().unwrap();
        let pml: f64 = f[4].parse().unwrap();
        assert!((pml - (0.1 - lambda)).abs() < 1e-7, "{l}");
    }
}

#[test]
fn compare_methods_winners() {
    let uni = ok(&["compare-methods", "--kind", "uniform", "--n", "50", "--k-max", "2", "--format", "json"]);
    let v: Value = serde_json::from_slice(&uni.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    for r in v["rows"].as_array().unwrap() {
        assert_eq!(r["sos_bound"], 1);
        assert_eq!(r["winner"], "sos");
    }
    let exp = ok(&["compare-methods", "--kind", "exponential", "--d", "8", "--eps", "0.1,0.01", "--format", "json"]);
    let v: Value = serde_json::from_slice(&exp.stdout).unwrap();
    for r in v["rows"].as_array().unwrap() {
        assert_eq!(r["winner"], "eigen", "{r}");
    }
}

#[test]
fn purify_maximally_mixed_with_exact_sos() {
    let dir = TempDir::new().unwrap();
    let rho = DensityMatrix::from_diagonal(&[0.25; 4], 2, 2).unwrap();
    let input = write_density(&dir, "mixed.json", &rho);
    let out = dir.path().join("p.json");
    ok(&["purify", "--input", path_str(&input), "--method", "sos_exact", "--format", "json", "--out", path_str(&out)]);
    let v = json(&out);
    assert_eq!(v["summary"]["purification_rank"], 1);
    assert!(v["summary"]["trace_distance"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["summary"]["bound"]["holds"], true);
    assert_eq!(v["summary"]["purification"]["sites"].as_array().unwrap().len(), 2);
}

#[test]
fn purify_random_state_with_eigen_methods() {
    let dir = TempDir::new().unwrap();
    let input = write_density(&dir, "rand.json", &random_density(3, 5));
    let exact = dir.path().join("exact.json");
    ok(&["purify", "--input", path_str(&input), "--method", "eigen_exact", "--format", "json", "--out", path_str(&exact)]);
    let v = json(&exact);
    assert!(v["summary"]["trace_distance"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["summary"]["bound"]["holds"], true);

    let trunc = dir.path().join("trunc.csv");
    ok(&["purify", "--input", path_str(&input), "--method", "eigen_trunc", "--s", "8", "--out", path_str(&trunc)]);
    let v = json(&dir.path().join("trunc.json"));
    assert!(v["summary"]["trace_distance"].as_f64().unwrap() <= 1e-8);
    let rows = csv_rows(&trunc);
    assert!(column(&rows, "squared_bound_holds").iter().all(|v| v == "true"));
}

#[test]
fn purify_with_sdp_fit_matches_fit_distance() {
    let dir = TempDir::new().unwrap();
    let spec = make_distribution(DistributionKind::EquallySpaced, 8, &DistributionParams::default()).unwrap();
    let rho = assemble_density(&spec, &Basis::RandomHaar { seed: 2 }, 2).unwrap();
    let input = write_density(&dir, "eq.json", &rho);
    let out = dir.path().join("sdp.json");
    ok(&["purify", "--input", path_str(&input), "--method", "sos_sdp", "--k", "2", "--format", "json", "--out", path_str(&out)]);
    let v = json(&out);
    let s = &v["summary"];
    let fit = s["method_details"]["details"]["fit_distance"].as_f64().unwrap();
    assert!((s["trace_distance"].as_f64().unwrap() - fit).abs() < 1e-8);
    assert_eq!(s["bound"]["holds"], true);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(purikit(&["counterexample", "--t", "2"]).status.code(), Some(2));
    assert_eq!(purikit(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(purikit(&["bench-distributions", "--k-min", "5", "--k-max", "2"]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    let r = purikit(&["purify", "--input", path_str(&missing), "--method", "eigen_exact"]);
    assert_eq!(r.status.code(), Some(4));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"n_sites\": 1, \"local_dim\": 2, \"entries\": [[1, 0]]}").unwrap();
    let r = purikit(&["purify", "--input", path_str(&bad), "--method", "eigen_exact"]);
    assert_eq!(r.status.code(), Some(2));

    let skew = dir.path().join("skew.json");
    fs::write(&skew, "{\"n_sites\": 1, \"local_dim\": 2, \"entries\": [[0.5,0],[0.3,0],[0,0],[0.5,0]]}").unwrap();
    let r = purikit(&["purify", "--input", path_str(&skew), "--method", "eigen_exact"]);
    assert_eq!(r.status.code(), Some(2));

    let rand = write_density(&dir, "rand.json", &random_density(2, 1));
    let r = purikit(&["purify", "--input", path_str(&rand), "--method", "sos_exact", "--k", "1"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("k >= 4"));

    let unwritable = dir.path().join("no/such/dir/out.csv");
    let r = purikit(&["counterexample", "--t", "4", "--no-psd", "--out", path_str(&unwritable)]);
    assert_eq!(r.status.code(), Some(4));
}

#[test]
fn dense_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let input = write_density(&dir, "rand.json", &random_density(3, 2));
    let r = Command::new(env!("CARGO_BIN_EXE_purikit"))
        .args(["purify", "--input", path_str(&input), "--method", "eigen_exact"])
        .env("PURIKIT_DENSE_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("cap"));
}

#[test]
fn degenerate_spectrum_exact_sos_bound() {
    let dir = TempDir::new().unwrap();
    let spec = Spectrum::new(vec![0.3, 0.3, 0.2, 0.2], 8).unwrap();
    let rho = assemble_density(&spec, &Basis::RandomHaar { seed: 4 }, 2).unwrap();
    let input = write_density(&dir, "deg.json", &rho);
    let out = ok(&["purify", "--input", path_str(&input), "--method", "sos_exact", "--format", "json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let s = &v["summary"];
    assert_eq!(s["method_details"]["details"]["distinct_eigenvalues"], 3);
    assert!(s["trace_distance"].as_f64().unwrap() < 1e-8);
    assert_eq!(s["bound"]["holds"], true);
}
