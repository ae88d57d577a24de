use purikit::fit::{fit_sos, FitResult};
use purikit::sos::eval_poly;
use purikit::spectra::{distinct_values, make_distribution, DEFAULT_DISTINCT_TOL};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{GlobalArgs, PolyArgs};
use crate::error::CliError;
use crate::output::{Outcome, Status};

#[derive(Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Grid,
    Eigenvalue,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Row {
    pub k: usize,
    pub point: Point,
    pub lambda: f64,
    pub p: f64,
    pub p_minus_lambda: f64,
    /// `-lambda`: below this line `p` would be negative.
    pub boundary: f64,
}

pub fn run(a: &PolyArgs, g: &GlobalArgs) -> Result<Outcome<Row>, CliError> {
    let spec = make_distribution(a.kind, a.n, &a.dist.params(g.seed))?;
    let fits = a
        .k
        .par_iter()
        .map(|&k| fit_sos(&spec, k, a.n))
        .collect::<purikit::Result<Vec<FitResult>>>()?;
    let top = spec.largest();
    let eigen = distinct_values(&spec, DEFAULT_DISTINCT_TOL);
    let mut rows = Vec::new();
    let mut per_k = Vec::new();
    for f in &fits {
        let sample = |point, lambda: f64| {
            let p = eval_poly(&f.gram, lambda);
            Row {
                k: f.k,
                point,
                lambda,
                p,
                p_minus_lambda: p - lambda,
                boundary: -lambda,
            }
        };
        let grid: Vec<Row> = (0..a.grid)
            .map(|i| sample(Point::Grid, top * i as f64 / (a.grid - 1) as f64))
            .collect();
        let min_p = grid.iter().map(|r| r.p).fold(f64::INFINITY, f64::min);
        rows.extend(grid);
        rows.extend(eigen.iter().map(|&l| sample(Point::Eigenvalue, l)));
        per_k.push(json!({
            "k": f.k,
            "distance": f.distance,
            "status": f.status,
            "raw_trace": f.raw_trace,
            "p_at_zero": eval_poly(&f.gram, 0.0),
            "min_p_on_grid": min_p,
        }));
    }
    Ok(Outcome {
        rows,
        summary: json!({"lambda_max": top, "eigenvalues": eigen, "fits": per_k}),
        status: Status::Ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{Cli, Command};
    use clap::Parser;

    fn run_args(args: &[&str]) -> Outcome<Row> {
        let cli = Cli::try_parse_from(args).unwrap();
        let Command::PolyExport(a) = &cli.command else { panic!() };
        run(a, &cli.global).unwrap()
    }

    #[test]
    fn uniform_k1_is_constant() {
        let out = run_args(&["purikit", "poly-export", "--kind", "uniform", "--n", "8", "--k", "1", "--grid", "5"]);
        assert_eq!(out.rows.len(), 6);
        for r in &out.rows {
            assert!((r.p - 0.125).abs() < 1e-7, "{r:?}");
            assert!((r.p_minus_lambda - (0.125 - r.lambda)).abs() < 1e-7);
        }
        assert_eq!(out.rows[0].lambda, 0.0);
    }

    #[test]
    fn distances_do_not_increase_with_k() {
        let out = run_args(&["purikit", "poly-export", "--n", "30", "--k", "1,2,3", "--grid", "11"]);
        let d: Vec<f64> = out.summary["fits"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| f["distance"].as_f64().unwrap())
            .collect();
        assert!(d.windows(2).all(|w| w[1] <= w[0] + 1e-6), "{d:?}");
        assert!(out.rows.iter().filter(|r| r.lambda == 0.0).all(|r| r.p >= -1e-9));
    }
}
