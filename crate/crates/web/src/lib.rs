//! Browser bindings: each export takes plain numbers and strings and returns
//! a JSON document for the page script.

use purikit::counterexample::{circulant_eigenvalues, phi_cut_rank, spectral_support, tgon_slack};
use purikit::eigen::{bound_table, truncation_size};
use purikit::fit::{distance_curve, fit_exponential, fit_sos, DEFAULT_FIT_RANGE};
use purikit::sos::{eval_poly, sos_rank_bound};
use purikit::spectra::{make_distribution, DistributionKind, DistributionParams, Spectrum};
use purikit::DEFAULT_RANK_TOL;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest spectrum size the page may request; fits are interactive.
pub const MAX_N: usize = 400;
pub const MAX_K: usize = 8;
pub const MAX_T: usize = 512;

fn spectrum(kind: &str, n: usize, b: f64) -> Result<(DistributionKind, DistributionParams, Spectrum), String> {
    if n == 0 || n > MAX_N {
        return Err(format!("n must lie in 1..={MAX_N}"));
    }
    let kind: DistributionKind = kind.parse().map_err(|e: purikit::Error| e.to_string())?;
    let params = DistributionParams { b, ..Default::default() };
    let spec = make_distribution(kind, n, &params).map_err(|e| e.to_string())?;
    Ok((kind, params, spec))
}

/// Slack row and ranks of the regular `t`-gon.
pub fn polygon_json(t: usize) -> Result<String, String> {
    if t > MAX_T {
        return Err(format!("t must be at most {MAX_T}"));
    }
    let slack = tgon_slack(t).map_err(|e| e.to_string())?;
    let modes = spectral_support(&circulant_eigenvalues(&slack).map_err(|e| e.to_string())?, DEFAULT_RANK_TOL);
    Ok(json!({
        "t": t,
        "row": slack.circulant_row(),
        "rank": slack.rank(DEFAULT_RANK_TOL),
        "fourier_modes": modes,
        "phi_sr": phi_cut_rank(&slack, true, DEFAULT_RANK_TOL),
        "phi_sq_sr": phi_cut_rank(&slack, false, DEFAULT_RANK_TOL),
    })
    .to_string())
}

/// Distance curve for `k = 1..=k_max`, its decay fit, and samples of
/// `p_k(lambda) - lambda` for the largest `k`.
pub fn sos_curve_json(kind: &str, n: usize, k_max: usize, b: f64) -> Result<String, String> {
    if k_max == 0 || k_max > MAX_K {
        return Err(format!("k must lie in 1..={MAX_K}"));
    }
    let (_, _, spec) = spectrum(kind, n, b)?;
    let curve = distance_curve(&spec, 1, k_max).map_err(|e| e.to_string())?;
    let fit = fit_exponential(&curve.pairs(), DEFAULT_FIT_RANGE).ok();
    let top = spec.largest();
    let last = fit_sos(&spec, k_max, n).map_err(|e| e.to_string())?;
    let samples: Vec<[f64; 2]> = (0..=100)
        .map(|i| {
            let l = top * i as f64 / 100.0;
            [l, eval_poly(&last.gram, l) - l]
        })
        .collect();
    Ok(json!({
        "curve": curve.pairs(),
        "fit": fit,
        "eigenvalues": spec.values(),
        "poly": {"k": k_max, "samples": samples},
    })
    .to_string())
}

/// Purification-rank bounds of both routes at accuracy `eps` for a state of
/// operator Schmidt rank `d`.
pub fn compare_json(kind: &str, n: usize, b: f64, d: usize, eps: f64) -> Result<String, String> {
    if d == 0 {
        return Err("D must be positive".into());
    }
    if !(eps > 0.0 && eps <= 2.0) {
        return Err("eps must lie in (0, 2]".into());
    }
    let (kind, params, spec) = spectrum(kind, n, b)?;
    let mut sos = None;
    for k in 1..=MAX_K {
        let f = fit_sos(&spec, k, n).map_err(|e| e.to_string())?;
        if f.distance <= eps {
            let bound = sos_rank_bound(d, k).map_err(|e| e.to_string())?.value;
            sos = Some(json!({"k": k, "distance": f.distance, "bound": bound}));
            break;
        }
    }
    let s = truncation_size(&spec.full_values(), eps).map_err(|e| e.to_string())?;
    let formula = bound_table(kind, d, eps, n, &params).map_err(|e| e.to_string())?;
    Ok(json!({
        "sos": sos,
        "eigen": {"s": s, "bound": d * s * s, "formula": formula},
    })
    .to_string())
}

#[wasm_bindgen]
pub fn polygon(t: usize) -> Result<String, JsError> {
    polygon_json(t).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sos_curve(kind: &str, n: usize, k_max: usize, b: f64) -> Result<String, JsError> {
    sos_curve_json(kind, n, k_max, b).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn compare(kind: &str, n: usize, b: f64, d: usize, eps: f64) -> Result<String, JsError> {
    compare_json(kind, n, b, d, eps).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: Result<String, String>) -> Value {
        serde_json::from_str(&s.unwrap()).unwrap()
    }

    #[test]
    fn hexagon() {
        let v = parse(polygon_json(6));
        assert_eq!(v["rank"], 3);
        assert_eq!(v["phi_sq_sr"], 3);
        assert_eq!(v["row"].as_array().unwrap().len(), 6);
        assert!(polygon_json(2).is_err());
        assert!(polygon_json(MAX_T + 1).is_err());
    }

    #[test]
    fn curve_decreases_and_samples_start_at_zero() {
        let v = parse(sos_curve_json("equally_spaced", 50, 4, 1.0));
        let d: Vec<f64> = v["curve"].as_array().unwrap().iter().map(|p| p[1].as_f64().unwrap()).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        assert!(v["fit"]["b"].as_f64().unwrap() > 0.0);
        assert_eq!(v["poly"]["samples"][0][0], 0.0);
        assert!(sos_curve_json("nope", 50, 4, 1.0).is_err());
        assert!(sos_curve_json("uniform", 50, MAX_K + 1, 1.0).is_err());
    }

    #[test]
    fn uniform_comparison() {
        let v = parse(compare_json("uniform", 20, 1.0, 2, 0.01));
        assert_eq!(v["sos"]["bound"], 1);
        assert_eq!(v["eigen"]["s"], 20);
        assert!(compare_json("uniform", 20, 1.0, 0, 0.01).is_err());
        assert!(compare_json("uniform", 20, 1.0, 2, 0.0).is_err());
    }
}
