use purikit::fit::{fit_exponential, fit_sos, MONOTONE_TOL};
use purikit::sdp::SdpStatus;
use purikit::spectra::{make_distribution, DistributionKind};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{BenchArgs, GlobalArgs};
use crate::error::CliError;
use crate::output::{Outcome, Status};

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Row {
    pub kind: DistributionKind,
    pub n: usize,
    pub k: usize,
    pub distance: Option<f64>,
    /// Empty when the point failed before the solver ran.
    pub status: Option<SdpStatus>,
    pub iterations: Option<usize>,
    pub raw_trace: Option<f64>,
    pub error: Option<String>,
}

fn point(kind: DistributionKind, n: usize, k: usize, a: &BenchArgs, g: &GlobalArgs) -> Row {
    let fit = make_distribution(kind, n, &a.dist.params(g.seed)).and_then(|spec| fit_sos(&spec, k, n));
    let mut row = Row {
        kind,
        n,
        k,
        distance: None,
        status: None,
        iterations: None,
        raw_trace: None,
        error: None,
    };
    match fit {
        Ok(f) => {
            row.distance = Some(f.distance);
            row.status = Some(f.status);
            row.iterations = Some(f.iterations);
            row.raw_trace = Some(f.raw_trace);
            if f.status != SdpStatus::Optimal {
                row.error = Some("solver stopped before convergence".into());
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn spread(bs: &[f64]) -> Option<f64> {
    if bs.len() < 2 {
        return None;
    }
    let max = bs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = bs.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = bs.iter().sum::<f64>() / bs.len() as f64;
    Some((max - min) / mean.abs())
}

pub fn run(a: &BenchArgs, g: &GlobalArgs) -> Result<Outcome<Row>, CliError> {
    let points: Vec<(DistributionKind, usize, usize)> = a
        .kinds
        .iter()
        .flat_map(|&kind| a.n.iter().flat_map(move |&n| (a.k_min..=a.k_max).map(move |k| (kind, n, k))))
        .collect();
    let rows: Vec<Row> = points.par_iter().map(|&(kind, n, k)| point(kind, n, k, a, g)).collect();

    let mut fits = Vec::new();
    let mut table = Vec::new();
    for &kind in &a.kinds {
        let mut bs = Vec::new();
        for &n in &a.n {
            let curve: Vec<(usize, f64)> = rows
                .iter()
                .filter(|r| r.kind == kind && r.n == n)
                .filter_map(|r| r.distance.map(|d| (r.k, d)))
                .collect();
            let violations: Vec<usize> = curve
                .windows(2)
                .filter(|w| w[1].1 > w[0].1 + MONOTONE_TOL)
                .map(|w| w[1].0)
                .collect();
            let exact = curve.iter().all(|&(_, d)| d < purikit::fit::NOISE_FLOOR);
            let fit = fit_exponential(&curve, (a.fit_min, a.fit_max));
            if let Ok(f) = &fit {
                bs.push(f.b);
            }
            fits.push(json!({
                "kind": kind,
                "n": n,
                "fit": fit.as_ref().ok(),
                "fit_error": fit.as_ref().err().map(|e| e.to_string()),
                "exact": exact,
                "monotonicity_violations": violations,
            }));
        }
        table.push(json!({"kind": kind, "b_spread": spread(&bs)}));
    }
    let status = if rows.iter().all(|r| r.error.is_none()) { Status::Ok } else { Status::Partial };
    Ok(Outcome {
        rows,
        summary: json!({"decay_fits": fits, "n_independence": Value::Array(table)}),
        status,
    })
}
