use purikit::eigen::{bound_table, truncation_size};
use purikit::fit::fit_sos;
use purikit::sos::sos_rank_bound;
use purikit::spectra::make_distribution;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{CompareArgs, GlobalArgs};
use crate::error::CliError;
use crate::output::{Outcome, Status};

#[derive(Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Sos,
    Eigen,
    Tie,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Row {
    pub eps: f64,
    /// Smallest `k <= k_max` whose fitted distance is at most `eps`.
    pub sos_k: Option<usize>,
    pub sos_distance: Option<f64>,
    pub sos_bound: Option<usize>,
    pub eigen_s: usize,
    pub eigen_tail: f64,
    /// `D s^2`.
    pub eigen_bound: usize,
    /// Closed-form estimate for the distribution family.
    pub eigen_formula_bound: f64,
    /// Missing when no `k <= k_max` reaches `eps`.
    pub winner: Option<Winner>,
}

pub fn run(a: &CompareArgs, g: &GlobalArgs) -> Result<Outcome<Row>, CliError> {
    let params = a.dist.params(g.seed);
    let spec = make_distribution(a.kind, a.n, &params)?;
    let fits: Vec<(usize, Result<f64, String>)> = (1..=a.k_max)
        .into_par_iter()
        .map(|k| (k, fit_sos(&spec, k, a.n).map(|f| f.distance).map_err(|e| e.to_string())))
        .collect();
    let values = spec.full_values();

    let mut rows = Vec::new();
    for &eps in &a.eps {
        let sos = fits
            .iter()
            .find_map(|(k, d)| d.as_ref().ok().filter(|&&d| d <= eps).map(|&d| (*k, d)));
        let sos_bound = sos
            .map(|(k, _)| sos_rank_bound(a.d, k).map(|b| b.value))
            .transpose()?;
        let s = truncation_size(&values, eps)?;
        let eigen_bound = a.d.saturating_mul(s).saturating_mul(s);
        let winner = sos_bound.map(|b| match b.cmp(&eigen_bound) {
            std::cmp::Ordering::Less => Winner::Sos,
            std::cmp::Ordering::Greater => Winner::Eigen,
            std::cmp::Ordering::Equal => Winner::Tie,
        });
        rows.push(Row {
            eps,
            sos_k: sos.map(|(k, _)| k),
            sos_distance: sos.map(|(_, d)| d),
            sos_bound,
            eigen_s: s,
            eigen_tail: 2.0 * values[s..].iter().fold(0.0, |acc, v| acc + v),
            eigen_bound,
            eigen_formula_bound: bound_table(a.kind, a.d, eps, a.n, &params)?,
            winner,
        });
    }
    let failed = fits.iter().any(|(_, d)| d.is_err());
    Ok(Outcome {
        rows,
        summary: json!({
            "sos_curve": fits.iter().map(|(k, d)| json!({
                "k": k,
                "distance": d.as_ref().ok(),
                "error": d.as_ref().err(),
            })).collect::<Vec<_>>(),
        }),
        status: if failed { Status::Partial } else { Status::Ok },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{Cli, Command};
    use clap::Parser;

    fn run_args(args: &[&str]) -> Outcome<Row> {
        let cli = Cli::try_parse_from(args).unwrap();
        let Command::CompareMethods(a) = &cli.command else { panic!() };
        run(a, &cli.global).unwrap()
    }

    #[test]
    fn uniform_prefers_sos() {
        let out = run_args(&["purikit", "compare-methods", "--kind", "uniform", "--n", "20", "--k-max", "2"]);
        for r in &out.rows {
            assert_eq!(r.sos_k, Some(1));
            assert_eq!(r.sos_bound, Some(1));
            assert_eq!(r.winner, Some(Winner::Sos));
        }
    }

    #[test]
    fn eigen_tail_respects_eps() {
        let out = run_args(&["purikit", "compare-methods", "--kind", "exponential", "--n", "30", "--k-max", "3"]);
        for r in &out.rows {
            assert!(r.eigen_tail <= r.eps + 1e-15);
            assert_eq!(r.eigen_bound, 2 * r.eigen_s * r.eigen_s);
        }
    }
}
