use purikit::counterexample::{
    circulant_eigenvalues, diagonal_cut_ranks, phi_cut_rank, psd_factorization_search, spectral_support, tgon_slack,
    verify_fourier_mpo, Layout, PsdSearchOptions, PsdSearchResult, SlackMatrix,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{CounterexampleArgs, GlobalArgs, SlackLayout};
use crate::error::CliError;
use crate::output::{join, Outcome, Status};

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Row {
    pub t: usize,
    pub layout: SlackLayout,
    pub rank_s: usize,
    pub osr_max: usize,
    pub osr_cuts: String,
    pub phi_sr: usize,
    pub phi_sq_sr: usize,
    pub psd_r: Option<usize>,
    pub psd_success: Option<bool>,
    pub psd_residual: Option<f64>,
    pub psd_relative_residual: Option<f64>,
    pub psd_best_restart: Option<usize>,
}

struct Polygon {
    t: usize,
    slack: SlackMatrix,
    rank: usize,
    cuts: Vec<usize>,
    phi_sr: usize,
    phi_sq_sr: usize,
    summary: Value,
}

fn polygon(t: usize, a: &CounterexampleArgs, g: &GlobalArgs) -> Result<Polygon, CliError> {
    let slack = tgon_slack(t)?;
    let layout = match a.layout {
        SlackLayout::Flat => Layout::Bipartite,
        SlackLayout::Binary => Layout::Binary,
    };
    let cuts = diagonal_cut_ranks(&slack, layout, g.tol)?;
    let modes = spectral_support(&circulant_eigenvalues(&slack)?, g.tol);
    let mpo = match a.layout {
        SlackLayout::Binary if t >= 4 => Some(verify_fourier_mpo(t.trailing_zeros() as usize, a.mpo_samples, g.seed)?),
        _ => None,
    };
    Ok(Polygon {
        t,
        rank: slack.rank(g.tol),
        phi_sr: phi_cut_rank(&slack, true, g.tol),
        phi_sq_sr: phi_cut_rank(&slack, false, g.tol),
        summary: json!({
            "t": t,
            "normalization": slack.normalization(),
            "circulant_row": slack.circulant_row(),
            "fourier_modes": modes,
            "fourier_mpo_check": mpo,
        }),
        cuts,
        slack,
    })
}

pub fn run(a: &CounterexampleArgs, g: &GlobalArgs) -> Result<Outcome<Row>, CliError> {
    let polys = a
        .t
        .par_iter()
        .map(|&t| polygon(t, a, g))
        .collect::<Result<Vec<_>, _>>()?;

    let rs: &[usize] = if a.no_psd { &[] } else { &a.psd_r };
    let opts = PsdSearchOptions {
        restarts: a.restarts,
        max_sweeps: a.sweeps,
        seed: g.seed,
    };
    let jobs: Vec<(usize, usize)> = (0..polys.len()).flat_map(|p| rs.iter().map(move |&r| (p, r))).collect();
    let searches: Vec<Result<PsdSearchResult, String>> = jobs
        .par_iter()
        .map(|&(p, r)| psd_factorization_search(polys[p].slack.entries(), r, &opts).map_err(|e| e.to_string()))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (p, poly) in polys.iter().enumerate() {
        let base = Row {
            t: poly.t,
            layout: a.layout,
            rank_s: poly.rank,
            osr_max: poly.cuts.iter().copied().max().unwrap_or(0),
            osr_cuts: join(&poly.cuts),
            phi_sr: poly.phi_sr,
            phi_sq_sr: poly.phi_sq_sr,
            psd_r: None,
            psd_success: None,
            psd_residual: None,
            psd_relative_residual: None,
            psd_best_restart: None,
        };
        if rs.is_empty() {
            rows.push(base);
            continue;
        }
        for (&(_, r), res) in jobs.iter().zip(&searches).filter(|((q, _), _)| *q == p) {
            let mut row = Row { psd_r: Some(r), ..base.clone() };
            match res {
                Ok(s) => {
                    row.psd_success = Some(s.success);
                    row.psd_residual = Some(s.residual);
                    row.psd_relative_residual = Some(s.relative_residual);
                    row.psd_best_restart = Some(s.best_restart);
                }
                Err(e) => failures.push(json!({"t": poly.t, "r": r, "error": e})),
            }
            rows.push(row);
        }
    }
    let status = if failures.is_empty() { Status::Ok } else { Status::Partial };
    Ok(Outcome {
        rows,
        summary: json!({
            "polygons": polys.iter().map(|p| &p.summary).collect::<Vec<_>>(),
            "psd_failures": failures,
        }),
        status,
    })
}
