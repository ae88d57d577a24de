use std::fs;

use purikit::eigen::{eigen_purification, truncate_spectrum};
use purikit::fit::fit_sos;
use purikit::linalg::trace_norm;
use purikit::sos::{build_purifying_state, exact_gram, sos_rank_bound};
use purikit::spectra::{distinct_count, Spectrum, DEFAULT_DISTINCT_TOL};
use purikit::tensor::{
    operator_schmidt_rank, purification_cut_ranks, trace_out_ancilla, DensityMatrix, DensityRecord,
    MpsPurification,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{GlobalArgs, Method, PurifyArgs};
use crate::error::{validation, CliError};
use crate::output::{Outcome, Status};

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Row {
    /// Cut after site `cut` (1-based).
    pub cut: usize,
    pub osr: usize,
    pub purification_sr: usize,
    /// `osr <= purification_sr^2`.
    pub squared_bound_holds: bool,
}

pub fn read_density(path: &std::path::Path) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let rec: DensityRecord = serde_json::from_str(&text).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    let dim = u32::try_from(rec.n_sites)
        .ok()
        .and_then(|n| rec.local_dim.checked_pow(n))
        .ok_or_else(|| validation("dimension overflows"))?;
    purikit::check_dense(dim)?;
    Ok(DensityMatrix::try_from(rec)?)
}

/// Eigenvalues above `tol` times the largest, as a spectrum on the full space.
fn positive_spectrum(rho: &DensityMatrix, tol: f64) -> Result<Spectrum, CliError> {
    let (vals, _) = rho.eigh();
    let top = vals.first().copied().unwrap_or(0.0);
    let kept: Vec<f64> = vals.into_iter().filter(|&v| v > tol * top).collect();
    Ok(Spectrum::new(kept, rho.dim())?)
}

fn purification_json(psi: &MpsPurification) -> Value {
    json!({
        "local_dim": psi.local_dim(),
        "ancilla_dims": psi.ancilla_dims(),
        "bond_dims": psi.schmidt_ranks(),
        "sites": psi.chain().sites().iter().map(|s| json!({
            "left": s.left,
            "phys": s.phys,
            "right": s.right,
            "entries": s.data.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn run(a: &PurifyArgs, g: &GlobalArgs) -> Result<Outcome<Row>, CliError> {
    let rho = read_density(&a.input)?;
    let osr = operator_schmidt_rank(&rho, g.tol);
    let d = osr.max.max(1);

    let (psi, method_info, bound): (MpsPurification, Value, (String, usize)) = match a.method {
        Method::SosExact | Method::SosSdp => {
            let spec = positive_spectrum(&rho, g.tol)?;
            let m = distinct_count(&spec, DEFAULT_DISTINCT_TOL);
            let (gram, info) = if a.method == Method::SosExact {
                if let Some(k) = a.k.filter(|&k| k < m) {
                    return Err(validation(format!("the exact path needs k >= {m} distinct eigenvalues, got k = {k}")));
                }
                (exact_gram(&spec, g.tol)?, json!({"distinct_eigenvalues": m}))
            } else {
                let k = a.k.expect("validated");
                let fit = fit_sos(&spec, k, rho.dim())?;
                let info = json!({
                    "distinct_eigenvalues": m,
                    "fit_distance": fit.distance,
                    "status": fit.status,
                    "raw_trace": fit.raw_trace,
                });
                (fit.gram, info)
            };
            let k = gram.k();
            let b = sos_rank_bound(d, k)?.value;
            let psi = build_purifying_state(&rho, &gram)?;
            (psi, json!({"k": k, "details": info}), ("(D^k - 1)/(D - 1)".into(), b))
        }
        Method::EigenExact => {
            let (psi, cert) = eigen_purification(&rho, g.tol)?;
            let b = cert.bound_dn2;
            (psi, json!({"certificate": cert}), ("D n^2".into(), b))
        }
        Method::EigenTrunc => {
            let t = truncate_spectrum(&rho, a.s.expect("validated"))?;
            let (psi, cert) = eigen_purification(&t.sigma, g.tol)?;
            let b = cert.bound_dn2;
            let info = json!({
                "s": t.s,
                "tail_bound": t.tail_bound,
                "truncation_distance": t.distance,
                "certificate": cert,
            });
            (psi, info, ("D n^2".into(), b))
        }
    };

    let sigma = trace_out_ancilla(&psi)?;
    let distance = trace_norm(&(sigma.matrix() - rho.matrix()));
    let sr = purification_cut_ranks(&psi, g.tol);
    let rows: Vec<Row> = osr
        .per_cut
        .iter()
        .zip(&sr.per_cut)
        .enumerate()
        .map(|(c, (&o, &s))| Row {
            cut: c + 1,
            osr: o,
            purification_sr: s,
            squared_bound_holds: o <= s * s,
        })
        .collect();
    let summary = json!({
        "method": a.method,
        "n_sites": rho.n_sites(),
        "local_dim": rho.local_dim(),
        "osr": osr.max,
        "trace_distance": distance,
        "purification_rank": sr.max,
        "bound": {"formula": bound.0, "value": bound.1, "holds": sr.max <= bound.1},
        "method_details": method_info,
        "purification": purification_json(&psi),
    });
    Ok(Outcome {
        rows,
        summary,
        status: Status::Ok,
    })
}
