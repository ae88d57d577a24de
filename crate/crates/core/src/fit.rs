//! Optimal sum-of-squares fits via the SDP solver, distance curves over `k`
//! and exponential decay fits `A exp(-B k)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sdp::{self, SdpOptions, SdpStatus};
use crate::sos::{sigma_values, sos_distance, GramPolynomial};
use crate::spectra::Spectrum;

/// Distances below this are treated as solver noise and left out of log fits.
pub const NOISE_FLOOR: f64 = 1e-9;

/// Default `k` range of decay fits.
pub const DEFAULT_FIT_RANGE: (usize, usize) = (2, 4);

/// Allowed increase between consecutive points of a distance curve.
pub const MONOTONE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub k: usize,
    pub gram: GramPolynomial,
    /// `||rho - sigma_k||_1` of the extracted polynomial.
    pub distance: f64,
    pub objective: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    /// `sum_i p_k(lambda_i)` over all eigenvalues.
    pub raw_trace: f64,
}

fn fit_options() -> SdpOptions {
    SdpOptions {
        tol_gap: 1e-9,
        tol_feas: 1e-9,
        ..SdpOptions::default()
    }
}

/// Best degree-`k` sum-of-squares fit of the spectrum.
pub fn fit_sos(spec: &Spectrum, k: usize, ambient_dim: usize) -> Result<FitResult> {
    fit_sos_with(spec, k, ambient_dim, true)
}

/// As [`fit_sos`], optionally without rescaling the eigenvalues. The solve is
/// first attempted at a tight tolerance and repeated at the default one if it
/// does not converge.
pub fn fit_sos_with(spec: &Spectrum, k: usize, ambient_dim: usize, rescale: bool) -> Result<FitResult> {
    let problem = sdp::build_standard_form_with(spec, k, ambient_dim, rescale)?;
    let mut sol = sdp::solve(&problem, &fit_options())?;
    if sol.status != SdpStatus::Optimal {
        let retry = sdp::solve(&problem, &SdpOptions::default())?;
        if retry.status == SdpStatus::Optimal {
            sol = retry;
        }
    }
    let spec = spec.clone().with_ambient_dim(ambient_dim)?;
    let distance = sos_distance(&spec, &sol.gram, ambient_dim);
    let raw_trace = sigma_values(&spec, &sol.gram).iter().sum();
    Ok(FitResult {
        k,
        gram: sol.gram,
        distance,
        objective: sol.objective,
        status: sol.status,
        iterations: sol.iterations,
        raw_trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub distance: f64,
    pub status: SdpStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceCurve {
    pub points: Vec<CurvePoint>,
    /// Values of `k` whose distance exceeds the previous one by more than
    /// [`MONOTONE_TOL`].
    pub violations: Vec<usize>,
}

impl DistanceCurve {
    pub fn pairs(&self) -> Vec<(usize, f64)> {
        self.points.iter().map(|p| (p.k, p.distance)).collect()
    }

    pub fn all_optimal(&self) -> bool {
        self.points.iter().all(|p| p.status == SdpStatus::Optimal)
    }
}

/// Independent fits for every `k` in `k_min..=k_max`.
pub fn distance_curve(spec: &Spectrum, k_min: usize, k_max: usize) -> Result<DistanceCurve> {
    if k_min == 0 || k_min > k_max {
        return Err(invalid(format!("invalid k range {k_min}..={k_max}")));
    }
    let ambient = spec.ambient_dim();
    let points = (k_min..=k_max)
        .map(|k| {
            fit_sos(spec, k, ambient).map(|f| CurvePoint {
                k,
                distance: f.distance,
                status: f.status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceCurve {
        violations: monotonicity_violations(&points),
        points,
    })
}

fn monotonicity_violations(points: &[CurvePoint]) -> Vec<usize> {
    points
        .windows(2)
        .filter(|w| w[1].distance > w[0].distance + MONOTONE_TOL)
        .map(|w| w[1].k)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
    pub k_range: (usize, usize),
    /// Number of points that entered the fit.
    pub used: usize,
}

/// Least squares on `(k, ln d)` over `k_range`: `d ~ A exp(-B k)`. Points
/// below [`NOISE_FLOOR`] are skipped.
pub fn fit_exponential(curve: &[(usize, f64)], k_range: (usize, usize)) -> Result<DecayFit> {
    let (lo, hi) = k_range;
    let mut pts = Vec::new();
    for &(k, d) in curve.iter().filter(|(k, _)| (lo..=hi).contains(k)) {
        if d <= 0.0 || !d.is_finite() {
            return Err(invalid(format!("distance {d} at k = {k} is not positive")));
        }
        if d >= NOISE_FLOOR {
            pts.push((k as f64, d.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(invalid("fewer than two usable points in the fit range"));
    }
    let n = pts.len() as f64;
    let mk = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mk).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mk) * (p.1 - ml)).sum();
    let slope = sxy / sxx;
    let intercept = ml - slope * mk;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        a: intercept.exp(),
        b: -slope,
        residual,
        k_range,
        used: pts.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaleReport {
    pub k: usize,
    pub distance_rescaled: f64,
    pub distance_raw: f64,
    pub condition_rescaled: f64,
    pub condition_raw: f64,
    /// The rescaled fit is at most `1e-8` worse than the raw one.
    pub rescaled_ok: bool,
}

/// Fits at `k = 3` with and without dividing the eigenvalues by the largest.
pub fn rescale_check(spec: &Spectrum) -> Result<RescaleReport> {
    const K: usize = 3;
    let ambient = spec.ambient_dim();
    let with = fit_sos_with(spec, K, ambient, true)?;
    let without = fit_sos_with(spec, K, ambient, false)?;
    let cond = |rescale| -> Result<f64> {
        Ok(sdp::vandermonde_condition(&sdp::build_standard_form_with(
            spec, K, ambient, rescale,
        )?))
    };
    Ok(RescaleReport {
        k: K,
        distance_rescaled: with.distance,
        distance_raw: without.distance,
        condition_rescaled: cond(true)?,
        condition_raw: cond(false)?,
        rescaled_ok: with.distance <= without.distance + 1e-8,
    })
}
