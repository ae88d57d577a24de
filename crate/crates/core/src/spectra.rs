//! Benchmark eigenvalue distributions and density matrices assembled from a
//! spectrum and an eigenbasis.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::tensor::DensityMatrix;

/// Default absolute tolerance under which two eigenvalues count as equal.
pub const DEFAULT_DISTINCT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
    EquallySpaced,
    Random,
    OneFixed,
    Exponential,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 5] = [
        Self::Uniform,
        Self::EquallySpaced,
        Self::Random,
        Self::OneFixed,
        Self::Exponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::EquallySpaced => "equally_spaced",
            Self::Random => "random",
            Self::OneFixed => "one_fixed",
            Self::Exponential => "exponential",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| invalid(format!("unknown distribution kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionParams {
    /// Decay constant of the exponential distribution.
    pub b: f64,
    /// Seed of the random distribution.
    pub seed: u64,
    /// Sampling interval `(lo, hi]` of the random distribution.
    pub interval: (f64, f64),
}

impl Default for DistributionParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            seed: 0,
            interval: (0.0, 1.0),
        }
    }
}

/// Nonnegative eigenvalues in non-increasing order. Only the leading values
/// are stored; the remaining `ambient_dim - values.len()` eigenvalues are 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    ambient_dim: usize,
    normalized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<DistributionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<DistributionParams>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>, ambient_dim: usize) -> Result<Self> {
        if values.len() > ambient_dim {
            return Err(invalid(format!(
                "{} eigenvalues do not fit into dimension {ambient_dim}",
                values.len()
            )));
        }
        let mut values = values;
        for v in values.iter_mut() {
            if !v.is_finite() || *v < -1e-12 {
                return Err(invalid(format!("eigenvalue {v} is negative or not finite")));
            }
            *v = v.max(0.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let normalized = (values.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
        Ok(Self {
            values,
            ambient_dim,
            normalized,
            kind: None,
            params: None,
        })
    }

    /// Same eigenvalues embedded in a larger space (extra zeros).
    pub fn with_ambient_dim(mut self, ambient_dim: usize) -> Result<Self> {
        if ambient_dim < self.values.len() {
            return Err(invalid("ambient dimension smaller than the number of values"));
        }
        self.ambient_dim = ambient_dim;
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// All `ambient_dim` eigenvalues including trailing zeros.
    pub fn full_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.resize(self.ambient_dim, 0.0);
        v
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn n_nonzero(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn kind(&self) -> Option<DistributionKind> {
        self.kind
    }

    pub fn params(&self) -> Option<&DistributionParams> {
        self.params.as_ref()
    }

    /// Number of distinct eigenvalues at [`DEFAULT_DISTINCT_TOL`], counting 0
    /// when the spectrum is rank deficient.
    pub fn m_distinct(&self) -> usize {
        distinct_count(self, DEFAULT_DISTINCT_TOL)
    }
}

/// Generates one of the five benchmark distributions with `n` nonzero,
/// normalized eigenvalues in an `n`-dimensional ambient space.
pub fn make_distribution(
    kind: DistributionKind,
    n: usize,
    params: &DistributionParams,
) -> Result<Spectrum> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let nf = n as f64;
    let values: Vec<f64> = match kind {
        DistributionKind::Uniform => vec![1.0 / nf; n],
        DistributionKind::EquallySpaced => {
            let step = 2.0 / (nf * (nf + 1.0));
            (1..=n).rev().map(|j| j as f64 * step).collect()
        }
        DistributionKind::Random => {
            let (lo, hi) = params.interval;
            if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                return Err(invalid(format!("random interval ({lo}, {hi}] is not a positive range")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            // (lo, hi]: 1 - u lies in (0, 1]
            let raw: Vec<f64> = (0..n)
                .map(|_| lo + (hi - lo) * (1.0 - rng.random::<f64>()))
                .collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect()
        }
        DistributionKind::OneFixed => {
            if n < 2 {
                return Err(invalid("one_fixed needs n >= 2"));
            }
            let norm = 1.0 / (nf * (nf + 1.0) - 2.0);
            std::iter::once(0.5)
                .chain((2..=n).rev().map(|j| j as f64 * norm))
                .collect()
        }
        DistributionKind::Exponential => {
            let b = params.b;
            if !(b > 0.0 && b.is_finite()) {
                return Err(invalid(format!("exponential decay b = {b} must be positive")));
            }
            // sum_j e^{-bj} = e^{-b} (1 - e^{-nb}) / (1 - e^{-b})
            let norm = b.exp_m1() / (-(-nf * b).exp_m1());
            (1..=n).map(|j| norm * (-b * j as f64).exp()).collect()
        }
    };
    let mut spec = Spectrum::new(values, n)?;
    spec.kind = Some(kind);
    spec.params = Some(params.clone());
    Ok(spec)
}

/// Representatives (largest member) of the classes of eigenvalues that agree
/// within `tol`, including 0 when the spectrum is rank deficient.
pub fn distinct_values(spec: &Spectrum, tol: f64) -> Vec<f64> {
    let mut reps: Vec<f64> = Vec::new();
    let has_zero = spec.n_nonzero() < spec.ambient_dim();
    let iter = spec
        .values()
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .chain(has_zero.then_some(0.0));
    for v in iter {
        match reps.last() {
            Some(&r) if r - v <= tol => {}
            _ => reps.push(v),
        }
    }
    reps
}

/// Number of distinct nonnegative eigenvalues.
pub fn distinct_count(spec: &Spectrum, tol: f64) -> usize {
    distinct_values(spec, tol).len()
}

/// Eigenbasis used by [`assemble_density`].
#[derive(Clone, Debug)]
pub enum Basis {
    Computational,
    RandomHaar { seed: u64 },
    Given(CMatrix),
}

/// `rho = sum_i lambda_i |phi_i><phi_i|` with `phi_i` the columns of the basis.
pub fn assemble_density(spec: &Spectrum, basis: &Basis, local_dim: usize) -> Result<DensityMatrix> {
    let dim = spec.ambient_dim();
    let n_sites = sites_for(dim, local_dim)?;
    crate::check_dense(dim)?;
    let full = spec.full_values();
    match basis {
        Basis::Computational => DensityMatrix::from_diagonal(&full, n_sites, local_dim),
        Basis::RandomHaar { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let u = linalg::haar_unitary(dim, &mut rng);
            Ok(conjugate(&u, &full, n_sites, local_dim))
        }
        Basis::Given(u) => {
            if u.nrows() != dim || u.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.nrows(),
                });
            }
            let deviation = linalg::unitary_deviation(u);
            if deviation > 1e-10 {
                return Err(Error::NotUnitary { deviation });
            }
            Ok(conjugate(u, &full, n_sites, local_dim))
        }
    }
}

fn conjugate(u: &CMatrix, diag: &[f64], n_sites: usize, local_dim: usize) -> DensityMatrix {
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(diag));
    let m = u * linalg::to_complex(&d) * u.adjoint();
    DensityMatrix::from_psd_unchecked(m, n_sites, local_dim)
}

/// `N` with `local_dim^N == dim`.
pub fn sites_for(dim: usize, local_dim: usize) -> Result<usize> {
    if local_dim < 2 {
        return if dim == 1 || local_dim == 1 {
            Ok(1)
        } else {
            Err(invalid("local dimension must be at least 1"))
        };
    }
    let mut n = 0;
    let mut acc = 1usize;
    while acc < dim {
        acc = acc.saturating_mul(local_dim);
        n += 1;
    }
    if acc != dim || n == 0 {
        Err(invalid(format!("{dim} is not a positive power of {local_dim}")))
    } else {
        Ok(n)
    }
}
