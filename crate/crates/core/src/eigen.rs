//! The eigenbasis purification method: the eigenvectors of `rho` are written
//! as combinations of images `rho|x>` of computational-basis product states,
//! which bounds their Schmidt rank by `D n` and the purification rank by
//! `D n^2`, with `D` the operator Schmidt rank and `n` the rank of `rho`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::spectra::{DistributionKind, DistributionParams};
use crate::tensor::{
    operator_schmidt_rank, purification_rank, schmidt_rank, trace_out_ancilla, DensityMatrix,
    MpsPurification, PureState,
};

/// Largest `||f g - I||` accepted for the coefficient inversion.
pub const INVERSE_TOL: f64 = 1e-8;

/// Computational-basis labels `x` whose images `rho|x>` span the range of
/// `rho`. Columns are picked by largest residual after projecting out the
/// ones already chosen, ties going to the lower label; the result is sorted.
pub fn select_product_basis(rho: &DensityMatrix, tol: f64) -> Result<Vec<usize>> {
    let (vals, _) = rho.eigh();
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let n = rho.rank(tol);
    let m = rho.matrix();
    let dim = rho.dim();
    let threshold = tol * top;

    let mut residual: Vec<f64> = (0..dim).map(|x| m.column(x).norm_squared()).collect();
    let mut basis: Vec<CVector> = Vec::with_capacity(n);
    let mut chosen = Vec::with_capacity(n);
    while chosen.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for (x, &r) in residual.iter().enumerate() {
            if chosen.contains(&x) {
                continue;
            }
            if best.is_none_or(|(_, b)| r > b * (1.0 + 1e-12)) {
                best = Some((x, r));
            }
        }
        let Some((x, _)) = best else { break };
        let mut v = m.column(x).into_owned();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&v);
                v -= q * c;
            }
        }
        let norm = v.norm();
        if norm <= threshold {
            break;
        }
        let q = v.unscale(norm);
        for (y, r) in residual.iter_mut().enumerate() {
            let c = q.dotc(&m.column(y));
            *r = (*r - c.norm_sqr()).max(0.0);
        }
        basis.push(q);
        chosen.push(x);
    }
    if chosen.len() < n {
        return Err(Error::InsufficientRank {
            expected: n,
            found: chosen.len(),
        });
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Audit record of one eigenbasis purification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCertificate {
    pub product_indices: Vec<usize>,
    /// `f[(i, a)] = lambda_i <phi_i|x_a>`.
    #[serde(with = "square")]
    pub f_matrix: CMatrix,
    #[serde(with = "square")]
    pub g_matrix: CMatrix,
    pub inverse_residual: f64,
    pub eigenvalues: Vec<f64>,
    /// Largest Schmidt rank of each image `rho|x_a>`.
    pub image_sr: Vec<usize>,
    pub per_eigenvector_sr: Vec<usize>,
    /// Measured operator Schmidt rank of the input.
    pub osr: usize,
    pub rank: usize,
    #[serde(rename = "bound_Dn")]
    pub bound_dn: usize,
    #[serde(rename = "bound_Dn2")]
    pub bound_dn2: usize,
    pub purification_rank: usize,
    /// `||tr_anc |Psi><Psi| - rho||_1`.
    pub reconstruction_error: f64,
}

impl EigenCertificate {
    /// Every rank bound of the method holds on this instance.
    pub fn bounds_hold(&self) -> bool {
        self.image_sr.iter().all(|&r| r <= self.osr)
            && self.per_eigenvector_sr.iter().all(|&r| r <= self.bound_dn)
            && self.purification_rank <= self.bound_dn2
    }
}

mod square {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::CMatrix;
    use crate::tensor::{matrix_to_pairs, pairs_to_matrix};

    #[derive(Serialize, Deserialize)]
    struct Record {
        dim: usize,
        entries: Vec<[f64; 2]>,
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        Record {
            dim: m.nrows(),
            entries: matrix_to_pairs(m),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let r = Record::deserialize(d)?;
        pairs_to_matrix(&r.entries, r.dim).map_err(serde::de::Error::custom)
    }
}

/// Purification `sum_i sqrt(lambda_i) |phi_i>|i>` with every `phi_i` rebuilt
/// from the product-state images; the ancilla of dimension `n` sits on the
/// last site.
pub fn eigen_purification(rho: &DensityMatrix, tol: f64) -> Result<(MpsPurification, EigenCertificate)> {
    crate::check_dense(rho.dim())?;
    let (vals, vecs) = rho.eigh();
    let n = rho.rank(tol);
    if n == 0 {
        return Err(invalid("density matrix is zero"));
    }
    let labels = select_product_basis(rho, tol)?;
    let lambda = &vals[..n];
    let phi = vecs.columns(0, n);
    let f = CMatrix::from_fn(n, n, |i, a| phi[(labels[a], i)].conj() * lambda[i]);
    let g = f
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("coefficient matrix is not invertible".into()))?;
    let inverse_residual = linalg::frobenius(&(&f * &g - CMatrix::identity(n, n)));
    if !(inverse_residual <= INVERSE_TOL) {
        return Err(Error::Singular(format!(
            "coefficient inversion residual {inverse_residual:e}"
        )));
    }

    let m = rho.matrix();
    let chi = CMatrix::from_fn(rho.dim(), n, |p, a| m[(p, labels[a])]);
    let rebuilt = &chi * &g;

    let d = rho.local_dim();
    let sites = rho.n_sites();
    let site_dims = vec![d; sites];
    let sr = |v: CVector| -> Result<usize> { Ok(schmidt_rank(&PureState::new(site_dims.clone(), v)?, tol).max) };
    let image_sr = (0..n)
        .map(|a| sr(chi.column(a).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    let per_eigenvector_sr = (0..n)
        .map(|i| sr(rebuilt.column(i).into_owned()))
        .collect::<Result<Vec<_>>>()?;

    let mut amps = vec![ZERO; rho.dim() * n];
    for p in 0..rho.dim() {
        for i in 0..n {
            amps[p * n + i] = rebuilt[(p, i)] * lambda[i].max(0.0).sqrt();
        }
    }
    let mut ancilla = vec![1; sites];
    ancilla[sites - 1] = n;
    let psi = MpsPurification::from_dense(&amps, d, ancilla, tol)?;
    let back = trace_out_ancilla(&psi)?;
    let reconstruction_error = linalg::trace_norm(&(back.matrix() - m));

    let osr = operator_schmidt_rank(rho, tol).max;
    let cert = EigenCertificate {
        product_indices: labels,
        f_matrix: f,
        g_matrix: g,
        inverse_residual,
        eigenvalues: lambda.to_vec(),
        image_sr,
        per_eigenvector_sr,
        osr,
        rank: n,
        bound_dn: osr * n,
        bound_dn2: osr * n * n,
        purification_rank: purification_rank(&psi, tol),
        reconstruction_error,
    };
    Ok((psi, cert))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub s: usize,
    pub sigma: DensityMatrix,
    /// `||rho - sigma||_1` computed densely.
    pub distance: f64,
    /// `2 sum_{i>s} lambda_i`.
    pub tail_bound: f64,
}

/// Keeps the `s` largest eigenvalues of `rho` and renormalizes.
pub fn truncate_spectrum(rho: &DensityMatrix, s: usize) -> Result<Truncation> {
    crate::check_dense(rho.dim())?;
    let n = rho.rank(crate::DEFAULT_RANK_TOL);
    if s == 0 || s > n {
        return Err(invalid(format!("s = {s} outside 1..={n}")));
    }
    let (vals, vecs) = rho.eigh();
    let kept: f64 = vals[..s].iter().sum();
    let dim = rho.dim();
    let mut sigma = CMatrix::zeros(dim, dim);
    for (i, &l) in vals[..s].iter().enumerate() {
        let v = vecs.column(i);
        sigma += (&v * v.adjoint()).scale(l / kept);
    }
    let sigma = (&sigma + sigma.adjoint()).scale(0.5);
    let distance = linalg::trace_norm(&(rho.matrix() - &sigma));
    let tail_bound = 2.0 * vals[s..].iter().map(|v| v.max(0.0)).sum::<f64>();
    Ok(Truncation {
        s,
        sigma: DensityMatrix::from_psd_unchecked(sigma, rho.n_sites(), rho.local_dim()),
        distance,
        tail_bound,
    })
}

/// Smallest `s` whose discarded weight in `values` (non-increasing, summing
/// to one) is at most `eps / 2`.
pub fn truncation_size(values: &[f64], eps: f64) -> Result<usize> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(invalid(format!("eps = {eps} outside [0, 2]")));
    }
    let mut tail: f64 = values.iter().sum();
    for (s, &v) in values.iter().enumerate() {
        if s > 0 && tail <= eps / 2.0 {
            return Ok(s);
        }
        tail -= v;
    }
    Ok(values.len().max(1))
}

/// Upper bound on the purification rank of the `eps`-truncated state
/// reachable with the eigenbasis method, for an input of operator Schmidt
/// rank `d_osr` whose spectrum follows `kind` with `n` levels.
pub fn bound_table(
    kind: DistributionKind,
    d_osr: usize,
    eps: f64,
    n: usize,
    params: &DistributionParams,
) -> Result<f64> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(invalid(format!("eps = {eps} outside [0, 2]")));
    }
    if d_osr == 0 || n == 0 {
        return Err(invalid("D and n must be positive"));
    }
    let dd = d_osr as f64;
    let nf = n as f64;
    let quadratic = |inner: f64| dd / 4.0 * ((1.0 + inner).max(0.0).sqrt() - 1.0).powi(2);
    Ok(match kind {
        DistributionKind::Uniform | DistributionKind::Random => dd * nf * nf * (1.0 - eps / 2.0).powi(2),
        DistributionKind::EquallySpaced => quadratic(4.0 * nf * (nf + 1.0) * (1.0 - eps / 2.0)),
        DistributionKind::OneFixed => quadratic(4.0 * nf * (nf + 1.0) * (1.0 - eps) + 8.0 * eps),
        DistributionKind::Exponential => {
            if !(params.b > 0.0) {
                return Err(invalid("exponential decay constant must be positive"));
            }
            dd / (params.b * params.b) * (2.0 / eps).ln().powi(2)
        }
    })
}
