//! Sum-of-squares polynomial purification.
//!
//! A purification built from the powers `rho^0, .., rho^{k-1}` and ancilla
//! vectors with Gram matrix `R` reduces to `p(rho)` with
//! `p(x) = v_k(x)^T R v_k(x)`, `v_k(x) = (1, x, .., x^{k-1})`. Every such `p` is
//! a sum of squares and therefore nonnegative on the real line.
//!
//! Polynomials are stored at the scale of the largest eigenvalue `s`:
//! `p(x) = s * v(x/s)^T R~ v(x/s)`. The unscaled Gram is
//! `R = s * S R~ S` with `S = diag(s^0, s^{-1}, ..)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::spectra::{distinct_values, Spectrum, DEFAULT_DISTINCT_TOL};
use crate::tensor::{checked_dim, matrix_to_pairs, pairs_to_matrix, DensityMatrix, MpsPurification};
use crate::{Complex64, DEFAULT_RANK_TOL};

/// Relative PSD tolerance for Gram matrices.
pub const PSD_TOL: f64 = 1e-10;

/// Above this many interpolation nodes, ansatz products are accumulated as
/// sums of logarithms.
const LOG_DOMAIN_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Exact,
    Lagrange,
    ExpAnsatz,
    Sdp,
}

/// Interpolation nodes of the closed-form ansätze, kept so values can be
/// evaluated from the product formula instead of the monomial Gram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "nodes", rename_all = "snake_case")]
pub enum ProductForm {
    /// `sum_j mu_j L_j(x)^2`.
    Lagrange(Vec<f64>),
    /// `x^2 sum_r L_r(x)^2 / mu_r`.
    ExpAnsatz(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramPolynomial {
    k: usize,
    scale: f64,
    rescaled: CMatrix,
    origin: Origin,
    /// Rows `a_u` with `A^† A = R~`.
    factor: CMatrix,
    product: Option<ProductForm>,
}

impl GramPolynomial {
    /// From an unscaled Hermitian PSD Gram matrix.
    pub fn from_gram(gram: CMatrix, origin: Origin) -> Result<Self> {
        Self::from_scaled(gram, 1.0, origin)
    }

    /// From a Gram matrix in the variable `x / scale`.
    pub fn from_scaled(rescaled: CMatrix, scale: f64, origin: Origin) -> Result<Self> {
        let k = rescaled.nrows();
        if k == 0 || rescaled.ncols() != k {
            return Err(invalid("Gram matrix must be square and nonempty"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("scale {scale} must be positive")));
        }
        let norm = linalg::frobenius(&rescaled);
        let deviation = linalg::hermitian_deviation(&rescaled);
        if deviation > 1e-10 * norm.max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        let rescaled = (&rescaled + rescaled.adjoint()).scale(0.5);
        let factor = psd_factor(&rescaled)?;
        Ok(Self {
            k,
            scale,
            rescaled,
            origin,
            factor,
            product: None,
        })
    }

    pub fn zero(k: usize) -> Result<Self> {
        Self::from_gram(CMatrix::zeros(k, k), Origin::Sdp)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn product_form(&self) -> Option<&ProductForm> {
        self.product.as_ref()
    }

    pub fn rescaled_gram(&self) -> &CMatrix {
        &self.rescaled
    }

    /// Gram matrix in the monomial basis of the unscaled variable.
    pub fn gram(&self) -> CMatrix {
        let s = self.scale;
        CMatrix::from_fn(self.k, self.k, |i, j| {
            self.rescaled[(i, j)] * s.powi(1 - i as i32 - j as i32)
        })
    }

    /// Rows of `A` with `A^† A = R~` (rescaled variable).
    pub fn factor(&self) -> &CMatrix {
        &self.factor
    }

    pub fn is_real(&self) -> bool {
        self.rescaled.iter().all(|z| z.im == 0.0)
    }
}

#[derive(Serialize, Deserialize)]
struct GramRecord {
    k: usize,
    gram: Vec<[f64; 2]>,
    origin: Origin,
    scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    product: Option<ProductForm>,
}

impl Serialize for GramPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GramRecord {
            k: self.k,
            gram: matrix_to_pairs(&self.gram()),
            origin: self.origin,
            scale: self.scale,
            product: self.product.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GramPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = GramRecord::deserialize(deserializer)?;
        let gram = pairs_to_matrix(&rec.gram, rec.k).map_err(D::Error::custom)?;
        let s = rec.scale;
        let rescaled = CMatrix::from_fn(rec.k, rec.k, |i, j| {
            gram[(i, j)] * s.powi(i as i32 + j as i32 - 1)
        });
        let mut gp = GramPolynomial::from_scaled(rescaled, s, rec.origin).map_err(D::Error::custom)?;
        gp.product = rec.product;
        Ok(gp)
    }
}

/// Rows `sqrt(mu_u) e_u^†` of the eigendecomposition, dropping null directions.
fn psd_factor(r: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = linalg::hermitian_eigh(r);
    let norm = linalg::frobenius(r);
    let min = vals.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL * norm.max(1e-300) && min < -1e-14 {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let keep: Vec<usize> = (0..vals.len())
        .filter(|&u| vals[u] > 0.0)
        .collect();
    let mut a = CMatrix::zeros(keep.len(), r.nrows());
    for (row, &u) in keep.iter().enumerate() {
        let w = vals[u].sqrt();
        for l in 0..r.nrows() {
            a[(row, l)] = vecs[(l, u)].conj() * w;
        }
    }
    Ok(a)
}

/// `(1, x, .., x^{k-1})`.
pub fn vandermonde(lam: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k);
    let mut p = 1.0;
    for _ in 0..k {
        out.push(p);
        p *= lam;
    }
    out
}

/// `p(lam)`. Closed-form ansätze are evaluated from their product formula,
/// everything else as `s * sum_u |a_u . v(lam/s)|^2`.
pub fn eval_poly(gp: &GramPolynomial, lam: f64) -> f64 {
    match &gp.product {
        Some(ProductForm::Lagrange(nodes)) => lagrange_sum(nodes, lam, |mu| mu),
        Some(ProductForm::ExpAnsatz(nodes)) => lam * lam * lagrange_sum(nodes, lam, |mu| 1.0 / mu),
        None => gram_eval(gp, lam),
    }
}

/// `p(lam)` from the stored Gram factor, ignoring any product form.
pub fn eval_gram(gp: &GramPolynomial, lam: f64) -> f64 {
    gram_eval(gp, lam)
}

fn gram_eval(gp: &GramPolynomial, lam: f64) -> f64 {
    let v = vandermonde(lam / gp.scale, gp.k);
    let mut total = 0.0;
    for row in gp.factor.row_iter() {
        let y: Complex64 = row.iter().zip(&v).map(|(a, &x)| a * x).sum();
        total += y.norm_sqr();
    }
    gp.scale * total
}

/// `sum_j w(mu_j) prod_{i != j} ((lam - mu_i) / (mu_j - mu_i))^2`.
fn lagrange_sum(nodes: &[f64], lam: f64, weight: impl Fn(f64) -> f64) -> f64 {
    let log_domain = nodes.len() > LOG_DOMAIN_NODES;
    let mut total = 0.0;
    for (j, &mu) in nodes.iter().enumerate() {
        let ratios = nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &m)| (lam - m) / (mu - m));
        let sq = if log_domain {
            let mut log = 0.0;
            let mut zero = false;
            for r in ratios {
                if r == 0.0 {
                    zero = true;
                    break;
                }
                log += r.abs().ln();
            }
            if zero {
                0.0
            } else {
                (2.0 * log).exp()
            }
        } else {
            let l: f64 = ratios.product();
            l * l
        };
        total += weight(mu) * sq;
    }
    total
}

/// Exact Gram for the `m` distinct eigenvalues: `p_m(lambda_i) = lambda_i`
/// on every class representative (0 included when rank deficient).
pub fn exact_gram(spec: &Spectrum, tol: f64) -> Result<GramPolynomial> {
    let reps = distinct_values(spec, DEFAULT_DISTINCT_TOL);
    let s = spec.largest();
    if reps.is_empty() || s <= 0.0 {
        return Err(invalid("spectrum has no positive eigenvalue"));
    }
    let x: Vec<f64> = reps.iter().map(|l| l / s).collect();
    if let Some(gap) = x.windows(2).map(|w| w[0] - w[1]).reduce(f64::min) {
        if gap < tol {
            return Err(Error::Singular(format!(
                "rescaled eigenvalues {gap:e} apart, below tolerance {tol:e}"
            )));
        }
    }
    let m = x.len();
    // V^T W = I gives the biorthogonal columns w_j.
    let vt = DMatrix::from_fn(m, m, |j, i| x[j].powi(i as i32));
    let lu = vt.full_piv_lu();
    let w = lu
        .solve(&DMatrix::<f64>::identity(m, m))
        .ok_or_else(|| Error::Singular("Vandermonde matrix is singular".into()))?;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("Vandermonde solve overflowed".into()));
    }
    let mut r = DMatrix::<f64>::zeros(m, m);
    for (j, &xj) in x.iter().enumerate() {
        let col = w.column(j);
        r += col * col.transpose() * xj;
    }
    GramPolynomial::from_scaled(linalg::to_complex(&r), s, Origin::Exact)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SosDecomposition {
    scale: f64,
    /// Coefficients in the rescaled variable.
    rows: Vec<Vec<f64>>,
}

impl SosDecomposition {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Monomial coefficients of each `y_u` in the unscaled variable, so that
    /// `p(x) = sum_u y_u(x)^2`.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        let s = self.scale;
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(i, c)| c * s.sqrt() * s.powi(-(i as i32)))
                    .collect()
            })
            .collect()
    }

    /// `(y_1(x), .., y_r(x))`.
    pub fn eval_terms(&self, lam: f64) -> Vec<f64> {
        let k = self.rows.first().map_or(0, Vec::len);
        let v = vandermonde(lam / self.scale, k);
        self.rows
            .iter()
            .map(|r| self.scale.sqrt() * r.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    pub fn eval(&self, lam: f64) -> f64 {
        self.eval_terms(lam).iter().map(|y| y * y).sum()
    }
}

/// Sum of real squares `p = sum_u y_u^2` from the eigendecomposition of the
/// real part of the Gram matrix.
pub fn sos_decompose(gp: &GramPolynomial) -> Result<SosDecomposition> {
    let real = gp.rescaled.map(|z| z.re);
    let norm = real.norm();
    let (vals, vecs) = linalg::symmetric_eigh(&real);
    let min = vals.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL * norm && min < -1e-14 {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let rows = vals
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v > DEFAULT_RANK_TOL * top && v > 0.0)
        .map(|(u, &v)| vecs.column(u).iter().map(|e| e * v.sqrt()).collect())
        .collect();
    Ok(SosDecomposition {
        scale: gp.scale,
        rows,
    })
}

/// Real part of the Gram matrix; the imaginary part is antisymmetric and
/// drops out of `v^T R v` for real `v`.
pub fn real_reduce(gp: &GramPolynomial) -> GramPolynomial {
    let real = gp.rescaled.map(|z| Complex64::new(z.re, 0.0));
    let mut out = GramPolynomial::from_scaled(real, gp.scale, gp.origin)
        .expect("real part of a PSD Hermitian matrix is PSD");
    out.product = gp.product.clone();
    out
}

/// Monomial coefficients of `prod_{i != j} (x - x_i) / (x_j - x_i)`.
fn lagrange_coefficients(x: &[f64], j: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for (i, &xi) in x.iter().enumerate() {
        if i == j {
            continue;
        }
        let denom = x[j] - xi;
        let mut next = vec![0.0; c.len() + 1];
        for (p, &cp) in c.iter().enumerate() {
            next[p + 1] += cp / denom;
            next[p] -= cp * xi / denom;
        }
        c = next;
    }
    c
}

fn check_nodes(points: &[f64]) -> Result<f64> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let top = sorted.first().copied().unwrap_or(0.0);
    if sorted.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(invalid("interpolation points must be positive"));
    }
    if sorted.windows(2).any(|w| w[0] - w[1] <= 1e-14 * top) {
        return Err(invalid("interpolation points must be distinct"));
    }
    Ok(top)
}

/// `p(x) = sum_j mu_j L_j(x)^2`; matches `x` at every node. The Gram size is
/// `points.len() + 1`.
pub fn lagrange_squared(points: &[f64]) -> Result<GramPolynomial> {
    if points.is_empty() {
        return Err(invalid("at least one interpolation point is required"));
    }
    let s = check_nodes(points)?;
    let k = points.len() + 1;
    let x: Vec<f64> = points.iter().map(|p| p / s).collect();
    let mut r = DMatrix::<f64>::zeros(k, k);
    for (j, &xj) in x.iter().enumerate() {
        let mut c = lagrange_coefficients(&x, j);
        c.resize(k, 0.0);
        let c = nalgebra::DVector::from_vec(c);
        r += &c * c.transpose() * xj;
    }
    let mut gp = GramPolynomial::from_scaled(linalg::to_complex(&r), s, Origin::Lagrange)?;
    gp.product = Some(ProductForm::Lagrange(points.to_vec()));
    Ok(gp)
}

/// `p(x) = x^2 sum_r L_r(x)^2 / lambda_r` through the `k - 2` largest
/// eigenvalues, with a double root at zero.
pub fn exp_ansatz(spec: &Spectrum, k: usize) -> Result<GramPolynomial> {
    if k < 3 {
        return Err(invalid("the ansatz needs k >= 3"));
    }
    let nodes: Vec<f64> = spec.values().iter().copied().filter(|&v| v > 0.0).take(k - 2).collect();
    if nodes.len() < k - 2 {
        return Err(invalid(format!(
            "k - 2 = {} exceeds the {} nonzero eigenvalues",
            k - 2,
            nodes.len()
        )));
    }
    let s = check_nodes(&nodes)?;
    let x: Vec<f64> = nodes.iter().map(|p| p / s).collect();
    let mut r = DMatrix::<f64>::zeros(k, k);
    for (j, &xj) in x.iter().enumerate() {
        let mut c = vec![0.0];
        c.extend(lagrange_coefficients(&x, j));
        c.resize(k, 0.0);
        let c = nalgebra::DVector::from_vec(c);
        r += &c * c.transpose() / xj;
    }
    let mut gp = GramPolynomial::from_scaled(linalg::to_complex(&r), s, Origin::ExpAnsatz)?;
    gp.product = Some(ProductForm::ExpAnsatz(nodes));
    Ok(gp)
}

/// `|Psi_k> = sum_l |rho^l> (x) |a_l>`, split into a chain whose site `q` holds
/// the system leg `i_q` and the ancilla leg `j_q` (the bra index of the
/// vectorized power). The register `a` of the Gram factor is appended to the
/// last site.
pub fn build_purifying_state(rho: &DensityMatrix, gp: &GramPolynomial) -> Result<MpsPurification> {
    let (amps, ancilla) = purifying_vector(rho, gp)?;
    MpsPurification::from_dense(&amps, rho.local_dim(), ancilla, DEFAULT_RANK_TOL)
}

/// Dense amplitudes of the purifying state with the ancilla dimension of
/// each site.
pub(crate) fn purifying_vector(rho: &DensityMatrix, gp: &GramPolynomial) -> Result<(Vec<Complex64>, Vec<usize>)> {
    let n = rho.n_sites();
    let d = rho.local_dim();
    let dim = checked_dim(d, n)?;
    crate::check_dense(dim)?;
    let a = &gp.factor;
    let r = a.nrows().max(1);
    let rho_s = rho.matrix().unscale(gp.scale);
    let mut powers = Vec::with_capacity(gp.k);
    let mut p = CMatrix::identity(dim, dim);
    for _ in 0..gp.k {
        let next = &p * &rho_s;
        powers.push(p);
        p = next;
    }

    let site_dims: Vec<usize> = (0..n)
        .map(|q| if q + 1 == n { d * d * r } else { d * d })
        .collect();
    let total = dim * dim * r;
    let mut amps = vec![ZERO; total];
    let root = gp.scale.sqrt();
    let mut di = vec![0; n];
    let mut dj = vec![0; n];
    let dims = vec![d; n];
    for i in 0..dim {
        linalg::digits(i, &dims, &mut di);
        for j in 0..dim {
            linalg::digits(j, &dims, &mut dj);
            let mut base = 0;
            for q in 0..n {
                base = base * site_dims[q] + (di[q] * d + dj[q]) * if q + 1 == n { r } else { 1 };
            }
            for u in 0..a.nrows() {
                let z: Complex64 = (0..gp.k).map(|l| powers[l][(i, j)] * a[(u, l)]).sum();
                amps[base + u] = z * root;
            }
        }
    }
    let mut ancilla = vec![d; n];
    ancilla[n - 1] = d * r;
    Ok((amps, ancilla))
}

/// Eigenvalues `p(lambda_i)` of `sigma_k = p(rho)`, zeros of `rho` mapped to
/// `p(0)`. Not renormalized: the trace of the result is the raw trace.
pub fn sigma_of_poly(spec: &Spectrum, gp: &GramPolynomial) -> Spectrum {
    let values = sigma_values(spec, gp);
    Spectrum::new(values.into_iter().map(|v| v.max(0.0)).collect(), spec.ambient_dim())
        .expect("sum-of-squares values are nonnegative")
}

/// `p(lambda_i)` for every eigenvalue of `spec` in its stored order followed
/// by `p(0)` for the implicit zeros.
pub fn sigma_values(spec: &Spectrum, gp: &GramPolynomial) -> Vec<f64> {
    let mut out: Vec<f64> = spec.values().iter().map(|&l| eval_poly(gp, l)).collect();
    let p0 = eval_poly(gp, 0.0);
    out.resize(spec.ambient_dim(), p0);
    out
}

/// `sum_i |lambda_i - p(lambda_i)| + (ambient_dim - n) p(0)`, which equals the
/// trace distance `||rho - p(rho)||_1`.
pub fn sos_distance(spec: &Spectrum, gp: &GramPolynomial, ambient_dim: usize) -> f64 {
    let explicit: f64 = spec.values().iter().map(|&l| (l - eval_poly(gp, l)).abs()).sum();
    let zeros = ambient_dim.saturating_sub(spec.values().len());
    explicit + zeros as f64 * eval_poly(gp, 0.0).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankBound {
    pub value: usize,
    pub saturated: bool,
}

/// `1 + D + .. + D^{k-1}`, saturating at `usize::MAX`.
pub fn sos_rank_bound(d: usize, k: usize) -> Result<RankBound> {
    if d == 0 || k == 0 {
        return Err(invalid("D and k must be at least 1"));
    }
    let mut value: usize = 0;
    let mut term: usize = 1;
    for l in 0..k {
        value = match value.checked_add(term) {
            Some(v) => v,
            None => return Ok(RankBound { value: usize::MAX, saturated: true }),
        };
        if l + 1 < k {
            term = match term.checked_mul(d) {
                Some(t) => t,
                None => return Ok(RankBound { value: usize::MAX, saturated: true }),
            };
        }
    }
    Ok(RankBound {
        value,
        saturated: false,
    })
}

/// Sampling helper: `min p(lam)` over `samples` evenly spaced points of
/// `[lo, hi]`.
pub fn min_on_interval(gp: &GramPolynomial, lo: f64, hi: f64, samples: usize) -> f64 {
    let n = samples.max(2);
    (0..n)
        .map(|i| eval_poly(gp, lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{assemble_density, make_distribution, Basis, DistributionKind, DistributionParams};
    use crate::tensor::{operator_schmidt_rank, purification_rank, trace_out_ancilla, trace_norm};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_gram(rows: &[&[f64]]) -> GramPolynomial {
        let k = rows.len();
        GramPolynomial::from_gram(CMatrix::from_fn(k, k, |i, j| c(rows[i][j], 0.0)), Origin::Sdp).unwrap()
    }

    fn random_psd(k: usize, seed: u64) -> GramPolynomial {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::<f64>::from_fn(k, k, |_, _| rng.random::<f64>() - 0.5);
        GramPolynomial::from_gram(linalg::to_complex(&(&b * b.transpose())), Origin::Sdp).unwrap()
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde(0.0, 3), vec![1.0, 0.0, 0.0]);
        assert_eq!(vandermonde(1.0, 4), vec![1.0; 4]);
        assert_eq!(vandermonde(2.0, 3), vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn eval_examples() {
        let gp = real_gram(&[&[1.0, 0.0], &[0.0, 1.0]]);
        for lam in [-1.5, 0.0, 0.3, 2.0] {
            assert!((eval_poly(&gp, lam) - (1.0 + lam * lam)).abs() < 1e-14);
        }
        let gp = real_gram(&[&[0.2]]);
        assert!((eval_poly(&gp, 0.7) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn exact_gram_uniform_is_constant() {
        let spec = make_distribution(DistributionKind::Uniform, 7, &DistributionParams::default()).unwrap();
        let gp = exact_gram(&spec, 1e-12).unwrap();
        assert_eq!(gp.k(), 1);
        assert!((gp.gram()[(0, 0)].re - 1.0 / 7.0).abs() < 1e-15);
        for lam in [-1.0, 0.0, 0.5] {
            assert!((eval_poly(&gp, lam) - 1.0 / 7.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_gram_two_levels_matches_hand_solution() {
        let spec = Spectrum::new(vec![2.0 / 3.0, 1.0 / 3.0], 2).unwrap();
        let gp = exact_gram(&spec, 1e-12).unwrap();
        // V = [[1, 1], [2/3, 1/3]]; w_1 = (-1, 3), w_2 = (2, -3) satisfy
        // <w_i, v_j> = delta_ij, so R = 2/3 w1 w1^T + 1/3 w2 w2^T.
        let w1 = [-1.0, 3.0];
        let w2 = [2.0, -3.0];
        let g = gp.gram();
        for i in 0..2 {
            for j in 0..2 {
                let expect = 2.0 / 3.0 * w1[i] * w1[j] + 1.0 / 3.0 * w2[i] * w2[j];
                assert!((g[(i, j)].re - expect).abs() < 1e-12, "{i}{j}");
            }
        }
        assert!((eval_poly(&gp, 2.0 / 3.0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((eval_poly(&gp, 1.0 / 3.0) - 1.0 / 3.0).abs() < 1e-12);
        assert!(eval_poly(&gp, 0.0) >= 0.0);
        assert!(g[(0, 1)].re.abs() > 0.1);
    }

    #[test]
    fn exact_gram_pure_state() {
        let spec = Spectrum::new(vec![1.0], 2).unwrap();
        let gp = exact_gram(&spec, 1e-12).unwrap();
        assert_eq!(gp.k(), 2);
        assert!((eval_poly(&gp, 1.0) - 1.0).abs() < 1e-12);
        assert!(eval_poly(&gp, 0.0).abs() < 1e-12);
    }

    #[test]
    fn exact_gram_interpolates_after_rescaling() {
        let p = DistributionParams::default();
        for kind in [DistributionKind::EquallySpaced, DistributionKind::OneFixed, DistributionKind::Exponential] {
            let spec = make_distribution(kind, 5, &p).unwrap();
            let gp = exact_gram(&spec, 1e-12).unwrap();
            for &l in spec.values() {
                assert!((eval_poly(&gp, l) - l).abs() < 1e-8, "{kind}");
            }
            assert!(sos_distance(&spec, &gp, 5) < 1e-8);
        }
    }

    #[test]
    fn exact_gram_rejects_close_values() {
        let spec = Spectrum::new(vec![0.5, 0.5 - 1e-9, 1e-9], 3).unwrap();
        assert!(matches!(exact_gram(&spec, 1e-6), Err(Error::Singular(_))));
    }

    #[test]
    fn sos_decompose_examples() {
        let gp = real_gram(&[&[4.0]]);
        let dec = sos_decompose(&gp).unwrap();
        assert_eq!(dec.rank(), 1);
        assert!((dec.rows()[0][0].abs() - 2.0).abs() < 1e-14);

        let gp = real_gram(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let dec = sos_decompose(&gp).unwrap();
        assert_eq!(dec.rank(), 1);
        let row = &dec.rows()[0];
        let sign = row[0].signum();
        assert!((row[0] * sign - 1.0).abs() < 1e-14 && (row[1] * sign - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sos_decompose_reconstructs_random_gram() {
        let gp = random_psd(4, 3);
        let dec = sos_decompose(&gp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let lam = rng.random_range(-2.0..2.0);
            assert!((dec.eval(lam) - eval_poly(&gp, lam)).abs() < 1e-10);
        }
    }

    #[test]
    fn non_psd_gram_rejected() {
        let bad = CMatrix::from_fn(2, 2, |i, j| if i == j { c(1.0, 0.0) } else { c(2.0, 0.0) });
        assert!(matches!(GramPolynomial::from_gram(bad, Origin::Sdp), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn real_reduce_drops_antisymmetric_part() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let gp = GramPolynomial::from_gram(m, Origin::Sdp).unwrap();
        let re = real_reduce(&gp);
        assert!(re.is_real());
        assert_eq!(re.gram(), CMatrix::identity(2, 2));
        for lam in [-2.0, -0.3, 0.0, 1.1] {
            assert!((eval_poly(&gp, lam) - (1.0 + lam * lam)).abs() < 1e-12);
            assert!((eval_poly(&re, lam) - (1.0 + lam * lam)).abs() < 1e-12);
        }
        let spec = Spectrum::new(vec![0.5, 0.3, 0.2], 3).unwrap();
        let exact = exact_gram(&spec, 1e-12).unwrap();
        let same = real_reduce(&exact);
        for &l in spec.values() {
            assert!((eval_poly(&same, l) - l).abs() < 1e-10);
        }
    }

    #[test]
    fn lagrange_examples() {
        let gp = lagrange_squared(&[0.5]).unwrap();
        assert_eq!(gp.k(), 2);
        for lam in [0.0, 0.5, 1.7] {
            assert!((eval_poly(&gp, lam) - 0.5).abs() < 1e-15);
            assert!((eval_gram(&gp, lam) - 0.5).abs() < 1e-14);
        }
        let gp = lagrange_squared(&[1.0, 2.0]).unwrap();
        assert!((eval_poly(&gp, 1.0) - 1.0).abs() < 1e-14);
        assert!((eval_poly(&gp, 2.0) - 2.0).abs() < 1e-14);
        assert!(lagrange_squared(&[0.3, 0.3]).is_err());
        assert!(lagrange_squared(&[0.3, -0.1]).is_err());
    }

    #[test]
    fn lagrange_distance_matches_direct_sum() {
        let spec = make_distribution(DistributionKind::EquallySpaced, 10, &DistributionParams::default()).unwrap();
        let pts = &spec.values()[..3];
        let gp = lagrange_squared(pts).unwrap();
        let mut direct = 0.0;
        for &l in spec.values() {
            let mut p = 0.0;
            for (j, &mj) in pts.iter().enumerate() {
                let mut prod = 1.0;
                for (i, &mi) in pts.iter().enumerate() {
                    if i != j {
                        prod *= (l - mi) / (mj - mi);
                    }
                }
                p += mj * prod * prod;
            }
            direct += (l - p).abs();
        }
        let dist = sos_distance(&spec, &gp, 10);
        assert!(dist.is_finite());
        assert!((dist - direct).abs() < 1e-12);
        // Gram and product forms describe the same polynomial.
        for &l in spec.values() {
            let p = eval_poly(&gp, l);
            assert!((eval_gram(&gp, l) - p).abs() < 1e-10 * p.max(1.0));
        }
    }

    #[test]
    fn lagrange_through_all_values_is_exact() {
        let spec = Spectrum::new(vec![0.4, 0.3, 0.2, 0.1], 4).unwrap();
        let gp = lagrange_squared(spec.values()).unwrap();
        let sigma = sigma_of_poly(&spec, &gp);
        for (a, b) in sigma.values().iter().zip(spec.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_ansatz_examples() {
        let p = DistributionParams::default();
        let spec = make_distribution(DistributionKind::Exponential, 20, &p).unwrap();
        let gp = exp_ansatz(&spec, 3).unwrap();
        let l1 = spec.values()[0];
        for lam in [0.0, 0.1, l1, 0.9] {
            assert!((eval_poly(&gp, lam) - lam * lam / l1).abs() < 1e-15);
            assert!((eval_gram(&gp, lam) - lam * lam / l1).abs() < 1e-12);
        }
        let gp = exp_ansatz(&spec, 5).unwrap();
        for &l in &spec.values()[..3] {
            assert!((eval_poly(&gp, l) - l).abs() < 1e-10);
        }
        assert!(eval_poly(&gp, 0.0).abs() < 1e-300);
        assert!(exp_ansatz(&spec, 2).is_err());
        assert!(exp_ansatz(&spec, 23).is_err());
    }

    #[test]
    fn exp_ansatz_decays_at_rate_b() {
        let spec = make_distribution(DistributionKind::Exponential, 40, &DistributionParams::default()).unwrap();
        let ks: Vec<f64> = (3..=10).map(f64::from).collect();
        let logs: Vec<f64> = (3..=10)
            .map(|k| sos_distance(&spec, &exp_ansatz(&spec, k).unwrap(), 40).ln())
            .collect();
        let mk = ks.iter().sum::<f64>() / ks.len() as f64;
        let ml = logs.iter().sum::<f64>() / logs.len() as f64;
        let slope = ks.iter().zip(&logs).map(|(k, l)| (k - mk) * (l - ml)).sum::<f64>()
            / ks.iter().map(|k| (k - mk).powi(2)).sum::<f64>();
        assert!((0.7..=1.3).contains(&-slope), "rate {}", -slope);
    }

    #[test]
    fn log_domain_matches_direct_products() {
        let nodes: Vec<f64> = (1..=12).map(|j| 0.5f64.powi(j)).collect();
        let direct = |lam: f64| {
            let mut total = 0.0;
            for (j, &mj) in nodes.iter().enumerate() {
                let mut prod = 1.0;
                for (i, &mi) in nodes.iter().enumerate() {
                    if i != j {
                        prod *= (lam - mi) / (mj - mi);
                    }
                }
                total += mj * prod * prod;
            }
            total
        };
        let gp = lagrange_squared(&nodes).unwrap();
        for lam in [0.0, 0.01, 0.3, 0.6] {
            let (a, b) = (eval_poly(&gp, lam), direct(lam));
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-12), "{lam}: {a} vs {b}");
        }
    }

    #[test]
    fn sigma_and_distance_of_zero_gram() {
        let spec = Spectrum::new(vec![0.5, 0.3, 0.2], 8).unwrap();
        let gp = GramPolynomial::zero(3).unwrap();
        let sigma = sigma_of_poly(&spec, &gp);
        assert!(sigma.values().iter().all(|&v| v == 0.0));
        assert!((sos_distance(&spec, &gp, 8) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_bound_examples() {
        assert_eq!(sos_rank_bound(1, 5).unwrap(), RankBound { value: 5, saturated: false });
        assert_eq!(sos_rank_bound(2, 3).unwrap().value, 7);
        assert_eq!(sos_rank_bound(3, 4).unwrap().value, 40);
        assert!(sos_rank_bound(10, 40).unwrap().saturated);
        assert!(sos_rank_bound(0, 2).is_err());
    }

    #[test]
    fn distance_equals_dense_trace_norm() {
        let spec = Spectrum::new(vec![0.45, 0.25, 0.2, 0.1], 8).unwrap();
        let rho = assemble_density(&spec, &Basis::RandomHaar { seed: 11 }, 2).unwrap();
        let gp = random_psd(3, 4);
        let psi = build_purifying_state(&rho, &gp).unwrap();
        let sigma = trace_out_ancilla(&psi).unwrap();
        let dense = trace_norm(&(rho.matrix() - sigma.matrix()));
        assert!((dense - sos_distance(&spec, &gp, 8)).abs() < 1e-9);
    }

    #[test]
    fn purification_of_uniform_state() {
        let spec = make_distribution(DistributionKind::Uniform, 8, &DistributionParams::default()).unwrap();
        let rho = assemble_density(&spec, &Basis::RandomHaar { seed: 2 }, 2).unwrap();
        let gp = exact_gram(&spec, 1e-12).unwrap();
        let psi = build_purifying_state(&rho, &gp).unwrap();
        let sigma = trace_out_ancilla(&psi).unwrap();
        assert!(linalg::frobenius(&(sigma.matrix() - rho.matrix())) < 1e-10);
        assert_eq!(purification_rank(&psi, 1e-9), 1);
    }

    #[test]
    fn exact_purification_reproduces_rho() {
        let spec = Spectrum::new(vec![0.4, 0.3, 0.2, 0.1], 8).unwrap();
        let rho = assemble_density(&spec, &Basis::RandomHaar { seed: 7 }, 2).unwrap();
        let gp = exact_gram(&spec, 1e-12).unwrap();
        assert_eq!(gp.k(), 5);
        let psi = build_purifying_state(&rho, &gp).unwrap();
        let sigma = trace_out_ancilla(&psi).unwrap();
        assert!(trace_norm(&(sigma.matrix() - rho.matrix())) < 1e-8);
        let d = operator_schmidt_rank(&rho, 1e-9).max;
        let bound = sos_rank_bound(d, gp.k()).unwrap().value;
        assert!(purification_rank(&psi, 1e-9) <= bound);
    }

    #[test]
    fn gram_json_roundtrip() {
        let spec = Spectrum::new(vec![0.05, 0.03, 0.02], 3).unwrap();
        let gp = exact_gram(&spec, 1e-12).unwrap();
        let text = serde_json::to_string(&gp).unwrap();
        assert!(text.contains("\"origin\":\"exact\""));
        let back: GramPolynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(back.k(), 3);
        for lam in [0.0, 0.02, 0.05] {
            assert!((eval_poly(&back, lam) - eval_poly(&gp, lam)).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn constructed_polynomials_are_nonnegative(seed in any::<u64>(), k in 1usize..6) {
            let gp = random_psd(k, seed);
            prop_assert!(min_on_interval(&gp, -2.0, 2.0, 1000) >= -1e-10);
        }

        #[test]
        fn real_reduce_preserves_values(seed in any::<u64>(), k in 1usize..5, lam in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = CMatrix::from_fn(k, k, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let gp = GramPolynomial::from_gram(&b * b.adjoint(), Origin::Sdp).unwrap();
            let re = real_reduce(&gp);
            prop_assert!((eval_poly(&gp, lam) - eval_poly(&re, lam)).abs() <= 1e-12);
        }

        #[test]
        fn purification_has_sigma_spectrum(seed in 0u64..1000, k in 1usize..4) {
            let spec = make_distribution(
                DistributionKind::Random, 4, &DistributionParams { seed, ..Default::default() },
            ).unwrap().with_ambient_dim(8).unwrap();
            let rho = assemble_density(&spec, &Basis::RandomHaar { seed }, 2).unwrap();
            let gp = random_psd(k, seed);
            let psi = build_purifying_state(&rho, &gp).unwrap();
            let sigma = trace_out_ancilla(&psi).unwrap();
            let (vals, _) = sigma.eigh();
            let expect = sigma_of_poly(&spec, &gp).full_values();
            for (a, b) in vals.iter().zip(&expect) {
                prop_assert!((a - b).abs() < 1e-8);
            }
            let osr = operator_schmidt_rank(&rho, 1e-9).max;
            prop_assert!(purification_rank(&psi, 1e-9) <= sos_rank_bound(osr, k).unwrap().value);
        }
    }
}
