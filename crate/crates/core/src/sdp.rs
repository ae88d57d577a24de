//! Interior-point solver for the sum-of-squares fitting problem
//!
//! ```text
//! minimize    sum_i z_i
//! subject to  z_i >= lambda_i - v(lambda_i)^T R v(lambda_i)
//!             z_i >= v(lambda_i)^T R v(lambda_i) - lambda_i
//!             R PSD
//! ```
//!
//! written in standard form with one nonnegative slack per inequality, so the
//! variable is block diagonal `diag(z) + diag(t) + R`. The method is the HKM
//! primal-dual path-following scheme with Mehrotra predictor-corrector steps,
//! started from a strictly feasible primal-dual pair.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, to_complex};
use crate::sos::{GramPolynomial, Origin};
use crate::spectra::{distinct_values, Spectrum, DEFAULT_DISTINCT_TOL};

/// Fitting problem for one spectrum and Gram size `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    k: usize,
    /// All `ambient_dim` eigenvalues, zeros included.
    values: Vec<f64>,
    /// Eigenvalues are divided by this before any Vandermonde work.
    scale: f64,
}

impl SdpProblem {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ambient_dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Two inequalities per eigenvalue.
    pub fn n_constraints(&self) -> usize {
        2 * self.values.len()
    }

    /// `(number of scalar slack blocks, PSD block size)`.
    pub fn block_dims(&self) -> (usize, usize) {
        (self.values.len(), self.k)
    }

    /// Right-hand side `(-lambda_1, .., -lambda_n, lambda_1, .., lambda_n)`.
    pub fn b(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|l| -l)
            .chain(self.values.iter().copied())
            .collect()
    }

    /// Inequality `j` as `<A_j, diag(z) + R> <= b_j` in the unscaled variable:
    /// returns the slack index, the sign of the rank-one PSD part and the
    /// Vandermonde vector.
    pub fn constraint(&self, j: usize) -> (usize, f64, Vec<f64>) {
        let n = self.values.len();
        let (i, sign) = if j < n { (j, -1.0) } else { (j - n, 1.0) };
        (i, sign, crate::sos::vandermonde(self.values[i], self.k))
    }

    /// Left-hand side of every inequality at `(z, R)`, unscaled.
    pub fn constraint_values(&self, z: &[f64], gram: &GramPolynomial) -> Vec<f64> {
        let n = self.values.len();
        (0..2 * n)
            .map(|j| {
                let i = j % n;
                let p = crate::sos::eval_gram(gram, self.values[i]);
                if j < n {
                    -z[i] - p
                } else {
                    -z[i] + p
                }
            })
            .collect()
    }
}

/// Fitting problem with eigenvalues rescaled by the largest one.
pub fn build_standard_form(spec: &Spectrum, k: usize, ambient_dim: usize) -> Result<SdpProblem> {
    build_standard_form_with(spec, k, ambient_dim, true)
}

/// As [`build_standard_form`], optionally without rescaling.
pub fn build_standard_form_with(
    spec: &Spectrum,
    k: usize,
    ambient_dim: usize,
    rescale: bool,
) -> Result<SdpProblem> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if ambient_dim < spec.values().len() || ambient_dim == 0 {
        return Err(invalid("ambient dimension smaller than the spectrum"));
    }
    let mut values = spec.values().to_vec();
    values.resize(ambient_dim, 0.0);
    let top = spec.largest();
    let scale = if rescale && top > 0.0 { top } else { 1.0 };
    Ok(SdpProblem { k, values, scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol_gap: 1e-7,
            tol_feas: 1e-7,
            max_iter: 200,
        }
    }
}

/// Objective values and residuals of one iterate, unscaled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub primal: f64,
    pub dual: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    /// Slack `z_i` of every eigenvalue, unscaled.
    pub z: Vec<f64>,
    pub gram: GramPolynomial,
    pub objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SdpStatus,
    pub history: Vec<IterationRecord>,
}

/// Eigenvalues merged into classes of equal rescaled value; the weight of a
/// class is its multiplicity. Optimal slacks within a class coincide, so the
/// merged problem has the same optimum with far fewer constraints.
struct Reduced {
    x: Vec<f64>,
    weights: DVector<f64>,
    class_of: Vec<usize>,
    /// Orthonormal basis (k x r) of the span of the Vandermonde vectors.
    basis: DMatrix<f64>,
    /// Columns `basis^T v(x_g)` (r x G).
    u: DMatrix<f64>,
}

impl Reduced {
    fn new(problem: &SdpProblem) -> Self {
        let mut x: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut class_of = Vec::with_capacity(problem.values.len());
        let mut sorted: Vec<(usize, f64)> = problem
            .values
            .iter()
            .map(|l| l / problem.scale)
            .enumerate()
            .collect();
        sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut index = vec![0; problem.values.len()];
        for &(i, xi) in &sorted {
            if x.last() != Some(&xi) {
                x.push(xi);
                weights.push(0.0);
            }
            *weights.last_mut().unwrap() += 1.0;
            index[i] = x.len() - 1;
        }
        class_of.extend(index);
        let k = problem.k;
        let v = DMatrix::from_fn(k, x.len(), |l, g| x[g].powi(l as i32));
        let svd = linalg::svd(&v);
        let su = svd.u.expect("left factor");
        let sv = &svd.singular_values;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > 1e-11 * smax).collect();
        let mut basis = DMatrix::zeros(k, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            basis.set_column(c, &su.column(i));
        }
        let u = basis.transpose() * &v;
        Self {
            x,
            weights: DVector::from_vec(weights),
            class_of,
            basis,
            u,
        }
    }

    fn groups(&self) -> usize {
        self.x.len()
    }

    fn rank(&self) -> usize {
        self.basis.ncols()
    }

    fn b(&self) -> DVector<f64> {
        let g = self.groups();
        DVector::from_fn(2 * g, |j, _| if j < g { -self.x[j] } else { self.x[j - g] })
    }

    /// `(u_g^T M u_g)_g`.
    fn quad(&self, m: &DMatrix<f64>) -> DVector<f64> {
        let mu = m * &self.u;
        DVector::from_fn(self.groups(), |g, _| self.u.column(g).dot(&mu.column(g)))
    }

    fn a_op(&self, z: &DVector<f64>, t: &DVector<f64>, x: &DMatrix<f64>) -> DVector<f64> {
        let g = self.groups();
        let q = self.quad(x);
        DVector::from_fn(2 * g, |j, _| {
            let c = j % g;
            let sign = if j < g { -1.0 } else { 1.0 };
            -z[c] + sign * q[c] + t[j]
        })
    }

    /// Adjoint: `(z-block, t-block, PSD block)` of `sum_j y_j A_j`.
    fn at_op(&self, y: &DVector<f64>) -> (DVector<f64>, DVector<f64>, DMatrix<f64>) {
        let g = self.groups();
        let cz = DVector::from_fn(g, |c, _| -y[c] - y[g + c]);
        let coef = DVector::from_fn(g, |c, _| y[g + c] - y[c]);
        let mut scaled = self.u.clone();
        for (c, mut col) in scaled.column_iter_mut().enumerate() {
            col *= coef[c];
        }
        let cs = &scaled * self.u.transpose();
        (cz, y.clone(), cs)
    }
}

struct Iterate {
    z: DVector<f64>,
    t: DVector<f64>,
    x: DMatrix<f64>,
    y: DVector<f64>,
    sz: DVector<f64>,
    st: DVector<f64>,
    s: DMatrix<f64>,
}

struct Direction {
    dz: DVector<f64>,
    dt: DVector<f64>,
    dx: DMatrix<f64>,
    dy: DVector<f64>,
    dsz: DVector<f64>,
    dst: DVector<f64>,
    ds: DMatrix<f64>,
}

/// Biorthogonal start: `R = sum_i w_i w_i^T` with `w_i` dual to `k`
/// Vandermonde vectors at distinct eigenvalues chosen by column pivoting, and
/// `z_i = |lambda_i - p(lambda_i)| + 1`. Requires `k < m`. Returned unscaled.
pub fn strictly_feasible_point(problem: &SdpProblem, spec: &Spectrum) -> Result<(Vec<f64>, GramPolynomial)> {
    let m = distinct_values(spec, DEFAULT_DISTINCT_TOL).len();
    if problem.k >= m {
        return Err(Error::InsufficientRank {
            expected: problem.k + 1,
            found: m,
        });
    }
    let red = Reduced::new(problem);
    if red.rank() < problem.k {
        return Err(Error::InsufficientRank {
            expected: problem.k,
            found: red.rank(),
        });
    }
    let r = biorthogonal_start(&red)?;
    let (z, _) = slack_start(&red, &r);
    let full = &red.basis * &r * red.basis.transpose();
    let gram = GramPolynomial::from_scaled(to_complex(&full), problem.scale, Origin::Sdp)?;
    let z = red.class_of.iter().map(|&c| z[c] * problem.scale).collect();
    Ok((z, gram))
}

/// Greedy column pivoting: repeatedly the column with the largest component
/// orthogonal to those already chosen (lowest index on ties).
fn pivot_columns(u: &DMatrix<f64>, count: usize) -> Vec<usize> {
    let mut resid = u.clone();
    let mut picks = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best = 0;
        let mut best_norm = -1.0;
        for (c, col) in resid.column_iter().enumerate() {
            let n = col.norm();
            if n > best_norm && !picks.contains(&c) {
                best = c;
                best_norm = n;
            }
        }
        picks.push(best);
        let q = resid.column(best).normalize();
        let proj = q.transpose() * &resid;
        resid -= &q * proj;
    }
    picks
}

fn biorthogonal_start(red: &Reduced) -> Result<DMatrix<f64>> {
    let r = red.rank();
    let picks = pivot_columns(&red.u, r);
    let vt = DMatrix::from_fn(r, r, |i, l| red.u[(l, picks[i])]);
    let w = vt
        .full_piv_lu()
        .solve(&DMatrix::identity(r, r))
        .ok_or_else(|| Error::Singular("Vandermonde vectors are dependent".into()))?;
    Ok(&w * w.transpose())
}

fn slack_start(red: &Reduced, r: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    let g = red.groups();
    let p = red.quad(r);
    let z = DVector::from_fn(g, |c, _| (red.x[c] - p[c]).abs() + 1.0);
    let t = DVector::from_fn(2 * g, |j, _| {
        let c = j % g;
        if j < g {
            -red.x[c] + z[c] + p[c]
        } else {
            red.x[c] + z[c] - p[c]
        }
    });
    (z, t)
}

fn initial_point(red: &Reduced, k_lt_m: bool) -> Result<Iterate> {
    let g = red.groups();
    let r = if k_lt_m && red.rank() == red.basis.nrows() {
        biorthogonal_start(red)?
    } else {
        DMatrix::identity(red.rank(), red.rank())
    };
    let (z, t) = slack_start(red, &r);
    let w = &red.weights;
    let y = DVector::from_fn(2 * g, |j, _| if j < g { -0.1 * w[j] } else { -0.4 * w[j - g] });
    let (cz, ct, cs) = red.at_op(&y);
    Ok(Iterate {
        sz: w - cz,
        st: -ct,
        s: -cs,
        z,
        t,
        x: r,
        y,
    })
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `alpha` with `m + alpha * dm` PSD (infinite when unconstrained).
fn psd_step(chol: &Cholesky<f64, nalgebra::Dyn>, dm: &DMatrix<f64>) -> f64 {
    if dm.nrows() == 0 {
        return f64::INFINITY;
    }
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::identity(l.nrows(), l.nrows()));
    let w = &linv * dm * linv.transpose();
    let min = linalg::min_symmetric_eigenvalue(&sym(&w));
    if min < 0.0 {
        -1.0 / min
    } else {
        f64::INFINITY
    }
}

fn lp_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&a, &d)| -a / d)
        .fold(f64::INFINITY, f64::min)
}

struct Residuals {
    rp: DVector<f64>,
    rdz: DVector<f64>,
    rdt: DVector<f64>,
    rds: DMatrix<f64>,
}

fn residuals(red: &Reduced, it: &Iterate) -> Residuals {
    let rp = red.b() - red.a_op(&it.z, &it.t, &it.x);
    let (cz, ct, cs) = red.at_op(&it.y);
    Residuals {
        rp,
        rdz: &red.weights - cz - &it.sz,
        rdt: -ct - &it.st,
        rds: -cs - &it.s,
    }
}

/// Solves the HKM Newton system for complementarity targets `rc_*`.
#[allow(clippy::too_many_arguments)]
fn newton(
    red: &Reduced,
    it: &Iterate,
    res: &Residuals,
    schur: &SchurFactor,
    s_inv: &DMatrix<f64>,
    rcz: &DVector<f64>,
    rct: &DVector<f64>,
    rcs: &DMatrix<f64>,
) -> Option<Direction> {
    let g = red.groups();
    // rhs = rp - A(Rc / s) + A(X Rd / s)
    let ez = DVector::from_fn(g, |c, _| (rcz[c] - it.z[c] * res.rdz[c]) / it.sz[c]);
    let et = DVector::from_fn(2 * g, |j, _| (rct[j] - it.t[j] * res.rdt[j]) / it.st[j]);
    let es = sym(&((rcs - &it.x * &res.rds) * s_inv));
    let rhs = &res.rp - red.a_op(&ez, &et, &es);
    let dy = schur.solve(&rhs)?;
    let (cz, ct, cs) = red.at_op(&dy);
    let dsz = &res.rdz - cz;
    let dst = &res.rdt - ct;
    let ds = &res.rds - cs;
    let dz = DVector::from_fn(g, |c, _| (rcz[c] - it.z[c] * dsz[c]) / it.sz[c]);
    let dt = DVector::from_fn(2 * g, |j, _| (rct[j] - it.t[j] * dst[j]) / it.st[j]);
    let dx = sym(&((rcs - &it.x * &ds) * s_inv));
    let ok = dy.iter().chain(dx.iter()).chain(dz.iter()).all(|v| v.is_finite());
    ok.then_some(Direction {
        dz,
        dt,
        dx,
        dy,
        dsz,
        dst,
        ds,
    })
}

/// Cholesky factor of the diagonally equilibrated Schur matrix. Close to the
/// optimum the diagonal spans many orders of magnitude; when the factorization
/// still fails a small diagonal shift is added and the solve is refined
/// against the unshifted matrix.
struct SchurFactor {
    matrix: DMatrix<f64>,
    scaling: DVector<f64>,
    chol: Cholesky<f64, nalgebra::Dyn>,
    shifted: bool,
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        let n = m.nrows();
        let scaling = DVector::from_fn(n, |i, _| {
            let d = m[(i, i)];
            if d > 0.0 && d.is_finite() {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        });
        let eq = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * scaling[i] * scaling[j]);
        for (shift, shifted) in [(0.0, false), (1e-14, true), (1e-12, true), (1e-10, true)] {
            let mut a = eq.clone();
            for i in 0..n {
                a[(i, i)] += shift;
            }
            if let Some(chol) = a.cholesky() {
                return Some(Self {
                    matrix: m,
                    scaling,
                    chol,
                    shifted,
                });
            }
        }
        None
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let apply = |r: &DVector<f64>| {
            let scaled = r.component_mul(&self.scaling);
            self.chol.solve(&scaled).component_mul(&self.scaling)
        };
        let mut x = apply(rhs);
        if self.shifted {
            for _ in 0..3 {
                let r = rhs - &self.matrix * &x;
                x += apply(&r);
            }
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

fn schur_matrix(red: &Reduced, it: &Iterate, s_inv: &DMatrix<f64>) -> DMatrix<f64> {
    let g = red.groups();
    let p = red.u.transpose() * &it.x * &red.u;
    let q = red.u.transpose() * s_inv * &red.u;
    let mut m = DMatrix::zeros(2 * g, 2 * g);
    for i in 0..2 * g {
        let (ci, si) = (i % g, if i < g { -1.0 } else { 1.0 });
        for j in 0..2 * g {
            let (cj, sj) = (j % g, if j < g { -1.0 } else { 1.0 });
            m[(i, j)] = si * sj * p[(ci, cj)] * q[(cj, ci)];
        }
    }
    for c in 0..g {
        let dz = it.z[c] / it.sz[c];
        m[(c, c)] += dz;
        m[(c, g + c)] += dz;
        m[(g + c, c)] += dz;
        m[(g + c, g + c)] += dz;
    }
    for j in 0..2 * g {
        m[(j, j)] += it.t[j] / it.st[j];
    }
    m
}

fn step_lengths(it: &Iterate, d: &Direction) -> Option<(f64, f64)> {
    let cx = it.x.clone().cholesky()?;
    let cs = it.s.clone().cholesky()?;
    let ap = lp_step(&it.z, &d.dz)
        .min(lp_step(&it.t, &d.dt))
        .min(psd_step(&cx, &d.dx));
    let ad = lp_step(&it.sz, &d.dsz)
        .min(lp_step(&it.st, &d.dst))
        .min(psd_step(&cs, &d.ds));
    Some((ap, ad))
}

fn complementarity(it: &Iterate, d: Option<(&Direction, f64, f64)>) -> f64 {
    match d {
        None => it.z.dot(&it.sz) + it.t.dot(&it.st) + (&it.x * &it.s).trace(),
        Some((d, ap, ad)) => {
            let z = &it.z + &d.dz * ap;
            let t = &it.t + &d.dt * ap;
            let x = &it.x + &d.dx * ap;
            let sz = &it.sz + &d.dsz * ad;
            let st = &it.st + &d.dst * ad;
            let s = &it.s + &d.ds * ad;
            z.dot(&sz) + t.dot(&st) + (x * s).trace()
        }
    }
}

/// Solves the fitting problem. Solver trouble is reported through the status;
/// errors are returned only for malformed input.
pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    if problem.values.is_empty() {
        return Err(invalid("empty problem"));
    }
    let red = Reduced::new(problem);
    let g = red.groups();
    let k_lt_m = problem.k < g;
    let mut it = initial_point(&red, k_lt_m)?;
    let n_cone = (3 * g + red.rank()) as f64;
    let scale = problem.scale;
    let b = red.b();
    let mut history = Vec::new();
    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;

    loop {
        let res = residuals(&red, &it);
        let primal = red.weights.dot(&it.z);
        let dual = b.dot(&it.y);
        let rp = res.rp.amax();
        let rd = res.rdz.amax().max(res.rdt.amax()).max(res.rds.amax());
        history.push(IterationRecord {
            primal: primal * scale,
            dual: dual * scale,
            primal_residual: rp * scale,
            dual_residual: rd * scale,
        });
        let gap = (primal - dual) * scale;
        if gap.abs() <= opts.tol_gap && rp * scale <= opts.tol_feas && rd * scale <= opts.tol_feas {
            status = SdpStatus::Optimal;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        if dual > primal + 1e3 * primal.abs().max(1.0) || !primal.is_finite() {
            status = SdpStatus::Infeasible;
            break;
        }
        iterations += 1;

        let Some(s_chol) = it.s.clone().cholesky() else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let s_inv = s_chol.inverse();
        let Some(schur) = SchurFactor::new(schur_matrix(&red, &it, &s_inv)) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let mu = complementarity(&it, None) / n_cone;
        let r = red.rank();

        // predictor
        let rcz = -it.z.component_mul(&it.sz);
        let rct = -it.t.component_mul(&it.st);
        let rcs = -(&it.x * &it.s);
        let Some(pred) = newton(&red, &it, &res, &schur, &s_inv, &rcz, &rct, &rcs) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let Some((ap, ad)) = step_lengths(&it, &pred) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = complementarity(&it, Some((&pred, ap, ad))) / n_cone;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let target = sigma * mu;
        let corrector = |second_order: bool| {
            let mut rcz = DVector::from_element(g, target) - it.z.component_mul(&it.sz);
            let mut rct = DVector::from_element(2 * g, target) - it.t.component_mul(&it.st);
            let mut rcs = DMatrix::identity(r, r) * target - &it.x * &it.s;
            if second_order {
                rcz -= pred.dz.component_mul(&pred.dsz);
                rct -= pred.dt.component_mul(&pred.dst);
                rcs -= &pred.dx * &pred.ds;
            }
            newton(&red, &it, &res, &schur, &s_inv, &rcz, &rct, &rcs)
        };
        let mut dir = corrector(true).and_then(|d| step_lengths(&it, &d).map(|s| (d, s)));
        if dir.as_ref().is_none_or(|(_, (ap, ad))| ap.min(*ad) < 1e-8) {
            // fall back to a plain centering step
            let fallback_target = 0.3 * mu;
            let rcz = DVector::from_element(g, fallback_target) - it.z.component_mul(&it.sz);
            let rct = DVector::from_element(2 * g, fallback_target) - it.t.component_mul(&it.st);
            let rcs = DMatrix::identity(r, r) * fallback_target - &it.x * &it.s;
            dir = newton(&red, &it, &res, &schur, &s_inv, &rcz, &rct, &rcs)
                .and_then(|d| step_lengths(&it, &d).map(|s| (d, s)));
        }
        let Some((d, (ap, ad))) = dir else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let gamma = 0.95;
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap.min(ad) < 1e-12 {
            status = SdpStatus::NumericalFailure;
            break;
        }
        it.z += &d.dz * ap;
        it.t += &d.dt * ap;
        it.x = sym(&(&it.x + &d.dx * ap));
        it.y += &d.dy * ad;
        it.sz += &d.dsz * ad;
        it.st += &d.dst * ad;
        it.s = sym(&(&it.s + &d.ds * ad));
    }

    let last = *history.last().expect("at least one iterate");
    let full = &red.basis * &it.x * red.basis.transpose();
    let gram = GramPolynomial::from_scaled(to_complex(&sym(&full)), scale, Origin::Sdp)?;
    let z = red.class_of.iter().map(|&c| it.z[c] * scale).collect();
    Ok(SdpSolution {
        z,
        gram,
        objective: last.primal,
        dual_objective: last.dual,
        duality_gap: last.primal - last.dual,
        primal_residual: last.primal_residual,
        dual_residual: last.dual_residual,
        iterations,
        status,
        history,
    })
}

/// `max / min` singular value of the `k x G` Vandermonde data of the
/// (possibly rescaled) distinct eigenvalues.
pub fn vandermonde_condition(problem: &SdpProblem) -> f64 {
    let red = Reduced::new(problem);
    let k = problem.k;
    let v = DMatrix::from_fn(k, red.groups(), |l, g| red.x[g].powi(l as i32));
    let sv = linalg::real_singular_values(&v);
    let min = sv.last().copied().unwrap_or(0.0);
    if min > 0.0 {
        sv[0] / min
    } else {
        f64::INFINITY
    }
}
