//! Classical states built from slack matrices of regular polygons: constant
//! operator Schmidt rank, growing purification rank.
//!
//! Vertex `i` of the `t`-gon is `(cos 2 pi i / t, sin 2 pi i / t)` and facet
//! `j` is the edge from vertex `j` to vertex `j + 1`, so `S(i, j)` depends on
//! `(j - i) mod t` only. Entries are scaled so the smallest nonzero slack is 1.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::tensor::{DensityMatrix, Mpdo, MpsChain, PureState, SiteTensor};

/// Tolerance of the circulant check, relative to the largest entry.
pub const CIRCULANT_TOL: f64 = 1e-10;

/// Fourier modes carrying the spectrum of a polygon slack matrix.
const MODE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SlackMatrix {
    t: usize,
    entries: DMatrix<f64>,
    normalization: f64,
}

impl SlackMatrix {
    /// Wraps an arbitrary nonnegative square matrix.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(invalid("slack matrix must be square and nonempty"));
        }
        if let Some(&v) = entries.iter().find(|&&v| v < -1e-12 || !v.is_finite()) {
            return Err(invalid(format!("negative slack entry {v}")));
        }
        Ok(Self {
            t: entries.nrows(),
            entries: entries.map(|v| v.max(0.0)),
            normalization: 1.0,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Factor the raw slacks were multiplied by.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn circulant_row(&self) -> Vec<f64> {
        self.entries.row(0).iter().copied().collect()
    }

    /// Largest deviation from `S(i, j) = row[(j - i) mod t]`.
    pub fn circulant_deviation(&self) -> f64 {
        let t = self.t;
        let mut dev = 0.0f64;
        for i in 0..t {
            for j in 0..t {
                dev = dev.max((self.entries[(i, j)] - self.entries[(0, (j + t - i) % t)]).abs());
            }
        }
        dev
    }

    pub fn is_circulant(&self) -> bool {
        self.circulant_deviation() <= CIRCULANT_TOL * self.entries.amax().max(1.0)
    }

    pub fn rank(&self, tol: f64) -> usize {
        linalg::real_matrix_rank(&self.entries, tol)
    }

    /// Entrywise square root.
    pub fn sqrt_entries(&self) -> DMatrix<f64> {
        self.entries.map(f64::sqrt)
    }
}

impl Serialize for SlackMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Record {
            t: usize,
            normalization: f64,
            circulant_row: Vec<f64>,
            entries: Vec<Vec<f64>>,
        }
        Record {
            t: self.t,
            normalization: self.normalization,
            circulant_row: self.circulant_row(),
            entries: (0..self.t)
                .map(|i| self.entries.row(i).iter().copied().collect())
                .collect(),
        }
        .serialize(s)
    }
}

/// First row of the regular `t`-gon slack matrix and the scale applied to it.
fn tgon_row(t: usize) -> Result<(Vec<f64>, f64)> {
    if t < 3 {
        return Err(invalid(format!("a polygon needs t >= 3, got {t}")));
    }
    let tf = t as f64;
    let b = (PI / tf).cos();
    let raw: Vec<f64> = (0..t)
        .map(|j| (b - (2.0 * PI * (j as f64 + 0.5) / tf).cos()).max(0.0))
        .collect();
    let top = raw.iter().copied().fold(0.0, f64::max);
    let min_nonzero = raw
        .iter()
        .copied()
        .filter(|&v| v > 1e-12 * top)
        .fold(f64::INFINITY, f64::min);
    let scale = 1.0 / min_nonzero;
    let row = raw
        .into_iter()
        .map(|v| if v > 1e-12 * top { v * scale } else { 0.0 })
        .collect();
    Ok((row, scale))
}

/// Slack matrix of the regular `t`-gon.
pub fn tgon_slack(t: usize) -> Result<SlackMatrix> {
    let (row, scale) = tgon_row(t)?;
    Ok(SlackMatrix {
        t,
        entries: DMatrix::from_fn(t, t, |i, j| row[(j + t - i) % t]),
        normalization: scale,
    })
}

fn circulant_fft(row: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(row.len()).process(&mut buf);
    buf
}

/// Eigenvalues `X_k = sum_m row[m] exp(-2 pi i m k / t)` of a circulant
/// matrix; `X_k` belongs to the eigenvector `exp(-2 pi i x k / t)`.
pub fn circulant_eigenvalues(slack: &SlackMatrix) -> Result<Vec<Complex64>> {
    let dev = slack.circulant_deviation();
    if dev > CIRCULANT_TOL * slack.entries.amax().max(1.0) {
        return Err(Error::NotCirculant { deviation: dev });
    }
    Ok(circulant_fft(&slack.circulant_row()))
}

/// Indices of eigenvalues above `tol` times the largest.
pub fn spectral_support(eigenvalues: &[Complex64], tol: f64) -> Vec<usize> {
    let top = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (0..eigenvalues.len())
        .filter(|&k| eigenvalues[k].norm() > tol * top)
        .collect()
}

/// Unitary `F(x, k) = exp(-2 pi i x k / t) / sqrt(t)` with
/// `S = F diag(X) F^†`.
pub fn fourier_matrix(t: usize) -> CMatrix {
    let norm = (t as f64).sqrt();
    CMatrix::from_fn(t, t, |x, k| {
        Complex64::from_polar(1.0 / norm, -2.0 * PI * ((x * k) % t) as f64 / t as f64)
    })
}

/// Site layout of `rho_t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Two sites of dimension `t`.
    Bipartite,
    /// `2m` qubits for `t = 2^m`, bits of `x` then bits of `y`, big-endian.
    Binary,
}

fn log2_exact(t: usize) -> Result<usize> {
    if t.is_power_of_two() && t >= 2 {
        Ok(t.trailing_zeros() as usize)
    } else {
        Err(invalid(format!("t = {t} is not a power of two")))
    }
}

/// `sum_{x,y} S(x, y) |x, y><x, y|`.
pub fn rho_t(slack: &SlackMatrix, normalize: bool, layout: Layout) -> Result<DensityMatrix> {
    let t = slack.t;
    crate::check_dense(t * t)?;
    let diag: Vec<f64> = (0..t)
        .flat_map(|x| (0..t).map(move |y| (x, y)))
        .map(|(x, y)| slack.entries[(x, y)])
        .collect();
    let rho = match layout {
        Layout::Bipartite => DensityMatrix::from_diagonal(&diag, 2, t)?,
        Layout::Binary => DensityMatrix::from_diagonal(&diag, 2 * log2_exact(t)?, 2)?,
    };
    if normalize {
        rho.normalized()
    } else {
        Ok(rho)
    }
}

/// Per-cut operator Schmidt ranks of `rho_t` without forming it. For a
/// diagonal operator the realigned matrix at a cut is the diagonal reshaped
/// into (left labels) x (right labels), up to zero rows and columns.
pub fn diagonal_cut_ranks(slack: &SlackMatrix, layout: Layout, tol: f64) -> Result<Vec<usize>> {
    let t = slack.t;
    let row_bits: Vec<usize> = match layout {
        Layout::Bipartite => vec![t],
        Layout::Binary => (1..2 * log2_exact(t)?).map(|c| 1 << c).collect(),
    };
    Ok(row_bits
        .into_iter()
        .map(|rows| {
            let cols = t * t / rows;
            let m = DMatrix::from_fn(rows, cols, |l, r| {
                let label = l * cols + r;
                slack.entries[(label / t, label % t)]
            });
            linalg::real_matrix_rank(&m, tol)
        })
        .collect())
}

/// Bond-dimension-3 operator for `rho_t` with `t = 2^m` on `2m` qubits.
/// Along each bond the index runs over the three Fourier modes of the slack
/// matrix; the `x` bits carry phases `exp(-2 pi i k x_b / 2^b)`, the `y` bits
/// the conjugate ones and site `m` the factor `X_k / t`.
pub fn fourier_mpo(m: usize) -> Result<Mpdo> {
    if !(2..=24).contains(&m) {
        return Err(invalid(format!("m = {m} outside 2..=24")));
    }
    let t = 1usize << m;
    let eig = circulant_fft(&tgon_row(t)?.0);
    let modes = spectral_support(&eig, MODE_TOL);
    let bond = modes.len();
    let n = 2 * m;
    let mut sites = Vec::with_capacity(n);
    for s in 0..n {
        let left = if s == 0 { 1 } else { bond };
        let right = if s == n - 1 { 1 } else { bond };
        let (sign, bit) = if s < m { (-1.0, s + 1) } else { (1.0, s - m + 1) };
        let mut site = SiteTensor::zeros(left, 4, right);
        for (a, &k) in modes.iter().enumerate() {
            for v in 0..2 {
                // k v / 2^bit reduced mod 1
                let frac = ((k as u128 * v as u128) % (1u128 << bit)) as f64 / (1u128 << bit) as f64;
                let mut z = Complex64::from_polar(1.0, sign * 2.0 * PI * frac);
                if s == m - 1 {
                    z *= eig[k] / t as f64;
                }
                let l = if left == 1 { 0 } else { a };
                let r = if right == 1 { 0 } else { a };
                site.set(l, v * 2 + v, r, z);
            }
        }
        sites.push(site);
    }
    Mpdo::new(2, MpsChain::new(sites)?)
}

/// `<label| rho |label>` of a diagonal operator stored as an MPDO, without
/// forming the dense matrix.
pub fn mpdo_diagonal_entry(mpdo: &Mpdo, label: usize) -> Complex64 {
    let n = mpdo.n_sites();
    let d = mpdo.local_dim();
    let mut digs = vec![0; n];
    linalg::digits(label, &vec![d; n], &mut digs);
    let mut vec = vec![Complex64::new(1.0, 0.0)];
    for (s, &v) in digs.iter().enumerate() {
        let site = &mpdo.chain().sites()[s];
        let mut next = vec![ZERO; site.right];
        for (l, &c) in vec.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            for (r, out) in next.iter_mut().enumerate() {
                *out += c * mpdo.entry(s, l, v, v, r);
            }
        }
        vec = next;
    }
    vec[0]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MpoCheck {
    pub m: usize,
    /// All `t^2` diagonal entries were compared when true.
    pub exhaustive: bool,
    pub compared: usize,
    /// Largest `|mpo - S| / max(|S|, 1)`.
    pub max_relative_error: f64,
    /// Largest off-diagonal magnitude of the dense contraction (0 if sampled).
    pub max_off_diagonal: f64,
}

/// Compares the Fourier MPO with the slack matrix: the dense contraction for
/// `m <= 4`, `samples` seeded `(x, y)` pairs otherwise.
pub fn verify_fourier_mpo(m: usize, samples: usize, seed: u64) -> Result<MpoCheck> {
    let mpo = fourier_mpo(m)?;
    let t = 1usize << m;
    let (row, _) = tgon_row(t)?;
    let err = |x: usize, y: usize, z: Complex64| {
        let s = row[(y + t - x) % t];
        (z - Complex64::new(s, 0.0)).norm() / s.abs().max(1.0)
    };
    if m <= 4 {
        let dense = crate::tensor::contract_mpdo_matrix(&mpo)?;
        let mut max_rel = 0.0f64;
        let mut off = 0.0f64;
        for i in 0..t * t {
            for j in 0..t * t {
                if i == j {
                    max_rel = max_rel.max(err(i / t, i % t, dense[(i, i)]));
                } else {
                    off = off.max(dense[(i, j)].norm());
                }
            }
        }
        return Ok(MpoCheck {
            m,
            exhaustive: true,
            compared: t * t,
            max_relative_error: max_rel,
            max_off_diagonal: off,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel = 0.0f64;
    for _ in 0..samples {
        let x = rng.random_range(0..t);
        let y = rng.random_range(0..t);
        max_rel = max_rel.max(err(x, y, mpdo_diagonal_entry(&mpo, x * t + y)));
    }
    Ok(MpoCheck {
        m,
        exhaustive: false,
        compared: samples,
        max_relative_error: max_rel,
        max_off_diagonal: 0.0,
    })
}

/// Site layout of the purifications `phi_t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiLayout {
    /// Two sites of dimension `t^2`, each a system index with its ancilla.
    Paired,
    /// Four sites `x, x_anc, y, y_anc` of dimension `t`.
    Split,
}

fn phi_from(coeffs: &DMatrix<f64>, layout: PhiLayout) -> Result<PureState> {
    let t = coeffs.nrows();
    crate::check_dense(t * t)?;
    let mut amps = CVector::zeros(t * t * t * t);
    for x in 0..t {
        for y in 0..t {
            // |x, x, y, y> in either layout has the same big-endian label
            let idx = ((x * t + x) * t + y) * t + y;
            amps[idx] = Complex64::new(coeffs[(x, y)], 0.0);
        }
    }
    let dims = match layout {
        PhiLayout::Paired => vec![t * t; 2],
        PhiLayout::Split => vec![t; 4],
    };
    PureState::new(dims, amps)
}

/// `phi_t = sum sqrt(S(x,y)) |x,x,y,y>` and `phi_t^2 = sum S(x,y) |x,x,y,y>`.
pub fn phi_states(slack: &SlackMatrix, layout: PhiLayout) -> Result<(PureState, PureState)> {
    Ok((
        phi_from(&slack.sqrt_entries(), layout)?,
        phi_from(&slack.entries, layout)?,
    ))
}

/// Schmidt rank of `phi_t` (`sqrt = true`) or `phi_t^2` across the cut
/// separating `x` from `y`: the rank of the `t x t` coefficient matrix, since
/// the copied ancilla indices only relabel rows and columns.
pub fn phi_cut_rank(slack: &SlackMatrix, sqrt: bool, tol: f64) -> usize {
    let coeffs = if sqrt {
        slack.sqrt_entries()
    } else {
        slack.entries.clone()
    };
    linalg::real_matrix_rank(&coeffs, tol)
}

/// Reduced state of `phi` on the system sites `x, y`, for the paired layout.
pub fn trace_phi_ancilla(phi: &PureState) -> Result<DensityMatrix> {
    let dims = phi.local_dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(invalid("expected the paired layout"));
    }
    let t = (dims[0] as f64).sqrt().round() as usize;
    if t * t != dims[0] {
        return Err(invalid("site dimension is not a square"));
    }
    let amps = phi.amplitudes();
    // rows (x, y), columns (x_anc, y_anc)
    let mut m = CMatrix::zeros(t * t, t * t);
    for (idx, &z) in amps.iter().enumerate() {
        if z == ZERO {
            continue;
        }
        let (xx, yy) = (idx / (t * t), idx % (t * t));
        let (x, xa, y, ya) = (xx / t, xx % t, yy / t, yy % t);
        m[(x * t + y, xa * t + ya)] = z;
    }
    DensityMatrix::new(&m * m.adjoint(), 2, t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdSearchOptions {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for PsdSearchOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_sweeps: 2000,
            seed: 0,
        }
    }
}

/// Best factorization found by [`psd_factorization_search`]. A failed search
/// says nothing about whether a factorization of size `r` exists.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdSearchResult {
    pub r: usize,
    pub success: bool,
    /// `sqrt(sum (tr(E_x F_y) - S(x,y))^2)`.
    pub residual: f64,
    /// `residual / ||S||_F`.
    pub relative_residual: f64,
    pub restarts_run: usize,
    pub best_restart: usize,
    #[serde(skip)]
    pub e: Vec<DMatrix<f64>>,
    #[serde(skip)]
    pub f: Vec<DMatrix<f64>>,
}

impl PsdSearchResult {
    /// `tr(E_x F_y)` for all `x, y`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.e.len(), self.f.len(), |x, y| self.e[x].dot(&self.f[y]))
    }

    /// Smallest eigenvalue over all factors.
    pub fn min_eigenvalue(&self) -> f64 {
        self.e
            .iter()
            .chain(&self.f)
            .map(linalg::min_symmetric_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Success threshold of the search relative to `||S||_F`.
pub const PSD_SEARCH_TOL: f64 = 1e-6;

/// Local search for real symmetric PSD `E_x = A_x A_x^T`, `F_y = B_y B_y^T`
/// of size `r` with `tr(E_x F_y) = S(x, y)`. Each sweep updates every `A_x`
/// with the `F_y` fixed by damped Gauss-Newton steps, then every `B_y`.
/// Restart `i` is seeded with `seed + i`.
pub fn psd_factorization_search(s: &DMatrix<f64>, r: usize, opts: &PsdSearchOptions) -> Result<PsdSearchResult> {
    if r == 0 {
        return Err(invalid("r must be positive"));
    }
    if s.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(invalid("matrix must be entrywise nonnegative"));
    }
    if opts.restarts == 0 {
        return Err(invalid("at least one restart is required"));
    }
    let norm = s.norm();
    let target = PSD_SEARCH_TOL * norm;
    let mut best: Option<(usize, f64, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>)> = None;
    let mut run = 0;
    for restart in 0..opts.restarts {
        run += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(restart as u64));
        let (e, f, res) = alternating_run(s, r, opts.max_sweeps, target, &mut rng);
        if best.as_ref().is_none_or(|b| res < b.1) {
            best = Some((restart, res, e, f));
        }
        if res <= target {
            break;
        }
    }
    let (best_restart, residual, e, f) = best.expect("at least one restart ran");
    Ok(PsdSearchResult {
        r,
        success: residual <= target,
        residual,
        relative_residual: if norm > 0.0 { residual / norm } else { residual },
        restarts_run: run,
        best_restart,
        e,
        f,
    })
}

type Factors = (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>, f64);

fn gram(a: &DMatrix<f64>) -> DMatrix<f64> {
    a * a.transpose()
}

fn alternating_run<R: Rng>(s: &DMatrix<f64>, r: usize, sweeps: usize, target: f64, rng: &mut R) -> Factors {
    let (nx, ny) = s.shape();
    let mut random_factor = || DMatrix::<f64>::from_fn(r, r, |_, _| rng.sample(StandardNormal));
    let mut a: Vec<DMatrix<f64>> = (0..nx).map(|_| random_factor()).collect();
    let mut b: Vec<DMatrix<f64>> = (0..ny).map(|_| random_factor()).collect();
    let mut e: Vec<DMatrix<f64>> = a.iter().map(gram).collect();
    let mut f: Vec<DMatrix<f64>> = b.iter().map(gram).collect();
    let mean_s = s.mean();
    let mean_fit = DMatrix::from_fn(nx, ny, |x, y| e[x].dot(&f[y])).mean();
    if mean_fit > 0.0 && mean_s > 0.0 {
        // tr(E F) is quartic in the factors
        let c = (mean_s / mean_fit).powf(0.25);
        a.iter_mut().chain(b.iter_mut()).for_each(|m| *m *= c);
        e = a.iter().map(gram).collect();
        f = b.iter().map(gram).collect();
    }
    let st = s.transpose();
    let mut mu_a = vec![1e-3; nx];
    let mut mu_b = vec![1e-3; ny];
    let mut res = residual(s, &e, &f);
    let mut slow = 0;
    for _ in 0..sweeps {
        for x in 0..nx {
            gauss_newton_factor(&mut a[x], &f, s.row(x).iter().copied(), &mut mu_a[x]);
            e[x] = gram(&a[x]);
        }
        for y in 0..ny {
            gauss_newton_factor(&mut b[y], &e, st.row(y).iter().copied(), &mut mu_b[y]);
            f[y] = gram(&b[y]);
        }
        balance(&mut a, &mut b);
        e = a.iter().map(gram).collect();
        f = b.iter().map(gram).collect();
        let next = residual(s, &e, &f);
        slow = if next > res * (1.0 - 1e-6) { slow + 1 } else { 0 };
        res = next;
        if res <= target || slow >= 20 {
            break;
        }
    }
    (e, f, res)
}

fn residual(s: &DMatrix<f64>, e: &[DMatrix<f64>], f: &[DMatrix<f64>]) -> f64 {
    let mut acc = 0.0;
    for (x, ex) in e.iter().enumerate() {
        for (y, fy) in f.iter().enumerate() {
            acc += (ex.dot(fy) - s[(x, y)]).powi(2);
        }
    }
    acc.sqrt()
}

/// Rescales the factors so both sides carry the same total Frobenius norm of
/// `E` and `F`; products `tr(E_x F_y)` are unchanged.
fn balance(a: &mut [DMatrix<f64>], b: &mut [DMatrix<f64>]) {
    let ne: f64 = a.iter().map(|m| gram(m).norm_squared()).sum::<f64>().sqrt();
    let nf: f64 = b.iter().map(|m| gram(m).norm_squared()).sum::<f64>().sqrt();
    if ne > 0.0 && nf > 0.0 {
        let c = (nf / ne).powf(0.25);
        a.iter_mut().for_each(|m| *m *= c);
        b.iter_mut().for_each(|m| *m /= c);
    }
}

/// A few Levenberg-Marquardt steps on `sum_y (tr(A^T G_y A) - t_y)^2` over
/// the factor `A`; `mu` is the damping carried between calls.
fn gauss_newton_factor<I>(a: &mut DMatrix<f64>, others: &[DMatrix<f64>], target: I, mu: &mut f64)
where
    I: Iterator<Item = f64>,
{
    const STEPS: usize = 2;
    let target: Vec<f64> = target.collect();
    let r = a.nrows();
    let p = r * r;
    let eval = |a: &DMatrix<f64>| -> (nalgebra::DVector<f64>, Vec<DMatrix<f64>>) {
        let ga: Vec<DMatrix<f64>> = others.iter().map(|g| g * a).collect();
        let res = nalgebra::DVector::from_iterator(
            others.len(),
            ga.iter().zip(&target).map(|(m, t)| m.dot(a) - t),
        );
        (res, ga)
    };
    let (mut res, mut ga) = eval(a);
    let mut cost = res.norm_squared();
    for _ in 0..STEPS {
        // d/dA tr(A^T G A) = 2 G A
        let j = DMatrix::from_fn(others.len(), p, |y, k| 2.0 * ga[y][k]);
        let jt = j.transpose();
        let h = &jt * &j;
        let g = &jt * &res;
        let scale = (h.trace() / p as f64).max(f64::MIN_POSITIVE);
        let mut accepted = false;
        for _ in 0..12 {
            let mut damped = h.clone();
            for i in 0..p {
                damped[(i, i)] += *mu * scale;
            }
            let Some(chol) = damped.cholesky() else {
                *mu *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let cand = &*a + DMatrix::from_column_slice(r, r, step.as_slice());
            let (cres, cga) = eval(&cand);
            let ccost = cres.norm_squared();
            if ccost < cost {
                *a = cand;
                res = cres;
                ga = cga;
                cost = ccost;
                *mu = (*mu / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            *mu *= 4.0;
        }
        if !accepted {
            *mu = mu.min(1e6);
            break;
        }
    }
}
