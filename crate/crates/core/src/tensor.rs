//! Dense and tensor-network representations of multipartite states.
//!
//! Basis labels are big-endian: site 1 is the most significant digit. A
//! density matrix on `N` sites of local dimension `d` is indexed by
//! `(i_1..i_N)` for kets and `(j_1..j_N)` for bras. Vectorization pairs the
//! ket and bra leg of every site, `(i_1 j_1 i_2 j_2 ..)`, so that a linear cut
//! of the vectorized state coincides with the operator cut of the matrix
//! product density operator.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};

/// Numerical ranks across every linear bipartition `1..k | k+1..N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutRanks {
    pub per_cut: Vec<usize>,
    /// Largest entry of `per_cut`; 1 for a single nonzero site.
    pub max: usize,
}

impl CutRanks {
    fn from_cuts(per_cut: Vec<usize>, nonzero: bool) -> Self {
        let max = per_cut
            .iter()
            .copied()
            .max()
            .unwrap_or(usize::from(nonzero));
        Self { per_cut, max }
    }
}

pub(crate) fn checked_dim(local_dim: usize, n_sites: usize) -> Result<usize> {
    u32::try_from(n_sites)
        .ok()
        .and_then(|n| local_dim.checked_pow(n))
        .ok_or_else(|| invalid(format!("{local_dim}^{n_sites} overflows")))
}

/// Dense Hermitian positive semidefinite operator on `n_sites` sites of
/// dimension `local_dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "DensityRecord", try_from = "DensityRecord")]
pub struct DensityMatrix {
    n_sites: usize,
    local_dim: usize,
    data: CMatrix,
    trace: f64,
    normalized: bool,
}

/// Hermiticity tolerance relative to the Frobenius norm.
const HERMITIAN_TOL: f64 = 1e-12;
/// Positivity tolerance relative to the Frobenius norm.
const PSD_TOL: f64 = 1e-10;

impl DensityMatrix {
    /// Validates shape, Hermiticity and positivity. The stored matrix is the
    /// exact Hermitian part of `data`.
    pub fn new(data: CMatrix, n_sites: usize, local_dim: usize) -> Result<Self> {
        let dim = checked_dim(local_dim, n_sites)?;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.nrows().max(data.ncols()),
            });
        }
        let norm = linalg::frobenius(&data);
        let deviation = linalg::hermitian_deviation(&data);
        if deviation > HERMITIAN_TOL * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { deviation });
        }
        let data = (&data + data.adjoint()).scale(0.5);
        let min_eigenvalue = min_eigenvalue(&data);
        if min_eigenvalue < -PSD_TOL * norm {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(Self::from_parts(data, n_sites, local_dim))
    }

    /// Diagonal (classical) state with the given populations.
    pub fn from_diagonal(diag: &[f64], n_sites: usize, local_dim: usize) -> Result<Self> {
        let dim = checked_dim(local_dim, n_sites)?;
        if diag.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: diag.len(),
            });
        }
        if let Some(&neg) = diag.iter().find(|&&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::NotPsd {
                min_eigenvalue: neg,
            });
        }
        let data = CMatrix::from_diagonal(&DVector::from_iterator(
            dim,
            diag.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        Ok(Self::from_parts(data, n_sites, local_dim))
    }

    /// For operators that are Hermitian and PSD by construction (e.g. `M M^†`).
    pub(crate) fn from_psd_unchecked(data: CMatrix, n_sites: usize, local_dim: usize) -> Self {
        let data = (&data + data.adjoint()).scale(0.5);
        Self::from_parts(data, n_sites, local_dim)
    }

    fn from_parts(data: CMatrix, n_sites: usize, local_dim: usize) -> Self {
        let trace = data.trace().re;
        Self {
            n_sites,
            local_dim,
            data,
            trace,
            normalized: false,
        }
    }

    /// Copy scaled to unit trace.
    pub fn normalized(&self) -> Result<Self> {
        if self.trace <= 0.0 {
            return Err(invalid("cannot normalize a state with zero trace"));
        }
        let mut out = Self::from_parts(
            self.data.unscale(self.trace),
            self.n_sites,
            self.local_dim,
        );
        out.normalized = true;
        Ok(out)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Eigenvalues (non-increasing) and eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        linalg::hermitian_eigh(&self.data)
    }

    /// Numerical rank at relative tolerance `tol` of the largest eigenvalue.
    pub fn rank(&self, tol: f64) -> usize {
        let (vals, _) = self.eigh();
        let top = vals.first().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        vals.iter().filter(|&&v| v > tol * top).count()
    }
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == ZERO));
    if diagonal {
        return (0..n).map(|i| m[(i, i)].re).fold(f64::INFINITY, f64::min);
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// On-disk form: `{n_sites, local_dim, entries: [[re, im], ..]}` row-major.
#[derive(Serialize, Deserialize)]
pub struct DensityRecord {
    pub n_sites: usize,
    pub local_dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<DensityMatrix> for DensityRecord {
    fn from(rho: DensityMatrix) -> Self {
        Self {
            n_sites: rho.n_sites,
            local_dim: rho.local_dim,
            entries: matrix_to_pairs(&rho.data),
        }
    }
}

impl TryFrom<DensityRecord> for DensityMatrix {
    type Error = Error;

    fn try_from(rec: DensityRecord) -> Result<Self> {
        let dim = checked_dim(rec.local_dim, rec.n_sites)?;
        let data = pairs_to_matrix(&rec.entries, dim)?;
        DensityMatrix::new(data, rec.n_sites, rec.local_dim)
    }
}

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

pub fn pairs_to_matrix(entries: &[[f64; 2]], dim: usize) -> Result<CMatrix> {
    if entries.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: entries.len(),
        });
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = entries[i * dim + j];
        Complex64::new(re, im)
    }))
}

/// Dense pure state on sites of (possibly different) local dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    local_dims: Vec<usize>,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(local_dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        let dim = local_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| invalid("state dimension overflows"))?;
        if local_dims.is_empty() || local_dims.contains(&0) {
            return Err(invalid("local dimensions must be positive"));
        }
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            local_dims,
            amplitudes,
        })
    }

    /// Product of single-site vectors.
    pub fn product(factors: &[CVector]) -> Result<Self> {
        let dims = factors.iter().map(|f| f.len()).collect();
        let mut amps = CVector::from_element(1, ONE);
        for f in factors {
            amps = amps.kronecker(f);
        }
        Self::new(dims, amps)
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn n_sites(&self) -> usize {
        self.local_dims.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(invalid("cannot normalize the zero vector"));
        }
        Ok(Self {
            local_dims: self.local_dims.clone(),
            amplitudes: self.amplitudes.unscale(n),
        })
    }
}

/// Schmidt rank of `psi` across every linear cut.
pub fn schmidt_rank(psi: &PureState, tol: f64) -> CutRanks {
    let dims = psi.local_dims();
    let total = psi.amplitudes.len();
    let nonzero = psi.amplitudes.iter().any(|&z| z != ZERO);
    let mut per_cut = Vec::with_capacity(dims.len().saturating_sub(1));
    let mut right = total;
    for &d in &dims[..dims.len() - 1] {
        right /= d;
        let entries = psi
            .amplitudes
            .iter()
            .enumerate()
            .map(|(idx, &z)| (idx / right, idx % right, z));
        let sv = linalg::compact_singular_values(entries);
        per_cut.push(linalg::numerical_rank(&sv, tol));
    }
    CutRanks::from_cuts(per_cut, nonzero)
}

/// Operator Schmidt rank of `rho` across every linear cut: the rank of the
/// reshaping that groups ket and bra legs of sites `1..k` against the rest.
pub fn operator_schmidt_rank(rho: &DensityMatrix, tol: f64) -> CutRanks {
    let n = rho.n_sites();
    let d = rho.local_dim();
    let dim = rho.dim();
    let m = rho.matrix();
    let nonzero = m.iter().any(|&z| z != ZERO);
    let mut per_cut = Vec::with_capacity(n.saturating_sub(1));
    let mut right = dim;
    for _ in 1..n {
        right /= d;
        let left = dim / right;
        let mut entries = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                if z == ZERO {
                    continue;
                }
                let (il, ir) = (i / right, i % right);
                let (jl, jr) = (j / right, j % right);
                entries.push((il * left + jl, ir * right + jr, z));
            }
        }
        let sv = linalg::compact_singular_values(entries);
        per_cut.push(linalg::numerical_rank(&sv, tol));
    }
    CutRanks::from_cuts(per_cut, nonzero)
}

pub use crate::linalg::trace_norm;

/// `|rho>` with ket and bra legs of each site grouped into one site of
/// dimension `d^2`.
pub fn vectorize(rho: &DensityMatrix) -> PureState {
    let n = rho.n_sites();
    let d = rho.local_dim();
    let dim = rho.dim();
    let site_dims = vec![d; n];
    let table = digit_table(dim, &site_dims);
    let mut amps = CVector::zeros(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            amps[interleave(&table[i], &table[j], d)] = rho.matrix()[(i, j)];
        }
    }
    PureState::new(vec![d * d; n], amps).expect("dimensions are consistent")
}

fn digit_table(dim: usize, dims: &[usize]) -> Vec<Vec<usize>> {
    (0..dim)
        .map(|idx| {
            let mut out = vec![0; dims.len()];
            linalg::digits(idx, dims, &mut out);
            out
        })
        .collect()
}

fn interleave(ket: &[usize], bra: &[usize], d: usize) -> usize {
    ket.iter()
        .zip(bra)
        .fold(0, |acc, (&i, &j)| acc * d * d + i * d + j)
}

fn devectorize(amps: &[Complex64], n_sites: usize, d: usize) -> CMatrix {
    let dim = d.pow(n_sites as u32);
    let table = digit_table(dim, &vec![d; n_sites]);
    CMatrix::from_fn(dim, dim, |i, j| amps[interleave(&table[i], &table[j], d)])
}

/// Rank-3 tensor `(left bond, site index, right bond)`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    pub left: usize,
    pub phys: usize,
    pub right: usize,
    pub data: Vec<Complex64>,
}

impl SiteTensor {
    pub fn zeros(left: usize, phys: usize, right: usize) -> Self {
        Self {
            left,
            phys,
            right,
            data: vec![ZERO; left * phys * right],
        }
    }

    pub fn get(&self, l: usize, p: usize, r: usize) -> Complex64 {
        self.data[(l * self.phys + p) * self.right + r]
    }

    pub fn set(&mut self, l: usize, p: usize, r: usize, v: Complex64) {
        self.data[(l * self.phys + p) * self.right + r] = v;
    }
}

/// Open-boundary chain of site tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct MpsChain {
    sites: Vec<SiteTensor>,
}

impl MpsChain {
    pub fn new(sites: Vec<SiteTensor>) -> Result<Self> {
        if sites.is_empty() {
            return Err(invalid("a chain needs at least one site"));
        }
        if sites[0].left != 1 || sites[sites.len() - 1].right != 1 {
            return Err(invalid("boundary bonds must be trivial"));
        }
        for w in sites.windows(2) {
            if w[0].right != w[1].left {
                return Err(Error::DimensionMismatch {
                    expected: w[0].right,
                    found: w[1].left,
                });
            }
        }
        Ok(Self { sites })
    }

    /// Successive SVDs left to right; singular values at or below
    /// `tol * s_max` of each cut are discarded.
    pub fn from_dense(amplitudes: &[Complex64], phys_dims: &[usize], tol: f64) -> Result<Self> {
        let total: usize = phys_dims.iter().product();
        if amplitudes.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: amplitudes.len(),
            });
        }
        let mut sites = Vec::with_capacity(phys_dims.len());
        let mut left = 1;
        let mut rest = total;
        // row-major remainder of shape (left * phys_k) x (rest / phys_k)
        let mut remainder = amplitudes.to_vec();
        for (k, &p) in phys_dims.iter().enumerate() {
            rest /= p;
            let rows = left * p;
            if k + 1 == phys_dims.len() {
                let mut t = SiteTensor::zeros(left, p, 1);
                t.data.copy_from_slice(&remainder);
                sites.push(t);
                break;
            }
            let m = CMatrix::from_row_slice(rows, rest, &remainder);
            let svd = linalg::svd(&m);
            let u = svd.u.expect("requested U");
            let v_t = svd.v_t.expect("requested V^T");
            let sv = &svd.singular_values;
            let mut order: Vec<usize> = (0..sv.len()).collect();
            order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
            let smax = sv[order[0]];
            let keep = order
                .iter()
                .take_while(|&&i| smax > 0.0 && sv[i] > tol * smax)
                .count()
                .max(1);
            let kept = &order[..keep];
            let mut t = SiteTensor::zeros(left, p, keep);
            for row in 0..rows {
                for (c, &src) in kept.iter().enumerate() {
                    t.data[row * keep + c] = u[(row, src)];
                }
            }
            sites.push(t);
            let mut next = vec![ZERO; keep * rest];
            for (a, &src) in kept.iter().enumerate() {
                let s = sv[src];
                for col in 0..rest {
                    next[a * rest + col] = v_t[(src, col)] * s;
                }
            }
            remainder = next;
            left = keep;
        }
        Self::new(sites)
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Bond dimensions between neighbouring sites.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1]
            .iter()
            .map(|s| s.right)
            .collect()
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.phys).collect()
    }

    /// Full contraction over all bonds, big-endian in the site indices.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut acc = vec![ONE];
        let mut prefix = 1;
        let mut bond = 1;
        for t in &self.sites {
            let mut next = vec![ZERO; prefix * t.phys * t.right];
            for pi in 0..prefix {
                for l in 0..bond {
                    let a = acc[pi * bond + l];
                    if a == ZERO {
                        continue;
                    }
                    for p in 0..t.phys {
                        let base = (pi * t.phys + p) * t.right;
                        for r in 0..t.right {
                            next[base + r] += a * t.get(l, p, r);
                        }
                    }
                }
            }
            acc = next;
            prefix *= t.phys;
            bond = t.right;
        }
        acc
    }
}

/// Matrix product density operator: site index `ket * d + bra`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mpdo {
    local_dim: usize,
    chain: MpsChain,
}

impl Mpdo {
    pub fn new(local_dim: usize, chain: MpsChain) -> Result<Self> {
        if let Some(s) = chain.sites().iter().find(|s| s.phys != local_dim * local_dim) {
            return Err(Error::DimensionMismatch {
                expected: local_dim * local_dim,
                found: s.phys,
            });
        }
        Ok(Self { local_dim, chain })
    }

    pub fn n_sites(&self) -> usize {
        self.chain.len()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.chain.bond_dims()
    }

    /// Largest bond dimension (1 for a single site).
    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn chain(&self) -> &MpsChain {
        &self.chain
    }

    /// Entry `M_k^{left,right}[ket, bra]`.
    pub fn entry(&self, site: usize, left: usize, ket: usize, bra: usize, right: usize) -> Complex64 {
        self.chain.sites[site].get(left, ket * self.local_dim + bra, right)
    }
}

/// Matrix product operator of `rho`. Ranks are cut at `tol * s_max`, so every
/// bond equals the operator Schmidt rank of the corresponding cut.
pub fn mpdo_from_dense(rho: &DensityMatrix, tol: f64) -> Result<Mpdo> {
    if tol <= 0.0 {
        return Err(invalid("tol must be positive"));
    }
    let vec = vectorize(rho);
    let d = rho.local_dim();
    let chain = MpsChain::from_dense(
        vec.amplitudes().as_slice(),
        &vec![d * d; rho.n_sites()],
        tol,
    )?;
    Mpdo::new(d, chain)
}

/// Dense operator obtained by summing over all bond indices.
pub fn contract_mpdo_matrix(mpdo: &Mpdo) -> Result<CMatrix> {
    let dim = checked_dim(mpdo.local_dim, mpdo.n_sites())?;
    crate::check_dense(dim)?;
    let amps = mpdo.chain.to_dense();
    Ok(devectorize(&amps, mpdo.n_sites(), mpdo.local_dim))
}

/// As [`contract_mpdo_matrix`], validated as a density matrix.
pub fn contract_mpdo(mpdo: &Mpdo) -> Result<DensityMatrix> {
    let m = contract_mpdo_matrix(mpdo)?;
    DensityMatrix::new(m, mpdo.n_sites(), mpdo.local_dim)
}

/// Purifying pure state written as an MPS with one ancilla leg per site;
/// site index `phys * d_a + ancilla`.
#[derive(Clone, Debug, PartialEq)]
pub struct MpsPurification {
    local_dim: usize,
    ancilla_dims: Vec<usize>,
    chain: MpsChain,
}

impl MpsPurification {
    pub fn new(local_dim: usize, ancilla_dims: Vec<usize>, chain: MpsChain) -> Result<Self> {
        if ancilla_dims.len() != chain.len() {
            return Err(Error::DimensionMismatch {
                expected: chain.len(),
                found: ancilla_dims.len(),
            });
        }
        for (s, &a) in chain.sites().iter().zip(&ancilla_dims) {
            if s.phys != local_dim * a {
                return Err(Error::DimensionMismatch {
                    expected: local_dim * a,
                    found: s.phys,
                });
            }
        }
        Ok(Self {
            local_dim,
            ancilla_dims,
            chain,
        })
    }

    /// Splits a dense purifying vector, ordered `(i_1 a_1 i_2 a_2 ..)`, into
    /// site tensors.
    pub fn from_dense(
        amplitudes: &[Complex64],
        local_dim: usize,
        ancilla_dims: Vec<usize>,
        tol: f64,
    ) -> Result<Self> {
        let dims: Vec<usize> = ancilla_dims.iter().map(|a| a * local_dim).collect();
        let chain = MpsChain::from_dense(amplitudes, &dims, tol)?;
        Self::new(local_dim, ancilla_dims, chain)
    }

    pub fn n_sites(&self) -> usize {
        self.chain.len()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn ancilla_dims(&self) -> &[usize] {
        &self.ancilla_dims
    }

    pub fn chain(&self) -> &MpsChain {
        &self.chain
    }

    /// Bond dimensions of the stored chain.
    pub fn schmidt_ranks(&self) -> Vec<usize> {
        self.chain.bond_dims()
    }

    pub fn to_pure_state(&self) -> PureState {
        let dims = self.chain.phys_dims();
        PureState::new(dims, CVector::from_vec(self.chain.to_dense()))
            .expect("chain dimensions are consistent")
    }
}

/// `tr_ancilla |Psi><Psi|` as a dense operator.
pub fn trace_out_ancilla(psi: &MpsPurification) -> Result<DensityMatrix> {
    let n = psi.n_sites();
    let d = psi.local_dim;
    let phys_total = checked_dim(d, n)?;
    crate::check_dense(phys_total)?;
    let anc_total: usize = psi.ancilla_dims.iter().product();
    let amps = psi.chain.to_dense();
    let site_dims: Vec<usize> = psi.ancilla_dims.iter().map(|a| a * d).collect();
    let mut m = CMatrix::zeros(phys_total, anc_total);
    let mut digs = vec![0; n];
    for (idx, &z) in amps.iter().enumerate() {
        if z == ZERO {
            continue;
        }
        linalg::digits(idx, &site_dims, &mut digs);
        let mut p = 0;
        let mut a = 0;
        for (k, &s) in digs.iter().enumerate() {
            let da = psi.ancilla_dims[k];
            p = p * d + s / da;
            a = a * da + s % da;
        }
        m[(p, a)] = z;
    }
    let rho = &m * m.adjoint();
    Ok(DensityMatrix::from_psd_unchecked(rho, n, d))
}

/// Schmidt ranks of the full purifying state (system and ancilla of sites
/// `1..k` against the rest) at every cut.
pub fn purification_cut_ranks(psi: &MpsPurification, tol: f64) -> CutRanks {
    schmidt_rank(&psi.to_pure_state(), tol)
}

/// Largest Schmidt rank of the purifying state across linear cuts.
pub fn purification_rank(psi: &MpsPurification, tol: f64) -> usize {
    purification_cut_ranks(psi, tol).max
}

/// Per-cut operator Schmidt rank of the purified state against the squared
/// Schmidt rank of the purification at the same cut.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankInequality {
    pub osr: Vec<usize>,
    pub purification: Vec<usize>,
    /// `osr[c] <= purification[c]^2` at every cut.
    pub holds: bool,
}

pub fn rank_inequality(psi: &MpsPurification, tol: f64) -> Result<RankInequality> {
    let sigma = trace_out_ancilla(psi)?;
    let osr = operator_schmidt_rank(&sigma, tol).per_cut;
    let purification = purification_cut_ranks(psi, tol).per_cut;
    let holds = osr
        .iter()
        .zip(&purification)
        .all(|(&o, &p)| o <= p.saturating_mul(p));
    Ok(RankInequality {
        osr,
        purification,
        holds,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, to_complex};
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-9;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell_projector() -> DensityMatrix {
        let mut m = CMatrix::zeros(4, 4);
        for &i in &[0, 3] {
            for &j in &[0, 3] {
                m[(i, j)] = c(0.5);
            }
        }
        DensityMatrix::new(m, 2, 2).unwrap()
    }

    /// Rank of the 4x4 realignment of the Bell projector, written out by hand.
    fn bell_realigned_rank() -> usize {
        // rows (i1 j1), cols (i2 j2); rho[(i1 i2),(j1 j2)] = 1/2 iff i1=i2, j1=j2
        let mut r = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                r[(i * 2 + j, i * 2 + j)] = c(0.5);
            }
        }
        linalg::matrix_rank(&r, TOL)
    }

    pub(crate) fn random_density(n_sites: usize, rank: usize, seed: u64) -> DensityMatrix {
        let dim = 2usize.pow(n_sites as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_unitary(dim, &mut rng);
        let mut diag = vec![0.0; dim];
        for (k, v) in diag.iter_mut().take(rank).enumerate() {
            *v = 1.0 + k as f64;
        }
        let total: f64 = diag.iter().sum();
        let d = DMatrix::from_diagonal(&DVector::from_vec(diag.iter().map(|x| x / total).collect()));
        let m = &u * to_complex(&d) * u.adjoint();
        DensityMatrix::new(m, n_sites, 2).unwrap()
    }

    #[test]
    fn maximally_mixed_has_unit_bonds() {
        let rho = DensityMatrix::new(CMatrix::identity(4, 4).scale(0.25), 2, 2).unwrap();
        let mpdo = mpdo_from_dense(&rho, TOL).unwrap();
        assert_eq!(mpdo.bond_dims(), vec![1]);
        assert_eq!(operator_schmidt_rank(&rho, TOL).max, 1);
    }

    #[test]
    fn bell_projector_has_full_operator_rank() {
        let rho = bell_projector();
        assert_eq!(bell_realigned_rank(), 4);
        assert_eq!(mpdo_from_dense(&rho, TOL).unwrap().bond_dims(), vec![4]);
        assert_eq!(operator_schmidt_rank(&rho, TOL).max, 4);
    }

    #[test]
    fn product_state_has_unit_operator_rank() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.7), c(0.1), c(0.1), c(0.3)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.4), c(0.0), c(0.0), c(0.6)]);
        let rho = DensityMatrix::new(a.kronecker(&b), 2, 2).unwrap();
        assert_eq!(operator_schmidt_rank(&rho, TOL).max, 1);
    }

    #[test]
    fn single_site_passthrough() {
        let sx = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.5), c(0.5), c(0.5)]);
        let rho = DensityMatrix::new(sx.clone(), 1, 2).unwrap();
        let mpdo = mpdo_from_dense(&rho, TOL).unwrap();
        assert!(mpdo.bond_dims().is_empty());
        let back = contract_mpdo_matrix(&mpdo).unwrap();
        assert!(linalg::frobenius(&(back - sx)) < 1e-14);

        // Pauli X is not a state, but contraction is shape-only.
        let mut t = SiteTensor::zeros(1, 4, 1);
        t.set(0, 1, 0, ONE);
        t.set(0, 2, 0, ONE);
        let mpdo = Mpdo::new(2, MpsChain::new(vec![t]).unwrap()).unwrap();
        let x = contract_mpdo_matrix(&mpdo).unwrap();
        assert_eq!(x, CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]));
    }

    #[test]
    fn roundtrip_random_three_qubits() {
        for seed in 0..5 {
            let rho = random_density(3, 8, seed);
            let mpdo = mpdo_from_dense(&rho, 1e-12).unwrap();
            let back = contract_mpdo_matrix(&mpdo).unwrap();
            assert!(linalg::frobenius(&(back - rho.matrix())) <= 1e-10);
        }
    }

    #[test]
    fn vectorize_identity_and_isometry() {
        let rho = DensityMatrix::new(CMatrix::identity(2, 2).scale(0.5), 1, 2).unwrap();
        let v = vectorize(&rho);
        let expected = [c(0.5), ZERO, ZERO, c(0.5)];
        assert_eq!(v.amplitudes().as_slice(), &expected);

        let rho = random_density(3, 3, 9);
        let v = vectorize(&rho);
        let purity = (rho.matrix() * rho.matrix()).trace().re;
        assert!((v.norm().powi(2) - purity).abs() < 1e-12);
    }

    #[test]
    fn vectorized_schmidt_ranks_match_operator_ranks() {
        for seed in 0..4 {
            let rho = random_density(3, 1 + seed as usize, 100 + seed);
            let sr = schmidt_rank(&vectorize(&rho), TOL);
            let osr = operator_schmidt_rank(&rho, TOL);
            assert_eq!(sr, osr);
        }
    }

    #[test]
    fn schmidt_rank_examples() {
        let e0 = CVector::from_vec(vec![ONE, ZERO]);
        let plus = CVector::from_vec(vec![c(1.0 / 2f64.sqrt()), c(1.0 / 2f64.sqrt())]);
        let prod = PureState::product(&[e0, plus.clone(), plus]).unwrap();
        assert_eq!(schmidt_rank(&prod, TOL).max, 1);

        let h = 1.0 / 2f64.sqrt();
        let bell = PureState::new(vec![2, 2], CVector::from_vec(vec![c(h), ZERO, ZERO, c(h)])).unwrap();
        assert_eq!(schmidt_rank(&bell, TOL).per_cut, vec![2]);
    }

    #[test]
    fn bell_purification_of_maximally_mixed_qubit() {
        let h = 1.0 / 2f64.sqrt();
        let amps = [c(h), ZERO, ZERO, c(h)];
        let psi = MpsPurification::from_dense(&amps, 2, vec![2], 1e-12).unwrap();
        let rho = trace_out_ancilla(&psi).unwrap();
        let target = CMatrix::identity(2, 2).scale(0.5);
        assert!(linalg::frobenius(&(rho.matrix() - target)) < 1e-14);
        assert_eq!(purification_rank(&psi, TOL), 1);
    }

    #[test]
    fn product_purification_has_rank_one() {
        let site = CVector::from_vec(vec![c(0.6), c(0.0), c(0.0), c(0.8)]);
        let psi_dense = site.kronecker(&site);
        let psi = MpsPurification::from_dense(psi_dense.as_slice(), 2, vec![2, 2], 1e-12).unwrap();
        assert_eq!(purification_rank(&psi, TOL), 1);
        assert_eq!(psi.schmidt_ranks(), vec![1]);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        assert!(matches!(DensityMatrix::new(bad, 1, 2), Err(Error::NotHermitian { .. })));
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        assert!(matches!(DensityMatrix::new(neg, 1, 2), Err(Error::NotPsd { .. })));
        let wrong = CMatrix::identity(3, 3);
        assert!(matches!(
            DensityMatrix::new(wrong, 1, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dense_cap_is_enforced() {
        let mut t = SiteTensor::zeros(1, 4, 1);
        t.set(0, 0, 0, ONE);
        let chain = MpsChain::new(vec![t; 13]).unwrap();
        let mpdo = Mpdo::new(2, chain).unwrap();
        assert!(matches!(
            contract_mpdo_matrix(&mpdo),
            Err(Error::DenseCapExceeded { dim: 8192, .. })
        ));
    }

    #[test]
    fn density_json_roundtrip() {
        let rho = random_density(2, 2, 5);
        let s = serde_json::to_string(&rho).unwrap();
        let back: DensityMatrix = serde_json::from_str(&s).unwrap();
        assert!(linalg::frobenius(&(back.matrix() - rho.matrix())) < 1e-15);
        assert_eq!(back.n_sites(), 2);
    }

    #[test]
    fn random_purification_satisfies_rank_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let amps = linalg::gaussian_vector(64, &mut rng);
        let psi = MpsPurification::from_dense(amps.as_slice(), 2, vec![2, 2, 2], TOL).unwrap();
        let check = rank_inequality(&psi, TOL).unwrap();
        assert!(check.holds, "{check:?}");
        assert_eq!(check.purification, vec![4, 4]);
        assert_eq!(check.osr, vec![4, 4]);
    }

    #[test]
    fn product_states_split_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=6 {
            for _ in 0..20 {
                let v = (1..n).fold(linalg::gaussian_vector(2, &mut rng), |acc, _| {
                    acc.kronecker(&linalg::gaussian_vector(2, &mut rng))
                });
                let chain = MpsChain::from_dense(v.as_slice(), &vec![2; n], TOL).unwrap();
                let back = CVector::from_vec(chain.to_dense());
                assert!((back - &v).norm() <= 1e-12 * v.norm());
                assert!(chain.bond_dims().iter().all(|&b| b == 1));
            }
        }
    }
}
