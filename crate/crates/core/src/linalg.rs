//! Dense linear-algebra helpers on top of `nalgebra`.

use std::collections::BTreeMap;

use nalgebra::{ComplexField, DMatrix, DVector, Dyn, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Thin SVD with both factors, checked by recomposition and orthonormality.
///
/// With its default stopping threshold nalgebra occasionally returns complex
/// factors that recompose to the input only up to ~1e-5 on rank-deficient
/// matrices, and some rank-one inputs fail at any threshold. Tighter
/// thresholds, a QR-preconditioned variant and seeded random rotations of
/// the column space are tried in turn.
pub fn svd<T>(m: &DMatrix<T>) -> SVD<T, Dyn, Dyn>
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() < m.ncols() {
        let mut t = svd(&m.adjoint());
        let u = t.v_t.take().map(|v| v.adjoint());
        let v_t = t.u.take().map(|u| u.adjoint());
        t.u = u;
        t.v_t = v_t;
        return t;
    }
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let accept = |s: &SVD<T, Dyn, Dyn>| {
        let (Some(u), Some(v_t)) = (&s.u, &s.v_t) else {
            return false;
        };
        let k = u.ncols();
        let eye = DMatrix::<T>::identity(k, k);
        let err = (s.clone().recompose().expect("both factors") - m).norm();
        err <= 1e-12 * scale
            && (u.adjoint() * u - &eye).norm() <= 1e-10
            && (v_t * v_t.adjoint() - &eye).norm() <= 1e-10
    };
    for eps in [1e-20, f64::EPSILON] {
        if let Some(s) = m.clone().try_svd(true, true, eps, 50_000) {
            if accept(&s) {
                return s;
            }
        }
    }
    let qr = m.clone().qr();
    let r = qr.r();
    for eps in [1e-20, f64::EPSILON] {
        if let Some(mut s) = r.clone().try_svd(true, true, eps, 50_000) {
            s.u = s.u.map(|u| qr.q() * u);
            if accept(&s) {
                return s;
            }
        }
    }
    // m = (m Q) Q^T for a random orthogonal Q
    let c = m.ncols();
    for seed in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::<f64>::from_fn(c, c, |_, _| rng.sample(StandardNormal));
        let q = g.qr().q().map(T::from_real);
        if let Some(mut s) = (m * &q).try_svd(true, true, f64::EPSILON, 50_000) {
            s.v_t = s.v_t.map(|v| v * q.transpose());
            if accept(&s) {
                return s;
            }
        }
    }
    m.clone().svd(true, true)
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Real counterpart of [`singular_values`].
pub fn real_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values strictly above `tol * s_max`.
pub fn numerical_rank(sorted_sv: &[f64], tol: f64) -> usize {
    match sorted_sv.first() {
        Some(&smax) if smax > 0.0 => sorted_sv.iter().filter(|&&s| s > tol * smax).count(),
        _ => 0,
    }
}

pub fn matrix_rank(m: &CMatrix, tol: f64) -> usize {
    numerical_rank(&singular_values(m), tol)
}

pub fn real_matrix_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    numerical_rank(&real_singular_values(m), tol)
}

/// Singular values of the matrix holding `entries` at `(row, col)`, with all
/// rows and columns that carry no entry dropped. Dropping identically zero
/// lines leaves the nonzero singular values unchanged.
pub fn compact_singular_values<I>(entries: I) -> Vec<f64>
where
    I: IntoIterator<Item = (usize, usize, Complex64)>,
{
    let mut rows = BTreeMap::new();
    let mut cols = BTreeMap::new();
    let mut kept = Vec::new();
    for (r, c, v) in entries {
        if v == ZERO {
            continue;
        }
        let nr = rows.len();
        let ri = *rows.entry(r).or_insert(nr);
        let nc = cols.len();
        let ci = *cols.entry(c).or_insert(nc);
        kept.push((ri, ci, v));
    }
    let mut m = CMatrix::zeros(rows.len(), cols.len());
    for (r, c, v) in kept {
        m[(r, c)] += v;
    }
    singular_values(&m)
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Largest entrywise deviation of `U^† U` from the identity.
pub fn unitary_deviation(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((g[(i, j)] - target).norm());
        }
    }
    dev
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in non-increasing
/// order. Each eigenvector has its largest-magnitude entry (first one on
/// ties) rotated to be real and positive.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

fn fix_phase(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    let phase = v[pivot] / v[pivot].norm();
    let rot = phase.conj();
    for z in v.iter_mut() {
        *z *= rot;
    }
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues in
/// non-increasing order.
pub fn symmetric_eigh(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()).scale(0.5);
    sym.symmetric_eigenvalues().min()
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix
/// with the phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random complex vector with i.i.d. standard normal components.
pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Big-endian mixed-radix digits of `index`.
pub fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trace_norm_of_identity_and_signed_diagonal() {
        let id = CMatrix::identity(4, 4);
        assert!((trace_norm(&id) - 4.0).abs() < 1e-12);
        let d = to_complex(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -0.5])));
        assert!((trace_norm(&d) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_of_hermitian_matches_absolute_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let g = CMatrix::from_fn(6, 6, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let h = &g + g.adjoint();
            let (vals, _) = hermitian_eigh(&h);
            let abs_sum: f64 = vals.iter().map(|v| v.abs()).sum();
            assert!((trace_norm(&h) - abs_sum).abs() < 1e-10);
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = haar_unitary(8, &mut rng);
        assert!(unitary_deviation(&u) < 1e-12);
    }

    #[test]
    fn eigh_is_sorted_and_phase_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = haar_unitary(5, &mut rng);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.1, 0.5, 0.2, 0.15, 0.05]));
        let rho = &u * to_complex(&d) * u.adjoint();
        let (vals, vecs) = hermitian_eigh(&rho);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        assert!((vals[0] - 0.5).abs() < 1e-12);
        for j in 0..5 {
            let col = vecs.column(j);
            let imax = (0..5)
                .max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm()))
                .unwrap();
            assert!(col[imax].im.abs() < 1e-12 && col[imax].re > 0.0);
        }
    }

    #[test]
    fn compaction_preserves_singular_values() {
        let entries = vec![(0, 5, ONE), (7, 5, ONE), (7, 9, Complex64::new(2.0, 0.0))];
        let sv = compact_singular_values(entries);
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ONE, Complex64::new(2.0, 0.0)]);
        let direct = singular_values(&m);
        assert_eq!(sv.len(), 2);
        for (a, b) in sv.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn digits_are_big_endian() {
        let mut out = [0; 3];
        digits(5, &[2, 2, 2], &mut out);
        assert_eq!(out, [1, 0, 1]);
        digits(7, &[3, 4, 2], &mut out);
        assert_eq!(out, [0, 3, 1]);
    }

    #[test]
    fn checked_svd_recomposes_rank_deficient_complex_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..600 {
            let r = 1 + trial % 17;
            let c = 1 + (trial / 17) % 13;
            let rank = 1 + trial % r.min(c);
            let a = CMatrix::from_fn(r, rank, |_, _| gaussian_vector(1, &mut rng)[0]);
            let b = CMatrix::from_fn(rank, c, |_, _| gaussian_vector(1, &mut rng)[0]);
            let mut m = a * b;
            if trial % 3 == 0 {
                for j in 0..c {
                    m[(0, j)] = ZERO;
                }
            }
            let s = svd(&m);
            let err = frobenius(&(s.clone().recompose().unwrap() - &m));
            assert!(err <= 1e-12 * frobenius(&m).max(1e-300), "trial {trial}: {err:e}");
            let mut from_svd: Vec<f64> = s.singular_values.iter().copied().collect();
            from_svd.sort_by(|x, y| y.total_cmp(x));
            for (x, y) in singular_values(&m).iter().zip(&from_svd) {
                assert!((x - y).abs() <= 1e-12 * from_svd[0]);
            }
        }
    }
}
