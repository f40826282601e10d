//! Small dense complex helpers shared by the block and dense code paths.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Entrywise complex conjugate (no transpose).
pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

/// Largest entry modulus; zero for an empty matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert-Schmidt pairing `Tr[a^dagger b]`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Row-major flattening: entry `(j, k)` of a `rows x cols` matrix lands at `j * cols + k`.
pub fn vec_row_major(m: &CMatrix) -> CVector {
    let (rows, cols) = m.shape();
    CVector::from_fn(rows * cols, |idx, _| m[(idx / cols, idx % cols)])
}

/// Inverse of [`vec_row_major`].
pub fn unvec_row_major(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    assert_eq!(v.len(), rows * cols, "unvec_row_major: length mismatch");
    CMatrix::from_fn(rows, cols, |j, k| v[j * cols + k])
}

pub fn to_faer(m: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Trace norm distance `1/2 ||a - b||_1` for (near-)Hermitian arguments.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a - b;
    let herm = (&d + d.adjoint()).map(|z| z * 0.5);
    let eig = nalgebra::linalg::SymmetricEigen::new(herm);
    0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    let mut vals: Vec<f64> = nalgebra::linalg::SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Pairs two equally sized eigenvalue lists and returns the largest pair distance.
///
/// Pairs are assigned greedily by increasing distance, which is exact whenever
/// the two lists agree to well below the spacing of distinct clusters.
pub fn match_spectra(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            candidates.push(((x - y).norm(), i, j));
        }
    }
    candidates.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut assigned = 0;
    for (dist, i, j) in candidates {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        worst = worst.max(dist);
        assigned += 1;
        if assigned == a.len() {
            break;
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_round_trip() {
        let m = CMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64));
        let v = vec_row_major(&m);
        assert_eq!(v[4], c(1.0, 1.0));
        assert_eq!(unvec_row_major(&v, 2, 3), m);
    }

    #[test]
    fn kronecker_acts_row_major() {
        // (A (x) B^T) vec(X) = vec(A X B) in row-major convention
        let a = CMatrix::from_fn(2, 2, |i, j| c(1.0 + i as f64, j as f64 - 0.5));
        let b = CMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, 1.0 + i as f64));
        let x = CMatrix::from_fn(2, 3, |i, j| c(i as f64 + 0.3, 0.1 * j as f64));
        let lhs = a.kronecker(&b.transpose()) * vec_row_major(&x);
        let rhs = vec_row_major(&(&a * &x * &b));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn spectra_matching_reports_worst_pair() {
        let a = [c(0.0, 0.0), c(1.0, 1.0), c(-1.0, 0.5)];
        let b = [c(-1.0, 0.5 + 1e-9), c(1.0, 1.0), c(0.0, 0.0)];
        let worst = match_spectra(&a, &b).unwrap();
        assert!(worst > 0.9e-9 && worst < 1.1e-9);
        assert!(match_spectra(&a, &b[..2]).is_none());
    }

    #[test]
    fn trace_distance_of_orthogonal_projectors() {
        let mut p = CMatrix::zeros(2, 2);
        p[(0, 0)] = ONE;
        let mut q = CMatrix::zeros(2, 2);
        q[(1, 1)] = ONE;
        assert!((trace_distance(&p, &q) - 1.0).abs() < 1e-14);
    }
}
