//! Brute-force reference: the full vectorized Liouvillian as one dense matrix.
//!
//! Operators are flattened globally row by row over the concatenated basis, so
//! `rho[(a, b)]` sits at `a * N + b`. Nothing here touches the block machinery.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graded_space::GradedBasis;
use crate::linalg::{CMatrix, CVector, I};
use crate::model::{BlockModel, Channel};

/// Largest Hilbert-space dimension accepted by the dense routines.
pub const DENSE_SIZE_LIMIT: usize = 64;

#[derive(Debug, Clone)]
pub struct DenseSuperoperator {
    /// `N^2 x N^2`
    pub matrix: CMatrix,
    /// Hilbert-space dimension `N`.
    pub dim: usize,
}

fn flatten(rho: &CMatrix) -> CVector {
    let n = rho.nrows();
    CVector::from_fn(n * n, |idx, _| rho[(idx / n, idx % n)])
}

fn unflatten(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |a, b| v[a * n + b])
}

fn dissipator(channels: &[Channel], basis: &GradedBasis, id: &CMatrix) -> CMatrix {
    let n = id.nrows();
    let mut out = CMatrix::zeros(n * n, n * n);
    for ch in channels {
        let a = ch.operator.to_full(basis);
        let gram = a.adjoint() * &a;
        let term = a.kronecker(&a.map(|z| z.conj()))
            - (gram.kronecker(id) + id.kronecker(&gram.transpose())).map(|z| z * 0.5);
        out += term.map(|z| z * ch.rate);
    }
    out
}

impl DenseSuperoperator {
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unflatten(&(&self.matrix * flatten(rho)), self.dim)
    }

    /// Hilbert-Schmidt adjoint `L^dagger` applied to `x`.
    pub fn apply_adjoint(&self, x: &CMatrix) -> CMatrix {
        unflatten(&(self.matrix.adjoint() * flatten(x)), self.dim)
    }

    /// Largest entry of `vec(1)^T L`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let n = self.dim;
        (0..n * n)
            .map(|col| (0..n).map(|a| self.matrix[(a * n + a, col)]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }

    /// Restriction to the `(n + l, n)` sector, rows and columns ordered as `(j, k)` pairs.
    pub fn sector_restriction(&self, basis: &GradedBasis, l: usize, n: usize) -> CMatrix {
        let idx: Vec<usize> = (0..basis.dim(n + l))
            .flat_map(|j| (0..basis.dim(n)).map(move |k| (j, k)))
            .map(|(j, k)| (basis.offset(n + l) + j) * self.dim + basis.offset(n) + k)
            .collect();
        CMatrix::from_fn(idx.len(), idx.len(), |r, c| self.matrix[(idx[r], idx[c])])
    }
}

/// Fails with [`Error::SizeGuard`] when `dimension` exceeds [`DENSE_SIZE_LIMIT`].
pub fn check_dense_size(dimension: usize) -> Result<()> {
    if dimension > DENSE_SIZE_LIMIT {
        return Err(Error::SizeGuard {
            dimension,
            limit: DENSE_SIZE_LIMIT,
        });
    }
    Ok(())
}

/// `-i (H (x) 1 - 1 (x) H^T) + sum_s gamma_s [A (x) A^* - (A^dagger A (x) 1 + 1 (x) (A^dagger A)^T) / 2]`
/// plus the same dissipator form for the dephasing channels.
pub fn dense_liouvillian(model: &BlockModel) -> Result<DenseSuperoperator> {
    let n = model.basis.total_dimension();
    check_dense_size(n)?;
    let id = CMatrix::identity(n, n);
    let h = model.hamiltonian.to_full(&model.basis);
    let mut l = (h.kronecker(&id) - id.kronecker(&h.transpose())).map(|z| -I * z);
    l += dissipator(&model.loss_channels, &model.basis, &id);
    l += dissipator(&model.dephasing_channels, &model.basis, &id);
    Ok(DenseSuperoperator { matrix: l, dim: n })
}

/// All `N^2` eigenvalues via a complex Schur decomposition.
pub fn dense_eigenvalues(op: &DenseSuperoperator) -> Result<Vec<Complex64>> {
    op.matrix
        .clone()
        .try_schur(f64::EPSILON, 0)
        .and_then(|s| s.eigenvalues())
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Numerical("dense Schur decomposition did not converge".into()))
}

/// `exp(L t) rho0` by a dense matrix exponential.
pub fn dense_propagate(rho0: &CMatrix, t: f64, op: &DenseSuperoperator) -> Result<CMatrix> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Validation(format!("propagation time {t} must be finite and >= 0")));
    }
    if rho0.shape() != (op.dim, op.dim) {
        return Err(Error::Shape(format!("state is {:?}, expected {}x{}", rho0.shape(), op.dim, op.dim)));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let prop = op.matrix.map(|z| z * t).exp();
    Ok(unflatten(&(prop * flatten(rho0)), op.dim))
}

/// `||L rho - lambda rho|| / ||rho||`.
pub fn eigenpair_residual(op: &DenseSuperoperator, lambda: Complex64, rho: &CMatrix) -> Result<f64> {
    let v = flatten(rho);
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::Validation("residual of a zero vector is undefined".into()));
    }
    Ok((&op.matrix * &v - v.map(|z| z * lambda)).norm() / norm)
}

/// `||L^dagger rho - lambda^* rho|| / ||rho||` for a left eigenvector.
pub fn left_eigenpair_residual(op: &DenseSuperoperator, lambda: Complex64, rho: &CMatrix) -> Result<f64> {
    let v = flatten(rho);
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::Validation("residual of a zero vector is undefined".into()));
    }
    Ok((op.matrix.adjoint() * &v - v.map(|z| z * lambda.conj())).norm() / norm)
}

/// `<sigma^+(t) sigma^-(t')>` by dense propagation, for either ordering of `t` and `t'`.
pub fn dense_dipole_correlation(
    op: &DenseSuperoperator,
    rho0: &CMatrix,
    lowering: &CMatrix,
    t: f64,
    t_prime: f64,
) -> Result<Complex64> {
    if t_prime < t {
        return Ok(dense_dipole_correlation(op, rho0, lowering, t_prime, t)?.conj());
    }
    let rho_t = dense_propagate(rho0, t, op)?;
    let x = dense_propagate(&(rho_t * lowering.adjoint()), t_prime - t, op)?;
    Ok((lowering * x).trace())
}
