//! Oracle sweep comparing the block construction against the dense Liouvillian.

use std::fmt;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::dynamics::{basis_projector, evolve, expand_operator};
use crate::error::Result;
use crate::linalg::{match_spectra, max_abs_diff, trace_distance, CMatrix, ONE, ZERO};
use crate::model::BlockModel;
use crate::oracle::{
    check_dense_size, dense_eigenvalues, dense_liouvillian, dense_propagate, eigenpair_residual,
    left_eigenpair_residual,
};
use crate::spectral::{full_eigensystem, pair_overlap, SolverOptions};

pub const EVOLUTION_TOL: f64 = 1e-7;
pub const TRACE_TOL: f64 = 1e-10;
pub const EVOLUTION_TIMES: [f64; 3] = [0.1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<20} value={:.3e} tol={:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Random density matrix `A A^dagger / Tr` from a seeded generator.
pub fn random_state(dim: usize, seed: u64) -> CMatrix {
    let mut rng = StdRng::seed_from_u64(seed);
    let a = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho.map(|z| z / tr)
}

/// Runs every oracle comparison. `residual_tol` bounds the eigen checks; evolution
/// and trace use [`EVOLUTION_TOL`] and [`TRACE_TOL`].
pub fn verify_model(model: &BlockModel, opts: &SolverOptions, residual_tol: f64) -> Result<VerifyReport> {
    let basis = &model.basis;
    check_dense_size(basis.total_dimension())?;
    let sys = full_eigensystem(model, opts)?;
    let op = dense_liouvillian(model)?;
    let modes = sys.modes();
    let mut report = VerifyReport::default();
    let mut push = |name, value, tolerance| report.checks.push(Check { name, value, tolerance });

    let dense = dense_eigenvalues(&op)?;
    let mismatch = match_spectra(&sys.eigenvalues(), &dense).unwrap_or(f64::INFINITY);
    push("spectrum_match", mismatch, residual_tol);

    let mut right: f64 = 0.0;
    let mut left: f64 = 0.0;
    for m in &modes {
        let scale = 1.0 + m.lambda().norm();
        right = right.max(eigenpair_residual(&op, m.lambda(), &m.right_dense(basis))? / scale);
        left = left.max(left_eigenpair_residual(&op, m.lambda(), &m.left_dense(basis))? / scale);
    }
    push("right_residual", right, residual_tol);
    push("left_residual", left, residual_tol);

    let mut bio: f64 = 0.0;
    for (a, ma) in modes.iter().enumerate() {
        for (b, mb) in modes.iter().enumerate() {
            let v = pair_overlap(&ma.pair.left, ma.adjoint, &mb.pair.right, mb.adjoint);
            bio = bio.max((v - if a == b { ONE } else { ZERO }).norm());
        }
    }
    push("biorthonormality", bio, residual_tol);

    let rho = random_state(basis.total_dimension(), 7);
    let coeffs = expand_operator(&rho, &sys);
    let rebuilt = crate::dynamics::evolve_coefficients(&coeffs, 0.0, &sys);
    push("completeness", max_abs_diff(&rebuilt, &rho), residual_tol);

    let (n, j) = model.excited_atom;
    let rho0 = basis_projector(basis, n, j)?;
    let mut dist: f64 = 0.0;
    let mut trace: f64 = 0.0;
    for t in EVOLUTION_TIMES {
        let a = evolve(&rho0, t, &sys)?;
        let b = dense_propagate(&rho0, t, &op)?;
        dist = dist.max(trace_distance(&a, &b));
        trace = trace.max((a.trace() - ONE).norm());
    }
    push("evolution_match", dist, EVOLUTION_TOL);
    push("trace_preservation", trace, TRACE_TOL);
    Ok(report)
}
