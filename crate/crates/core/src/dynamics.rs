//! Time evolution, dipole correlations and the spontaneous emission spectrum
//! from the spectral decomposition of the Liouvillian.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graded_space::GradedBasis;
use crate::linalg::{max_abs_diff, CMatrix, I, ZERO};
use crate::model::{BlockOperator, OperatorKind};
use crate::spectral::LiouvilleEigensystem;

/// Accepted deviation of `Tr rho0` from one, and of `rho0` from Hermiticity.
pub const STATE_TOL: f64 = 1e-10;
/// Weights below this fraction of the largest one are dropped from the double sum.
pub const WEIGHT_PRUNE: f64 = 1e-14;
/// Eigenvalues closer than this to zero count as stationary when checking divergence.
pub const STATIONARY_TOL: f64 = 1e-10;

fn check_state(rho0: &CMatrix, dim: usize) -> Result<()> {
    if rho0.shape() != (dim, dim) {
        return Err(Error::Shape(format!("state is {:?}, expected {dim}x{dim}", rho0.shape())));
    }
    let tr = rho0.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
        return Err(Error::Validation(format!("initial state has trace {tr}, expected 1")));
    }
    if max_abs_diff(rho0, &rho0.adjoint()) > STATE_TOL {
        return Err(Error::Validation("initial state is not Hermitian".into()));
    }
    Ok(())
}

/// Pure-state projector `|n, j><n, j|` with 1-based `j`.
pub fn basis_projector(basis: &GradedBasis, n: usize, j: usize) -> Result<CMatrix> {
    let idx = basis.global_index(n, j)?;
    let dim = basis.total_dimension();
    let mut rho = CMatrix::zeros(dim, dim);
    rho[(idx, idx)] = Complex64::new(1.0, 0.0);
    Ok(rho)
}

/// Coefficients `c = Tr[rho_check^dagger rho0]`, aligned with `sys.modes()`.
pub fn expand_state(rho0: &CMatrix, sys: &LiouvilleEigensystem) -> Result<Vec<Complex64>> {
    check_state(rho0, sys.basis.total_dimension())?;
    Ok(expand_operator(rho0, sys))
}

/// Same expansion without the density-matrix checks, for arbitrary operators.
pub fn expand_operator(x: &CMatrix, sys: &LiouvilleEigensystem) -> Vec<Complex64> {
    sys.modes().iter().map(|m| m.left_overlap(&sys.basis, x)).collect()
}

/// `sum c e^{lambda t} rho_hat`.
pub fn evolve_coefficients(coefficients: &[Complex64], t: f64, sys: &LiouvilleEigensystem) -> CMatrix {
    let n = sys.basis.total_dimension();
    let mut out = CMatrix::zeros(n, n);
    for (mode, &c) in sys.modes().iter().zip(coefficients) {
        if c != ZERO {
            mode.add_right_scaled(&sys.basis, c * (mode.lambda() * t).exp(), &mut out);
        }
    }
    out
}

/// `rho(t) = e^{L t} rho0`.
pub fn evolve(rho0: &CMatrix, t: f64, sys: &LiouvilleEigensystem) -> Result<CMatrix> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Validation(format!("evolution time {t} must be finite and >= 0")));
    }
    let coeffs = expand_state(rho0, sys)?;
    Ok(evolve_coefficients(&coeffs, t, sys))
}

/// `<sigma^+(t) sigma^-(t')> = Tr[sigma^- e^{L (t' - t)} (rho(t) sigma^+)]` for `t' >= t`;
/// the other ordering is the complex conjugate.
pub fn dipole_correlation(
    sys: &LiouvilleEigensystem,
    rho0: &CMatrix,
    lowering: &BlockOperator,
    t: f64,
    t_prime: f64,
) -> Result<Complex64> {
    if t_prime < t {
        return Ok(dipole_correlation(sys, rho0, lowering, t_prime, t)?.conj());
    }
    let sm = probe(lowering, sys)?;
    let rho_t = evolve(rho0, t, sys)?;
    let x = rho_t * sm.adjoint();
    let coeffs = expand_operator(&x, sys);
    Ok((sm * evolve_coefficients(&coeffs, t_prime - t, sys)).trace())
}

fn probe(lowering: &BlockOperator, sys: &LiouvilleEigensystem) -> Result<CMatrix> {
    if lowering.kind() != OperatorKind::Lowering {
        return Err(Error::Config("emission probe must be a lowering operator".into()));
    }
    Ok(lowering.to_full(&sys.basis))
}

/// One surviving term of the double sum over eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumWeight {
    /// Index of `lambda` in `sys.modes()`.
    pub first: usize,
    /// Index of `lambda'` in `sys.modes()`.
    pub second: usize,
    pub lambda: Complex64,
    pub lambda_prime: Complex64,
    pub weight: Complex64,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    /// Unnormalized `s(omega)`.
    pub s: Vec<f64>,
    pub varsigma: f64,
    /// `S(omega) = s / (2 pi varsigma)`.
    pub normalized: Vec<f64>,
    pub weights: Vec<SpectrumWeight>,
    /// Largest `|Im s|` over the grid, and `|Im varsigma|`.
    pub imag_leakage: f64,
}

impl SpectrumResult {
    /// `s(omega)` at an arbitrary frequency from the stored weights.
    pub fn s_at(&self, omega: f64) -> Complex64 {
        let iw = I * omega;
        self.weights
            .iter()
            .map(|w| w.weight / ((w.lambda - w.lambda_prime - iw) * (w.lambda_prime + iw)))
            .sum()
    }
}

/// Emission spectrum of the probe `sigma^-` for the initial state `rho0`.
///
/// Weights `T = Tr[rho_check_l^dagger rho0] Tr[rho_check_l'^dagger rho_hat_l sigma^+] Tr[sigma^- rho_hat_l']`
/// with `|T| < 1e-14 max|T|` are dropped. A surviving weight on a zero eigenvalue makes
/// the time integrals diverge and is reported as an error.
pub fn emission_spectrum(
    sys: &LiouvilleEigensystem,
    rho0: &CMatrix,
    omega: &[f64],
    lowering: &BlockOperator,
) -> Result<SpectrumResult> {
    let basis = &sys.basis;
    let sm = probe(lowering, sys)?;
    let sp = sm.adjoint();
    let coeffs = expand_state(rho0, sys)?;
    let modes = sys.modes();
    // Tr[sigma^- rho_hat] = Tr[(sigma^+)^dagger rho_hat]
    let emit: Vec<Complex64> = modes.iter().map(|m| m.right_against(basis, &sp)).collect();

    let mut raw = Vec::new();
    for (a, ma) in modes.iter().enumerate() {
        if coeffs[a] == ZERO {
            continue;
        }
        let x = ma.right_dense(basis) * &sp;
        for (b, mb) in modes.iter().enumerate() {
            if emit[b] == ZERO {
                continue;
            }
            let w = coeffs[a] * mb.left_overlap(basis, &x) * emit[b];
            if w != ZERO {
                raw.push(SpectrumWeight {
                    first: a,
                    second: b,
                    lambda: ma.lambda(),
                    lambda_prime: mb.lambda(),
                    weight: w,
                });
            }
        }
    }
    let max_w = raw.iter().map(|w| w.weight.norm()).fold(0.0, f64::max);
    let weights: Vec<SpectrumWeight> =
        raw.into_iter().filter(|w| w.weight.norm() >= WEIGHT_PRUNE * max_w).collect();
    if let Some(w) = weights
        .iter()
        .find(|w| w.lambda.norm() < STATIONARY_TOL || w.lambda_prime.norm() < STATIONARY_TOL)
    {
        return Err(Error::DivergentSpectrum(format!(
            "weight {} couples stationary eigenvalues ({}, {})",
            w.weight, w.lambda, w.lambda_prime
        )));
    }
    if weights.is_empty() {
        return Err(Error::DivergentSpectrum("probe carries no emission weight".into()));
    }

    let varsigma_c: Complex64 = weights.iter().map(|w| w.weight / (-w.lambda)).sum();
    let mut result = SpectrumResult {
        omega: omega.to_vec(),
        s: Vec::with_capacity(omega.len()),
        varsigma: varsigma_c.re,
        normalized: Vec::with_capacity(omega.len()),
        weights,
        imag_leakage: varsigma_c.im.abs(),
    };
    if result.varsigma <= 0.0 {
        return Err(Error::Numerical(format!("non-positive normalization {}", result.varsigma)));
    }
    for &w in omega {
        let s = result.s_at(w);
        result.imag_leakage = result.imag_leakage.max(s.im.abs());
        result.s.push(s.re);
        result.normalized.push(s.re / (2.0 * std::f64::consts::PI * result.varsigma));
    }
    Ok(result)
}

/// Closed forms for one emitter coupled to a damped mode, starting from the excited
/// emitter with an empty mode:
/// `s = |2 (2w + i kappa) / (4 g^2 + (2 delta - 2w - i gamma)(2w + i kappa))|^2` and
/// `varsigma = [4g^2 (gamma + kappa) + kappa (4 delta^2 + (gamma + kappa)^2)]
///           / [4g^2 (gamma + kappa)^2 + gamma kappa (4 delta^2 + (gamma + kappa)^2)]`.
pub fn jc_spectrum_closed_form(omega: f64, g: f64, delta: f64, kappa: f64, gamma: f64) -> (f64, f64) {
    let a = Complex64::new(2.0 * omega, kappa);
    let b = Complex64::new(2.0 * delta - 2.0 * omega, -gamma);
    let s = (a * 2.0 / (4.0 * g * g + b * a)).norm_sqr();
    let sum = gamma + kappa;
    let rest = 4.0 * delta * delta + sum * sum;
    let varsigma = (4.0 * g * g * sum + kappa * rest) / (4.0 * g * g * sum * sum + gamma * kappa * rest);
    (s, varsigma)
}

/// Groups complex values into clusters closer than `tol` and returns one representative each.
pub fn distinct_values(values: impl IntoIterator<Item = Complex64>, tol: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for v in values {
        if !out.iter().any(|u| (u - v).norm() < tol) {
            out.push(v);
        }
    }
    out
}

/// Eigenvalues that carry weight above `tol`, either through the expansion of `rho0`
/// or as either member of a spectrum weight.
pub fn contributing_eigenvalues(
    sys: &LiouvilleEigensystem,
    coefficients: &[Complex64],
    spectrum: &SpectrumResult,
    tol: f64,
) -> Vec<Complex64> {
    let modes = sys.modes();
    let from_state = modes
        .iter()
        .zip(coefficients)
        .filter(|(_, c)| c.norm() > tol)
        .map(|(m, _)| m.lambda());
    let from_weights = spectrum
        .weights
        .iter()
        .filter(|w| w.weight.norm() > tol)
        .flat_map(|w| [w.lambda, w.lambda_prime]);
    distinct_values(from_state.chain(from_weights).collect::<Vec<_>>(), 1e-9)
}
