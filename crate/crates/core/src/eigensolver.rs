//! Biorthonormal diagonalization of non-Hermitian blocks.
//!
//! For a block `K` we return eigenvalues `eps`, a right matrix `R` whose columns
//! are unit-norm right eigenvectors, and a left matrix `Q` with `Q^dagger R = 1`,
//! so the columns of `Q` satisfy `K^dagger q_j = eps_j^* q_j`.

use faer::linalg::solvers::DenseSolveCore;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, from_faer, frobenius, identity, max_abs, to_faer, CMatrix, I};
use crate::model::{BlockModel, BlockOperator, OperatorKind};

/// Relative default for the eigenvalue gap below which a block counts as degenerate.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

// A computed eigenvalue is uncertain by roughly cond * eps_mach * ||K||; near a
// defective pair the computed split is itself of that order.
const DEFECT_SAFETY: f64 = 1e4;

/// Eigen-decomposition of a single block.
#[derive(Debug, Clone)]
pub struct BlockEig {
    pub values: Vec<Complex64>,
    pub right: CMatrix,
    pub left: CMatrix,
}

impl BlockEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Q^dagger` as a matrix; its rows are the dual vectors.
    pub fn left_adjoint(&self) -> CMatrix {
        self.left.adjoint()
    }
}

/// Degeneracy threshold `tol * max(1, max|K_ij|)` used for a block.
pub fn degeneracy_threshold(block: &CMatrix, tol: Option<f64>) -> f64 {
    tol.unwrap_or(DEFAULT_DEGENERACY_TOL) * max_abs(block).max(1.0)
}

/// Diagonalizes a square complex block.
///
/// Eigenvalues are sorted by ascending real part, then ascending imaginary part.
/// `tol` overrides the relative degeneracy tolerance.
pub fn diagonalize_block(block: &CMatrix, label: &str, tol: Option<f64>) -> Result<BlockEig> {
    let d = block.nrows();
    if d == 0 || block.ncols() != d {
        return Err(Error::Shape(format!("block {label} is {:?}, not square", block.shape())));
    }
    if block.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical(format!("block {label} has non-finite entries")));
    }
    if d == 1 {
        return Ok(BlockEig {
            values: vec![block[(0, 0)]],
            right: identity(1),
            left: identity(1),
        });
    }

    let evd = to_faer(block)
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigendecomposition of {label} failed: {e:?}")))?;
    let raw_values: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
    let raw_vectors = from_faer(evd.U());

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (raw_values[a], raw_values[b]);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    let values: Vec<Complex64> = order.iter().map(|&i| raw_values[i]).collect();
    let mut right = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        let col = raw_vectors.column(src);
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numerical(format!("block {label}: zero eigenvector")));
        }
        right.set_column(dst, &col.map(|z| z / norm));
    }

    let threshold = degeneracy_threshold(block, tol);
    let degenerate = |a: usize, b: usize| Error::DegenerateBlock {
        block: label.to_string(),
        first: values[a],
        second: values[b],
    };
    for a in 0..d {
        for b in a + 1..d {
            if (values[a] - values[b]).norm() <= threshold {
                return Err(degenerate(a, b));
            }
        }
    }

    let inv = to_faer(&right).partial_piv_lu().inverse();
    let left_adj = from_faer(inv.as_ref());
    if left_adj.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(degenerate(0, 1));
    }
    let left = left_adj.adjoint();

    // eigenvalue condition numbers ||q_j|| ||r_j|| with ||r_j|| = 1
    let cond: Vec<f64> = (0..d).map(|j| left.column(j).norm()).collect();
    let scale = frobenius(block);
    for a in 0..d {
        for b in a + 1..d {
            let uncertainty = 0.5 * (cond[a] + cond[b]) * DEFECT_SAFETY * f64::EPSILON * scale;
            if (values[a] - values[b]).norm() <= uncertainty {
                return Err(degenerate(a, b));
            }
        }
    }

    Ok(BlockEig {
        values,
        right,
        left,
    })
}

/// Closed-form Jaynes-Cummings block `K^{(n)}`, `n >= 1`: eigenvalues in the
/// `(-1)^j` labelling (`j = 1, 2`) and the complex rotation `R(theta_n)`.
///
/// Since `K^{(n)}` is complex symmetric, `Q^dagger = R^T`, i.e. `Q = R^*`.
pub fn jc_analytic_block(
    n: usize,
    g: f64,
    delta: f64,
    kappa: f64,
    gamma: f64,
) -> Result<BlockEig> {
    if n == 0 {
        return Err(Error::Index("analytic Jaynes-Cummings block needs n >= 1".into()));
    }
    let nf = n as f64;
    let base = c(2.0 * delta, -(2.0 * nf - 1.0) * kappa - gamma) / 4.0;
    let shift = c(2.0 * delta, kappa - gamma);
    let root = (c(g * g * nf, 0.0) + shift * shift / 16.0).sqrt();
    let eps1 = base - root;
    let eps2 = base + root;

    let scale = [g.abs() * nf.sqrt(), delta.abs(), 0.5 * nf * kappa + 0.5 * gamma]
        .into_iter()
        .fold(1.0, f64::max);
    if (eps1 - eps2).norm() <= DEFAULT_DEGENERACY_TOL * scale {
        return Err(Error::DegenerateBlock {
            block: format!("K^({n})"),
            first: eps1,
            second: eps2,
        });
    }
    if g == 0.0 {
        return Err(Error::Config("analytic rotation is undefined for g = 0".into()));
    }

    let theta = ((2.0 * eps1 + I * (nf * kappa)) / (2.0 * g * nf.sqrt())).atan();
    let (cos, sin) = (theta.cos(), theta.sin());
    let right = CMatrix::from_row_slice(2, 2, &[cos, -sin, sin, cos]);
    let left = right.map(|z| z.conj());
    Ok(BlockEig {
        values: vec![eps1, eps2],
        right,
        left,
    })
}

/// `K^{(n)} = H^{(n)} - (i/2) sum_s gamma_s (A_s^dagger A_s)^{(n)}` for every block.
pub fn build_effective_k(model: &BlockModel) -> Result<BlockOperator> {
    let basis = &model.basis;
    let blocks = (0..=basis.max_excitation())
        .map(|n| {
            let mut k = model.hamiltonian.block(n).expect("conserving block").clone();
            for ch in &model.loss_channels {
                let gram = ch.operator.gram_block(basis, n);
                k -= gram.map(|z| z * I * (0.5 * ch.rate));
            }
            k
        })
        .collect();
    BlockOperator::new(OperatorKind::Conserving, basis, blocks)
}

/// Per-excitation eigensystems of the effective Hamiltonian.
#[derive(Debug, Clone)]
pub struct BlockEigensystem {
    pub blocks: Vec<BlockEig>,
}

impl BlockEigensystem {
    pub fn of_operator(k: &BlockOperator, n_blocks: usize, tol: Option<f64>) -> Result<Self> {
        let blocks = (0..n_blocks)
            .map(|n| {
                let block = k.block(n).ok_or_else(|| Error::Shape(format!("missing K^({n})")))?;
                diagonalize_block(block, &format!("K^({n})"), tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks })
    }

    pub fn of_model(model: &BlockModel, tol: Option<f64>) -> Result<Self> {
        let k = build_effective_k(model)?;
        Self::of_operator(&k, model.basis.max_excitation() + 1, tol)
    }

    pub fn block(&self, n: usize) -> &BlockEig {
        &self.blocks[n]
    }
}

/// Largest deviation among the block invariants `Q^dagger R = 1`, `K R = R diag(eps)`
/// and `K^dagger Q = Q diag(eps^*)`, with residuals relative to `1 + max|K|`.
pub fn block_residual(block: &CMatrix, eig: &BlockEig) -> f64 {
    let d = eig.dim();
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&eig.values));
    let scale = 1.0 + max_abs(block);
    let bi = max_abs(&(eig.left_adjoint() * &eig.right - identity(d)));
    let right = max_abs(&(block * &eig.right - &eig.right * &diag)) / scale;
    let left =
        max_abs(&(block.adjoint() * &eig.left - &eig.left * diag.map(|z| z.conj()))) / scale;
    bi.max(right).max(left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, ONE, ZERO};
    use crate::model::{build_jc, build_tc2};

    fn jc_block(n: usize, g: f64, delta: f64, kappa: f64, gamma: f64) -> CMatrix {
        let nf = n as f64;
        let s = c(g * nf.sqrt(), 0.0);
        CMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0, -nf * kappa / 2.0),
                s,
                s,
                c(delta, -((nf - 1.0) * kappa + gamma) / 2.0),
            ],
        )
    }

    #[test]
    fn trivial_block() {
        let e = diagonalize_block(&CMatrix::zeros(1, 1), "K^(0)", None).unwrap();
        assert_eq!(e.values, vec![ZERO]);
        assert_eq!(e.right, identity(1));
        assert_eq!(e.left, identity(1));
    }

    #[test]
    fn hermitian_jc_block() {
        let e = diagonalize_block(&jc_block(1, 1.0, 0.0, 0.0, 0.0), "K^(1)", None).unwrap();
        assert!((e.values[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((e.values[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn damped_jc_block_hand_oracle() {
        // [[-i, 1], [1, -i]]: (eps + i)^2 = 1
        let k = jc_block(1, 1.0, 0.0, 2.0, 2.0);
        assert!(max_abs_diff(
            &k,
            &CMatrix::from_row_slice(2, 2, &[c(0.0, -1.0), ONE, ONE, c(0.0, -1.0)])
        ) < 1e-15);
        let e = diagonalize_block(&k, "K^(1)", None).unwrap();
        assert!((e.values[0] - c(-1.0, -1.0)).norm() < 1e-12);
        assert!((e.values[1] - c(1.0, -1.0)).norm() < 1e-12);
        assert!(block_residual(&k, &e) < 1e-10);
    }

    #[test]
    fn defective_block_is_rejected() {
        // delta = 0, 16 g^2 = (kappa - gamma)^2 at n = 1
        let k = jc_block(1, 1.0, 0.0, 5.0, 1.0);
        assert!(matches!(
            diagonalize_block(&k, "K^(1)", None),
            Err(Error::DegenerateBlock { .. })
        ));
        assert!(matches!(
            jc_analytic_block(1, 1.0, 0.0, 5.0, 1.0),
            Err(Error::DegenerateBlock { .. })
        ));
    }

    #[test]
    fn exactly_repeated_eigenvalue_is_rejected() {
        let k = identity(3).map(|z| z * c(0.5, -0.2));
        assert!(matches!(
            diagonalize_block(&k, "K", None),
            Err(Error::DegenerateBlock { .. })
        ));
    }

    #[test]
    fn close_but_separable_pair_is_accepted() {
        // gap 1e-4 between distinct, well-conditioned eigenvalues
        let mut k = CMatrix::zeros(2, 2);
        k[(0, 0)] = c(0.0, -1.0);
        k[(1, 1)] = c(1e-4, -1.0);
        k[(0, 1)] = c(1e-6, 0.0);
        let e = diagonalize_block(&k, "K", None).unwrap();
        assert!(block_residual(&k, &e) < 1e-10);
    }

    #[test]
    fn analytic_examples() {
        let e = jc_analytic_block(1, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!((e.values[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((e.values[1] - c(1.0, 0.0)).norm() < 1e-14);
        // (2 delta + i kappa - i gamma)^2 = 0, so the root is sqrt(g^2 n)
        let e = jc_analytic_block(1, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((e.values[0] - c(-1.0, -0.5)).norm() < 1e-14);
        assert!((e.values[1] - c(1.0, -0.5)).norm() < 1e-14);
        assert!(jc_analytic_block(0, 1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn analytic_rotation_diagonalizes() {
        for n in 1..=5 {
            let (g, delta, kappa, gamma) = (0.9, 0.4, 0.3, 0.7);
            let k = jc_block(n, g, delta, kappa, gamma);
            let e = jc_analytic_block(n, g, delta, kappa, gamma).unwrap();
            assert!(block_residual(&k, &e) < 1e-10, "n={n}");
            // R^T R = 1 for the complex rotation
            assert!(max_abs_diff(&(e.right.transpose() * &e.right), &identity(2)) < 1e-12);
        }
    }

    #[test]
    fn effective_k_matches_jc_formula() {
        let (g, delta, kappa, gamma) = (0.8, 0.3, 0.5, 0.2);
        let model = build_jc(g, delta, kappa, gamma, 4).unwrap();
        let k = build_effective_k(&model).unwrap();
        assert_eq!(k.block(0).unwrap()[(0, 0)], ZERO);
        for n in 1..=4 {
            assert!(max_abs_diff(k.block(n).unwrap(), &jc_block(n, g, delta, kappa, gamma)) < 1e-14);
        }
        let k_example = build_effective_k(&build_jc(1.0, 0.0, 2.0, 2.0, 2).unwrap()).unwrap();
        assert!(max_abs_diff(
            k_example.block(1).unwrap(),
            &CMatrix::from_row_slice(2, 2, &[c(0.0, -1.0), ONE, ONE, c(0.0, -1.0)])
        ) < 1e-15);
    }

    #[test]
    fn effective_k_matches_tc_k1() {
        let (g1, g2, d1, d2, ga1, ga2, ka) = (1.0, 0.7, 0.3, -0.2, 0.2, 0.35, 0.5);
        let model = build_tc2(g1, g2, d1, d2, ga1, ga2, ka, 3).unwrap();
        let k = build_effective_k(&model).unwrap();
        let expected = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.0, -ka / 2.0),
                c(g2, 0.0),
                c(g1, 0.0),
                c(g2, 0.0),
                c(d2, -ga2 / 2.0),
                ZERO,
                c(g1, 0.0),
                ZERO,
                c(d1, -ga1 / 2.0),
            ],
        );
        assert!(max_abs_diff(k.block(1).unwrap(), &expected) < 1e-15);
        // printed K^{(n>1)} at n = 3
        let n = 3.0f64;
        let (s, t) = (n.sqrt(), (n - 1.0).sqrt());
        let shift = c(0.0, -0.5 * (n * ka - ka + ga1 + ga2));
        #[rustfmt::skip]
        let printed = [
            c(0.0, (ga1 + ga2 - ka) / 2.0), c(g2 * s, 0.0), c(g1 * s, 0.0), ZERO,
            c(g2 * s, 0.0), c(d2, ga1 / 2.0), ZERO, c(g1 * t, 0.0),
            c(g1 * s, 0.0), ZERO, c(d1, ga2 / 2.0), c(g2 * t, 0.0),
            ZERO, c(g1 * t, 0.0), c(g2 * t, 0.0), c(d1 + d2, ka / 2.0),
        ];
        let expected = CMatrix::from_row_slice(4, 4, &printed) + identity(4).map(|z| z * shift);
        assert!(max_abs_diff(k.block(3).unwrap(), &expected) < 1e-14);
    }

    #[test]
    fn zero_rates_give_hamiltonian() {
        let model = build_jc(0.8, 0.3, 0.0, 0.0, 3).unwrap();
        let k = build_effective_k(&model).unwrap();
        for n in 0..=3 {
            assert_eq!(k.block(n), model.hamiltonian.block(n));
        }
    }

    #[test]
    fn block_invariants_on_tc() {
        let model = build_tc2(1.0, 0.7, 0.3, -0.2, 0.2, 0.35, 0.5, 4).unwrap();
        let k = build_effective_k(&model).unwrap();
        let sys = BlockEigensystem::of_model(&model, None).unwrap();
        for n in 0..=4 {
            let block = k.block(n).unwrap();
            let eig = sys.block(n);
            assert!(block_residual(block, eig) < 1e-10, "n={n}");
            // completeness sum_j |r_j><q_j| = 1
            assert!(max_abs_diff(&(&eig.right * eig.left_adjoint()), &identity(eig.dim())) < 1e-10);
        }
    }
}
