//! Flattened superoperator blocks on the `(n + l, n)` sectors of operator space.
//!
//! A `d_{n+l} x d_n` matrix `X` is flattened row by row, so with this convention
//! `A X B` corresponds to `(A (x) B^T) vec(X)`. Every Kronecker factor below is
//! written against that rule.

use num_complex::Complex64;

use crate::eigensolver::{diagonalize_block, BlockEigensystem};
use crate::error::{Error, Result};
use crate::graded_space::GradedBasis;
use crate::linalg::{conj, identity, CMatrix, I};
use crate::model::{BlockModel, BlockOperator, Channel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    /// Vectorized outer products `|n+l, j><n, k|`.
    Original,
    /// Coordinates in the eigenbasis of the excitation-conserving part.
    Eigen,
}

/// Matrix acting on the flattened `(l, n)` sector.
///
/// Conserving blocks are `D_{l,n} x D_{l,n}`; jump blocks map sector `(l, n)` to
/// `(l, n - 1)` and are `D_{l,n-1} x D_{l,n}`.
#[derive(Debug, Clone)]
pub struct SuperBlock {
    pub l: usize,
    pub n: usize,
    pub matrix: CMatrix,
    pub basis_tag: BasisTag,
}

fn sector_check(basis: &GradedBasis, l: usize, n: usize) -> Result<()> {
    if n + l > basis.max_excitation() {
        return Err(Error::Shape(format!(
            "sector (l={l}, n={n}) exceeds N={}",
            basis.max_excitation()
        )));
    }
    Ok(())
}

fn conserving_block(op: &BlockOperator, n: usize) -> Result<&CMatrix> {
    op.block(n)
        .ok_or_else(|| Error::Shape(format!("missing block n={n}")))
}

/// `-i [K^{(n+l)} (x) 1 - 1 (x) K^{*(n)}]`.
pub fn assemble_k_superblock(
    k: &BlockOperator,
    basis: &GradedBasis,
    l: usize,
    n: usize,
) -> Result<SuperBlock> {
    sector_check(basis, l, n)?;
    let upper = conserving_block(k, n + l)?;
    let lower = conserving_block(k, n)?;
    let m = upper.kronecker(&identity(lower.nrows())) - identity(upper.nrows()).kronecker(&conj(lower));
    Ok(SuperBlock {
        l,
        n,
        matrix: m.map(|z| -I * z),
        basis_tag: BasisTag::Original,
    })
}

/// `sum_s (kappa_s / 2) [2 C^{(n+l)} (x) C^{*(n)} - (C^dagger C)^{(n+l)} (x) 1 - 1 (x) (C^dagger C)^{T(n)}]`.
pub fn assemble_c_superblock(
    channels: &[Channel],
    basis: &GradedBasis,
    l: usize,
    n: usize,
) -> Result<SuperBlock> {
    sector_check(basis, l, n)?;
    let (du, dl) = (basis.dim(n + l), basis.dim(n));
    let mut m = CMatrix::zeros(du * dl, du * dl);
    for ch in channels {
        let cu = conserving_block(&ch.operator, n + l)?;
        let cl = conserving_block(&ch.operator, n)?;
        let gu = cu.adjoint() * cu;
        let gl = cl.adjoint() * cl;
        let term = cu.kronecker(&conj(cl)).map(|z| z * 2.0)
            - gu.kronecker(&identity(dl))
            - identity(du).kronecker(&gl.transpose());
        m += term.map(|z| z * (0.5 * ch.rate));
    }
    Ok(SuperBlock {
        l,
        n,
        matrix: m,
        basis_tag: BasisTag::Original,
    })
}

/// Excitation-conserving part of the Liouvillian on sector `(l, n)`.
pub fn assemble_m_superblock(
    model: &BlockModel,
    k: &BlockOperator,
    l: usize,
    n: usize,
) -> Result<SuperBlock> {
    let mut sb = assemble_k_superblock(k, &model.basis, l, n)?;
    if model.has_dephasing() {
        sb.matrix += assemble_c_superblock(&model.dephasing_channels, &model.basis, l, n)?.matrix;
    }
    Ok(sb)
}

/// `sum_s gamma_s A_s^{(n+l)} (x) A_s^{*(n)}` in the original basis.
pub fn jump_superblock_original(
    channels: &[Channel],
    basis: &GradedBasis,
    l: usize,
    n: usize,
) -> Result<SuperBlock> {
    sector_check(basis, l, n)?;
    if n == 0 {
        return Err(Error::Shape("no jump block leaves sector n = 0".into()));
    }
    let rows = basis.dim(n + l - 1) * basis.dim(n - 1);
    let cols = basis.dim(n + l) * basis.dim(n);
    let mut m = CMatrix::zeros(rows, cols);
    for ch in channels {
        let au = ch.operator.block(n + l).expect("lowering block n >= 1");
        let al = ch.operator.block(n).expect("lowering block n >= 1");
        m += au.kronecker(&conj(al)).map(|z| z * ch.rate);
    }
    Ok(SuperBlock {
        l,
        n,
        matrix: m,
        basis_tag: BasisTag::Original,
    })
}

/// Jump block in the eigenbasis of `K`, built from `A~_s^{(n)} = Q^{dagger(n-1)} A_s^{(n)} R^{(n)}`.
pub fn jump_superblock_eigenbasis(
    channels: &[Channel],
    eig: &BlockEigensystem,
    basis: &GradedBasis,
    l: usize,
    n: usize,
) -> Result<SuperBlock> {
    sector_check(basis, l, n)?;
    if n == 0 {
        return Err(Error::Shape("no jump block leaves sector n = 0".into()));
    }
    let transformed = |a: &BlockOperator, level: usize| -> CMatrix {
        let block = a.block(level).expect("lowering block n >= 1");
        eig.block(level - 1).left_adjoint() * block * &eig.block(level).right
    };
    let rows = basis.dim(n + l - 1) * basis.dim(n - 1);
    let cols = basis.dim(n + l) * basis.dim(n);
    let mut m = CMatrix::zeros(rows, cols);
    for ch in channels {
        let au = transformed(&ch.operator, n + l);
        let al = transformed(&ch.operator, n);
        m += au.kronecker(&conj(&al)).map(|z| z * ch.rate);
    }
    Ok(SuperBlock {
        l,
        n,
        matrix: m,
        basis_tag: BasisTag::Eigen,
    })
}

/// Moves an original-basis jump block into sector eigenbases: `Q^dagger(l,n-1) A(l,n) R(l,n)`.
pub fn jump_superblock_transformed(
    original: &SuperBlock,
    lower: &SectorEig,
    upper: &SectorEig,
) -> Result<SuperBlock> {
    if original.basis_tag != BasisTag::Original {
        return Err(Error::Shape("jump block is already in the eigenbasis".into()));
    }
    if lower.n + 1 != upper.n || lower.l != upper.l || upper.n != original.n {
        return Err(Error::Shape("sector transforms do not match the jump block".into()));
    }
    Ok(SuperBlock {
        l: original.l,
        n: original.n,
        matrix: lower.left.adjoint() * &original.matrix * &upper.right,
        basis_tag: BasisTag::Eigen,
    })
}

/// Eigen-decomposition of the conserving part on one sector.
#[derive(Debug, Clone)]
pub struct SectorEig {
    pub l: usize,
    pub n: usize,
    /// `lambda_nu^{(l,n)}`
    pub values: Vec<Complex64>,
    /// Columns are the flattened right eigenvectors.
    pub right: CMatrix,
    /// Columns are the flattened left eigenvectors, `left^dagger right = 1`.
    pub left: CMatrix,
}

impl SectorEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Sector eigensystem from the block eigensystem of `K`:
/// `lambda_{j,k} = -i (eps_j^{(n+l)} - eps_k^{*(n)})`, `R = R^{(n+l)} (x) R^{*(n)}`,
/// `Q = Q^{(n+l)} (x) Q^{*(n)}`.
pub fn sector_from_tensor(eig: &BlockEigensystem, l: usize, n: usize) -> SectorEig {
    let upper = eig.block(n + l);
    let lower = eig.block(n);
    let values = upper
        .values
        .iter()
        .flat_map(|eu| lower.values.iter().map(move |el| -I * (eu - el.conj())))
        .collect();
    SectorEig {
        l,
        n,
        values,
        right: upper.right.kronecker(&conj(&lower.right)),
        left: upper.left.kronecker(&conj(&lower.left)),
    }
}

/// Sector eigensystem by direct diagonalization of an `M^{(l,n)}` block.
pub fn sector_from_dense(block: &SuperBlock, tol: Option<f64>) -> Result<SectorEig> {
    let label = format!("M^({},{})", block.l, block.n);
    let e = diagonalize_block(&block.matrix, &label, tol)?;
    Ok(SectorEig {
        l: block.l,
        n: block.n,
        values: e.values,
        right: e.right,
        left: e.left,
    })
}
