//! Eigenvalues and biorthonormal eigenvectors of the full Liouvillian, assembled
//! sector by sector from the excitation-conserving blocks and the jump ladder.

use num_complex::Complex64;

use crate::eigensolver::{build_effective_k, BlockEigensystem};
use crate::error::{Error, Result};
use crate::graded_space::{unflatten_pair, GradedBasis};
use crate::linalg::{unvec_row_major, CMatrix, CVector, ONE, ZERO};
use crate::model::BlockModel;
use crate::superop::{
    assemble_m_superblock, jump_superblock_eigenbasis, jump_superblock_original,
    jump_superblock_transformed, sector_from_dense, sector_from_tensor, SectorEig,
};

pub const DEFAULT_RESONANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Relative eigenvalue gap below which a block is rejected as degenerate.
    pub degeneracy_tol: Option<f64>,
    /// Relative distance `|lambda_mu - lambda_nu| / (1 + |lambda_mu|)` treated as a resonance.
    pub resonance_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            degeneracy_tol: None,
            resonance_tol: DEFAULT_RESONANCE_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// Everything needed to run the recursions inside one diagonal `l`.
#[derive(Debug, Clone)]
pub struct SectorLadder {
    pub l: usize,
    /// Sector eigensystems for `n = 0..=N-l`.
    pub sectors: Vec<SectorEig>,
    /// Eigenbasis jump blocks; entry `n - 1` maps sector `n` to `n - 1`.
    pub jumps: Vec<CMatrix>,
}

impl SectorLadder {
    pub fn top(&self) -> usize {
        self.sectors.len() - 1
    }

    fn jump(&self, n: usize) -> &CMatrix {
        &self.jumps[n - 1]
    }
}

/// Builds the sector ladders of every diagonal `l = 0..=N`.
///
/// Without dephasing the sector transforms are tensor products of the `K` block
/// eigenvectors. With dephasing each conserving sector block is diagonalized on its own.
pub fn build_ladders(model: &BlockModel, opts: &SolverOptions) -> Result<Vec<SectorLadder>> {
    model.validate()?;
    let big_n = model.top_block();
    let k = build_effective_k(model)?;
    let dephasing = model.has_dephasing();
    let block_eig = if dephasing {
        None
    } else {
        Some(BlockEigensystem::of_operator(&k, big_n + 1, opts.degeneracy_tol)?)
    };

    let mut ladders = Vec::with_capacity(big_n + 1);
    for l in 0..=big_n {
        let mut sectors = Vec::with_capacity(big_n - l + 1);
        for n in 0..=big_n - l {
            let sector = match &block_eig {
                Some(eig) => sector_from_tensor(eig, l, n),
                None => sector_from_dense(&assemble_m_superblock(model, &k, l, n)?, opts.degeneracy_tol)?,
            };
            sectors.push(sector);
        }
        let mut jumps = Vec::with_capacity(big_n - l);
        for n in 1..=big_n - l {
            let block = match &block_eig {
                Some(eig) => jump_superblock_eigenbasis(&model.loss_channels, eig, &model.basis, l, n)?,
                None => {
                    let original = jump_superblock_original(&model.loss_channels, &model.basis, l, n)?;
                    jump_superblock_transformed(&original, &sectors[n - 1], &sectors[n])?
                }
            };
            jumps.push(block.matrix);
        }
        ladders.push(SectorLadder { l, sectors, jumps });
    }
    Ok(ladders)
}

/// One sector eigenvalue `lambda_mu^{(l,m)}` with 1-based `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorEigenvalue {
    pub l: usize,
    pub m: usize,
    pub mu: usize,
    pub lambda: Complex64,
}

/// Every `lambda_mu^{(l,m)}`. The full spectrum also contains the conjugates for `l > 0`.
pub fn liouville_eigenvalues(model: &BlockModel, opts: &SolverOptions) -> Result<Vec<SectorEigenvalue>> {
    let ladders = build_ladders(model, opts)?;
    Ok(ladders
        .iter()
        .flat_map(|ladder| {
            ladder.sectors.iter().flat_map(move |s| {
                s.values.iter().enumerate().map(move |(i, &lambda)| SectorEigenvalue {
                    l: ladder.l,
                    m: s.n,
                    mu: i + 1,
                    lambda,
                })
            })
        })
        .collect())
}

fn resolvent(
    ladder: &SectorLadder,
    m: usize,
    mu: usize,
    n: usize,
    target: Complex64,
    tol: f64,
) -> Result<Vec<Complex64>> {
    ladder.sectors[n]
        .values
        .iter()
        .enumerate()
        .map(|(nu, &other)| {
            let gap = target - other;
            if gap.norm() < tol * (1.0 + target.norm()) {
                Err(Error::Resonance {
                    l: ladder.l,
                    m,
                    mu,
                    n,
                    nu: nu + 1,
                    target,
                    other,
                })
            } else {
                Ok(ONE / gap)
            }
        })
        .collect()
}

fn unit(dim: usize, mu: usize) -> Result<CVector> {
    if mu == 0 || mu > dim {
        return Err(Error::Index(format!("mu={mu} outside 1..={dim}")));
    }
    let mut e = CVector::zeros(dim);
    e[mu - 1] = ONE;
    Ok(e)
}

/// Right coefficients `v~^{(n)}` for `n = 0..=m`, starting from `v~^{(m)} = e_mu`.
pub fn right_chain(ladder: &SectorLadder, m: usize, mu: usize, resonance_tol: f64) -> Result<Vec<CVector>> {
    if m > ladder.top() {
        return Err(Error::Index(format!("m={m} exceeds top sector {}", ladder.top())));
    }
    let mut top = unit(ladder.sectors[m].dim(), mu)?;
    let target = ladder.sectors[m].values[mu - 1];
    let mut chain = vec![CVector::zeros(0); m + 1];
    for n in (0..m).rev() {
        let t = resolvent(ladder, m, mu, n, target, resonance_tol)?;
        let mut next = ladder.jump(n + 1) * &top;
        for (x, d) in next.iter_mut().zip(&t) {
            *x *= d;
        }
        chain[n + 1] = top;
        top = next;
    }
    chain[0] = top;
    Ok(chain)
}

/// Left coefficients `u~^{(n)}` for `n = m..=N-l`, starting from `u~^{(m)} = e_mu`.
/// Entry `i` of the result belongs to `n = m + i`.
pub fn left_chain(ladder: &SectorLadder, m: usize, mu: usize, resonance_tol: f64) -> Result<Vec<CVector>> {
    if m > ladder.top() {
        return Err(Error::Index(format!("m={m} exceeds top sector {}", ladder.top())));
    }
    let mut current = unit(ladder.sectors[m].dim(), mu)?;
    let target = ladder.sectors[m].values[mu - 1];
    let mut chain = Vec::with_capacity(ladder.top() - m + 1);
    for n in m + 1..=ladder.top() {
        let t = resolvent(ladder, m, mu, n, target, resonance_tol)?;
        let mut next = ladder.jump(n).adjoint() * &current;
        for (x, d) in next.iter_mut().zip(&t) {
            *x *= d.conj();
        }
        chain.push(current);
        current = next;
    }
    chain.push(current);
    Ok(chain)
}

/// Operator supported on the `l`-th block diagonal: block `i` sits at rows of
/// excitation `start_n + i + l` and columns of excitation `start_n + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMatrix {
    pub l: usize,
    pub start_n: usize,
    pub blocks: Vec<CMatrix>,
}

impl SectorMatrix {
    /// Dense `N x N` form; `adjoint` returns the Hermitian adjoint instead.
    pub fn embed(&self, basis: &GradedBasis, adjoint: bool) -> CMatrix {
        let total = basis.total_dimension();
        let mut out = CMatrix::zeros(total, total);
        self.add_scaled_to(basis, adjoint, ONE, &mut out);
        out
    }

    /// `out += coeff * X` where `X` is the (possibly adjoint) operator.
    pub fn add_scaled_to(&self, basis: &GradedBasis, adjoint: bool, coeff: Complex64, out: &mut CMatrix) {
        for (i, b) in self.blocks.iter().enumerate() {
            let n = self.start_n + i;
            let (ro, co) = (basis.offset(n + self.l), basis.offset(n));
            for a in 0..b.nrows() {
                for k in 0..b.ncols() {
                    if adjoint {
                        out[(co + k, ro + a)] += coeff * b[(a, k)].conj();
                    } else {
                        out[(ro + a, co + k)] += coeff * b[(a, k)];
                    }
                }
            }
        }
    }

    /// `Tr[X^dagger y]` against a dense operator `y`.
    pub fn overlap(&self, basis: &GradedBasis, adjoint: bool, y: &CMatrix) -> Complex64 {
        let mut acc = ZERO;
        for (i, b) in self.blocks.iter().enumerate() {
            let n = self.start_n + i;
            let (ro, co) = (basis.offset(n + self.l), basis.offset(n));
            for a in 0..b.nrows() {
                for k in 0..b.ncols() {
                    acc += if adjoint {
                        b[(a, k)] * y[(co + k, ro + a)]
                    } else {
                        b[(a, k)].conj() * y[(ro + a, co + k)]
                    };
                }
            }
        }
        acc
    }

    pub fn trace(&self, adjoint: bool) -> Complex64 {
        if self.l != 0 {
            return ZERO;
        }
        let t: Complex64 = self.blocks.iter().map(|b| b.trace()).sum();
        if adjoint {
            t.conj()
        } else {
            t
        }
    }

    fn block_at(&self, n: usize) -> Option<&CMatrix> {
        n.checked_sub(self.start_n).and_then(|i| self.blocks.get(i))
    }
}

/// `Tr[X^dagger Y]` for two block-diagonal operators, each optionally adjointed.
pub fn pair_overlap(x: &SectorMatrix, x_adj: bool, y: &SectorMatrix, y_adj: bool) -> Complex64 {
    if x.l != y.l || (x.l > 0 && x_adj != y_adj) {
        return ZERO;
    }
    let first = x.start_n.max(y.start_n);
    let last = (x.start_n + x.blocks.len()).min(y.start_n + y.blocks.len());
    let mut acc = ZERO;
    for n in first..last {
        let (a, b) = (x.block_at(n).expect("in range"), y.block_at(n).expect("in range"));
        acc += a.iter().zip(b.iter()).map(|(p, q)| p.conj() * q).sum::<Complex64>();
    }
    // Tr[(A^dagger)^dagger B^dagger] = conj(Tr[A^dagger B])
    if x_adj && x.l > 0 {
        acc.conj()
    } else {
        acc
    }
}

/// Back-transforms a coefficient chain into the original basis: `R c` on the right
/// side and `Q c` on the left side, reshaped to `d_{n+l} x d_n` blocks.
pub fn assemble_original_basis(
    ladder: &SectorLadder,
    chain: &[CVector],
    start_n: usize,
    side: Side,
    basis: &GradedBasis,
) -> SectorMatrix {
    let l = ladder.l;
    let blocks = chain
        .iter()
        .enumerate()
        .map(|(i, coeffs)| {
            let n = start_n + i;
            let sector = &ladder.sectors[n];
            let transform = match side {
                Side::Right => &sector.right,
                Side::Left => &sector.left,
            };
            unvec_row_major(&(transform * coeffs), basis.dim(n + l), basis.dim(n))
        })
        .collect();
    SectorMatrix { l, start_n, blocks }
}

/// Right and left eigenvector of `lambda_mu^{(l,m)}`.
#[derive(Debug, Clone)]
pub struct LiouvilleEigenpair {
    pub l: usize,
    pub m: usize,
    pub mu: usize,
    pub lambda: Complex64,
    /// `v~^{(n)}` for `n = 0..=m`.
    pub right_chain: Vec<CVector>,
    /// `u~^{(n)}` for `n = m..=N-l`.
    pub left_chain: Vec<CVector>,
    pub right: SectorMatrix,
    pub left: SectorMatrix,
}

impl LiouvilleEigenpair {
    /// `(j, k)` such that `mu` flattens the pair `|m+l, j><m, k|`.
    pub fn pair_labels(&self, basis: &GradedBasis) -> (usize, usize) {
        unflatten_pair(self.mu, basis.dim(self.m)).expect("mu is 1-based and in range")
    }
}

/// A pair or its Hermitian-adjoint partner (eigenvalue `lambda^*`).
#[derive(Debug, Clone, Copy)]
pub struct Mode<'a> {
    pub pair: &'a LiouvilleEigenpair,
    pub adjoint: bool,
}

impl Mode<'_> {
    pub fn lambda(&self) -> Complex64 {
        if self.adjoint {
            self.pair.lambda.conj()
        } else {
            self.pair.lambda
        }
    }

    pub fn right_dense(&self, basis: &GradedBasis) -> CMatrix {
        self.pair.right.embed(basis, self.adjoint)
    }

    pub fn left_dense(&self, basis: &GradedBasis) -> CMatrix {
        self.pair.left.embed(basis, self.adjoint)
    }

    /// `Tr[rho_check^dagger y]`.
    pub fn left_overlap(&self, basis: &GradedBasis, y: &CMatrix) -> Complex64 {
        self.pair.left.overlap(basis, self.adjoint, y)
    }

    /// `Tr[x^dagger rho_hat]`, i.e. the conjugate of `right.overlap(x)`.
    pub fn right_against(&self, basis: &GradedBasis, x: &CMatrix) -> Complex64 {
        self.pair.right.overlap(basis, self.adjoint, x).conj()
    }

    pub fn right_trace(&self) -> Complex64 {
        self.pair.right.trace(self.adjoint)
    }

    pub fn add_right_scaled(&self, basis: &GradedBasis, coeff: Complex64, out: &mut CMatrix) {
        self.pair.right.add_scaled_to(basis, self.adjoint, coeff, out);
    }
}

/// Complete eigensystem of the Liouvillian.
#[derive(Debug, Clone)]
pub struct LiouvilleEigensystem {
    pub basis: GradedBasis,
    /// Sorted by `(l, m, mu)`.
    pub pairs: Vec<LiouvilleEigenpair>,
}

impl LiouvilleEigensystem {
    /// All modes: each pair followed by its adjoint partner when `l > 0`.
    pub fn modes(&self) -> Vec<Mode<'_>> {
        let mut out = Vec::with_capacity(self.len());
        for p in &self.pairs {
            out.push(Mode { pair: p, adjoint: false });
            if p.l > 0 {
                out.push(Mode { pair: p, adjoint: true });
            }
        }
        out
    }

    /// Number of modes, `N_total^2` for a complete system.
    pub fn len(&self) -> usize {
        self.pairs.iter().map(|p| if p.l > 0 { 2 } else { 1 }).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.modes().iter().map(Mode::lambda).collect()
    }

    /// Index into [`Self::modes`] of the eigenvalue closest to zero.
    pub fn stationary_mode(&self) -> usize {
        self.modes()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.lambda().norm().total_cmp(&b.1.lambda().norm()))
            .map(|(i, _)| i)
            .expect("non-empty eigensystem")
    }

    /// Trace-normalized right eigenvector of the eigenvalue closest to zero.
    pub fn steady_state(&self) -> Result<CMatrix> {
        let modes = self.modes();
        let mode = modes[self.stationary_mode()];
        let tr = mode.right_trace();
        if tr.norm() < 1e-12 {
            return Err(Error::Numerical("stationary eigenvector has zero trace".into()));
        }
        Ok(mode.right_dense(&self.basis).map(|z| z / tr))
    }
}

/// Builds every eigenpair. Within each diagonal `l` sectors are processed by descending `m`.
pub fn full_eigensystem(model: &BlockModel, opts: &SolverOptions) -> Result<LiouvilleEigensystem> {
    let ladders = build_ladders(model, opts)?;
    let mut pairs = Vec::new();
    for ladder in &ladders {
        let mut per_l = Vec::new();
        for m in (0..=ladder.top()).rev() {
            for mu in 1..=ladder.sectors[m].dim() {
                let rc = right_chain(ladder, m, mu, opts.resonance_tol)?;
                let lc = left_chain(ladder, m, mu, opts.resonance_tol)?;
                let right = assemble_original_basis(ladder, &rc, 0, Side::Right, &model.basis);
                let left = assemble_original_basis(ladder, &lc, m, Side::Left, &model.basis);
                per_l.push(LiouvilleEigenpair {
                    l: ladder.l,
                    m,
                    mu,
                    lambda: ladder.sectors[m].values[mu - 1],
                    right_chain: rc,
                    left_chain: lc,
                    right,
                    left,
                });
            }
        }
        per_l.reverse();
        per_l.sort_by_key(|p| (p.m, p.mu));
        pairs.extend(per_l);
    }
    Ok(LiouvilleEigensystem {
        basis: model.basis.clone(),
        pairs,
    })
}
