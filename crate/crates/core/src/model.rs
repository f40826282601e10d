//! Block-matrix models: Hamiltonian, loss channels and dephasing channels expressed in
//! the excitation-graded basis.
//!
//! Units: hbar = 1, every energy is an angular frequency.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graded_space::GradedBasis;
use crate::linalg::{c, max_abs_diff, CMatrix, ONE, ZERO};

/// Largest number of spins accepted by the generic builders.
pub const MAX_SPINS: usize = 6;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// Commutes with the excitation number; blocks are `d_n x d_n`.
    Conserving,
    /// Lowers the excitation number by one; blocks are `d_{n-1} x d_n`, `n >= 1`.
    Lowering,
    /// A Lindblad operator that commutes with the excitation number.
    Dephasing,
}

/// An operator stored as its nonzero excitation blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    kind: OperatorKind,
    // conserving/dephasing: index n; lowering: index n - 1
    blocks: Vec<CMatrix>,
}

impl BlockOperator {
    /// `blocks[i]` is the block for `n = i` (conserving, dephasing) or `n = i + 1` (lowering).
    pub fn new(kind: OperatorKind, basis: &GradedBasis, blocks: Vec<CMatrix>) -> Result<Self> {
        let big_n = basis.max_excitation();
        let expected = match kind {
            OperatorKind::Lowering => big_n,
            _ => big_n + 1,
        };
        if blocks.len() != expected {
            return Err(Error::Shape(format!(
                "{kind:?} operator needs {expected} blocks, got {}",
                blocks.len()
            )));
        }
        for (i, b) in blocks.iter().enumerate() {
            let (n, rows) = match kind {
                OperatorKind::Lowering => (i + 1, basis.dim(i)),
                _ => (i, basis.dim(i)),
            };
            let cols = basis.dim(n);
            if b.shape() != (rows, cols) {
                return Err(Error::Shape(format!(
                    "{kind:?} block n={n} is {:?}, expected {:?}",
                    b.shape(),
                    (rows, cols)
                )));
            }
        }
        Ok(Self { kind, blocks })
    }

    /// Slices a full `N x N` operator into blocks, failing if it does not respect the grading.
    pub fn from_full(kind: OperatorKind, basis: &GradedBasis, full: &CMatrix) -> Result<Self> {
        let total = basis.total_dimension();
        if full.shape() != (total, total) {
            return Err(Error::Shape(format!(
                "full operator is {:?}, basis dimension is {total}",
                full.shape()
            )));
        }
        let grading = basis.grading();
        let shift = if kind == OperatorKind::Lowering { 1 } else { 0 };
        for r in 0..total {
            for col in 0..total {
                let allowed = grading[col] == grading[r] + shift;
                if !allowed && full[(r, col)] != ZERO {
                    return Err(Error::Validation(format!(
                        "{kind:?} operator couples excitation {} to {}",
                        grading[col], grading[r]
                    )));
                }
            }
        }
        let big_n = basis.max_excitation();
        let blocks = (shift..=big_n)
            .map(|n| {
                let m = n - shift;
                full.view((basis.offset(m), basis.offset(n)), (basis.dim(m), basis.dim(n)))
                    .into_owned()
            })
            .collect();
        Self::new(kind, basis, blocks)
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    /// Block acting on excitation `n`; `None` for a lowering operator at `n = 0`.
    pub fn block(&self, n: usize) -> Option<&CMatrix> {
        match self.kind {
            OperatorKind::Lowering => n.checked_sub(1).and_then(|i| self.blocks.get(i)),
            _ => self.blocks.get(n),
        }
    }

    /// `(A^dagger A)^{(n)}`, a `d_n x d_n` block (zero for a lowering operator at `n = 0`).
    pub fn gram_block(&self, basis: &GradedBasis, n: usize) -> CMatrix {
        match self.block(n) {
            Some(b) => b.adjoint() * b,
            None => CMatrix::zeros(basis.dim(n), basis.dim(n)),
        }
    }

    /// Expands the blocks into a dense operator on the whole space.
    pub fn to_full(&self, basis: &GradedBasis) -> CMatrix {
        let total = basis.total_dimension();
        let mut full = CMatrix::zeros(total, total);
        let shift = if self.kind == OperatorKind::Lowering { 1 } else { 0 };
        for n in shift..=basis.max_excitation() {
            let b = self.block(n).expect("block present by construction");
            full.view_mut((basis.offset(n - shift), basis.offset(n)), b.shape())
                .copy_from(b);
        }
        full
    }
}

/// A Lindblad channel `rate * D[operator]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub rate: f64,
    pub operator: BlockOperator,
}

/// A gain-free Lindblad model in block form.
#[derive(Debug, Clone)]
pub struct BlockModel {
    pub name: String,
    pub basis: GradedBasis,
    pub hamiltonian: BlockOperator,
    pub loss_channels: Vec<Channel>,
    pub dephasing_channels: Vec<Channel>,
    pub params: BTreeMap<String, f64>,
    /// Lowering operator of the emitter used as spectrum probe.
    pub emitter: BlockOperator,
    /// `(n, j)` of the state with only the first emitter excited.
    pub excited_atom: (usize, usize),
}

impl BlockModel {
    /// Checks rates, channel kinds and Hermiticity of the Hamiltonian.
    pub fn validate(&self) -> Result<()> {
        if self.hamiltonian.kind() != OperatorKind::Conserving {
            return Err(Error::Validation("Hamiltonian must be conserving".into()));
        }
        for n in 0..=self.basis.max_excitation() {
            let h = self.hamiltonian.block(n).expect("conserving block");
            if max_abs_diff(h, &h.adjoint()) > HERMITIAN_TOL {
                return Err(Error::Validation(format!("Hamiltonian block n={n} is not Hermitian")));
            }
        }
        for (channels, kind) in [
            (&self.loss_channels, OperatorKind::Lowering),
            (&self.dephasing_channels, OperatorKind::Dephasing),
        ] {
            for ch in channels {
                if !(ch.rate.is_finite() && ch.rate >= 0.0) {
                    return Err(Error::Config(format!(
                        "channel {} has invalid rate {} (rates must be finite and >= 0)",
                        ch.name, ch.rate
                    )));
                }
                if ch.operator.kind() != kind {
                    return Err(Error::Validation(format!(
                        "channel {} has kind {:?}, expected {kind:?}",
                        ch.name,
                        ch.operator.kind()
                    )));
                }
            }
        }
        if self.emitter.kind() != OperatorKind::Lowering {
            return Err(Error::Validation("emitter probe must be a lowering operator".into()));
        }
        Ok(())
    }

    /// Number of states in the top excitation block, where truncation leakage shows up.
    pub fn top_block(&self) -> usize {
        self.basis.max_excitation()
    }

    pub fn has_dephasing(&self) -> bool {
        !self.dephasing_channels.is_empty()
    }
}

fn check_rates(rates: &[(&str, f64)]) -> Result<()> {
    for &(name, r) in rates {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Config(format!("rate {name} = {r} must be finite and >= 0")));
        }
    }
    Ok(())
}

fn check_finite(values: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in values {
        if !v.is_finite() {
            return Err(Error::Config(format!("parameter {name} = {v} is not finite")));
        }
    }
    Ok(())
}

fn real(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, &entries.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Damped Jaynes-Cummings model with basis `|n,1> = |n>|g>`, `|n,2> = |n-1>|e>`.
pub fn build_jc(g: f64, delta: f64, kappa: f64, gamma: f64, cutoff: usize) -> Result<BlockModel> {
    if cutoff < 1 {
        return Err(Error::Config("Jaynes-Cummings model needs cutoff N >= 1".into()));
    }
    check_finite(&[("g", g), ("delta", delta)])?;
    check_rates(&[("kappa", kappa), ("gamma", gamma)])?;

    let mut dims = vec![1];
    dims.extend(std::iter::repeat_n(2, cutoff));
    let labels = (0..=cutoff)
        .map(|n| {
            let mut row = vec![format!("|{n}>|g>")];
            if n > 0 {
                row.push(format!("|{}>|e>", n - 1));
            }
            row
        })
        .collect();
    let basis = GradedBasis::new(dims)?.with_labels(labels)?;

    let h_blocks = (0..=cutoff)
        .map(|n| {
            if n == 0 {
                CMatrix::zeros(1, 1)
            } else {
                let s = g * (n as f64).sqrt();
                real(2, 2, &[0.0, s, s, delta])
            }
        })
        .collect();
    let hamiltonian = BlockOperator::new(OperatorKind::Conserving, &basis, h_blocks)?;

    let sigma_blocks = (1..=cutoff)
        .map(|n| if n == 1 { real(1, 2, &[0.0, 1.0]) } else { real(2, 2, &[0.0, 1.0, 0.0, 0.0]) })
        .collect();
    let sigma_minus = BlockOperator::new(OperatorKind::Lowering, &basis, sigma_blocks)?;

    let a_blocks = (1..=cutoff)
        .map(|n| {
            if n == 1 {
                real(1, 2, &[1.0, 0.0])
            } else {
                real(2, 2, &[(n as f64).sqrt(), 0.0, 0.0, ((n - 1) as f64).sqrt()])
            }
        })
        .collect();
    let a = BlockOperator::new(OperatorKind::Lowering, &basis, a_blocks)?;

    let model = BlockModel {
        name: "jaynes_cummings".into(),
        basis,
        hamiltonian,
        loss_channels: vec![
            Channel { name: "sigma-".into(), rate: gamma, operator: sigma_minus.clone() },
            Channel { name: "a".into(), rate: kappa, operator: a },
        ],
        dephasing_channels: Vec::new(),
        params: params(&[("g", g), ("delta", delta), ("kappa", kappa), ("gamma", gamma)]),
        emitter: sigma_minus,
        excited_atom: (1, 2),
    };
    model.validate()?;
    Ok(model)
}

/// `sigma_z` in the Jaynes-Cummings basis: `-1` at `n = 0`, `diag(-1, 1)` above.
pub fn jc_sigma_z(basis: &GradedBasis) -> Result<BlockOperator> {
    let blocks = (0..=basis.max_excitation())
        .map(|n| if n == 0 { real(1, 1, &[-1.0]) } else { real(2, 2, &[-1.0, 0.0, 0.0, 1.0]) })
        .collect();
    BlockOperator::new(OperatorKind::Dephasing, basis, blocks)
}

/// Jaynes-Cummings model plus atomic dephasing `gamma_z (sigma_z rho sigma_z - rho)`.
///
/// The dephasing enters as a generic Lindblad channel with operator `sigma_z` and rate
/// `gamma_z`; since `sigma_z^2 = 1` the two forms coincide. A zero `gamma_z` adds no channel.
pub fn build_jc_dephasing(
    g: f64,
    delta: f64,
    kappa: f64,
    gamma: f64,
    gamma_z: f64,
    cutoff: usize,
) -> Result<BlockModel> {
    check_rates(&[("gamma_z", gamma_z)])?;
    let mut model = build_jc(g, delta, kappa, gamma, cutoff)?;
    model.name = "jc_dephasing".into();
    model.params.insert("gamma_z".into(), gamma_z);
    if gamma_z > 0.0 {
        model.dephasing_channels.push(Channel {
            name: "sigma_z".into(),
            rate: gamma_z,
            operator: jc_sigma_z(&model.basis)?,
        });
    }
    Ok(model)
}

/// Damped two-atom Tavis-Cummings model in the basis
/// `|n>|gg>, |n-1>|ge>, |n-1>|eg>, |n-2>|ee>`.
#[allow(clippy::too_many_arguments)]
pub fn build_tc2(
    g1: f64,
    g2: f64,
    delta1: f64,
    delta2: f64,
    gamma1: f64,
    gamma2: f64,
    kappa: f64,
    cutoff: usize,
) -> Result<BlockModel> {
    if cutoff < 2 {
        return Err(Error::Config("two-atom Tavis-Cummings model needs cutoff N >= 2".into()));
    }
    check_finite(&[("g1", g1), ("g2", g2), ("delta1", delta1), ("delta2", delta2)])?;
    check_rates(&[("gamma1", gamma1), ("gamma2", gamma2), ("kappa", kappa)])?;

    let mut dims = vec![1, 3];
    dims.extend(std::iter::repeat_n(4, cutoff - 1));
    let labels = (0..=cutoff)
        .map(|n| {
            let mut row = vec![format!("|{n}>|gg>")];
            if n > 0 {
                row.push(format!("|{}>|ge>", n - 1));
                row.push(format!("|{}>|eg>", n - 1));
            }
            if n > 1 {
                row.push(format!("|{}>|ee>", n - 2));
            }
            row
        })
        .collect();
    let basis = GradedBasis::new(dims)?.with_labels(labels)?;

    let h_blocks = (0..=cutoff)
        .map(|n| match n {
            0 => CMatrix::zeros(1, 1),
            1 => real(3, 3, &[0.0, g2, g1, g2, delta2, 0.0, g1, 0.0, delta1]),
            _ => {
                let s = (n as f64).sqrt();
                let t = ((n - 1) as f64).sqrt();
                #[rustfmt::skip]
                let h = real(4, 4, &[
                    0.0,    g2 * s, g1 * s, 0.0,
                    g2 * s, delta2, 0.0,    g1 * t,
                    g1 * s, 0.0,    delta1, g2 * t,
                    0.0,    g1 * t, g2 * t, delta1 + delta2,
                ]);
                h
            }
        })
        .collect();
    let hamiltonian = BlockOperator::new(OperatorKind::Conserving, &basis, h_blocks)?;

    #[rustfmt::skip]
    let s1_blocks = (1..=cutoff)
        .map(|n| match n {
            1 => real(1, 3, &[0.0, 0.0, 1.0]),
            2 => real(3, 4, &[
                0.0, 0.0, 1.0, 0.0,
                0.0, 0.0, 0.0, 1.0,
                0.0, 0.0, 0.0, 0.0,
            ]),
            _ => real(4, 4, &[
                0.0, 0.0, 1.0, 0.0,
                0.0, 0.0, 0.0, 1.0,
                0.0, 0.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 0.0,
            ]),
        })
        .collect();
    #[rustfmt::skip]
    let s2_blocks = (1..=cutoff)
        .map(|n| match n {
            1 => real(1, 3, &[0.0, 1.0, 0.0]),
            2 => real(3, 4, &[
                0.0, 1.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 1.0,
            ]),
            _ => real(4, 4, &[
                0.0, 1.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 1.0,
                0.0, 0.0, 0.0, 0.0,
            ]),
        })
        .collect();
    let a_blocks = (1..=cutoff)
        .map(|n| match n {
            1 => real(1, 3, &[1.0, 0.0, 0.0]),
            2 => {
                let mut m = CMatrix::zeros(3, 4);
                m[(0, 0)] = c(2f64.sqrt(), 0.0);
                m[(1, 1)] = ONE;
                m[(2, 2)] = ONE;
                m
            }
            _ => {
                let d = [n, n - 1, n - 1, n - 2].map(|k| c((k as f64).sqrt(), 0.0));
                CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&d))
            }
        })
        .collect();
    let sigma1 = BlockOperator::new(OperatorKind::Lowering, &basis, s1_blocks)?;
    let sigma2 = BlockOperator::new(OperatorKind::Lowering, &basis, s2_blocks)?;
    let a = BlockOperator::new(OperatorKind::Lowering, &basis, a_blocks)?;

    let model = BlockModel {
        name: "tavis_cummings_2".into(),
        basis,
        hamiltonian,
        loss_channels: vec![
            Channel { name: "sigma1-".into(), rate: gamma1, operator: sigma1.clone() },
            Channel { name: "sigma2-".into(), rate: gamma2, operator: sigma2 },
            Channel { name: "a".into(), rate: kappa, operator: a },
        ],
        dephasing_channels: Vec::new(),
        params: params(&[
            ("g1", g1),
            ("g2", g2),
            ("delta1", delta1),
            ("delta2", delta2),
            ("gamma1", gamma1),
            ("gamma2", gamma2),
            ("kappa", kappa),
        ]),
        emitter: sigma1,
        excited_atom: (1, 3),
    };
    model.validate()?;
    Ok(model)
}

/// Interacting spins with lowering and optional dephasing channels.
///
/// Spin indices are 0-based. Pair couplings are given as `(a, b, strength)`.
#[derive(Debug, Clone, Default)]
pub struct SpinSystem {
    pub spins: usize,
    /// `delta_l sigma_l^+ sigma_l^-`; empty means zero.
    pub detunings: Vec<f64>,
    /// `J sigma_a^z sigma_b^z`
    pub zz: Vec<(usize, usize, f64)>,
    /// `eta (sigma_a^+ sigma_b^- + sigma_a^- sigma_b^+)`
    pub flip_flop: Vec<(usize, usize, f64)>,
    /// Decay rate of each `sigma_l^-`.
    pub decay: Vec<f64>,
    /// Dephasing rate of each `sigma_l^z`; zero rates add no channel.
    pub dephasing: Vec<f64>,
}

impl SpinSystem {
    /// Uniform nearest-neighbour chain.
    pub fn chain(spins: usize, j: f64, eta: f64, gamma: f64, gamma_z: f64) -> Self {
        let bonds = |s: f64| (0..spins.saturating_sub(1)).map(|a| (a, a + 1, s)).collect();
        Self {
            spins,
            detunings: vec![0.0; spins],
            zz: bonds(j),
            flip_flop: bonds(eta),
            decay: vec![gamma; spins],
            dephasing: vec![gamma_z; spins],
        }
    }
}

/// Single bosonic mode coupled to every spin by `g_l (a sigma_l^+ + a^dagger sigma_l^-)`.
#[derive(Debug, Clone)]
pub struct Oscillator {
    pub couplings: Vec<f64>,
    pub kappa: f64,
    /// Largest total excitation number kept.
    pub cutoff: usize,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Expected block dimension for `spins` spins, optionally with an oscillator.
pub fn spin_block_dim(spins: usize, with_oscillator: bool, n: usize) -> usize {
    if with_oscillator {
        (0..=n.min(spins)).map(|k| binomial(spins, k)).sum()
    } else {
        binomial(spins, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct ProductState {
    photons: usize,
    // bit (spins - 1 - l) holds spin l, so integer order is lexicographic in (s_1, ..., s_M)
    config: u32,
}

struct ProductSpace {
    spins: usize,
    states: Vec<ProductState>,
    index: HashMap<ProductState, usize>,
    basis: GradedBasis,
}

impl ProductSpace {
    fn new(spins: usize, oscillator_cutoff: Option<usize>) -> Result<Self> {
        let max_n = oscillator_cutoff.unwrap_or(spins);
        let mut states = Vec::new();
        let mut dims = Vec::new();
        let mut labels = Vec::new();
        for n in 0..=max_n {
            let mut block: Vec<ProductState> = Vec::new();
            for up in 0..=spins.min(n) {
                let photons = n - up;
                if oscillator_cutoff.is_none() && photons > 0 {
                    continue;
                }
                let mut configs: Vec<u32> =
                    (0..1u32 << spins).filter(|c| c.count_ones() as usize == up).collect();
                configs.sort_unstable();
                block.extend(configs.into_iter().map(|config| ProductState { photons, config }));
            }
            dims.push(block.len());
            labels.push(
                block
                    .iter()
                    .map(|s| {
                        let spin_str: String = (0..spins)
                            .map(|l| if s.config >> (spins - 1 - l) & 1 == 1 { 'e' } else { 'g' })
                            .collect();
                        if oscillator_cutoff.is_some() {
                            format!("|{}>|{spin_str}>", s.photons)
                        } else {
                            format!("|{spin_str}>")
                        }
                    })
                    .collect(),
            );
            states.extend(block);
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let basis = GradedBasis::new(dims)?.with_labels(labels)?;
        Ok(Self {
            spins,
            states,
            index,
            basis,
        })
    }

    fn bit(&self, l: usize) -> u32 {
        1 << (self.spins - 1 - l)
    }

    fn is_up(&self, s: &ProductState, l: usize) -> bool {
        s.config & self.bit(l) != 0
    }

    /// Builds the matrix of a map `state -> [(coefficient, image state)]`.
    fn operator<F>(&self, f: F) -> CMatrix
    where
        F: Fn(&ProductState) -> Vec<(f64, ProductState)>,
    {
        let dim = self.states.len();
        let mut m = CMatrix::zeros(dim, dim);
        for (col, s) in self.states.iter().enumerate() {
            for (amp, image) in f(s) {
                // images outside the truncated space only arise from a^dagger at the cutoff
                if let Some(&row) = self.index.get(&image) {
                    m[(row, col)] += c(amp, 0.0);
                }
            }
        }
        m
    }

    fn sigma_minus(&self, l: usize) -> CMatrix {
        self.operator(|s| {
            if self.is_up(s, l) {
                vec![(1.0, ProductState { config: s.config & !self.bit(l), ..*s })]
            } else {
                vec![]
            }
        })
    }

    fn sigma_z(&self, l: usize) -> CMatrix {
        self.operator(|s| vec![(if self.is_up(s, l) { 1.0 } else { -1.0 }, *s)])
    }

    /// `a sigma_l^+`, built directly so no intermediate state leaves the truncated space.
    fn absorb(&self, l: usize) -> CMatrix {
        self.operator(|s| {
            if s.photons > 0 && !self.is_up(s, l) {
                let image = ProductState { photons: s.photons - 1, config: s.config | self.bit(l) };
                vec![((s.photons as f64).sqrt(), image)]
            } else {
                vec![]
            }
        })
    }

    fn annihilation(&self) -> CMatrix {
        self.operator(|s| {
            if s.photons > 0 {
                vec![((s.photons as f64).sqrt(), ProductState { photons: s.photons - 1, ..*s })]
            } else {
                vec![]
            }
        })
    }
}

/// Generic builder for `spins` interacting spins, optionally coupled to one oscillator.
///
/// Within each excitation block states are ordered by the number of excited spins and
/// then lexicographically in `(s_1, ..., s_M)` with `g < e`. For one spin plus an
/// oscillator this reproduces the Jaynes-Cummings ordering.
pub fn build_spin_model(system: &SpinSystem, oscillator: Option<&Oscillator>) -> Result<BlockModel> {
    let m = system.spins;
    if !(1..=MAX_SPINS).contains(&m) {
        return Err(Error::Config(format!("number of spins {m} outside 1..={MAX_SPINS}")));
    }
    let per_spin = |v: &[f64], name: &str| -> Result<Vec<f64>> {
        match v.len() {
            0 => Ok(vec![0.0; m]),
            len if len == m => Ok(v.to_vec()),
            len => Err(Error::Config(format!("{name} has {len} entries, expected {m}"))),
        }
    };
    let detunings = per_spin(&system.detunings, "detunings")?;
    let decay = per_spin(&system.decay, "decay")?;
    let dephasing = per_spin(&system.dephasing, "dephasing")?;
    for (name, values) in [("decay", &decay), ("dephasing", &dephasing)] {
        for (l, &r) in values.iter().enumerate() {
            check_rates(&[(&format!("{name}[{l}]"), r)])?;
        }
    }
    check_finite(&detunings.iter().map(|&d| ("detuning", d)).collect::<Vec<_>>())?;
    for &(a, b, s) in system.zz.iter().chain(&system.flip_flop) {
        if a >= m || b >= m || a == b {
            return Err(Error::Config(format!("invalid spin pair ({a}, {b}) for {m} spins")));
        }
        check_finite(&[("pair coupling", s)])?;
    }
    if let Some(osc) = oscillator {
        if osc.cutoff < 1 {
            return Err(Error::Config("oscillator cutoff must be >= 1".into()));
        }
        if osc.couplings.len() != m {
            return Err(Error::Config(format!(
                "oscillator couplings have {} entries, expected {m}",
                osc.couplings.len()
            )));
        }
        check_rates(&[("kappa", osc.kappa)])?;
        check_finite(&osc.couplings.iter().map(|&g| ("g", g)).collect::<Vec<_>>())?;
    }

    let space = ProductSpace::new(m, oscillator.map(|o| o.cutoff))?;
    let dim = space.states.len();
    let sm: Vec<CMatrix> = (0..m).map(|l| space.sigma_minus(l)).collect();

    let mut h = CMatrix::zeros(dim, dim);
    for l in 0..m {
        h += (sm[l].adjoint() * &sm[l]).map(|z| z * detunings[l]);
    }
    for &(a, b, j) in &system.zz {
        h += (space.sigma_z(a) * space.sigma_z(b)).map(|z| z * j);
    }
    for &(a, b, eta) in &system.flip_flop {
        let hop = sm[a].adjoint() * &sm[b];
        h += (&hop + hop.adjoint()).map(|z| z * eta);
    }
    let annihilation = oscillator.map(|_| space.annihilation());
    if let Some(osc) = oscillator {
        for l in 0..m {
            let x = space.absorb(l);
            h += (&x + x.adjoint()).map(|z| z * osc.couplings[l]);
        }
    }

    let basis = space.basis.clone();
    let hamiltonian = BlockOperator::from_full(OperatorKind::Conserving, &basis, &h)?;
    let mut loss_channels = Vec::new();
    for l in 0..m {
        loss_channels.push(Channel {
            name: format!("sigma{}-", l + 1),
            rate: decay[l],
            operator: BlockOperator::from_full(OperatorKind::Lowering, &basis, &sm[l])?,
        });
    }
    if let (Some(osc), Some(a)) = (oscillator, annihilation.as_ref()) {
        loss_channels.push(Channel {
            name: "a".into(),
            rate: osc.kappa,
            operator: BlockOperator::from_full(OperatorKind::Lowering, &basis, a)?,
        });
    }
    let mut dephasing_channels = Vec::new();
    for (l, &rate) in dephasing.iter().enumerate() {
        if rate > 0.0 {
            dephasing_channels.push(Channel {
                name: format!("sigma{}_z", l + 1),
                rate,
                operator: BlockOperator::from_full(OperatorKind::Dephasing, &basis, &space.sigma_z(l))?,
            });
        }
    }

    let first_up = ProductState { photons: 0, config: space.bit(0) };
    let global = space.index[&first_up];
    let excited_atom = (1, global - basis.offset(1) + 1);

    let mut p = BTreeMap::new();
    p.insert("spins".to_string(), m as f64);
    for l in 0..m {
        p.insert(format!("delta{}", l + 1), detunings[l]);
        p.insert(format!("gamma{}", l + 1), decay[l]);
        p.insert(format!("gamma_z{}", l + 1), dephasing[l]);
    }
    if let Some(osc) = oscillator {
        p.insert("kappa".into(), osc.kappa);
        for (l, g) in osc.couplings.iter().enumerate() {
            p.insert(format!("g{}", l + 1), *g);
        }
    }

    let model = BlockModel {
        name: if oscillator.is_some() { "spins_oscillator" } else { "spin_chain" }.into(),
        emitter: loss_channels[0].operator.clone(),
        basis,
        hamiltonian,
        loss_channels,
        dephasing_channels,
        params: p,
        excited_atom,
    };
    model.validate()?;
    Ok(model)
}

/// Diagonal excitation-number operator `I` on the whole space.
pub fn excitation_operator(basis: &GradedBasis) -> CMatrix {
    let g = basis.grading();
    CMatrix::from_fn(g.len(), g.len(), |i, j| if i == j { c(g[i] as f64, 0.0) } else { ZERO })
}

/// Largest entry of `full` that breaks `[A, I] = shift * A`, i.e. that links
/// excitation `g_col` to `g_row` with `g_col != g_row + shift`.
pub fn grading_defect(full: &CMatrix, basis: &GradedBasis, shift: usize) -> f64 {
    let g = basis.grading();
    let mut worst: f64 = 0.0;
    for r in 0..g.len() {
        for col in 0..g.len() {
            if g[col] != g[r] + shift {
                worst = worst.max(full[(r, col)].norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn assert_close(a: &CMatrix, b: &CMatrix) {
        assert!(max_abs_diff(a, b) < 1e-14, "{a}\n!=\n{b}");
    }

    #[test]
    fn jc_blocks_as_printed() {
        let m = build_jc(1.0, 0.0, 2.0, 2.0, 3).unwrap();
        assert_eq!(m.basis.dims(), &[1, 2, 2, 2]);
        let sigma = &m.loss_channels[0].operator;
        assert_close(sigma.block(1).unwrap(), &real(1, 2, &[0.0, 1.0]));
        assert_close(sigma.block(3).unwrap(), &real(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        let a = &m.loss_channels[1].operator;
        assert_close(a.block(2).unwrap(), &real(2, 2, &[2f64.sqrt(), 0.0, 0.0, 1.0]));
        assert_close(a.block(1).unwrap(), &real(1, 2, &[1.0, 0.0]));
        assert!(a.block(0).is_none());
        assert_eq!(m.basis.label(1, 2), Some("|0>|e>"));
    }

    #[test]
    fn jc_rejects_bad_input() {
        assert!(matches!(build_jc(1.0, 0.0, 1.0, 1.0, 0), Err(Error::Config(_))));
        assert!(matches!(build_jc(1.0, 0.0, -1.0, 1.0, 2), Err(Error::Config(_))));
        assert!(matches!(build_jc_dephasing(1.0, 0.0, 1.0, 1.0, -0.1, 2), Err(Error::Config(_))));
    }

    #[test]
    fn jc_sigma_z_blocks() {
        let m = build_jc_dephasing(1.0, 0.2, 0.5, 0.3, 0.15, 3).unwrap();
        let sz = &m.dephasing_channels[0].operator;
        assert_close(sz.block(0).unwrap(), &real(1, 1, &[-1.0]));
        assert_close(sz.block(3).unwrap(), &real(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn zero_dephasing_equals_plain_jc() {
        let a = build_jc(1.0, 0.2, 0.5, 0.3, 3).unwrap();
        let b = build_jc_dephasing(1.0, 0.2, 0.5, 0.3, 0.0, 3).unwrap();
        assert_eq!(a.hamiltonian, b.hamiltonian);
        assert_eq!(a.loss_channels, b.loss_channels);
        assert!(b.dephasing_channels.is_empty());
    }

    #[test]
    fn tc2_blocks_as_printed() {
        let m = build_tc2(1.0, 0.7, 0.0, 0.0, 0.0, 0.0, 0.0, 3).unwrap();
        assert_eq!(m.basis.dims(), &[1, 3, 4, 4]);
        let a = &m.loss_channels[2].operator;
        #[rustfmt::skip]
        let expected = real(3, 4, &[
            2f64.sqrt(), 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
        ]);
        assert_close(a.block(2).unwrap(), &expected);
        assert_close(m.loss_channels[0].operator.block(1).unwrap(), &real(1, 3, &[0.0, 0.0, 1.0]));
        let h1 = m.hamiltonian.block(1).unwrap();
        assert_close(h1, &real(3, 3, &[0.0, 0.7, 1.0, 0.7, 0.0, 0.0, 1.0, 0.0, 0.0]));
        assert!(matches!(
            build_tc2(1.0, 1.0, 0.0, 0.0, 0.1, 0.1, 0.1, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn spin_only_dims() {
        let two = build_spin_model(&SpinSystem::chain(2, 0.3, 0.5, 0.1, 0.0), None).unwrap();
        assert_eq!(two.basis.dims(), &[1, 2, 1]);
        let three = build_spin_model(&SpinSystem::chain(3, 0.3, 0.5, 0.1, 0.0), None).unwrap();
        assert_eq!(three.basis.dims(), &[1, 3, 3, 1]);
        for n in 0..=3 {
            assert_eq!(three.basis.dim(n), spin_block_dim(3, false, n));
        }
    }

    #[test]
    fn enumerated_two_spin_dims() {
        // count 2-spin configurations by number of excitations
        let mut counts = [0usize; 3];
        for s1 in 0..2 {
            for s2 in 0..2 {
                counts[s1 + s2] += 1;
            }
        }
        assert_eq!(counts, [1, 2, 1]);
    }

    #[test]
    fn spins_oscillator_dims() {
        let osc = Oscillator { couplings: vec![1.0, 0.5, 0.2], kappa: 0.1, cutoff: 5 };
        let sys = SpinSystem { spins: 3, decay: vec![0.1; 3], ..Default::default() };
        let m = build_spin_model(&sys, Some(&osc)).unwrap();
        assert_eq!(m.basis.dims(), &[1, 4, 7, 8, 8, 8]);
    }

    #[test]
    fn spin_model_range_guard() {
        let sys = SpinSystem { spins: 7, ..Default::default() };
        assert!(matches!(build_spin_model(&sys, None), Err(Error::Config(_))));
        let sys = SpinSystem { spins: 0, ..Default::default() };
        assert!(matches!(build_spin_model(&sys, None), Err(Error::Config(_))));
    }

    #[test]
    fn single_spin_oscillator_is_jc() {
        let (g, delta, kappa, gamma) = (0.8, 0.3, 0.4, 0.25);
        let jc = build_jc(g, delta, kappa, gamma, 4).unwrap();
        let sys = SpinSystem {
            spins: 1,
            detunings: vec![delta],
            decay: vec![gamma],
            ..Default::default()
        };
        let osc = Oscillator { couplings: vec![g], kappa, cutoff: 4 };
        let gen = build_spin_model(&sys, Some(&osc)).unwrap();
        assert_eq!(gen.basis.dims(), jc.basis.dims());
        for n in 0..=4 {
            assert_close(gen.hamiltonian.block(n).unwrap(), jc.hamiltonian.block(n).unwrap());
        }
        for (a, b) in gen.loss_channels.iter().zip(&jc.loss_channels) {
            assert_eq!(a.rate, b.rate);
            for n in 1..=4 {
                assert_close(a.operator.block(n).unwrap(), b.operator.block(n).unwrap());
            }
        }
        assert_eq!(gen.excited_atom, jc.excited_atom);
    }

    #[test]
    fn two_spin_oscillator_is_tc2() {
        let tc = build_tc2(1.0, 0.7, 0.3, -0.2, 0.2, 0.35, 0.5, 3).unwrap();
        let sys = SpinSystem {
            spins: 2,
            detunings: vec![0.3, -0.2],
            decay: vec![0.2, 0.35],
            ..Default::default()
        };
        let osc = Oscillator { couplings: vec![1.0, 0.7], kappa: 0.5, cutoff: 3 };
        let gen = build_spin_model(&sys, Some(&osc)).unwrap();
        for n in 0..=3 {
            assert_close(gen.hamiltonian.block(n).unwrap(), tc.hamiltonian.block(n).unwrap());
        }
        for (a, b) in gen.loss_channels.iter().zip(&tc.loss_channels) {
            for n in 1..=3 {
                assert_close(a.operator.block(n).unwrap(), b.operator.block(n).unwrap());
            }
        }
        assert_eq!(gen.excited_atom, tc.excited_atom);
    }

    #[test]
    fn grading_relations_hold_exactly() {
        let models = vec![
            build_jc_dephasing(1.0, 0.3, 0.5, 0.2, 0.15, 3).unwrap(),
            build_tc2(1.0, 0.7, 0.3, -0.2, 0.2, 0.35, 0.5, 3).unwrap(),
            build_spin_model(&SpinSystem::chain(3, 0.4, 0.6, 0.1, 0.05), None).unwrap(),
        ];
        for m in &models {
            let h = m.hamiltonian.to_full(&m.basis);
            assert_eq!(grading_defect(&h, &m.basis, 0), 0.0);
            assert!(max_abs_diff(&h, &h.adjoint()) < 1e-12);
            for ch in &m.loss_channels {
                assert_eq!(grading_defect(&ch.operator.to_full(&m.basis), &m.basis, 1), 0.0);
            }
            for ch in &m.dephasing_channels {
                assert_eq!(grading_defect(&ch.operator.to_full(&m.basis), &m.basis, 0), 0.0);
            }
        }
    }

    #[test]
    fn from_full_rejects_ungraded_operator() {
        let basis = GradedBasis::new(vec![1, 2]).unwrap();
        let mut raising = CMatrix::zeros(3, 3);
        raising[(1, 0)] = ONE;
        assert!(BlockOperator::from_full(OperatorKind::Lowering, &basis, &raising).is_err());
        assert!(BlockOperator::from_full(OperatorKind::Conserving, &basis, &raising).is_err());
    }

    #[test]
    fn block_shapes_are_checked() {
        let basis = GradedBasis::new(vec![1, 2]).unwrap();
        let bad = vec![CMatrix::zeros(2, 2)];
        assert!(matches!(
            BlockOperator::new(OperatorKind::Lowering, &basis, bad),
            Err(Error::Shape(_))
        ));
    }
}
