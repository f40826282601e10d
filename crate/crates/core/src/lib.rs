//! Eigensystems of gain-free Lindblad master equations built block by block.
//!
//! When the Hamiltonian conserves an excitation number and every jump operator
//! lowers it by one (or leaves it unchanged), the Liouvillian splits into small
//! sector blocks on `|n + l, j><n, k|`. This crate diagonalizes those blocks and
//! recovers the full set of right and left eigenvectors through a downward and an
//! upward recursion, then uses them for time evolution and emission spectra.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod eigensolver;
pub mod error;
pub mod graded_space;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod spectral;
pub mod superop;
pub mod verify;

pub use config::RunConfig;
pub use dynamics::{emission_spectrum, evolve, expand_state, jc_spectrum_closed_form, SpectrumResult};
pub use eigensolver::{diagonalize_block, BlockEig, BlockEigensystem};
pub use error::{Error, Result};
pub use graded_space::GradedBasis;
pub use model::{build_jc, build_jc_dephasing, build_spin_model, build_tc2, BlockModel, BlockOperator};
pub use spectral::{full_eigensystem, LiouvilleEigensystem, SolverOptions};
