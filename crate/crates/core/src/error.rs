use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index error: {0}")]
    Index(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// Two eigenvalues of a block collide, so the block cannot be diagonalized reliably.
    #[error("degenerate block {block}: eigenvalues {first} and {second} are not separable")]
    DegenerateBlock {
        block: String,
        first: Complex64,
        second: Complex64,
    },

    /// A recursion denominator `lambda_target - lambda_nu` vanished.
    #[error(
        "resonance in sector (l={l}, m={m}, mu={mu}): eigenvalue {target} collides with \
         entry nu={nu} of block n={n} ({other})"
    )]
    Resonance {
        l: usize,
        m: usize,
        mu: usize,
        n: usize,
        nu: usize,
        target: Complex64,
        other: Complex64,
    },

    #[error("divergent spectrum integral: {0}")]
    DivergentSpectrum(String),

    #[error("size guard exceeded: dimension {dimension} > {limit}")]
    SizeGuard { dimension: usize, limit: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DivergentSpectrum(_) => 3,
            Error::SizeGuard { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
