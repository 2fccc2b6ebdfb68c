use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("particle number {0} is odd; the two-mode ladder needs an even N")]
    OddParticleNumber(u64),

    #[error("mode index {0} is not 0 or 1")]
    InvalidMode(usize),

    #[error("moment power {power} exceeds the exact-arithmetic bound p_max = {max}")]
    Capacity { power: u32, max: u32 },

    #[error("moment matrix is not symmetric")]
    NotHermitian,

    #[error("window half-width {k} exceeds N/2 = {half}")]
    WindowTooWide { k: u64, half: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("expectation has imaginary part {0:e}; observable is not Hermitian")]
    ImaginaryExpectation(f64),

    #[error("observable has irrational entries; exact application is unavailable")]
    NotExact,

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("degenerate fit grid: {0}")]
    DegenerateGrid(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    /// `true` for errors caused by the exact-arithmetic capacity bound.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
