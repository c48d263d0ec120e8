use thiserror::Error;

/// Errors surfaced by the library.
///
/// Budget-style failures are loud: no operation silently truncates an
/// enumeration or falls back to an approximation.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed user input (quiver JSON, dimension vectors, words, primes...).
    #[error("bad input: {0}")]
    BadInput(String),

    /// An enumeration would exceed its configured budget.
    #[error("budget exceeded in {what}: needs {needed}, budget {budget}")]
    Budget {
        what: String,
        needed: u128,
        budget: u128,
    },

    /// Interpolation was asked to determine more coefficients than samples allow.
    #[error("insufficient samples: {got} samples cannot determine {needed} coefficients")]
    InsufficientSamples { needed: usize, got: usize },

    /// The sample values admit no Laurent polynomial within the degree window.
    #[error("inconsistent samples: no Laurent polynomial in the degree window fits all samples")]
    InconsistentSamples,

    /// A fit exists but has non-integer coefficients where integers are required.
    #[error("interpolant has non-integer coefficients")]
    NonIntegerInterpolant,

    /// An interpolant failed verification at the held-out prime.
    #[error("interpolant does not predict the held-out prime {prime}")]
    HeldOutMismatch { prime: u32 },

    /// A Gram matrix that must be invertible is singular.
    #[error("degenerate Gram matrix: {0}")]
    DegenerateGram(String),

    /// A bounded search that is expected to succeed ran out of budget.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    /// Unusable cache contents (corrupt files are skipped, not trusted).
    #[error("cache error: {0}")]
    Cache(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Budget failures and interpolation failures map to CLI exit code 1,
    /// malformed input to exit code 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BadInput(_) => 2,
            _ => 1,
        }
    }
}
