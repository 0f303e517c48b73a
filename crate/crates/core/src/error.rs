use thiserror::Error;

use crate::ternary::Shape;

/// Errors raised by the library. Mathematical check failures are never
/// errors; they are reported inside verdicts.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape must be positive, got {rows}x{cols}")]
    InvalidShape { rows: usize, cols: usize },

    #[error("shape mismatch: expected {expected}, got {found}")]
    ShapeMismatch { expected: Shape, found: Shape },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("control function contract violated: {0}")]
    ControlContract(String),

    #[error("series not certifiably summable: {0}")]
    NotSummable(String),

    #[error("outside the admissible range: {0}")]
    OutOfRange(String),

    #[error("magnitude overflow at n = {failed_at}; largest usable n is {max_usable_n}")]
    RangeExhausted { failed_at: usize, max_usable_n: usize },

    #[error("iteration for basis element {basis_index} did not converge after n = {n_reached} (last gap {last_gap:e})")]
    ExtractionFailed {
        basis_index: usize,
        n_reached: usize,
        last_gap: f64,
    },
}

impl Error {
    /// Whether the failure stems from bad input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidShape { .. }
                | Error::ShapeMismatch { .. }
                | Error::NonFinite { .. }
                | Error::InvalidInput(_)
                | Error::Precondition(_)
                | Error::ControlContract(_)
                | Error::OutOfRange(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
