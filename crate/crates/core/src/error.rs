use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value fell outside its required range (bad width, out-of-range
    /// coordinate, twist entry ≥ q-1, ...).
    #[error("range error: {0}")]
    Range(String),

    /// A precondition on the mathematical domain was violated (quotient
    /// not integral, non-member input, non-unit inversion, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called in an invalid state (e.g. generator of an
    /// unsolvable system).
    #[error("state error: {0}")]
    State(String),

    /// Structural validation of input data failed.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// An enumeration would exceed its configured budget.
    #[error("budget exceeded for {what}: needed {needed}, limit {limit}")]
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    /// The working p-adic precision cannot certify the requested result.
    #[error("insufficient precision in {context}: needed {needed}, have {have} (raise precision)")]
    Precision {
        context: String,
        needed: usize,
        have: usize,
    },
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::Precision { .. })
    }
}
