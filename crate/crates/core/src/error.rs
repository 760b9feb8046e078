use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("insufficient digits: {0}")]
    InsufficientDigits(String),

    #[error("exact hit: p/q equals the angle")]
    ExactHit,

    #[error("precision budget exceeded: {0}")]
    PrecisionBudget(String),

    #[error("resonant frequency {freq}: eigenvalue vanishes, Poisson equation unsolvable")]
    Resonant { freq: String },

    #[error("rejected chain (q = {q}, p = {p}): {reason}")]
    BadChain { q: u64, p: i64, reason: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("certificate failed: {0}")]
    Certificate(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors that stem from the mathematics (resonance, infeasibility) rather
    /// than from malformed input.
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::Resonant { .. }
                | Error::Infeasible(_)
                | Error::ExactHit
                | Error::Degenerate(_)
                | Error::PrecisionBudget(_)
                | Error::InsufficientDigits(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
