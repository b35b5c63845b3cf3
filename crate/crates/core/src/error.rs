use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("enumeration too large: {configs:.3e} configurations exceed the 2^24 guard")]
    EnumerationTooLarge { configs: f64 },

    #[error("MCMC diagnostics failed: acceptance rate {rate:.3} outside [0.1, 0.9] ({what})")]
    McmcDiagnostics { what: String, rate: f64 },

    #[error("conjugate maximizer hit the primal domain edge at z = {z}")]
    EdgeAttained { z: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("slope blow-up in finite-difference solver (max slope {0})")]
    SlopeBlowUp(f64),

    #[error("rate fit rejected: {0}")]
    InvalidFit(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
