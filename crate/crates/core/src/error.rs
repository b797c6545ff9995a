use thiserror::Error;

/// Errors raised anywhere in the simulator and sensing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("material `{material}` has no data at {frequency_hz:e} Hz")]
    UnknownMaterial { material: String, frequency_hz: f64 },

    #[error("grazing geometry: Beckmann factor denominator {denominator:e} below 1e-12")]
    GrazingGeometry { denominator: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("framing error: {0}")]
    Framing(String),

    #[error("equalization failed: CSI is rank deficient (sigma_min / sigma_max = {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("training error: {0}")]
    Training(String),

    #[error("SMO did not converge after {iterations} iterations (KKT gap {gap:e})")]
    NonConvergence {
        iterations: usize,
        gap: f64,
        /// Dual variables of the last iterate.
        best_alpha: Vec<f64>,
    },

    #[error("degenerate split: class `{0}` has too few samples for a train/test split")]
    DegenerateSplit(String),

    #[error("I/O error")]
    Io(#[from] std::io::Error),

    #[error("CSV error")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Config-class errors map to CLI exit code 2, everything else to 3.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::UnknownMaterial { .. } | Error::Parse(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
