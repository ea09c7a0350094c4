use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error(
        "eigenvalue tie at the signal/noise boundary (index {index}: {upper:.6e} vs {lower:.6e})"
    )]
    DegenerateSubspace { index: usize, upper: f64, lower: f64 },

    #[error("zero-forcing on rank-deficient channel at tone {tone}")]
    RankDeficientTone { tone: usize },

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("trial seed={seed} snr={snr_db} dB L={taps}: {source}")]
    Trial {
        seed: u64,
        snr_db: f64,
        taps: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
