//! Crate-wide error type. Variants carry enough context to act on the failure
//! (which users collided, which config key was bad, how many trials died).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("config file {path}: {msg}")]
    ConfigFile { path: String, msg: String },

    #[error("channel geometry: {0}")]
    Channel(String),

    #[error("codebook: {0}")]
    Codebook(String),

    #[error(
        "digital precoder is rank deficient (condition estimate {cond:.3e}); \
         users sharing a BS beam: {colliding:?}"
    )]
    RankDeficient {
        cond: f64,
        /// Pairs of user indices whose analog beams coincide, if any.
        colliding: Vec<(usize, usize)>,
    },

    #[error("search space of {combinations} combinations exceeds guard {guard}")]
    SearchSpaceTooLarge { combinations: u128, guard: u128 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parity-check file: {0}")]
    Alist(String),

    #[error("decoder did not converge after {iterations} iterations")]
    DecodeFailure { iterations: usize },

    #[error("{failed} of {total} trials failed (threshold {threshold:.0}%): first failure: {first}")]
    CampaignFailed {
        failed: usize,
        total: usize,
        threshold: f64,
        first: String,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code the CLI maps this error to: config problems exit 2,
    /// campaign failures exit 3, everything else 1.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::ConfigFile { .. } => 2,
            Error::CampaignFailed { .. } => 3,
            _ => 1,
        }
    }
}
