//! Link-level simulator for downlink multiuser mmWave MIMO-OFDM with hybrid
//! precoding: geometric doubly-selective channels, two-stage limited-feedback
//! precoder design, and Monte Carlo campaigns over rate, outage, coded BER,
//! and energy efficiency.

pub mod campaign;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod linalg;
pub mod link;
pub mod metrics;
pub mod precoding;
pub mod results;
pub mod scenario;

pub use error::{Error, Result};
