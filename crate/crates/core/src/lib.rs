//! Coordinated beamforming for the multicell MISO downlink: distributed
//! precoders built from local CSI, BS-side selection metrics, CU-side user
//! selection, Monte Carlo sweeps and statistical checks of the analytical
//! gain and leakage results.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod error;
pub mod format;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod precoding;
pub mod scheduler;

pub use channel::{deploy, ChannelRealization, NetworkConfig};
pub use error::{Error, Result};
pub use harness::{run_sweep, ExperimentConfig, ResultRow};
pub use precoding::{PrecoderKind, Precoder};
pub use scheduler::{CandidateSet, SelectionOutcome, Strategy};
