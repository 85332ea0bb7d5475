//! Network-MIMO simulation under distributed, finite-rate channel state
//! information at the transmitters (CSIT).
//!
//! `K` transmitter/receiver pairs sit on a plane. Each transmitter `j` holds
//! its own quantized estimate of the full `K x K` channel, computes a
//! zero-forcing precoder from it and keeps only its own row. The crate
//! provides:
//!
//! * [`topology`]: node placement, distances, interference levels,
//!   cooperation radius and data-sharing neighborhoods;
//! * [`channel`]: SNR-coupled pathloss, Rayleigh channels and per-TX
//!   quantized estimates;
//! * [`allocation`]: bit-allocation policies (conventional, distance-based,
//!   size-matched uniform and clustered) and their sizes;
//! * [`precoding`]: perfect and distributed zero forcing, data masks;
//! * [`evaluation`]: coupled Monte-Carlo rates, DoF slopes and precoder
//!   deviation statistics;
//! * [`oracle`]: numerical checks of the inverse-expansion arguments behind
//!   the distance-based policy;
//! * [`experiment`]: configuration, presets and CSV/metadata output.

pub mod allocation;
pub mod channel;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod linalg;
pub mod oracle;
pub mod precoding;
pub mod rng;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use num_complex::Complex64;
