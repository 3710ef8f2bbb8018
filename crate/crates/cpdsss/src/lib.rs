//! Link-level simulator for multi-user Cyclic-Prefix Direct-Sequence Spread
//! Spectrum (CP-DSSS).
//!
//! The library models an uplink with per-antenna matched-filter detection and
//! a downlink with per-antenna time-reversal precoding at a multi-antenna
//! gateway. All frame-length operators (spreading, channels, precoders) are
//! circulant and applied through their frequency-domain diagonals, so every
//! chain runs in O(N log N) per frame. Dense matrices only appear in test
//! oracles and in the dense log-det cross-check path.
//!
//! Module map:
//! - [`zc_spread`]: Zadoff-Chu sequences and the unitary spreading operator
//! - [`circulant`]: circulant operator algebra and the symbol-rate expander
//! - [`channel`]: random dispersive channel draws (exponential power profile)
//! - [`chanest`]: pilot frames and low-SNR impulse-response estimation
//! - [`linkops`]: end-to-end UL/DL transceiver chains
//! - [`capacity`]: SINR measurement, Shannon capacity, ideal log-det capacity
//! - [`harness`]: scenario sweeps, Monte Carlo management, CSV/SVG output

pub mod capacity;
pub mod chanest;
pub mod channel;
pub mod circulant;
mod error;
pub mod fft;
pub mod harness;
pub mod linkops;
pub mod plot;
pub mod seeds;
pub mod zc_spread;

pub use error::{Error, Result};

pub use num_complex::Complex64;
