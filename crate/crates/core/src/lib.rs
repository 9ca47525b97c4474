//! Hardware-limited performance bounds for THz inter-satellite MIMO-ISAC links.
//!
//! The crate follows the signal from the array to the bounds:
//!
//! * [`model`] multiplies the ideal array gain by the squint, quantization,
//!   pointing, amplitude and LO coherence losses.
//! * [`noise`] turns hardware impairments into a distortion budget and sampled
//!   noise PSDs.
//! * [`capacity`] and [`sensing`] compute spectral efficiency and
//!   delay/range Cramér-Rao bounds from those.
//! * [`tradeoff`] sweeps the pilot overhead between the two.
//! * [`validation`] holds the Monte Carlo and numerical cross-checks.
//!
//! Presets for the hardware tiers live in [`scenario`].

pub mod capacity;
pub mod error;
pub mod model;
pub mod noise;
pub mod quad;
pub mod scenario;
pub mod sensing;
pub mod toeplitz;
pub mod tradeoff;
pub mod units;
pub mod validation;

pub use error::{Error, Result};
