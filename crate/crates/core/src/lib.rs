//! Simulation of a quasi-optical, multi-frequency (110-336 GHz) pulsed EPR and
//! Mims ENDOR spectrometer: spin physics, Fabry-Perot resonator, pulse
//! sequences, magnitude-mode superheterodyne detection, sweeps, and a small
//! experiment-description language.

// `!(x > 0.0)` deliberately rejects NaN alongside out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod constants;
pub mod detection;
pub mod error;
pub mod expdsl;
pub mod pulses;
pub mod resonator;
pub mod rng;
pub mod sequences;
pub mod spinsys;
pub mod thermal;
pub mod warning;

pub use error::{Error, Result};
pub use warning::Warning;
