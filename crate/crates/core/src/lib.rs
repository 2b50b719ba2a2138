//! Signal-chain model and retrieval engine for a time-stretched femtosecond
//! ranging lidar.
//!
//! A displacement of the retroreflector changes the delay between the two
//! arms of a fiber interferometer. After dispersive stretching, that delay
//! shows up as the beat frequency of a microwave pulse. A null-biased
//! intensity modulator copies the pulse onto two optical sidebands, and a
//! programmable filter with a symmetric ramp turns the sideband offset into
//! a transmission ratio between a filtered and a reference channel. A cubic
//! calibration curve maps that ratio back to displacement.
//!
//! The crate is `no_std` (with `alloc`) and contains no IO. Everything is in
//! SI units except calibration curves, which work in millimetres.
//!
//! Modules, in signal order:
//!
//! * [`sysmodel`]: physical parameters, derived quantities and validation.
//! * [`stretch`]: dispersive mapping and interferogram synthesis.
//! * [`mwphotonics`]: modulation, filter discriminator and channel detection.
//! * [`dsp`]: digitization, direct frequency estimators and data-rate accounting.
//! * [`calib`]: cubic calibration, monotonicity certificates and inversion.
//! * [`runner`]: noisy measurements, calibration and ranging campaigns.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod calib;
pub mod dsp;
mod error;
pub mod fft;
pub mod mwphotonics;
pub mod runner;
pub mod special;
pub mod stretch;
pub mod sysmodel;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
