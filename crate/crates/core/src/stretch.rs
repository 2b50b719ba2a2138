//! Dispersive Fourier transformation: how a delay between the interferometer
//! arms becomes the beat frequency of the stretched pulse.
//!
//! Phase convention: the interferogram is `a(t)·cos Φ(t)` with
//!
//! ```text
//! Φ(t) = [τ/β₂L − β₃Lτ²/(2(β₂L)³) − β₃Lτt/(β₂L)³] · t
//! ```
//!
//! read as an angular frequency times `t`. The microwave frequency quoted for
//! a displacement is `(1/2π)·dΦ/dt` at the envelope centre, which drops the
//! residual chirp term. Synthesis keeps it.

#[allow(unused_imports)] // std, when linked, shadows these with inherent methods
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::sysmodel::{effective_oe_bandwidth, stretch_duration, FiberDispersion, SystemConfig};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Uniformly sampled real time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: f64,
    t0: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64, t0: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::invalid("sample_rate", "must be positive and finite"));
        }
        if samples.len() < 2 {
            return Err(Error::invalid("samples", "a waveform needs at least two samples"));
        }
        if !t0.is_finite() || samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("samples", "all samples and t0 must be finite"));
        }
        Ok(Self {
            samples,
            sample_rate,
            t0,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * gain).collect(),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EnvelopeShape {
    Gaussian,
    /// `exp(−ln2·(2|t|/FWHM)^(2·order))`; order 1 is the Gaussian.
    SuperGaussian { order: u32 },
}

/// Normalized (unit peak) pulse envelope `a(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Envelope {
    pub shape: EnvelopeShape,
    pub duration_fwhm: f64,
    pub center: f64,
}

impl Envelope {
    pub fn new(shape: EnvelopeShape, duration_fwhm: f64, center: f64) -> Result<Self> {
        if !(duration_fwhm > 0.0) || !duration_fwhm.is_finite() {
            return Err(Error::invalid("duration_fwhm", "must be positive and finite"));
        }
        if let EnvelopeShape::SuperGaussian { order: 0 } = shape {
            return Err(Error::invalid("order", "super-Gaussian order must be at least 1"));
        }
        Ok(Self {
            shape,
            duration_fwhm,
            center,
        })
    }

    /// Gaussian whose FWHM equals the stretched-pulse duration.
    pub fn default_for(config: &SystemConfig) -> Result<Self> {
        Self::new(EnvelopeShape::Gaussian, stretch_duration(config), 0.0)
    }

    pub fn order(&self) -> u32 {
        match self.shape {
            EnvelopeShape::Gaussian => 1,
            EnvelopeShape::SuperGaussian { order } => order,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let u = 2.0 * (t - self.center).abs() / self.duration_fwhm;
        (-core::f64::consts::LN_2 * u.powi(2 * self.order() as i32)).exp()
    }
}

/// Instantaneous optical frequency of the stretched pulse,
/// `f₀ + t/(2πβ₂L) − β₃L·t²/(4π(β₂L)³)`.
pub fn instantaneous_frequency(t: f64, fiber: &FiberDispersion, f0: f64) -> f64 {
    let b2 = fiber.beta2_l;
    f0 + t / (2.0 * PI * b2) - fiber.beta3_l * t * t / (4.0 * PI * b2 * b2 * b2)
}

/// Cosine argument `Φ(t)` of the interferogram for a delay `tau` (rad).
pub fn interferogram_phase(t: f64, tau: f64, fiber: &FiberDispersion) -> f64 {
    let b2 = fiber.beta2_l;
    let b2_3 = b2 * b2 * b2;
    let b3 = fiber.beta3_l;
    (tau / b2 - b3 * tau * tau / (2.0 * b2_3) - b3 * tau * t / b2_3) * t
}

/// `(1/2π)·dΦ/dt` at `t = 0` for a delay `tau`, without range checks.
pub fn center_frequency_for_delay(tau: f64, fiber: &FiberDispersion) -> f64 {
    let b2 = fiber.beta2_l;
    (tau / b2 - fiber.beta3_l * tau * tau / (2.0 * b2 * b2 * b2)) / (2.0 * PI)
}

/// Smallest non-negative delay whose centre frequency is `frequency`.
///
/// With third-order dispersion the delay–frequency relation is a parabola;
/// the branch through the origin is taken.
pub fn reference_delay_for_frequency(frequency: f64, fiber: &FiberDispersion) -> Result<f64> {
    let b2 = fiber.beta2_l;
    if b2 == 0.0 || !b2.is_finite() {
        return Err(Error::invalid("beta2_l", "must be finite and nonzero"));
    }
    // c2·τ² + c1·τ − 2πf = 0
    let c1 = 1.0 / b2;
    let c2 = -fiber.beta3_l / (2.0 * b2 * b2 * b2);
    let target = 2.0 * PI * frequency;
    if c2 == 0.0 {
        return Ok(target / c1);
    }
    let disc = c1 * c1 + 4.0 * c2 * target;
    if disc < 0.0 {
        return Err(Error::OutOfRange {
            quantity: "microwave frequency",
            value: frequency,
            lo: 0.0,
            hi: -c1 * c1 / (4.0 * c2) / (2.0 * PI),
        });
    }
    // numerically stable root of the branch through the origin
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    Ok(-target / q)
}

/// Band `[bpf_low, bpf_low + Δf]` of usable microwave frequencies.
pub fn oe_band(config: &SystemConfig) -> Result<(f64, f64)> {
    let lo = config.processor.bpf_low;
    Ok((lo, lo + effective_oe_bandwidth(config)?))
}

/// Centre microwave frequency for a displacement `x` (m) from the zero point.
pub fn displacement_to_frequency(x: f64, config: &SystemConfig) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::OutOfRange {
            quantity: "displacement",
            value: x,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let tau = config.stage.at(x).total_delay();
    let f = center_frequency_for_delay(tau, &config.fiber);
    let (lo, hi) = oe_band(config)?;
    let slack = 1e-9 * hi;
    if f < lo - slack || f > hi + slack {
        return Err(Error::OutOfRange {
            quantity: "microwave frequency",
            value: f,
            lo,
            hi,
        });
    }
    Ok(f)
}

/// Inverse of [`displacement_to_frequency`] on the branch through the
/// reference delay.
pub fn frequency_to_displacement(frequency: f64, config: &SystemConfig) -> Result<f64> {
    let tau = reference_delay_for_frequency(frequency, &config.fiber)?;
    Ok((tau - config.stage.reference_delay) * SPEED_OF_LIGHT / 2.0)
}

/// Largest measurable delay, `|D·L|·λ²·Δf/c`.
pub fn max_delay(config: &SystemConfig) -> Result<f64> {
    let lambda = config.source.center_wavelength;
    Ok(config.fiber.total_dispersion.abs() * lambda * lambda * effective_oe_bandwidth(config)? / SPEED_OF_LIGHT)
}

/// Displacement dynamic range `c·τ_max/2` (m).
pub fn dynamic_range(config: &SystemConfig) -> Result<f64> {
    Ok(SPEED_OF_LIGHT * max_delay(config)? / 2.0)
}

/// Sampling grid for interferogram synthesis, centred on the envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub sample_rate: f64,
    pub samples: usize,
}

impl TimeGrid {
    /// 80 GS/s over one repetition period.
    pub fn default_for(config: &SystemConfig) -> Self {
        let sample_rate = 80e9;
        let samples = (sample_rate * config.source.period()).round() as usize;
        Self { sample_rate, samples }
    }

    pub fn duration(&self) -> f64 {
        self.samples as f64 / self.sample_rate
    }
}

/// Noiseless interferogram `amplitude·a(t)·cos Φ(t)` for the stage at `x`.
///
/// `t` in `Φ` is measured from the envelope centre, which sits at the grid
/// centre.
pub fn synthesize_interferogram(
    x: f64,
    config: &SystemConfig,
    envelope: &Envelope,
    grid: &TimeGrid,
    amplitude: f64,
) -> Result<Waveform> {
    config.validated()?;
    if grid.duration() < envelope.duration_fwhm {
        return Err(Error::invalid("grid", "time grid is shorter than the envelope FWHM"));
    }
    // Only the delay matters here; the range check is the caller's business.
    if !(x >= 0.0) {
        return Err(Error::invalid("displacement", "must be non-negative"));
    }
    let fiber = &config.fiber;
    let tau = config.stage.at(x).total_delay();
    let t0 = -(grid.samples as f64 / 2.0) / grid.sample_rate;

    let b2 = fiber.beta2_l;
    let linear = tau / b2 - fiber.beta3_l * tau * tau / (2.0 * b2 * b2 * b2);
    let quad = fiber.beta3_l * tau / (b2 * b2 * b2);
    let t_end = t0 + (grid.samples.saturating_sub(1)) as f64 / grid.sample_rate;
    let f_max = [t0, t_end]
        .iter()
        .map(|&t| (linear - 2.0 * quad * t).abs() / (2.0 * PI))
        .fold(0.0, f64::max);
    let required = 4.0 * f_max;
    if grid.sample_rate < required * (1.0 - 1e-9) {
        return Err(Error::AliasingRisk {
            required,
            available: grid.sample_rate,
        });
    }

    let samples = (0..grid.samples)
        .map(|i| {
            let t = t0 + i as f64 / grid.sample_rate;
            let a = envelope.value(envelope.center + t);
            amplitude * a * interferogram_phase(t, tau, fiber).cos()
        })
        .collect();
    Waveform::new(samples, grid.sample_rate, envelope.center + t0)
}
