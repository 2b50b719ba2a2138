//! Microwave-photonic processor: null-biased intensity modulation, the
//! programmable-filter discriminator, two-channel envelope detection and the
//! amplitude comparison function (ACF).
//!
//! The modulator field for a tone `f_m` is `√P₀·sin(β cos 2πf_m t)`, whose
//! Jacobi–Anger expansion contains only odd orders:
//!
//! ```text
//! sin(β cos θ) = 2 Σ_k (−1)^k J_{2k+1}(β) cos((2k+1)θ)
//! ```
//!
//! so the line at `±(2k+1)f_m` has field amplitude `(−1)^k √P₀ J_{2k+1}(β)`.
//! All filtering is done in the power domain.

#[allow(unused_imports)] // std, when linked, shadows these with inherent methods
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};


use crate::special::bessel_j;
use crate::stretch::{self, Envelope, EnvelopeShape, Waveform};
use crate::sysmodel::{ProcessorConfig, SystemConfig};
use crate::{Error, Result};

/// Depth below which the modulator is flagged as operating small-signal.
pub const SMALL_SIGNAL_DEPTH: f64 = 0.2;

/// Largest first-order amplitude discrepancy `|J₁(β) − β/2| / J₁(β)` that
/// [`modulate_small_signal`] accepts.
pub const SMALL_SIGNAL_TOLERANCE: f64 = 0.01;

/// Default floor transmission of a designed ramp.
pub const DEFAULT_RAMP_FLOOR: f64 = 0.05;

const LINE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationParams {
    pub drive_amplitude: f64,
    pub half_wave_voltage: f64,
    pub extinction_ratio_db: Option<f64>,
}

impl ModulationParams {
    pub fn from_processor(p: &ProcessorConfig) -> Self {
        Self {
            drive_amplitude: p.drive_amplitude,
            half_wave_voltage: p.half_wave_voltage,
            extinction_ratio_db: p.extinction_ratio_db,
        }
    }

    /// Parameters that realize a given depth with the given half-wave voltage.
    pub fn with_depth(depth: f64, half_wave_voltage: f64) -> Self {
        Self {
            drive_amplitude: depth * half_wave_voltage / PI,
            half_wave_voltage,
            extinction_ratio_db: None,
        }
    }

    /// `β = πV_m/V_π`.
    pub fn depth(&self) -> f64 {
        PI * self.drive_amplitude / self.half_wave_voltage
    }

    /// Small-signal flag for an envelope with unit peak.
    pub fn is_small_signal(&self) -> bool {
        self.depth() <= SMALL_SIGNAL_DEPTH
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandLine {
    /// Offset from the optical carrier (Hz).
    pub offset: f64,
    /// Field amplitude (√W), signed.
    pub amplitude: f64,
    pub order: i32,
}

impl SidebandLine {
    pub fn power(&self) -> f64 {
        self.amplitude * self.amplitude
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SidebandSpectrum {
    pub lines: Vec<SidebandLine>,
    /// Residual carrier power from a finite extinction ratio (W).
    pub carrier_power_leak: f64,
}

impl SidebandSpectrum {
    pub fn sideband_power(&self) -> f64 {
        self.lines.iter().map(SidebandLine::power).sum()
    }

    pub fn total_power(&self) -> f64 {
        self.sideband_power() + self.carrier_power_leak
    }

    pub fn line(&self, order: i32) -> Option<&SidebandLine> {
        self.lines.iter().find(|l| l.order == order)
    }
}

fn carrier_leak(params: &ModulationParams, carrier_power: f64) -> f64 {
    params
        .extinction_ratio_db
        .map_or(0.0, |er| carrier_power * 10f64.powf(-er / 10.0))
}

/// Full Bessel-series spectrum for a tone at `f_m` with unit envelope peak.
///
/// Lines are emitted as `(−n, +n)` pairs in increasing odd order `n` and the
/// series stops once `|J_n(β)|` drops below `10⁻¹²·|J₁(β)|`.
pub fn modulate_exact(f_m: f64, params: &ModulationParams, carrier_power: f64) -> SidebandSpectrum {
    let beta = params.depth();
    let root = carrier_power.sqrt();
    let mut lines = Vec::new();
    if beta != 0.0 {
        let first = bessel_j(1, beta).abs();
        let mut k = 0u32;
        loop {
            let n = 2 * k + 1;
            let j = bessel_j(n, beta);
            // J_n decays monotonically once n exceeds β
            if (n as f64) > beta && j.abs() < LINE_CUTOFF * first {
                break;
            }
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            let amplitude = sign * root * j;
            for s in [-1i32, 1] {
                lines.push(SidebandLine {
                    offset: s as f64 * n as f64 * f_m,
                    amplitude,
                    order: s * n as i32,
                });
            }
            k += 1;
            if k > 10_000 {
                break;
            }
        }
    }
    SidebandSpectrum {
        lines,
        carrier_power_leak: carrier_leak(params, carrier_power),
    }
}

/// `|J₁(β) − β/2| / J₁(β)`; zero at `β = 0`.
pub fn small_signal_discrepancy(beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    let j1 = bessel_j(1, beta);
    ((j1 - beta / 2.0) / j1).abs()
}

/// Two-line approximation `√P₀·β/2` at `±f_m`.
///
/// Refused once the first-order amplitude would be off by more than
/// [`SMALL_SIGNAL_TOLERANCE`] relative to the Bessel series.
pub fn modulate_small_signal(f_m: f64, params: &ModulationParams, carrier_power: f64) -> Result<SidebandSpectrum> {
    let beta = params.depth();
    let discrepancy = small_signal_discrepancy(beta);
    if discrepancy > SMALL_SIGNAL_TOLERANCE || !beta.is_finite() {
        return Err(Error::RegimeViolation {
            depth: beta,
            discrepancy,
        });
    }
    let mut lines = Vec::new();
    if beta != 0.0 {
        let amplitude = carrier_power.sqrt() * beta / 2.0;
        for s in [-1i32, 1] {
            lines.push(SidebandLine {
                offset: s as f64 * f_m,
                amplitude,
                order: s,
            });
        }
    }
    Ok(SidebandSpectrum {
        lines,
        carrier_power_leak: carrier_leak(params, carrier_power),
    })
}

/// Designed power transmission `D(f)` versus offset from the carrier,
/// linear between breakpoints and constant beyond the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterProfile {
    breakpoints: Vec<(f64, f64)>,
    symmetric: bool,
}

impl FilterProfile {
    pub fn new(breakpoints: Vec<(f64, f64)>, symmetric: bool) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::invalid("breakpoints", "profile needs at least one breakpoint"));
        }
        if breakpoints.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid("breakpoints", "offsets must be strictly increasing"));
        }
        if breakpoints
            .iter()
            .any(|&(f, t)| !f.is_finite() || !(0.0..=1.0).contains(&t))
        {
            return Err(Error::invalid("breakpoints", "transmissions must lie in [0, 1]"));
        }
        if symmetric && breakpoints[0].0 < 0.0 {
            return Err(Error::invalid("breakpoints", "symmetric profiles are given for offsets >= 0"));
        }
        Ok(Self {
            breakpoints,
            symmetric,
        })
    }

    /// Builds a profile from attenuation values in dB.
    pub fn from_attenuation_db(points: &[(f64, f64)], symmetric: bool) -> Result<Self> {
        let bp = points
            .iter()
            .map(|&(f, att)| (f, 10f64.powf(-att.abs() / 10.0)))
            .collect();
        Self::new(bp, symmetric)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Full table over negative and positive offsets.
    pub fn mirrored_breakpoints(&self) -> Vec<(f64, f64)> {
        if !self.symmetric {
            return self.breakpoints.clone();
        }
        let mut out: Vec<(f64, f64)> = self
            .breakpoints
            .iter()
            .rev()
            .filter(|(f, _)| *f > 0.0)
            .map(|&(f, t)| (-f, t))
            .collect();
        out.extend_from_slice(&self.breakpoints);
        out
    }

    pub fn evaluate(&self, offset: f64) -> f64 {
        let f = if self.symmetric { offset.abs() } else { offset };
        let bp = &self.breakpoints;
        if f <= bp[0].0 {
            return bp[0].1;
        }
        let last = bp[bp.len() - 1];
        if f >= last.0 {
            return last.1;
        }
        let i = bp.partition_point(|&(x, _)| x <= f);
        let (x0, y0) = bp[i - 1];
        let (x1, y1) = bp[i];
        y0 + (y1 - y0) * (f - x0) / (x1 - x0)
    }
}

/// Spacing of a designed ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampScale {
    /// Linear in power transmission.
    Linear,
    /// Linear in dB, tabulated finely enough to be smooth.
    Decibel,
}

/// Symmetric ramp: flat at `t_min` out to the zero-point frequency, rising
/// linearly to 1 at the frequency of displacement `range`, flat beyond.
pub fn design_symmetric_ramp(range: f64, config: &SystemConfig, t_min: f64) -> Result<FilterProfile> {
    design_ramp(range, config, t_min, RampScale::Linear)
}

pub fn design_ramp(range: f64, config: &SystemConfig, t_min: f64, scale: RampScale) -> Result<FilterProfile> {
    if !(range > 0.0) {
        return Err(Error::invalid("range", "ramp range must be positive"));
    }
    if !(t_min > 0.0 && t_min < 1.0) {
        return Err(Error::invalid("t_min", "floor transmission must lie in (0, 1)"));
    }
    let dr = stretch::dynamic_range(config)?;
    if range > dr * (1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            quantity: "filter range",
            value: range,
            lo: 0.0,
            hi: dr,
        });
    }
    let f_zero = stretch::displacement_to_frequency(0.0, config)?;
    let f_top = stretch::displacement_to_frequency(range.min(dr), config)?;
    let mut bp = vec![(0.0, t_min)];
    if f_zero > 0.0 {
        bp.push((f_zero, t_min));
    }
    match scale {
        RampScale::Linear => bp.push((f_top, 1.0)),
        RampScale::Decibel => {
            let n = 64;
            let db_min = 10.0 * t_min.log10();
            for i in 1..=n {
                let u = i as f64 / n as f64;
                bp.push((f_zero + u * (f_top - f_zero), 10f64.powf(db_min * (1.0 - u) / 10.0)));
            }
        }
    }
    FilterProfile::new(bp, true)
}

/// Offset range `(bottom, top)` of the rising part of a ramp profile.
pub fn ramp_edges(profile: &FilterProfile) -> Option<(f64, f64)> {
    let bp = profile.breakpoints();
    let lo = bp.iter().rposition(|&(_, t)| t <= bp[0].1)?;
    let hi = bp.iter().position(|&(_, t)| t >= bp[bp.len() - 1].1)?;
    (hi > lo).then(|| (bp[lo].0, bp[hi].0))
}

/// Unit-area samples of the envelope power spectrum `|A(f)|²`.
fn spectral_kernel(envelope: &Envelope) -> Vec<(f64, f64)> {
    let fwhm = envelope.duration_fwhm;
    let (nodes, span, density): (usize, f64, fn(&Envelope, f64) -> f64) = match envelope.shape {
        EnvelopeShape::Gaussian | EnvelopeShape::SuperGaussian { order: 1 } => {
            let sigma_f = gaussian_spectral_sigma(fwhm);
            (801, 8.0 * sigma_f, |e, f| {
                let s = gaussian_spectral_sigma(e.duration_fwhm);
                (-0.5 * (f / s) * (f / s)).exp()
            })
        }
        EnvelopeShape::SuperGaussian { .. } => (1601, 20.0 / fwhm, numeric_power_spectrum),
    };
    let step = 2.0 * span / (nodes - 1) as f64;
    let mut kernel: Vec<(f64, f64)> = (0..nodes)
        .map(|i| {
            let f = -span + i as f64 * step;
            (f, density(envelope, f))
        })
        .collect();
    let total: f64 = kernel.iter().map(|k| k.1).sum();
    for k in kernel.iter_mut() {
        k.1 /= total;
    }
    kernel
}

/// For `a(t) = exp(−t²/2σ²)`, `|A(f)|² ∝ exp(−f²/2σ_f²)` with `σ_f = 1/(2√2πσ)`.
fn gaussian_spectral_sigma(fwhm: f64) -> f64 {
    let sigma_t = fwhm / (2.0 * (2.0 * LN_2).sqrt());
    1.0 / (2.0 * core::f64::consts::SQRT_2 * PI * sigma_t)
}

/// `|∫ a(t) cos(2πft) dt|²` by composite Simpson over the envelope support.
fn numeric_power_spectrum(envelope: &Envelope, f: f64) -> f64 {
    let m = envelope.order() as f64;
    let half = 0.5 * envelope.duration_fwhm * (40.0 / LN_2).powf(1.0 / (2.0 * m));
    let n = 2000;
    let h = half / n as f64;
    let shape = Envelope {
        center: 0.0,
        ..*envelope
    };
    let mut acc = 0.0;
    for i in 0..=n {
        let t = i as f64 * h;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * shape.value(t) * (2.0 * PI * f * t).cos();
    }
    let a = 2.0 * acc * h / 3.0;
    a * a
}

/// Filter profile smoothed by the envelope power spectrum,
/// `T(f) = D(f) ⊗ |A(f)|²`, with the kernel normalized to unit area.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveFilter {
    profile: FilterProfile,
    kernel: Vec<(f64, f64)>,
}

impl EffectiveFilter {
    pub fn new(profile: FilterProfile, envelope: &Envelope) -> Self {
        Self {
            kernel: spectral_kernel(envelope),
            profile,
        }
    }

    pub fn profile(&self) -> &FilterProfile {
        &self.profile
    }

    pub fn transmission(&self, offset: f64) -> f64 {
        self.kernel
            .iter()
            .map(|&(nu, w)| w * self.profile.evaluate(offset - nu))
            .sum()
    }
}

/// `T(offset)` for a single evaluation.
pub fn effective_transmission(profile: &FilterProfile, envelope: &Envelope, offset: f64) -> f64 {
    EffectiveFilter::new(profile.clone(), envelope).transmission(offset)
}

/// Detection and reference channel records.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    pub det: Waveform,
    pub reference: Waveform,
    /// `c₁ℜ₁ / c₂ℜ₂`
    pub k: f64,
}

impl ChannelPair {
    pub fn new(det: Waveform, reference: Waveform, k: f64) -> Result<Self> {
        if det.len() != reference.len() || det.sample_rate() != reference.sample_rate() {
            return Err(Error::invalid("channels", "det and ref must share sample rate and length"));
        }
        Ok(Self { det, reference, k })
    }
}

/// Channel sampling of one repetition period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSampling {
    pub sample_rate: f64,
    pub period: f64,
}

impl ChannelSampling {
    pub fn samples_per_period(&self) -> usize {
        (self.sample_rate * self.period).round().max(2.0) as usize
    }

    /// Unit-peak-envelope pulse `a²(t)` of a periodic train, passed through a
    /// single-pole low-pass of the given bandwidth and sampled over one
    /// period centred on the pulse.
    pub fn pulse_template(&self, envelope: &Envelope, bandwidth: f64) -> Vec<f64> {
        let n = self.samples_per_period();
        let oversample = 32;
        let fine_dt = 1.0 / (self.sample_rate * oversample as f64);
        let fine_n = n * oversample;
        let shape = Envelope {
            center: 0.0,
            ..*envelope
        };
        let train = |t: f64| -> f64 {
            (-3..=3)
                .map(|k| {
                    let a = shape.value(t - k as f64 * self.period);
                    a * a
                })
                .sum()
        };
        let alpha = 1.0 - (-2.0 * PI * bandwidth * fine_dt).exp();
        let start = -0.5 * self.period;
        // one period of warm-up so the filter state is periodic
        let mut y = train(start - self.period);
        for i in 0..fine_n {
            y += alpha * (train(start - self.period + i as f64 * fine_dt) - y);
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..fine_n {
            if i % oversample == 0 {
                out.push(y);
            }
            y += alpha * (train(start + i as f64 * fine_dt) - y);
        }
        out
    }
}

/// Envelope-detected outputs of both channels for one pulse period.
///
/// `det(t) = G·c₁ℜ₁·a²(t)·Σ P_line·T(offset)`, `ref(t) = G·c₂ℜ₂·a²(t)·Σ P_line`
/// with `G` the receiver transimpedance and `a²` low-passed at the PD2/PD3
/// bandwidth. The residual carrier reaches both channels; in the detection
/// channel it sees `T(0)`. Envelope detection assumes the PD2/PD3 bandwidth
/// is far below `f_m`.
pub fn detect_channels(
    spectrum: &SidebandSpectrum,
    envelope: &Envelope,
    filter: &EffectiveFilter,
    processor: &ProcessorConfig,
    sampling: &ChannelSampling,
) -> Result<ChannelPair> {
    let template = sampling.pulse_template(envelope, processor.pd23_bandwidth);
    detect_with_template(spectrum, &template, filter, processor, sampling)
}

/// [`detect_channels`] with a precomputed [`ChannelSampling::pulse_template`].
pub fn detect_with_template(
    spectrum: &SidebandSpectrum,
    template: &[f64],
    filter: &EffectiveFilter,
    processor: &ProcessorConfig,
    sampling: &ChannelSampling,
) -> Result<ChannelPair> {
    let (det_power, ref_power) = channel_powers(spectrum, filter);
    let g_det = processor.transimpedance * processor.coupling_det * processor.responsivity_det * det_power;
    let g_ref = processor.transimpedance * processor.coupling_ref * processor.responsivity_ref * ref_power;
    let t0 = -0.5 * sampling.period;
    let det = Waveform::new(template.iter().map(|h| g_det * h).collect(), sampling.sample_rate, t0)?;
    let reference = Waveform::new(template.iter().map(|h| g_ref * h).collect(), sampling.sample_rate, t0)?;
    ChannelPair::new(det, reference, processor.k())
}

/// Optical power reaching the detection and reference photodiodes, per unit
/// envelope.
pub fn channel_powers(spectrum: &SidebandSpectrum, filter: &EffectiveFilter) -> (f64, f64) {
    let det = spectrum
        .lines
        .iter()
        .map(|l| l.power() * filter.transmission(l.offset))
        .sum::<f64>()
        + spectrum.carrier_power_leak * filter.transmission(0.0);
    (det, spectrum.total_power())
}

/// Ratio of time-integrated channel energies over the first `window` seconds.
pub fn measure_ratio(pair: &ChannelPair, window: f64, floor: f64) -> Result<f64> {
    let n = (window * pair.det.sample_rate()).round() as usize;
    if n == 0 || n > pair.det.len() {
        return Err(Error::invalid("window", "window must cover between one sample and the whole record"));
    }
    let dt = pair.det.dt();
    let e_det: f64 = pair.det.samples()[..n].iter().sum::<f64>() * dt;
    let e_ref: f64 = pair.reference.samples()[..n].iter().sum::<f64>() * dt;
    if !(e_ref > floor) {
        return Err(Error::LowSignal { energy: e_ref, floor });
    }
    Ok(e_det / e_ref)
}

/// `r(f_m) = k·T(f_c + f_m)` for `f_m` inside `band`.
pub fn acf(f_m: f64, filter: &EffectiveFilter, k: f64, band: (f64, f64)) -> Result<f64> {
    let slack = 1e-9 * band.1.abs();
    if f_m < band.0 - slack || f_m > band.1 + slack {
        return Err(Error::OutOfRange {
            quantity: "microwave frequency",
            value: f_m,
            lo: band.0,
            hi: band.1,
        });
    }
    Ok(k * filter.transmission(f_m))
}
