//! Physical parameters of the ranging system and the quantities derived from
//! them.
//!
//! Every field is stored in SI. Fiber length never appears on its own: the
//! dispersion products `D·L`, `β₂L` and `β₃L` are all the equations need.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::dsp::AdcSpec;
use crate::{stretch, Error, Result, SPEED_OF_LIGHT};

/// Femtosecond source after the spectral slicing filter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LaserSource {
    /// Pulse repetition rate (Hz).
    pub repetition_rate: f64,
    /// Transform-limited pulse width (s).
    pub pulse_width: f64,
    /// Centre wavelength of the filtered slice (m).
    pub center_wavelength: f64,
    /// Width of the filtered slice (m).
    pub filtered_spectral_width: f64,
    /// Average optical power (W).
    pub average_power: f64,
}

impl LaserSource {
    pub fn period(&self) -> f64 {
        1.0 / self.repetition_rate
    }
}

/// Dispersion of the stretching fiber, stored as length products.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FiberDispersion {
    /// `D·L` (s/m).
    pub total_dispersion: f64,
    /// `β₂L` (s²).
    pub beta2_l: f64,
    /// `β₃L` (s³).
    pub beta3_l: f64,
}

impl FiberDispersion {
    /// Builds the dispersion record, deriving `β₂L` from `D·L` at `wavelength`.
    pub fn from_total_dispersion(total_dispersion: f64, wavelength: f64, beta3_l: f64) -> Result<Self> {
        Ok(Self {
            total_dispersion,
            beta2_l: derive_beta2_l(total_dispersion, wavelength)?,
            beta3_l,
        })
    }
}

/// Microwave-photonic processor: carrier laser, modulator, electrical
/// band-pass filter and the two detection channels.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProcessorConfig {
    /// Carrier wavelength (m).
    pub carrier_wavelength: f64,
    /// Optical power into the modulator (W).
    pub carrier_power: f64,
    /// Modulator half-wave voltage (V).
    pub half_wave_voltage: f64,
    /// Microwave drive amplitude at zero displacement (V).
    pub drive_amplitude: f64,
    /// Modulator extinction ratio (dB); `None` is an ideal null.
    pub extinction_ratio_db: Option<f64>,
    pub bpf_low: f64,
    pub bpf_high: f64,
    pub modulator_bandwidth: f64,
    pub pd1_bandwidth: f64,
    /// Bandwidth of the low-speed channel detectors PD2/PD3 (Hz).
    pub pd23_bandwidth: f64,
    pub coupling_det: f64,
    pub coupling_ref: f64,
    /// A/W
    pub responsivity_det: f64,
    /// A/W
    pub responsivity_ref: f64,
    /// Transimpedance of the channel receivers (Ω), converting photocurrent
    /// to the voltage seen by the channel ADC.
    pub transimpedance: f64,
}

impl ProcessorConfig {
    /// Channel gain ratio `k = c₁ℜ₁ / c₂ℜ₂`.
    pub fn k(&self) -> f64 {
        (self.coupling_det * self.responsivity_det) / (self.coupling_ref * self.responsivity_ref)
    }

    /// Modulation depth `β = πV_m/V_π` for a given drive amplitude.
    pub fn depth_for(&self, drive_amplitude: f64) -> f64 {
        PI * drive_amplitude / self.half_wave_voltage
    }
}

/// Interferometer delay setting and stage position.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageScenario {
    /// Fixed arm imbalance `τ₀` that sets the zero-point microwave frequency (s).
    pub reference_delay: f64,
    /// Retroreflector displacement from the zero point (m).
    pub displacement: f64,
    /// Relative drive-amplitude loss per metre of displacement.
    pub coupling_decay_per_meter: f64,
}

impl StageScenario {
    /// Round-trip delay `τ = τ₀ + 2x/c`.
    pub fn total_delay(&self) -> f64 {
        self.reference_delay + 2.0 * self.displacement / SPEED_OF_LIGHT
    }

    pub fn at(&self, displacement: f64) -> Self {
        Self {
            displacement,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemConfig {
    pub source: LaserSource,
    pub fiber: FiberDispersion,
    pub processor: ProcessorConfig,
    pub stage: StageScenario,
    /// Direct-digitization capture of the microwave pulse.
    pub adc_baseline: AdcSpec,
    /// Capture of the two low-speed channels.
    pub adc_channels: AdcSpec,
}

/// `β₂L = −D·L·λ²/(2πc)`.
pub fn derive_beta2_l(total_dispersion: f64, wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::invalid("wavelength", "must be positive and finite"));
    }
    Ok(-total_dispersion * wavelength * wavelength / (2.0 * PI * SPEED_OF_LIGHT))
}

/// Usable microwave span `Δf`: from the band-pass low cut to the slowest of
/// PD1, modulator and band-pass high cut.
pub fn effective_oe_bandwidth(config: &SystemConfig) -> Result<f64> {
    let p = &config.processor;
    let top = p.pd1_bandwidth.min(p.modulator_bandwidth).min(p.bpf_high);
    let span = top - p.bpf_low;
    if !(span > 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "empty OE band: device limit {top:.4e} Hz does not exceed band-pass low cut {:.4e} Hz",
            p.bpf_low
        )));
    }
    Ok(span)
}

/// Duration of the stretched pulse, `|D·L|·Δλ`.
pub fn stretch_duration(config: &SystemConfig) -> f64 {
    config.fiber.total_dispersion.abs() * config.source.filtered_spectral_width
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Constraint {
    NonPositiveSourceParameter,
    ZeroGroupDelayDispersion,
    InconsistentGroupDelayDispersion,
    InvertedBandPass,
    NonPositiveBandwidth,
    InvalidChannelGain,
    InvalidModulator,
    EmptyOeBand,
    PulseOverlap,
    ZeroPointOutOfBand,
    InvalidStage,
    InvalidAdc,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Violation {
    pub constraint: Constraint,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub passed: bool,
    pub stretch_duration_s: f64,
    pub period_s: f64,
    pub oe_bandwidth_hz: Option<f64>,
    pub zero_point_frequency_hz: Option<f64>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, constraint: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == constraint)
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

/// Checks every physical-consistency constraint and lists all violations.
pub fn validate_config(config: &SystemConfig) -> ValidationReport {
    let mut violations = Vec::new();
    let mut fail = |constraint, message: String| violations.push(Violation { constraint, message });

    let s = &config.source;
    for (name, v) in [
        ("repetition_rate", s.repetition_rate),
        ("pulse_width", s.pulse_width),
        ("center_wavelength", s.center_wavelength),
        ("filtered_spectral_width", s.filtered_spectral_width),
        ("average_power", s.average_power),
    ] {
        if !positive(v) {
            fail(Constraint::NonPositiveSourceParameter, format!("{name} = {v:e} must be positive"));
        }
    }

    let f = &config.fiber;
    if f.beta2_l == 0.0 || !f.beta2_l.is_finite() {
        fail(Constraint::ZeroGroupDelayDispersion, "beta2_l must be finite and nonzero".into());
    }
    if let Ok(expected) = derive_beta2_l(f.total_dispersion, s.center_wavelength) {
        let tol = 1e-9 * expected.abs().max(f64::MIN_POSITIVE);
        if (f.beta2_l - expected).abs() > tol {
            fail(
                Constraint::InconsistentGroupDelayDispersion,
                format!("beta2_l = {:e} s^2 but D·L at the source wavelength gives {expected:e} s^2", f.beta2_l),
            );
        }
    }
    if !f.beta3_l.is_finite() {
        fail(Constraint::InconsistentGroupDelayDispersion, "beta3_l must be finite".into());
    }

    let p = &config.processor;
    if !(p.bpf_low < p.bpf_high) {
        fail(
            Constraint::InvertedBandPass,
            format!("band-pass low cut {:e} Hz must be below high cut {:e} Hz", p.bpf_low, p.bpf_high),
        );
    }
    for (name, v) in [
        ("bpf_low", p.bpf_low),
        ("modulator_bandwidth", p.modulator_bandwidth),
        ("pd1_bandwidth", p.pd1_bandwidth),
        ("pd23_bandwidth", p.pd23_bandwidth),
    ] {
        if !positive(v) {
            fail(Constraint::NonPositiveBandwidth, format!("{name} = {v:e} Hz must be positive"));
        }
    }
    let k = p.k();
    if !positive(k) || !positive(p.transimpedance) {
        fail(
            Constraint::InvalidChannelGain,
            format!("channel gain ratio k = {k:e} and transimpedance must be finite and positive"),
        );
    }
    let er_ok = p.extinction_ratio_db.is_none_or(|er| er > 0.0 && !er.is_nan());
    if !positive(p.carrier_power) || !positive(p.half_wave_voltage) || !(p.drive_amplitude >= 0.0) || !er_ok {
        fail(
            Constraint::InvalidModulator,
            "carrier power and half-wave voltage must be positive, drive amplitude non-negative, extinction ratio positive".into(),
        );
    }

    let oe = match effective_oe_bandwidth(config) {
        Ok(v) => Some(v),
        Err(e) => {
            fail(Constraint::EmptyOeBand, format!("{e}"));
            None
        }
    };

    let duration = stretch_duration(config);
    let period = s.period();
    if !(duration < period) {
        fail(
            Constraint::PulseOverlap,
            format!("stretched pulse {duration:.4e} s does not fit in the repetition period {period:.4e} s"),
        );
    }

    let st = &config.stage;
    if !(st.displacement >= 0.0) || !(st.coupling_decay_per_meter >= 0.0) || !st.reference_delay.is_finite() {
        fail(
            Constraint::InvalidStage,
            "displacement and coupling decay must be non-negative, reference delay finite".into(),
        );
    }

    let zero_point = if f.beta2_l != 0.0 && f.beta2_l.is_finite() {
        Some(stretch::center_frequency_for_delay(st.reference_delay, f))
    } else {
        None
    };
    if let (Some(f0), Some(span)) = (zero_point, oe) {
        let (lo, hi) = (p.bpf_low, p.bpf_low + span);
        if !(f0 >= lo * (1.0 - 1e-9) && f0 <= hi * (1.0 + 1e-9)) {
            fail(
                Constraint::ZeroPointOutOfBand,
                format!("zero-point frequency {f0:.4e} Hz outside the OE band [{lo:.4e}, {hi:.4e}] Hz"),
            );
        }
    }

    for (name, adc) in [("adc_baseline", &config.adc_baseline), ("adc_channels", &config.adc_channels)] {
        if let Err(e) = adc.validate() {
            fail(Constraint::InvalidAdc, format!("{name}: {e}"));
        }
    }

    violations.sort_by_key(|v| v.constraint);
    ValidationReport {
        passed: violations.is_empty(),
        stretch_duration_s: duration,
        period_s: period,
        oe_bandwidth_hz: oe,
        zero_point_frequency_hz: zero_point,
        violations,
    }
}

impl SystemConfig {
    /// Fails with the full violation list when the configuration is invalid.
    pub fn validated(&self) -> Result<&Self> {
        let report = validate_config(self);
        if report.passed {
            Ok(self)
        } else {
            let msgs: Vec<String> = report.violations.into_iter().map(|v| v.message).collect();
            Err(Error::InvalidConfiguration(msgs.join("; ")))
        }
    }

    /// The reference configuration of the demonstrator (50 MHz source,
    /// −2298 ps/nm stretching fiber, 2.3–26.5 GHz band-pass, 2.3 GHz zero
    /// point). Unreported device values (carrier power, `V_π`, receiver
    /// gains) are plausible placeholders.
    pub fn reference() -> Self {
        let center_wavelength = 1553e-9;
        let total_dispersion = -2298.0 * 1e-3; // ps/nm -> s/m
        let fiber = FiberDispersion::from_total_dispersion(total_dispersion, center_wavelength, 0.0)
            .expect("positive wavelength");
        let reference_delay = stretch::reference_delay_for_frequency(2.3e9, &fiber).expect("reachable zero point");
        Self {
            source: LaserSource {
                repetition_rate: 50e6,
                pulse_width: 93e-15,
                center_wavelength,
                filtered_spectral_width: 8.2e-9,
                average_power: 30e-3,
            },
            fiber,
            processor: ProcessorConfig {
                carrier_wavelength: 1548.495e-9,
                carrier_power: 20e-3,
                half_wave_voltage: 5.0,
                drive_amplitude: 0.2 * 5.0 / PI,
                extinction_ratio_db: None,
                bpf_low: 2.3e9,
                bpf_high: 26.5e9,
                modulator_bandwidth: 20e9,
                pd1_bandwidth: 25e9,
                pd23_bandwidth: 350e6,
                coupling_det: 0.5,
                coupling_ref: 0.5,
                responsivity_det: 0.85,
                responsivity_ref: 0.8,
                transimpedance: 4000.0,
            },
            stage: StageScenario {
                reference_delay,
                displacement: 0.0,
                coupling_decay_per_meter: 0.5,
            },
            adc_baseline: AdcSpec {
                sample_rate: 80e9,
                bits: 8,
                full_scale: 1.0,
            },
            adc_channels: AdcSpec {
                sample_rate: 1.25e9,
                bits: 12,
                full_scale: 1.0,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta2_from_total_dispersion() {
        // -D·L·λ²/(2πc) evaluated by hand: 2.298 · (1553e-9)² / (2π · 299792458)
        let expected = 2.298 * 1553e-9 * 1553e-9 / (2.0 * PI * 299_792_458.0);
        let b2 = derive_beta2_l(-2.298, 1553e-9).unwrap();
        assert!((b2 - expected).abs() < 1e-35);
        assert!((b2 - 2.942e-21).abs() / 2.942e-21 < 1e-3);

        let b2c = derive_beta2_l(-2.298, 1548.5e-9).unwrap();
        assert!((b2c - 2.925e-21).abs() / 2.925e-21 < 1e-3);

        assert_eq!(derive_beta2_l(0.0, 1553e-9).unwrap(), 0.0);
        assert!(matches!(derive_beta2_l(-2.298, 0.0), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn beta2_scaling_is_exact() {
        let base = derive_beta2_l(-1.5, 1e-6).unwrap();
        assert_eq!(derive_beta2_l(-3.0, 1e-6).unwrap(), 2.0 * base);
        assert_eq!(derive_beta2_l(-1.5, 2e-6).unwrap(), 4.0 * base);
        assert!(derive_beta2_l(1.5, 1e-6).unwrap() < 0.0);
    }

    #[test]
    fn oe_bandwidth_takes_slowest_device() {
        let mut cfg = SystemConfig::reference();
        assert!((effective_oe_bandwidth(&cfg).unwrap() - 17.7e9).abs() < 1.0);
        cfg.processor.pd1_bandwidth = 10e9;
        assert!((effective_oe_bandwidth(&cfg).unwrap() - 7.7e9).abs() < 1.0);
        cfg.processor.pd1_bandwidth = 2.3e9;
        cfg.processor.modulator_bandwidth = 2.3e9;
        cfg.processor.bpf_high = 2.3e9;
        assert!(effective_oe_bandwidth(&cfg).is_err());
    }

    #[test]
    fn stretch_duration_products() {
        let cfg = SystemConfig::reference();
        assert!((stretch_duration(&cfg) - 18.8436e-9).abs() < 1e-13);
        let mut c = cfg;
        c.fiber.total_dispersion = -1.0; // 1000 ps/nm
        c.source.filtered_spectral_width = 10e-9;
        assert!((stretch_duration(&c) - 10e-9).abs() < 1e-20);
        c.source.filtered_spectral_width = 0.0;
        assert_eq!(stretch_duration(&c), 0.0);
    }

    #[test]
    fn reference_passes_validation() {
        let cfg = SystemConfig::reference();
        let report = validate_config(&cfg);
        assert!(report.passed, "{:?}", report.violations);
        assert!((report.zero_point_frequency_hz.unwrap() - 2.3e9).abs() < 1e-3);
        assert_eq!(report, validate_config(&cfg));
    }

    #[test]
    fn doubled_repetition_rate_overlaps() {
        let mut cfg = SystemConfig::reference();
        cfg.source.repetition_rate = 100e6;
        let report = validate_config(&cfg);
        assert!(!report.passed);
        assert!(report.has(Constraint::PulseOverlap));
    }

    #[test]
    fn zero_reference_delay_puts_zero_point_below_band() {
        let mut cfg = SystemConfig::reference();
        cfg.stage.reference_delay = 0.0;
        let report = validate_config(&cfg);
        assert!(report.has(Constraint::ZeroPointOutOfBand));
        assert_eq!(report.zero_point_frequency_hz, Some(0.0));
    }

    #[test]
    fn every_violation_is_listed() {
        let mut cfg = SystemConfig::reference();
        cfg.source.repetition_rate = 100e6;
        cfg.processor.bpf_high = 1e9;
        cfg.adc_channels.bits = 2;
        let report = validate_config(&cfg);
        assert!(report.has(Constraint::PulseOverlap));
        assert!(report.has(Constraint::InvertedBandPass));
        assert!(report.has(Constraint::InvalidAdc));
        assert!(report.has(Constraint::EmptyOeBand));
    }
}
