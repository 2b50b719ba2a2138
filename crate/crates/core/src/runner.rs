//! End-to-end experiments: noisy two-channel measurements, calibration runs,
//! ranging campaigns and the filter trade-off study.
//!
//! Every (displacement, repeat) cell draws from its own random stream keyed
//! by `(seed, domain, cell index)`, so results do not depend on how cells
//! are scheduled across workers.

#[allow(unused_imports)] // std, when linked, shadows these with inherent methods
use num_traits::Float;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::calib::{self, CalibrationCurve, CalibrationPoint};
use crate::dsp::{self, AdcSpec, DataRateReport, EstimateMethod, FrequencyEstimate};
use crate::mwphotonics::{
    self, design_symmetric_ramp, detect_with_template, modulate_exact, ChannelPair, ChannelSampling,
    EffectiveFilter, FilterProfile, ModulationParams,
};
use crate::stretch::{self, Envelope, TimeGrid, Waveform};
use crate::sysmodel::SystemConfig;
use crate::{Error, Result};

const DOMAIN_CAMPAIGN: u64 = 0x43_414d_5041_4947;
const DOMAIN_CALIBRATION: u64 = 0x43_414c_4942_5241;
const DOMAIN_DRIFT: u64 = 0x44_5249_4654;
const DOMAIN_BASELINE: u64 = 0x42_4153_454c;

/// Pulses averaged per calibration point (200 µs at 50 MHz).
pub const CALIBRATION_PULSES: usize = 10_000;

/// Noise terms of a measurement. Channel noise is per ADC sample and given
/// relative to the nominal reference-channel pulse peak; jitters are relative
/// fluctuations drawn once per measurement; drift is an additive
/// transmission offset drawn once per displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseModel {
    pub det_noise_rms: f64,
    pub ref_noise_rms: f64,
    pub power_jitter_rms: f64,
    pub drive_jitter_rms: f64,
    pub drift_rms_per_point: f64,
    pub seed: u64,
    /// Quantize the channel records with the channel ADC.
    #[cfg_attr(feature = "serde", serde(default = "default_true"))]
    pub adc_quantization: bool,
}

#[cfg(feature = "serde")]
fn default_true() -> bool {
    true
}

impl NoiseModel {
    /// No stochastic terms; channel quantization still applies.
    pub fn quiet(seed: u64) -> Self {
        Self {
            det_noise_rms: 0.0,
            ref_noise_rms: 0.0,
            power_jitter_rms: 0.0,
            drive_jitter_rms: 0.0,
            drift_rms_per_point: 0.0,
            seed,
            adc_quantization: true,
        }
    }

    /// Reference profile: puts the 15 mm filter's per-point deviation in the
    /// ten-micrometre range.
    pub fn reference() -> Self {
        Self {
            det_noise_rms: 0.03,
            ref_noise_rms: 0.03,
            power_jitter_rms: 0.02,
            drive_jitter_rms: 0.01,
            drift_rms_per_point: 1e-3,
            seed: 20_210_517,
            adc_quantization: true,
        }
    }

    /// Every rms term multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            det_noise_rms: self.det_noise_rms * factor,
            ref_noise_rms: self.ref_noise_rms * factor,
            power_jitter_rms: self.power_jitter_rms * factor,
            drive_jitter_rms: self.drive_jitter_rms * factor,
            drift_rms_per_point: self.drift_rms_per_point * factor,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.det_noise_rms,
            self.ref_noise_rms,
            self.power_jitter_rms,
            self.drive_jitter_rms,
            self.drift_rms_per_point,
        ];
        if all.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("noise", "rms values must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Independent, reproducible random stream for one cell.
pub fn cell_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Maps cell indices to results. Implementations must return results in
/// index order.
pub trait Executor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs cells one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Pipeline stage at which a measurement failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Stage {
    Mapping,
    Detection,
    Digitization,
    Ratio,
    Retrieval,
    Fit,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Mapping => "mapping",
            Stage::Detection => "detection",
            Stage::Digitization => "digitization",
            Stage::Ratio => "ratio",
            Stage::Retrieval => "retrieval",
            Stage::Fit => "fit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{} stage: {error}", stage.name())]
pub struct MeasurementError {
    pub stage: Stage,
    pub error: Error,
}

fn at(stage: Stage) -> impl FnOnce(Error) -> MeasurementError {
    move |error| MeasurementError { stage, error }
}

/// Everything about the instrument that does not change between
/// measurements: configuration, envelope, designed filter and the sampled
/// channel pulse shape.
#[derive(Debug, Clone)]
pub struct SignalChain {
    config: SystemConfig,
    envelope: Envelope,
    filter: EffectiveFilter,
    sampling: ChannelSampling,
    template: Vec<f64>,
    nominal_ref_peak: f64,
    channel_adc: AdcSpec,
    low_signal_fraction: f64,
}

impl SignalChain {
    pub fn new(config: &SystemConfig, envelope: Envelope, profile: FilterProfile) -> Result<Self> {
        config.validated()?;
        let sampling = ChannelSampling {
            sample_rate: config.adc_channels.sample_rate,
            period: config.source.period(),
        };
        let template = sampling.pulse_template(&envelope, config.processor.pd23_bandwidth);
        let p = &config.processor;
        let nominal = modulate_exact(1.0, &ModulationParams::from_processor(p), p.carrier_power);
        let peak = template.iter().cloned().fold(0.0, f64::max);
        let nominal_ref_peak = p.transimpedance * p.coupling_ref * p.responsivity_ref * nominal.total_power() * peak;
        Ok(Self {
            config: *config,
            filter: EffectiveFilter::new(profile, &envelope),
            envelope,
            sampling,
            template,
            nominal_ref_peak,
            channel_adc: config.adc_channels,
            low_signal_fraction: 1e-3,
        })
    }

    /// Chain with the default envelope and a linear symmetric ramp.
    pub fn with_ramp(config: &SystemConfig, range: f64, t_min: f64) -> Result<Self> {
        let envelope = Envelope::default_for(config)?;
        let profile = design_symmetric_ramp(range, config, t_min)?;
        Self::new(config, envelope, profile)
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn filter(&self) -> &EffectiveFilter {
        &self.filter
    }

    pub fn nominal_ref_peak(&self) -> f64 {
        self.nominal_ref_peak
    }

    /// Reference energy below this fraction of nominal is a low-signal failure.
    pub fn with_low_signal_fraction(mut self, fraction: f64) -> Self {
        self.low_signal_fraction = fraction;
        self
    }

    /// Noiseless ratio `k·T(f(x))` predicted by the ACF.
    pub fn predicted_transmission(&self, x: f64) -> Result<f64> {
        let f = stretch::displacement_to_frequency(x, &self.config)?;
        mwphotonics::acf(f, &self.filter, self.config.processor.k(), stretch::oe_band(&self.config)?)
    }

    pub fn update_rate(&self, n_pulses: usize) -> f64 {
        self.config.source.repetition_rate / n_pulses as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Measurement {
    /// m
    pub displacement: f64,
    pub frequency: f64,
    pub transmission: f64,
    pub retrieved_mm: Option<f64>,
}

/// Additive transmission drift for the point at `x`, constant across repeats.
pub fn drift_offset(noise: &NoiseModel, x: f64) -> f64 {
    if noise.drift_rms_per_point == 0.0 {
        return 0.0;
    }
    let mut rng = cell_rng(noise.seed, DOMAIN_DRIFT, x.to_bits());
    noise.drift_rms_per_point * normal(&mut rng)
}

/// One averaged transmission measurement at displacement `x` (m), inverted
/// through `curve` when one is given. `rng` supplies this cell's randomness.
pub fn simulate_measurement(
    chain: &SignalChain,
    x: f64,
    curve: Option<&CalibrationCurve>,
    noise: &NoiseModel,
    n_pulses: usize,
    rng: &mut ChaCha8Rng,
) -> core::result::Result<Measurement, MeasurementError> {
    if n_pulses == 0 {
        return Err(MeasurementError {
            stage: Stage::Digitization,
            error: Error::invalid("n_pulses", "must be at least 1"),
        });
    }
    let cfg = &chain.config;
    let p = &cfg.processor;
    let frequency = stretch::displacement_to_frequency(x, cfg).map_err(at(Stage::Mapping))?;

    let power_factor = (1.0 + noise.power_jitter_rms * normal(rng)).max(0.0);
    let drive_factor =
        (1.0 - cfg.stage.coupling_decay_per_meter * x).max(0.0) * (1.0 + noise.drive_jitter_rms * normal(rng));
    let params = ModulationParams {
        drive_amplitude: p.drive_amplitude * drive_factor,
        ..ModulationParams::from_processor(p)
    };
    let spectrum = modulate_exact(frequency, &params, p.carrier_power * power_factor);
    let pulse = detect_with_template(&spectrum, &chain.template, &chain.filter, p, &chain.sampling)
        .map_err(at(Stage::Detection))?;

    let per = chain.template.len();
    let sigma_det = noise.det_noise_rms * chain.nominal_ref_peak;
    let sigma_ref = noise.ref_noise_rms * chain.nominal_ref_peak;
    let adc = &chain.channel_adc;
    let mut det = Vec::with_capacity(per * n_pulses);
    let mut reference = Vec::with_capacity(per * n_pulses);
    for _ in 0..n_pulses {
        for (d, r) in pulse.det.samples().iter().zip(pulse.reference.samples()) {
            let mut vd = *d;
            let mut vr = *r;
            if sigma_det > 0.0 {
                vd += sigma_det * normal(rng);
            }
            if sigma_ref > 0.0 {
                vr += sigma_ref * normal(rng);
            }
            if noise.adc_quantization {
                vd = adc.quantize(vd);
                vr = adc.quantize(vr);
            }
            det.push(vd);
            reference.push(vr);
        }
    }
    let t0 = pulse.det.t0();
    let rate = chain.sampling.sample_rate;
    let window = ChannelPair::new(
        Waveform::new(det, rate, t0).map_err(at(Stage::Digitization))?,
        Waveform::new(reference, rate, t0).map_err(at(Stage::Digitization))?,
        pulse.k,
    )
    .map_err(at(Stage::Digitization))?;

    let nominal_energy = chain.nominal_ref_peak * chain.template.iter().sum::<f64>()
        / chain.template.iter().cloned().fold(0.0, f64::max)
        * n_pulses as f64
        / rate;
    let floor = chain.low_signal_fraction * nominal_energy;
    let ratio = mwphotonics::measure_ratio(&window, (per * n_pulses) as f64 / rate, floor).map_err(at(Stage::Ratio))?;
    let transmission = ratio + drift_offset(noise, x);

    let retrieved_mm = match curve {
        Some(c) => Some(calib::invert(c, transmission).map_err(at(Stage::Retrieval))?),
        None => None,
    };
    Ok(Measurement {
        displacement: x,
        frequency,
        transmission,
        retrieved_mm,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationRun {
    pub curve: CalibrationCurve,
    pub points: Vec<CalibrationPoint>,
    pub residuals: Vec<f64>,
    pub max_abs_residual: f64,
    pub pulses_per_point: usize,
}

/// `n` evenly spaced displacements on `[0, range_mm]`, endpoints included.
pub fn uniform_grid(range_mm: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![0.0; n];
    }
    (0..n).map(|i| range_mm * i as f64 / (n - 1) as f64).collect()
}

/// `n` interior displacements `range·i/(n+1)`, `i = 1..=n`.
pub fn interior_grid(range_mm: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| range_mm * i as f64 / (n + 1) as f64).collect()
}

/// Measures the transmission at each grid point (mm) and fits the cubic.
pub fn run_calibration<E: Executor>(
    chain: &SignalChain,
    noise: &NoiseModel,
    grid_mm: &[f64],
    n_pulses: usize,
    executor: &E,
) -> core::result::Result<CalibrationRun, MeasurementError> {
    noise.validate().map_err(at(Stage::Mapping))?;
    if grid_mm.len() < 4 {
        return Err(MeasurementError {
            stage: Stage::Fit,
            error: Error::Fit(format!("{} grid points; a cubic needs 4", grid_mm.len())),
        });
    }
    let cells = executor.map(grid_mm.len(), |i| {
        let mut rng = cell_rng(noise.seed, DOMAIN_CALIBRATION, i as u64);
        simulate_measurement(chain, grid_mm[i] * 1e-3, None, noise, n_pulses, &mut rng)
    });
    let mut points = Vec::with_capacity(cells.len());
    for (x, cell) in grid_mm.iter().zip(cells) {
        let m = cell?;
        points.push(CalibrationPoint::new(*x, m.transmission));
    }
    let curve = calib::fit_cubic(&points).map_err(at(Stage::Fit))?;
    let residuals = calib::residuals(&curve, &points);
    let max_abs_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(CalibrationRun {
        curve,
        points,
        residuals,
        max_abs_residual,
        pulses_per_point: n_pulses,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointRecord {
    pub true_mm: f64,
    pub mean_retrieved_mm: Option<f64>,
    pub std_dev_um: Option<f64>,
    /// Signed `mean retrieved − true`.
    pub mean_error_um: Option<f64>,
    pub mean_transmission: Option<f64>,
    pub std_transmission: Option<f64>,
    pub successes: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasurementReport {
    pub filter: String,
    pub records: Vec<PointRecord>,
    /// RMS over per-point standard deviations.
    pub overall_std_dev_um: f64,
    /// RMS over per-point mean errors.
    pub overall_mean_error_um: f64,
    pub aggregation: String,
    pub update_rate_hz: f64,
    pub pulses_averaged: usize,
    pub repeats: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CampaignProtocol {
    pub repeats: usize,
    pub n_pulses: usize,
}

impl CampaignProtocol {
    /// 100 repeats of 10 µs averages at 50 MHz.
    pub const REFERENCE: Self = Self {
        repeats: 100,
        n_pulses: 500,
    };
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Repeated measurements at each displacement (mm), retrieved through
/// `curve`. Failed cells are counted and left out of the statistics.
pub fn run_campaign<E: Executor>(
    chain: &SignalChain,
    curve: &CalibrationCurve,
    noise: &NoiseModel,
    displacements_mm: &[f64],
    protocol: CampaignProtocol,
    label: &str,
    executor: &E,
) -> Result<MeasurementReport> {
    noise.validate()?;
    if protocol.repeats == 0 || protocol.n_pulses == 0 {
        return Err(Error::invalid("protocol", "repeats and pulses must be positive"));
    }
    for &x in displacements_mm {
        if !curve.contains(x) {
            let (lo, hi) = curve.valid_range;
            return Err(Error::DisplacementRange {
                value_mm: x,
                nearest_endpoint_mm: if (x - lo).abs() < (x - hi).abs() { lo } else { hi },
            });
        }
    }
    let repeats = protocol.repeats;
    let cells = executor.map(displacements_mm.len() * repeats, |cell| {
        let x = displacements_mm[cell / repeats];
        let mut rng = cell_rng(noise.seed, DOMAIN_CAMPAIGN, cell as u64);
        simulate_measurement(chain, x * 1e-3, Some(curve), noise, protocol.n_pulses, &mut rng)
    });

    let mut records = Vec::with_capacity(displacements_mm.len());
    let mut failures = 0;
    for (p, &x) in displacements_mm.iter().enumerate() {
        let mut xs = Vec::with_capacity(repeats);
        let mut ys = Vec::with_capacity(repeats);
        let mut first_failure = None;
        let mut point_failures = 0;
        for cell in &cells[p * repeats..(p + 1) * repeats] {
            match cell {
                Ok(m) => {
                    xs.push(m.retrieved_mm.unwrap_or(f64::NAN));
                    ys.push(m.transmission);
                }
                Err(e) => {
                    point_failures += 1;
                    first_failure.get_or_insert_with(|| e.to_string());
                }
            }
        }
        failures += point_failures;
        let stats = (!xs.is_empty()).then(|| (mean_std(&xs), mean_std(&ys)));
        records.push(PointRecord {
            true_mm: x,
            mean_retrieved_mm: stats.map(|s| s.0 .0),
            std_dev_um: stats.map(|s| s.0 .1 * 1e3),
            mean_error_um: stats.map(|s| (s.0 .0 - x) * 1e3),
            mean_transmission: stats.map(|s| s.1 .0),
            std_transmission: stats.map(|s| s.1 .1),
            successes: xs.len(),
            failures: point_failures,
            first_failure,
        });
    }
    Ok(MeasurementReport {
        filter: label.to_string(),
        overall_std_dev_um: rms(records.iter().filter_map(|r| r.std_dev_um)),
        overall_mean_error_um: rms(records.iter().filter_map(|r| r.mean_error_um)),
        aggregation: "rms over per-point values".to_string(),
        update_rate_hz: chain.update_rate(protocol.n_pulses),
        pulses_averaged: protocol.n_pulses,
        repeats,
        failures,
        records,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TradeoffProtocol {
    pub ranges_mm: Vec<f64>,
    pub points_per_range: usize,
    pub campaign: CampaignProtocol,
    pub calibration_points: usize,
    pub calibration_pulses: usize,
    pub ramp_floor: f64,
}

impl TradeoffProtocol {
    /// Two filters (15 mm, 45 mm), nine interior displacements each, 100
    /// repeats of 500 pulses, 16-point calibration of 10 000 pulses.
    pub fn reference() -> Self {
        Self {
            ranges_mm: alloc::vec![15.0, 45.0],
            points_per_range: 9,
            campaign: CampaignProtocol::REFERENCE,
            calibration_points: 16,
            calibration_pulses: CALIBRATION_PULSES,
            ramp_floor: mwphotonics::DEFAULT_RAMP_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilterColumn {
    pub label: String,
    pub range_mm: f64,
    /// Designed ACF slope `k·(1 − T_min)/range` (per mm).
    pub designed_slope_per_mm: f64,
    pub ramp_top_hz: f64,
    pub calibration: CalibrationRun,
    pub report: MeasurementReport,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TradeoffReport {
    pub columns: Vec<FilterColumn>,
    /// Standard-deviation ratio of each column to the first.
    pub std_ratios: Vec<f64>,
    /// Designed-slope ratio of the first column to each column.
    pub slope_ratios: Vec<f64>,
    pub data_rates: DataRateReport,
    pub update_rate_hz: f64,
    pub channel_sample_rate_hz: f64,
    pub baseline_sample_rate_hz: f64,
    pub digitization_bandwidth_hz: f64,
    pub oe_bandwidth_hz: f64,
}

/// Designs one ramp per range, calibrates each, and runs identical campaigns.
pub fn tradeoff_study<E: Executor>(
    config: &SystemConfig,
    noise: &NoiseModel,
    protocol: &TradeoffProtocol,
    executor: &E,
) -> core::result::Result<TradeoffReport, MeasurementError> {
    let envelope = Envelope::default_for(config).map_err(at(Stage::Mapping))?;
    let k = config.processor.k();
    let mut columns = Vec::with_capacity(protocol.ranges_mm.len());
    for (i, &range_mm) in protocol.ranges_mm.iter().enumerate() {
        let profile = design_symmetric_ramp(range_mm * 1e-3, config, protocol.ramp_floor).map_err(at(Stage::Mapping))?;
        let ramp_top_hz = mwphotonics::ramp_edges(&profile).map_or(0.0, |e| e.1);
        let chain = SignalChain::new(config, envelope, profile).map_err(at(Stage::Mapping))?;
        let grid = uniform_grid(range_mm, protocol.calibration_points);
        let calibration = run_calibration(&chain, noise, &grid, protocol.calibration_pulses, executor)?;
        let label = format!("filter {} ({} mm)", i + 1, range_mm);
        let report = run_campaign(
            &chain,
            &calibration.curve,
            noise,
            &interior_grid(range_mm, protocol.points_per_range),
            protocol.campaign,
            &label,
            executor,
        )
        .map_err(at(Stage::Retrieval))?;
        columns.push(FilterColumn {
            label,
            range_mm,
            designed_slope_per_mm: k * (1.0 - protocol.ramp_floor) / range_mm,
            ramp_top_hz,
            calibration,
            report,
        });
    }
    let base_std = columns.first().map_or(0.0, |c| c.report.overall_std_dev_um);
    let base_slope = columns.first().map_or(0.0, |c| c.designed_slope_per_mm);
    Ok(TradeoffReport {
        std_ratios: columns.iter().map(|c| c.report.overall_std_dev_um / base_std).collect(),
        slope_ratios: columns.iter().map(|c| base_slope / c.designed_slope_per_mm).collect(),
        columns,
        data_rates: dsp::data_rate_report(&config.adc_baseline, &config.adc_channels, 2),
        update_rate_hz: config.source.repetition_rate / protocol.campaign.n_pulses as f64,
        channel_sample_rate_hz: config.adc_channels.sample_rate,
        baseline_sample_rate_hz: config.adc_baseline.sample_rate,
        digitization_bandwidth_hz: config.processor.pd23_bandwidth,
        oe_bandwidth_hz: config.processor.pd1_bandwidth.min(config.processor.modulator_bandwidth),
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaselineRow {
    pub true_mm: f64,
    /// `None` when the displacement is outside the mapping range.
    pub analytic_hz: Option<f64>,
    pub estimate: Option<FrequencyEstimate>,
    pub frequency_error_hz: Option<f64>,
    pub retrieved_mm: Option<f64>,
    pub error_um: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaselineReport {
    pub method: EstimateMethod,
    pub adc: AdcSpec,
    pub noise_rms: f64,
    pub rows: Vec<BaselineRow>,
    pub max_abs_frequency_error_hz: f64,
    pub max_abs_error_um: f64,
    pub data_rates: DataRateReport,
}

/// Direct-digitization path: synthesize each interferogram, digitize it with
/// `adc`, estimate its frequency and map back to displacement.
pub fn baseline_study<E: Executor>(
    config: &SystemConfig,
    displacements_mm: &[f64],
    adc: &AdcSpec,
    noise_rms: f64,
    method: EstimateMethod,
    seed: u64,
    executor: &E,
) -> Result<BaselineReport> {
    config.validated()?;
    adc.validate()?;
    let envelope = Envelope::default_for(config)?;
    let grid = TimeGrid::default_for(config);
    let amplitude = 0.5 * adc.full_scale;
    let rows = executor.map(displacements_mm.len(), |i| {
        let x_mm = displacements_mm[i];
        let analytic_hz = stretch::displacement_to_frequency(x_mm * 1e-3, config).ok();
        let run = || -> Result<FrequencyEstimate> {
            let w = stretch::synthesize_interferogram(x_mm * 1e-3, config, &envelope, &grid, amplitude)?;
            let mut rng = cell_rng(seed, DOMAIN_BASELINE, i as u64);
            let record_seed: u64 = rand::RngCore::next_u64(&mut rng);
            let d = dsp::digitize(&w, adc, noise_rms, record_seed)?;
            match method {
                EstimateMethod::FftPeak => dsp::estimate_frequency_fft(&d),
                EstimateMethod::ChirpFit => dsp::estimate_frequency_chirp(&d),
            }
        };
        match run() {
            Ok(est) => {
                let retrieved = stretch::frequency_to_displacement(est.frequency, config).ok().map(|x| x * 1e3);
                BaselineRow {
                    true_mm: x_mm,
                    analytic_hz,
                    estimate: Some(est),
                    frequency_error_hz: analytic_hz.map(|f| est.frequency - f),
                    retrieved_mm: retrieved,
                    error_um: retrieved.map(|r| (r - x_mm) * 1e3),
                    failure: None,
                }
            }
            Err(e) => BaselineRow {
                true_mm: x_mm,
                analytic_hz,
                estimate: None,
                frequency_error_hz: None,
                retrieved_mm: None,
                error_um: None,
                failure: Some(e.to_string()),
            },
        }
    });
    let max_abs_frequency_error_hz = rows
        .iter()
        .filter_map(|r| r.frequency_error_hz)
        .fold(0.0f64, |m, e| m.max(e.abs()));
    let max_abs_error_um = rows.iter().filter_map(|r| r.error_um).fold(0.0f64, |m, e| m.max(e.abs()));
    Ok(BaselineReport {
        method,
        adc: *adc,
        noise_rms,
        rows,
        max_abs_frequency_error_hz,
        max_abs_error_um,
        data_rates: dsp::data_rate_report(&config.adc_baseline, &config.adc_channels, 2),
    })
}

/// Sensitivity of the chirp-free mapping, `(2/c)/(2πβ₂L)` (Hz per metre).
pub fn mapping_sensitivity(config: &SystemConfig) -> f64 {
    (2.0 / crate::SPEED_OF_LIGHT) / (2.0 * PI * config.fiber.beta2_l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mwphotonics::DEFAULT_RAMP_FLOOR;

    fn chain15() -> SignalChain {
        SignalChain::with_ramp(&SystemConfig::reference(), 15e-3, DEFAULT_RAMP_FLOOR).unwrap()
    }

    #[test]
    fn noiseless_zero_point_reads_ramp_floor() {
        let chain = chain15();
        let mut noise = NoiseModel::quiet(1);
        noise.adc_quantization = false;
        let mut rng = cell_rng(1, 0, 0);
        let m = simulate_measurement(&chain, 0.0, None, &noise, 500, &mut rng).unwrap();
        let p = &chain.config().processor;
        let lines = modulate_exact(2.3e9, &ModulationParams::from_processor(p), p.carrier_power);
        let weighted: f64 = lines.lines.iter().map(|l| l.power() * chain.filter().transmission(l.offset.abs())).sum();
        let expected = p.k() * weighted / lines.sideband_power();
        assert!((m.transmission - expected).abs() < 1e-9, "{} {}", m.transmission, expected);
        // envelope smoothing lifts the corner by about 0.4·σ_f of ramp
        assert!((expected - p.k() * DEFAULT_RAMP_FLOOR).abs() < 2e-3);
        assert!(m.retrieved_mm.is_none());
    }

    #[test]
    fn update_rate_for_500_pulses() {
        assert!((chain15().update_rate(500) - 0.1e6).abs() < 1e-6);
    }

    #[test]
    fn noiseless_round_trip_through_fitted_curve() {
        let chain = chain15();
        let mut noise = NoiseModel::quiet(3);
        noise.adc_quantization = false;
        let cal = run_calibration(&chain, &noise, &uniform_grid(15.0, 16), 500, &Sequential).unwrap();
        for &x in &[1.0, 4.3, 7.5, 12.0] {
            let mut rng = cell_rng(3, 1, 0);
            let m = simulate_measurement(&chain, x * 1e-3, Some(&cal.curve), &noise, 500, &mut rng).unwrap();
            // the cubic cannot follow the rounded ramp corner at the zero point
            assert!((m.retrieved_mm.unwrap() - x).abs() <= 10e-3, "{x}: {:?}", m.retrieved_mm);
        }
    }

    #[test]
    fn calibration_matches_acf() {
        let chain = chain15();
        let noise = NoiseModel::quiet(5);
        let cal = run_calibration(&chain, &noise, &uniform_grid(15.0, 16), 2000, &Sequential).unwrap();
        assert!(cal.curve.certificate.is_monotone());
        for p in &cal.points {
            let acf = chain.predicted_transmission(p.displacement * 1e-3).unwrap();
            // channel quantization at 12 bits, not averaged down without noise
            assert!((p.transmission - acf).abs() < 2e-3, "{} {}", p.transmission, acf);
        }
    }

    #[test]
    fn too_few_grid_points() {
        let e = run_calibration(&chain15(), &NoiseModel::quiet(0), &[0.0, 5.0, 10.0], 10, &Sequential).unwrap_err();
        assert_eq!(e.stage, Stage::Fit);
    }

    #[test]
    fn calibration_is_deterministic() {
        let chain = chain15();
        let noise = NoiseModel::reference();
        let grid = uniform_grid(15.0, 8);
        let a = run_calibration(&chain, &noise, &grid, 200, &Sequential).unwrap();
        let b = run_calibration(&chain, &noise, &grid, 200, &Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quiet_campaign_has_no_spread() {
        let chain = chain15();
        let noise = NoiseModel::quiet(9);
        let cal = run_calibration(&chain, &noise, &uniform_grid(15.0, 16), 500, &Sequential).unwrap();
        let report = run_campaign(
            &chain,
            &cal.curve,
            &noise,
            &[3.0, 9.0],
            CampaignProtocol {
                repeats: 5,
                n_pulses: 100,
            },
            "f1",
            &Sequential,
        )
        .unwrap();
        for r in &report.records {
            assert!(r.std_dev_um.unwrap() * 1e-3 <= 1e-6);
            assert_eq!(r.successes, 5);
        }
        assert_eq!(report.failures, 0);
    }

    #[test]
    fn out_of_range_displacement_is_rejected() {
        let chain = chain15();
        let noise = NoiseModel::quiet(9);
        let cal = run_calibration(&chain, &noise, &uniform_grid(15.0, 16), 100, &Sequential).unwrap();
        let err = run_campaign(
            &chain,
            &cal.curve,
            &noise,
            &[16.0],
            CampaignProtocol {
                repeats: 1,
                n_pulses: 10,
            },
            "f1",
            &Sequential,
        );
        assert!(matches!(
            err,
            Err(Error::DisplacementRange {
                nearest_endpoint_mm: 15.0,
                ..
            })
        ));
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let chain = chain15();
        let quiet = NoiseModel::quiet(2);
        let cal = run_calibration(&chain, &quiet, &uniform_grid(15.0, 16), 500, &Sequential).unwrap();
        // at the bottom of the range half the noisy readings fall below the curve
        let mut noisy = NoiseModel::quiet(2);
        noisy.det_noise_rms = 0.05;
        let report = run_campaign(
            &chain,
            &cal.curve,
            &noisy,
            &[0.0, 7.5],
            CampaignProtocol {
                repeats: 20,
                n_pulses: 50,
            },
            "f1",
            &Sequential,
        )
        .unwrap();
        assert!(report.records[0].failures > 0);
        assert!(report.records[0].first_failure.as_ref().unwrap().contains("retrieval"));
        assert_eq!(report.records[1].failures, 0);
        assert_eq!(report.failures, report.records[0].failures);
    }

    #[test]
    fn drift_is_constant_per_point() {
        let noise = NoiseModel::reference();
        assert_eq!(drift_offset(&noise, 1e-3), drift_offset(&noise, 1e-3));
        assert_ne!(drift_offset(&noise, 1e-3), drift_offset(&noise, 2e-3));
        assert_eq!(drift_offset(&NoiseModel::quiet(1), 1e-3), 0.0);
    }
}
