//! JSON configuration files. Keys carry their unit; everything is converted
//! to SI exactly once, here.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stretch_ranger_core::dsp::AdcSpec;
use stretch_ranger_core::runner::{CampaignProtocol, NoiseModel, TradeoffProtocol};
use stretch_ranger_core::stretch;
use stretch_ranger_core::sysmodel::{FiberDispersion, LaserSource, ProcessorConfig, StageScenario, SystemConfig};

use crate::AppError;

pub const REFERENCE_CONFIG: &str = include_str!("../data/reference_system.json");
pub const REFERENCE_NOISE: &str = include_str!("../data/noise_reference.json");
pub const REFERENCE_PROTOCOL: &str = include_str!("../data/protocol_reference.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub source: SourceFile,
    pub fiber: FiberFile,
    pub processor: ProcessorFile,
    pub stage: StageFile,
    pub adc_baseline: AdcFile,
    pub adc_channels: AdcFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceFile {
    pub repetition_rate_mhz: f64,
    pub pulse_width_fs: f64,
    pub center_wavelength_nm: f64,
    pub filtered_spectral_width_nm: f64,
    pub average_power_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberFile {
    pub total_dispersion_ps_per_nm: f64,
    #[serde(default)]
    pub beta3_l_ps3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessorFile {
    pub carrier_wavelength_nm: f64,
    pub carrier_power_mw: f64,
    pub half_wave_voltage_v: f64,
    /// Give either the drive amplitude or the modulation depth `πV/V_π`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_amplitude_v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation_depth_rad: Option<f64>,
    /// `null` or absent for an ideal null bias.
    #[serde(default)]
    pub extinction_ratio_db: Option<f64>,
    pub bpf_low_ghz: f64,
    pub bpf_high_ghz: f64,
    pub modulator_bandwidth_ghz: f64,
    pub pd1_bandwidth_ghz: f64,
    pub pd23_bandwidth_mhz: f64,
    pub coupling_det: f64,
    pub coupling_ref: f64,
    pub responsivity_det_a_per_w: f64,
    pub responsivity_ref_a_per_w: f64,
    pub transimpedance_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageFile {
    /// Either the arm imbalance or the zero-point frequency it produces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_delay_ps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_point_frequency_ghz: Option<f64>,
    #[serde(default)]
    pub displacement_mm: f64,
    /// Relative drive loss per cm of displacement.
    pub coupling_decay_per_cm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdcFile {
    pub sample_rate_gsps: f64,
    pub bits: u32,
    pub full_scale_v: f64,
}

impl AdcFile {
    fn to_spec(&self) -> AdcSpec {
        AdcSpec {
            sample_rate: self.sample_rate_gsps * 1e9,
            bits: self.bits,
            full_scale: self.full_scale_v,
        }
    }
}

impl ConfigFile {
    /// Resolves to SI. Physical consistency is checked separately by
    /// `validate_config`; only ambiguities in the file itself fail here.
    pub fn resolve(&self) -> Result<SystemConfig, AppError> {
        let s = &self.source;
        let center_wavelength = s.center_wavelength_nm * 1e-9;
        let fiber = FiberDispersion::from_total_dispersion(
            self.fiber.total_dispersion_ps_per_nm * 1e-3,
            center_wavelength,
            self.fiber.beta3_l_ps3 * 1e-36,
        )?;
        let p = &self.processor;
        let drive_amplitude = match (p.drive_amplitude_v, p.modulation_depth_rad) {
            (Some(v), None) => v,
            (None, Some(beta)) => beta * p.half_wave_voltage_v / std::f64::consts::PI,
            _ => {
                return Err(AppError::Input(
                    "processor: give exactly one of `drive_amplitude_v` and `modulation_depth_rad`".into(),
                ))
            }
        };
        let reference_delay = match (self.stage.reference_delay_ps, self.stage.zero_point_frequency_ghz) {
            (Some(ps), None) => ps * 1e-12,
            (None, Some(ghz)) => stretch::reference_delay_for_frequency(ghz * 1e9, &fiber)?,
            _ => {
                return Err(AppError::Input(
                    "stage: give exactly one of `reference_delay_ps` and `zero_point_frequency_ghz`".into(),
                ))
            }
        };
        Ok(SystemConfig {
            source: LaserSource {
                repetition_rate: s.repetition_rate_mhz * 1e6,
                pulse_width: s.pulse_width_fs * 1e-15,
                center_wavelength,
                filtered_spectral_width: s.filtered_spectral_width_nm * 1e-9,
                average_power: s.average_power_mw * 1e-3,
            },
            fiber,
            processor: ProcessorConfig {
                carrier_wavelength: p.carrier_wavelength_nm * 1e-9,
                carrier_power: p.carrier_power_mw * 1e-3,
                half_wave_voltage: p.half_wave_voltage_v,
                drive_amplitude,
                extinction_ratio_db: p.extinction_ratio_db,
                bpf_low: p.bpf_low_ghz * 1e9,
                bpf_high: p.bpf_high_ghz * 1e9,
                modulator_bandwidth: p.modulator_bandwidth_ghz * 1e9,
                pd1_bandwidth: p.pd1_bandwidth_ghz * 1e9,
                pd23_bandwidth: p.pd23_bandwidth_mhz * 1e6,
                coupling_det: p.coupling_det,
                coupling_ref: p.coupling_ref,
                responsivity_det: p.responsivity_det_a_per_w,
                responsivity_ref: p.responsivity_ref_a_per_w,
                transimpedance: p.transimpedance_ohm,
            },
            stage: StageScenario {
                reference_delay,
                displacement: self.stage.displacement_mm * 1e-3,
                coupling_decay_per_meter: self.stage.coupling_decay_per_cm * 100.0,
            },
            adc_baseline: self.adc_baseline.to_spec(),
            adc_channels: self.adc_channels.to_spec(),
        })
    }
}

/// Campaign protocol file; `ranges_mm` and the calibration fields are used by
/// the trade-off study, the rest by every campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    pub ranges_mm: Vec<f64>,
    pub points_per_range: usize,
    pub repeats: usize,
    pub n_pulses: usize,
    pub calibration_points: usize,
    pub calibration_pulses: usize,
    pub ramp_floor: f64,
}

impl ProtocolFile {
    pub fn campaign(&self) -> CampaignProtocol {
        CampaignProtocol {
            repeats: self.repeats,
            n_pulses: self.n_pulses,
        }
    }

    pub fn tradeoff(&self) -> TradeoffProtocol {
        TradeoffProtocol {
            ranges_mm: self.ranges_mm.clone(),
            points_per_range: self.points_per_range,
            campaign: self.campaign(),
            calibration_points: self.calibration_points,
            calibration_pulses: self.calibration_pulses,
            ramp_floor: self.ramp_floor,
        }
    }
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T, AppError> {
    serde_json::from_str(text).map_err(|e| AppError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_json(&text, &path.display().to_string())
}

/// Loads a config file, or the built-in reference when `path` is `None`.
pub fn load_config(path: Option<&Path>) -> Result<(ConfigFile, SystemConfig), AppError> {
    let file: ConfigFile = match path {
        Some(p) => read_json(p)?,
        None => parse_json(REFERENCE_CONFIG, "reference_system.json")?,
    };
    let resolved = file.resolve()?;
    Ok((file, resolved))
}

pub fn load_noise(path: Option<&Path>, seed: Option<u64>) -> Result<NoiseModel, AppError> {
    let mut noise: NoiseModel = match path {
        Some(p) => read_json(p)?,
        None => parse_json(REFERENCE_NOISE, "noise_reference.json")?,
    };
    if let Some(s) = seed {
        noise.seed = s;
    }
    noise.validate()?;
    Ok(noise)
}

pub fn load_protocol(path: Option<&Path>) -> Result<ProtocolFile, AppError> {
    match path {
        Some(p) => read_json(p),
        None => parse_json(REFERENCE_PROTOCOL, "protocol_reference.json"),
    }
}
