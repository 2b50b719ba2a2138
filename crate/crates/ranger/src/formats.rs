//! File formats: waveform CSV and binary containers, filter profiles,
//! calibration points and curves, and flat report tables.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use stretch_ranger_core::calib::{CalibrationCurve, CalibrationPoint, MonotoneCertificate};
use stretch_ranger_core::mwphotonics::FilterProfile;
use stretch_ranger_core::runner::{BaselineReport, MeasurementReport, TradeoffReport};
use stretch_ranger_core::stretch::Waveform;

use crate::AppError;

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    AppError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn create(path: &Path) -> Result<std::fs::File, AppError> {
    std::fs::File::create(path).map_err(|e| AppError::io(path, e))
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, AppError> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn finish<W: Write>(path: &Path, mut w: csv::Writer<W>) -> Result<(), AppError> {
    w.flush().map_err(|e| AppError::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct WaveformRow {
    time_s: f64,
    value: f64,
}

pub fn write_waveform_csv(path: &Path, w: &Waveform) -> Result<(), AppError> {
    let mut out = writer(path)?;
    for (i, v) in w.samples().iter().enumerate() {
        out.serialize(WaveformRow {
            time_s: w.time(i),
            value: *v,
        })
        .map_err(|e| csv_error(path, e))?;
    }
    finish(path, out)
}

/// Reads a `time_s,value` table. The sample rate comes from the mean spacing.
pub fn read_waveform_csv(path: &Path) -> Result<Waveform, AppError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let rows: Vec<WaveformRow> = rdr
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| csv_error(path, e))?;
    if rows.len() < 2 {
        return Err(AppError::Input(format!("{}: need at least two samples", path.display())));
    }
    let span = rows[rows.len() - 1].time_s - rows[0].time_s;
    let rate = (rows.len() - 1) as f64 / span;
    Ok(Waveform::new(rows.iter().map(|r| r.value).collect(), rate, rows[0].time_s)?)
}

pub const WAVEFORM_MAGIC: &[u8; 8] = b"SRWAVE01";
pub const WAVEFORM_HEADER_LEN: usize = 32;

/// Little-endian container: magic, sample rate, t0, sample count, samples.
pub fn encode_waveform(w: &Waveform) -> Vec<u8> {
    let mut out = Vec::with_capacity(WAVEFORM_HEADER_LEN + 8 * w.len());
    out.extend_from_slice(WAVEFORM_MAGIC);
    out.extend_from_slice(&w.sample_rate().to_le_bytes());
    out.extend_from_slice(&w.t0().to_le_bytes());
    out.extend_from_slice(&(w.len() as u64).to_le_bytes());
    for v in w.samples() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_waveform(bytes: &[u8]) -> Result<Waveform, AppError> {
    let bad = |m: &str| AppError::Input(format!("waveform container: {m}"));
    if bytes.len() < WAVEFORM_HEADER_LEN || &bytes[..8] != WAVEFORM_MAGIC {
        return Err(bad("missing header"));
    }
    let word = |i: usize| <[u8; 8]>::try_from(&bytes[i..i + 8]).expect("eight bytes");
    let rate = f64::from_le_bytes(word(8));
    let t0 = f64::from_le_bytes(word(16));
    let count = u64::from_le_bytes(word(24)) as usize;
    if bytes.len() != WAVEFORM_HEADER_LEN + 8 * count {
        return Err(bad("length does not match sample count"));
    }
    let samples = (0..count)
        .map(|i| f64::from_le_bytes(word(WAVEFORM_HEADER_LEN + 8 * i)))
        .collect();
    Ok(Waveform::new(samples, rate, t0)?)
}

pub fn write_waveform_bin(path: &Path, w: &Waveform) -> Result<(), AppError> {
    create(path)?
        .write_all(&encode_waveform(w))
        .map_err(|e| AppError::io(path, e))
}

pub fn read_waveform_bin(path: &Path) -> Result<Waveform, AppError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| AppError::io(path, e))?;
    decode_waveform(&bytes)
}

#[derive(Debug, Deserialize)]
struct FilterRow {
    offset_ghz: f64,
    #[serde(default)]
    transmission: Option<f64>,
    #[serde(default)]
    attenuation_db: Option<f64>,
}

/// Writes the designed breakpoints; symmetric profiles store only `offset ≥ 0`.
pub fn write_filter_csv(path: &Path, profile: &FilterProfile) -> Result<(), AppError> {
    let mut out = writer(path)?;
    out.write_record(["offset_ghz", "transmission"]).map_err(|e| csv_error(path, e))?;
    for (f, t) in profile.breakpoints() {
        out.write_record([(f / 1e9).to_string(), t.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    finish(path, out)
}

/// Reads `offset_ghz` with `transmission` or `attenuation_db`. A table with
/// no negative offsets is taken as symmetric about the carrier.
pub fn read_filter_csv(path: &Path) -> Result<FilterProfile, AppError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut points = Vec::new();
    for (line, row) in rdr.deserialize::<FilterRow>().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let t = match (row.transmission, row.attenuation_db) {
            (Some(t), _) => t,
            (None, Some(db)) => 10f64.powf(-db / 10.0),
            (None, None) => {
                return Err(AppError::Input(format!(
                    "{}: row {} has neither transmission nor attenuation_db",
                    path.display(),
                    line + 2
                )))
            }
        };
        points.push((row.offset_ghz * 1e9, t));
    }
    let symmetric = points.iter().all(|p| p.0 >= 0.0);
    Ok(FilterProfile::new(points, symmetric)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct PointRow {
    displacement_mm: f64,
    transmission: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fitted: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
}

/// Plot-ready points, with the fitted value and residual when a curve is given.
pub fn write_points_csv(path: &Path, points: &[CalibrationPoint], curve: Option<&CalibrationCurve>) -> Result<(), AppError> {
    let mut out = writer(path)?;
    for p in points {
        let fitted = curve.map(|c| c.polynomial(p.displacement));
        out.serialize(PointRow {
            displacement_mm: p.displacement,
            transmission: p.transmission,
            fitted,
            residual: fitted.map(|f| p.transmission - f),
        })
        .map_err(|e| csv_error(path, e))?;
    }
    finish(path, out)
}

pub fn read_points_csv(path: &Path) -> Result<Vec<CalibrationPoint>, AppError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    rdr.deserialize::<PointRow>()
        .map(|r| {
            r.map(|r| CalibrationPoint::new(r.displacement_mm, r.transmission))
                .map_err(|e| csv_error(path, e))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveUnits {
    pub displacement: String,
    pub transmission: String,
}

/// `T(x) = a·x + b·x² + c·x³ + d` with `x` in mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub coefficients: Coefficients,
    pub units: CurveUnits,
    pub valid_range_mm: (f64, f64),
    #[serde(default)]
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<MonotoneCertificate>,
}

impl CurveFile {
    pub fn from_curve(curve: &CalibrationCurve, residuals: &[f64]) -> Self {
        Self {
            coefficients: Coefficients {
                a: curve.a,
                b: curve.b,
                c: curve.c3,
                d: curve.d,
            },
            units: CurveUnits {
                displacement: "mm".into(),
                transmission: "ratio".into(),
            },
            valid_range_mm: curve.valid_range,
            residuals: residuals.to_vec(),
            certificate: Some(curve.certificate),
        }
    }

    /// Rebuilds the curve; the certificate is recomputed, not trusted.
    pub fn to_curve(&self) -> Result<CalibrationCurve, AppError> {
        let c = &self.coefficients;
        Ok(CalibrationCurve::new(c.a, c.b, c.c, c.d, self.valid_range_mm)?)
    }
}

#[derive(Debug, Serialize)]
struct ReportRow<'a> {
    filter: &'a str,
    true_mm: f64,
    mean_retrieved_mm: Option<f64>,
    std_dev_um: Option<f64>,
    mean_error_um: Option<f64>,
    mean_transmission: Option<f64>,
    std_transmission: Option<f64>,
    successes: usize,
    failures: usize,
}

/// One row per displacement: the (standard deviation, mean error) pairs
/// plotted against true displacement.
pub fn write_report_csv(path: &Path, reports: &[&MeasurementReport]) -> Result<(), AppError> {
    let mut out = writer(path)?;
    for report in reports {
        for r in &report.records {
            out.serialize(ReportRow {
                filter: &report.filter,
                true_mm: r.true_mm,
                mean_retrieved_mm: r.mean_retrieved_mm,
                std_dev_um: r.std_dev_um,
                mean_error_um: r.mean_error_um,
                mean_transmission: r.mean_transmission,
                std_transmission: r.std_transmission,
                successes: r.successes,
                failures: r.failures,
            })
            .map_err(|e| csv_error(path, e))?;
        }
    }
    finish(path, out)
}

/// Side-by-side comparison: one row per quantity, one column per filter
/// plus the direct-digitization baseline.
pub fn tradeoff_table(report: &TradeoffReport) -> Vec<Vec<String>> {
    let n = report.columns.len();
    let mut header = vec!["quantity".to_string(), "unit".to_string()];
    header.extend(report.columns.iter().map(|c| c.label.clone()));
    header.push("direct digitization".into());
    let mut rows = vec![header];
    let mut push = |q: &str, unit: &str, per: Vec<String>, baseline: String| {
        let mut row = vec![q.to_string(), unit.to_string()];
        row.extend(per);
        row.push(baseline);
        rows.push(row);
    };
    let each = |f: &dyn Fn(usize) -> String| (0..n).map(f).collect::<Vec<_>>();
    let dr = &report.data_rates;
    push(
        "dynamic range",
        "mm",
        each(&|i| report.columns[i].range_mm.to_string()),
        String::new(),
    );
    push(
        "standard deviation",
        "um",
        each(&|i| format!("{:.2}", report.columns[i].report.overall_std_dev_um)),
        String::new(),
    );
    push(
        "mean error",
        "um",
        each(&|i| format!("{:.2}", report.columns[i].report.overall_mean_error_um)),
        String::new(),
    );
    push(
        "designed ACF slope",
        "1/mm",
        each(&|i| format!("{:.5}", report.columns[i].designed_slope_per_mm)),
        String::new(),
    );
    push(
        "std dev ratio to first filter",
        "",
        each(&|i| format!("{:.3}", report.std_ratios[i])),
        String::new(),
    );
    push(
        "slope ratio to first filter",
        "",
        each(&|i| format!("{:.3}", report.slope_ratios[i])),
        String::new(),
    );
    push(
        "detection speed",
        "MHz",
        each(&|_| format!("{}", report.update_rate_hz / 1e6)),
        String::new(),
    );
    push(
        "sampling rate",
        "GS/s",
        each(&|_| format!("{}", report.channel_sample_rate_hz / 1e9)),
        format!("{}", report.baseline_sample_rate_hz / 1e9),
    );
    push(
        "digitization bandwidth",
        "GHz",
        each(&|_| format!("{}", report.digitization_bandwidth_hz / 1e9)),
        format!("{}", report.oe_bandwidth_hz / 1e9),
    );
    push(
        "data rate",
        "GB/s",
        each(&|_| format!("{}", dr.channels_bytes_per_s / 1e9)),
        format!("{}", dr.baseline_bytes_per_s / 1e9),
    );
    push(
        "quoted data rate",
        "GB/s",
        each(&|_| String::new()),
        format!("{}", dr.quoted_baseline_bytes_per_s / 1e9),
    );
    rows
}

pub fn write_table_csv(path: &Path, rows: &[Vec<String>]) -> Result<(), AppError> {
    let mut out = writer(path)?;
    for row in rows {
        out.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    finish(path, out)
}

#[derive(Debug, Serialize)]
struct BaselineRowCsv {
    true_mm: f64,
    analytic_ghz: Option<f64>,
    estimated_ghz: Option<f64>,
    confidence_halfwidth_mhz: Option<f64>,
    frequency_error_mhz: Option<f64>,
    retrieved_mm: Option<f64>,
    error_um: Option<f64>,
    failure: Option<String>,
}

pub fn write_baseline_csv(path: &Path, report: &BaselineReport) -> Result<(), AppError> {
    let mut out = writer(path)?;
    for r in &report.rows {
        out.serialize(BaselineRowCsv {
            true_mm: r.true_mm,
            analytic_ghz: r.analytic_hz.map(|f| f / 1e9),
            estimated_ghz: r.estimate.map(|e| e.frequency / 1e9),
            confidence_halfwidth_mhz: r.estimate.map(|e| e.confidence_halfwidth / 1e6),
            frequency_error_mhz: r.frequency_error_hz.map(|e| e / 1e6),
            retrieved_mm: r.retrieved_mm,
            error_um: r.error_um,
            failure: r.failure.clone(),
        })
        .map_err(|e| csv_error(path, e))?;
    }
    finish(path, out)
}

/// Markdown rendering of a comparison table.
pub fn markdown_table(rows: &[Vec<String>]) -> String {
    let mut s = String::new();
    for (i, row) in rows.iter().enumerate() {
        s.push_str("| ");
        s.push_str(&row.join(" | "));
        s.push_str(" |\n");
        if i == 0 {
            s.push('|');
            s.push_str(&"---|".repeat(row.len()));
            s.push('\n');
        }
    }
    s
}
