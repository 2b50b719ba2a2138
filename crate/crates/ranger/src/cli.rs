//! Subcommands. Each one resolves its inputs, runs, writes payload files into
//! its output directory and finishes with a manifest.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use stretch_ranger_core::dsp::EstimateMethod;
use stretch_ranger_core::mwphotonics::{self, design_ramp, FilterProfile, RampScale};
use stretch_ranger_core::runner::{
    self, interior_grid, uniform_grid, BaselineReport, CalibrationRun, MeasurementReport, SignalChain,
    TradeoffReport,
};
use stretch_ranger_core::stretch::{self, Envelope, TimeGrid};
use stretch_ranger_core::sysmodel::{validate_config, SystemConfig, ValidationReport};

use crate::config::{load_config, load_noise, load_protocol, read_json};
use crate::formats::{self, CurveFile};
use crate::manifest::{config_hash, RunManifest};
use crate::parallel::Parallel;
use crate::AppError;

#[derive(Debug, Parser)]
#[command(name = "stretch-ranger", version, about = "Time-stretch ranging lidar simulator and retrieval engine")]
pub struct Cli {
    /// Overrides the seed of every noise model and random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for campaigns. Results do not depend on it.
    #[arg(long, global = true, env = "STRETCH_RANGER_JOBS")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a configuration for physical consistency.
    Validate(ValidateArgs),
    /// Design a symmetric ramp filter for a target range.
    DesignFilter(DesignFilterArgs),
    /// Measure a calibration grid and fit the cubic transmission curve.
    Calibrate(CalibrateArgs),
    /// Repeated measurements at given displacements through a fitted curve.
    Measure(MeasureArgs),
    /// Calibrate one filter and measure across its range.
    Sweep(SweepArgs),
    /// Two-filter comparison of range against precision.
    Tradeoff(TradeoffArgs),
    /// Direct-digitization path with FFT or chirp-fit frequency estimation.
    Baseline(BaselineArgs),
    /// Render a JSON payload as markdown tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct OutDir {
    /// Directory for payloads and the manifest.
    #[arg(long, default_value = "stretch-ranger-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// System configuration JSON; defaults to the built-in reference.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Filter profile CSV (offset_ghz, transmission | attenuation_db).
    #[arg(long, conflicts_with = "range_mm")]
    pub filter: Option<PathBuf>,
    /// Design a linear symmetric ramp for this range instead.
    #[arg(long)]
    pub range_mm: Option<f64>,
    /// Ramp floor transmission for designed filters.
    #[arg(long, default_value_t = mwphotonics::DEFAULT_RAMP_FLOOR)]
    pub t_min: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Scale {
    Linear,
    Db,
}

#[derive(Debug, Args)]
pub struct DesignFilterArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub range_mm: f64,
    #[arg(long, default_value_t = mwphotonics::DEFAULT_RAMP_FLOOR)]
    pub t_min: f64,
    #[arg(long, value_enum, default_value = "linear")]
    pub scale: Scale,
    /// Output CSV; the manifest goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Noise model JSON; defaults to the reference profile.
    #[arg(long)]
    pub noise: Option<PathBuf>,
    /// Number of uniformly spaced calibration points.
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    /// Upper end of the grid; defaults to the filter's range.
    #[arg(long)]
    pub grid_max_mm: Option<f64>,
    /// Pulses averaged per point (10 000 is 200 µs at 50 MHz).
    #[arg(long, default_value_t = runner::CALIBRATION_PULSES)]
    pub pulses: usize,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Calibration curve JSON.
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long)]
    pub noise: Option<PathBuf>,
    /// Displacements, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x_mm: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub repeats: usize,
    #[arg(long, default_value_t = 500)]
    pub pulses: usize,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long)]
    pub noise: Option<PathBuf>,
    /// Protocol JSON (repeats, pulses, calibration settings).
    #[arg(long)]
    pub protocol: Option<PathBuf>,
    /// Interior displacements; defaults to the protocol's points per range.
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub noise: Option<PathBuf>,
    #[arg(long)]
    pub protocol: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Fft,
    Chirp,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Displacements, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub x_mm: Vec<f64>,
    /// Without --x-mm: this many interior points across --range-mm.
    #[arg(long, default_value_t = 9)]
    pub points: usize,
    /// Defaults to the full dynamic range.
    #[arg(long)]
    pub range_mm: Option<f64>,
    #[arg(long, value_enum, default_value = "fft")]
    pub method: Method,
    /// Additive white noise before quantization (V rms).
    #[arg(long, default_value_t = 0.0)]
    pub noise_rms: f64,
    /// Overrides the capture ADC resolution.
    #[arg(long)]
    pub bits: Option<u32>,
    /// Also write each synthesized interferogram as a binary container.
    #[arg(long)]
    pub waveforms: bool,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A JSON payload written by another command.
    pub input: PathBuf,
    #[command(flatten)]
    pub out: OutDir,
}

/// Every JSON payload, tagged with the command family that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Validation(ValidationReport),
    Calibration(CalibrationRun),
    Measurement(MeasurementReport),
    Tradeoff(TradeoffReport),
    Baseline(BaselineReport),
}

struct Run {
    command: &'static str,
    dir: PathBuf,
    seed: Option<u64>,
    jobs: usize,
    hash: String,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    start: Instant,
    throughput: Option<f64>,
}

impl Run {
    fn new(command: &'static str, dir: &Path, seed: Option<u64>, jobs: usize, resolved: serde_json::Value) -> Result<Self, AppError> {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        Ok(Self {
            command,
            dir: dir.to_path_buf(),
            seed,
            jobs,
            hash: config_hash(&json!({ "command": command, "resolved": resolved })),
            inputs: Vec::new(),
            outputs: Vec::new(),
            start: Instant::now(),
            throughput: None,
        })
    }

    fn input(&mut self, path: Option<&Path>) {
        if let Some(p) = path {
            self.inputs.push(p.to_path_buf());
        }
    }

    fn output(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), AppError> {
        let path = self.output(name);
        let text = serde_json::to_string_pretty(value).expect("payload serializes");
        std::fs::write(&path, text + "\n").map_err(|e| AppError::io(&path, e))
    }

    fn text(&mut self, name: &str, text: &str) -> Result<(), AppError> {
        let path = self.output(name);
        std::fs::write(&path, text).map_err(|e| AppError::io(&path, e))
    }

    fn finish(self) -> Result<(), AppError> {
        let path = RunManifest::path_in(&self.dir, self.command);
        RunManifest {
            command: self.command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: self.hash,
            seed: self.seed,
            jobs: self.jobs,
            inputs: self.inputs,
            outputs: self.outputs,
            wall_clock_s: self.start.elapsed().as_secs_f64(),
            throughput_per_s: self.throughput,
        }
        .write(&path)
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), AppError> {
    let exec = Parallel::new(cli.jobs)?;
    let ctx = Ctx {
        seed: cli.seed,
        exec: &exec,
    };
    match cli.command {
        Command::Validate(a) => validate(&ctx, a),
        Command::DesignFilter(a) => design_filter(&ctx, a),
        Command::Calibrate(a) => calibrate(&ctx, a),
        Command::Measure(a) => measure(&ctx, a),
        Command::Sweep(a) => sweep(&ctx, a),
        Command::Tradeoff(a) => tradeoff(&ctx, a),
        Command::Baseline(a) => baseline(&ctx, a),
        Command::Report(a) => report(a),
    }
}

struct Ctx<'a> {
    seed: Option<u64>,
    exec: &'a Parallel,
}

fn validate(ctx: &Ctx, a: ValidateArgs) -> Result<(), AppError> {
    let (_, cfg) = load_config(Some(&a.config))?;
    let report = validate_config(&cfg);
    let mut run = Run::new("validate", &a.out.out_dir, None, ctx.exec.jobs(), json!({ "config": cfg }))?;
    run.input(Some(&a.config));
    run.json("validation.json", &Payload::Validation(report.clone()))?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    run.finish()?;
    if report.passed {
        Ok(())
    } else {
        let names: Vec<String> = report.violations.iter().map(|v| v.message.clone()).collect();
        Err(AppError::Failed(format!("validation failed: {}", names.join("; "))))
    }
}

fn design_filter(ctx: &Ctx, a: DesignFilterArgs) -> Result<(), AppError> {
    let (_, cfg) = load_config(a.config.config.as_deref())?;
    cfg.validated()?;
    let scale = match a.scale {
        Scale::Linear => RampScale::Linear,
        Scale::Db => RampScale::Decibel,
    };
    let profile = design_ramp(a.range_mm * 1e-3, &cfg, a.t_min, scale)?;
    let dir = a.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut run = Run::new(
        "design-filter",
        dir,
        None,
        ctx.exec.jobs(),
        json!({ "config": cfg, "range_mm": a.range_mm, "t_min": a.t_min, "scale": format!("{:?}", a.scale) }),
    )?;
    run.input(a.config.config.as_deref());
    run.outputs.push(a.out.clone());
    formats::write_filter_csv(&a.out, &profile)?;
    if let Some((lo, hi)) = mwphotonics::ramp_edges(&profile) {
        println!("ramp edges: {:.4} GHz to {:.4} GHz", lo / 1e9, hi / 1e9);
    }
    run.finish()
}

/// Filter profile plus the displacement range it is meant to cover (mm).
fn resolve_filter(f: &FilterArgs, cfg: &SystemConfig) -> Result<(FilterProfile, f64, String), AppError> {
    match (&f.filter, f.range_mm) {
        (Some(path), range) => {
            let profile = formats::read_filter_csv(path)?;
            let range_mm = match range {
                Some(r) => r,
                None => {
                    let (_, top) = mwphotonics::ramp_edges(&profile).ok_or_else(|| {
                        AppError::Input("filter has no ramp; give --range-mm or --grid-max-mm".into())
                    })?;
                    let band_top = stretch::oe_band(cfg)?.1;
                    stretch::frequency_to_displacement(top.min(band_top), cfg)? * 1e3
                }
            };
            let label = path.file_stem().map_or("filter".into(), |s| s.to_string_lossy().into_owned());
            Ok((profile, range_mm, label))
        }
        (None, Some(r)) => {
            let profile = mwphotonics::design_symmetric_ramp(r * 1e-3, cfg, f.t_min)?;
            Ok((profile, r, format!("ramp {r} mm")))
        }
        (None, None) => Err(AppError::Input("give --filter or --range-mm".into())),
    }
}

fn filter_json(f: &FilterArgs, profile: &FilterProfile) -> serde_json::Value {
    json!({ "breakpoints": profile.breakpoints(), "symmetric": profile.is_symmetric(), "range_mm": f.range_mm })
}

fn calibrate(ctx: &Ctx, a: CalibrateArgs) -> Result<(), AppError> {
    let (_, cfg) = load_config(a.config.config.as_deref())?;
    let noise = load_noise(a.noise.as_deref(), ctx.seed)?;
    let (profile, range_mm, _) = resolve_filter(&a.filter, &cfg)?;
    let grid_max = a.grid_max_mm.unwrap_or(range_mm);
    let mut run = Run::new(
        "calibrate",
        &a.out.out_dir,
        Some(noise.seed),
        ctx.exec.jobs(),
        json!({ "config": cfg, "noise": noise, "filter": filter_json(&a.filter, &profile),
                "grid": a.grid, "grid_max_mm": grid_max, "pulses": a.pulses }),
    )?;
    run.input(a.config.config.as_deref());
    run.input(a.filter.filter.as_deref());
    run.input(a.noise.as_deref());
    let chain = SignalChain::new(&cfg, Envelope::default_for(&cfg)?, profile)?;
    let cal = runner::run_calibration(&chain, &noise, &uniform_grid(grid_max, a.grid), a.pulses, ctx.exec)?;
    run.json("curve.json", &CurveFile::from_curve(&cal.curve, &cal.residuals))?;
    let points = run.output("calibration_points.csv");
    formats::write_points_csv(&points, &cal.points, Some(&cal.curve))?;
    run.json("calibration.json", &Payload::Calibration(cal.clone()))?;
    let c = &cal.curve;
    println!(
        "T(x) = {:.6e}·x + {:.6e}·x² + {:.6e}·x³ + {:.6}  on [{}, {}] mm",
        c.a, c.b, c.c3, c.d, c.valid_range.0, c.valid_range.1
    );
    println!("monotone: {:?}, max |residual| {:.3e}", c.certificate.direction, cal.max_abs_residual);
    run.finish()
}

fn measure(ctx: &Ctx, a: MeasureArgs) -> Result<(), AppError> {
    let (_, cfg) = load_config(a.config.config.as_deref())?;
    let noise = load_noise(a.noise.as_deref(), ctx.seed)?;
    let (profile, _, label) = resolve_filter(&a.filter, &cfg)?;
    let curve_file: CurveFile = read_json(&a.curve)?;
    let curve = curve_file.to_curve()?;
    let protocol = runner::CampaignProtocol {
        repeats: a.repeats,
        n_pulses: a.pulses,
    };
    let mut run = Run::new(
        "measure",
        &a.out.out_dir,
        Some(noise.seed),
        ctx.exec.jobs(),
        json!({ "config": cfg, "noise": noise, "filter": filter_json(&a.filter, &profile), "curve": curve_file,
                "x_mm": a.x_mm, "protocol": protocol }),
    )?;
    run.input(a.config.config.as_deref());
    run.input(a.filter.filter.as_deref());
    run.input(Some(&a.curve));
    run.input(a.noise.as_deref());
    let chain = SignalChain::new(&cfg, Envelope::default_for(&cfg)?, profile)?;
    let report = runner::run_campaign(&chain, &curve, &noise, &a.x_mm, protocol, &label, ctx.exec)?;
    write_campaign(&mut run, "measurement", &report)?;
    run.throughput = Some((a.x_mm.len() * a.repeats) as f64 / run.start.elapsed().as_secs_f64());
    run.finish()
}

fn write_campaign(run: &mut Run, stem: &str, report: &MeasurementReport) -> Result<(), AppError> {
    run.json(&format!("{stem}.json"), &Payload::Measurement(report.clone()))?;
    let csv = run.output(&format!("{stem}.csv"));
    formats::write_report_csv(&csv, &[report])?;
    print!("{}", render_measurement(report));
    Ok(())
}

fn sweep(ctx: &Ctx, a: SweepArgs) -> Result<(), AppError> {
    let (_, cfg) = load_config(a.config.config.as_deref())?;
    let noise = load_noise(a.noise.as_deref(), ctx.seed)?;
    let protocol = load_protocol(a.protocol.as_deref())?;
    let (profile, range_mm, label) = resolve_filter(&a.filter, &cfg)?;
    let points = a.points.unwrap_or(protocol.points_per_range);
    let mut run = Run::new(
        "sweep",
        &a.out.out_dir,
        Some(noise.seed),
        ctx.exec.jobs(),
        json!({ "config": cfg, "noise": noise, "filter": filter_json(&a.filter, &profile),
                "protocol": protocol, "points": points, "range_mm": range_mm }),
    )?;
    run.input(a.config.config.as_deref());
    run.input(a.filter.filter.as_deref());
    run.input(a.noise.as_deref());
    run.input(a.protocol.as_deref());
    let chain = SignalChain::new(&cfg, Envelope::default_for(&cfg)?, profile)?;
    let cal = runner::run_calibration(
        &chain,
        &noise,
        &uniform_grid(range_mm, protocol.calibration_points),
        protocol.calibration_pulses,
        ctx.exec,
    )?;
    run.json("curve.json", &CurveFile::from_curve(&cal.curve, &cal.residuals))?;
    let pts = run.output("calibration_points.csv");
    formats::write_points_csv(&pts, &cal.points, Some(&cal.curve))?;
    let xs = interior_grid(range_mm, points);
    let report = runner::run_campaign(&chain, &cal.curve, &noise, &xs, protocol.campaign(), &label, ctx.exec)?;
    write_campaign(&mut run, "sweep", &report)?;
    run.throughput = Some((xs.len() * protocol.repeats) as f64 / run.start.elapsed().as_secs_f64());
    run.finish()
}

fn tradeoff(ctx: &Ctx, a: TradeoffArgs) -> Result<(), AppError> {
    let (_, cfg) = load_config(a.config.config.as_deref())?;
    let noise = load_noise(a.noise.as_deref(), ctx.seed)?;
    let protocol = load_protocol(a.protocol.as_deref())?;
    let mut run = Run::new(
        "tradeoff",
        &a.out.out_dir,
        Some(noise.seed),
        ctx.exec.jobs(),
        json!({ "config": cfg, "noise": noise, "protocol": protocol }),
    )?;
    run.input(a.config.config.as_deref());
    run.input(a.noise.as_deref());
    run.input(a.protocol.as_deref());
    let report = runner::tradeoff_study(&cfg, &noise, &protocol.tradeoff(), ctx.exec)?;
    run.json("tradeoff.json", &Payload::Tradeoff(report.clone()))?;
    let table = formats::tradeoff_table(&report);
    let table_path = run.output("tradeoff_table.csv");
    formats::write_table_csv(&table_path, &table)?;
    let points_path = run.output("tradeoff_points.csv");
    let reports: Vec<&MeasurementReport> = report.columns.iter().map(|c| &c.report).collect();
    formats::write_report_csv(&points_path, &reports)?;
    print!("{}", render_tradeoff(&report));
    let cells = protocol.ranges_mm.len()
        * (protocol.points_per_range * protocol.repeats + protocol.calibration_points);
    run.throughput = Some(cells as f64 / run.start.elapsed().as_secs_f64());
    run.finish()
}

fn baseline(ctx: &Ctx, a: BaselineArgs) -> Result<(), AppError> {
    let (_, cfg) = load_config(a.config.config.as_deref())?;
    let mut adc = cfg.adc_baseline;
    if let Some(b) = a.bits {
        adc.bits = b;
    }
    let xs = if a.x_mm.is_empty() {
        let range = match a.range_mm {
            Some(r) => r,
            None => stretch::dynamic_range(&cfg)? * 1e3,
        };
        interior_grid(range, a.points)
    } else {
        a.x_mm.clone()
    };
    let method = match a.method {
        Method::Fft => EstimateMethod::FftPeak,
        Method::Chirp => EstimateMethod::ChirpFit,
    };
    let seed = ctx.seed.unwrap_or(0);
    let mut run = Run::new(
        "baseline",
        &a.out.out_dir,
        Some(seed),
        ctx.exec.jobs(),
        json!({ "config": cfg, "adc": adc, "x_mm": xs, "method": method, "noise_rms": a.noise_rms,
                "waveforms": a.waveforms }),
    )?;
    run.input(a.config.config.as_deref());
    let report = runner::baseline_study(&cfg, &xs, &adc, a.noise_rms, method, seed, ctx.exec)?;
    run.json("baseline.json", &Payload::Baseline(report.clone()))?;
    let csv = run.output("baseline.csv");
    formats::write_baseline_csv(&csv, &report)?;
    if a.waveforms {
        let envelope = Envelope::default_for(&cfg)?;
        let grid = TimeGrid::default_for(&cfg);
        let wdir = run.dir.join("waveforms");
        std::fs::create_dir_all(&wdir).map_err(|e| AppError::io(&wdir, e))?;
        for (i, x) in xs.iter().enumerate() {
            let w = stretch::synthesize_interferogram(x * 1e-3, &cfg, &envelope, &grid, 0.5 * adc.full_scale)?;
            let name = format!("waveforms/interferogram_{i:03}.bin");
            let path = run.output(&name);
            formats::write_waveform_bin(&path, &w)?;
        }
    }
    print!("{}", render_baseline(&report));
    run.throughput = Some(xs.len() as f64 / run.start.elapsed().as_secs_f64());
    run.finish()
}

fn report(a: ReportArgs) -> Result<(), AppError> {
    let payload: Payload = read_json(&a.input)?;
    let text = match &payload {
        Payload::Validation(v) => render_validation(v),
        Payload::Calibration(c) => render_calibration(c),
        Payload::Measurement(m) => render_measurement(m),
        Payload::Tradeoff(t) => render_tradeoff(t),
        Payload::Baseline(b) => render_baseline(b),
    };
    let mut run = Run::new("report", &a.out.out_dir, None, 1, json!({ "payload": payload }))?;
    run.input(Some(&a.input));
    run.text("report.md", &text)?;
    print!("{text}");
    run.finish()
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or("-".into(), |v| format!("{v:.digits$}"))
}

pub fn render_validation(v: &ValidationReport) -> String {
    let mut s = format!("validation: {}\n\n", if v.passed { "pass" } else { "fail" });
    s += &format!("stretch duration {:.3} ns, period {:.3} ns\n", v.stretch_duration_s * 1e9, v.period_s * 1e9);
    for x in &v.violations {
        s += &format!("- {:?}: {}\n", x.constraint, x.message);
    }
    s
}

pub fn render_calibration(c: &CalibrationRun) -> String {
    let mut rows = vec![vec![
        "displacement (mm)".to_string(),
        "transmission".into(),
        "residual".into(),
    ]];
    for (p, r) in c.points.iter().zip(&c.residuals) {
        rows.push(vec![format!("{}", p.displacement), format!("{:.6}", p.transmission), format!("{r:.3e}")]);
    }
    let k = &c.curve;
    format!(
        "calibration: a={:.6e} b={:.6e} c={:.6e} d={:.6} ({:?})\n\n{}",
        k.a,
        k.b,
        k.c3,
        k.d,
        k.certificate.direction,
        formats::markdown_table(&rows)
    )
}

pub fn render_measurement(m: &MeasurementReport) -> String {
    let mut rows = vec![vec![
        "true (mm)".to_string(),
        "mean retrieved (mm)".into(),
        "std dev (um)".into(),
        "mean error (um)".into(),
        "ok".into(),
        "failed".into(),
    ]];
    for r in &m.records {
        rows.push(vec![
            format!("{}", r.true_mm),
            opt(r.mean_retrieved_mm, 5),
            opt(r.std_dev_um, 2),
            opt(r.mean_error_um, 2),
            r.successes.to_string(),
            r.failures.to_string(),
        ]);
    }
    format!(
        "{}: overall std dev {:.2} um, mean error {:.2} um ({}), {} pulses, update rate {} MHz, {} failures\n\n{}",
        m.filter,
        m.overall_std_dev_um,
        m.overall_mean_error_um,
        m.aggregation,
        m.pulses_averaged,
        m.update_rate_hz / 1e6,
        m.failures,
        formats::markdown_table(&rows)
    )
}

pub fn render_tradeoff(t: &TradeoffReport) -> String {
    let mut s = formats::markdown_table(&formats::tradeoff_table(t));
    for c in &t.columns {
        s.push('\n');
        s += &render_measurement(&c.report);
    }
    s
}

pub fn render_baseline(b: &BaselineReport) -> String {
    let mut rows = vec![vec![
        "true (mm)".to_string(),
        "analytic (GHz)".into(),
        "estimated (GHz)".into(),
        "error (MHz)".into(),
        "retrieved (mm)".into(),
        "error (um)".into(),
    ]];
    for r in &b.rows {
        rows.push(vec![
            format!("{}", r.true_mm),
            opt(r.analytic_hz.map(|f| f / 1e9), 4),
            opt(r.estimate.map(|e| e.frequency / 1e9), 4),
            opt(r.frequency_error_hz.map(|e| e / 1e6), 3),
            opt(r.retrieved_mm, 4),
            opt(r.error_um, 2),
        ]);
    }
    format!(
        "baseline ({:?}, {} bits at {} GS/s): max |frequency error| {:.3} MHz, max |error| {:.2} um\n\n{}",
        b.method,
        b.adc.bits,
        b.adc.sample_rate / 1e9,
        b.max_abs_frequency_error_hz / 1e6,
        b.max_abs_error_um,
        formats::markdown_table(&rows)
    )
}

