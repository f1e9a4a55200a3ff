use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use aerosurvey_core::emi::{
    analyze_buzz, interference_percent, noise_amplitude, BuzzPass, EmiConfig, PassKind,
};
use aerosurvey_core::grid::{
    self, compare_grids_with, grid_idw, read_asc, IdwOptions, Normalization, Stretch,
};
use aerosurvey_core::model::{
    self, read_accel, read_base, read_located_column, read_mag, read_rad, read_scalar_column, IngestMode,
    ScalarSample, SurveyLine, TimeSeries,
};
use aerosurvey_core::pipeline::{run_pipeline, PipelineConfig};
use aerosurvey_core::qc::{
    crossover_analysis, diurnal_correct, diurnal_report, fourth_difference, nasvd, CrossoverField,
    FourthDifferenceOptions, SpectraMatrix,
};
use aerosurvey_core::sim::{simulate_survey, FlightPlan, SimConfig, SuspensionGeometry};
use aerosurvey_core::vibration::{
    amplitude_spectrum, attenuation_db, reduction_factor, select_configuration, IsolatorConfig,
    SpectrumOptions,
};
use aerosurvey_core::{version_info, Axis, LineRole};

use crate::error::{CliError, Result};
use crate::files::{self, create, csv_files, emit_json, open, read_json, read_json_or_default, say};

pub const SEED_ENV: &str = "AEROSURVEY_SEED";

/// Seed from the environment, if set.
fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("{SEED_ENV}='{s}' is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn parse_axis(s: &str) -> std::result::Result<Axis, String> {
    s.parse().map_err(|_| format!("unknown axis '{s}', expected x, y or z"))
}

fn parse_field(s: &str) -> std::result::Result<CrossoverField, String> {
    s.parse().map_err(|e: aerosurvey_core::qc::QcError| e.to_string())
}

fn write_io<W: Write>(path: &Path, w: &mut W, res: std::io::Result<()>) -> Result<()> {
    res.and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

// ---------------------------------------------------------------------------
// vib
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
pub enum VibCmd {
    /// Single-sided amplitude spectrum of one axis
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_axis, default_value = "z")]
        axis: Axis,
        /// replaces the file timestamps with a uniform clock at this rate, Hz
        #[arg(long)]
        rate: Option<f64>,
        /// minimum peak prominence, fraction of the largest bin
        #[arg(long, default_value_t = 0.1)]
        prominence: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Before/after RMS reduction on one axis
    Compare {
        #[arg(long)]
        before: PathBuf,
        #[arg(long)]
        after: PathBuf,
        #[arg(long, value_parser = parse_axis, default_value = "z")]
        axis: Axis,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank isolator configurations by damping effectiveness
    Rank {
        /// JSON list of isolator configurations
        #[arg(long)]
        config: PathBuf,
        /// payload mass, kg
        #[arg(long)]
        mass: f64,
        /// dominant excitation frequency, Hz
        #[arg(long)]
        freq: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_accel(path: &Path, rate: Option<f64>) -> Result<TimeSeries<model::AccelSample>> {
    let s = read_accel(open(path)?, IngestMode::Lenient).map_err(|e| CliError::io(path, e))?;
    match rate {
        None => Ok(s),
        Some(r) if r > 0.0 && r.is_finite() => {
            let t = (0..s.len()).map(|i| i as f64 / r).collect();
            Ok(TimeSeries::new(t, s.values().to_vec())?)
        }
        Some(r) => Err(CliError::usage(format!("--rate must be > 0, got {r}"))),
    }
}

pub fn vib(cmd: VibCmd) -> Result<bool> {
    match cmd {
        VibCmd::Spectrum { input, axis, rate, prominence, out } => {
            let s = load_accel(&input, rate)?;
            let spec = amplitude_spectrum(&s, axis, SpectrumOptions { prominence_frac: prominence })?;
            let mut w = create(&out)?;
            let res = (|| {
                writeln!(w, "freq_hz,amplitude_ms2")?;
                for (f, a) in spec.freqs.iter().zip(&spec.amplitudes) {
                    writeln!(w, "{f},{a}")?;
                }
                Ok(())
            })();
            write_io(&out, &mut w, res)?;
            emit_json(None, &serde_json::json!({ "sample_rate_hz": spec.sample_rate, "peaks": spec.peaks }))?;
        }
        VibCmd::Compare { before, after, axis, out } => {
            let b = load_accel(&before, None)?;
            let a = load_accel(&after, None)?;
            let rf = reduction_factor(&b, &a, axis)?;
            let db = attenuation_db(rf)?;
            emit_json(out.as_deref(), &serde_json::json!({ "reduction_factor": rf, "attenuation_db": db }))?;
        }
        VibCmd::Rank { config, mass, freq, out } => {
            let candidates: Vec<IsolatorConfig> = read_json(&config)?;
            let ranked = select_configuration(&candidates, mass, freq)?;
            emit_json(out.as_deref(), &ranked)?;
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// emi
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
pub enum EmiCmd {
    /// Fit noise against separation and report the threshold distance
    Buzz {
        /// JSON list of {separation_m, kind, csv_path}; paths relative to this file
        #[arg(long)]
        passes: PathBuf,
        /// acceptable noise level, nT
        #[arg(long, default_value_t = 0.2)]
        floor: f64,
        /// trace column
        #[arg(long, default_value = "tmi_nT")]
        column: String,
        #[arg(long, default_value_t = 2.0)]
        detrend: f64,
        /// signal scale for interference percentages
        #[arg(long)]
        signal_scale: Option<f64>,
        /// separations at which to report interference, m
        #[arg(long, value_delimiter = ',')]
        at: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PassKindArg {
    Overflight,
    HoverYaw,
    /// UAV absent; sets the ambient amplitude removed from every pass
    Ambient,
}

#[derive(Debug, Deserialize)]
struct PassEntry {
    #[serde(default)]
    separation_m: f64,
    kind: PassKindArg,
    csv_path: PathBuf,
}

#[derive(Serialize)]
struct InterferenceAt {
    r: f64,
    pct: f64,
}

pub fn emi(cmd: EmiCmd) -> Result<bool> {
    let EmiCmd::Buzz { passes, floor, column, detrend, signal_scale, at, out } = cmd;
    let entries: Vec<PassEntry> = read_json(&passes)?;
    let base = passes.parent().unwrap_or(Path::new("."));
    let mut cfg = EmiConfig { noise_floor: floor, detrend_window_s: detrend, ..EmiConfig::default() };
    cfg.validate()?;
    let mut buzz = Vec::new();
    let mut ambient = Vec::new();
    for e in entries {
        let path = base.join(&e.csv_path);
        let trace = read_scalar_column(open(&path)?, &column, IngestMode::Lenient)
            .map_err(|x| CliError::io(&path, x))?;
        let kind = match e.kind {
            PassKindArg::Ambient => {
                ambient.push(noise_amplitude(&trace, detrend)?);
                continue;
            }
            PassKindArg::Overflight => PassKind::Overflight,
            PassKindArg::HoverYaw => PassKind::HoverYaw,
        };
        buzz.push(BuzzPass { separation: e.separation_m, kind, trace });
    }
    if !ambient.is_empty() {
        cfg.ambient_amplitude = aerosurvey_core::stats::median(&ambient);
    }
    let analysis = analyze_buzz(&buzz, &cfg)?;
    let curve = analysis.governing_curve();
    let mut interference = Vec::new();
    if let Some(scale) = signal_scale {
        for r in at {
            interference.push(InterferenceAt { r, pct: interference_percent(curve, r, scale)? });
        }
    }
    emit_json(
        out.as_deref(),
        &serde_json::json!({
            "points": curve.points,
            "fit": curve.fit,
            "threshold_m": analysis.threshold_m,
            "governing_kind": analysis.governing_kind,
            "ambient_amplitude": cfg.ambient_amplitude,
            "per_kind": analysis.per_kind,
            "interference_pct_at": interference,
        }),
    )?;
    Ok(true)
}

// ---------------------------------------------------------------------------
// sim
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
pub enum SimCmd {
    /// Fly a lawnmower plan and write sensor CSVs
    Survey {
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        geom: Option<PathBuf>,
        #[arg(long)]
        cfg: Option<PathBuf>,
        /// overrides the config seed; the environment seed wins over both
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

pub fn sim(cmd: SimCmd) -> Result<bool> {
    let SimCmd::Survey { plan, geom, cfg, seed, out_dir } = cmd;
    let plan: FlightPlan = read_json_or_default(plan.as_deref())?;
    let geom: SuspensionGeometry = read_json_or_default(geom.as_deref())?;
    let mut cfg: SimConfig = read_json_or_default(cfg.as_deref())?;
    if let Some(s) = env_seed()?.or(seed) {
        cfg.seed = s;
    }
    let out = simulate_survey(&plan, &geom, &cfg)?;
    out.write_dir(&out_dir)?;
    say(&format!(
        "seed {}: {} legs, {} attitude samples, {} radiometric samples -> {}",
        cfg.seed,
        out.legs.len(),
        out.attitude.len(),
        out.rad.len(),
        out_dir.display()
    ));
    Ok(true)
}

// ---------------------------------------------------------------------------
// qc
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
pub enum QcCmd {
    /// Fourth-difference noise test on one column
    D4 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "tmi_nT")]
        field: String,
        /// absolute |d4| limit; default is 4 robust sigma of d4
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        max_flag_fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove base-station variation from rover magnetics
    Diurnal {
        #[arg(long)]
        rover: PathBuf,
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        datum: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Flight/tie crossover differences
    Tie {
        /// directory of flight-line CSVs, one per line
        #[arg(long)]
        flights: PathBuf,
        /// directory of tie-line CSVs, one per line
        #[arg(long)]
        ties: PathBuf,
        #[arg(long, value_parser = parse_field)]
        field: CrossoverField,
        #[arg(long)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank-k spectral denoising of a radiometric CSV with ch columns
    Nasvd {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn load_lines(dir: &Path, field: CrossoverField, role: LineRole) -> Result<Vec<SurveyLine<ScalarSample>>> {
    let mut out = Vec::new();
    for path in csv_files(dir)? {
        let s = read_located_column(open(&path)?, field.column(), IngestMode::Lenient)
            .map_err(|e| CliError::io(&path, e))?;
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        out.push(SurveyLine::new(id, role, s).map_err(|e| CliError::io(&path, e))?);
    }
    if out.is_empty() {
        return Err(CliError::io(dir, "no .csv line files"));
    }
    Ok(out)
}

pub fn qc(cmd: QcCmd) -> Result<bool> {
    match cmd {
        QcCmd::D4 { input, field, threshold, max_flag_fraction, out } => {
            let s = read_scalar_column(open(&input)?, &field, IngestMode::Lenient)
                .map_err(|e| CliError::io(&input, e))?;
            let d4 = fourth_difference(&s, FourthDifferenceOptions { threshold, max_flag_fraction })?;
            emit_json(out.as_deref(), &d4.report)?;
            Ok(d4.report.pass)
        }
        QcCmd::Diurnal { rover, base, datum, out, report } => {
            let r = read_mag(open(&rover)?, IngestMode::Lenient).map_err(|e| CliError::io(&rover, e))?;
            let b = read_base(open(&base)?, IngestMode::Lenient).map_err(|e| CliError::io(&base, e))?;
            let corrected = diurnal_correct(&r, &b, datum)?;
            model::write_mag(create(&out)?, &corrected).map_err(|e| CliError::io(&out, e))?;
            let rep = diurnal_report(&r, &corrected).stat("datum_nT", datum);
            if let Some(p) = report {
                emit_json(Some(&p), &rep)?;
            }
            Ok(rep.pass)
        }
        QcCmd::Tie { flights, ties, field, tol, out } => {
            let f = load_lines(&flights, field, LineRole::Flight)?;
            let t = load_lines(&ties, field, LineRole::Tie)?;
            let (records, report) = crossover_analysis(&f, &t, field, tol)?;
            emit_json(
                out.as_deref(),
                &serde_json::json!({
                    "test": report.test,
                    "pass": report.pass,
                    "stats": report.stats,
                    "flags": report.flags,
                    "notes": report.notes,
                    "records": records,
                }),
            )?;
            Ok(report.pass)
        }
        QcCmd::Nasvd { input, k, out, report } => {
            let rad = read_rad(open(&input)?, IngestMode::Lenient).map_err(|e| CliError::io(&input, e))?;
            let rows: Vec<Vec<f64>> = rad.values().iter().filter_map(|s| s.raw_spectrum.clone()).collect();
            if rows.is_empty() {
                return Err(CliError::io(&input, "no ch0..chN spectrum columns"));
            }
            let spectra = SpectraMatrix::from_rows(&rows)?;
            let result = nasvd(&spectra, k)?;
            let mut i = 0;
            let denoised = rad.map(|s| {
                let mut s = s.clone();
                if s.raw_spectrum.is_some() {
                    s.raw_spectrum = Some(result.denoised.row(i).to_vec());
                    i += 1;
                }
                s
            });
            model::write_rad(create(&out)?, &denoised).map_err(|e| CliError::io(&out, e))?;
            let rep = result.report(&spectra);
            emit_json(report.as_deref(), &rep)?;
            Ok(rep.pass)
        }
    }
}

// ---------------------------------------------------------------------------
// grid
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, ValueEnum)]
pub enum NormArg {
    Independent,
    Shared,
}

#[derive(Subcommand)]
pub enum GridCmd {
    /// Inverse-distance-weighted grid of one column
    Make {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "tmi_nT")]
        field: String,
        /// cell size, m
        #[arg(long)]
        cell: f64,
        #[arg(long, default_value_t = 2.0)]
        power: f64,
        /// line spacing, m; the search radius defaults to four spacings
        #[arg(long, default_value_t = 25.0)]
        spacing: f64,
        #[arg(long)]
        radius: Option<f64>,
        /// ESRI ASCII grid output
        #[arg(long)]
        out: PathBuf,
        /// optional grayscale PGM rendering
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Grayscale intensity spread of two grids
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value = "independent")]
        normalization: NormArg,
        /// percentile stretch "LO,HI" instead of min-max
        #[arg(long, value_delimiter = ',', num_args = 2)]
        percentile: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_asc(path: &Path) -> Result<grid::Grid> {
    read_asc(open(path)?).map_err(|e| CliError::io(path, e))
}

pub fn grid(cmd: GridCmd) -> Result<bool> {
    match cmd {
        GridCmd::Make { input, field, cell, power, spacing, radius, out, pgm } => {
            let s = read_located_column(open(&input)?, &field, IngestMode::Lenient)
                .map_err(|e| CliError::io(&input, e))?;
            let mut opts = IdwOptions::for_line_spacing(cell, spacing);
            opts.power = power;
            if let Some(r) = radius {
                opts.search_radius = r;
            }
            let g = grid_idw(s.values(), &opts)?;
            grid::write_asc(create(&out)?, &g).map_err(|e| CliError::io(&out, e))?;
            if let Some(p) = pgm {
                let img = grid::to_grayscale(&g, Stretch::MinMax)?;
                grid::write_pgm(create(&p)?, &img).map_err(|e| CliError::io(&p, e))?;
            }
            say(&format!("{} x {} cells, {} valid -> {}", g.nx, g.ny, g.valid_count(), out.display()));
        }
        GridCmd::Compare { a, b, normalization, percentile, out } => {
            let ga = load_asc(&a)?;
            let gb = load_asc(&b)?;
            let stretch = match percentile.as_deref() {
                Some([lo, hi]) => Stretch::Percentile { lo: *lo, hi: *hi },
                _ => Stretch::MinMax,
            };
            let norm = match normalization {
                NormArg::Independent => Normalization::Independent,
                NormArg::Shared => Normalization::Shared,
            };
            let cmp = compare_grids_with(&ga, &gb, stretch, norm)?;
            emit_json(out.as_deref(), &cmp)?;
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// pipeline, version
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct PipelineArgs {
    /// pipeline JSON; built-in defaults when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// overrides the configured output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn pipeline(args: PipelineArgs) -> Result<bool> {
    let mut cfg = match (&args.config, &args.out_dir) {
        (Some(p), _) => PipelineConfig::load(p)?,
        (None, Some(d)) => PipelineConfig::with_defaults(d),
        (None, None) => return Err(CliError::usage("pipeline needs --config or --out-dir")),
    };
    if let Some(d) = args.out_dir {
        cfg.out_dir = d;
    }
    if let Some(s) = env_seed()? {
        cfg.seed = Some(s);
    }
    fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::io(&cfg.out_dir, e))?;
    let report = match run_pipeline(&cfg) {
        Ok(r) => r,
        Err(e) => {
            for s in &e.partial.stages {
                eprintln!("{:<8} {}", s.stage, if s.pass { "pass" } else { "FAIL" });
            }
            return Err(e.into());
        }
    };
    for s in &report.stages {
        say(&format!("{:<8} {}", s.stage, if s.pass { "pass" } else { "FAIL" }));
    }
    say(&format!(
        "overall  {} -> {}",
        if report.pass { "pass" } else { "FAIL" },
        cfg.out_dir.join("report.json").display()
    ));
    Ok(report.pass)
}

#[derive(Args)]
pub struct VersionArgs {
    #[arg(long)]
    json: bool,
}

pub fn version(args: VersionArgs) -> Result<bool> {
    let v = version_info();
    if args.json {
        say(&files::to_json(&v));
    } else {
        say(&format!(
            "aerosurvey {} (csv schema {}, report schema {})",
            v.version, v.csv_schema_version, v.report_schema_version
        ));
    }
    Ok(true)
}
