//! End-to-end run: simulate a survey, run the QC battery, grid the corrected
//! magnetics at two cell sizes and compare the grayscale renderings.
//!
//! Every artifact lands under the configured output directory:
//!
//! ```text
//! sim/      attitude, mag, base, vlf, rad CSVs and per-line files
//! qc/       corrected magnetics, crossovers, denoised spectra
//! grid/     fine/coarse .asc grids, .pgm images, comparison
//! report.json
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::grid::{self, compare_grids, grid_idw, to_grayscale, GridError, IdwOptions, Stretch};
use crate::model::{self, LineRole, MagSample, ModelError, ScalarSample, SurveyLine, TimeSeries};
use crate::qc::{
    crossover_analysis, diurnal_correct, diurnal_report, fourth_difference, nasvd, CrossoverField,
    CrossoverRecord, FourthDifferenceOptions, QcError, QcFlag, QcReport, SpectraMatrix,
};
use crate::sim::{
    ring_down_rates, settling_metrics, simulate_survey, FlightPlan, SimConfig, SimError, SurveyOutput,
    SuspensionGeometry,
};
use crate::stats;
use crate::version::{version_info, REPORT_SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// bad or inconsistent configuration
    Config,
    Io,
    /// an algorithm rejected its input
    Internal,
}

#[derive(Debug, Error)]
#[error("stage `{stage}` failed: {message}")]
pub struct PipelineError {
    pub stage: String,
    pub kind: FailureKind,
    pub message: String,
    /// stages completed before the failure
    pub partial: Box<RunReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QcThresholds {
    /// explicit d4 threshold in nT; robust default when absent
    pub d4_threshold: Option<f64>,
    pub d4_max_flag_fraction: f64,
    pub tie_tolerance_k_pct: f64,
    pub tie_tolerance_u_ppm: f64,
    pub nasvd_rank: usize,
    /// straight-segment attitude limit, degrees
    pub attitude_envelope_deg: f64,
    pub ring_down_tolerance: f64,
    /// swing amplitude used for settling time and ring-down fits, degrees
    pub settle_threshold_deg: f64,
}

impl Default for QcThresholds {
    fn default() -> Self {
        Self {
            d4_threshold: None,
            d4_max_flag_fraction: 0.01,
            tie_tolerance_k_pct: 0.15,
            tie_tolerance_u_ppm: 0.34,
            nasvd_rank: 4,
            attitude_envelope_deg: 5.0,
            ring_down_tolerance: 0.05,
            settle_threshold_deg: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSettings {
    pub fine_cell_m: f64,
    pub coarse_cell_m: f64,
    pub power: f64,
    /// defaults to four line spacings
    pub search_radius_m: Option<f64>,
    pub stretch: Stretch,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            fine_cell_m: 10.0,
            coarse_cell_m: 100.0,
            power: 2.0,
            search_radius_m: None,
            stretch: Stretch::MinMax,
        }
    }
}

/// Pipeline inputs. Config paths that are absent fall back to built-in
/// defaults; relative paths resolve against the pipeline file's directory
/// when loaded with [`PipelineConfig::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub plan: Option<PathBuf>,
    #[serde(default)]
    pub geometry: Option<PathBuf>,
    #[serde(default)]
    pub sim: Option<PathBuf>,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub thresholds: QcThresholds,
    #[serde(default)]
    pub grid: GridSettings,
    /// replaces the sim config seed when set
    #[serde(default)]
    pub seed: Option<u64>,
}

impl PipelineConfig {
    pub fn with_defaults(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            plan: None,
            geometry: None,
            sim: None,
            out_dir: out_dir.into(),
            thresholds: QcThresholds::default(),
            grid: GridSettings::default(),
            seed: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| setup_error(FailureKind::Io, e))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| setup_error(FailureKind::Config, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.plan, &mut cfg.geometry, &mut cfg.sim].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.out_dir.is_relative() {
            cfg.out_dir = base.join(&cfg.out_dir);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// sha256 of the compact JSON of each effective configuration
    pub plan_sha256: String,
    pub geometry_sha256: String,
    pub sim_sha256: String,
    pub thresholds_sha256: String,
    pub seed: u64,
    pub tool_version: String,
    pub csv_schema_version: u32,
    pub report_schema_version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub pass: bool,
    pub reports: Vec<QcReport>,
    /// paths relative to the output directory
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub provenance: Option<Provenance>,
    pub stages: Vec<StageReport>,
    pub pass: bool,
}

impl RunReport {
    fn push(&mut self, stage: StageReport) {
        self.stages.push(stage);
        self.pass = self.stages.iter().all(|s| s.pass);
    }

    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == name)
    }
}

fn setup_error(kind: FailureKind, e: impl std::fmt::Display) -> PipelineError {
    PipelineError {
        stage: "config".into(),
        kind,
        message: e.to_string(),
        partial: Box::new(RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            provenance: None,
            stages: Vec::new(),
            pass: false,
        }),
    }
}

/// Errors from any module, before they are tied to a stage.
#[derive(Debug, Error)]
enum StageError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Qc(#[from] QcError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl StageError {
    fn kind(&self) -> FailureKind {
        match self {
            StageError::Io(_) | StageError::Model(ModelError::Io(_)) | StageError::Grid(GridError::Io(_)) => {
                FailureKind::Io
            }
            StageError::Sim(SimError::Io(_)) => FailureKind::Io,
            StageError::Sim(SimError::InvalidConfig(_) | SimError::DegeneratePlan(_)) => FailureKind::Config,
            _ => FailureKind::Internal,
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, PipelineError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| setup_error(FailureKind::Io, format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| setup_error(FailureKind::Config, format!("{}: {e}", p.display())))
        }
    }
}

fn sha256_json<T: Serialize>(v: &T) -> String {
    let bytes = serde_json::to_vec(v).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), StageError> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs every stage in order. A stage that cannot run aborts the pipeline
/// with its name and the report so far; a stage that runs but fails its
/// test is recorded and the run continues.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    let plan: FlightPlan = read_json(cfg.plan.as_deref())?;
    let geom: SuspensionGeometry = read_json(cfg.geometry.as_deref())?;
    let mut sim: SimConfig = read_json(cfg.sim.as_deref())?;
    if let Some(seed) = cfg.seed {
        sim.seed = seed;
    }
    let v = version_info();
    let mut report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        provenance: Some(Provenance {
            plan_sha256: sha256_json(&plan),
            geometry_sha256: sha256_json(&geom),
            sim_sha256: sha256_json(&sim),
            thresholds_sha256: sha256_json(&(&cfg.thresholds, &cfg.grid)),
            seed: sim.seed,
            tool_version: v.version,
            csv_schema_version: v.csv_schema_version,
            report_schema_version: v.report_schema_version,
        }),
        stages: Vec::new(),
        pass: true,
    };
    let out = cfg.out_dir.as_path();

    macro_rules! stage {
        ($name:expr, $body:expr) => {
            match $body {
                Ok(s) => s,
                Err(e) => {
                    let e: StageError = e;
                    return Err(PipelineError {
                        stage: $name.into(),
                        kind: e.kind(),
                        message: e.to_string(),
                        partial: Box::new(report),
                    });
                }
            }
        };
    }

    let (survey, st) = stage!("sim", sim_stage(out, &plan, &geom, &sim, &cfg.thresholds));
    report.push(st);
    report.push(stage!("d4", d4_stage(&survey, &cfg.thresholds)));
    let (corrected, st) = stage!("diurnal", diurnal_stage(out, &survey, &sim));
    report.push(st);
    report.push(stage!("tie", tie_stage(out, &survey, &cfg.thresholds)));
    report.push(stage!("nasvd", nasvd_stage(out, &survey, &cfg.thresholds)));
    let (grids, st) = stage!("grid", grid_stage(out, &survey, &corrected, &cfg.grid));
    report.push(st);
    report.push(stage!("compare", compare_stage(out, &grids, &cfg.grid)));

    stage!("report", write_json(&out.join("report.json"), &report));
    Ok(report)
}

fn sim_stage(
    out: &Path,
    plan: &FlightPlan,
    geom: &SuspensionGeometry,
    cfg: &SimConfig,
    th: &QcThresholds,
) -> Result<(SurveyOutput, StageReport), StageError> {
    let survey = simulate_survey(plan, geom, cfg)?;
    let dir = out.join("sim");
    survey.write_dir(&dir)?;
    let mut artifacts: Vec<String> = ["attitude.csv", "mag.csv", "base.csv", "vlf.csv", "rad.csv"]
        .iter()
        .map(|f| format!("sim/{f}"))
        .collect();
    for kind in ["mag", "rad"] {
        for (role, sub) in [(LineRole::Flight, "flights"), (LineRole::Tie, "ties")] {
            for w in survey.legs.iter().filter(|w| w.role == role) {
                artifacts.push(format!("sim/lines/{kind}/{sub}/{}.csv", w.id));
            }
        }
    }
    let env = envelope_report(&survey, cfg, geom, th);
    Ok((survey, StageReport { stage: "sim".into(), pass: env.pass, reports: vec![env], artifacts }))
}

/// Straight-segment attitude and out-of-phase noise, plus post-turn ring-down
/// against the damped-pendulum envelope `exp(-ζωt)`.
fn envelope_report(
    survey: &SurveyOutput,
    cfg: &SimConfig,
    geom: &SuspensionGeometry,
    th: &QcThresholds,
) -> QcReport {
    use crate::sim::Segment;
    let origin = survey.plan.origin_utm;
    let mut worst: f64 = 0.0;
    let mut inside = 0usize;
    let mut total = 0usize;
    let mut resid = Vec::new();
    for (a, v) in survey.attitude.values().iter().zip(survey.vlf.values()) {
        if a.segment != Segment::Line {
            continue;
        }
        let m = [a.uav_roll, a.uav_pitch, v.roll, v.pitch].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        worst = worst.max(m);
        total += 1;
        if m <= th.attitude_envelope_deg {
            inside += 1;
        }
        let truth = cfg.vlf.eval(v.position.easting - origin.easting, v.position.northing - origin.northing);
        resid.push(v.out_of_phase - truth.out_of_phase);
    }
    let noise = 1.96 * stats::population_std(&resid).unwrap_or(0.0);
    let within = if total > 0 { inside as f64 / total as f64 } else { 1.0 };
    let mut r = QcReport::new("sim_envelope")
        .stat("straight_samples", total as f64)
        .stat("max_abs_attitude_deg", worst)
        .stat("within_envelope_fraction", within)
        .stat("outphase_noise_pct", noise)
        .stat("outphase_noise_target_pct", cfg.outphase_noise_pct)
        .stat("zeta_eff", survey.zeta_eff)
        .stat("omega_rad_s", survey.omega)
        .note("outphase noise is the 95% half-width (1.96 sigma) of the residual from the noise-free model");
    let mut pass = within == 1.0 && noise <= cfg.outphase_noise_pct;

    let rd = ring_down_rates(&survey.attitude, geom.cable_length, th.settle_threshold_deg);
    if !rd.is_empty() {
        let expect = survey.zeta_eff * survey.omega;
        let mean = rd.iter().map(|x| x.rate).sum::<f64>() / rd.len() as f64;
        let rel = (mean - expect) / expect;
        r = r
            .stat("ring_down_turns", rd.len() as f64)
            .stat("ring_down_rate_fitted", mean)
            .stat("ring_down_rate_expected", expect)
            .stat("ring_down_rel_error", rel);
        pass &= rel.abs() <= th.ring_down_tolerance;
    }
    match settling_metrics(&survey.attitude, th.settle_threshold_deg, survey.speed, geom.cable_length) {
        Ok(m) => {
            r = r
                .stat("settling_time_s", m.settling_time_s)
                .stat("lead_in_distance_m", m.lead_in_distance_m)
                .stat("lead_in_configured_m", cfg.lead_in_m);
        }
        Err(SimError::NoTurn) => r = r.note("no turns flown"),
        Err(e) => {
            r = r.note(e.to_string());
            pass = false;
        }
    }
    r.pass = pass;
    r
}

/// The fourth-difference test runs leg by leg so gaps between legs are
/// never differenced; the pass rule applies to the pooled counts.
fn d4_stage(survey: &SurveyOutput, th: &QcThresholds) -> Result<StageReport, StageError> {
    let opts =
        FourthDifferenceOptions { threshold: th.d4_threshold, max_flag_fraction: th.d4_max_flag_fraction };
    let mut flags = Vec::new();
    let mut windows = 0usize;
    let mut max_abs: f64 = 0.0;
    let mut thresholds = Vec::new();
    let mut offset = 0usize;
    for leg in &survey.legs {
        let part = survey.mag.slice_time(leg.t_start, leg.t_end - 1e-9);
        let tmi = part.map(|m| m.tmi);
        let d4 = fourth_difference(&tmi, opts)?;
        windows += d4.d4.len();
        max_abs = d4.d4.iter().fold(max_abs, |m, x| m.max(x.abs()));
        thresholds.push(d4.threshold);
        let first = survey.mag.timestamps().partition_point(|t| *t < part.start().unwrap_or(0.0));
        for f in d4.report.flags {
            flags.push(QcFlag { index: first + f.index, ..f });
        }
        offset += part.len();
    }
    let fraction = if windows > 0 { flags.len() as f64 / windows as f64 } else { 0.0 };
    let mut r = QcReport::new("fourth_difference")
        .stat("legs", survey.legs.len() as f64)
        .stat("samples", offset as f64)
        .stat("windows", windows as f64)
        .stat("flagged", flags.len() as f64)
        .stat("flagged_fraction", fraction)
        .stat("max_flag_fraction", th.d4_max_flag_fraction)
        .stat("max_abs_d4", max_abs)
        .stat("threshold_max", thresholds.iter().cloned().fold(0.0, f64::max))
        .note("flag index refers to the first sample of each five-point window in the full record");
    r.pass = fraction <= th.d4_max_flag_fraction;
    r.flags = flags;
    Ok(StageReport { stage: "d4".into(), pass: r.pass, reports: vec![r], artifacts: Vec::new() })
}

fn diurnal_stage(
    out: &Path,
    survey: &SurveyOutput,
    cfg: &SimConfig,
) -> Result<(TimeSeries<MagSample>, StageReport), StageError> {
    let corrected = diurnal_correct(&survey.mag, &survey.base, cfg.diurnal.datum_nt)?;
    let dir = out.join("qc");
    fs::create_dir_all(&dir)?;
    model::write_mag(model::create(&dir.join("mag_corrected.csv"))?, &corrected)?;
    let r = diurnal_report(&survey.mag, &corrected).stat("datum_nT", cfg.diurnal.datum_nt);
    Ok((
        corrected,
        StageReport {
            stage: "diurnal".into(),
            pass: r.pass,
            reports: vec![r],
            artifacts: vec!["qc/mag_corrected.csv".into()],
        },
    ))
}

fn tie_stage(out: &Path, survey: &SurveyOutput, th: &QcThresholds) -> Result<StageReport, StageError> {
    let flights = survey.lines_with_role(&survey.rad, LineRole::Flight);
    let ties = survey.lines_with_role(&survey.rad, LineRole::Tie);
    let mut reports = Vec::new();
    let mut all: Vec<(CrossoverField, Vec<CrossoverRecord>)> = Vec::new();
    for (field, tol) in
        [(CrossoverField::K, th.tie_tolerance_k_pct), (CrossoverField::U, th.tie_tolerance_u_ppm)]
    {
        let (records, r) = crossover_analysis(&flights, &ties, field, tol)?;
        reports.push(r);
        all.push((field, records));
    }
    let dir = out.join("qc");
    fs::create_dir_all(&dir)?;
    let table: Vec<_> =
        all.iter().map(|(f, r)| serde_json::json!({ "field": f.to_string(), "records": r })).collect();
    write_json(&dir.join("crossovers.json"), &table)?;
    Ok(StageReport {
        stage: "tie".into(),
        pass: reports.iter().all(|r| r.pass),
        reports,
        artifacts: vec!["qc/crossovers.json".into()],
    })
}

fn nasvd_stage(out: &Path, survey: &SurveyOutput, th: &QcThresholds) -> Result<StageReport, StageError> {
    let rows: Vec<Vec<f64>> = survey.rad.values().iter().filter_map(|s| s.raw_spectrum.clone()).collect();
    let spectra = SpectraMatrix::from_rows(&rows)?;
    let result = nasvd(&spectra, th.nasvd_rank)?;
    let r = result.report(&spectra);

    let mut k = 0;
    let denoised = survey.rad.map(|s| {
        let mut s = s.clone();
        if s.raw_spectrum.is_some() {
            s.raw_spectrum = Some(result.denoised.row(k).to_vec());
            k += 1;
        }
        s
    });
    let dir = out.join("qc");
    fs::create_dir_all(&dir)?;
    model::write_rad(model::create(&dir.join("rad_denoised.csv"))?, &denoised)?;
    write_json(&dir.join("nasvd_singular_values.json"), &result.singular_values)?;
    Ok(StageReport {
        stage: "nasvd".into(),
        pass: r.pass,
        reports: vec![r],
        artifacts: vec!["qc/rad_denoised.csv".into(), "qc/nasvd_singular_values.json".into()],
    })
}

/// Corrected magnetics on the line proper of every flight and tie line.
fn line_samples(survey: &SurveyOutput, corrected: &TimeSeries<MagSample>) -> Vec<ScalarSample> {
    let lines: Vec<SurveyLine<MagSample>> = survey.split_lines(corrected);
    lines
        .iter()
        .flat_map(|l| l.samples().values().iter())
        .map(|m| ScalarSample { position: m.position, value: m.tmi })
        .collect()
}

fn grid_stage(
    out: &Path,
    survey: &SurveyOutput,
    corrected: &TimeSeries<MagSample>,
    gs: &GridSettings,
) -> Result<([grid::Grid; 2], StageReport), StageError> {
    let samples = line_samples(survey, corrected);
    let radius = gs.search_radius_m.unwrap_or(4.0 * survey.plan.spacing_m);
    let dir = out.join("grid");
    fs::create_dir_all(&dir)?;
    let mut grids = Vec::new();
    let mut reports = Vec::new();
    let mut artifacts = Vec::new();
    for (name, cell) in [("fine", gs.fine_cell_m), ("coarse", gs.coarse_cell_m)] {
        let opts = IdwOptions { cell_size: cell, power: gs.power, search_radius: radius, extent: None };
        let g = grid_idw(&samples, &opts)?;
        grid::write_asc(model::create(&dir.join(format!("{name}.asc")))?, &g)?;
        artifacts.push(format!("grid/{name}.asc"));
        let vals = g.valid_values();
        let mut r = QcReport::new(format!("grid_{name}"))
            .stat("cell_size_m", cell)
            .stat("nx", g.nx as f64)
            .stat("ny", g.ny as f64)
            .stat("valid_cells", g.valid_count() as f64)
            .stat("samples", samples.len() as f64)
            .stat("search_radius_m", radius);
        if let (Some(lo), Some(hi)) =
            (vals.iter().cloned().reduce(f64::min), vals.iter().cloned().reduce(f64::max))
        {
            r = r.stat("min_nT", lo).stat("max_nT", hi);
        }
        r.pass = g.valid_count() > 0;
        reports.push(r);
        grids.push(g);
    }
    let [fine, coarse]: [grid::Grid; 2] = grids.try_into().expect("two grids");
    Ok((
        [fine, coarse],
        StageReport { stage: "grid".into(), pass: reports.iter().all(|r| r.pass), reports, artifacts },
    ))
}

/// Grayscale spread of the fine grid against the coarse one. The comparison
/// is descriptive, so the stage passes once both images are rendered.
fn compare_stage(out: &Path, grids: &[grid::Grid; 2], gs: &GridSettings) -> Result<StageReport, StageError> {
    let [fine, coarse] = grids;
    let dir = out.join("grid");
    for (name, g) in [("fine", fine), ("coarse", coarse)] {
        let img = to_grayscale(g, gs.stretch)?;
        grid::write_pgm(model::create(&dir.join(format!("{name}.pgm")))?, &img)?;
    }
    let cmp = compare_grids(coarse, fine, gs.stretch)?;
    let shared = grid::compare_grids_with(coarse, fine, gs.stretch, grid::Normalization::Shared)?;
    write_json(&dir.join("compare.json"), &cmp)?;
    let mut r = QcReport::new("grid_compare")
        .stat("stddev_fine", cmp.stddev_b)
        .stat("stddev_coarse", cmp.stddev_a)
        .stat("stddev_delta", cmp.delta)
        .stat("shared_stddev_fine", shared.stddev_b)
        .stat("shared_stddev_coarse", shared.stddev_a)
        .stat("fine_ge_coarse", if cmp.stddev_b >= cmp.stddev_a { 1.0 } else { 0.0 })
        .note("each grid stretched over its own value range; shared-range figures are informational");
    r.pass = true;
    Ok(StageReport {
        stage: "compare".into(),
        pass: r.pass,
        reports: vec![r],
        artifacts: vec!["grid/fine.pgm".into(), "grid/coarse.pgm".into(), "grid/compare.json".into()],
    })
}
