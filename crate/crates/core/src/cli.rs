//! Command-line front end. `run` is the whole program minus process exit so
//! that it can be driven from tests.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{Rotation3, UnitQuaternion};

use crate::data::{
    load_hand_model, load_layout_meshes, parse_config, parse_execution_log, parse_grasp_set, parse_layout,
    parse_pose_set, parse_reach_log, validate_dataset, BenchmarkConfig, DataError, DatasetRefs, ExecutionLog,
    GraspSet, HandModel, Layout, Modality, PoseSet, ReachLog, TriMesh, ValidationReport,
};
use crate::platform::RegionScore;
use crate::scorecard::{emit_report, render_layout, score_layout, Overlays, ReportFormat};
use crate::se3::Pose;
use crate::stages::{
    execution_stage, platform_stage, quality_stage, scorecard_inputs, ExecutionStage, PlatformInputs, PlatformStage,
    QualityStage,
};
use crate::wrench::QualitySettings;

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "GRASPA_DATA_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "graspa", version, about = "Scores grasping-pipeline runs on the benchmark layouts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cross-check the dataset files of a layout (all layouts if none given)
    Validate,
    /// Reachability score S0 per region and object
    ScoreReachability,
    /// Camera-calibration score S1 per region and object
    ScoreCalibration,
    /// Graspability score S2 per object
    ScoreGraspability,
    /// Grasp quality S3 per object and trial
    ScoreQuality,
    /// Execution scores S4, S5, S6 and stability waypoints
    ScoreExecution,
    /// Final scorecard of a layout
    Report,
    /// Top-down SVG drawing of a layout
    Render {
        /// Markers to draw over the board
        #[arg(long, value_enum)]
        overlay: Vec<Overlay>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Overlay {
    Poses,
    Grasps,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Markdown,
    Html,
    /// Stage cache or scorecard XML
    Xml,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModalityArg {
    Isolation,
    Clutter,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Benchmark configuration file [default: <data-dir>/config.xml]
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Layout id (0, 1, 2) or layout file
    #[arg(long, global = true)]
    pub layout: Option<String>,
    /// Directory holding the benchmark files
    #[arg(long, global = true, env = DATA_DIR_ENV)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override the configured modality
    #[arg(long, global = true, value_enum)]
    pub modality: Option<ModalityArg>,
    /// The pipeline does not use vision: skip S1
    #[arg(long, global = true)]
    pub no_vision: bool,
    /// Override the sampling seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the quality stage
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Hand model [default: <data-dir>/hand.xml]
    #[arg(long, global = true)]
    pub hand: Option<PathBuf>,
    /// Pose set [default: <data-dir>/poses/poses_<L>.xml]
    #[arg(long, global = true)]
    pub poses: Option<PathBuf>,
    /// Reachability log [default: <data-dir>/logs/reach_<L>.xml]
    #[arg(long, global = true)]
    pub reach_log: Option<PathBuf>,
    /// Calibration log [default: <data-dir>/logs/calibration_<L>.xml]
    #[arg(long, global = true)]
    pub calibration_log: Option<PathBuf>,
    /// Grasp set [default: <data-dir>/logs/grasps_<L>.xml]
    #[arg(long, global = true)]
    pub grasps: Option<PathBuf>,
    /// Execution log [default: <data-dir>/logs/execution_<L>.xml]
    #[arg(long, global = true)]
    pub execution_log: Option<PathBuf>,
    /// Cached platform stage [default: <data-dir>/cache/platform_<L>.xml if present]
    #[arg(long, global = true)]
    pub platform_cache: Option<PathBuf>,
    /// Cached quality stage [default: <data-dir>/cache/quality_<L>.xml if present]
    #[arg(long, global = true)]
    pub quality_cache: Option<PathBuf>,
    /// Cached execution stage [default: <data-dir>/cache/execution_<L>.xml if present]
    #[arg(long, global = true)]
    pub execution_cache: Option<PathBuf>,
    /// Ignore cache files found in the data directory
    #[arg(long, global = true)]
    pub recompute: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Invalid(String),
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

type ObjectScore = fn(&crate::stages::PlatformObject) -> Option<f64>;

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

struct Context {
    common: Common,
    data_dir: PathBuf,
}

impl Context {
    fn path(&self, explicit: &Option<PathBuf>, default: impl AsRef<Path>) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.data_dir.join(default))
    }

    fn config(&self) -> Result<BenchmarkConfig, CliError> {
        let path = self.path(&self.common.config, "config.xml");
        let mut c = if self.common.config.is_none() && !path.exists() {
            log::info!("no config file at {}, using defaults", path.display());
            BenchmarkConfig::default()
        } else {
            parse_config(&path)?
        };
        if let Some(m) = self.common.modality {
            c.modality = match m {
                ModalityArg::Isolation => Modality::Isolation,
                ModalityArg::Clutter => Modality::Clutter,
            };
        }
        if self.common.no_vision {
            c.uses_vision = false;
        }
        if let Some(s) = self.common.seed {
            c.seed = s;
        }
        Ok(c)
    }

    fn layout_path(&self, spec: &str) -> PathBuf {
        match spec.parse::<u8>() {
            Ok(id) => self.data_dir.join("layouts").join(format!("layout_{id}.xml")),
            Err(_) => PathBuf::from(spec),
        }
    }

    fn layout(&self) -> Result<(Layout, PathBuf), CliError> {
        let spec = self
            .common
            .layout
            .as_deref()
            .ok_or_else(|| CliError::Usage("--layout is required".into()))?;
        let path = self.layout_path(spec);
        Ok((parse_layout(&path)?, path))
    }

    fn file(&self, explicit: &Option<PathBuf>, dir: &str, stem: &str, layout: u8) -> PathBuf {
        self.path(explicit, Path::new(dir).join(format!("{stem}_{layout}.xml")))
    }

    /// Cache file to read, if one applies.
    fn cache(&self, explicit: &Option<PathBuf>, stem: &str, layout: u8) -> Option<PathBuf> {
        if explicit.is_some() {
            return explicit.clone();
        }
        let p = self.data_dir.join("cache").join(format!("{stem}_{layout}.xml"));
        (!self.common.recompute && p.exists()).then_some(p)
    }

    fn hand(&self) -> Result<HandModel, CliError> {
        Ok(load_hand_model(&self.path(&self.common.hand, "hand.xml"))?)
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    if let Some(n) = cli.common.jobs {
        if n == 0 {
            let _ = writeln!(err, "error: --jobs must be at least 1");
            return EXIT_USAGE;
        }
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("thread pool already initialized, --jobs ignored");
        }
    }
    let ctx = Context {
        data_dir: cli.common.data_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
        common: cli.common,
    };
    let result = match &cli.command {
        Command::Validate => validate(&ctx),
        Command::ScoreReachability => platform_command(&ctx, PlatformView::Reachability),
        Command::ScoreCalibration => platform_command(&ctx, PlatformView::Calibration),
        Command::ScoreGraspability => platform_command(&ctx, PlatformView::Graspability),
        Command::ScoreQuality => score_quality(&ctx),
        Command::ScoreExecution => score_execution(&ctx),
        Command::Report => report(&ctx),
        Command::Render { overlay } => render(&ctx, overlay),
    };
    let (code, text) = match result {
        Ok(Outcome { text, ok }) => (if ok { EXIT_OK } else { EXIT_INVALID }, text),
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_USAGE;
        }
        Err(CliError::Invalid(m)) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_INVALID;
        }
    };
    match &ctx.common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return EXIT_INVALID;
            }
        }
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    code
}

struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Result<Self, CliError> {
        Ok(Self { text, ok: true })
    }
}

fn require_format(ctx: &Context, allowed: &[OutputFormat]) -> Result<(), CliError> {
    if allowed.contains(&ctx.common.format) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--format {:?} is not supported by this command",
            ctx.common.format
        )))
    }
}

fn validate(ctx: &Context) -> Result<Outcome, CliError> {
    require_format(ctx, &[OutputFormat::Text])?;
    let layouts: Vec<String> = match &ctx.common.layout {
        Some(l) => vec![l.clone()],
        None => (0..=2u8)
            .map(|i| i.to_string())
            .filter(|i| ctx.layout_path(i).exists())
            .collect(),
    };
    if layouts.is_empty() {
        return Err(CliError::Invalid(format!("no layout files under {}", ctx.data_dir.display())));
    }
    let mut text = String::new();
    let mut ok = true;
    for spec in layouts {
        let report = validate_layout(ctx, &spec);
        let _ = writeln!(text, "layout {spec}:");
        for line in report.to_string().lines() {
            let _ = writeln!(text, "  {line}");
        }
        ok &= report.is_runnable();
    }
    Ok(Outcome { text, ok })
}

/// Loads what exists for one layout; load failures become findings.
fn validate_layout(ctx: &Context, spec: &str) -> ValidationReport {
    let mut findings = ValidationReport::default();
    let mut note = |source: &str, e: &dyn std::fmt::Display| {
        findings.findings.push(crate::data::Finding {
            source: source.to_string(),
            object: None,
            message: e.to_string(),
        })
    };
    let config = match ctx.config() {
        Ok(c) => c,
        Err(CliError::Invalid(m) | CliError::Usage(m)) => {
            note("config", &m);
            BenchmarkConfig::default()
        }
    };
    let layout_path = ctx.layout_path(spec);
    let layout = match parse_layout(&layout_path) {
        Ok(l) => Some(l),
        Err(e) => {
            note("layout", &e);
            None
        }
    };
    if let Some(l) = &layout {
        if let Err(e) = load_layout_meshes(l, &layout_path) {
            note("meshes", &e);
        }
    }
    let id = layout.as_ref().map(|l| l.id).or_else(|| spec.parse().ok()).unwrap_or(0);
    fn optional<T>(
        path: PathBuf,
        explicit: bool,
        parse: impl Fn(&Path) -> Result<T, DataError>,
        note: &mut dyn FnMut(&str, &dyn std::fmt::Display),
        source: &str,
    ) -> Option<T> {
        if !explicit && !path.exists() {
            return None;
        }
        parse(&path).map_err(|e| note(source, &e)).ok()
    }
    let c = &ctx.common;
    let hand_path = ctx.path(&c.hand, "hand.xml");
    let hand = optional(hand_path, c.hand.is_some(), load_hand_model, &mut note, "hand model");
    let poses: Option<PoseSet> = optional(
        ctx.file(&c.poses, "poses", "poses", id),
        c.poses.is_some(),
        parse_pose_set,
        &mut note,
        "pose set",
    );
    let reach: Option<ReachLog> = optional(
        ctx.file(&c.reach_log, "logs", "reach", id),
        c.reach_log.is_some(),
        parse_reach_log,
        &mut note,
        "reach log",
    );
    let calib: Option<ReachLog> = optional(
        ctx.file(&c.calibration_log, "logs", "calibration", id),
        c.calibration_log.is_some(),
        parse_reach_log,
        &mut note,
        "calibration log",
    );
    let grasps: Option<GraspSet> = optional(
        ctx.file(&c.grasps, "logs", "grasps", id),
        c.grasps.is_some(),
        parse_grasp_set,
        &mut note,
        "grasp set",
    );
    let execution: Option<ExecutionLog> = optional(
        ctx.file(&c.execution_log, "logs", "execution", id),
        c.execution_log.is_some(),
        parse_execution_log,
        &mut note,
        "execution log",
    );
    let refs = DatasetRefs {
        layout: layout.as_ref(),
        pose_sets: poses.iter().collect(),
        reach_logs: reach.iter().chain(calib.iter()).collect(),
        grasps: grasps.as_ref(),
        execution: execution.as_ref(),
        hand: hand.as_ref(),
    };
    let mut report = validate_dataset(&refs, &config);
    findings.findings.append(&mut report.findings);
    findings
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum PlatformView {
    Reachability,
    Calibration,
    Graspability,
}

fn load_platform_raw(ctx: &Context, layout: &Layout, layout_path: &Path, config: &BenchmarkConfig) -> Result<PlatformStage, CliError> {
    let c = &ctx.common;
    let meshes = load_layout_meshes(layout, layout_path)?;
    let hand = ctx.hand()?;
    let poses = parse_pose_set(&ctx.file(&c.poses, "poses", "poses", layout.id))?;
    let reach = parse_reach_log(&ctx.file(&c.reach_log, "logs", "reach", layout.id))?;
    reach.check_against(&poses)?;
    let calib_path = ctx.file(&c.calibration_log, "logs", "calibration", layout.id);
    let calib = if config.uses_vision {
        let log = parse_reach_log(&calib_path)?;
        log.check_against(&poses)?;
        Some(log)
    } else {
        None
    };
    let inputs = PlatformInputs {
        layout,
        meshes: &meshes,
        hand: &hand,
        poses: &poses,
        reach_log: &reach,
        calibration_log: calib.as_ref(),
    };
    platform_stage(&inputs, config).map_err(invalid)
}

fn regions_table(out: &mut String, title: &str, scores: &[RegionScore]) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{:<8}{:>9}{:>7}{:>7}", "region", "reached", "total", "score");
    for r in scores {
        let _ = writeln!(out, "{:<8}{:>9}{:>7}{:>7.2}", r.region.to_string(), r.n_reached, r.n_total, r.score);
    }
}

fn platform_command(ctx: &Context, view: PlatformView) -> Result<Outcome, CliError> {
    require_format(ctx, &[OutputFormat::Text, OutputFormat::Xml])?;
    let config = ctx.config()?;
    let (layout, layout_path) = ctx.layout()?;
    if view == PlatformView::Graspability && ctx.common.format == OutputFormat::Text {
        // S2 needs only the layout and the hand
        let hand = ctx.hand()?;
        let mut text = format!("Graspability, layout {}\n", layout.id);
        let w = layout.objects.iter().map(|o| o.name.len()).max().unwrap_or(6).max(6);
        let _ = writeln!(text, "{:<w$}  {:>8}  {:>8}  {:>3}  note", "object", "payload", "aperture", "S2");
        for o in &layout.objects {
            let g = crate::platform::graspability(o, &hand);
            let yn = |b: bool| if b { "ok" } else { "exceeds" };
            let note = g.overridden.map(|j| format!("override: {j}")).unwrap_or_default();
            let line = format!(
                "{:<w$}  {:>8}  {:>8}  {:>3}  {note}",
                o.name,
                yn(g.payload_ok),
                yn(g.aperture_ok),
                u8::from(g.score)
            );
            let _ = writeln!(text, "{}", line.trim_end());
        }
        return Outcome::ok(text);
    }
    let stage = load_platform_raw(ctx, &layout, &layout_path, &config)?;
    if ctx.common.format == OutputFormat::Xml {
        return Outcome::ok(stage.to_xml());
    }
    let mut text = String::new();
    let (title, regions, pick): (&str, &[RegionScore], ObjectScore) = match view {
        PlatformView::Calibration => (
            "Camera calibration (S1)",
            stage
                .calibration
                .as_deref()
                .ok_or_else(|| CliError::Usage("calibration is not scored when vision is not used".into()))?,
            |o| o.s1,
        ),
        _ => ("Reachability (S0)", &stage.reach, |o| Some(o.s0)),
    };
    regions_table(&mut text, &format!("{title}, layout {}", layout.id), regions);
    let _ = writeln!(text);
    let w = layout.objects.iter().map(|o| o.name.len()).max().unwrap_or(6).max(6);
    let _ = writeln!(text, "{:<w$}  {:>7}  score", "object", "regions");
    for o in &layout.objects {
        let p = &stage.objects[&o.name];
        let regions = p.regions.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
        let score = pick(p).map_or("-".to_string(), |s| format!("{s:.2}"));
        let _ = writeln!(text, "{:<w$}  {regions:>7}  {score}", o.name);
    }
    Outcome::ok(text)
}

fn compute_quality(ctx: &Context, layout: &Layout, layout_path: &Path, config: &BenchmarkConfig) -> Result<QualityStage, CliError> {
    let meshes: BTreeMap<String, TriMesh> = load_layout_meshes(layout, layout_path)?;
    let hand = ctx.hand()?;
    let grasps = parse_grasp_set(&ctx.file(&ctx.common.grasps, "logs", "grasps", layout.id))?;
    let settings = QualitySettings::from(config);
    quality_stage(layout, &meshes, &grasps, &hand, &settings).map_err(invalid)
}

fn score_quality(ctx: &Context) -> Result<Outcome, CliError> {
    require_format(ctx, &[OutputFormat::Text, OutputFormat::Xml])?;
    let config = ctx.config()?;
    let (layout, layout_path) = ctx.layout()?;
    let stage = compute_quality(ctx, &layout, &layout_path, &config)?;
    if ctx.common.format == OutputFormat::Xml {
        return Outcome::ok(stage.to_xml());
    }
    let mut text = format!("Grasp quality (S3), layout {}\n", layout.id);
    for (name, o) in &stage.objects {
        let Some(o) = o else {
            let _ = writeln!(text, "{name}: no grasps");
            continue;
        };
        let mean = o.trials.iter().map(|t| t.s3).sum::<f64>() / o.trials.len().max(1) as f64;
        let _ = writeln!(
            text,
            "{name}: mean S3 {mean:.4}, OWS radius {:.4}{}",
            o.ows_radius.unwrap_or(0.0),
            if o.centroid_fallback { " (open mesh, centroid used as center of mass)" } else { "" }
        );
        for (i, t) in o.trials.iter().enumerate() {
            let _ = writeln!(
                text,
                "  trial {}: S3 {:.4}, mean epsilon {:.6}, {} penetrating perturbations",
                i + 1,
                t.s3,
                t.mean_epsilon.unwrap_or(0.0),
                t.penetrations
            );
        }
    }
    Outcome::ok(text)
}

fn compute_execution(ctx: &Context, layout: &Layout, config: &BenchmarkConfig) -> Result<ExecutionStage, CliError> {
    let c = &ctx.common;
    let log = parse_execution_log(&ctx.file(&c.execution_log, "logs", "execution", layout.id))?;
    if log.modality != config.modality {
        return Err(CliError::Invalid(format!(
            "execution log modality is {}, configuration says {}",
            log.modality, config.modality
        )));
    }
    let grasp_path = ctx.file(&c.grasps, "logs", "grasps", layout.id);
    let grasps = if c.grasps.is_some() || grasp_path.exists() {
        Some(parse_grasp_set(&grasp_path)?)
    } else {
        None
    };
    execution_stage(&log, grasps.as_ref(), config, layout.object_count()).map_err(invalid)
}

fn describe_pose(p: &Pose) -> String {
    let r = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(p.rotation));
    let (axis, angle) = r
        .axis_angle()
        .map(|(a, t)| (a.into_inner(), t))
        .unwrap_or((nalgebra::Vector3::z(), 0.0));
    format!(
        "position ({:.4}, {:.4}, {:.4}) rotation {:.2} deg about ({:.3}, {:.3}, {:.3})",
        p.position.x,
        p.position.y,
        p.position.z,
        angle.to_degrees(),
        axis.x,
        axis.y,
        axis.z
    )
}

fn score_execution(ctx: &Context) -> Result<Outcome, CliError> {
    require_format(ctx, &[OutputFormat::Text, OutputFormat::Xml])?;
    let config = ctx.config()?;
    let (layout, _) = ctx.layout()?;
    let stage = compute_execution(ctx, &layout, &config)?;
    if ctx.common.format == OutputFormat::Xml {
        return Outcome::ok(stage.to_xml());
    }
    let mut text = format!("Execution scores, layout {} ({})\n", layout.id, stage.modality);
    for (name, trials) in &stage.objects {
        let Some(trials) = trials else {
            let _ = writeln!(text, "{name}: no data");
            continue;
        };
        let n = trials.len().max(1) as f64;
        let mean = |f: fn(&crate::stages::ExecutionTrial) -> f64| trials.iter().map(f).sum::<f64>() / n;
        let _ = write!(text, "{name}: S4 {:.2}, S5 {:.2}", mean(|t| t.s4), mean(|t| t.s5));
        if stage.modality == Modality::Clutter {
            let _ = write!(text, ", S6 {:.2}", mean(|t| t.s6.unwrap_or(0.0)));
        }
        let _ = writeln!(text);
        for (i, t) in trials.iter().enumerate() {
            let _ = write!(text, "  trial {}: S4 {} S5 {:.2}", i + 1, t.s4, t.s5);
            if let Some(s6) = t.s6 {
                let _ = write!(text, " S6 {s6:.2}");
            }
            let _ = writeln!(text);
            for (k, w) in t.waypoints.iter().enumerate() {
                let _ = writeln!(text, "    waypoint {}: {}", k + 1, describe_pose(w));
            }
        }
    }
    Outcome::ok(text)
}

fn report(ctx: &Context) -> Result<Outcome, CliError> {
    let config = ctx.config()?;
    let (layout, layout_path) = ctx.layout()?;
    let c = &ctx.common;
    let platform = match ctx.cache(&c.platform_cache, "platform", layout.id) {
        Some(p) => PlatformStage::load(&p)?,
        None => load_platform_raw(ctx, &layout, &layout_path, &config)?,
    };
    let quality = match ctx.cache(&c.quality_cache, "quality", layout.id) {
        Some(p) => QualityStage::load(&p)?,
        None => compute_quality(ctx, &layout, &layout_path, &config)?,
    };
    let execution = match ctx.cache(&c.execution_cache, "execution", layout.id) {
        Some(p) => ExecutionStage::load(&p)?,
        None => compute_execution(ctx, &layout, &config)?,
    };
    for (what, id) in [("platform", platform.layout_id), ("quality", quality.layout_id), ("execution", execution.layout_id)] {
        if id != layout.id {
            return Err(CliError::Invalid(format!("{what} scores belong to layout {id}, not {}", layout.id)));
        }
    }
    if execution.modality != config.modality {
        return Err(CliError::Invalid(format!(
            "execution scores are for {}, configuration says {}",
            execution.modality, config.modality
        )));
    }
    let inputs = scorecard_inputs(&layout, &platform, &quality, &execution);
    let score = score_layout(&layout, &inputs, &config).map_err(invalid)?;
    let text = match c.format {
        OutputFormat::Text => emit_report(&score, &config, ReportFormat::Text),
        OutputFormat::Markdown => emit_report(&score, &config, ReportFormat::Markdown),
        OutputFormat::Html => emit_report(&score, &config, ReportFormat::Html),
        OutputFormat::Xml => score.to_xml(),
    };
    Outcome::ok(text)
}

fn render(ctx: &Context, overlays: &[Overlay]) -> Result<Outcome, CliError> {
    let (layout, layout_path) = ctx.layout()?;
    let meshes = load_layout_meshes(&layout, &layout_path)?;
    let c = &ctx.common;
    let poses = if overlays.contains(&Overlay::Poses) {
        Some(parse_pose_set(&ctx.file(&c.poses, "poses", "poses", layout.id))?)
    } else {
        None
    };
    let grasps = if overlays.contains(&Overlay::Grasps) {
        Some(parse_grasp_set(&ctx.file(&c.grasps, "logs", "grasps", layout.id))?)
    } else {
        None
    };
    let approach = ctx.config()?.approach_axis;
    let o = Overlays {
        poses: poses.as_ref(),
        grasps: grasps.as_ref().map(|g| (g, approach)),
    };
    Outcome::ok(render_layout(&layout, &meshes, &o))
}
