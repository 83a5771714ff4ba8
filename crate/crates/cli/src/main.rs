mod batch;
mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Billiards in the C² string table of a regular polygon.
#[derive(Parser, Debug, Serialize)]
#[command(name = "string-billiard", version, about)]
pub struct Cli {
    /// Directory for relative output paths.
    #[arg(long, global = true, env = "STRING_BILLIARD_OUT_DIR", default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build a table and report its geometry and smoothness.
    Table(TableCmd),
    /// Trace one trajectory.
    Trace(TraceCmd),
    /// Classify a traced trajectory as focal, inner or outer.
    Classify(ClassifyCmd),
    /// Find periodic orbits.
    Periodic(PeriodicCmd),
    /// Linear stability of periodic orbits.
    Stability(StabilityCmd),
    /// Forbidden inner region of a traced trajectory.
    Forbidden(ForbiddenCmd),
    /// Surface of section for a batch of trajectories.
    Sos(SosCmd),
    /// Focal trajectories, their convergence and their section curve.
    Focal(FocalCmd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Table(_) => "table",
            Command::Trace(_) => "trace",
            Command::Classify(_) => "classify",
            Command::Periodic(_) => "periodic",
            Command::Stability(_) => "stability",
            Command::Forbidden(_) => "forbidden",
            Command::Sos(_) => "sos",
            Command::Focal(_) => "focal",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameArg {
    /// `hexagon` for n = 6, `generic` otherwise.
    Auto,
    Hexagon,
    Generic,
}

#[derive(Args, Debug, Serialize)]
pub struct TableArgs {
    /// Number of polygon sides.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = FrameArg::Auto)]
    pub frame: FrameArg,
}

#[derive(Args, Debug, Serialize)]
pub struct TableCmd {
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TraceCmd {
    #[command(flatten)]
    pub table: TableArgs,
    /// Start on the boundary at arc length S.
    #[arg(long, requires = "theta", conflicts_with_all = ["start", "direction"])]
    pub s: Option<f64>,
    /// Outgoing angle to the counterclockwise tangent, in (0, π).
    #[arg(long, requires = "s")]
    pub theta: Option<f64>,
    /// Interior start point.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true, requires = "direction")]
    pub start: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["DX", "DY"], allow_negative_numbers = true, requires = "start")]
    pub direction: Option<Vec<f64>>,
    /// Keep the chords exactly on the foci (for a start aimed at a focus).
    #[arg(long, requires = "start")]
    pub focal: bool,
    #[arg(long, default_value_t = 100)]
    pub bounces: usize,
    /// Bounce table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Full trajectory, readable by `classify` and `forbidden`.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyCmd {
    /// Trajectory JSON written by `trace --json`.
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_support: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeriodicMode {
    /// The orbit through the junction points with rotation number k.
    Symmetric,
    /// The two Birkhoff orbits of type (n, k).
    Birkhoff,
    /// Newton search from a rotation seed.
    Search,
    /// Every orbit of period n, deduplicated modulo symmetry.
    Census,
    /// An orbit in a resonant island chain around the stable (n, k) orbit.
    Resonant,
}

#[derive(Args, Debug, Serialize)]
pub struct PeriodicCmd {
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long, value_enum, default_value_t = PeriodicMode::Birkhoff)]
    pub mode: PeriodicMode,
    /// Number of bounces per period.
    #[arg(long)]
    pub period: Option<usize>,
    /// Rotation number.
    #[arg(long)]
    pub rotation: Option<usize>,
    /// Arc length of the first seed point (search mode).
    #[arg(long, default_value_t = 0.0)]
    pub seed_s: f64,
    /// Resonance order q (resonant mode).
    #[arg(long, default_value_t = 9)]
    pub order: usize,
    /// Seeds per class: grid size and random draws (census mode).
    #[arg(long, default_value_t = 24)]
    pub grid: usize,
    #[arg(long, default_value_t = 24)]
    pub random: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct StabilityCmd {
    /// Orbit JSON written by `periodic --json`.
    #[arg(long)]
    pub orbit: PathBuf,
    #[arg(long, default_value_t = string_billiard::stability::TOL_NEUTRAL)]
    pub tol_neutral: f64,
    /// Also compare with a finite-difference Jacobian of this step.
    #[arg(long)]
    pub fd_step: Option<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationArg {
    Auto,
    Ccw,
    Cw,
}

#[derive(Args, Debug, Serialize)]
pub struct ForbiddenCmd {
    /// Trajectory JSON written by `trace --json`.
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long, value_enum, default_value_t = OrientationArg::Auto)]
    pub orientation: OrientationArg,
    /// Tolerance for the caustic check of the region.
    #[arg(long, default_value_t = 1e-6)]
    pub caustic_tol: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionArg {
    Full,
    UpperHalf,
    Fundamental,
}

#[derive(Args, Debug, Serialize)]
pub struct SosCmd {
    #[command(flatten)]
    pub table: TableArgs,
    /// Batch file (TOML) with the seed and initial conditions.
    #[arg(long)]
    pub batch: PathBuf,
    /// Overrides the batch file's bounce count.
    #[arg(long)]
    pub bounces: Option<usize>,
    /// Overrides the batch file's reduction.
    #[arg(long, value_enum)]
    pub reduction: Option<ReductionArg>,
    /// Section points.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Per-trajectory curve-thickness report.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct FocalCmd {
    /// Number of focal trajectories, launched from F₂ across arc ⌢24.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 200)]
    pub bounces: usize,
    /// Section points.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Curve match and convergence series.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Section with the analytic curve overlaid.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Trajectory drawing of the first focal orbit.
    #[arg(long)]
    pub orbit_svg: Option<PathBuf>,
}

/// Why a run failed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or input files: status 2.
    Usage(String),
    /// A numerical operation failed: status 1.
    Numeric {
        op: &'static str,
        err: string_billiard::Error,
    },
    /// Reading or writing a file failed: status 1.
    Io(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Numeric { op, err } => write!(f, "{op} failed: {err}"),
            Failure::Io(m) => write!(f, "{m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("string-billiard {}: error: {f}", cli.command.name());
            match f {
                Failure::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
