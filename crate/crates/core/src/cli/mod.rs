//! Command-line front end. Parsing lives here so the binary stays a one-liner.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 internal error.

mod commands;
mod summary;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::firms::BBox;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

fn date(s: &str) -> std::result::Result<NaiveDate, String> {
    crate::firms::parse_date(s)
}

#[derive(Debug, Parser)]
#[command(name = "conflict-watch", version, about = "Conflict signatures in fire and SAR time series")]
pub struct Cli {
    /// error, warn, info, debug or trace. Falls back to CONFLICT_WATCH_LOG, then warn.
    #[arg(long, global = true)]
    pub log_level: Option<String>,
    /// JSON object of flag values; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print one progress line per step on stdout.
    #[arg(long, global = true)]
    pub progress: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fire-detection catalogs.
    #[command(subcommand)]
    Fires(FiresCmd),
    /// Raster statistics.
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Backscatter and coherence change detection.
    #[command(subcommand)]
    Sar(SarCmd),
    /// Synthetic scenes with ground truth.
    Simulate(SimulateArgs),
    /// 8-bit PGM preview of a raster.
    Quicklook(QuicklookArgs),
}

#[derive(Debug, Subcommand)]
pub enum FiresCmd {
    /// Daily detection counts as `date,count` CSV.
    Counts(CountsArgs),
    /// Yearly off-season z-scores.
    Anomaly(AnomalyArgs),
    /// Day-by-day comparison of two seasons.
    Compare(CompareArgs),
    /// Gaussian KDE of detection locations.
    Kde(KdeArgs),
}

#[derive(Debug, Subcommand)]
pub enum StatsCmd {
    /// Mutual information of two co-registered rasters.
    Mi(MiArgs),
}

#[derive(Debug, Subcommand)]
pub enum SarCmd {
    /// Log-ratio change detection against a median reference.
    Logratio(LogratioArgs),
    /// Low-to-high coherence events.
    Coherence(CoherenceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CatalogArgs {
    /// FIRMS-format CSV.
    #[arg(long)]
    pub csv: PathBuf,
    /// lon_min,lat_min,lon_max,lat_max (inclusive).
    #[arg(long)]
    pub bbox: Option<BBox>,
    #[arg(long)]
    pub min_confidence: Option<f64>,
    /// Keep only this instrument (e.g. MODIS, VIIRS); default pools all.
    #[arg(long)]
    pub instrument: Option<String>,
    /// Skip malformed rows instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct CountsArgs {
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[arg(long, value_parser = date)]
    pub start: NaiveDate,
    #[arg(long, value_parser = date)]
    pub end: NaiveDate,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fixed,
    Auto,
}

#[derive(Debug, Args)]
pub struct AnomalyArgs {
    /// FIRMS-format CSV.
    #[arg(long, required_unless_present = "yearly_counts", conflicts_with = "yearly_counts")]
    pub csv: Option<PathBuf>,
    /// JSON object of year -> off-season count, scored directly.
    #[arg(long)]
    pub yearly_counts: Option<PathBuf>,
    #[arg(long)]
    pub bbox: Option<BBox>,
    #[arg(long)]
    pub min_confidence: Option<f64>,
    #[arg(long)]
    pub instrument: Option<String>,
    #[arg(long)]
    pub lenient: bool,
    /// Series start; defaults to 1 January of the earliest detection year.
    #[arg(long, value_parser = date)]
    pub start: Option<NaiveDate>,
    /// Series end; defaults to 31 December of the latest detection year.
    #[arg(long, value_parser = date)]
    pub end: Option<NaiveDate>,
    #[arg(long, value_enum, default_value = "fixed")]
    pub mode: ModeArg,
    /// Off-season months, e.g. 6-10 (fixed window and auto fallback).
    #[arg(long, default_value = "6-10")]
    pub months: crate::fire_analysis::MonthRange,
    #[arg(long, default_value_t = 2.0)]
    pub z_threshold: f64,
    /// Score each year against the other years only.
    #[arg(long)]
    pub leave_one_out: bool,
    /// Sample (n-1) instead of population standard deviation.
    #[arg(long)]
    pub sample_std: bool,
    #[arg(long, default_value_t = 14)]
    pub min_gap_days: usize,
    #[arg(long, default_value_t = 7)]
    pub smooth_window: usize,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Auto mode: score each year in its own window instead of the consensus.
    #[arg(long)]
    pub per_year_windows: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[arg(long)]
    pub year_a: i32,
    #[arg(long)]
    pub year_b: i32,
    /// First month of the compared season.
    #[arg(long, default_value_t = 6)]
    pub start_month: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KdeArgs {
    /// FIRMS-format CSV.
    #[arg(long, required_unless_present = "points", conflicts_with = "points")]
    pub csv: Option<PathBuf>,
    /// GeoJSON Point features instead of a catalog.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub bbox: Option<BBox>,
    #[arg(long)]
    pub min_confidence: Option<f64>,
    #[arg(long)]
    pub instrument: Option<String>,
    #[arg(long)]
    pub lenient: bool,
    #[arg(long, value_parser = date)]
    pub start: Option<NaiveDate>,
    #[arg(long, value_parser = date)]
    pub end: Option<NaiveDate>,
    /// `scott` or `hx,hy` in meters.
    #[arg(long, default_value = "scott")]
    pub bandwidth: String,
    /// Projection origin lon,lat; defaults to the bbox center, else the centroid.
    #[arg(long)]
    pub origin: Option<String>,
    /// Reuse the grid (and origin) of an existing raster.
    #[arg(long, conflicts_with = "origin")]
    pub grid_from: Option<PathBuf>,
    /// Auto-grid cell size, meters.
    #[arg(long, default_value_t = 250.0)]
    pub cell: f64,
    /// Auto-grid padding in bandwidths.
    #[arg(long, default_value_t = 3.0)]
    pub pad_bandwidths: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MiArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = crate::spatial_stats::DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Decrease,
    Increase,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogBaseArg {
    E,
    #[value(name = "10")]
    Ten,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Args)]
pub struct LogratioArgs {
    /// Stack manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Reference range start (inclusive).
    #[arg(long, value_parser = date)]
    pub ref_start: NaiveDate,
    /// Reference range end (exclusive).
    #[arg(long, value_parser = date)]
    pub ref_end: NaiveDate,
    #[arg(long, default_value_t = crate::sar_change::ChangeParams::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "decrease")]
    pub direction: DirectionArg,
    #[arg(long, value_enum, default_value = "linear")]
    pub input_scale: ScaleArg,
    #[arg(long, value_enum, default_value = "e")]
    pub log_base: LogBaseArg,
    #[arg(long, default_value_t = crate::sar_change::ChangeParams::DEFAULT_MIN_AREA_PX)]
    pub min_area_px: usize,
    /// Drop 4-connected change clusters smaller than this from each window.
    #[arg(long, default_value_t = crate::sar_change::ChangeParams::DEFAULT_MIN_CLUSTER_PX)]
    pub min_cluster_px: usize,
    /// Skip the per-window mask rasters.
    #[arg(long)]
    pub no_window_masks: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    /// Coherence stack manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 0.35)]
    pub tau_low: f64,
    #[arg(long, default_value_t = 0.6)]
    pub tau_high: f64,
    #[arg(long, default_value_t = 2)]
    pub persistence: usize,
    #[arg(long, default_value_t = 6)]
    pub baseline_n: usize,
    /// Calendar baseline: layers before this date form the baseline.
    #[arg(long, value_parser = date)]
    pub baseline_end: Option<NaiveDate>,
    #[arg(long, default_value_t = crate::coherence::DEFAULT_MIN_COMPONENT_PX)]
    pub min_component_px: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SceneKind {
    Fires,
    Settlements,
    Backscatter,
    Coherence,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub kind: SceneKind,
    /// Scene spec JSON; missing fields take defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct QuicklookArgs {
    #[arg(long)]
    pub raster: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Appends `--key value` for every config entry whose flag is absent from `args`.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let pos = args.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="));
    let Some(pos) = pos else {
        return Ok(args);
    };
    let path = match args[pos].to_string_lossy().strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(
            args.get(pos + 1)
                .ok_or_else(|| Error::InvalidParams("--config needs a path".into()))?,
        ),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Validation(format!("{}: config must be a JSON object", path.display())))?;

    let given = |flag: &str| {
        args.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&format!("{flag}="))
        })
    };
    let mut out = args.clone();
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        if given(&flag) {
            continue;
        }
        match v {
            serde_json::Value::Bool(true) => out.push(flag.into()),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => {
                out.push(flag.into());
                out.push(s.into());
            }
            serde_json::Value::Number(n) => {
                out.push(flag.into());
                out.push(n.to_string().into());
            }
            other => {
                return Err(Error::Validation(format!(
                    "config key '{key}' has unsupported value {other}"
                )))
            }
        }
    }
    Ok(out)
}

fn init_logging(level: Option<&str>) {
    let env = env_logger::Env::default().filter_or("CONFLICT_WATCH_LOG", "warn");
    let mut b = env_logger::Builder::from_env(env);
    if let Some(l) = level {
        b.parse_filters(l);
    }
    let _ = b.format_timestamp(None).try_init();
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let args: Vec<OsString> = args.into_iter().collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.log_level.as_deref());
    match commands::run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_INTERNAL
            }
        }
    }
}
