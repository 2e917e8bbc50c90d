use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use medalplot_core::render::{AnnulusStyle, DEFAULT_ALPHA};
use medalplot_core::synth::LatticeGMRFSpec;

use crate::config::{parse_instrument, AnnulusArg, ConfigFile, Fixture, Mode, NormArg, OrderingChoice, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "medalplot", version, about = "Bound checks for second-order variance updates, and medal plots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute diagnostics, write diagnostics.tsv and report.txt, exit 1 on any bound violation.
    Check(CheckArgs),
    /// Render the medal plot as SVG.
    Plot(PlotArgs),
    /// Write a synthetic instance (Q, A, T, locations).
    Generate(GenerateArgs),
}

#[derive(Debug, Args, Default)]
pub struct InputArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prior precision Q (Matrix Market, symmetric).
    #[arg(long)]
    pub q: Option<PathBuf>,
    /// Incidence matrix A (Matrix Market, general).
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Observation-error variance T (column of variances, or a matrix).
    #[arg(long)]
    pub t: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// natural, mindegree, or a file of 0-based indices.
    #[arg(long)]
    pub ordering: Option<String>,
    /// Relative tolerance for bound verdicts.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Norm for the limit check.
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
    #[arg(long)]
    pub stable_threshold: Option<f64>,
    #[arg(long, hide = true)]
    pub inject_violation: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Observation locations, `x,y` per row.
    #[arg(long)]
    pub locations: Option<PathBuf>,
    /// Base-map polylines, blank-line separated.
    #[arg(long)]
    pub base_map: Option<PathBuf>,
    /// World units per standard deviation.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub min_rim: Option<f64>,
    /// Opacity of the translucent annulus.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub annulus: Option<AnnulusArg>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    /// SVG file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub processes: Option<usize>,
    #[arg(long)]
    pub heterogeneity: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Repeatable, e.g. `point:var=0.01,coverage=0.3` or
    /// `disk:radius=3,var=0.5,count=40,profile=linear,processes=0+1`.
    #[arg(long)]
    pub instrument: Vec<String>,
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn resolve_input(args: InputArgs) -> Result<(RunConfig, ConfigFile)> {
    let file = ConfigFile::load(args.config.as_deref())?;
    let mut cfg = RunConfig {
        q: file.pick_path("q", args.q),
        a: file.pick_path("a", args.a),
        t: file.pick_path("t", args.t),
        ..RunConfig::default()
    };
    cfg.mode = file.pick_enum("mode", args.mode)?.unwrap_or_default();
    if let Some(flag) = &args.ordering {
        cfg.ordering = OrderingChoice::parse(flag, std::path::Path::new(""));
    } else if let Some(v) = file.pick::<String>("ordering", None)? {
        cfg.ordering = OrderingChoice::parse(&v, file.base());
    }
    if let Some(tol) = file.pick("tol", args.tol)? {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(CliError::input("tol must be a non-negative number"));
        }
        cfg.tol = tol;
    }
    cfg.norm = file.pick_enum("norm", args.norm)?.unwrap_or_default().into();
    if let Some(s) = file.pick("stable_threshold", args.stable_threshold)? {
        cfg.stable_threshold = s;
    }
    cfg.inject_violation = args.inject_violation;
    Ok((cfg, file))
}

pub fn resolve_check(args: CheckArgs) -> Result<RunConfig> {
    let (mut cfg, file) = resolve_input(args.input)?;
    cfg.out = file.pick_path("out", args.out).unwrap_or_else(|| PathBuf::from("."));
    Ok(cfg)
}

pub fn resolve_plot(args: PlotArgs) -> Result<RunConfig> {
    let (mut cfg, file) = resolve_input(args.input)?;
    cfg.locations = file.pick_path("locations", args.locations);
    cfg.base_map = file.pick_path("base_map", args.base_map);
    cfg.out = file.pick_path("svg", args.out).unwrap_or_else(|| PathBuf::from("medals.svg"));
    let p = &mut cfg.plot;
    if let Some(v) = file.pick("scale", args.scale)? {
        p.scale = v;
    }
    if let Some(v) = file.pick("min_rim", args.min_rim)? {
        p.min_rim = v;
    }
    if let Some(v) = file.pick("width", args.width)? {
        p.width = v;
    }
    if let Some(v) = file.pick("height", args.height)? {
        p.height = v;
    }
    let alpha = file.pick("alpha", args.alpha)?.unwrap_or(DEFAULT_ALPHA);
    p.annulus = match file.pick_enum("annulus", args.annulus)?.unwrap_or_default() {
        AnnulusArg::White => AnnulusStyle::White,
        AnnulusArg::Translucent => AnnulusStyle::Translucent { alpha },
    };
    if p.width == 0 || p.height == 0 {
        return Err(CliError::input("canvas width and height must be positive"));
    }
    Ok(cfg)
}

pub fn resolve_generate(args: GenerateArgs) -> Result<RunConfig> {
    let file = ConfigFile::load(args.config.as_deref())?;
    let mut cfg = RunConfig { out: file.pick_path("out", args.out).unwrap_or_else(|| PathBuf::from(".")), ..RunConfig::default() };
    let d = LatticeGMRFSpec::new(16, 16, 0.2, 1.0);
    let mut lattice = LatticeGMRFSpec::new(
        file.pick("rows", args.rows)?.unwrap_or(d.rows),
        file.pick("cols", args.cols)?.unwrap_or(d.cols),
        file.pick("kappa", args.kappa)?.unwrap_or(d.kappa),
        file.pick("tau", args.tau)?.unwrap_or(d.tau),
    );
    lattice.processes = file.pick("processes", args.processes)?.unwrap_or(1);
    lattice.heterogeneity = file.pick("heterogeneity", args.heterogeneity)?.unwrap_or(0.0);
    cfg.seed = file.pick("seed", args.seed)?.unwrap_or(0);
    let specs = if args.instrument.is_empty() { file.all("instrument") } else { args.instrument };
    cfg.synth.instruments = specs
        .iter()
        .map(|s| parse_instrument(s).map_err(|e| CliError::input(format!("instrument '{s}': {e}"))))
        .collect::<Result<_>>()?;
    cfg.synth.lattice = lattice;
    cfg.synth.fixture = file.pick_enum("fixture", args.fixture)?;
    Ok(cfg)
}
