//! Run configuration: a flat `key = value` file overridden by flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use medalplot_core::dense::NormKind;
use medalplot_core::diagnostics::{DEFAULT_MIN_RIM, DEFAULT_STABLE_THRESHOLD, DEFAULT_TOL};
use medalplot_core::render::{AnnulusStyle, DEFAULT_ALPHA};
use medalplot_core::synth::{FootprintSpec, LatticeGMRFSpec, SiteSelection, WeightProfile};

use crate::error::{CliError, Result};

/// Problem size above which `auto` prefers the sparse path.
pub const AUTO_SPARSE_MIN_DIM: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Mode {
    Dense,
    Sparse,
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum NormArg {
    One,
    #[default]
    Two,
    Inf,
}

impl From<NormArg> for NormKind {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::One => NormKind::One,
            NormArg::Two => NormKind::Two,
            NormArg::Inf => NormKind::Inf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum AnnulusArg {
    White,
    #[default]
    Translucent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    /// Two states, three observations, singular prior observation variance.
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum OrderingChoice {
    #[default]
    Natural,
    MinimumDegree,
    File(PathBuf),
}

impl OrderingChoice {
    pub fn parse(s: &str, base: &Path) -> Self {
        match s.to_ascii_lowercase().as_str() {
            "natural" => OrderingChoice::Natural,
            "mindegree" | "min-degree" | "amd" => OrderingChoice::MinimumDegree,
            _ => OrderingChoice::File(base.join(s)),
        }
    }

    pub fn name(&self) -> String {
        match self {
            OrderingChoice::Natural => "natural".into(),
            OrderingChoice::MinimumDegree => "minimum degree".into(),
            OrderingChoice::File(p) => format!("from {}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub scale: f64,
    pub min_rim: f64,
    pub annulus: AnnulusStyle,
    pub width: u32,
    pub height: u32,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            scale: 1.0,
            min_rim: DEFAULT_MIN_RIM,
            annulus: AnnulusStyle::Translucent { alpha: DEFAULT_ALPHA },
            width: 800,
            height: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub lattice: LatticeGMRFSpec,
    pub instruments: Vec<FootprintSpec>,
    pub fixture: Option<Fixture>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { lattice: LatticeGMRFSpec::new(16, 16, 0.2, 1.0), instruments: Vec::new(), fixture: None }
    }
}

/// Everything one command needs, after merging the config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub q: Option<PathBuf>,
    pub a: Option<PathBuf>,
    pub t: Option<PathBuf>,
    pub locations: Option<PathBuf>,
    pub base_map: Option<PathBuf>,
    pub out: PathBuf,
    pub mode: Mode,
    pub ordering: OrderingChoice,
    pub plot: PlotOptions,
    pub tol: f64,
    pub norm: NormKind,
    pub stable_threshold: f64,
    pub seed: u64,
    pub synth: SynthOptions,
    /// Test hook: overwrite `joint_var` at this index with twice its bound.
    pub inject_violation: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            q: None,
            a: None,
            t: None,
            locations: None,
            base_map: None,
            out: PathBuf::from("."),
            mode: Mode::Auto,
            ordering: OrderingChoice::Natural,
            plot: PlotOptions::default(),
            tol: DEFAULT_TOL,
            norm: NormKind::Two,
            stable_threshold: DEFAULT_STABLE_THRESHOLD,
            seed: 0,
            synth: SynthOptions::default(),
            inject_violation: None,
        }
    }
}

/// Parsed `key = value` lines. Keys may repeat; `-` and `_` are
/// interchangeable. Relative paths resolve against the file's directory.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    path: PathBuf,
    base: PathBuf,
    values: BTreeMap<String, Vec<(usize, String)>>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text, path)?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut values: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| CliError::parse(path, i + 1, "expected 'key = value'"))?;
            let key = k.trim().replace('-', "_");
            values.entry(key).or_default().push((i + 1, v.trim().to_string()));
        }
        Ok(ConfigFile { path: path.to_path_buf(), base: PathBuf::new(), values })
    }

    pub fn base(&self) -> &Path {
        &self.base
    }

    fn last(&self, key: &str) -> Option<&(usize, String)> {
        self.values.get(key).and_then(|v| v.last())
    }

    pub fn all(&self, key: &str) -> Vec<String> {
        self.values.get(key).map(|v| v.iter().map(|(_, s)| s.clone()).collect()).unwrap_or_default()
    }

    /// The flag if given, else the parsed config value.
    pub fn pick<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.last(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::parse(&self.path, *line, format!("{key}: {e}"))),
        }
    }

    pub fn pick_enum<T: ValueEnum>(&self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.last(key) {
            None => Ok(None),
            Some((line, v)) => {
                T::from_str(v, true).map(Some).map_err(|e| CliError::parse(&self.path, *line, format!("{key}: {e}")))
            }
        }
    }

    pub fn pick_path(&self, key: &str, flag: Option<PathBuf>) -> Option<PathBuf> {
        flag.or_else(|| self.last(key).map(|(_, v)| self.base.join(v)))
    }
}

/// Parses `kind:key=value,...`, e.g. `point:var=0.01,coverage=0.3` or
/// `disk:radius=3,var=0.5,count=40,profile=linear,processes=0+1`.
///
/// Site keys: `coverage` (fraction), `count` (random centres) or
/// `sites=r/c;r/c`. Exactly one must be given.
pub fn parse_instrument(s: &str) -> std::result::Result<FootprintSpec, String> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut fp = match kind.trim() {
        "point" => FootprintSpec::point(1.0, SiteSelection::Count(0)),
        "disk" => FootprintSpec { radius: 1.0, ..FootprintSpec::point(1.0, SiteSelection::Count(0)) },
        other => return Err(format!("unknown instrument kind '{other}' (point or disk)")),
    };
    let mut sites = None;
    let mut var = None;
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| format!("expected key=value, got '{item}'"))?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("{k}: bad number '{v}'"));
        match k.trim() {
            "var" | "variance" => var = Some(num(v)?),
            "radius" if kind == "disk" => fp.radius = num(v)?,
            "profile" => {
                fp.profile = match v.trim() {
                    "uniform" => WeightProfile::Uniform,
                    "linear" => WeightProfile::LinearDecay,
                    other => return Err(format!("unknown profile '{other}'")),
                }
            }
            "coverage" => sites = Some(SiteSelection::Coverage(num(v)?)),
            "count" => {
                sites = Some(SiteSelection::Count(v.trim().parse().map_err(|_| format!("count: bad integer '{v}'"))?))
            }
            "sites" => {
                let list = v
                    .split(';')
                    .map(|rc| {
                        let (r, c) = rc.split_once('/').ok_or_else(|| format!("site '{rc}' is not row/col"))?;
                        Ok((
                            r.trim().parse().map_err(|_| format!("bad row '{r}'"))?,
                            c.trim().parse().map_err(|_| format!("bad col '{c}'"))?,
                        ))
                    })
                    .collect::<std::result::Result<Vec<_>, String>>()?;
                sites = Some(SiteSelection::List(list));
            }
            "processes" => {
                fp.processes = v
                    .split('+')
                    .map(|p| p.trim().parse().map_err(|_| format!("bad process '{p}'")))
                    .collect::<std::result::Result<_, _>>()?;
            }
            other => return Err(format!("unknown key '{other}' for {kind}")),
        }
    }
    fp.noise_variance = var.ok_or("missing var=")?;
    fp.sites = sites.ok_or("missing coverage=, count= or sites=")?;
    Ok(fp)
}

/// Instruments used when none are given: dense point coverage plus a few
/// wide linear-decay disks.
pub fn default_instruments(lattice: &LatticeGMRFSpec) -> Vec<FootprintSpec> {
    let wide = (lattice.sites() / 40).max(1);
    vec![
        FootprintSpec { processes: (0..lattice.processes).collect(), ..FootprintSpec::point(0.01, SiteSelection::Coverage(0.25)) },
        FootprintSpec {
            radius: 3.0,
            profile: WeightProfile::LinearDecay,
            noise_variance: 0.5,
            sites: SiteSelection::Count(wide),
            processes: (0..lattice.processes).collect(),
        },
    ]
}
