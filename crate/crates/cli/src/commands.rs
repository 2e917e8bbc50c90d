use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use medalplot_core::dense::{joint_update, prior_obs_variance, spd_inverse};
use medalplot_core::diagnostics::{
    all_pass, build_medals, check_bounds, check_limit, stable_inference_check, LimitReport, LimitStatus, Medal,
    RimColor, UpdateDiagnostics, Verdict,
};
use medalplot_core::render::{render_medals, Affine, PlotSpec};
use medalplot_core::sparse::{
    run_sparse_pipeline, Noise, ObservationSet, Ordering, PipelineStats, PrecisionModel, SparseIncidence,
    SparseSymMatrix,
};
use medalplot_core::synth::{counterexample_instance, make_lattice_model, make_observations};
use medalplot_core::Error as CoreError;

use crate::config::{default_instruments, Fixture, Mode, OrderingChoice, RunConfig, AUTO_SPARSE_MIN_DIM};
use crate::error::{CliError, Result, Status};
use crate::{csvio, mtx};

/// The limit check needs eigenvalues of `m × m` matrices; skip it above this.
pub const LIMIT_CHECK_MAX_OBS: usize = 400;

const CANVAS_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Dense,
    Sparse,
}

/// Diagnostics plus how they were obtained.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub diagnostics: UpdateDiagnostics,
    pub route: Route,
    pub reason: &'static str,
    pub n: usize,
    pub m: usize,
    pub stats: Option<PipelineStats>,
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| CliError::input(format!("missing {what} (use --{what} or '{what} = ...' in --config)")))
}

pub fn load_inputs(cfg: &RunConfig) -> Result<(SparseSymMatrix, SparseIncidence, Noise)> {
    let q = mtx::read_precision(required(&cfg.q, "q")?)?;
    let a = mtx::read_incidence(required(&cfg.a, "a")?)?;
    let t = mtx::read_noise(required(&cfg.t, "t")?)?;
    if a.rows() == 0 {
        return Err(CliError::input("the observation file holds no observations"));
    }
    if a.cols() != q.dim() {
        return Err(CliError::input(format!("A has {} columns but Q is {}x{}", a.cols(), q.dim(), q.dim())));
    }
    if t.len() != a.rows() {
        return Err(CliError::input(format!("T covers {} observations but A has {} rows", t.len(), a.rows())));
    }
    Ok((q, a, t))
}

fn choose_path(cfg: &RunConfig, n: usize, a: &SparseIncidence, t: &Noise) -> Result<(Route, &'static str)> {
    match cfg.mode {
        Mode::Dense => Ok((Route::Dense, "requested")),
        Mode::Sparse => {
            if let Some((row, col)) = a.first_negative() {
                return Err(CoreError::NegativeIncidence { row, col }.into());
            }
            if t.as_diagonal().is_none() {
                return Err(CoreError::NonDiagonalNoise.into());
            }
            Ok((Route::Sparse, "requested"))
        }
        Mode::Auto => {
            if !a.is_nonneg() {
                Ok((Route::Dense, "auto: A has negative entries"))
            } else if t.as_diagonal().is_none() {
                Ok((Route::Dense, "auto: T is not diagonal"))
            } else if n <= AUTO_SPARSE_MIN_DIM {
                Ok((Route::Dense, "auto: small state vector"))
            } else {
                Ok((Route::Sparse, "auto: A >= 0, T diagonal, large state vector"))
            }
        }
    }
}

fn sparse_ordering(choice: &OrderingChoice, n: usize) -> Result<Ordering> {
    Ok(match choice {
        OrderingChoice::Natural => Ordering::Natural,
        OrderingChoice::MinimumDegree => Ordering::MinimumDegree,
        OrderingChoice::File(p) => {
            let perm = csvio::read_permutation(p)?;
            if perm.len() != n {
                return Err(CliError::input(format!("ordering has {} entries, Q has dimension {n}", perm.len())));
            }
            Ordering::Given(perm)
        }
    })
}

pub fn analyse(cfg: &RunConfig, q: SparseSymMatrix, a: SparseIncidence, t: Noise) -> Result<Analysis> {
    let (n, m) = (q.dim(), a.rows());
    let (route, reason) = choose_path(cfg, n, &a, &t)?;
    let (mut diagnostics, stats) = match route {
        Route::Sparse => {
            let model = PrecisionModel::new(q).with_ordering(sparse_ordering(&cfg.ordering, n)?);
            let obs = ObservationSet::new(a, t, None)?;
            let (d, stats) = run_sparse_pipeline(&model, &obs)?;
            (d, Some(stats))
        }
        Route::Dense => {
            if cfg.ordering != OrderingChoice::Natural {
                log::info!("ordering {} ignored on the dense path", cfg.ordering.name());
            }
            let xi = spd_inverse(&q.to_dense(), "Q")?;
            let sigma = prior_obs_variance(&xi, &a.to_dense())?;
            let t = t.to_dense();
            let star = joint_update(&sigma, &t)?;
            let mut d = UpdateDiagnostics::from_vectors(&sigma.diagonal(), &t.diagonal(), &star.diagonal())?;
            if m <= LIMIT_CHECK_MAX_OBS {
                d.limit_report = Some(check_limit(&sigma, &t, &star, cfg.norm)?);
            }
            (d, None)
        }
    };
    if let Some(i) = cfg.inject_violation {
        let rec = diagnostics
            .records
            .get_mut(i)
            .ok_or_else(|| CliError::input(format!("injection index {i} outside 0..{m}")))?;
        rec.joint_var = if rec.bound() > 0.0 { 2.0 * rec.bound() } else { 1.0 };
        log::warn!("test hook: joint variance of observation {i} overwritten");
    }
    diagnostics.refresh_violations(cfg.tol);
    Ok(Analysis { diagnostics, route, reason, n, m, stats })
}

pub fn diagnostics_tsv(d: &UpdateDiagnostics, verdicts: &[Verdict]) -> String {
    let mut out = String::from("index\tprior_var\terror_var\tlocal_var\tjoint_var\tbound_source\tverdict\n");
    for (i, (r, v)) in d.records.iter().zip(verdicts).enumerate() {
        let _ = writeln!(
            out,
            "{i}\t{:e}\t{:e}\t{:e}\t{:e}\t{}\t{}",
            r.prior_var,
            r.error_var,
            r.local_var,
            r.joint_var,
            r.bound_source().name(),
            if v.passed() { "pass" } else { "fail" }
        );
    }
    out
}

fn describe_failure(v: &Verdict) -> String {
    let mut parts = Vec::new();
    if !v.nonnegative {
        parts.push("negative variance");
    }
    if !v.joint_le_prior {
        parts.push("joint > prior");
    }
    if !v.joint_le_error {
        parts.push("joint > error");
    }
    if !v.joint_le_local {
        parts.push("joint > local");
    }
    if !v.local_consistent {
        parts.push("local inconsistent");
    }
    parts.join(", ")
}

fn limit_lines(out: &mut String, rep: &LimitReport) {
    let _ = write!(out, "limit check ({}-norm): ", rep.norm_kind.name());
    let _ = match rep.status {
        LimitStatus::Holds => writeln!(
            out,
            "holds, |Σ* - T| = {:e} <= {:e} (r = {:e})",
            rep.lhs,
            rep.rhs.unwrap_or(f64::NAN),
            rep.r.unwrap_or(f64::NAN)
        ),
        LimitStatus::Violated => writeln!(
            out,
            "VIOLATED, |Σ* - T| = {:e} > {:e} (r = {:e})",
            rep.lhs,
            rep.rhs.unwrap_or(f64::NAN),
            rep.r.unwrap_or(f64::NAN)
        ),
        LimitStatus::RadiusTooLarge => {
            writeln!(out, "not applicable, r = {:e} >= 1", rep.r.unwrap_or(f64::NAN))
        }
        LimitStatus::SigmaSingular => writeln!(out, "not applicable, Σ is singular so Σ* need not approach T"),
        LimitStatus::ErrorSingular => writeln!(out, "not applicable, T is singular"),
    };
    let _ = writeln!(out, "relative distance |Σ* - T| / |T| = {:e}", rep.relative_gap);
}

pub fn report_text(cfg: &RunConfig, an: &Analysis, verdicts: &[Verdict], stable: &[usize]) -> String {
    let d = &an.diagnostics;
    let mut out = String::from("medalplot check\n");
    let path = match an.route {
        Route::Dense => "dense",
        Route::Sparse => "sparse",
    };
    let _ = writeln!(out, "path: {path} ({})", an.reason);
    if an.route == Route::Sparse {
        let _ = writeln!(out, "ordering: {}", cfg.ordering.name());
    }
    let _ = writeln!(out, "state dimension n = {}, observations m = {}", an.n, an.m);
    if let Some(s) = &an.stats {
        let _ = writeln!(
            out,
            "nnz: Q {} / Q* {}, L {} / L* {}, extra prior entries {}",
            s.nnz_q, s.nnz_q_updated, s.nnz_l, s.nnz_l_updated, s.prior_extras
        );
    }
    let _ = writeln!(out, "tolerance: {:e} relative to max(prior_var, error_var)", cfg.tol);
    let failed: Vec<&Verdict> = verdicts.iter().filter(|v| !v.passed()).collect();
    let _ = writeln!(out, "bound checks: {} passed, {} failed", verdicts.len() - failed.len(), failed.len());
    for v in &failed {
        let r = &d.records[v.index];
        let _ = writeln!(
            out,
            "  observation {}: {} (joint_var {:e}, bound {:e} from {})",
            v.index,
            describe_failure(v),
            r.joint_var,
            r.bound(),
            r.bound_source().name()
        );
    }
    let blue = d.records.iter().filter(|r| r.bound_source().rim_color() == RimColor::Blue).count();
    let _ = writeln!(out, "bound source: error {blue}, prior {}", d.len() - blue);
    let _ = writeln!(
        out,
        "stable inference (threshold {}): {} observation(s) with small error/prior but joint well below error",
        cfg.stable_threshold,
        stable.len()
    );
    if !stable.is_empty() {
        let shown: Vec<String> = stable.iter().take(20).map(usize::to_string).collect();
        let more = if stable.len() > 20 { ", ..." } else { "" };
        let _ = writeln!(out, "  indices: {}{more}", shown.join(", "));
    }
    match &d.limit_report {
        Some(rep) => limit_lines(&mut out, rep),
        None => {
            let _ = writeln!(out, "limit check: skipped (dense path with m <= {LIMIT_CHECK_MAX_OBS} only)");
        }
    }
    let _ = writeln!(out, "verdict: {}", if failed.is_empty() { "PASS" } else { "FAIL" });
    out
}

pub fn cmd_check(cfg: &RunConfig) -> Result<Status> {
    let (q, a, t) = load_inputs(cfg)?;
    let an = analyse(cfg, q, a, t)?;
    let verdicts = check_bounds(&an.diagnostics, cfg.tol);
    let stable = stable_inference_check(&an.diagnostics, cfg.stable_threshold)?;
    let tsv = diagnostics_tsv(&an.diagnostics, &verdicts);
    let report = report_text(cfg, &an, &verdicts, &stable);
    write_atomic(&cfg.out.join("diagnostics.tsv"), tsv.as_bytes())?;
    write_atomic(&cfg.out.join("report.txt"), report.as_bytes())?;
    print!("{report}");
    if all_pass(&verdicts) {
        Ok(Status::Ok)
    } else {
        for v in verdicts.iter().filter(|v| !v.passed()) {
            eprintln!("bound violation at observation {}: {}", v.index, describe_failure(v));
        }
        Ok(Status::BoundViolation)
    }
}

/// World box covering every medal and the base map.
fn world_bounds(medals: &[Medal], spec: &PlotSpec) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for m in medals {
        for k in 0..2 {
            lo[k] = lo[k].min(m.center[k] - m.r_bound);
            hi[k] = hi[k].max(m.center[k] + m.r_bound);
        }
    }
    for p in spec.base_map.iter().flat_map(|l| &l.points) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if !lo[0].is_finite() {
        return ([0.0, 0.0], [1.0, 1.0]);
    }
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSummary {
    pub medals: usize,
    pub blue: usize,
    pub red: usize,
    pub min_annulus: f64,
    pub max_annulus: f64,
    pub expanded_rims: usize,
}

impl PlotSummary {
    fn of(medals: &[Medal]) -> Self {
        let blue = medals.iter().filter(|m| m.rim_color == RimColor::Blue).count();
        let widths = medals.iter().map(Medal::annulus_width);
        PlotSummary {
            medals: medals.len(),
            blue,
            red: medals.len() - blue,
            min_annulus: widths.clone().fold(f64::INFINITY, f64::min),
            max_annulus: widths.fold(f64::NEG_INFINITY, f64::max),
            expanded_rims: medals.iter().filter(|m| m.rim_expanded()).count(),
        }
    }
}

pub fn render_plot(cfg: &RunConfig, d: &UpdateDiagnostics, locations: &[[f64; 2]]) -> Result<(String, PlotSummary)> {
    let medals = build_medals(d, locations, cfg.plot.scale, cfg.plot.min_rim)?;
    let mut spec = PlotSpec::new(cfg.plot.width, cfg.plot.height, Affine::IDENTITY);
    spec.annulus = cfg.plot.annulus;
    spec.medal_scale = cfg.plot.scale;
    spec.min_rim = cfg.plot.min_rim;
    if let Some(p) = &cfg.base_map {
        spec.base_map = csvio::read_base_map(p)?;
    }
    let (lo, hi) = world_bounds(&medals, &spec);
    spec.transform = Affine::fit(lo, hi, f64::from(spec.width), f64::from(spec.height), CANVAS_MARGIN);
    let svg = render_medals(&medals, &spec)?;
    Ok((svg, PlotSummary::of(&medals)))
}

pub fn cmd_plot(cfg: &RunConfig) -> Result<Status> {
    let loc_path = cfg.locations.as_deref().ok_or_else(|| CliError::input("plot needs --locations"))?;
    let (q, a, t) = load_inputs(cfg)?;
    let locations = csvio::read_locations(loc_path)?;
    if locations.len() != a.rows() {
        return Err(CliError::input(format!(
            "{} has {} locations but there are {} observations",
            loc_path.display(),
            locations.len(),
            a.rows()
        )));
    }
    let an = analyse(cfg, q, a, t)?;
    let (svg, s) = render_plot(cfg, &an.diagnostics, &locations)?;
    write_atomic(&cfg.out, svg.as_bytes())?;
    println!("medals: {}", s.medals);
    println!("rims: blue {}, red {}", s.blue, s.red);
    println!("annulus width: min {:e}, max {:e}", s.min_annulus, s.max_annulus);
    println!("expanded rims: {}", s.expanded_rims);
    println!("wrote {}", cfg.out.display());
    if an.diagnostics.bound_violations.is_empty() {
        Ok(Status::Ok)
    } else {
        eprintln!("{} observation(s) violate their bounds; run check for details", an.diagnostics.bound_violations.len());
        Ok(Status::BoundViolation)
    }
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<Status> {
    let (model, obs, comment) = match cfg.synth.fixture {
        Some(Fixture::Counterexample) => {
            let (model, obs) = counterexample_instance();
            (model, obs, String::from("two-state fixture with singular prior observation variance"))
        }
        None => {
            let lattice = &cfg.synth.lattice;
            let instruments = if cfg.synth.instruments.is_empty() {
                default_instruments(lattice)
            } else {
                cfg.synth.instruments.clone()
            };
            let model = make_lattice_model(lattice, cfg.seed)?;
            let obs = make_observations(lattice, &instruments, cfg.seed.wrapping_add(1))?;
            let comment = format!(
                "lattice {}x{}, {} process(es), kappa {}, tau {}, heterogeneity {}, seed {}",
                lattice.rows, lattice.cols, lattice.processes, lattice.kappa, lattice.tau, lattice.heterogeneity, cfg.seed
            );
            (model, obs, comment)
        }
    };
    let t = obs.noise.as_diagonal().expect("generated noise is diagonal");
    let locations = obs.locations.clone().unwrap_or_default();
    let files: [(&str, String); 5] = [
        ("q.mtx", mtx::format_precision(&model.q, &comment)),
        ("a.mtx", mtx::format_incidence(&obs.a, &comment)),
        ("t.mtx", mtx::format_noise_diagonal(t.variances(), &comment)),
        ("locations.csv", csvio::format_locations(&locations)),
        ("medalplot.conf", String::from("q = q.mtx\na = a.mtx\nt = t.mtx\nlocations = locations.csv\n")),
    ];
    for (name, text) in &files {
        write_atomic(&cfg.out.join(name), text.as_bytes())?;
    }
    println!("wrote n = {}, m = {} to {}", model.dim(), obs.len(), cfg.out.display());
    Ok(Status::Ok)
}
