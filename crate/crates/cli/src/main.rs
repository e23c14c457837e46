//! `reccone`: command-line driver for the recession cone approximations.
//!
//! Exit codes: 0 success, 2 assumption violation (report written),
//! 3 iteration limit (partial result written), 4 invalid input,
//! 5 solver or internal failure. Diagnostics go to standard error; results
//! go to `--output` or standard output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use reccone::conic::ClarabelSolver;
use reccone::instances::{generate, Family};
use reccone::io::{
    canonical_json, parse_instance, parse_result, write_instance, write_result, InstanceFile,
    ResultFile, FORMAT_VERSION,
};
use reccone::linalg::{min_eigenvalue, pencil_eval};
use reccone::polyhedral::{vertex_enumeration_with_active, Cone, HPolyhedron, Halfspace, VCone};
use reccone::shadow::{approximate_recession_cone_shadow, shadow_assumption_report, ShadowReport};
use reccone::spectra::{approximate_recession_cone, check_assumptions_spectra};
use reccone::validation::{brute_force_delta, default_grid};
use reccone::{ApproxConfig, Assumption, Error};

const EXIT_OK: u8 = 0;
const EXIT_ASSUMPTION: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_FAILURE: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "reccone",
    version,
    about = "Polyhedral approximation of recession cones"
)]
struct Cli {
    /// Only report errors on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Approximate recc C of a spectrahedron (no lifting variables).
    ApproxSpectra(ApproxArgs),
    /// Approximate recc S of a spectrahedral shadow.
    ApproxShadow(ApproxArgs),
    /// Check the standing assumptions without approximating.
    Check(CheckArgs),
    /// Estimate the truncated Hausdorff distance between result cones.
    Distance(DistanceArgs),
    /// Write a generated instance with known recession cone.
    Gen(GenArgs),
    /// Export rays and clipped facet boundaries of a result as CSV.
    ExportPlot(PlotArgs),
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    eps: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sweep limit (spectra) or pass limit (shadow).
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    tol_psd: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tol_gap: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tol_geom: Option<f64>,
    /// Record wall-clock time in `timing_ms` (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Auto,
    Spectra,
    Shadow,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    /// `auto` checks the shadow assumptions when the instance has lifting
    /// variables or carries a recession direction, and the spectrahedron
    /// assumptions otherwise.
    #[arg(long, value_enum, default_value_t = Target::Auto)]
    algorithm: Target,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_hyphen_values = true)]
    tol_psd: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tol_gap: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tol_geom: Option<f64>,
}

#[derive(Args, Debug)]
struct DistanceArgs {
    /// Result file; alone, its inner and outer cones are compared.
    #[arg(long)]
    result: PathBuf,
    /// Second result file; the two outer cones are compared.
    #[arg(long)]
    against: Option<PathBuf>,
    /// Sphere grid size (default depends on the dimension).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Diagonal,
    Soc,
    Lifted,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    ell: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long)]
    result: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A failure with its exit code.
struct Exit {
    code: u8,
    message: String,
}

impl Exit {
    fn input(message: impl Into<String>) -> Self {
        Exit {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Input(_) | Error::Parse { .. } | Error::DegenerateInput(_) => EXIT_INPUT,
            Error::AssumptionViolation { .. } => EXIT_ASSUMPTION,
            Error::Timeout { .. } => EXIT_TIMEOUT,
            _ => EXIT_FAILURE,
        };
        Exit {
            code,
            message: e.to_string(),
        }
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), Exit> {
    match output {
        Some(p) => fs::write(p, bytes).map_err(|e| Exit {
            code: EXIT_FAILURE,
            message: format!("cannot write {}: {e}", p.display()),
        }),
        None => std::io::stdout().write_all(bytes).map_err(|e| Exit {
            code: EXIT_FAILURE,
            message: format!("cannot write to standard output: {e}"),
        }),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Exit> {
    fs::read(path).map_err(|e| Exit::input(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<InstanceFile, Exit> {
    parse_instance(&read(path)?).map_err(|e| Exit::input(format!("{}: {e}", path.display())))
}

fn load_result(path: &Path) -> Result<ResultFile, Exit> {
    parse_result(&read(path)?).map_err(|e| Exit::input(format!("{}: {e}", path.display())))
}

fn positive(name: &str, v: f64) -> Result<f64, Exit> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Exit::input(format!(
            "--{name} must be a positive number, got {v}"
        )))
    }
}

fn config(
    eps: f64,
    seed: u64,
    max_iter: Option<usize>,
    tol_psd: Option<f64>,
    tol_gap: Option<f64>,
    tol_geom: Option<f64>,
) -> Result<ApproxConfig, Exit> {
    let mut cfg = ApproxConfig::new(positive("eps", eps)?).with_seed(seed);
    if let Some(n) = max_iter {
        if n == 0 {
            return Err(Exit::input("--max-iter must be positive"));
        }
        cfg.max_iterations = n;
        cfg.max_passes = n;
    }
    if let Some(t) = tol_psd {
        cfg.tol_psd = positive("tol-psd", t)?;
    }
    if let Some(t) = tol_gap {
        cfg.tol_gap = positive("tol-gap", t)?;
    }
    if let Some(t) = tol_geom {
        cfg.tol_geom = positive("tol-geom", t)?;
    }
    Ok(cfg)
}

fn violation_report(
    algorithm: &str,
    assumption: Assumption,
    detail: &str,
    flags: &BTreeMap<String, String>,
) -> Vec<u8> {
    canonical_json(&json!({
        "format_version": FORMAT_VERSION,
        "algorithm": algorithm,
        "status": "assumption_violation",
        "violation": { "assumption": assumption.code(), "detail": detail },
        "assumption_report": flags,
    }))
}

fn spectra_flags_passing() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("C1".to_string(), "pass".to_string()),
        ("C2".to_string(), "pass".to_string()),
    ])
}

fn approx(args: &ApproxArgs, shadow: bool) -> Result<u8, Exit> {
    let cfg = config(
        args.eps,
        args.seed,
        args.max_iter,
        args.tol_psd,
        args.tol_gap,
        args.tol_geom,
    )?;
    let inst = load_instance(&args.instance)?;
    let solver = ClarabelSolver::default();
    let started = Instant::now();
    let (algorithm, outcome, flags) = if shadow {
        let s = inst.to_shadow()?;
        let missing = |f: &str| Exit::input(format!("approx-shadow needs \"{f}\" in the instance"));
        let dbar = inst
            .recession_interior_direction
            .clone()
            .ok_or_else(|| missing("recession_interior_direction"))?;
        let xbar = inst
            .interior_point
            .clone()
            .ok_or_else(|| missing("interior_point"))?;
        let ybar = match (&inst.lift_witness, inst.m) {
            (Some(y), _) => y.clone(),
            (None, 0) => Vec::new(),
            (None, _) => return Err(missing("lift_witness")),
        };
        let out = approximate_recession_cone_shadow(&s, &xbar, &ybar, &dbar, &cfg, &solver);
        let flags = match &out {
            Err(Error::AssumptionViolation { .. }) => {
                let o = reccone::conic::ConicOracle::new(&solver, &cfg);
                shadow_assumption_report(&s, &xbar, &ybar, &dbar, &o, &cfg)?.flags()
            }
            _ => ShadowReport::passing_flags(),
        };
        ("shadow", out, flags)
    } else {
        let c = inst.to_spectrahedron()?;
        // a recession direction with A(d̄) ≻ 0 doubles as the strict point;
        // otherwise the library searches for one
        let xbar = inst.recession_interior_direction.clone().filter(|d| {
            d.len() == c.nvars()
                && pencil_eval(c.pencil(), d)
                    .and_then(|m| min_eigenvalue(&m))
                    .is_ok_and(|lam| lam > cfg.tol_psd)
        });
        let out = approximate_recession_cone(&c, xbar.as_deref(), &cfg, &solver);
        let flags = match &out {
            Err(Error::AssumptionViolation { .. }) => {
                check_assumptions_spectra(&c, &cfg, &solver)?.flags()
            }
            _ => spectra_flags_passing(),
        };
        ("spectra", out, flags)
    };
    let elapsed = started.elapsed().as_millis() as u64;
    let finish = |r: &reccone::polyhedral::ApproxResult, partial: bool| {
        let mut file =
            ResultFile::from_approx(algorithm, cfg.epsilon, r, flags.clone(), partial, cfg.seed);
        if args.timing {
            file.timing_ms = elapsed;
        }
        write_result(&file)
    };
    match outcome {
        Ok(r) => {
            emit(args.output.as_deref(), &finish(&r, false))?;
            log::info!(
                "certified {:.3e} after {} iterations, {} subproblems",
                r.epsilon_certified,
                r.iterations,
                r.subproblem_count
            );
            Ok(EXIT_OK)
        }
        Err(Error::Timeout { limit, partial }) => {
            emit(args.output.as_deref(), &finish(&partial, true))?;
            Err(Exit {
                code: EXIT_TIMEOUT,
                message: format!("iteration limit of {limit} reached, partial result written"),
            })
        }
        Err(Error::AssumptionViolation { assumption, detail }) => {
            emit(
                args.output.as_deref(),
                &violation_report(algorithm, assumption, &detail, &flags),
            )?;
            Err(Exit {
                code: EXIT_ASSUMPTION,
                message: format!("assumption {assumption} violated: {detail}"),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn check(args: &CheckArgs) -> Result<u8, Exit> {
    let cfg = config(
        0.1,
        args.seed,
        None,
        args.tol_psd,
        args.tol_gap,
        args.tol_geom,
    )?;
    let inst = load_instance(&args.instance)?;
    let solver = ClarabelSolver::default();
    let target = match args.algorithm {
        Target::Auto if inst.recession_interior_direction.is_some() || inst.m > 0 => Target::Shadow,
        Target::Auto => Target::Spectra,
        t => t,
    };
    let (algorithm, flags, violation) = match target {
        Target::Shadow => {
            let s = inst.to_shadow()?;
            let missing =
                |f: &str| Exit::input(format!("shadow checks need \"{f}\" in the instance"));
            let xbar = inst
                .interior_point
                .clone()
                .ok_or_else(|| missing("interior_point"))?;
            let ybar = inst.lift_witness.clone().unwrap_or_default();
            let dbar = inst
                .recession_interior_direction
                .clone()
                .ok_or_else(|| missing("recession_interior_direction"))?;
            let o = reccone::conic::ConicOracle::new(&solver, &cfg);
            let r = shadow_assumption_report(&s, &xbar, &ybar, &dbar, &o, &cfg)?;
            ("shadow", r.flags(), r.violation())
        }
        _ => {
            let c = inst.to_spectrahedron()?;
            let r = check_assumptions_spectra(&c, &cfg, &solver)?;
            ("spectra", r.flags(), r.violation())
        }
    };
    match violation {
        Some((a, why)) => {
            emit(
                args.output.as_deref(),
                &violation_report(algorithm, a, why, &flags),
            )?;
            Err(Exit {
                code: EXIT_ASSUMPTION,
                message: format!("assumption {a} violated: {why}"),
            })
        }
        None => {
            emit(
                args.output.as_deref(),
                &canonical_json(&json!({
                    "format_version": FORMAT_VERSION,
                    "algorithm": algorithm,
                    "status": "ok",
                    "assumption_report": flags,
                })),
            )?;
            Ok(EXIT_OK)
        }
    }
}

fn cones_of(r: &ResultFile, dim: usize) -> Result<(VCone, HPolyhedron), Exit> {
    let inner = VCone::new(dim, r.inner_rays.clone(), 0.0)?;
    let outer = HPolyhedron::new(
        dim,
        r.outer_halfspaces
            .iter()
            .map(|h| Halfspace::new(h.normal.clone(), 0.0))
            .collect(),
    )?;
    Ok((inner, outer))
}

fn result_dim(r: &ResultFile) -> Result<usize, Exit> {
    r.inner_rays
        .first()
        .map(|v| v.len())
        .or_else(|| r.outer_halfspaces.first().map(|h| h.normal.len()))
        .ok_or_else(|| Exit::input("result has neither rays nor halfspaces"))
}

fn distance(args: &DistanceArgs) -> Result<u8, Exit> {
    let a = load_result(&args.result)?;
    let dim = result_dim(&a)?;
    let grid = args.grid.unwrap_or_else(|| default_grid(dim));
    if grid == 0 {
        return Err(Exit::input("--grid must be positive"));
    }
    let (ia, oa) = cones_of(&a, dim)?;
    let (est, pair) = match &args.against {
        None => (
            brute_force_delta(Cone::Rays(&ia), Cone::Halfspaces(&oa), grid),
            "inner-outer",
        ),
        Some(p) => {
            let b = load_result(p)?;
            if result_dim(&b)? != dim {
                return Err(Exit::input("results live in different dimensions"));
            }
            let (_, ob) = cones_of(&b, dim)?;
            (
                brute_force_delta(Cone::Halfspaces(&oa), Cone::Halfspaces(&ob), grid),
                "outer-outer",
            )
        }
    };
    emit(
        args.output.as_deref(),
        &canonical_json(&json!({
            "format_version": FORMAT_VERSION,
            "cones": pair,
            "grid": grid,
            "estimate": est.value,
            "error_bound": est.error_bound,
        })),
    )?;
    Ok(EXIT_OK)
}

fn gen(args: &GenArgs) -> Result<u8, Exit> {
    let family = match args.family {
        FamilyArg::Diagonal => Family::Diagonal,
        FamilyArg::Soc => Family::RotatedSoc,
        FamilyArg::Lifted => Family::Lifted,
    };
    let min_n = if family == Family::Diagonal { 1 } else { 2 };
    if args.n < min_n {
        return Err(Exit::input(format!(
            "--n must be at least {min_n} for this family"
        )));
    }
    if args.ell == 0 {
        return Err(Exit::input("--ell must be positive"));
    }
    let g = generate(family, args.n, args.ell, args.seed);
    let mut f = InstanceFile::from_shadow(&g.shadow);
    f.interior_point = Some(g.interior_point);
    f.lift_witness = (f.m > 0).then_some(g.lift_witness);
    f.recession_interior_direction = Some(g.recession_interior_direction);
    emit(args.output.as_deref(), &write_instance(&f))?;
    Ok(EXIT_OK)
}

fn csv_row(kind: &str, x: &[f64]) -> String {
    let mut s = kind.to_string();
    for v in x {
        s.push(',');
        s.push_str(&v.to_string());
    }
    s.push('\n');
    s
}

/// Endpoints of one clipped facet edge.
type Segment = (Vec<f64>, Vec<f64>);

/// Boundary of `{xᵀa = 0}` within `O ∩ [−1,1]ⁿ`, as segments between facet
/// vertices that share `n − 2` further active constraints.
fn facet_segments(outer: &HPolyhedron, k: usize) -> Result<Vec<Segment>, Exit> {
    const TOL: f64 = 1e-9;
    let n = outer.ambient_dim();
    if n < 2 {
        return Ok(Vec::new());
    }
    let a = &outer.halfspaces()[k].normal;
    let mut hs: Vec<Halfspace> = outer
        .halfspaces()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, h)| h.clone())
        .collect();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            hs.push(Halfspace::new(e, 1.0));
        }
    }
    let base = hs.len();
    hs.push(Halfspace::new(a.clone(), 0.0));
    hs.push(Halfspace::new(a.iter().map(|v| -v).collect(), 0.0));
    let face = HPolyhedron::new(n, hs)?;
    let verts = match vertex_enumeration_with_active(&face, TOL) {
        Ok(v) => v,
        Err(Error::EmptyPolyhedron) => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut segs = Vec::new();
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            let shared = verts[i]
                .1
                .iter()
                .filter(|c| **c < base && verts[j].1.contains(c))
                .count();
            if shared + 2 >= n {
                segs.push((verts[i].0.clone(), verts[j].0.clone()));
            }
        }
    }
    Ok(segs)
}

fn export_plot(args: &PlotArgs) -> Result<u8, Exit> {
    let r = load_result(&args.result)?;
    let dim = result_dim(&r)?;
    let (_, outer) = cones_of(&r, dim)?;
    let mut out = String::from("kind");
    for i in 1..=dim {
        out.push_str(&format!(",x{i}"));
    }
    out.push('\n');
    for ray in &r.inner_rays {
        out.push_str(&csv_row("ray", ray));
    }
    for k in 0..outer.len() {
        for (a, b) in facet_segments(&outer, k)? {
            out.push_str(&csv_row("facet_seg_a", &a));
            out.push_str(&csv_row("facet_seg_b", &b));
        }
    }
    emit(args.output.as_deref(), out.as_bytes())?;
    Ok(EXIT_OK)
}

fn run(cli: &Cli) -> Result<u8, Exit> {
    match &cli.command {
        Command::ApproxSpectra(a) => approx(a, false),
        Command::ApproxShadow(a) => approx(a, true),
        Command::Check(a) => check(a),
        Command::Distance(a) => distance(a),
        Command::Gen(a) => gen(a),
        Command::ExportPlot(a) => export_plot(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("reccone: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
