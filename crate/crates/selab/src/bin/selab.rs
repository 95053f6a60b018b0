//! Command-line surface for the solvers and audits: persisted,
//! schema-stable reports and plot-ready data.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use selab::auditor::{self, CutoffSpec};
use selab::core_model::{
    liouville_coefficient, singular_solution, stability_threshold_dim, Boundary, Domain,
    GridField, ProblemSpec, RadialFn, RadialProfile, Source,
};
use selab::elliptic_fd::{
    minimize_energy, monotone_iterate, newton_solve, solve_linear_poisson,
    touchdown_continuation, ConstraintBox, FdDomain, Method, SolveOptions,
};
use selab::potential::{
    hls_exponents, solve_integral_equation, PicardOptions, RieszKernelSpec,
};
use selab::radial::{shoot_radial, solve_radial_bvp, ShootingConfig};
use selab::spectral::{hardy_stability_check, morse_index};
use selab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "selab",
    version,
    about = "Numerics laboratory for positive solutions of Δu = u^τ (τ < 0)",
    after_help = "Exit codes: 0 success, 1 usage/parse error, 2 no positive solution \
                  (touchdown, empty bracket, or integral-equation failure; diagnostics \
                  are still written), 3 audit batch with failing checks.\n\
                  Environment: SELAB_SEED seeds eigen-solve starting vectors, \
                  SELAB_THREADS caps internal parallelism."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file with one `key = value` per line (flags take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write a run manifest (JSON) to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Suppress informational output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Shoot or solve the radial ODE u'' + (n-1)u'/r = u^τ and write the
    /// profile as CSV (columns r,u,du).
    Radial {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        /// Center value for the shooting solve.
        #[arg(long)]
        a: Option<f64>,
        /// Boundary-value solve: radius R and boundary value b.
        #[arg(long, num_args = 2, value_names = ["R", "B"])]
        bvp: Option<Vec<f64>>,
        #[arg(long)]
        rmax: Option<f64>,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the Dirichlet problem on a ball or box, or run a touchdown
    /// continuation sweep.
    Dirichlet {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        /// Ball radius (or box side length with --domain box).
        #[arg(long = "R")]
        big_r: Option<f64>,
        /// ball | box
        #[arg(long)]
        domain: Option<String>,
        /// Constant boundary value.
        #[arg(long)]
        boundary: Option<f64>,
        /// monotone | newton | energy
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Grid points per axis.
        #[arg(long)]
        grid_points: Option<usize>,
        /// Continuation sweep: b_hi b_lo steps (writes CSV b,min_u,status).
        #[arg(long, num_args = 3, value_names = ["B_HI", "B_LO", "STEPS"])]
        continuation: Option<Vec<String>>,
        /// Output path (GridField JSON, or CSV for --continuation).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run estimate audits against a radial profile CSV.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Profile CSV (r,u,du).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        /// Comma-separated checks: gradient,l1,growth,harnack,pohozaev,
        /// caccioppoli,sup,finite_index
        #[arg(long)]
        checks: String,
        /// Report JSON path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Spectrum and Morse index of the linearized operator on a ball or
    /// annulus, for the singular solution or a profile CSV.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long = "R")]
        big_r: f64,
        /// Annulus inner radius (ball when omitted).
        #[arg(long)]
        inner: Option<f64>,
        /// Angular modes, e.g. `0..4` or a mode count.
        #[arg(long, default_value = "0..4")]
        modes: String,
        #[arg(long, default_value_t = 2000)]
        cells: usize,
        /// Base profile CSV (singular closed form when omitted).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve the integral equation u = h - I_mu(u^τ) on a centered box.
    Integral {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: f64,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        /// Data h: `const:V` or `bump:BASE,AMP` (Gaussian bump on BASE).
        #[arg(long = "h")]
        h_spec: String,
        /// Box side length (centered at the origin).
        #[arg(long, default_value_t = 2.0)]
        box_len: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 15)]
        cells: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Threshold table: τ*(n), n*(τ), Hardy lhs/rhs, HLS feasibility.
    Thresholds {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        /// Dimensions, e.g. `2..8` or `3,5,7`.
        #[arg(long, default_value = "2..8")]
        n: String,
        /// Riesz kernel order for the HLS column.
        #[arg(long, default_value_t = 2.0)]
        mu: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// Run manifest: every parameter and output file of one invocation.
#[derive(Serialize)]
struct RunManifest {
    schema: u32,
    command: String,
    parameters: BTreeMap<String, String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    version: String,
    wall_time_seconds: f64,
    error: Option<String>,
}

/// Everything one command reports back for manifest assembly.
#[derive(Default)]
struct Outcome {
    parameters: BTreeMap<String, String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    let started = Instant::now();
    let (name, common) = command_meta(&cli.command);
    let mut outcome = Outcome::default();
    let result = dispatch(&cli.command, &mut outcome);
    let (code, error) = match &result {
        Ok(code) => (*code, None),
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code(e), Some(e.to_string()))
        }
    };
    if let Some(path) = &common.manifest {
        let manifest = RunManifest {
            schema: 1,
            command: name.to_string(),
            parameters: outcome.parameters,
            inputs: outcome.inputs,
            outputs: outcome.outputs,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: started.elapsed().as_secs_f64(),
            error,
        };
        match serde_json::to_vec_pretty(&manifest) {
            Ok(bytes) => {
                if let Err(e) = write_atomic(path, &bytes) {
                    eprintln!("error: cannot write manifest: {e}");
                    return 1;
                }
            }
            Err(e) => {
                eprintln!("error: cannot serialize manifest: {e}");
                return 1;
            }
        }
    }
    code
}

fn command_meta(cmd: &Command) -> (&'static str, &Common) {
    match cmd {
        Command::Radial { common, .. } => ("radial", common),
        Command::Dirichlet { common, .. } => ("dirichlet", common),
        Command::Audit { common, .. } => ("audit", common),
        Command::Spectrum { common, .. } => ("spectrum", common),
        Command::Integral { common, .. } => ("integral", common),
        Command::Thresholds { common, .. } => ("thresholds", common),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::TouchdownDetected(_) | Error::NoSolutionInBracket | Error::NoPositiveSolution => 2,
        _ => 1,
    }
}

fn dispatch(cmd: &Command, outcome: &mut Outcome) -> Result<i32> {
    match cmd {
        Command::Radial { common, n, tau, a, bvp, rmax, out } => {
            cmd_radial(common, *n, *tau, *a, bvp.as_deref(), *rmax, out.as_deref(), outcome)
        }
        Command::Dirichlet {
            common,
            n,
            tau,
            big_r,
            domain,
            boundary,
            method,
            tol,
            grid_points,
            continuation,
            out,
        } => cmd_dirichlet(
            common,
            DirichletArgs {
                n: *n,
                tau: *tau,
                big_r: *big_r,
                domain: domain.clone(),
                boundary: *boundary,
                method: method.clone(),
                tol: *tol,
                grid_points: *grid_points,
            },
            continuation.as_deref(),
            out.as_deref(),
            outcome,
        ),
        Command::Audit { common, input, n, tau, checks, report } => {
            cmd_audit(common, input, *n, *tau, checks, report.as_deref(), outcome)
        }
        Command::Spectrum { common, n, tau, big_r, inner, modes, cells, input, report } => {
            cmd_spectrum(
                common,
                *n,
                *tau,
                *big_r,
                *inner,
                modes,
                *cells,
                input.as_deref(),
                report.as_deref(),
                outcome,
            )
        }
        Command::Integral { common, n, mu, tau, h_spec, box_len, cells, tol, report } => {
            cmd_integral(
                common,
                *n,
                *mu,
                *tau,
                h_spec,
                *box_len,
                *cells,
                *tol,
                report.as_deref(),
                outcome,
            )
        }
        Command::Thresholds { common, tau, n, mu, report } => {
            cmd_thresholds(common, *tau, n, *mu, report.as_deref(), outcome)
        }
    }
}

// --- plumbing helpers ---

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_file_name(format!(
        "{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn record_output(outcome: &mut Outcome, path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes)?;
    outcome.outputs.push(path.display().to_string());
    Ok(())
}

fn load_config(common: &Common) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected key = value", lineno + 1))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
    }
    Ok(map)
}

fn config_get<T: std::str::FromStr>(
    config: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    match config.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::Parse(format!("config key {key}: cannot parse {raw:?}"))),
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Parse(format!("missing required parameter --{flag}")))
}

fn record_param(outcome: &mut Outcome, key: &str, value: impl std::fmt::Display) {
    outcome.parameters.insert(key.to_string(), value.to_string());
}

/// Parse `a..b` (inclusive) or a comma list or a single integer.
fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    let bad = |_| Error::Parse(format!("cannot parse integer list {text:?}"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(bad)?;
        let hi: usize = hi.trim().parse().map_err(bad)?;
        if hi < lo {
            return Err(Error::Parse(format!("empty range {text:?}")));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(bad)).collect()
}

// --- radial ---

#[allow(clippy::too_many_arguments)]
fn cmd_radial(
    common: &Common,
    n: Option<usize>,
    tau: Option<f64>,
    a: Option<f64>,
    bvp: Option<&[f64]>,
    rmax: Option<f64>,
    out: Option<&Path>,
    outcome: &mut Outcome,
) -> Result<i32> {
    let config = load_config(common)?;
    let n = required(n.or(config_get(&config, "n")?), "n")?;
    let tau = required(tau.or(config_get(&config, "tau")?), "tau")?;
    record_param(outcome, "n", n);
    record_param(outcome, "tau", tau);
    let profile = match (a, bvp) {
        (Some(_), Some(_)) => {
            return Err(Error::Parse("--a and --bvp are mutually exclusive".into()))
        }
        (Some(a), None) => {
            let rmax = required(rmax.or(config_get(&config, "R")?), "rmax")?;
            record_param(outcome, "a", a);
            record_param(outcome, "rmax", rmax);
            let spec = ProblemSpec::power_on_ball(n, tau, rmax, a)?;
            shoot_radial(&spec, &ShootingConfig::new(a, rmax))?
        }
        (None, Some(pair)) => {
            let (big_r, b) = (pair[0], pair[1]);
            record_param(outcome, "bvp_R", big_r);
            record_param(outcome, "bvp_b", b);
            let spec = ProblemSpec::power_on_ball(n, tau, big_r, b)?;
            solve_radial_bvp(&spec, big_r, b)?
        }
        (None, None) => return Err(Error::Parse("need --a or --bvp".into())),
    };
    let mut csv = Vec::new();
    profile.write_csv(&mut csv)?;
    match out {
        Some(path) => {
            record_output(outcome, path, &csv)?;
            if !common.quiet {
                println!("wrote {} samples to {}", profile.r.len(), path.display());
            }
        }
        None => print!("{}", String::from_utf8_lossy(&csv)),
    }
    Ok(0)
}

// --- dirichlet ---

struct DirichletArgs {
    n: Option<usize>,
    tau: Option<f64>,
    big_r: Option<f64>,
    domain: Option<String>,
    boundary: Option<f64>,
    method: Option<String>,
    tol: Option<f64>,
    grid_points: Option<usize>,
}

fn cmd_dirichlet(
    common: &Common,
    args: DirichletArgs,
    continuation: Option<&[String]>,
    out: Option<&Path>,
    outcome: &mut Outcome,
) -> Result<i32> {
    let config = load_config(common)?;
    let n = required(args.n.or(config_get(&config, "n")?), "n")?;
    let tau = required(args.tau.or(config_get(&config, "tau")?), "tau")?;
    let big_r = required(args.big_r.or(config_get(&config, "R")?), "R")?;
    let domain_kind = args
        .domain
        .or(config.get("domain").cloned())
        .unwrap_or_else(|| "ball".to_string());
    let b = required(args.boundary.or(config_get(&config, "boundary")?), "boundary")?;
    let method_name = args
        .method
        .or(config.get("method").cloned())
        .unwrap_or_else(|| "newton".to_string());
    let tol = args.tol.or(config_get(&config, "tol")?).unwrap_or(1e-8);
    let m = args.grid_points.or(config_get(&config, "grid_points")?).unwrap_or(33);
    for (key, value) in [
        ("n", n.to_string()),
        ("tau", tau.to_string()),
        ("R", big_r.to_string()),
        ("domain", domain_kind.clone()),
        ("boundary", b.to_string()),
        ("method", method_name.clone()),
        ("tol", tol.to_string()),
        ("grid_points", m.to_string()),
    ] {
        record_param(outcome, key, value);
    }

    let domain = match domain_kind.as_str() {
        "ball" => Domain::Ball { radius: big_r },
        "box" => Domain::Box {
            corner: vec![-big_r / 2.0; n],
            lengths: vec![big_r; n],
        },
        other => {
            return Err(Error::Parse(format!(
                "unknown domain {other:?} (expected ball or box)"
            )))
        }
    };
    let source = if tau == 0.0 { Source::Unit } else { Source::power(tau) };
    let spec = ProblemSpec::new(n, tau, source, domain, Boundary::Constant(b))?;
    let dom = FdDomain::build(&spec, m)?;

    if let Some(cont) = continuation {
        let b_hi: f64 = cont[0].parse().map_err(|_| Error::Parse("bad b_hi".into()))?;
        let b_lo: f64 = cont[1].parse().map_err(|_| Error::Parse("bad b_lo".into()))?;
        let steps: usize = cont[2].parse().map_err(|_| Error::Parse("bad steps".into()))?;
        record_param(outcome, "continuation", format!("{b_hi},{b_lo},{steps}"));
        let rows = touchdown_continuation(&spec, &dom, b_hi, b_lo, steps)?;
        let mut csv = String::from("b,min_u,status\n");
        for row in &rows {
            let min_u = row.min_u.map(|v| format!("{v:.16e}")).unwrap_or_default();
            let status = serde_json::to_value(row.status)?;
            csv.push_str(&format!(
                "{:.16e},{},{}\n",
                row.b,
                min_u,
                status.as_str().unwrap_or("unknown")
            ));
        }
        match out {
            Some(path) => record_output(outcome, path, csv.as_bytes())?,
            None => print!("{csv}"),
        }
        return Ok(0);
    }

    let mut options = SolveOptions::for_boundary(&spec.boundary);
    options.tol = tol;
    let field = match method_name.as_str() {
        "newton" => {
            options.method = Method::Newton;
            let init = dom.to_field(&vec![b; dom.interior_len()], &spec.boundary)?;
            newton_solve(&spec, &dom, &init, &options)?
        }
        "monotone" => {
            options.method = Method::Monotone;
            let cbox = default_constraint_box(&spec, &dom, b)?;
            monotone_iterate(&spec, &dom, &cbox, &options)?
        }
        "energy" => {
            options.method = Method::Energy;
            let cbox = default_constraint_box(&spec, &dom, b)?;
            minimize_energy(&spec, &dom, &cbox, &options)?.field
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown method {other:?} (expected monotone, newton, or energy)"
            )))
        }
    };
    let payload = serde_json::json!({ "schema": 1, "solution": field });
    let bytes = serde_json::to_vec_pretty(&payload)?;
    match out {
        Some(path) => {
            record_output(outcome, path, &bytes)?;
            if !common.quiet {
                println!("wrote solution to {}", path.display());
            }
        }
        None => println!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(0)
}

/// Constraint box for the bracketing/energy methods. The constant level b
/// bounds every solution from above (solutions are subharmonic), and one
/// application of the order-preserving solve map to that constant gives a
/// field below every fixed point; if it loses positivity the boundary
/// value is already below the touchdown threshold.
fn default_constraint_box(spec: &ProblemSpec, dom: &FdDomain, b: f64) -> Result<ConstraintBox> {
    let f_b = spec.source.eval(b)?;
    let rhs = vec![f_b; dom.interior_len()];
    let lower = solve_linear_poisson(dom, &rhs, &spec.boundary, 1e-12)?;
    if let Some(&bad) = dom.restrict(&lower)?.iter().find(|&&v| v <= 0.0) {
        return Err(Error::TouchdownDetected(bad));
    }
    Ok(ConstraintBox { lower, upper: b })
}

// --- audit ---

const AUDIT_CHECKS: &[&str] = &[
    "gradient",
    "l1",
    "growth",
    "harnack",
    "pohozaev",
    "caccioppoli",
    "sup",
    "finite_index",
];

fn cmd_audit(
    common: &Common,
    input: &Path,
    n: usize,
    tau: f64,
    checks: &str,
    report: Option<&Path>,
    outcome: &mut Outcome,
) -> Result<i32> {
    record_param(outcome, "input", input.display().to_string());
    record_param(outcome, "n", n);
    record_param(outcome, "tau", tau);
    record_param(outcome, "checks", checks);
    outcome.inputs.push(input.display().to_string());

    let names: Vec<&str> = checks.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    for name in &names {
        if !AUDIT_CHECKS.contains(name) {
            return Err(Error::Parse(format!(
                "unknown check {name:?}; valid checks: {}",
                AUDIT_CHECKS.join(", ")
            )));
        }
    }
    if names.is_empty() {
        return Err(Error::Parse("no checks requested".into()));
    }

    let mut file = fs::File::open(input)?;
    let mut text = String::new();
    file.read_to_string(&mut text)?;
    let profile = RadialProfile::read_csv(n, tau, text.as_bytes())?;
    let (r_lo, r_hi) = profile.r_range();
    let r_list: Vec<f64> = [8.0, 4.0, 2.0, 1.0]
        .iter()
        .map(|d| r_hi / d)
        .filter(|&r| r > r_lo)
        .collect();

    let mut reports = Vec::new();
    for name in &names {
        let rec = match *name {
            "gradient" => auditor::gradient_estimate_audit(&profile, n, tau, &r_list)?,
            "l1" => auditor::l1_lower_bound_audit(&profile, n, tau, &r_list)?,
            "growth" => auditor::growth_bound_audit(&profile, n, r_hi)?,
            "harnack" => {
                let cutoff = CutoffSpec::smooth(r_hi / 2.0, r_hi)?;
                auditor::harnack_bound_audit(&profile, n, tau, &cutoff)?
            }
            "pohozaev" => {
                let k = profile.value_at(r_lo + 0.5 * (r_hi - r_lo))?;
                auditor::pohozaev_audit(&profile, n, tau, k)?
            }
            "caccioppoli" => auditor::caccioppoli_audit(&profile, n, tau, 0.5, r_hi, r_hi / 2.0)?,
            "sup" => auditor::sup_bound_audit(&profile, n, 2.0, 0.5, &r_list)?,
            "finite_index" => auditor::finite_index_growth_audit(&profile, n, tau, r_hi)?,
            _ => unreachable!(),
        };
        reports.push(rec);
    }
    let all_pass = reports.iter().all(|r| r.pass);
    if !common.quiet {
        for rec in &reports {
            println!(
                "{:<14} {}  margin {:+.3e}",
                rec.check,
                if rec.pass { "PASS" } else { "FAIL" },
                rec.margin
            );
        }
    }
    let payload = serde_json::json!({ "schema": 1, "reports": reports });
    let bytes = serde_json::to_vec_pretty(&payload)?;
    match report {
        Some(path) => record_output(outcome, path, &bytes)?,
        None => println!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(if all_pass { 0 } else { 3 })
}

// --- spectrum ---

fn parse_modes(text: &str) -> Result<usize> {
    let list = parse_usize_list(text)?;
    if list.first() != Some(&0) && list.len() > 1 {
        return Err(Error::Parse(format!("mode range must start at 0, got {text:?}")));
    }
    Ok(if list.len() == 1 { list[0] } else { list.last().unwrap() + 1 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectrum(
    common: &Common,
    n: usize,
    tau: f64,
    big_r: f64,
    inner: Option<f64>,
    modes: &str,
    cells: usize,
    input: Option<&Path>,
    report: Option<&Path>,
    outcome: &mut Outcome,
) -> Result<i32> {
    record_param(outcome, "n", n);
    record_param(outcome, "tau", tau);
    record_param(outcome, "R", big_r);
    record_param(outcome, "modes", modes);
    record_param(outcome, "cells", cells);
    if let Some(inner) = inner {
        record_param(outcome, "inner", inner);
    }
    let modes = parse_modes(modes)?;
    let source = if tau == 0.0 { Source::Unit } else { Source::power(tau) };
    let domain = match inner {
        Some(inner) => Domain::Annulus { inner, outer: big_r },
        None => Domain::Ball { radius: big_r },
    };

    let base: Box<dyn RadialFn> = match input {
        Some(path) => {
            outcome.inputs.push(path.display().to_string());
            record_param(outcome, "input", path.display().to_string());
            let text = fs::read_to_string(path)?;
            Box::new(RadialProfile::read_csv(n, tau, text.as_bytes())?)
        }
        None => Box::new(singular_solution(n, tau)?.as_radial().ok_or_else(|| {
            Error::InvalidSpec("closed form has no radial representation".into())
        })?),
    };
    let b = base.value(big_r);
    let spec = ProblemSpec::new(n, tau, source, domain, Boundary::Constant(b))?;
    let rep = morse_index(base.as_ref(), &spec, big_r, modes, cells, None)?;
    if !common.quiet {
        println!("morse index {} from {} modes", rep.morse_index, rep.modes);
    }
    let payload = serde_json::json!({ "schema": 1, "report": rep });
    let bytes = serde_json::to_vec_pretty(&payload)?;
    match report {
        Some(path) => record_output(outcome, path, &bytes)?,
        None => println!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(0)
}

// --- integral ---

fn parse_h_spec(text: &str, n: usize, box_len: f64, cells: usize) -> Result<GridField> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("data spec {text:?}: expected kind:values")))?;
    let h = box_len / (cells as f64 - 1.0);
    let origin = vec![-box_len / 2.0; n];
    let dims = vec![cells; n];
    let bad = |_| Error::Parse(format!("data spec {text:?}: cannot parse values"));
    match kind {
        "const" => {
            let v: f64 = rest.parse().map_err(bad)?;
            GridField::from_fn(&dims, h, &origin, |_| v)
        }
        "bump" => {
            let parts: Vec<f64> = rest
                .split(',')
                .map(|s| s.trim().parse().map_err(bad))
                .collect::<Result<_>>()?;
            if parts.len() != 2 {
                return Err(Error::Parse(format!("data spec {text:?}: expected bump:BASE,AMP")));
            }
            let (base, amp) = (parts[0], parts[1]);
            GridField::from_fn(&dims, h, &origin, |x| {
                base + amp * (-x.iter().map(|&c| c * c).sum::<f64>()).exp()
            })
        }
        other => Err(Error::Parse(format!(
            "unknown data kind {other:?} (expected const or bump)"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_integral(
    common: &Common,
    n: usize,
    mu: f64,
    tau: f64,
    h_spec: &str,
    box_len: f64,
    cells: usize,
    tol: f64,
    report: Option<&Path>,
    outcome: &mut Outcome,
) -> Result<i32> {
    for (key, value) in [
        ("n", n.to_string()),
        ("mu", mu.to_string()),
        ("tau", tau.to_string()),
        ("h", h_spec.to_string()),
        ("box_len", box_len.to_string()),
        ("cells", cells.to_string()),
        ("tol", tol.to_string()),
    ] {
        record_param(outcome, key, value);
    }
    let kernel = RieszKernelSpec::new(n, mu)?;
    let h = parse_h_spec(h_spec, n, box_len, cells)?;
    let options = PicardOptions { tol, ..PicardOptions::default() };
    let exponents = hls_exponents(n, mu, tau)?;
    match solve_integral_equation(&h, tau, &kernel, &options) {
        Ok(u) => {
            let payload =
                serde_json::json!({ "schema": 1, "solution": u, "hls": exponents });
            let bytes = serde_json::to_vec_pretty(&payload)?;
            match report {
                Some(path) => record_output(outcome, path, &bytes)?,
                None => println!("{}", String::from_utf8_lossy(&bytes)),
            }
            if !common.quiet {
                let min = u.values.iter().cloned().fold(f64::INFINITY, f64::min);
                println!("solved: min u = {min:.6e}");
            }
            Ok(0)
        }
        Err(e @ Error::NoPositiveSolution) => {
            // diagnostic report is still written
            let payload = serde_json::json!({
                "schema": 1,
                "error": e.to_string(),
                "hls": exponents,
            });
            let bytes = serde_json::to_vec_pretty(&payload)?;
            if let Some(path) = report {
                record_output(outcome, path, &bytes)?;
            }
            Err(e)
        }
        Err(e) => Err(e),
    }
}

// --- thresholds ---

#[derive(Serialize)]
struct ThresholdRow {
    n: usize,
    tau_star: Option<f64>,
    hardy_lhs: f64,
    hardy_rhs: f64,
    stable: bool,
    hls_beta: Option<f64>,
    hls_feasible: Option<bool>,
}

fn cmd_thresholds(
    common: &Common,
    tau: f64,
    n_list: &str,
    mu: f64,
    report: Option<&Path>,
    outcome: &mut Outcome,
) -> Result<i32> {
    record_param(outcome, "tau", tau);
    record_param(outcome, "n", n_list);
    record_param(outcome, "mu", mu);
    if tau >= 0.0 {
        return Err(Error::Parse(format!("thresholds require tau < 0, got {tau}")));
    }
    let ns = parse_usize_list(n_list)?;
    let n_star = stability_threshold_dim(tau)?;
    let mut rows = Vec::new();
    for &n in &ns {
        // tau*(n) does not depend on tau; evaluate at a regular exponent
        let tau_star = liouville_coefficient(n, -2.0).ok().map(|(_, ts)| ts);
        let hardy = hardy_stability_check(n, tau);
        let hls = hls_exponents(n, mu, tau).ok();
        rows.push(ThresholdRow {
            n,
            tau_star,
            hardy_lhs: hardy.lhs,
            hardy_rhs: hardy.rhs,
            stable: hardy.stable,
            hls_beta: hls.as_ref().map(|e| e.beta),
            hls_feasible: hls.as_ref().map(|e| e.feasible.beta_exceeds_threshold),
        });
    }
    if !common.quiet {
        let fmt_opt = |v: Option<f64>| match v {
            Some(v) => format!("{v:10.4}"),
            None => format!("{:>10}", "-"),
        };
        println!(
            "{:>4} {:>10} {:>10} {:>10} {:>8} {:>10} {:>8}",
            "n", "tau*", "hardy_lhs", "hardy_rhs", "stable", "hls_beta", "beta>thr"
        );
        for row in &rows {
            println!(
                "{:>4} {} {:10.4} {:10.4} {:>8} {} {:>8}",
                row.n,
                fmt_opt(row.tau_star),
                row.hardy_lhs,
                row.hardy_rhs,
                row.stable,
                fmt_opt(row.hls_beta),
                row.hls_feasible.map(|f| f.to_string()).unwrap_or_else(|| "-".into()),
            );
        }
        println!("n*(tau = {tau}) = {n_star:.4}");
    }
    if let Some(path) = report {
        let payload = serde_json::json!({
            "schema": 1,
            "tau": tau,
            "n_star": n_star,
            "rows": rows,
        });
        record_output(outcome, path, &serde_json::to_vec_pretty(&payload)?)?;
    }
    Ok(0)
}
