//! Command line driver: minimization, g(s) sweeps, packings, derivative and
//! limit probes, cluster traces, self-verification suites, and the exhaustive
//! grid oracle, with byte-reproducible JSON/CSV outputs.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use slog_energy::{
    best_packing, cluster_probe, derivative_probe, grid_minimize, grid_pack, lower_bound,
    minimize_energy, run_suite, sweep_g, ClusterTrace, ConfigurationDoc, EnergyValue, Error,
    GridBudget, KernelParams, MetricKind, ProbeReport, Result, SolveOptions, Space, SpaceSpec,
    Suite,
};

#[derive(Parser)]
#[command(
    name = "slog-energy",
    version,
    about = "Minimal discrete energies for power-log kernels on spaces of diameter below 1"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimize the N-point energy at one (s, t)
    Minimize(MinimizeArgs),
    /// Tabulate g(s) over an s-grid as CSV
    Sweep(SweepArgs),
    /// Find a best-packing (maximal separation) configuration
    Pack(PackArgs),
    /// One-sided difference quotients of g at s0
    Probe(ProbeArgs),
    /// Trace minimizers along an s-schedule toward s0 (or inf)
    Cluster(ClusterArgs),
    /// Run the self-verification suites
    Verify(VerifyArgs),
    /// Exhaustive minimum or packing on a finite grid
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Flat key=value config file; command-line flags win over its entries
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Suppress the timestamp header line on CSV/table outputs
    #[arg(long)]
    no_header: bool,
    /// Size of the worker thread pool (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
struct SpaceArgs {
    /// Space kind: segment | circle-geo | circle-chord | sphere | finite
    #[arg(long)]
    space: Option<String>,
    /// Segment left endpoint (default 0)
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Segment right endpoint
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Circle or sphere radius
    #[arg(long)]
    alpha: Option<f64>,
    /// CSV distance matrix for a finite space
    #[arg(long, value_name = "FILE")]
    matrix: Option<PathBuf>,
    /// Mesh bound to attach to a finite space loaded from --matrix
    #[arg(long)]
    mesh: Option<f64>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Random restarts per solve (default 16)
    #[arg(long)]
    starts: Option<usize>,
    /// Iteration cap per start (default 10000)
    #[arg(long)]
    max_iters: Option<usize>,
    /// Projected-gradient convergence threshold (default 1e-10)
    #[arg(long)]
    grad_tol: Option<f64>,
    /// Base RNG seed; SLOG_ENERGY_SEED is honored when neither the flag nor
    /// the config file sets one
    #[arg(long)]
    seed: Option<u64>,
    /// Add a random-perturbation polish between descent passes
    #[arg(long)]
    anneal: bool,
}

#[derive(Args)]
struct MinimizeArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Number of points
    #[arg(long)]
    n: Option<usize>,
    /// Riesz exponent s >= 0
    #[arg(long)]
    s: Option<f64>,
    /// Log exponent t >= 0 (default 0)
    #[arg(long)]
    t: Option<f64>,
    /// On a finite space, enumerate all subsets instead of descending
    #[arg(long)]
    exact: bool,
    /// Subset budget for --exact (default 10^7 combinations)
    #[arg(long)]
    budget: Option<u128>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    n: Option<usize>,
    /// Log exponent t >= 0 (default 0)
    #[arg(long)]
    t: Option<f64>,
    /// Inclusive arithmetic grid start:end:step, e.g. 0:2:0.05
    #[arg(long, value_name = "START:END:STEP")]
    s_grid: Option<String>,
    /// Explicit comma-separated s values, e.g. 0,0.5,1
    #[arg(long, value_name = "LIST")]
    s_list: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct PackArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ProbeArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    n: Option<usize>,
    /// Log exponent t >= 0 (default 0)
    #[arg(long)]
    t: Option<f64>,
    /// Probe location s0 >= 0
    #[arg(long)]
    s0: Option<f64>,
    /// Finite-difference step (default 1e-4)
    #[arg(long)]
    h_fd: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    n: Option<usize>,
    /// Log exponent t >= 0 (default 0)
    #[arg(long)]
    t: Option<f64>,
    /// Target exponent: a number, or inf for the best-packing limit
    #[arg(long)]
    s0: Option<String>,
    /// Comma-separated s schedule approaching s0
    #[arg(long, value_name = "LIST")]
    schedule: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// lemmas | circle | limits | derivatives | clusters | oracle | g0 | all
    #[arg(long)]
    suite: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Grid size for discretizing a continuous space
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Operation: minimize | pack (default minimize)
    #[arg(long)]
    op: Option<String>,
    /// Riesz exponent s >= 0 (minimize only)
    #[arg(long)]
    s: Option<f64>,
    /// Log exponent t >= 0 (minimize only, default 0)
    #[arg(long)]
    t: Option<f64>,
    /// Subset budget (default 10^7 combinations)
    #[arg(long)]
    budget: Option<u128>,
    #[command(flatten)]
    common: CommonArgs,
}

// ---------------------------------------------------------------------------
// Config-file merging. Precedence: flag > file entry > environment > default.

const RECOGNIZED_KEYS: &[&str] = &[
    "space", "a", "b", "alpha", "matrix", "mesh", "n", "s", "t", "s0", "h-fd", "schedule",
    "s-grid", "s-list", "suite", "m", "op", "budget", "exact", "starts", "max-iters", "grad-tol",
    "seed", "anneal", "threads", "no-header",
];

struct FileCfg(BTreeMap<String, String>);

impl FileCfg {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let Some(path) = path else {
            return Ok(Self(map));
        };
        let text = fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse(format!(
                    "{}:{}: expected key=value, got '{line}'",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if !RECOGNIZED_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse(format!(
                    "{}:{}: unknown key '{key}'",
                    path.display(),
                    lineno + 1
                )));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Self(map))
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn string(&self, cli: Option<String>, key: &str) -> Option<String> {
        cli.or_else(|| self.raw(key).map(str::to_string))
    }

    fn path(&self, cli: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        cli.or_else(|| self.raw(key).map(PathBuf::from))
    }

    fn f64(&self, cli: Option<f64>, key: &str) -> Result<Option<f64>> {
        match (cli, self.raw(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(raw)) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("config key {key}: expected a real, got '{raw}'"))),
            (None, None) => Ok(None),
        }
    }

    fn usize(&self, cli: Option<usize>, key: &str) -> Result<Option<usize>> {
        match (cli, self.raw(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(raw)) => raw.parse().map(Some).map_err(|_| {
                Error::Parse(format!("config key {key}: expected an integer, got '{raw}'"))
            }),
            (None, None) => Ok(None),
        }
    }

    fn u128(&self, cli: Option<u128>, key: &str) -> Result<Option<u128>> {
        match (cli, self.raw(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(raw)) => raw.parse().map(Some).map_err(|_| {
                Error::Parse(format!("config key {key}: expected an integer, got '{raw}'"))
            }),
            (None, None) => Ok(None),
        }
    }

    fn u64(&self, cli: Option<u64>, key: &str) -> Result<Option<u64>> {
        match (cli, self.raw(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(raw)) => parse_u64_flexible(raw, &format!("config key {key}")).map(Some),
            (None, None) => Ok(None),
        }
    }

    /// A boolean flag: the command-line switch wins; otherwise the file.
    fn flag(&self, cli: bool, key: &str) -> Result<bool> {
        if cli {
            return Ok(true);
        }
        match self.raw(key) {
            None => Ok(false),
            Some(raw) => match raw {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(Error::Parse(format!(
                    "config key {key}: expected a boolean, got '{other}'"
                ))),
            },
        }
    }
}

fn parse_u64_flexible(v: &str, what: &str) -> Result<u64> {
    let v = v.trim();
    let parsed = if let Some(hex) = v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        v.parse()
    };
    parsed.map_err(|_| Error::InvalidArgument(format!("{what} must be a u64, got '{v}'")))
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn require<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| invalid(format!("{what} is required")))
}

fn resolve_space(args: &SpaceArgs, cfg: &FileCfg) -> Result<Arc<Space>> {
    let kind = require(
        cfg.string(args.space.clone(), "space"),
        "--space (segment|circle-geo|circle-chord|sphere|finite)",
    )?;
    let a = cfg.f64(args.a, "a")?;
    let b = cfg.f64(args.b, "b")?;
    let alpha = cfg.f64(args.alpha, "alpha")?;
    let matrix = cfg.path(args.matrix.clone(), "matrix");
    let mesh = cfg.f64(args.mesh, "mesh")?;
    let space = match kind.as_str() {
        "segment" => Space::segment(a.unwrap_or(0.0), require(b, "--b (segment endpoint)")?)?,
        "circle-geo" => Space::circle(require(alpha, "--alpha (radius)")?, MetricKind::Geodesic)?,
        "circle-chord" => Space::circle(require(alpha, "--alpha (radius)")?, MetricKind::Chord)?,
        "sphere" => Space::sphere(require(alpha, "--alpha (radius)")?)?,
        "finite" => {
            let path = require(matrix, "--matrix (distance matrix CSV)")?;
            let mut space = Space::finite_from_csv(&path)?;
            if let (Some(mesh), Space::Finite(f)) = (mesh, &mut space) {
                f.set_mesh(mesh)?;
            }
            space
        }
        other => {
            return Err(invalid(format!(
                "unknown space kind '{other}'; expected segment|circle-geo|circle-chord|sphere|finite"
            )))
        }
    };
    Ok(Arc::new(space))
}

fn resolve_solver(args: &SolverArgs, cfg: &FileCfg) -> Result<SolveOptions> {
    let mut opts = SolveOptions::default();
    if let Some(seed) = cfg.u64(args.seed, "seed")? {
        opts.seed = seed;
    } else if let Ok(env) = std::env::var("SLOG_ENERGY_SEED") {
        opts.seed = parse_u64_flexible(&env, "SLOG_ENERGY_SEED")?;
    }
    if let Some(v) = cfg.usize(args.starts, "starts")? {
        opts.starts = v;
    }
    if let Some(v) = cfg.usize(args.max_iters, "max-iters")? {
        opts.max_iters = v;
    }
    if let Some(v) = cfg.f64(args.grad_tol, "grad-tol")? {
        opts.grad_tol = v;
    }
    opts.anneal = cfg.flag(args.anneal, "anneal")?;
    opts.validate()?;
    Ok(opts)
}

fn apply_threads(common: &CommonArgs, cfg: &FileCfg) -> Result<()> {
    if let Some(n) = cfg.usize(common.threads, "threads")? {
        if n < 1 {
            return Err(invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn resolve_budget(cli: Option<u128>, cfg: &FileCfg) -> Result<GridBudget> {
    let mut budget = GridBudget::default();
    if let Some(v) = cfg.u128(cli, "budget")? {
        if v == 0 {
            return Err(invalid("--budget must be positive"));
        }
        budget.max_combinations = v;
    }
    Ok(budget)
}

// ---------------------------------------------------------------------------
// Output plumbing.

fn header(no_header: bool) -> String {
    if no_header {
        String::new()
    } else {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("# generated unix={secs}\n")
    }
}

fn emit(common: &CommonArgs, body: String) -> Result<()> {
    match &common.out {
        Some(path) => fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// The same energy counted over unordered pairs i < j: exactly half.
fn unordered(e: EnergyValue) -> EnergyValue {
    EnergyValue {
        linear: e.linear / 2.0,
        log: e.log - LN_2,
        finite: e.finite,
    }
}

#[derive(Serialize, Deserialize)]
struct MinimizeOutput {
    space: SpaceSpec,
    n: usize,
    s: f64,
    t: f64,
    seed: u64,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    starts_agreeing: Option<usize>,
    /// Sum of the kernel over ordered pairs (i, j), i != j.
    energy_ordered: EnergyValue,
    /// Sum over unordered pairs i < j: half the ordered value.
    energy_unordered: EnergyValue,
    lower_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    indices: Option<Vec<usize>>,
    config: ConfigurationDoc,
}

#[derive(Serialize, Deserialize)]
struct PackOutput {
    space: SpaceSpec,
    n: usize,
    seed: u64,
    converged: bool,
    delta: f64,
    config: ConfigurationDoc,
}

#[derive(Serialize)]
struct ProbeOutput {
    space: SpaceSpec,
    n: usize,
    t: f64,
    report: ProbeReport,
}

#[derive(Serialize)]
struct ClusterOutput {
    space: SpaceSpec,
    n: usize,
    t: f64,
    trace: ClusterTrace,
}

#[derive(Serialize)]
struct OracleOutput {
    space: SpaceSpec,
    op: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    budget: u128,
    indices: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_ordered: Option<EnergyValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_unordered: Option<EnergyValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    /// Rigorous bound on how far this grid value can sit above the
    /// continuous minimum; present when the grid carries a mesh bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_grid: Option<f64>,
    config: ConfigurationDoc,
}

// ---------------------------------------------------------------------------
// Subcommands.

fn cmd_minimize(args: MinimizeArgs) -> Result<ExitCode> {
    let cfg = FileCfg::load(args.common.config.as_deref())?;
    apply_threads(&args.common, &cfg)?;
    let space = resolve_space(&args.space, &cfg)?;
    let opts = resolve_solver(&args.solver, &cfg)?;
    let n = require(cfg.usize(args.n, "n")?, "--n (point count)")?;
    let s = require(cfg.f64(args.s, "s")?, "--s (Riesz exponent)")?;
    let t = cfg.f64(args.t, "t")?.unwrap_or(0.0);
    let exact = cfg.flag(args.exact, "exact")?;
    let params = KernelParams::new(s, t)?;
    let bound = lower_bound(&space, n, params)?;

    let output = if exact {
        if !matches!(*space, Space::Finite(_)) {
            return Err(invalid(
                "--exact needs a finite space; pass --space finite --matrix FILE, \
                 or use the oracle subcommand with --m to discretize",
            ));
        }
        let budget = resolve_budget(args.budget, &cfg)?;
        let om = grid_minimize(&space, n, params, &budget)?;
        MinimizeOutput {
            space: space.spec(),
            n,
            s,
            t,
            seed: opts.seed,
            converged: true,
            starts_agreeing: None,
            energy_ordered: om.energy,
            energy_unordered: unordered(om.energy),
            lower_bound: bound,
            indices: Some(om.indices),
            config: om.config.doc(),
        }
    } else {
        let res = minimize_energy(&space, n, params, &opts)?;
        MinimizeOutput {
            space: space.spec(),
            n,
            s,
            t,
            seed: opts.seed,
            converged: res.converged,
            starts_agreeing: Some(res.starts_agreeing),
            energy_ordered: res.energy,
            energy_unordered: unordered(res.energy),
            lower_bound: bound,
            indices: None,
            config: res.config.doc(),
        }
    };

    let converged = output.converged;
    emit(&args.common, to_json(&output)?)?;
    if converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: solver did not converge within --max-iters");
        Ok(ExitCode::from(2))
    }
}

fn parse_s_values(grid: Option<String>, list: Option<String>) -> Result<Vec<f64>> {
    match (grid, list) {
        (Some(_), Some(_)) => Err(invalid("--s-grid and --s-list are mutually exclusive")),
        (None, None) => Err(invalid("--s-grid or --s-list is required")),
        (None, Some(list)) => parse_float_list(&list, "--s-list"),
        (Some(grid), None) => {
            let parts: Vec<&str> = grid.split(':').collect();
            if parts.len() != 3 {
                return Err(invalid(format!(
                    "--s-grid must be start:end:step, got '{grid}'"
                )));
            }
            let parse = |raw: &str, what: &str| -> Result<f64> {
                raw.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("--s-grid {what}: bad number '{raw}'")))
            };
            let start = parse(parts[0], "start")?;
            let end = parse(parts[1], "end")?;
            let step = parse(parts[2], "step")?;
            if !start.is_finite() || !end.is_finite() || !step.is_finite() {
                return Err(invalid("--s-grid entries must be finite"));
            }
            if !(step > 0.0) {
                return Err(invalid(format!("--s-grid step must be positive, got {step}")));
            }
            if end < start {
                return Err(invalid(format!(
                    "--s-grid end {end} is below start {start}"
                )));
            }
            let mut values = Vec::new();
            let eps = step * 1e-9;
            for k in 0.. {
                let v = start + k as f64 * step;
                if v > end + eps {
                    break;
                }
                values.push(if (v - end).abs() <= eps { end } else { v });
            }
            Ok(values)
        }
    }
}

fn parse_float_list(list: &str, what: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for part in list.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        values.push(
            part.parse()
                .map_err(|_| Error::Parse(format!("{what}: bad number '{part}'")))?,
        );
    }
    if values.is_empty() {
        return Err(invalid(format!("{what} is empty")));
    }
    Ok(values)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let cfg = FileCfg::load(args.common.config.as_deref())?;
    apply_threads(&args.common, &cfg)?;
    let space = resolve_space(&args.space, &cfg)?;
    let opts = resolve_solver(&args.solver, &cfg)?;
    let n = require(cfg.usize(args.n, "n")?, "--n (point count)")?;
    let t = cfg.f64(args.t, "t")?.unwrap_or(0.0);
    let s_values = parse_s_values(
        cfg.string(args.s_grid.clone(), "s-grid"),
        cfg.string(args.s_list.clone(), "s-list"),
    )?;

    let records = sweep_g(&space, n, t, &s_values, &opts)?;

    let mut body = header(args.common.no_header);
    body.push_str(
        "s,t,g_linear,g_log,g_finite,separation,e_logt1_linear,e_logt1_log,e_logt1_finite,\
         converged,starts_agreeing,signature\n",
    );
    for r in &records {
        let sig = r
            .minimizer_signature
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.s,
            r.t,
            r.g.linear,
            r.g.log,
            r.g.finite,
            r.separation,
            r.e_logt1.linear,
            r.e_logt1.log,
            r.e_logt1.finite,
            r.converged,
            r.starts_agreeing,
            sig
        );
    }
    emit(&args.common, body)?;

    let stragglers = records.iter().filter(|r| !r.converged).count();
    if stragglers > 0 {
        eprintln!("warning: {stragglers} sweep points did not converge");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_pack(args: PackArgs) -> Result<ExitCode> {
    let cfg = FileCfg::load(args.common.config.as_deref())?;
    apply_threads(&args.common, &cfg)?;
    let space = resolve_space(&args.space, &cfg)?;
    let opts = resolve_solver(&args.solver, &cfg)?;
    let n = require(cfg.usize(args.n, "n")?, "--n (point count)")?;

    let pack = best_packing(&space, n, &opts)?;
    let output = PackOutput {
        space: space.spec(),
        n,
        seed: opts.seed,
        converged: pack.converged,
        delta: pack.delta,
        config: pack.config.doc(),
    };
    let converged = output.converged;
    emit(&args.common, to_json(&output)?)?;
    if converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: packing solver did not converge within --max-iters");
        Ok(ExitCode::from(3))
    }
}

fn cmd_probe(args: ProbeArgs) -> Result<ExitCode> {
    let cfg = FileCfg::load(args.common.config.as_deref())?;
    apply_threads(&args.common, &cfg)?;
    let space = resolve_space(&args.space, &cfg)?;
    let opts = resolve_solver(&args.solver, &cfg)?;
    let n = require(cfg.usize(args.n, "n")?, "--n (point count)")?;
    let t = cfg.f64(args.t, "t")?.unwrap_or(0.0);
    let s0 = require(cfg.f64(args.s0, "s0")?, "--s0 (probe location)")?;
    let h = cfg.f64(args.h_fd, "h-fd")?;

    let report = derivative_probe(&space, n, t, s0, h, &opts)?;
    let output = ProbeOutput {
        space: space.spec(),
        n,
        t,
        report,
    };
    emit(&args.common, to_json(&output)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_cluster(args: ClusterArgs) -> Result<ExitCode> {
    let cfg = FileCfg::load(args.common.config.as_deref())?;
    apply_threads(&args.common, &cfg)?;
    let space = resolve_space(&args.space, &cfg)?;
    let opts = resolve_solver(&args.solver, &cfg)?;
    let n = require(cfg.usize(args.n, "n")?, "--n (point count)")?;
    let t = cfg.f64(args.t, "t")?.unwrap_or(0.0);
    let s0_raw = require(cfg.string(args.s0.clone(), "s0"), "--s0 (target exponent)")?;
    let s0 = match s0_raw.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => f64::INFINITY,
        other => other
            .parse()
            .map_err(|_| Error::Parse(format!("--s0: bad number '{other}'")))?,
    };
    let schedule = parse_float_list(
        &require(cfg.string(args.schedule.clone(), "schedule"), "--schedule")?,
        "--schedule",
    )?;

    let trace = cluster_probe(&space, n, t, s0, &schedule, &opts)?;
    let output = ClusterOutput {
        space: space.spec(),
        n,
        t,
        trace,
    };
    emit(&args.common, to_json(&output)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let cfg = FileCfg::load(args.common.config.as_deref())?;
    apply_threads(&args.common, &cfg)?;
    let opts = resolve_solver(&args.solver, &cfg)?;
    let suite: Suite = cfg
        .string(args.suite.clone(), "suite")
        .unwrap_or_else(|| "all".to_string())
        .parse()?;

    let reports = run_suite(suite, &opts)?;
    let mut body = header(args.common.no_header);
    let mut total = 0usize;
    let mut failed = 0usize;
    for report in &reports {
        for check in &report.checks {
            total += 1;
            if !check.pass {
                failed += 1;
            }
            let _ = writeln!(
                body,
                "[{}] {} :: {}  {}",
                if check.pass { "PASS" } else { "FAIL" },
                report.suite,
                check.name,
                check.detail
            );
        }
    }
    let _ = writeln!(
        body,
        "verify: {}/{} checks passed across {} suite(s)",
        total - failed,
        total,
        reports.len()
    );
    emit(&args.common, body)?;
    if failed > 0 {
        eprintln!("verify: {failed} check(s) failed");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode> {
    let cfg = FileCfg::load(args.common.config.as_deref())?;
    apply_threads(&args.common, &cfg)?;
    let base = resolve_space(&args.space, &cfg)?;
    let n = require(cfg.usize(args.n, "n")?, "--n (point count)")?;
    let m = cfg.usize(args.m, "m")?;
    let budget = resolve_budget(args.budget, &cfg)?;
    let op = cfg
        .string(args.op.clone(), "op")
        .unwrap_or_else(|| "minimize".to_string());

    let space = match (matches!(*base, Space::Finite(_)), m) {
        (true, None) => base,
        (true, Some(_)) => {
            return Err(invalid("--m only applies when discretizing a continuous space"))
        }
        (false, Some(m)) => Arc::new(base.discretize(m)?),
        (false, None) => {
            return Err(invalid(
                "--m is required to discretize a continuous space for the oracle",
            ))
        }
    };

    let output = match op.as_str() {
        "minimize" => {
            let s = require(cfg.f64(args.s, "s")?, "--s (Riesz exponent)")?;
            let t = cfg.f64(args.t, "t")?.unwrap_or(0.0);
            let params = KernelParams::new(s, t)?;
            let om = grid_minimize(&space, n, params, &budget)?;
            let epsilon_grid = match &*space {
                Space::Finite(f) if f.mesh().is_some() => {
                    slog_energy::grid_epsilon(&space, n, params, om.config.separation()).ok()
                }
                _ => None,
            };
            OracleOutput {
                space: space.spec(),
                op,
                n,
                s: Some(s),
                t: Some(t),
                budget: budget.max_combinations,
                indices: om.indices,
                energy_ordered: Some(om.energy),
                energy_unordered: Some(unordered(om.energy)),
                delta: None,
                epsilon_grid,
                config: om.config.doc(),
            }
        }
        "pack" => {
            let op_pack = grid_pack(&space, n, &budget)?;
            OracleOutput {
                space: space.spec(),
                op,
                n,
                s: None,
                t: None,
                budget: budget.max_combinations,
                indices: op_pack.indices,
                energy_ordered: None,
                energy_unordered: None,
                delta: Some(op_pack.delta),
                epsilon_grid: None,
                config: op_pack.config.doc(),
            }
        }
        other => {
            return Err(invalid(format!(
                "unknown oracle op '{other}'; expected minimize|pack"
            )))
        }
    };
    emit(&args.common, to_json(&output)?)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::SolverFailure(_) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Minimize(args) => cmd_minimize(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Pack(args) => cmd_pack(args),
        Cmd::Probe(args) => cmd_probe(args),
        Cmd::Cluster(args) => cmd_cluster(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Oracle(args) => cmd_oracle(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
