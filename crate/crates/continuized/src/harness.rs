//! Experiment orchestration: CLI parsing, replicate execution with trace
//! export, scripted reproduction of the benchmark figures, trace
//! aggregation, and a self-check suite over the diagnostics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    bound_check_continuized, bound_check_deterministic, erlang_report, ks_critical, mean_and_sem,
    supermartingale_check, BoundReport, RateBound, StochasticBound,
};
use crate::jumpflow::JumpClock;
use crate::methods::{run, run_with_states, Method, MethodConfig, RunRecord, RunTrace};
use crate::oracle::{NoiseModel, Objective};
use crate::schedules::{continuized_schedule, Regime};
use crate::{Error, Result};

/// Header shared by every trace CSV the harness emits.
pub const TRACE_HEADER: &str = "replicate,k,t,f_gap,lyap";

/// Named test problem or a path to a custom diagonal quadratic.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Quad3 {
        #[serde(default = "default_quad3_mu")]
        mu: f64,
        #[serde(rename = "L", default = "default_l")]
        l: f64,
    },
    Quad100,
    Custom { path: PathBuf },
}

fn default_quad3_mu() -> f64 {
    1e-2
}

fn default_l() -> f64 {
    1.0
}

impl ProblemSpec {
    /// Instantiates the objective this spec describes.
    pub fn build(&self) -> Result<Objective> {
        match self {
            ProblemSpec::Quad3 { mu, l } => Objective::quad3(*mu, *l),
            ProblemSpec::Quad100 => Ok(Objective::quad100()),
            ProblemSpec::Custom { path } => Objective::from_json_file(path),
        }
    }

    fn label(&self) -> String {
        match self {
            ProblemSpec::Quad3 { .. } => "quad3".to_string(),
            ProblemSpec::Quad100 => "quad100".to_string(),
            ProblemSpec::Custom { path } => format!("custom:{}", path.display()),
        }
    }
}

/// Artifact kinds an experiment may write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Traces,
    Summary,
    Lyapunov,
    Bounds,
}

fn default_emit() -> Vec<Emit> {
    vec![Emit::Traces, Emit::Summary]
}

fn default_replicates() -> usize {
    1
}

fn default_jobs() -> usize {
    1
}

/// Full description of one experiment: problem, method entries, replicate
/// count, output directory, and which artifacts to write.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub methods: Vec<MethodConfig>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub out_dir: PathBuf,
    #[serde(default = "default_emit")]
    pub emit: Vec<Emit>,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::invalid("replicates", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("methods", "at least one method entry is required"));
        }
        for method in &self.methods {
            method.validate()?;
        }
        Ok(())
    }

    fn emits(&self, kind: Emit) -> bool {
        self.emit.contains(&kind)
    }
}

/// One row of a trace CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub replicate: usize,
    pub k: usize,
    pub t: f64,
    pub f_gap: f64,
    pub lyap: Option<f64>,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn write_trace_csv(path: &Path, replicate: usize, records: &[RunRecord]) -> Result<()> {
    let mut out = String::with_capacity(32 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for rec in records {
        let lyap = rec.lyap.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{replicate},{},{},{},{lyap}\n", rec.k, rec.t, rec.f_gap));
    }
    fs::write(path, out).map_err(io_error(path))
}

/// Reads a trace CSV, enforcing the shared header and column types.
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != TRACE_HEADER {
        return Err(Error::Schema {
            reason: format!(
                "{}: expected header `{TRACE_HEADER}`, found `{header}`",
                path.display()
            ),
        });
    }
    let parse_err = |line_no: usize, what: &str, field: &str| Error::Parse {
        path: path.to_path_buf(),
        reason: format!("line {line_no}: bad {what} `{field}`"),
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let line_no = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                reason: format!("line {line_no}: expected 5 fields, found {}", fields.len()),
            });
        }
        let replicate =
            fields[0].parse().map_err(|_| parse_err(line_no, "replicate", fields[0]))?;
        let k = fields[1].parse().map_err(|_| parse_err(line_no, "k", fields[1]))?;
        let t = fields[2].parse().map_err(|_| parse_err(line_no, "t", fields[2]))?;
        let f_gap = fields[3].parse().map_err(|_| parse_err(line_no, "f_gap", fields[3]))?;
        let lyap = if fields[4].is_empty() {
            None
        } else {
            Some(fields[4].parse().map_err(|_| parse_err(line_no, "lyap", fields[4]))?)
        };
        rows.push(TraceRow { replicate, k, t, f_gap, lyap });
    }
    Ok(rows)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Schema { reason: e.to_string() })?;
    text.push('\n');
    fs::write(path, text).map_err(io_error(path))
}

/// Per-method results recorded in the experiment summary.
#[derive(Debug, Serialize)]
pub struct MethodSummary {
    pub label: String,
    pub method: String,
    pub regime: String,
    pub steps: usize,
    pub seed_base: u64,
    pub traces: Vec<String>,
    pub final_f_gap: Vec<f64>,
}

/// Summary of a completed experiment, also written as `summary.json`.
#[derive(Debug, Serialize)]
pub struct ExperimentSummary {
    pub problem: String,
    pub replicates: usize,
    pub methods: Vec<MethodSummary>,
}

#[derive(Serialize)]
struct LyapunovRow {
    k: usize,
    t_mean: f64,
    phi_mean: f64,
    phi_sem: f64,
}

fn lyapunov_rows(traces: &[RunTrace]) -> Vec<LyapunovRow> {
    let len = traces.first().map(|t| t.records.len()).unwrap_or(0);
    (0..len)
        .filter_map(|k| {
            let phis: Vec<f64> = traces.iter().filter_map(|t| t.records[k].lyap).collect();
            if phis.len() != traces.len() {
                return None;
            }
            let ts: Vec<f64> = traces.iter().map(|t| t.records[k].t).collect();
            let (phi_mean, phi_sem) = mean_and_sem(&phis);
            let (t_mean, _) = mean_and_sem(&ts);
            Some(LyapunovRow { k, t_mean, phi_mean, phi_sem })
        })
        .collect()
}

fn bounds_for(
    traces: &[RunTrace],
    obj: &Objective,
    method: &MethodConfig,
    replicates: usize,
) -> Result<Option<BoundReport>> {
    let report = match (method.method, method.regime) {
        (Method::Gd, Regime::Convex) => {
            Some(bound_check_deterministic(&traces[0], obj, RateBound::GdConvex)?)
        }
        (Method::Gd, Regime::StronglyConvex) => {
            Some(bound_check_deterministic(&traces[0], obj, RateBound::GdStronglyConvex)?)
        }
        (Method::Nesterov, Regime::Convex) => {
            Some(bound_check_deterministic(&traces[0], obj, RateBound::AccelConvex)?)
        }
        (Method::Nesterov, Regime::StronglyConvex) => {
            Some(bound_check_deterministic(&traces[0], obj, RateBound::AccelStronglyConvex)?)
        }
        (Method::Continuized, regime) if replicates >= 100 => {
            let grid = [(method.steps / 2) as f64, method.steps as f64];
            let bound = match regime {
                Regime::Convex => StochasticBound::StoppedConvex,
                Regime::StronglyConvex => StochasticBound::StoppedStronglyConvex,
            };
            Some(bound_check_continuized(traces, obj, bound, &grid)?)
        }
        _ => None,
    };
    Ok(report)
}

/// Runs every method entry for the configured number of replicates and
/// writes the requested artifacts under `out_dir`. Replicate `r` of a
/// method runs with seed `seed + r`, so output is a pure function of the
/// config document.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    config.validate()?;
    let obj = config.problem.build()?;
    fs::create_dir_all(&config.out_dir).map_err(io_error(&config.out_dir))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;

    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut methods = Vec::new();
    for method in &config.methods {
        let base = method.method.to_string();
        let count = seen.entry(base.clone()).or_insert(0);
        *count += 1;
        let label = if *count == 1 { base } else { format!("{base}_{count}") };
        let dir = config.out_dir.join(&label);
        fs::create_dir_all(&dir).map_err(io_error(&dir))?;

        let traces: Vec<RunTrace> = pool.install(|| {
            (0..config.replicates)
                .into_par_iter()
                .map(|r| {
                    let mut replicate = method.clone();
                    replicate.seed = method.seed + r as u64;
                    run_with_states(&replicate, &obj)
                })
                .collect::<Result<Vec<_>>>()
        })?;

        let mut trace_files = Vec::new();
        if config.emits(Emit::Traces) {
            for (r, trace) in traces.iter().enumerate() {
                let name = format!("r{r:03}.csv");
                write_trace_csv(&dir.join(&name), r, &trace.records)?;
                trace_files.push(format!("{label}/{name}"));
            }
        }
        if config.emits(Emit::Lyapunov) && method.method != Method::Gd {
            write_json(&dir.join("lyapunov.json"), &lyapunov_rows(&traces))?;
        }
        if config.emits(Emit::Bounds) && method.noise.is_none() {
            if let Some(report) = bounds_for(&traces, &obj, method, config.replicates)? {
                write_json(&dir.join("bounds.json"), &report)?;
            }
        }
        let final_f_gap = traces
            .iter()
            .map(|t| t.records.last().map(|rec| rec.f_gap).unwrap_or(f64::NAN))
            .collect();
        methods.push(MethodSummary {
            label,
            method: method.method.to_string(),
            regime: method.regime.to_string(),
            steps: method.steps,
            seed_base: method.seed,
            traces: trace_files,
            final_f_gap,
        });
    }

    let summary = ExperimentSummary {
        problem: config.problem.label(),
        replicates: config.replicates,
        methods,
    };
    if config.emits(Emit::Summary) {
        write_json(&config.out_dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}

/// The four benchmark panels: convex and strongly convex comparisons,
/// noiseless (fig1) and with additive gradient noise from the optimum
/// (fig2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1Convex,
    Fig1StronglyConvex,
    Fig2Convex,
    Fig2StronglyConvex,
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Figure::Fig1Convex => "fig1_convex",
            Figure::Fig1StronglyConvex => "fig1_strongly_convex",
            Figure::Fig2Convex => "fig2_convex",
            Figure::Fig2StronglyConvex => "fig2_strongly_convex",
        };
        f.write_str(name)
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "fig1_convex" => Ok(Figure::Fig1Convex),
            "fig1_strongly_convex" => Ok(Figure::Fig1StronglyConvex),
            "fig2_convex" => Ok(Figure::Fig2Convex),
            "fig2_strongly_convex" => Ok(Figure::Fig2StronglyConvex),
            other => Err(Error::invalid(
                "figure",
                format!(
                    "unknown figure `{other}`; expected fig1_convex, fig1_strongly_convex, \
                     fig2_convex, or fig2_strongly_convex"
                ),
            )),
        }
    }
}

/// Regenerates the data behind one benchmark panel: gradient descent,
/// the accelerated baseline, and a single randomized run, each written
/// as `{method}.csv` under `out_dir`. The convex panels use the
/// 100-dimensional quadratic, the strongly convex panels the
/// 3-dimensional one; fig2 starts every method at the optimum with
/// isotropic gradient noise of variance 1e-4 per coordinate.
pub fn reproduce_figure(which: Figure, out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let (problem, regime, mu, steps) = match which {
        Figure::Fig1Convex | Figure::Fig2Convex => {
            (ProblemSpec::Quad100, Regime::Convex, 0.0, 1000)
        }
        Figure::Fig1StronglyConvex | Figure::Fig2StronglyConvex => {
            (ProblemSpec::Quad3 { mu: 1e-2, l: 1.0 }, Regime::StronglyConvex, 1e-2, 600)
        }
    };
    let obj = problem.build()?;
    let noise = match which {
        Figure::Fig2Convex | Figure::Fig2StronglyConvex => {
            Some(NoiseModel::isotropic(1e-4, obj.dim)?)
        }
        _ => None,
    };
    fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;

    let mut written = Vec::new();
    for method in [Method::Gd, Method::Nesterov, Method::Continuized] {
        let config =
            MethodConfig { method, regime, mu, l: 1.0, noise, seed, steps, start: None };
        let records = run(&config, &obj)?;
        let path = out_dir.join(format!("{method}.csv"));
        write_trace_csv(&path, 0, &records)?;
        written.push(path);
    }
    Ok(written)
}

/// Per-step statistics of `f_gap` across the replicates of one
/// experiment directory.
#[derive(Debug, Serialize)]
pub struct AggregateRow {
    pub k: usize,
    pub n: usize,
    pub mean: f64,
    pub sem: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Serialize)]
pub struct AggregateSummary {
    pub replicates: usize,
    pub rows: Vec<AggregateRow>,
}

/// Aggregates every trace CSV in a directory into per-k mean, SEM, min,
/// and max of `f_gap`.
pub fn aggregate(trace_dir: &Path) -> Result<AggregateSummary> {
    let entries = fs::read_dir(trace_dir).map_err(io_error(trace_dir))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::invalid(
            "trace_dir",
            format!("no trace CSVs in {}", trace_dir.display()),
        ));
    }
    let mut by_k: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut replicates = BTreeSet::new();
    for path in &paths {
        for row in read_trace_csv(path)? {
            by_k.entry(row.k).or_default().push(row.f_gap);
            replicates.insert(row.replicate);
        }
    }
    let rows = by_k
        .into_iter()
        .map(|(k, gaps)| {
            let (mean, sem) = mean_and_sem(&gaps);
            let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
            let max = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            AggregateRow { k, n: gaps.len(), mean, sem, min, max }
        })
        .collect();
    Ok(AggregateSummary { replicates: replicates.len(), rows })
}

/// Outcome of one self-check.
#[derive(Debug)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn rate_check(
    obj: &Objective,
    method: Method,
    regime: Regime,
    mu: f64,
    bound: RateBound,
    seed: u64,
) -> Result<CheckReport> {
    let config = MethodConfig {
        method,
        regime,
        mu,
        l: obj.l,
        noise: None,
        seed,
        steps: 400,
        start: None,
    };
    let trace = run_with_states(&config, obj)?;
    let report = bound_check_deterministic(&trace, obj, bound)?;
    Ok(CheckReport {
        name: bound.name(),
        passed: report.satisfied,
        detail: format!("worst lhs/rhs ratio {:.3e}", report.worst_ratio),
    })
}

fn schedule_identity_check() -> Result<CheckReport> {
    let combos = [
        (Regime::Convex, 0.0, 1.0),
        (Regime::Convex, 0.0, 7.5),
        (Regime::StronglyConvex, 0.05, 1.0),
        (Regime::StronglyConvex, 0.9, 3.0),
    ];
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-12);
    let mut worst = 0.0f64;
    for (regime, mu, l) in combos {
        let sched = continuized_schedule(regime, mu, l)?;
        for i in 1..=1000 {
            let t = 0.1 * i as f64;
            let a = sched.a(t);
            let b = sched.b(t);
            let gamma_prime = (a / (2.0 * l * b)).sqrt();
            worst = worst
                .max(rel(sched.gamma_prime(t), gamma_prime))
                .max(rel(sched.eta(t), (2.0 * b / (l * a)).sqrt()))
                .max(rel(sched.eta_prime(t), mu * gamma_prime));
        }
    }
    Ok(CheckReport {
        name: "schedule_identities",
        passed: worst < 1e-6,
        detail: format!("max relative deviation {worst:.3e}"),
    })
}

fn weight_curvature_check() -> Result<CheckReport> {
    let combos = [(0.04, 1.0), (0.25, 2.0)];
    let h = 1e-3;
    let mut worst = 0.0f64;
    for (mu, l) in combos {
        let sched = continuized_schedule(Regime::StronglyConvex, mu, l)?;
        let root_a = |t: f64| sched.a(t).sqrt();
        for i in 1..=1000 {
            let t = 0.05 * i as f64;
            let second = (root_a(t + h) - 2.0 * root_a(t) + root_a(t - h)) / (h * h);
            let target = mu / (4.0 * l) * root_a(t);
            worst = worst.max((second - target).abs() / target);
        }
    }
    Ok(CheckReport {
        name: "weight_curvature",
        passed: worst < 1e-6,
        detail: format!("max relative residual {worst:.3e}"),
    })
}

fn jump_clock_check(seed: u64) -> Result<CheckReport> {
    let n = 20_000;
    let mut clock = JumpClock::new(seed);
    let mut prev = 0.0;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let t = clock.next_jump();
        samples.push(t - prev);
        prev = t;
    }
    let report = erlang_report(&samples, 1)?;
    let mean_tol = 4.0 / (n as f64).sqrt();
    let var_tol = 4.0 * (8.0 / n as f64).sqrt();
    let ks_tol = ks_critical(0.001, n);
    let passed = (report.mean - 1.0).abs() <= mean_tol
        && (report.variance - 1.0).abs() <= var_tol
        && report.ks_distance <= ks_tol;
    Ok(CheckReport {
        name: "jump_clock",
        passed,
        detail: format!(
            "mean {:.4}, variance {:.4}, ks {:.4} (critical {ks_tol:.4})",
            report.mean, report.variance, report.ks_distance
        ),
    })
}

fn supermartingale_self_check(
    name: &'static str,
    obj: &Objective,
    regime: Regime,
    mu: f64,
    seed: u64,
) -> Result<CheckReport> {
    let config = MethodConfig {
        method: Method::Continuized,
        regime,
        mu,
        l: obj.l,
        noise: None,
        seed,
        steps: 80,
        start: None,
    };
    let grid: Vec<f64> = (0..=10).map(|i| 3.0 * i as f64).collect();
    let cert = supermartingale_check(&config, obj, &grid, 150)?;
    Ok(CheckReport {
        name,
        passed: cert.monotone_ok,
        detail: format!("max increase beyond noise {:.3e}", cert.max_violation),
    })
}

fn stopped_bound_check(
    name: &'static str,
    obj: &Objective,
    regime: Regime,
    mu: f64,
    bound: StochasticBound,
    steps: usize,
    grid: &[f64],
    seed: u64,
) -> Result<CheckReport> {
    let mut traces = Vec::with_capacity(120);
    for r in 0..120 {
        let config = MethodConfig {
            method: Method::Continuized,
            regime,
            mu,
            l: obj.l,
            noise: None,
            seed: seed + r,
            steps,
            start: None,
        };
        traces.push(run_with_states(&config, obj)?);
    }
    let report = bound_check_continuized(&traces, obj, bound, grid)?;
    Ok(CheckReport {
        name,
        passed: report.satisfied,
        detail: format!("worst lhs/rhs ratio {:.3e}", report.worst_ratio),
    })
}

/// Runs the diagnostics suites at a reduced scale: schedule identities,
/// the deterministic rate bounds, jump-clock statistics, expected descent
/// of the potential, and the stopped-time bounds.
pub fn run_checks(seed: u64) -> Result<Vec<CheckReport>> {
    let quad100 = Objective::quad100();
    let quad3 = Objective::quad3(1e-2, 1.0)?;
    let reports = vec![
        schedule_identity_check()?,
        weight_curvature_check()?,
        rate_check(&quad100, Method::Gd, Regime::Convex, 0.0, RateBound::GdConvex, seed)?,
        rate_check(
            &quad3,
            Method::Gd,
            Regime::StronglyConvex,
            1e-2,
            RateBound::GdStronglyConvex,
            seed,
        )?,
        rate_check(&quad100, Method::Nesterov, Regime::Convex, 0.0, RateBound::AccelConvex, seed)?,
        rate_check(
            &quad3,
            Method::Nesterov,
            Regime::StronglyConvex,
            1e-2,
            RateBound::AccelStronglyConvex,
            seed,
        )?,
        jump_clock_check(seed + 1)?,
        supermartingale_self_check(
            "expected_descent_convex",
            &quad100,
            Regime::Convex,
            0.0,
            seed + 2,
        )?,
        supermartingale_self_check(
            "expected_descent_strongly_convex",
            &quad3,
            Regime::StronglyConvex,
            1e-2,
            seed + 3,
        )?,
        stopped_bound_check(
            "stopped_bound_convex",
            &quad100,
            Regime::Convex,
            0.0,
            StochasticBound::StoppedConvex,
            60,
            &[10.0, 50.0],
            seed + 4,
        )?,
        stopped_bound_check(
            "stopped_bound_strongly_convex",
            &quad3,
            Regime::StronglyConvex,
            1e-2,
            StochasticBound::StoppedStronglyConvex,
            220,
            &[50.0, 200.0],
            seed + 5,
        )?,
    ];
    Ok(reports)
}

/// Parsed command line: what to do and with which settings.
#[derive(Debug)]
pub enum CliAction {
    Run(ExperimentConfig),
    Reproduce { which: Figure, out_dir: PathBuf, seed: u64 },
    Aggregate { trace_dir: PathBuf, out: Option<PathBuf> },
    Check { seed: u64 },
    Help(String),
}

#[derive(Parser)]
#[command(
    name = "continuized",
    about = "Randomized first-order optimization benchmark harness",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: CommandLine,
}

#[derive(Subcommand)]
enum CommandLine {
    /// Run a configured experiment and write trace/summary artifacts.
    Run(RunArgs),
    /// Regenerate the data behind one benchmark figure panel.
    Reproduce(ReproduceArgs),
    /// Aggregate a directory of trace CSVs into per-step statistics.
    Aggregate(AggregateArgs),
    /// Run the diagnostics suites at a reduced scale.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Test problem: quad3, quad100, or custom (with --problem-file).
    #[arg(long)]
    problem: Option<String>,
    /// JSON file describing a custom diagonal quadratic.
    #[arg(long)]
    problem_file: Option<PathBuf>,
    /// Method to run; repeat the flag to run several.
    #[arg(long = "method")]
    methods: Vec<String>,
    /// Parameter regime: convex or strongly-convex.
    #[arg(long)]
    regime: Option<String>,
    /// Strong-convexity parameter fed to the methods.
    #[arg(long)]
    mu: Option<f64>,
    /// Smoothness parameter fed to the methods.
    #[arg(long = "L")]
    l: Option<f64>,
    /// Per-coordinate variance of additive gradient noise.
    #[arg(long)]
    sigma_g2: Option<f64>,
    /// Number of gradient steps per replicate.
    #[arg(long)]
    steps: Option<usize>,
    /// Number of replicates per method.
    #[arg(long)]
    replicates: Option<usize>,
    /// Base seed; replicate r runs with seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Concurrent replicates (0 means one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON experiment config replacing the per-flag configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// fig1_convex, fig1_strongly_convex, fig2_convex, or fig2_strongly_convex.
    figure: String,
    /// Output directory; defaults to the figure name.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the randomized run.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AggregateArgs {
    /// Directory of trace CSVs from one experiment.
    trace_dir: PathBuf,
    /// Write the JSON summary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Seed for the randomized checks.
    #[arg(long)]
    seed: Option<u64>,
}

fn config_from_args(args: RunArgs) -> Result<ExperimentConfig> {
    if let Some(path) = &args.config {
        let flags_given = args.problem.is_some()
            || args.problem_file.is_some()
            || !args.methods.is_empty()
            || args.regime.is_some()
            || args.mu.is_some()
            || args.l.is_some()
            || args.sigma_g2.is_some()
            || args.steps.is_some()
            || args.replicates.is_some()
            || args.seed.is_some();
        if flags_given {
            return Err(Error::invalid(
                "config",
                "--config replaces the per-flag configuration; only --jobs and --out may \
                 accompany it",
            ));
        }
        let text = fs::read_to_string(path).map_err(io_error(path))?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Parse { path: path.clone(), reason: e.to_string() })?;
        if let Some(out) = args.out {
            config.out_dir = out;
        }
        if let Some(jobs) = args.jobs {
            config.jobs = jobs;
        }
        config.validate()?;
        return Ok(config);
    }

    let mu = args.mu.unwrap_or(0.0);
    let l = args.l.unwrap_or(1.0);
    let problem = match args.problem.as_deref() {
        None => {
            return Err(Error::invalid(
                "problem",
                "--problem is required (quad3, quad100, or custom)",
            ))
        }
        Some("quad3") => {
            ProblemSpec::Quad3 { mu: if mu > 0.0 { mu } else { default_quad3_mu() }, l }
        }
        Some("quad100") => ProblemSpec::Quad100,
        Some("custom") => match args.problem_file {
            Some(path) => ProblemSpec::Custom { path },
            None => {
                return Err(Error::invalid(
                    "problem-file",
                    "--problem custom requires --problem-file",
                ))
            }
        },
        Some(other) => {
            return Err(Error::invalid("problem", format!("unknown problem `{other}`")))
        }
    };
    let regime: Regime = match args.regime.as_deref() {
        Some(s) => s.parse()?,
        None => return Err(Error::invalid("regime", "--regime is required")),
    };
    if args.methods.is_empty() {
        return Err(Error::invalid("method", "at least one --method is required"));
    }
    let steps = match args.steps {
        Some(s) => s,
        None => return Err(Error::invalid("steps", "--steps is required")),
    };
    let seed = args.seed.unwrap_or(0);
    let noise = match args.sigma_g2 {
        None => None,
        Some(s) if s == 0.0 => None,
        Some(s) => Some(NoiseModel::isotropic(s, problem.build()?.dim)?),
    };
    let methods = args
        .methods
        .iter()
        .map(|name| {
            let method: Method = name.parse()?;
            Ok(MethodConfig { method, regime, mu, l, noise, seed, steps, start: None })
        })
        .collect::<Result<Vec<_>>>()?;
    let config = ExperimentConfig {
        problem,
        methods,
        replicates: args.replicates.unwrap_or(1),
        out_dir: args.out.unwrap_or_else(|| PathBuf::from("out")),
        emit: default_emit(),
        jobs: args.jobs.unwrap_or(1),
    };
    config.validate()?;
    Ok(config)
}

/// Parses a full command line (including the program name) into an
/// action, validating flag combinations along the way.
pub fn parse_cli<I, T>(argv: I) -> Result<CliAction>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Ok(CliAction::Help(e.render().to_string()));
        }
        Err(e) => return Err(Error::invalid("argv", e.render().to_string())),
    };
    match cli.command {
        CommandLine::Run(args) => Ok(CliAction::Run(config_from_args(args)?)),
        CommandLine::Reproduce(args) => {
            let which: Figure = args.figure.parse()?;
            let out_dir = args.out.unwrap_or_else(|| PathBuf::from(which.to_string()));
            Ok(CliAction::Reproduce { which, out_dir, seed: args.seed.unwrap_or(42) })
        }
        CommandLine::Aggregate(args) => {
            Ok(CliAction::Aggregate { trace_dir: args.trace_dir, out: args.out })
        }
        CommandLine::Check(args) => Ok(CliAction::Check { seed: args.seed.unwrap_or(7) }),
    }
}
