//! Empirical certification of the convergence theory: Lyapunov evaluation,
//! Monte-Carlo supermartingale checks, rate-bound verdicts for both the
//! deterministic and the random-clock methods, jump-time statistics, and
//! log-slope fitting for rate plots.

use crate::jumpflow::{mix_convex, mix_strongly_convex, MixState};
use crate::methods::{run_with_states, Method, MethodConfig, RunRecord, RunTrace};
use crate::oracle::Objective;
use crate::schedules::{continuized_schedule, ContinuousSchedule, Regime};
use crate::vecops::dist_sq;
use crate::{Error, Result};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Gamma};

/// The potential A_t·(f(x) − f*) + B_t·‖z − x*‖² whose expectation is
/// non-increasing along the continuized dynamics.
pub fn lyapunov_value(
    t: f64,
    x: &[f64],
    z: &[f64],
    obj: &Objective,
    sched: &ContinuousSchedule,
) -> f64 {
    sched.a(t) * obj.f_gap(x) + sched.b(t) * dist_sq(z, &obj.x_star)
}

/// Kolmogorov–Smirnov distance between a sample (sorted in place) and the
/// distribution with the given CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic KS critical value √(ln(2/α)/2)/√n: distances above it reject
/// the hypothesized distribution at significance α.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    ((2.0 / alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub(crate) fn mean_and_sem(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// State of a continuized run at an arbitrary time: the sample at the last
/// jump at or before `t`, transported to `t` by the closed-form mixing
/// flow. `t` must not exceed the last recorded jump.
pub fn state_at(trace: &RunTrace, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", "must be finite and >= 0"));
    }
    let states = &trace.states;
    let last = states.last().ok_or_else(|| Error::invalid("trace", "has no states"))?;
    if t > last.t {
        return Err(Error::invalid(
            "t",
            format!("{} is beyond the last recorded jump at {}", t, last.t),
        ));
    }
    let idx = states.partition_point(|s| s.t <= t) - 1;
    let sample = &states[idx];
    if sample.t == t {
        return Ok((sample.x.clone(), sample.z.clone()));
    }
    let s = MixState {
        x: sample.x.clone(),
        z: sample.z.clone(),
    };
    let flowed = match trace.config.regime {
        Regime::Convex => mix_convex(&s, sample.t, t)?,
        Regime::StronglyConvex => {
            mix_strongly_convex(&s, trace.config.mu, trace.config.l, t - sample.t)?
        }
    };
    Ok((flowed.x, flowed.z))
}

/// Monte-Carlo verdict on the expected Lyapunov path over a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovCertificate {
    pub grid: Vec<f64>,
    pub mean_phi: Vec<f64>,
    pub sem: Vec<f64>,
    pub monotone_ok: bool,
    /// Largest mean increase between consecutive grid times in excess of
    /// three standard errors of that (paired) increase; 0 when the mean
    /// path is non-increasing within slack.
    pub max_violation: f64,
}

/// Estimate E[φ_t] over a grid by running noiseless replicates of the
/// random-clock method and flowing each to the grid times, then test that
/// the mean path is non-increasing up to three standard errors.
pub fn supermartingale_check(
    config: &MethodConfig,
    obj: &Objective,
    grid: &[f64],
    replicates: usize,
) -> Result<LyapunovCertificate> {
    if config.method != Method::Continuized {
        return Err(Error::invalid("method", "the potential is tracked along continuized runs"));
    }
    if config.noise.is_some() {
        return Err(Error::invalid("noise", "the expected-descent property is noiseless"));
    }
    if replicates < 100 {
        return Err(Error::invalid("replicates", "need at least 100"));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
        return Err(Error::invalid("grid", "times must be non-negative and strictly increasing"));
    }
    let sched = continuized_schedule(config.regime, config.mu, config.l)?;
    let mut phi = vec![Vec::with_capacity(replicates); grid.len()];
    for r in 0..replicates {
        let mut cfg = config.clone();
        cfg.seed = config.seed + r as u64;
        let trace = run_with_states(&cfg, obj)?;
        for (j, &t) in grid.iter().enumerate() {
            let (x, z) = state_at(&trace, t)?;
            phi[j].push(lyapunov_value(t, &x, &z, obj, &sched));
        }
    }
    let (mean_phi, sem): (Vec<f64>, Vec<f64>) = phi.iter().map(|col| mean_and_sem(col)).unzip();
    let mut max_violation = 0.0_f64;
    for j in 0..grid.len() - 1 {
        let diffs: Vec<f64> = (0..replicates).map(|r| phi[j + 1][r] - phi[j][r]).collect();
        let (mean_d, sem_d) = mean_and_sem(&diffs);
        max_violation = max_violation.max(mean_d - 3.0 * sem_d);
    }
    Ok(LyapunovCertificate {
        grid: grid.to_vec(),
        mean_phi,
        sem,
        monotone_ok: max_violation <= 0.0,
        max_violation: max_violation.max(0.0),
    })
}

/// Pointwise comparison of a measured quantity against a rate formula.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub satisfied: bool,
    pub worst_ratio: f64,
}

impl BoundReport {
    fn from_sides(bound_name: &str, lhs: Vec<f64>, rhs: Vec<f64>, tol: f64) -> BoundReport {
        let mut worst_ratio = 0.0_f64;
        let mut satisfied = true;
        for (l, r) in lhs.iter().zip(&rhs) {
            let ratio = if *r > 0.0 {
                l / r
            } else if *l <= 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst_ratio = worst_ratio.max(ratio);
            if *l > r * (1.0 + tol) {
                satisfied = false;
            }
        }
        BoundReport {
            bound_name: bound_name.to_string(),
            lhs,
            rhs,
            satisfied,
            worst_ratio,
        }
    }
}

/// Non-asymptotic rate bounds for the deterministic methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateBound {
    GdConvex,
    GdStronglyConvex,
    AccelConvex,
    AccelStronglyConvex,
}

impl RateBound {
    pub fn name(self) -> &'static str {
        match self {
            RateBound::GdConvex => "gd_convex_rate",
            RateBound::GdStronglyConvex => "gd_strongly_convex_rate",
            RateBound::AccelConvex => "accelerated_convex_rate",
            RateBound::AccelStronglyConvex => "accelerated_strongly_convex_rate",
        }
    }

    fn expects(self) -> (Method, Regime) {
        match self {
            RateBound::GdConvex => (Method::Gd, Regime::Convex),
            RateBound::GdStronglyConvex => (Method::Gd, Regime::StronglyConvex),
            RateBound::AccelConvex => (Method::Nesterov, Regime::Convex),
            RateBound::AccelStronglyConvex => (Method::Nesterov, Regime::StronglyConvex),
        }
    }
}

/// Check a deterministic trace point by point against its rate bound, with
/// 1e-9 relative tolerance. These are exact inequalities of the method,
/// not statistical claims.
pub fn bound_check_deterministic(
    trace: &RunTrace,
    obj: &Objective,
    bound: RateBound,
) -> Result<BoundReport> {
    let (method, regime) = bound.expects();
    if trace.config.method != method || trace.config.regime != regime {
        return Err(Error::invalid(
            "bound",
            format!(
                "{} applies to a {method} run in the {regime} regime, got {} in {}",
                bound.name(),
                trace.config.method,
                trace.config.regime
            ),
        ));
    }
    let start = &trace.states[0];
    let x2 = dist_sq(&start.x, &obj.x_star);
    let z2 = dist_sq(&start.z, &obj.x_star);
    let f_gap0 = trace.records[0].f_gap;
    let (mu, l) = (trace.config.mu, trace.config.l);
    let records: Vec<&RunRecord> = match bound {
        // the accelerated convex rate divides by k², so it starts at k = 1
        RateBound::AccelConvex => trace.records.iter().skip(1).collect(),
        _ => trace.records.iter().collect(),
    };
    let lhs: Vec<f64> = records.iter().map(|r| r.f_gap).collect();
    let rhs: Vec<f64> = records
        .iter()
        .map(|r| {
            let k = r.k as f64;
            match bound {
                RateBound::GdConvex => 2.0 * l * x2 / (k + 4.0),
                RateBound::GdStronglyConvex => 0.5 * l * (1.0 - mu / l).powf(k) * x2,
                RateBound::AccelConvex => 2.0 * l * x2 / (k * k),
                RateBound::AccelStronglyConvex => {
                    (f_gap0 + 0.5 * mu * z2) * (1.0 - (mu / l).sqrt()).powf(k)
                }
            }
        })
        .collect();
    Ok(BoundReport::from_sides(bound.name(), lhs, rhs, 1e-9))
}

/// Expectation bounds for the random-clock method, certified over
/// replicates with three standard errors of slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StochasticBound {
    StoppedConvex,
    StoppedStronglyConvex,
    NoiseConvex,
    NoiseStronglyConvex,
}

impl StochasticBound {
    pub fn name(self) -> &'static str {
        match self {
            StochasticBound::StoppedConvex => "stopped_convex",
            StochasticBound::StoppedStronglyConvex => "stopped_strongly_convex",
            StochasticBound::NoiseConvex => "noise_floor_convex",
            StochasticBound::NoiseStronglyConvex => "noise_floor_strongly_convex",
        }
    }

    fn regime(self) -> Regime {
        match self {
            StochasticBound::StoppedConvex | StochasticBound::NoiseConvex => Regime::Convex,
            _ => Regime::StronglyConvex,
        }
    }

    fn needs_noise(self) -> bool {
        matches!(self, StochasticBound::NoiseConvex | StochasticBound::NoiseStronglyConvex)
    }
}

/// Check replicate traces of the random-clock method against an
/// expectation bound. For the stopped bounds the grid lists iteration
/// counts; for the noise bounds it lists times. Each lhs entry is the
/// replicate mean minus three standard errors.
pub fn bound_check_continuized(
    traces: &[RunTrace],
    obj: &Objective,
    bound: StochasticBound,
    grid: &[f64],
) -> Result<BoundReport> {
    if traces.len() < 100 {
        return Err(Error::invalid("traces", "need at least 100 replicates"));
    }
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must be non-empty"));
    }
    for trace in traces {
        if trace.config.method != Method::Continuized {
            return Err(Error::invalid("traces", "expected continuized runs"));
        }
        if trace.config.regime != bound.regime() {
            return Err(Error::invalid(
                "traces",
                format!("{} expects the {} regime", bound.name(), bound.regime()),
            ));
        }
        if trace.config.noise.is_some() != bound.needs_noise() {
            return Err(Error::invalid(
                "traces",
                format!(
                    "{} expects runs {} gradient noise",
                    bound.name(),
                    if bound.needs_noise() { "with" } else { "without" }
                ),
            ));
        }
    }
    let first = &traces[0];
    let z2 = dist_sq(&first.states[0].z, &obj.x_star);
    let f_gap0 = first.records[0].f_gap;
    let (mu, l) = (first.config.mu, first.config.l);
    let q = (mu / l).sqrt();
    let phi0 = f_gap0 + 0.5 * mu * z2;
    let sigma2 = first.config.noise.map(|n| n.sigma2_bound).unwrap_or(0.0);
    let mut lhs = Vec::with_capacity(grid.len());
    let mut rhs = Vec::with_capacity(grid.len());
    for &g in grid {
        let samples: Vec<f64> = match bound {
            StochasticBound::StoppedConvex | StochasticBound::StoppedStronglyConvex => {
                let k = g.round() as usize;
                traces
                    .iter()
                    .map(|trace| {
                        let rec = trace.records.get(k).ok_or_else(|| {
                            Error::invalid("grid", format!("k={k} exceeds the run length"))
                        })?;
                        Ok(match bound {
                            StochasticBound::StoppedConvex => rec.t * rec.t * rec.f_gap,
                            _ => (q * rec.t).exp() * rec.f_gap,
                        })
                    })
                    .collect::<Result<_>>()?
            }
            StochasticBound::NoiseConvex | StochasticBound::NoiseStronglyConvex => traces
                .iter()
                .map(|trace| {
                    let (x, _) = state_at(trace, g)?;
                    Ok(obj.f_gap(&x))
                })
                .collect::<Result<_>>()?,
        };
        let (mean, sem) = mean_and_sem(&samples);
        lhs.push(mean - 3.0 * sem);
        rhs.push(match bound {
            StochasticBound::StoppedConvex => 2.0 * l * z2,
            StochasticBound::StoppedStronglyConvex => phi0,
            StochasticBound::NoiseConvex => {
                let rate = 2.0 * l * z2;
                let rate_term = if rate == 0.0 { 0.0 } else { rate / (g * g) };
                rate_term + sigma2 * g / (3.0 * l)
            }
            StochasticBound::NoiseStronglyConvex => phi0 * (-q * g).exp() + sigma2 / (mu * l).sqrt(),
        });
    }
    Ok(BoundReport::from_sides(bound.name(), lhs, rhs, 1e-12))
}

/// Moments and distributional distance of a sample of k-th jump times.
#[derive(Debug, Clone, Serialize)]
pub struct ErlangReport {
    pub k: usize,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// KS distance to the sum of k unit-rate exponentials.
    pub ks_distance: f64,
}

/// Summarize a sample of k-th jump times: mean and variance (both k for a
/// unit-rate clock) and the KS distance to the exact jump-time law.
pub fn erlang_report(samples: &[f64], k: usize) -> Result<ErlangReport> {
    if samples.len() < 1000 {
        return Err(Error::invalid("samples", "need at least 1000"));
    }
    if k == 0 {
        return Err(Error::invalid("k", "must be >= 1"));
    }
    let (mean, sem) = mean_and_sem(samples);
    let n = samples.len();
    let variance = sem * sem * n as f64;
    let erlang = Gamma::new(k as f64, 1.0).expect("valid shape and rate");
    let mut sorted = samples.to_vec();
    let ks_distance = ks_statistic(&mut sorted, |x| erlang.cdf(x));
    Ok(ErlangReport {
        k,
        n,
        mean,
        variance,
        ks_distance,
    })
}

/// Least-squares slope of ln(f_gap) against k over records with k in
/// [k_lo, k_hi]. Non-positive gaps carry no information on a log scale and
/// are skipped.
pub fn fitted_log_slope(records: &[RunRecord], k_lo: usize, k_hi: usize) -> Result<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.k >= k_lo && r.k <= k_hi && r.f_gap > 0.0)
        .map(|r| (r.k as f64, r.f_gap.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::invalid("records", "need at least 2 positive gaps in the window"));
    }
    let n = pts.len() as f64;
    let mean_k = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov = pts.iter().map(|p| (p.0 - mean_k) * (p.1 - mean_y)).sum::<f64>();
    let var = pts.iter().map(|p| (p.0 - mean_k) * (p.0 - mean_k)).sum::<f64>();
    if var == 0.0 {
        return Err(Error::invalid("records", "need at least 2 distinct k values"));
    }
    Ok(cov / var)
}
