//! Iteration engines: plain gradient descent, the classical momentum
//! method, and the random-clock discretization. Every engine spends exactly
//! one gradient evaluation per step, shared between the coupled updates,
//! and supports an optional noisy-gradient mode in which the same noise
//! realization enters both updates.

use crate::jumpflow::JumpClock;
use crate::oracle::{NoiseModel, Objective};
use crate::schedules::{
    check_curvatures, continuized_schedule, discrete_params, lyapunov_weights, nesterov_params,
    ContinuousSchedule, NesterovParams, Regime,
};
use crate::vecops::{all_finite, dist_sq, lerp, step_along};
use crate::{Error, RandomStream, Result};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

/// Which iteration engine drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gd,
    Nesterov,
    Continuized,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Gd => write!(f, "gd"),
            Method::Nesterov => write!(f, "nesterov"),
            Method::Continuized => write!(f, "continuized"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Method::Gd),
            "nesterov" => Ok(Method::Nesterov),
            "continuized" => Ok(Method::Continuized),
            other => Err(Error::invalid(
                "method",
                format!("unknown method {other:?}; expected gd, nesterov or continuized"),
            )),
        }
    }
}

/// Iterate of a running method: the coupled pair (x, z), the transient
/// gradient point y, the step count k, and the continuous time t (equal to
/// k for the deterministic methods).
#[derive(Debug, Clone, PartialEq)]
pub struct MethodState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    pub k: usize,
    pub t: f64,
}

/// One row of a trace: the post-step suboptimality and Lyapunov value at
/// step k. `lyap` is absent for gradient descent, which has no coupled pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub k: usize,
    pub t: f64,
    pub f_gap: f64,
    pub lyap: Option<f64>,
}

/// Post-step (t, x, z) sample kept for between-jump diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

/// Full description of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: Method,
    pub regime: Regime,
    pub mu: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    pub seed: u64,
    pub steps: usize,
    /// Common initial point for x and z. When absent, noiseless runs start
    /// at the origin and noisy runs at the minimizer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
}

impl MethodConfig {
    pub fn validate(&self) -> Result<()> {
        check_curvatures(self.regime, self.mu, self.l)?;
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be >= 1"));
        }
        if let Some(noise) = &self.noise {
            if !(noise.sigma_g2 >= 0.0) || !noise.sigma_g2.is_finite() {
                return Err(Error::invalid("sigma_g2", "must be finite and >= 0"));
            }
        }
        if let Some(start) = &self.start {
            if !all_finite(start) {
                return Err(Error::NonFinite {
                    context: "start point",
                });
            }
        }
        Ok(())
    }
}

/// A completed run: its configuration, one record per step, and the state
/// samples backing the records.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub config: MethodConfig,
    pub records: Vec<RunRecord>,
    pub states: Vec<StateSample>,
}

fn grad_maybe_noisy(
    obj: &Objective,
    noise: Option<(&NoiseModel, &mut RandomStream)>,
    pt: &[f64],
) -> Result<Vec<f64>> {
    match noise {
        Some((nm, rng)) => obj.noisy_grad(nm, pt, rng),
        None => obj.grad(pt),
    }
}

fn gd_advance(
    state: &MethodState,
    obj: &Objective,
    gamma: f64,
    noise: Option<(&NoiseModel, &mut RandomStream)>,
) -> Result<MethodState> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::invalid("gamma", "must be finite and > 0"));
    }
    let g = grad_maybe_noisy(obj, noise, &state.x)?;
    Ok(MethodState {
        y: state.x.clone(),
        x: step_along(&state.x, &g, gamma),
        z: state.z.clone(),
        k: state.k + 1,
        t: (state.k + 1) as f64,
    })
}

fn nesterov_advance(
    state: &MethodState,
    params: &NesterovParams,
    obj: &Objective,
    noise: Option<(&NoiseModel, &mut RandomStream)>,
) -> Result<MethodState> {
    let y = lerp(&state.x, &state.z, params.tau);
    let g = grad_maybe_noisy(obj, noise, &y)?;
    let x = step_along(&y, &g, params.gamma);
    let z = step_along(&lerp(&state.z, &y, params.tau_prime), &g, params.gamma_prime);
    Ok(MethodState {
        x,
        z,
        y,
        k: state.k + 1,
        t: (state.k + 1) as f64,
    })
}

/// One gradient-descent step x ← x − γ·∇f(x).
pub fn gd_step(state: &MethodState, obj: &Objective, gamma: f64) -> Result<MethodState> {
    gd_advance(state, obj, gamma, None)
}

/// One step of the classical momentum method: mix x toward z, take a
/// gradient step from the mixed point, and update z with the same gradient.
pub fn nesterov_step(
    state: &MethodState,
    params: &NesterovParams,
    obj: &Objective,
) -> Result<MethodState> {
    nesterov_advance(state, params, obj, None)
}

/// One step of the random-clock method: draw the next jump time, apply the
/// mixing implied by the elapsed window, then take the coupled gradient
/// jump. With `noise`, one noisy gradient draw (from the clock's stream)
/// enters both updates. The clock must be the one that produced `state.t`.
pub fn continuized_step(
    state: &MethodState,
    obj: &Objective,
    regime: Regime,
    mu: f64,
    l: f64,
    clock: &mut JumpClock,
    noise: Option<&NoiseModel>,
) -> Result<MethodState> {
    let t_next = clock.next_jump();
    let p = discrete_params(regime, mu, l, state.t, t_next)?;
    let y = lerp(&state.x, &state.z, p.tau);
    let g = match noise {
        Some(nm) => obj.noisy_grad(nm, &y, &mut clock.rng)?,
        None => obj.grad(&y)?,
    };
    let x = step_along(&y, &g, p.gamma_step);
    let z = step_along(&lerp(&state.z, &y, p.tau_prime), &g, p.gamma_prime_step);
    Ok(MethodState {
        x,
        z,
        y,
        k: state.k + 1,
        t: t_next,
    })
}

fn snapshot(
    state: &MethodState,
    obj: &Objective,
    sched: &ContinuousSchedule,
    method: Method,
) -> (RunRecord, StateSample) {
    let f_gap = obj.f_gap(&state.x);
    let lyap = match method {
        Method::Gd => None,
        _ => {
            let (a, b) = lyapunov_weights(sched, state.t);
            Some(a * f_gap + b * dist_sq(&state.z, &obj.x_star))
        }
    };
    (
        RunRecord {
            k: state.k,
            t: state.t,
            f_gap,
            lyap,
        },
        StateSample {
            t: state.t,
            x: state.x.clone(),
            z: state.z.clone(),
        },
    )
}

/// Execute a run, keeping the per-step state samples. The result is a pure
/// function of (config, objective); replicates differ only through seeds.
pub fn run_with_states(config: &MethodConfig, obj: &Objective) -> Result<RunTrace> {
    config.validate()?;
    if let Some(start) = &config.start {
        if start.len() != obj.dim {
            return Err(Error::invalid(
                "start",
                format!("dimension {} != objective dimension {}", start.len(), obj.dim),
            ));
        }
    }
    let sched = continuized_schedule(config.regime, config.mu, config.l)?;
    let start = config.start.clone().unwrap_or_else(|| {
        if config.noise.is_some() {
            obj.x_star.clone()
        } else {
            vec![0.0; obj.dim]
        }
    });
    let mut state = MethodState {
        x: start.clone(),
        z: start.clone(),
        y: start,
        k: 0,
        t: 0.0,
    };
    let mut records = Vec::with_capacity(config.steps + 1);
    let mut states = Vec::with_capacity(config.steps + 1);
    let (rec, sample) = snapshot(&state, obj, &sched, config.method);
    records.push(rec);
    states.push(sample);
    let step_err = |k: usize| move |e: Error| Error::Step { k, source: Box::new(e) };
    match config.method {
        Method::Gd => {
            let gamma = 1.0 / config.l;
            let mut rng = RandomStream::seed_from_u64(config.seed);
            for k in 0..config.steps {
                let noise = config.noise.as_ref().map(|nm| (nm, &mut rng));
                state = gd_advance(&state, obj, gamma, noise).map_err(step_err(k))?;
                let (rec, sample) = snapshot(&state, obj, &sched, config.method);
                records.push(rec);
                states.push(sample);
            }
        }
        Method::Nesterov => {
            let mut rng = RandomStream::seed_from_u64(config.seed);
            for k in 0..config.steps {
                let params = nesterov_params(config.regime, config.mu, config.l, k)?;
                let noise = config.noise.as_ref().map(|nm| (nm, &mut rng));
                state = nesterov_advance(&state, &params, obj, noise).map_err(step_err(k))?;
                let (rec, sample) = snapshot(&state, obj, &sched, config.method);
                records.push(rec);
                states.push(sample);
            }
        }
        Method::Continuized => {
            let mut clock = JumpClock::new(config.seed);
            for k in 0..config.steps {
                state = continuized_step(
                    &state,
                    obj,
                    config.regime,
                    config.mu,
                    config.l,
                    &mut clock,
                    config.noise.as_ref(),
                )
                .map_err(step_err(k))?;
                let (rec, sample) = snapshot(&state, obj, &sched, config.method);
                records.push(rec);
                states.push(sample);
            }
        }
    }
    Ok(RunTrace {
        config: config.clone(),
        records,
        states,
    })
}

/// Execute a run and return one record per step, k = 0 through `steps`.
pub fn run(config: &MethodConfig, obj: &Objective) -> Result<Vec<RunRecord>> {
    Ok(run_with_states(config, obj)?.records)
}
