//! Random-time machinery: the Poisson jump clock, closed-form mixing flows
//! between jumps, a fixed-step numerical integrator that cross-checks them,
//! and the second-order ODEs arising in the large-L limit.

use crate::oracle::Objective;
use crate::vecops::{add_scaled, all_finite, lerp};
use crate::{Error, RandomStream, Result};
use rand::{Rng, SeedableRng};

/// Inverse-CDF transform of a uniform draw u ∈ (0, 1).
fn interarrival_from_uniform(u: f64) -> f64 {
    // −ln(1 − u)
    -(-u).ln_1p()
}

/// One unit-rate exponential interarrival. Redraws on the (measure-zero)
/// event u = 0 so the result is strictly positive.
pub fn sample_interarrival(rng: &mut RandomStream) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return interarrival_from_uniform(u);
        }
    }
}

/// Poisson clock: jump times T_1 < T_2 < … with i.i.d. unit-rate
/// exponential interarrivals, so T_k is Erlang(k, 1).
#[derive(Debug, Clone)]
pub struct JumpClock {
    pub(crate) rng: RandomStream,
    /// Time of the most recent jump; 0 before the first.
    pub t_current: f64,
    /// Number of jumps taken so far.
    pub k: usize,
}

impl JumpClock {
    pub fn new(seed: u64) -> JumpClock {
        JumpClock {
            rng: RandomStream::seed_from_u64(seed),
            t_current: 0.0,
            k: 0,
        }
    }

    /// Advance to the next jump and return its time.
    pub fn next_jump(&mut self) -> f64 {
        self.t_current += sample_interarrival(&mut self.rng);
        self.k += 1;
        self.t_current
    }
}

/// The coupled pair transported by the mixing flow between jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct MixState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

/// Flow of the convex-regime mixing equations from `t0` to `t1`:
/// x is pulled toward z by the fraction 1 − (t0/t1)², z is untouched.
/// From t0 = 0 the pull is total and x lands exactly on z.
pub fn mix_convex(s: &MixState, t0: f64, t1: f64) -> Result<MixState> {
    if !(t0 >= 0.0) || !t0.is_finite() {
        return Err(Error::invalid("t0", "must be finite and >= 0"));
    }
    if !(t1 > t0) || !t1.is_finite() {
        return Err(Error::invalid("t1", "must be finite and > t0"));
    }
    let ratio = t0 / t1;
    let c = 1.0 - ratio * ratio;
    let x = if c == 1.0 { s.z.clone() } else { lerp(&s.x, &s.z, c) };
    Ok(MixState { x, z: s.z.clone() })
}

/// Flow of the strongly convex mixing equations over a window of length
/// `dt`: with c = ½(1 − e^{−2√(μ/L)·dt}), x and z each move the fraction c
/// toward the other.
pub fn mix_strongly_convex(s: &MixState, mu: f64, l: f64, dt: f64) -> Result<MixState> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::invalid("mu", "must be finite and > 0"));
    }
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::invalid("L", "must be finite and > 0"));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", "must be finite and > 0"));
    }
    let q = (mu / l).sqrt();
    let c = -0.5 * (-2.0 * q * dt).exp_m1();
    Ok(MixState {
        x: lerp(&s.x, &s.z, c),
        z: lerp(&s.z, &s.x, c),
    })
}

/// One classical 4th-order step of state' = f(t, state).
fn rk4_step(t: f64, state: &[f64], step: f64, f: &impl Fn(f64, &[f64]) -> Vec<f64>) -> Vec<f64> {
    let k1 = f(t, state);
    let k2 = f(t + 0.5 * step, &add_scaled(state, &k1, 0.5 * step));
    let k3 = f(t + 0.5 * step, &add_scaled(state, &k2, 0.5 * step));
    let k4 = f(t + step, &add_scaled(state, &k3, step));
    state
        .iter()
        .enumerate()
        .map(|(i, s)| s + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn step_count(span: f64, h: f64) -> usize {
    (span / h).ceil().max(1.0) as usize
}

/// Integrate the mixing equations dx = η_t(z−x)dt, dz = η′_t(x−z)dt with a
/// fixed-step 4th-order method, as an independent check on the closed
/// forms. The step is shrunk if needed so the grid lands exactly on `t1`.
pub fn mix_numeric(
    s: &MixState,
    eta: impl Fn(f64) -> f64,
    eta_prime: impl Fn(f64) -> f64,
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<MixState> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid("h", "must be finite and > 0"));
    }
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::invalid("t1", "must be finite and > t0"));
    }
    let dim = s.x.len();
    let n = step_count(t1 - t0, h);
    let step = (t1 - t0) / n as f64;
    let field = |t: f64, state: &[f64]| -> Vec<f64> {
        let e = eta(t);
        let ep = eta_prime(t);
        let (x, z) = state.split_at(dim);
        let mut d = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            d.push(e * (z[i] - x[i]));
        }
        for i in 0..dim {
            d.push(ep * (x[i] - z[i]));
        }
        d
    };
    let mut state: Vec<f64> = s.x.iter().chain(&s.z).cloned().collect();
    for i in 0..n {
        state = rk4_step(t0 + i as f64 * step, &state, step, &field);
    }
    if !all_finite(&state) {
        return Err(Error::NonFinite {
            context: "numerically mixed state",
        });
    }
    let z = state.split_off(dim);
    Ok(MixState { x: state, z })
}

/// Time-stamped position samples from an integrated trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub s: Vec<f64>,
    pub x: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Final sampled position.
    pub fn last_x(&self) -> &[f64] {
        self.x.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Plot-ready CSV rows `s,x_1,…,x_d,f_gap`, one per sample.
    pub fn csv_rows(&self, obj: &Objective) -> String {
        let mut out = String::new();
        for (s, x) in self.s.iter().zip(&self.x) {
            out.push_str(&format!("{s}"));
            for xi in x {
                out.push_str(&format!(",{xi}"));
            }
            out.push_str(&format!(",{}\n", obj.f_gap(x)));
        }
        out
    }
}

fn check_start(obj: &Objective, x0: &[f64], span: f64, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid("h", "must be finite and > 0"));
    }
    if x0.len() != obj.dim {
        return Err(Error::invalid(
            "x0",
            format!("dimension {} != objective dimension {}", x0.len(), obj.dim),
        ));
    }
    if !all_finite(x0) {
        return Err(Error::NonFinite {
            context: "initial point",
        });
    }
    if !(span > 0.0) || !span.is_finite() {
        return Err(Error::invalid("s_max", "must leave a positive time span"));
    }
    Ok(())
}

fn integrate_second_order(
    obj: &Objective,
    x0: &[f64],
    s0: f64,
    s_max: f64,
    h: f64,
    damping: impl Fn(f64) -> f64,
) -> Result<Trajectory> {
    check_start(obj, x0, s_max - s0, h)?;
    let dim = obj.dim;
    let field = |s: f64, state: &[f64]| -> Vec<f64> {
        let (x, v) = state.split_at(dim);
        match obj.grad(x) {
            Ok(g) => {
                let a = damping(s);
                let mut d = Vec::with_capacity(2 * dim);
                d.extend_from_slice(v);
                for i in 0..dim {
                    d.push(-a * v[i] - g[i]);
                }
                d
            }
            Err(_) => vec![f64::NAN; 2 * dim],
        }
    };
    let n = step_count(s_max - s0, h);
    let step = (s_max - s0) / n as f64;
    let mut state: Vec<f64> = x0.iter().cloned().chain(std::iter::repeat(0.0).take(dim)).collect();
    let mut traj = Trajectory {
        s: Vec::with_capacity(n + 1),
        x: Vec::with_capacity(n + 1),
    };
    traj.s.push(s0);
    traj.x.push(x0.to_vec());
    for i in 0..n {
        state = rk4_step(s0 + i as f64 * step, &state, step, &field);
        if !all_finite(&state) {
            return Err(Error::NonFinite {
                context: "integrated trajectory",
            });
        }
        traj.s.push(s0 + (i + 1) as f64 * step);
        traj.x.push(state[..dim].to_vec());
    }
    Ok(traj)
}

/// Integrate x″ + (3/s)·x′ + ∇f(x) = 0 on [h, s_max], starting at rest at
/// s₀ = h to step past the coefficient singularity at s = 0.
pub fn integrate_limit_convex(obj: &Objective, x0: &[f64], s_max: f64, h: f64) -> Result<Trajectory> {
    integrate_second_order(obj, x0, h, s_max, h, |s| 3.0 / s)
}

/// Integrate x″ + 2√μ·x′ + ∇f(x) = 0 on [0, s_max], starting at rest.
pub fn integrate_limit_strongly_convex(
    obj: &Objective,
    mu: f64,
    x0: &[f64],
    s_max: f64,
    h: f64,
) -> Result<Trajectory> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::invalid("mu", "must be finite and > 0"));
    }
    let damping = 2.0 * mu.sqrt();
    integrate_second_order(obj, x0, 0.0, s_max, h, move |_| damping)
}
