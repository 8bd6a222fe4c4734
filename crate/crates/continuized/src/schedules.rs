//! Parameter schedules for every method family: the classical Nesterov
//! sequences, the continuized schedules in continuous time, the per-step
//! parameters of the randomized discretization, and the Lyapunov weights
//! used by the diagnostics.

use crate::{Error, Result};

/// Curvature regime a schedule is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Convex,
    StronglyConvex,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Convex => write!(f, "convex"),
            Regime::StronglyConvex => write!(f, "strongly_convex"),
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex" => Ok(Regime::Convex),
            "strongly_convex" | "strongly-convex" => Ok(Regime::StronglyConvex),
            other => Err(Error::invalid(
                "regime",
                format!("unknown regime {other:?}; expected convex or strongly_convex"),
            )),
        }
    }
}

pub(crate) fn check_curvatures(regime: Regime, mu: f64, l: f64) -> Result<()> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::invalid("L", "must be finite and > 0"));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::invalid("mu", "must be finite and >= 0"));
    }
    if regime == Regime::StronglyConvex && mu <= 0.0 {
        return Err(Error::invalid("mu", "strongly convex regime requires mu > 0"));
    }
    if mu > l {
        return Err(Error::invalid("mu", "must not exceed L"));
    }
    Ok(())
}

/// Weight sequence A_k of the convex-regime Nesterov method:
/// A_0 = 0, A_{k+1} = A_k + ½(1 + √(4A_k + 1)).
pub fn nesterov_a(k: usize) -> f64 {
    let mut a = 0.0_f64;
    for _ in 0..k {
        a += 0.5 * (1.0 + (4.0 * a + 1.0).sqrt());
    }
    a
}

/// Per-iteration parameters of the classical (deterministic) method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NesterovParams {
    pub tau: f64,
    pub tau_prime: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    /// Weight A_k driving the convex-regime sequence; absent for the
    /// constant strongly convex parameters.
    pub a_k: Option<f64>,
}

/// Parameters of the classical method at iteration `k`.
pub fn nesterov_params(regime: Regime, mu: f64, l: f64, k: usize) -> Result<NesterovParams> {
    check_curvatures(regime, mu, l)?;
    match regime {
        Regime::Convex => {
            let a_k = nesterov_a(k);
            let a_next = a_k + 0.5 * (1.0 + (4.0 * a_k + 1.0).sqrt());
            Ok(NesterovParams {
                tau: 1.0 - a_k / a_next,
                tau_prime: 0.0,
                gamma: 1.0 / l,
                gamma_prime: (a_next - a_k) / l,
                a_k: Some(a_k),
            })
        }
        Regime::StronglyConvex => {
            let q = (mu / l).sqrt();
            Ok(NesterovParams {
                tau: q / (1.0 + q),
                tau_prime: q,
                gamma: 1.0 / l,
                gamma_prime: 1.0 / (mu * l).sqrt(),
                a_k: None,
            })
        }
    }
}

/// Continuous-time schedule: rates of the mixing flow, gradient step sizes
/// at jump times, and the Lyapunov weights, all as functions of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousSchedule {
    pub regime: Regime,
    pub mu: f64,
    pub l: f64,
}

/// The continuized schedule for a regime. The convex schedule has no
/// strong-convexity parameter and records mu = 0.
pub fn continuized_schedule(regime: Regime, mu: f64, l: f64) -> Result<ContinuousSchedule> {
    check_curvatures(regime, mu, l)?;
    let mu = match regime {
        Regime::Convex => 0.0,
        Regime::StronglyConvex => mu,
    };
    Ok(ContinuousSchedule { regime, mu, l })
}

impl ContinuousSchedule {
    /// Mixing rate η_t pulling x toward z.
    pub fn eta(&self, t: f64) -> f64 {
        match self.regime {
            Regime::Convex => 2.0 / t,
            Regime::StronglyConvex => (self.mu / self.l).sqrt(),
        }
    }

    /// Mixing rate η′_t pulling z toward x.
    pub fn eta_prime(&self, _t: f64) -> f64 {
        match self.regime {
            Regime::Convex => 0.0,
            Regime::StronglyConvex => (self.mu / self.l).sqrt(),
        }
    }

    /// Gradient step size γ_t applied to x at a jump.
    pub fn gamma(&self, _t: f64) -> f64 {
        1.0 / self.l
    }

    /// Gradient step size γ′_t applied to z at a jump.
    pub fn gamma_prime(&self, t: f64) -> f64 {
        match self.regime {
            Regime::Convex => t / (2.0 * self.l),
            Regime::StronglyConvex => 1.0 / (self.mu * self.l).sqrt(),
        }
    }

    /// Lyapunov weight A_t on the function gap.
    pub fn a(&self, t: f64) -> f64 {
        match self.regime {
            Regime::Convex => t * t / (2.0 * self.l),
            Regime::StronglyConvex => ((self.mu / self.l).sqrt() * t).exp(),
        }
    }

    /// Lyapunov weight B_t on the squared distance of z to the minimizer.
    pub fn b(&self, t: f64) -> f64 {
        match self.regime {
            Regime::Convex => 1.0,
            Regime::StronglyConvex => 0.5 * self.mu * self.a(t),
        }
    }
}

/// Lyapunov weights (A_t, B_t) of the potential
/// A_t·(f(x) − f*) + B_t·‖z − x*‖².
pub fn lyapunov_weights(sched: &ContinuousSchedule, t: f64) -> (f64, f64) {
    (sched.a(t), sched.b(t))
}

/// Per-step parameters of the randomized discretization, derived from the
/// jump times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteStepParams {
    pub tau: f64,
    pub tau_prime: f64,
    pub gamma_step: f64,
    pub gamma_prime_step: f64,
}

/// Parameters for the jump at time `t_next` given the previous jump at
/// `t_k`. The convex regime depends on the absolute times; the strongly
/// convex regime only on their difference.
pub fn discrete_params(
    regime: Regime,
    mu: f64,
    l: f64,
    t_k: f64,
    t_next: f64,
) -> Result<DiscreteStepParams> {
    check_curvatures(regime, mu, l)?;
    if !(t_k >= 0.0) || !t_k.is_finite() {
        return Err(Error::invalid("t_k", "must be finite and >= 0"));
    }
    if !(t_next > t_k) || !t_next.is_finite() {
        return Err(Error::invalid("t_next", "must be finite and > t_k"));
    }
    match regime {
        Regime::Convex => {
            let ratio = t_k / t_next;
            Ok(DiscreteStepParams {
                tau: 1.0 - ratio * ratio,
                tau_prime: 0.0,
                gamma_step: 1.0 / l,
                gamma_prime_step: t_k / (2.0 * l),
            })
        }
        Regime::StronglyConvex => {
            let q = (mu / l).sqrt();
            let dt = t_next - t_k;
            Ok(DiscreteStepParams {
                // ½(1 − e^{−2q·dt}), written via expm1 to stay accurate
                // for tiny dt
                tau: -0.5 * (-2.0 * q * dt).exp_m1(),
                tau_prime: (q * dt).tanh(),
                gamma_step: 1.0 / l,
                gamma_prime_step: 1.0 / (mu * l).sqrt(),
            })
        }
    }
}
