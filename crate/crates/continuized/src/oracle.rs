//! Objective functions with exact and noisy first-order access.
//!
//! Every objective carries its smoothness constant L, strong-convexity
//! constant mu (0 for merely convex), and its exact minimizer, so the
//! diagnostics never have to estimate f(x*). The two standard test problems
//! are provided along with arbitrary diagonal quadratics loadable from JSON.

use crate::vecops::{all_finite, dist_sq};
use crate::{Error, RandomStream, Result};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::path::Path;

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A black-box value/gradient oracle with declared curvature bounds and a
/// known minimizer.
pub struct Objective {
    pub dim: usize,
    /// Smoothness constant (largest curvature).
    pub l: f64,
    /// Strong-convexity constant; 0 means merely convex.
    pub mu: f64,
    pub x_star: Vec<f64>,
    pub f_star: f64,
    value_fn: ValueFn,
    grad_fn: GradFn,
}

impl std::fmt::Debug for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Objective")
            .field("dim", &self.dim)
            .field("l", &self.l)
            .field("mu", &self.mu)
            .finish()
    }
}

/// Additive isotropic Gaussian noise on gradient evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Per-coordinate variance of the noise vector.
    pub sigma_g2: f64,
    /// Declared bound on E‖ξ‖²; equals dim·sigma_g2 for isotropic noise.
    pub sigma2_bound: f64,
}

impl NoiseModel {
    /// Isotropic noise with per-coordinate variance `sigma_g2` in `dim`
    /// dimensions, so E‖ξ‖² = dim·sigma_g2 exactly.
    pub fn isotropic(sigma_g2: f64, dim: usize) -> Result<Self> {
        if !(sigma_g2 >= 0.0) || !sigma_g2.is_finite() {
            return Err(Error::invalid("sigma_g2", "must be finite and >= 0"));
        }
        Ok(NoiseModel {
            sigma_g2,
            sigma2_bound: dim as f64 * sigma_g2,
        })
    }
}

/// Serialized form of a diagonal quadratic: f = ½ Σ c_i (x_i − b_i)².
#[derive(Debug, Serialize, Deserialize)]
struct QuadraticSpec {
    coeffs: Vec<f64>,
    center: Vec<f64>,
}

impl Objective {
    /// Diagonal quadratic f(x) = ½ Σ c_i (x_i − b_i)² with L = max c_i and
    /// mu = min c_i; the minimizer is the center, with minimum value 0.
    pub fn quadratic(coeffs: Vec<f64>, center: Vec<f64>) -> Result<Objective> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coeffs", "must be non-empty"));
        }
        if coeffs.len() != center.len() {
            return Err(Error::invalid(
                "center",
                format!("length {} != coeffs length {}", center.len(), coeffs.len()),
            ));
        }
        if !all_finite(&coeffs) || !all_finite(&center) {
            return Err(Error::invalid("coeffs", "entries must be finite"));
        }
        if coeffs.iter().any(|&c| c < 0.0) {
            return Err(Error::invalid("coeffs", "curvatures must be >= 0"));
        }
        let l = coeffs.iter().cloned().fold(f64::MIN, f64::max);
        if l <= 0.0 {
            return Err(Error::invalid("coeffs", "largest curvature must be > 0"));
        }
        let mu = coeffs.iter().cloned().fold(f64::MAX, f64::min);
        let (c_v, b_v) = (coeffs.clone(), center.clone());
        let value_fn: ValueFn = Box::new(move |x: &[f64]| {
            x.iter()
                .zip(&c_v)
                .zip(&b_v)
                .map(|((xi, ci), bi)| 0.5 * ci * (xi - bi) * (xi - bi))
                .sum()
        });
        let (c_g, b_g) = (coeffs, center.clone());
        let grad_fn: GradFn = Box::new(move |x: &[f64]| {
            x.iter()
                .zip(&c_g)
                .zip(&b_g)
                .map(|((xi, ci), bi)| ci * (xi - bi))
                .collect()
        });
        Ok(Objective {
            dim: center.len(),
            l,
            mu,
            x_star: center,
            f_star: 0.0,
            value_fn,
            grad_fn,
        })
    }

    /// The three-dimensional test problem
    /// f(x) = μ/2 (x₁−1)² + 3μ/2 (x₂−1)² + L/2 (x₃−1)².
    ///
    /// Requires 0 < mu ≤ L/3 so the declared (mu, L) are the extreme
    /// curvatures.
    pub fn quad3(mu: f64, l: f64) -> Result<Objective> {
        if !(mu > 0.0) {
            return Err(Error::invalid("mu", "must be > 0"));
        }
        if !(l > 0.0) {
            return Err(Error::invalid("L", "must be > 0"));
        }
        if 3.0 * mu > l {
            return Err(Error::invalid("mu", "requires 3*mu <= L"));
        }
        Objective::quadratic(vec![mu, 3.0 * mu, l], vec![1.0, 1.0, 1.0])
    }

    /// The hundred-dimensional test problem
    /// f(x) = ½ Σ_{i=1..100} (1/i²)(x_i − 1/i)²,
    /// with L = 1 and negligible strong convexity declared as mu = 0.
    pub fn quad100() -> Objective {
        let coeffs: Vec<f64> = (1..=100).map(|i| 1.0 / (i as f64 * i as f64)).collect();
        let center: Vec<f64> = (1..=100).map(|i| 1.0 / i as f64).collect();
        let mut obj = Objective::quadratic(coeffs, center).expect("static data is valid");
        obj.mu = 0.0;
        obj
    }

    /// Load a diagonal quadratic from a JSON document
    /// `{"coeffs": [c_i], "center": [b_i]}`.
    pub fn from_json_str(s: &str, origin: &Path) -> Result<Objective> {
        let spec: QuadraticSpec = serde_json::from_str(s).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            reason: e.to_string(),
        })?;
        Objective::quadratic(spec.coeffs, spec.center)
    }

    /// Load a diagonal quadratic from a JSON file.
    pub fn from_json_file(path: &Path) -> Result<Objective> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Objective::from_json_str(&s, path)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::invalid(
                "x",
                format!("dimension {} != objective dimension {}", x.len(), self.dim),
            ));
        }
        if !all_finite(x) {
            return Err(Error::NonFinite { context: "input point" });
        }
        Ok(())
    }

    /// f(x). The point must already be validated or trusted.
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value_fn)(x)
    }

    /// f(x) − f(x*), the suboptimality tracked in every trace.
    pub fn f_gap(&self, x: &[f64]) -> f64 {
        self.value(x) - self.f_star
    }

    /// Exact gradient ∇f(x); rejects wrong dimension and non-finite input.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok((self.grad_fn)(x))
    }

    /// One noisy gradient draw ∇f(x) + ξ with ξ centered isotropic Gaussian,
    /// per-coordinate variance `noise.sigma_g2`.
    pub fn noisy_grad(
        &self,
        noise: &NoiseModel,
        x: &[f64],
        rng: &mut RandomStream,
    ) -> Result<Vec<f64>> {
        let mut g = self.grad(x)?;
        if noise.sigma_g2 > 0.0 {
            let sd = noise.sigma_g2.sqrt();
            for gi in &mut g {
                let xi: f64 = StandardNormal.sample(rng);
                *gi += sd * xi;
            }
        }
        Ok(g)
    }

    /// ‖x − x*‖², used by every bound formula.
    pub fn dist_to_opt_sq(&self, x: &[f64]) -> f64 {
        dist_sq(x, &self.x_star)
    }
}
