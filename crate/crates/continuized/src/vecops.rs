//! Small dense-vector helpers shared by the step engines and diagnostics.

/// Squared Euclidean distance ‖a − b‖².
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// a + c·(b − a), the convex/affine combination used by every mixing map.
pub(crate) fn lerp(a: &[f64], b: &[f64], c: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + c * (y - x)).collect()
}

/// a + c·b.
pub(crate) fn add_scaled(a: &[f64], b: &[f64], c: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

/// a − c·g, the gradient-step update.
pub(crate) fn step_along(a: &[f64], g: &[f64], c: f64) -> Vec<f64> {
    a.iter().zip(g).map(|(x, gi)| x - c * gi).collect()
}
