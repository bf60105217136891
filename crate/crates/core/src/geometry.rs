//! Poincaré-ball primitives.
//!
//! Points are plain `f64` slices. Every operation that returns a ball point
//! projects its result onto the closed ball of radius `(1 - BALL_EPS) / sqrt(c)`,
//! so results always stay strictly inside the open ball of radius `1 / sqrt(c)`.
//!
//! The `*_vjp` functions are vector-Jacobian products used by the trainer to
//! back-propagate through the hyperbolic score. They differentiate the exact
//! formulas and treat the boundary projection as the identity.

use crate::error::{Error, Result};

/// Projection margin: `sqrt(c) * |x| <= 1 - BALL_EPS` for every returned point.
pub const BALL_EPS: f64 = 1e-5;

/// Upper clamp for the argument of `atanh`.
pub const ATANH_MAX: f64 = 1.0 - 1e-15;

/// Below this norm `exp0` / `log0` act as the identity.
pub const MIN_NORM: f64 = 1e-15;

/// Curvature magnitude of the ball (radius `1 / sqrt(c)`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Curvature(f64);

impl Curvature {
    /// The unit ball, `c = 1`.
    pub const UNIT: Curvature = Curvature(1.0);

    pub fn new(c: f64) -> Result<Self> {
        if c.is_finite() && c > 0.0 {
            Ok(Curvature(c))
        } else {
            Err(Error::Invalid(format!("curvature must be positive and finite, got {c}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn sqrt(self) -> f64 {
        self.0.sqrt()
    }

    /// Largest admissible norm after projection.
    pub fn max_norm(self) -> f64 {
        (1.0 - BALL_EPS) / self.sqrt()
    }
}

impl Default for Curvature {
    fn default() -> Self {
        Curvature(1.0)
    }
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

/// Euclidean norm. For ball points this is the hierarchy readout: points
/// closer to the boundary sit deeper in the learned hierarchy.
#[inline]
pub fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension { expected: x.len(), got: y.len() });
    }
    Ok(())
}

/// Scales `x` in place onto the projection radius if it lies outside it.
pub fn project_in_place(x: &mut [f64], c: Curvature) {
    let n = norm(x);
    let max = c.max_norm();
    if n > max {
        let s = max / n;
        x.iter_mut().for_each(|v| *v *= s);
    }
}

pub fn project(x: &[f64], c: Curvature) -> Vec<f64> {
    let mut out = x.to_vec();
    project_in_place(&mut out, c);
    out
}

/// True when `x` satisfies the ball constraint (with a small slack for rounding).
pub fn in_ball(x: &[f64], c: Curvature) -> bool {
    x.iter().all(|v| v.is_finite()) && c.sqrt() * norm(x) <= 1.0 - BALL_EPS + 1e-12
}

pub(crate) fn mobius_add_unchecked(x: &[f64], y: &[f64], c: Curvature) -> Vec<f64> {
    let c = c.value();
    let xy = dot(x, y);
    let x2 = norm_sq(x);
    let y2 = norm_sq(y);
    let a = 1.0 + 2.0 * c * xy + c * y2;
    let b = 1.0 - c * x2;
    let den = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
    x.iter().zip(y).map(|(xi, yi)| (a * xi + b * yi) / den).collect()
}

/// Möbius addition `x ⊕ y`, projected onto the ball margin.
pub fn mobius_add(x: &[f64], y: &[f64], c: Curvature) -> Result<Vec<f64>> {
    check_dims(x, y)?;
    let mut out = mobius_add_unchecked(x, y, c);
    project_in_place(&mut out, c);
    Ok(out)
}

pub fn neg(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| -v).collect()
}

pub(crate) fn distance_unchecked(x: &[f64], y: &[f64], c: Curvature) -> f64 {
    let w = mobius_add_unchecked(&neg(x), y, c);
    let sc = c.sqrt();
    let z = (sc * norm(&w)).min(ATANH_MAX);
    2.0 / sc * z.atanh()
}

/// Geodesic distance on the ball: `(2/sqrt(c)) * atanh(sqrt(c) * |(-x) ⊕ y|)`.
pub fn poincare_distance(x: &[f64], y: &[f64], c: Curvature) -> Result<f64> {
    check_dims(x, y)?;
    Ok(distance_unchecked(x, y, c))
}

/// `tanh(sqrt(c)|v|) / (sqrt(c)|v|)`, the exp-map radial factor.
fn exp_factor(n: f64, sc: f64) -> f64 {
    let a = sc * n;
    a.tanh() / a
}

/// `atanh(sqrt(c)|x|) / (sqrt(c)|x|)`, the log-map radial factor.
fn log_factor(n: f64, sc: f64) -> f64 {
    let a = (sc * n).min(ATANH_MAX);
    a.atanh() / (sc * n)
}

/// Exponential map at the origin.
pub fn exp0(v: &[f64], c: Curvature) -> Vec<f64> {
    let n = norm(v);
    if n < MIN_NORM {
        return v.to_vec();
    }
    let f = exp_factor(n, c.sqrt());
    let mut out: Vec<f64> = v.iter().map(|x| x * f).collect();
    project_in_place(&mut out, c);
    out
}

/// Logarithmic map at the origin; inverse of [`exp0`].
pub fn log0(x: &[f64], c: Curvature) -> Vec<f64> {
    let n = norm(x);
    if n < MIN_NORM {
        return x.to_vec();
    }
    let f = log_factor(n, c.sqrt());
    x.iter().map(|v| v * f).collect()
}

/// Möbius action of a diagonal matrix: `exp0(diag ⊙ log0(x))`.
pub fn mobius_matvec(diag: &[f64], x: &[f64], c: Curvature) -> Result<Vec<f64>> {
    check_dims(diag, x)?;
    Ok(mobius_matvec_unchecked(diag, x, c))
}

pub(crate) fn mobius_matvec_unchecked(diag: &[f64], x: &[f64], c: Curvature) -> Vec<f64> {
    let t: Vec<f64> = log0(x, c).iter().zip(diag).map(|(v, r)| v * r).collect();
    exp0(&t, c)
}

/// Möbius scalar multiplication `t ⊗ x = exp0(t * log0(x))`.
pub fn mobius_scalar_mul(t: f64, x: &[f64], c: Curvature) -> Vec<f64> {
    let v: Vec<f64> = log0(x, c).iter().map(|v| v * t).collect();
    exp0(&v, c)
}

/// Point at fraction `t` along the geodesic from `x` to `y`.
pub fn geodesic_point(x: &[f64], y: &[f64], t: f64, c: Curvature) -> Result<Vec<f64>> {
    check_dims(x, y)?;
    let dir = mobius_add_unchecked(&neg(x), y, c);
    let step = mobius_scalar_mul(t, &project(&dir, c), c);
    mobius_add(x, &step, c)
}

/// Converts a Euclidean gradient at `x` into the Riemannian one by applying
/// the inverse metric: `g * (1 - c|x|^2)^2 / 4`.
pub fn riemannian_rescale(g: &[f64], x: &[f64], c: Curvature) -> Vec<f64> {
    let k = (1.0 - c.value() * norm_sq(x)).powi(2) / 4.0;
    g.iter().map(|v| v * k).collect()
}

// ---------------------------------------------------------------------------
// Vector-Jacobian products.

/// Gradients of `<g, x ⊕ y>` with respect to `x` and `y`.
pub fn mobius_add_vjp(x: &[f64], y: &[f64], c: Curvature, g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let c = c.value();
    let xy = dot(x, y);
    let x2 = norm_sq(x);
    let y2 = norm_sq(y);
    let a = 1.0 + 2.0 * c * xy + c * y2;
    let b = 1.0 - c * x2;
    let den = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
    let gx_dot = dot(g, x);
    let gy_dot = dot(g, y);
    // <g, numerator>
    let g_num = a * gx_dot + b * gy_dot;
    let inv = 1.0 / den;
    let q = g_num * inv * inv;

    let grad_x = (0..x.len())
        .map(|i| {
            let d_a = 2.0 * c * y[i];
            let d_b = -2.0 * c * x[i];
            let d_den = 2.0 * c * y[i] + 2.0 * c * c * y2 * x[i];
            inv * (a * g[i] + gx_dot * d_a + gy_dot * d_b) - q * d_den
        })
        .collect();
    let grad_y = (0..y.len())
        .map(|i| {
            let d_a = 2.0 * c * x[i] + 2.0 * c * y[i];
            let d_den = 2.0 * c * x[i] + 2.0 * c * c * x2 * y[i];
            inv * (b * g[i] + gx_dot * d_a) - q * d_den
        })
        .collect();
    (grad_x, grad_y)
}

/// Squared distance `d(u, v)^2` together with its gradients in `u` and `v`.
pub fn distance_sq_grad(u: &[f64], v: &[f64], c: Curvature) -> (f64, Vec<f64>, Vec<f64>) {
    let nu = neg(u);
    let w = mobius_add_unchecked(&nu, v, c);
    let sc = c.sqrt();
    let n = norm(&w);
    let z = (sc * n).min(ATANH_MAX);
    let d = 2.0 / sc * z.atanh();
    let dim = u.len();
    if n < MIN_NORM {
        return (d * d, vec![0.0; dim], vec![0.0; dim]);
    }
    // d(d^2)/dw = 2 d * 2 / (1 - z^2) * w / |w|
    let k = 2.0 * d * 2.0 / (1.0 - z * z) / n;
    let gw: Vec<f64> = w.iter().map(|wi| k * wi).collect();
    let (gnu, gv) = mobius_add_vjp(&nu, v, c, &gw);
    (d * d, neg(&gnu), gv)
}

/// Gradient of `<g, exp0(v)>` with respect to `v`.
pub fn exp0_vjp(v: &[f64], c: Curvature, g: &[f64]) -> Vec<f64> {
    let sc = c.sqrt();
    let n = norm(v);
    if n < 1e-8 {
        // f(n) ~ 1 - (sc n)^2 / 3, f'(n)/n ~ -2c/3
        let f = 1.0 - c.value() * n * n / 3.0;
        let fp_over_n = -2.0 * c.value() / 3.0;
        let gv = dot(g, v);
        return v.iter().zip(g).map(|(vi, gi)| f * gi + gv * fp_over_n * vi).collect();
    }
    let a = sc * n;
    let f = a.tanh() / a;
    let sech2 = 1.0 - a.tanh().powi(2);
    let fp = (a * sech2 - a.tanh()) / (sc * n * n);
    let gv = dot(g, v);
    v.iter().zip(g).map(|(vi, gi)| f * gi + gv * fp / n * vi).collect()
}

/// Gradient of `<g, log0(x)>` with respect to `x`.
pub fn log0_vjp(x: &[f64], c: Curvature, g: &[f64]) -> Vec<f64> {
    let sc = c.sqrt();
    let n = norm(x);
    if n < 1e-8 {
        let f = 1.0 + c.value() * n * n / 3.0;
        let fp_over_n = 2.0 * c.value() / 3.0;
        let gx = dot(g, x);
        return x.iter().zip(g).map(|(xi, gi)| f * gi + gx * fp_over_n * xi).collect();
    }
    let a = (sc * n).min(ATANH_MAX);
    let f = a.atanh() / a;
    let fp = (a / (1.0 - a * a) - a.atanh()) / (sc * n * n);
    let gx = dot(g, x);
    x.iter().zip(g).map(|(xi, gi)| f * gi + gx * fp / n * xi).collect()
}
