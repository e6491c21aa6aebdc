//! Positive-weight discretization of the symmetrized 1D principal value
//!
//! ```text
//! I_θ u(x) = ∫_0^∞ [u(x+τθ) + u(x−τθ) − 2u(x)] τ^{−1−2s} dτ
//! ```
//!
//! on a ray with spacing `h_r`. The near cell `(0, h_r)` uses the quadratic
//! model `δ(τ) ≈ δ(h_r)(τ/h_r)²`, the cells `[k h_r, (k+1) h_r]` use hat
//! functions integrated exactly against the kernel, and everything beyond
//! `T = K h_r` goes to [`tail_integral`].

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::integrate::gauss_legendre_unit_32;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(s: f64) -> Result<Self> {
        if s > 0.0 && s < 1.0 {
            Ok(FracOrder(s))
        } else {
            Err(Error::InvalidOrder(s))
        }
    }

    pub fn s(self) -> f64 {
        self.0
    }

    pub fn two_s(self) -> f64 {
        2.0 * self.0
    }

    /// `1 + 2s`
    pub fn kernel_exponent(self) -> f64 {
        1.0 + 2.0 * self.0
    }

    /// `∫_{|τ|>T} |τ|^{−1−2s} dτ = 2 T^{−2s}/(2s)`
    pub fn tail_mass(self, truncation: f64) -> f64 {
        2.0 * truncation.powf(-self.two_s()) / self.two_s()
    }
}

/// `∫_a^b τ^{−1−p} dτ`
fn kernel_moment0(p: f64, a: f64, b: f64) -> f64 {
    (a.powf(-p) - b.powf(-p)) / p
}

/// `∫_a^b τ^{−p} dτ`, with the logarithmic branch at `p = 1`.
fn kernel_moment1(p: f64, a: f64, b: f64) -> f64 {
    let q = 1.0 - p;
    let l = (b / a).ln();
    if q == 0.0 {
        l
    } else {
        a.powf(q) * (q * l).exp_m1() / q
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayQuadrature {
    order: FracOrder,
    spacing: f64,
    weights: Vec<f64>,
}

/// Weights `w_1..w_K` for samples at `τ_k = k·h_r`.
pub fn make_weights(order: FracOrder, spacing: f64, count: usize) -> Result<RayQuadrature> {
    if count < 2 {
        return Err(Error::param("K", format!("need at least 2 samples, got {count}")));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::param("h_r", format!("spacing must be positive, got {spacing}")));
    }
    let p = order.two_s();
    let h = spacing;
    let mut weights = vec![0.0; count];
    weights[0] = h.powf(-p) / (2.0 - p);
    for k in 1..count {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        let m0 = kernel_moment0(p, a, b);
        let m1 = kernel_moment1(p, a, b);
        // hat centred at a: (b − τ)/h ; hat centred at b: (τ − a)/h
        weights[k - 1] += (b * m0 - m1) / h;
        weights[k] += (m1 - a * m0) / h;
    }
    Ok(RayQuadrature {
        order,
        spacing,
        weights,
    })
}

impl RayQuadrature {
    pub fn order(&self) -> FracOrder {
        self.order
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn count(&self) -> usize {
        self.weights.len()
    }

    /// `T = K·h_r`
    pub fn truncation(&self) -> f64 {
        self.count() as f64 * self.spacing
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Closed-form total mass: near-field term plus `∫_{h_r}^T τ^{−1−2s}`.
    pub fn analytic_mass(&self) -> f64 {
        let p = self.order.two_s();
        self.spacing.powf(-p) / (2.0 - p) + kernel_moment0(p, self.spacing, self.truncation())
    }

    pub fn tail_mass(&self) -> f64 {
        self.order.tail_mass(self.truncation())
    }

    /// Coefficient of the center value: `2 Σ w_k + tail mass`.
    pub fn center_coefficient(&self) -> f64 {
        2.0 * self.weight_sum() + self.tail_mass()
    }

    /// `Σ w_k [u(x + k h θ) + u(x − k h θ) − 2u(x)]`, tail excluded.
    pub fn apply_ray(&self, center: f64, plus: &[f64], minus: &[f64]) -> Result<f64> {
        if plus.len() != self.count() || minus.len() != self.count() {
            return Err(Error::LengthMismatch {
                expected: self.count(),
                plus: plus.len(),
                minus: minus.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(plus.iter().zip(minus))
            .map(|(w, (p, m))| w * (p + m - 2.0 * center))
            .sum())
    }
}

/// `∫_{|τ|>T} g(x + τθ) |τ|^{−1−2s} dτ`, both half-lines.
///
/// With `τ = T r^{−1/(2s)}` the kernel measure becomes `T^{−2s}/(2s) dr`
/// on `r ∈ (0, 1]`, integrated by a fixed 32-point Gauss–Legendre rule.
pub fn tail_exterior_part<G: Fn(Vec2) -> f64 + ?Sized>(
    order: FracOrder,
    g: &G,
    x: Vec2,
    theta: Vec2,
    truncation: f64,
) -> f64 {
    let p = order.two_s();
    let (nodes, weights) = gauss_legendre_unit_32();
    let mut acc = 0.0;
    for (r, w) in nodes.iter().zip(weights) {
        let tau = truncation * r.powf(-1.0 / p);
        acc += w * (g(x + theta * tau) + g(x - theta * tau));
    }
    acc * truncation.powf(-p) / p
}

/// `∫_{|τ|>T} (g(x + τθ) − u(x)) |τ|^{−1−2s} dτ`.
pub fn tail_integral<G: Fn(Vec2) -> f64 + ?Sized>(
    order: FracOrder,
    g: &G,
    x: Vec2,
    theta: Vec2,
    truncation: f64,
    center: f64,
) -> Result<f64> {
    if !(truncation > 0.0) {
        return Err(Error::NonpositiveTruncation(truncation));
    }
    Ok(tail_exterior_part(order, g, x, theta, truncation) - center * order.tail_mass(truncation))
}
