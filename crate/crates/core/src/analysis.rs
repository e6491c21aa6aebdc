//! Quantitative checks: barrier integrals, Hölder quotients, boundary
//! barrier constants, exponential decay fits and the eigenfunction sandwich.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{barrier_geom, Vec2, NOT_INTERIOR};
use crate::integrate::{integrate, integrate_pieces, integrate_to_infinity};
use crate::parabolic::ParabolicTrace;
use crate::quadrature::FracOrder;
use crate::spectral::EigenPair;

const QUAD_ABS: f64 = 1e-12;
const QUAD_REL: f64 = 1e-8;

fn check_gamma(order: FracOrder, gamma: f64) -> Result<()> {
    let upper = order.two_s() - 1.0;
    if !(gamma > 0.0 && gamma < upper) {
        return Err(Error::InvalidGamma { gamma, upper });
    }
    Ok(())
}

/// `(1 − q)^γ − 1` without cancellation for small `q`.
fn pow_minus_one(q: f64, gamma: f64) -> f64 {
    (gamma * (-q).ln_1p()).exp_m1()
}

/// `(1 + y)^γ + (1 − y)^γ − 2` for `|y| ≤ 1`; the binomial series keeps the
/// `O(y²)` result accurate where the direct sum cancels.
fn second_difference(y: f64, gamma: f64) -> f64 {
    let y = y.abs();
    if y >= 0.5 {
        return (1.0 + y).powf(gamma) + (1.0 - y).powf(gamma) - 2.0;
    }
    let y2 = y * y;
    let mut coef = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let n = 2.0 * k as f64;
        coef *= (gamma - n + 2.0) * (gamma - n + 1.0) / ((n - 1.0) * n);
        power *= y2;
        let term = coef * power;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    2.0 * sum
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierSample {
    pub x: Vec2,
    pub theta: Vec2,
    /// `d(x) = 1 − |x|²` for `w_γ`, `|x|` for `v_γ`.
    pub d: f64,
    pub value: f64,
    /// `value · d^{2s−γ}`; bounded above by a negative constant.
    pub scaled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierReport {
    pub gamma: f64,
    pub s: f64,
    pub samples: Vec<BarrierSample>,
    /// Largest `scaled` value over the samples.
    pub max_scaled: f64,
    /// Largest `c` with `value ≤ −c d^{γ−2s}` at every sample.
    pub constant: f64,
    pub all_negative: bool,
    /// The `v_γ` universal integral, when applicable.
    pub universal_integral: Option<f64>,
}

impl BarrierReport {
    fn from_samples(order: FracOrder, gamma: f64, samples: Vec<BarrierSample>, universal: Option<f64>) -> Self {
        let max_scaled = samples.iter().map(|s| s.scaled).fold(f64::NEG_INFINITY, f64::max);
        let all_negative = samples.iter().all(|s| s.value < 0.0);
        BarrierReport {
            gamma,
            s: order.s(),
            samples,
            max_scaled,
            constant: -max_scaled,
            all_negative,
            universal_integral: universal,
        }
    }
}

/// `I_θ(w_γ)(x)` for `w_γ = (1 − |y|²)₊^γ` by adaptive quadrature along
/// the ray, split at the exits `|t₀|`, `t₁` of the unit ball, with the
/// constant tail beyond both integrated in closed form.
pub fn barrier_w_value(order: FracOrder, gamma: f64, x: Vec2, theta: Vec2) -> Result<f64> {
    let geom = barrier_geom(x, theta)?;
    let d = geom.d;
    let b = x.dot(theta);
    let p = order.two_s();
    let dg = d.powf(gamma);
    // w(x ± τθ) − w(x) = d^γ ((1 − q±)^γ − 1), q± = (±2bτ + τ²)/d, and
    // equals −d^γ once q± ≥ 1.
    let side = |q: f64| if q >= 1.0 { -1.0 } else { pow_minus_one(q, gamma) };
    let integrand = |tau: f64| {
        let a = tau * tau / d;
        let c = 2.0 * b * tau / d;
        let bracket = if a + c.abs() < 1.0 {
            // (1 − a ∓ c)^γ = (1 − a)^γ (1 ∓ y)^γ with y = c/(1 − a)
            (1.0 - a).powf(gamma) * second_difference(c / (1.0 - a), gamma) + 2.0 * pow_minus_one(a, gamma)
        } else {
            side(a + c) + side(a - c)
        };
        dg * bracket * tau.powf(-1.0 - p)
    };
    let (lo, hi) = {
        let a = geom.t0.abs();
        let c = geom.t1;
        (a.min(c), a.max(c))
    };
    let near = integrate_pieces(&integrand, &[0.0, lo, hi], QUAD_ABS * dg, QUAD_REL)?;
    let tail = -2.0 * dg * hi.powf(-p) / p;
    Ok(near.value + tail)
}

/// Random `(x, θ)` with `x` uniform in the unit ball.
pub fn check_barrier_w(order: FracOrder, gamma: f64, samples: usize, seed: u64) -> Result<BarrierReport> {
    check_gamma(order, gamma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exponent = order.two_s() - gamma;
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let r = rng.gen::<f64>().sqrt();
        let a = rng.gen::<f64>() * std::f64::consts::TAU;
        let x = Vec2::from_angle(a) * r;
        let theta = Vec2::from_angle(rng.gen::<f64>() * std::f64::consts::TAU);
        if x.norm_sq() >= 1.0 - 1e-9 {
            continue;
        }
        out.push(barrier_w_sample(order, gamma, x, theta, exponent)?);
    }
    Ok(BarrierReport::from_samples(order, gamma, out, None))
}

fn barrier_w_sample(order: FracOrder, gamma: f64, x: Vec2, theta: Vec2, exponent: f64) -> Result<BarrierSample> {
    let value = barrier_w_value(order, gamma, x, theta)?;
    let d = 1.0 - x.norm_sq();
    Ok(BarrierSample {
        x,
        theta,
        d,
        value,
        scaled: value * d.powf(exponent),
    })
}

/// `I_θ(w_γ)` on explicit sample points, e.g. `x = 0` for every `θ`.
pub fn check_barrier_w_at(order: FracOrder, gamma: f64, points: &[(Vec2, Vec2)]) -> Result<BarrierReport> {
    check_gamma(order, gamma)?;
    let exponent = order.two_s() - gamma;
    let out = points
        .iter()
        .map(|&(x, t)| barrier_w_sample(order, gamma, x, t, exponent))
        .collect::<Result<Vec<_>>>()?;
    Ok(BarrierReport::from_samples(order, gamma, out, None))
}

/// `∫_ℝ (|1 + t|^γ − 1)/|t|^{1+2s} dt`, folded onto `(0, ∞)` and split at
/// the kink `t = 1`. No restriction on `γ ≥ 0`.
pub fn barrier_v_integral(order: FracOrder, gamma: f64) -> Result<f64> {
    let p = order.two_s();
    let f = |t: f64| {
        let bracket = if t <= 1.0 {
            second_difference(t, gamma)
        } else {
            (1.0 + t).powf(gamma) + (t - 1.0).powf(gamma) - 2.0
        };
        bracket * t.powf(-1.0 - p)
    };
    let near = integrate(f, 0.0, 1.0, QUAD_ABS, QUAD_REL)?;
    let mid = integrate(f, 1.0, 2.0, QUAD_ABS, QUAD_REL)?;
    let far = integrate_to_infinity(f, 2.0, QUAD_ABS, QUAD_REL)?;
    Ok(near.value + mid.value + far.value)
}

/// `I_{x̂}(v_γ)(x) = |x|^{γ−2s} J` with the universal integral `J`.
pub fn check_barrier_v(order: FracOrder, gamma: f64, samples: usize, seed: u64) -> Result<BarrierReport> {
    check_gamma(order, gamma)?;
    let j = barrier_v_integral(order, gamma)?;
    let exponent = order.two_s() - gamma;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = (0..samples)
        .map(|_| {
            let r = 0.01 + 3.0 * rng.gen::<f64>();
            let x = Vec2::from_angle(rng.gen::<f64>() * std::f64::consts::TAU) * r;
            let value = r.powf(-exponent) * j;
            BarrierSample {
                x,
                theta: x.normalized(),
                d: r,
                value,
                scaled: value * r.powf(exponent),
            }
        })
        .collect();
    Ok(BarrierReport::from_samples(order, gamma, out, Some(j)))
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderReport {
    pub gamma: f64,
    pub seminorm: f64,
    /// Node indices of the maximizing pair.
    pub pair: Option<(usize, usize)>,
}

/// `max |u(x) − u(y)| / |x − y|^γ` over all pairs of interior nodes.
pub fn holder_seminorm(u: &Field, gamma: f64) -> Result<HolderReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::param("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    let grid = u.grid();
    let h = grid.spacing();
    let pts: Vec<(i64, i64, f64, usize)> = grid
        .interior()
        .iter()
        .map(|&idx| {
            let (i, j) = grid.ij(idx);
            (i as i64, j as i64, u.value_at(idx), idx)
        })
        .collect();
    // |x − y|^γ depends only on the integer offset; tabulate it.
    let span = grid.side() as i64;
    let mut table = vec![0.0; (span * span) as usize];
    for di in 0..span {
        for dj in 0..span {
            let r = h * ((di * di + dj * dj) as f64).sqrt();
            table[(di * span + dj) as usize] = if r > 0.0 { r.powf(-gamma) } else { 0.0 };
        }
    }
    let mut best = 0.0;
    let mut pair = None;
    for a in 0..pts.len() {
        let (ia, ja, va, xa) = pts[a];
        for &(ib, jb, vb, xb) in &pts[a + 1..] {
            let q = (va - vb).abs() * table[((ia - ib).abs() * span + (ja - jb).abs()) as usize];
            if q > best {
                best = q;
                pair = Some((xa, xb));
            }
        }
    }
    Ok(HolderReport {
        gamma,
        seminorm: best,
        pair,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryBarrier {
    pub gamma: f64,
    /// Smallest `C ≥ 0` with `u(x) − g(z_x) ≥ −C dist(x, ∂Ω)^γ` at every
    /// interior node, `z_x` the nearest boundary point.
    pub constant: f64,
    pub node: Option<usize>,
}

pub fn boundary_barrier_constant(u: &Field, gamma: f64) -> BoundaryBarrier {
    let grid = u.grid();
    let domain = grid.domain();
    let mut best = 0.0;
    let mut node = None;
    for &idx in grid.interior() {
        let x = grid.node(idx);
        let z = domain.nearest_boundary_point(x);
        let dist = (x - z).norm();
        if dist <= 0.0 {
            continue;
        }
        let q = (u.exterior().eval(z) - u.value_at(idx)) / dist.powf(gamma);
        if q > best {
            best = q;
            node = Some(idx);
        }
    }
    BoundaryBarrier {
        gamma,
        constant: best,
        node,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub t_start: f64,
    pub t_end: f64,
    pub rate: f64,
    pub log_c: f64,
    pub r_squared: f64,
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;
pub const DEFAULT_WINDOW: f64 = 0.5;

/// Least-squares line through `(t, log y)` over the trailing
/// `window_fraction` of the samples; `y ≈ C e^{−rate t}`.
pub fn fit_decay_series(times: &[f64], values: &[f64], window_fraction: f64) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::param("trace", "times and values differ in length"));
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::param("window_fraction", format!("must lie in (0, 1], got {window_fraction}")));
    }
    let n = times.len();
    let count = ((n as f64) * window_fraction).round() as usize;
    if count < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SAMPLES,
            got: count,
        });
    }
    let start = n - count;
    if let Some(k) = (start..n).find(|&k| !(values[k] > 0.0)) {
        let first = (0..=k).find(|&j| !(values[j] > 0.0)).unwrap_or(k);
        return Err(Error::NonpositiveNorms {
            extinction_time: times[first],
        });
    }
    let ts = &times[start..];
    let ys: Vec<f64> = values[start..].iter().map(|v| v.ln()).collect();
    let m = count as f64;
    let tm = ts.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        sxy += (t - tm) * (y - ym);
        sxx += (t - tm) * (t - tm);
        syy += (y - ym) * (y - ym);
    }
    if sxx == 0.0 {
        return Err(Error::param("trace", "window has no time spread"));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit {
        t_start: ts[0],
        t_end: ts[count - 1],
        rate: -slope,
        log_c: intercept,
        r_squared,
        samples: count,
    })
}

pub fn fit_decay(trace: &ParabolicTrace, window_fraction: f64) -> Result<DecayFit> {
    fit_decay_series(&trace.times, &trace.sup_norm, window_fraction)
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub mu: f64,
    /// Smallest `C₁ ≥ 0` with `C₁ e^{−μt} φ_R ≤ u − z`.
    pub c1: f64,
    /// Smallest `C₂ ≥ 0` with `u − z ≤ C₂ e^{−μt} ψ_R`, `ψ_R = −φ_R`.
    pub c2: f64,
    pub finite: bool,
    /// `(node, t)` attaining `c1` and `c2`.
    pub worst_lower: Option<(usize, f64)>,
    pub worst_upper: Option<(usize, f64)>,
}

/// Sandwich constants from snapshots `(t, u(·, t))` on the grid of `z`, with
/// an eigenpair `(μ_R, φ_R)` on a larger domain whose grid shares nodes
/// with it.
pub fn asymp_sandwich_check(snapshots: &[(f64, Field)], z: &Field, enlarged: &EigenPair) -> Result<SandwichReport> {
    let grid = z.grid();
    let big = enlarged.phi.grid();
    let mut phi_at = Vec::with_capacity(grid.interior_count());
    for &idx in grid.interior() {
        let p = grid.node(idx);
        let value = match big.nearest_node(p) {
            Some(b) if (big.node(b) - p).norm() <= 1e-9 * (1.0 + p.norm()) => enlarged.phi.value_at(b),
            _ => {
                return Err(Error::param("enlarged", "enlarged grid does not contain the solution nodes"));
            }
        };
        phi_at.push(value);
    }
    // Work with a nonpositive φ_R regardless of the pair's convention.
    if enlarged.maximal {
        phi_at.iter_mut().for_each(|v| *v = -*v);
    }
    let mu = enlarged.mu;
    let (mut c1, mut c2) = (0.0f64, 0.0f64);
    let (mut worst_lower, mut worst_upper) = (None, None);
    for (t, u) in snapshots {
        let growth = (mu * t).exp();
        for (pos, &idx) in grid.interior().iter().enumerate() {
            let diff = u.value_at(idx) - z.value_at(idx);
            let phi = phi_at[pos];
            if phi >= 0.0 {
                if diff != 0.0 {
                    return Err(Error::SandwichViolated { node: idx, t: *t });
                }
                continue;
            }
            let lower = diff * growth / phi;
            if lower > c1 {
                c1 = lower;
                worst_lower = Some((idx, *t));
            }
            let upper = diff * growth / -phi;
            if upper > c2 {
                c2 = upper;
                worst_upper = Some((idx, *t));
            }
        }
    }
    let finite = c1.is_finite() && c2.is_finite();
    if !finite {
        let (node, t) = worst_lower.or(worst_upper).unwrap_or((NOT_INTERIOR, 0.0));
        return Err(Error::SandwichViolated { node, t });
    }
    Ok(SandwichReport {
        mu,
        c1,
        c2,
        finite,
        worst_lower,
        worst_upper,
    })
}
