//! End-to-end runs tying the solvers together: decay-rate identification,
//! finite-time ordering for affine data, and the lower bound from the 1D
//! segment eigenfunction.

use std::sync::Arc;

use crate::analysis::{fit_decay, fit_decay_series, DecayFit, DEFAULT_WINDOW};
use crate::elliptic::{s_convex_envelope, SolverOptions};
use crate::error::{Error, Result};
use crate::field::{ExteriorData, Field};
use crate::geometry::{DomainKind, Grid2, Vec2};
use crate::operator::{DirectionSet, RayScheme};
use crate::parabolic::{evolve, EvolveOptions, ParabolicProblem, ParabolicTrace, TraceNorm};
use crate::quadrature::FracOrder;
use crate::spectral::{segment_eigenpair_1d, SegmentEigenPair};

/// `height (1 − |x − c|²/ρ²)₊²`.
pub fn bump(center: Vec2, radius: f64, height: f64) -> impl Fn(Vec2) -> f64 + Clone + Send + Sync + 'static {
    move |p| height * (1.0 - (p - center).norm_sq() / (radius * radius)).max(0.0).powi(2)
}

fn bump_radius(grid: &Grid2) -> (Vec2, f64) {
    let c = grid.node(grid.deepest_interior_node());
    (c, 0.5 * grid.domain().distance_to_boundary(c))
}

#[derive(Clone, Debug)]
pub struct DecayRun {
    pub trace: ParabolicTrace,
    pub fit: DecayFit,
}

/// `g ≡ 0`, `u₀` a negative bump of half the inradius at the deepest node;
/// fits the trailing-window rate of `‖u(·, t)‖_∞`.
pub fn decay_run(grid: Arc<Grid2>, order: FracOrder, dirs: DirectionSet, t_end: f64, snapshot_times: Vec<f64>) -> Result<DecayRun> {
    let scheme = Arc::new(RayScheme::new(grid.clone(), order, dirs, ExteriorData::zero())?);
    let (c, rho) = bump_radius(&grid);
    let u0 = Field::new(grid, ExteriorData::zero(), bump(c, rho, -1.0));
    let trace = evolve(
        &ParabolicProblem::new(scheme, &u0, t_end)?,
        &EvolveOptions {
            snapshot_times,
            ..EvolveOptions::default()
        },
    )?;
    let fit = fit_decay(&trace, DEFAULT_WINDOW)?;
    Ok(DecayRun { trace, fit })
}

#[derive(Clone, Debug)]
pub struct FiniteTimeRun {
    /// The envelope of the affine data.
    pub z: Field,
    pub trace: ParabolicTrace,
    /// First sampled time with `‖(u − z)₊‖_∞ ≤ threshold`.
    pub reached_at: Option<f64>,
}

/// Affine `g`, `u₀ = g` plus a positive bump; runs until the positive part
/// of `u − z` drops to `threshold` or `t_end`.
pub fn finite_time_run(
    grid: Arc<Grid2>,
    order: FracOrder,
    dirs: DirectionSet,
    g: ExteriorData,
    t_end: f64,
    threshold: f64,
) -> Result<FiniteTimeRun> {
    let z = s_convex_envelope(
        grid.clone(),
        g.clone(),
        order,
        dirs.clone(),
        &SolverOptions {
            tol: Some(0.1 * threshold),
            ..SolverOptions::default()
        },
    )?
    .field;
    let scheme = Arc::new(RayScheme::new(grid.clone(), order, dirs, g.clone())?);
    let (c, rho) = bump_radius(&grid);
    let hump = bump(c, rho, 1.0);
    let data = g.clone();
    let u0 = Field::new(grid, g, move |p| data.eval(p) + hump(p));
    let trace = evolve(
        &ParabolicProblem::new(scheme, &u0, t_end)?,
        &EvolveOptions {
            reference: Some(z.interior_values()),
            norm: TraceNorm::PositivePart,
            stop_below: Some(threshold),
            sample_every: 1,
            ..EvolveOptions::default()
        },
    )?;
    Ok(FiniteTimeRun {
        reached_at: trace.stopped_at,
        z,
        trace,
    })
}

#[derive(Clone, Debug)]
pub struct LowerBoundRun {
    pub segment: SegmentEigenPair,
    pub z: Field,
    /// Slope of `g = min(1, κ|x₂ − c₂|)`.
    pub kappa: f64,
    pub z_center: f64,
    pub times: Vec<f64>,
    /// `u(c, t) − z(c)`.
    pub gap: Vec<f64>,
    pub fit: DecayFit,
    pub snapshots: Vec<(f64, Field)>,
}

/// On a ball of radius `r` centered at `c`: `g = min(1, κ|y₂ − c₂|)`
/// vanishes on the horizontal line through `c` and dominates the segment
/// eigenfunction `φ₁¹(y₁ − c₁)` on `[−r, r]` outside the ball;
/// `u₀ = max(φ₁¹, g)`. Returns the decay of `u(c, t) − z(c)`, whose rate
/// is compared with `μ₁¹`.
pub fn lower_bound_run(
    grid: Arc<Grid2>,
    order: FracOrder,
    dirs: DirectionSet,
    t_end: f64,
    snapshot_times: Vec<f64>,
) -> Result<LowerBoundRun> {
    let domain = grid.domain().clone();
    if domain.kind != DomainKind::Ball {
        return Err(Error::param("domain", "the lower-bound experiment runs on a ball"));
    }
    let c = domain.center();
    let r = domain.max_semi_axis();
    let segment = segment_eigenpair_1d(r, order, grid.spacing(), 1e-10)?;
    // κ ≥ φ₁¹(y₁)/√(r² − y₁²) makes g ≥ φ₁¹ outside the ball; the ratio is
    // bounded since φ₁¹ vanishes like a power s > 1/2 at ±r.
    let ratio = (1..2000)
        .map(|k| {
            let y = -r + 2.0 * r * k as f64 / 2000.0;
            segment.eval(y) / (r * r - y * y).sqrt()
        })
        .fold(1.0f64, f64::max);
    let kappa = 1.1 * ratio;
    let g = ExteriorData::from_fn(move |y: Vec2| (kappa * (y.y - c.y).abs()).min(1.0));
    let z = s_convex_envelope(
        grid.clone(),
        g.clone(),
        order,
        dirs.clone(),
        &SolverOptions {
            tol: Some(1e-10),
            ..SolverOptions::default()
        },
    )?
    .field;
    let center = grid
        .nearest_node(c)
        .filter(|&i| grid.is_interior(i))
        .ok_or_else(|| Error::param("h", "no interior node at the center"))?;
    let z_center = z.value_at(center);
    let seg = segment.clone();
    let data = g.clone();
    let u0 = Field::new(grid.clone(), g.clone(), move |p| seg.eval(p.x - c.x).max(data.eval(p)));
    let scheme = Arc::new(RayScheme::new(grid, order, dirs, g)?);
    let trace = evolve(
        &ParabolicProblem::new(scheme, &u0, t_end)?,
        &EvolveOptions {
            probes: vec![center],
            snapshot_times,
            ..EvolveOptions::default()
        },
    )?;
    let gap: Vec<f64> = trace.probe_values[0].iter().map(|u| u - z_center).collect();
    let fit = fit_decay_series(&trace.times, &gap, DEFAULT_WINDOW)?;
    Ok(LowerBoundRun {
        segment,
        z,
        kappa,
        z_center,
        times: trace.times,
        gap,
        fit,
        snapshots: trace.snapshots,
    })
}
