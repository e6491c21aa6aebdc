//! Explicit monotone time stepping for `u_t = Λ₁ˢu` with `u = g` outside Ω.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::operator::RayScheme;

/// Fraction of the monotonicity limit `1 / W_max` used as the time step.
pub const CFL_FRACTION: f64 = 0.9;

/// `Δt = 0.9 / W_max`, `W_max = 2 Σ w_k + tail mass`.
pub fn cfl_step(scheme: &RayScheme) -> f64 {
    CFL_FRACTION / scheme.center_coefficient()
}

fn check_dt(scheme: &RayScheme, dt: f64) -> Result<()> {
    let bound = cfl_step(scheme);
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    Ok(())
}

/// One explicit step on interior values: `u + Δt Λ₁ˢu`.
pub fn step_interior(scheme: &RayScheme, interior: &[f64], dt: f64) -> Result<Vec<f64>> {
    check_dt(scheme, dt)?;
    Ok(advance(scheme, interior, dt))
}

fn advance(scheme: &RayScheme, interior: &[f64], dt: f64) -> Vec<f64> {
    let values = scheme.node_values(interior);
    let ev = scheme.apply_lambda1(&values);
    interior.iter().zip(&ev.values).map(|(u, l)| u + dt * l).collect()
}

/// One explicit step; exterior nodes of the result hold the scheme's `g`.
pub fn step(scheme: &RayScheme, u: &Field, dt: f64) -> Result<Field> {
    let next = step_interior(scheme, &u.interior_values(), dt)?;
    scheme.field_from_interior(&next)
}

#[derive(Clone, Debug)]
pub struct ParabolicProblem {
    pub scheme: Arc<RayScheme>,
    /// Initial interior values.
    pub u0: Vec<f64>,
    pub t_end: f64,
}

impl ParabolicProblem {
    pub fn new(scheme: Arc<RayScheme>, u0: &Field, t_end: f64) -> Result<Self> {
        if !Arc::ptr_eq(u0.grid(), scheme.grid()) && u0.grid().len() != scheme.grid().len() {
            return Err(Error::param("u0", "initial field lives on a different grid"));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::param("t_end", format!("must be finite and nonnegative, got {t_end}")));
        }
        Ok(ParabolicProblem {
            scheme,
            u0: u0.interior_values(),
            t_end,
        })
    }
}

/// What the trace records at each sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceNorm {
    /// `‖u − z‖_∞`
    #[default]
    Abs,
    /// `‖(u − z)₊‖_∞`
    PositivePart,
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub sample_every: usize,
    /// Time step; `None` uses the largest one not exceeding [`cfl_step`]
    /// that divides `t_end` evenly.
    pub dt: Option<f64>,
    /// Interior values of the reference `z`.
    pub reference: Option<Vec<f64>>,
    pub norm: TraceNorm,
    /// Field snapshots are taken at the first step at or after each time.
    pub snapshot_times: Vec<f64>,
    /// Node indices whose values are recorded at every sample.
    pub probes: Vec<usize>,
    /// Stop early once the sampled norm is at or below this value.
    pub stop_below: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            sample_every: 10,
            dt: None,
            reference: None,
            norm: TraceNorm::Abs,
            snapshot_times: Vec::new(),
            probes: Vec::new(),
            stop_below: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParabolicTrace {
    pub times: Vec<f64>,
    pub sup_norm: Vec<f64>,
    /// `probe_values[p][k]` is probe `p` at `times[k]`.
    pub probe_values: Vec<Vec<f64>>,
    pub snapshots: Vec<(f64, Field)>,
    pub dt: f64,
    pub steps: usize,
    /// First sampled time with norm at or below `stop_below`.
    pub stopped_at: Option<f64>,
    /// Smallest and largest interior value over every step, `u₀` included.
    pub value_range: (f64, f64),
    pub final_field: Field,
}

fn sample_norm(u: &[f64], reference: Option<&[f64]>, norm: TraceNorm) -> f64 {
    let diff = |i: usize| u[i] - reference.map_or(0.0, |r| r[i]);
    match norm {
        TraceNorm::Abs => (0..u.len()).fold(0.0f64, |m, i| m.max(diff(i).abs())),
        TraceNorm::PositivePart => (0..u.len()).fold(0.0f64, |m, i| m.max(diff(i))),
    }
}

pub fn evolve(problem: &ParabolicProblem, opts: &EvolveOptions) -> Result<ParabolicTrace> {
    let scheme = &*problem.scheme;
    let grid = scheme.grid();
    let n = grid.interior_count();
    if problem.u0.len() != n {
        return Err(Error::param("u0", format!("expected {n} interior values, got {}", problem.u0.len())));
    }
    if let Some(r) = &opts.reference {
        if r.len() != n {
            return Err(Error::param("reference", format!("expected {n} interior values, got {}", r.len())));
        }
    }
    let sample_every = opts.sample_every.max(1);
    let bound = cfl_step(scheme);
    let (dt, total) = match opts.dt {
        Some(dt) => {
            check_dt(scheme, dt)?;
            (dt, (problem.t_end / dt).ceil() as usize)
        }
        None => {
            let total = (problem.t_end / bound).ceil() as usize;
            if total == 0 {
                (bound, 0)
            } else {
                (problem.t_end / total as f64, total)
            }
        }
    };
    let probe_pos: Vec<usize> = opts
        .probes
        .iter()
        .map(|&idx| {
            let p = grid.interior_position(idx);
            if p == crate::geometry::NOT_INTERIOR {
                Err(Error::param("probes", format!("node {idx} is not interior")))
            } else {
                Ok(p)
            }
        })
        .collect::<Result<_>>()?;
    let reference = opts.reference.as_deref();
    let mut snaps: Vec<f64> = opts.snapshot_times.clone();
    snaps.sort_by(f64::total_cmp);
    let mut next_snap = 0;

    let mut trace = ParabolicTrace {
        times: Vec::new(),
        sup_norm: Vec::new(),
        probe_values: vec![Vec::new(); probe_pos.len()],
        snapshots: Vec::new(),
        dt,
        steps: 0,
        stopped_at: None,
        value_range: (f64::INFINITY, f64::NEG_INFINITY),
        final_field: scheme.field_from_interior(&problem.u0)?,
    };
    let mut u = problem.u0.clone();
    let mut k = 0;
    loop {
        let t = k as f64 * dt;
        for &v in &u {
            trace.value_range.0 = trace.value_range.0.min(v);
            trace.value_range.1 = trace.value_range.1.max(v);
        }
        if k % sample_every == 0 || k == total {
            let norm = sample_norm(&u, reference, opts.norm);
            trace.times.push(t);
            trace.sup_norm.push(norm);
            for (series, &p) in trace.probe_values.iter_mut().zip(&probe_pos) {
                series.push(u[p]);
            }
            if let Some(threshold) = opts.stop_below {
                if norm <= threshold {
                    trace.stopped_at = Some(t);
                }
            }
        }
        while next_snap < snaps.len() && snaps[next_snap] <= t + 1e-12 {
            trace.snapshots.push((t, scheme.field_from_interior(&u)?));
            next_snap += 1;
        }
        if k == total || trace.stopped_at.is_some() {
            break;
        }
        u = advance(scheme, &u, dt);
        k += 1;
    }
    trace.steps = k;
    trace.final_field = scheme.field_from_interior(&u)?;
    Ok(trace)
}
