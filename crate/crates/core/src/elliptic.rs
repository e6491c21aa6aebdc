//! Dirichlet problem `−Λ₁ˢu = f` in Ω, `u = g` outside, by Howard policy
//! iteration with an explicit pseudo-time fallback.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::Serialize;

use crate::clock::Stopwatch;
use crate::error::{Error, Result};
use crate::field::{ExteriorData, Field};
use crate::geometry::{Grid2, Vec2};
use crate::linalg::{self, InnerSolver};
use crate::operator::{DirectionSet, RayScheme};
use crate::quadrature::FracOrder;

#[derive(Clone, Debug)]
pub struct EllipticProblem {
    pub scheme: Arc<RayScheme>,
    /// Right-hand side in interior order.
    pub f: Vec<f64>,
}

impl EllipticProblem {
    pub fn new<F: Fn(Vec2) -> f64>(
        grid: Arc<Grid2>,
        order: FracOrder,
        dirs: DirectionSet,
        exterior: ExteriorData,
        f: F,
    ) -> Result<Self> {
        let values = grid.interior().iter().map(|&i| f(grid.node(i))).collect();
        let scheme = RayScheme::new(grid, order, dirs, exterior)?;
        Self::from_scheme(Arc::new(scheme), values)
    }

    pub fn from_scheme(scheme: Arc<RayScheme>, f: Vec<f64>) -> Result<Self> {
        let n = scheme.grid().interior_count();
        if f.len() != n {
            return Err(Error::param("f", format!("expected {n} interior values, got {}", f.len())));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("f", "right-hand side must be finite"));
        }
        Ok(EllipticProblem { scheme, f })
    }

    pub fn grid(&self) -> &Arc<Grid2> {
        self.scheme.grid()
    }

    /// `‖Λ₁ˢu + f‖_∞` over interior nodes.
    pub fn residual(&self, interior: &[f64]) -> f64 {
        let values = self.scheme.node_values(interior);
        let ev = self.scheme.apply_lambda1(&values);
        max_abs_sum(&ev.values, &self.f)
    }
}

fn max_abs_sum(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x + y).abs()))
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Absolute residual tolerance; `None` means `1e−6 (1 + ‖f‖_∞)`.
    pub tol: Option<f64>,
    pub max_outer: usize,
    pub inner: InnerSolver,
    /// Step cap for the pseudo-time fallback.
    pub max_pseudo_steps: usize,
    /// Initial interior iterate; defaults to `g` sampled at interior nodes.
    pub start: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: None,
            max_outer: 50,
            inner: InnerSolver::default(),
            max_pseudo_steps: 200_000,
            start: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Policy,
    PseudoTime,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    /// Outer policy iterations, plus pseudo-time steps if the fallback ran.
    pub iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub method: SolveMethod,
    pub wall_time: f64,
    /// Residual before each policy update.
    pub residual_history: Vec<f64>,
    pub inner_iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: Field,
    pub report: SolveReport,
}

pub fn solve_elliptic(problem: &EllipticProblem, opts: &SolverOptions) -> Result<Solution> {
    let scheme = &*problem.scheme;
    let grid = scheme.grid();
    let fmax = problem.f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = opts.tol.unwrap_or(1e-6 * (1.0 + fmax));
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let clock = Stopwatch::start();
    let n = grid.interior_count();
    let mut u: Vec<f64> = match &opts.start {
        Some(s) if s.len() == n => s.clone(),
        Some(s) => {
            return Err(Error::param("start", format!("expected {n} interior values, got {}", s.len())));
        }
        None => grid.interior().iter().map(|&i| scheme.exterior().eval(grid.node(i))).collect(),
    };
    if n == 0 {
        log::warn!("no interior nodes; returning exterior data");
        return Ok(Solution {
            field: scheme.field_from_interior(&u)?,
            report: SolveReport {
                iterations: 0,
                residual: 0.0,
                tolerance: tol,
                method: SolveMethod::Policy,
                wall_time: clock.seconds(),
                residual_history: Vec::new(),
                inner_iterations: 0,
                converged: true,
            },
        });
    }

    let mut history = Vec::new();
    let mut recent: VecDeque<Vec<usize>> = VecDeque::with_capacity(4);
    let mut policy: Option<Vec<usize>> = None;
    let mut inner_total = 0;
    let mut outer = 0;
    let mut values = scheme.node_values(&u);
    loop {
        let ev = scheme.apply_lambda1(&values);
        let residual = max_abs_sum(&ev.values, &problem.f);
        history.push(residual);
        if residual <= tol {
            let report = SolveReport {
                iterations: outer,
                residual,
                tolerance: tol,
                method: SolveMethod::Policy,
                wall_time: clock.seconds(),
                residual_history: history,
                inner_iterations: inner_total,
                converged: true,
            };
            return Ok(Solution {
                field: scheme.field_from_interior(&u)?,
                report,
            });
        }
        // Switch a node's direction only when strictly better, so roundoff
        // in near-ties cannot make the policy oscillate.
        let next = match &policy {
            None => ev.arg.clone(),
            Some(old) => {
                let current = scheme.apply_policy(&values, old);
                old.iter()
                    .enumerate()
                    .map(|(pos, &m)| {
                        let slack = 1e-12 * (1.0 + current[pos].abs());
                        if ev.values[pos] < current[pos] - slack {
                            ev.arg[pos]
                        } else {
                            m
                        }
                    })
                    .collect()
            }
        };
        let stalled = policy.as_ref() == Some(&next) || recent.iter().any(|p| *p == next);
        if stalled || outer >= opts.max_outer {
            if stalled {
                log::debug!("policy iteration stalled after {outer} iterations; switching to pseudo-time");
            }
            return pseudo_time(problem, u, tol, opts.max_pseudo_steps, outer, history, inner_total, clock);
        }
        let sys = scheme.frozen_system(&next);
        let rhs: Vec<f64> = sys.constant.iter().zip(&problem.f).map(|(c, f)| c + f).collect();
        let stats = linalg::solve(&sys.matrix, &rhs, &mut u, opts.inner);
        inner_total += stats.iterations;
        outer += 1;
        if let Some(old) = policy.replace(next) {
            if recent.len() == 3 {
                recent.pop_front();
            }
            recent.push_back(old);
        }
        values = scheme.node_values(&u);
    }
}

#[allow(clippy::too_many_arguments)]
fn pseudo_time(
    problem: &EllipticProblem,
    mut u: Vec<f64>,
    tol: f64,
    max_steps: usize,
    outer: usize,
    mut history: Vec<f64>,
    inner_total: usize,
    clock: Stopwatch,
) -> Result<Solution> {
    let scheme = &*problem.scheme;
    let dt = 0.9 / scheme.center_coefficient();
    let mut residual = f64::INFINITY;
    let mut steps = 0;
    while steps < max_steps {
        let values = scheme.node_values(&u);
        let ev = scheme.apply_lambda1(&values);
        residual = max_abs_sum(&ev.values, &problem.f);
        if residual <= tol {
            break;
        }
        for ((ui, l), f) in u.iter_mut().zip(&ev.values).zip(&problem.f) {
            *ui += dt * (l + f);
        }
        steps += 1;
    }
    history.push(residual);
    let converged = residual <= tol;
    let solution = Solution {
        field: scheme.field_from_interior(&u)?,
        report: SolveReport {
            iterations: outer + steps,
            residual,
            tolerance: tol,
            method: SolveMethod::PseudoTime,
            wall_time: clock.seconds(),
            residual_history: history,
            inner_iterations: inner_total,
            converged,
        },
    };
    if converged {
        Ok(solution)
    } else {
        Err(Error::NotConverged(Box::new(solution)))
    }
}

/// The `f ≡ 0` solution `z`: the largest s-convex function below `g`.
pub fn s_convex_envelope(
    grid: Arc<Grid2>,
    exterior: ExteriorData,
    order: FracOrder,
    dirs: DirectionSet,
    opts: &SolverOptions,
) -> Result<Solution> {
    let problem = EllipticProblem::new(grid, order, dirs, exterior, |_| 0.0)?;
    solve_elliptic(&problem, opts)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityCheck {
    pub convex: bool,
    pub min_value: f64,
    /// `(node index, Λ₁ˢu)` at every interior node below `−tol`.
    pub violations: Vec<(usize, f64)>,
}

/// Checks `Λ₁ˢu ≥ −tol` at every interior node.
pub fn is_s_convex(u: &Field, order: FracOrder, dirs: &DirectionSet, tol: f64) -> Result<ConvexityCheck> {
    let ev = crate::operator::apply_lambda1(u, dirs, order)?;
    let interior = u.grid().interior();
    let violations: Vec<(usize, f64)> = ev
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v < -tol)
        .map(|(pos, v)| (interior[pos], *v))
        .collect();
    Ok(ConvexityCheck {
        convex: violations.is_empty(),
        min_value: ev.values.iter().copied().fold(f64::INFINITY, f64::min),
        violations,
    })
}
