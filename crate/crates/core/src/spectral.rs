//! Principal eigenpair of `−Λ₁ˢφ = μφ`, `φ = 0` outside Ω, by inverse power
//! iteration of the solution map `T(v) = u`, `−Λ₁ˢu = v`, on the cone of
//! nonpositive functions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::elliptic::{solve_elliptic, EllipticProblem, SolverOptions};
use crate::error::{Error, Result};
use crate::field::{ExteriorData, Field};
use crate::geometry::{build_grid, ConvexDomain, Grid2};
use crate::operator::{DirectionSet, RayScheme};
use crate::quadrature::{make_weights, FracOrder};

/// Default ratio between the enlarged and the original domain.
pub const ENLARGED_SCALE: f64 = 1.25;

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Relative change of `μ` between iterations; the residual must also
    /// drop below `10 tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Interior start vector; must be nonpositive and nonzero. Defaults to
    /// a bump at the deepest interior node.
    pub start: Option<Vec<f64>>,
    pub solver: SolverOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-5,
            max_iter: 500,
            start: None,
            solver: SolverOptions {
                tol: Some(1e-10),
                ..SolverOptions::default()
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub mu: f64,
    /// Sup-normalized; `φ ≤ 0` for `Λ₁ˢ`, `ψ ≥ 0` for the maximal pair.
    pub phi: Field,
    /// `‖Λφ + μφ‖_∞` recomputed from the returned pair.
    pub residual: f64,
    pub iterations: usize,
    /// `μ_k` per iteration.
    pub trace: Vec<f64>,
    pub maximal: bool,
}

/// `−(1 − |x − c|²/ρ²)₊²` at the deepest interior node, `ρ` half its
/// distance to the boundary, sup-normalized.
pub fn start_bump(grid: &Grid2) -> Vec<f64> {
    let c_idx = grid.deepest_interior_node();
    let c = grid.node(c_idx);
    let rho = (0.5 * grid.domain().distance_to_boundary(c)).max(1.5 * grid.spacing());
    let v: Vec<f64> = grid
        .interior()
        .iter()
        .map(|&i| {
            let r2 = (grid.node(i) - c).norm_sq() / (rho * rho);
            -(1.0 - r2).max(0.0).powi(2)
        })
        .collect();
    v
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn principal_eigenpair(
    grid: Arc<Grid2>,
    order: FracOrder,
    dirs: DirectionSet,
    opts: &EigenOptions,
) -> Result<EigenPair> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidTolerance(opts.tol));
    }
    let scheme = Arc::new(RayScheme::new(grid.clone(), order, dirs, ExteriorData::zero())?);
    let n = grid.interior_count();
    let mut v = match &opts.start {
        Some(s) if s.len() != n => {
            return Err(Error::param("start", format!("expected {n} interior values, got {}", s.len())));
        }
        Some(s) => s.clone(),
        None => start_bump(&grid),
    };
    if v.iter().any(|x| *x > 0.0) {
        return Err(Error::param("start", "start vector must be nonpositive"));
    }
    let norm = sup(&v);
    if norm == 0.0 {
        return Err(Error::DegenerateStart);
    }
    v.iter_mut().for_each(|x| *x /= norm);

    let mut trace = Vec::new();
    let mut warm: Option<Vec<f64>> = None;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for it in 1..=opts.max_iter {
        let problem = EllipticProblem::from_scheme(scheme.clone(), v.clone())?;
        let solver = SolverOptions {
            start: warm.take(),
            ..opts.solver.clone()
        };
        let w = match solve_elliptic(&problem, &solver) {
            Ok(s) => s.field.interior_values(),
            Err(Error::NotConverged(s)) => {
                log::warn!("inner solve not converged (residual {})", s.report.residual);
                s.field.interior_values()
            }
            Err(e) => return Err(e),
        };
        let wn = sup(&w);
        if wn == 0.0 {
            return Err(Error::DegenerateStart);
        }
        let mu = 1.0 / wn;
        let next: Vec<f64> = w.iter().map(|x| x / wn).collect();
        // Λ₁(next) = −v/‖w‖ up to the solve tolerance, so the eigen-residual
        // of (mu, next) is mu ‖next − v‖_∞.
        let cheap = mu * next.iter().zip(&v).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let settled = trace.last().is_some_and(|prev: &f64| (mu - prev).abs() <= opts.tol * mu);
        trace.push(mu);
        if best.as_ref().map_or(true, |b| cheap < b.2) {
            best = Some((mu, next.clone(), cheap));
        }
        warm = Some(next.iter().map(|x| x / mu).collect());
        v = next;
        if settled && cheap <= 10.0 * opts.tol {
            let phi = scheme.field_from_interior(&v)?;
            let residual = eigen_residual(&scheme, &v, mu, false);
            return Ok(EigenPair {
                mu,
                phi,
                residual,
                iterations: it,
                trace,
                maximal: false,
            });
        }
    }
    let (mu, phi, _) = best.expect("at least one iteration");
    let residual = eigen_residual(&scheme, &phi, mu, false);
    Err(Error::EigenNotConverged(Box::new(EigenPair {
        mu,
        phi: scheme.field_from_interior(&phi)?,
        residual,
        iterations: opts.max_iter,
        trace,
        maximal: false,
    })))
}

fn eigen_residual(scheme: &RayScheme, phi: &[f64], mu: f64, maximal: bool) -> f64 {
    let values = scheme.node_values(phi);
    let ev = if maximal {
        scheme.apply_lambda_n(&values)
    } else {
        scheme.apply_lambda1(&values)
    };
    ev.values
        .iter()
        .zip(phi)
        .fold(0.0f64, |m, (l, p)| m.max((l + mu * p).abs()))
}

/// `‖Λφ + μφ‖_∞` for a pair, with `Λ = Λ_Nˢ` for maximal pairs.
pub fn residual_of(pair: &EigenPair, dirs: &DirectionSet, order: FracOrder) -> Result<f64> {
    let scheme = RayScheme::new(pair.phi.grid().clone(), order, dirs.clone(), ExteriorData::zero())?;
    Ok(eigen_residual(&scheme, &pair.phi.interior_values(), pair.mu, pair.maximal))
}

/// `(μ, ψ = −φ)` solves `−Λ_Nˢψ = μψ`; the residual is recomputed with the
/// maximal operator.
pub fn maximal_eigenpair_from_duality(pair: &EigenPair, dirs: &DirectionSet, order: FracOrder) -> Result<EigenPair> {
    let mut out = EigenPair {
        mu: pair.mu,
        phi: pair.phi.negated(),
        residual: 0.0,
        iterations: pair.iterations,
        trace: pair.trace.clone(),
        maximal: !pair.maximal,
    };
    out.residual = residual_of(&out, dirs, order)?;
    Ok(out)
}

/// Eigenpair on the concentric domain scaled by `scale`, on a grid with the
/// same spacing and center, so its nodes contain the original grid's nodes.
pub fn enlarged_eigenpair(
    domain: &ConvexDomain,
    h: f64,
    scale: f64,
    order: FracOrder,
    dirs: DirectionSet,
    opts: &EigenOptions,
) -> Result<EigenPair> {
    let big = domain.scaled(scale)?;
    let grid = Arc::new(build_grid(&big, h, 4)?);
    principal_eigenpair(grid, order, dirs, opts)
}

/// 1D eigenpair on `[−r, r]`, nonnegative and sup-normalized.
#[derive(Clone, Debug, Serialize)]
pub struct SegmentEigenPair {
    pub mu: f64,
    pub half_length: f64,
    pub spacing: f64,
    /// Node coordinates `i h` with `|i h| < r`.
    pub nodes: Vec<f64>,
    pub phi: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

impl SegmentEigenPair {
    /// Piecewise-linear interpolant, zero outside the open segment.
    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() >= self.half_length {
            return 0.0;
        }
        let h = self.spacing;
        let n = self.nodes.len();
        let offset = self.nodes[0];
        let t = (x - offset) / h;
        if t <= -1.0 || t >= n as f64 {
            return 0.0;
        }
        let i = t.floor();
        let f = t - i;
        let at = |k: f64| {
            if k < 0.0 || k >= n as f64 {
                0.0
            } else {
                self.phi[k as usize]
            }
        };
        (1.0 - f) * at(i) + f * at(i + 1.0)
    }
}

/// The 1D operator on `[−r, r]` with zero exterior data as a dense matrix
/// `A` with `I u = −A u`.
fn segment_matrix(r: f64, order: FracOrder, h: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let m = ((r / h) - 1e-9).ceil() as i64 - 1;
    if m < 0 {
        return Err(Error::param("h", format!("spacing {h} leaves no node inside (−{r}, {r})")));
    }
    let nodes: Vec<f64> = (-m..=m).map(|i| i as f64 * h).collect();
    let n = nodes.len();
    let count = (2.0 * r / h).ceil() as usize + 1;
    let quad = make_weights(order, h, count.max(2))?;
    let w = quad.weights();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = quad.center_coefficient();
        for j in 0..n {
            if i != j {
                let k = i.abs_diff(j);
                if k <= w.len() {
                    a[(i, j)] = -w[k - 1];
                }
            }
        }
    }
    Ok((nodes, a))
}

pub fn segment_eigenpair_1d(r: f64, order: FracOrder, h: f64, tol: f64) -> Result<SegmentEigenPair> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("half-length must be positive, got {r}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param("h", format!("spacing must be positive, got {h}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let (nodes, a) = segment_matrix(r, order, h)?;
    let n = nodes.len();
    let lu = a.clone().lu();
    let mut v = DVector::from_iterator(n, nodes.iter().map(|x| (1.0 - (x / r).powi(2)).max(0.0)));
    v /= v.amax();
    let mut trace = Vec::new();
    let max_iter = 10_000;
    for it in 1..=max_iter {
        let w = lu.solve(&v).ok_or_else(|| Error::param("h", "singular 1D system"))?;
        let wn = w.amax();
        let mu = 1.0 / wn;
        let next = &w / wn;
        let change = (&next - &v).amax();
        let settled = trace.last().is_some_and(|prev: &f64| (mu - prev).abs() <= tol * mu);
        trace.push(mu);
        v = next;
        if settled && mu * change <= 10.0 * tol {
            let residual = (&a * &v - &v * mu).amax();
            return Ok(SegmentEigenPair {
                mu,
                half_length: r,
                spacing: h,
                nodes,
                phi: v.iter().copied().collect(),
                residual,
                iterations: it,
                trace,
            });
        }
    }
    Err(Error::param("tol", format!("1D inverse iteration did not settle in {max_iter} steps")))
}
