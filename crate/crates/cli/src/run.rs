//! One function per subcommand. Each writes its CSV files and returns the
//! scalar results together with any violated invariant.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;
use truncfrac::analysis::{
    asymp_sandwich_check, barrier_v_integral, boundary_barrier_constant, check_barrier_w, holder_seminorm, SandwichReport,
};
use truncfrac::elliptic::{is_s_convex, s_convex_envelope, solve_elliptic, EllipticProblem, Solution, SolverOptions};
use truncfrac::experiments::{decay_run, finite_time_run, lower_bound_run};
use truncfrac::spectral::{enlarged_eigenpair, principal_eigenpair, EigenOptions, EigenPair, ENLARGED_SCALE};
use truncfrac::{build_grid, ExteriorData, Field, Grid2, Vec2};

use crate::config::{Experiment, RunConfig};
use crate::output::{column, Artifacts, FileMeta, OutputError, LENGTH, NONE, RATE, TIME, VALUE};

/// Samples drawn by the barrier check.
pub const BARRIER_SAMPLES: usize = 1000;
/// Level of `‖(u − z)₊‖_∞` that counts as reaching the steady state.
pub const FINITE_TIME_THRESHOLD: f64 = 1e-6;
/// Largest relative gap between a fitted decay rate and its eigenvalue.
pub const RATE_TOLERANCE: f64 = 0.1;
pub const EIGEN_RESIDUAL_BOUND: f64 = 1e-3;
/// Largest growth of the Hölder seminorm from `h` to `h/2`.
pub const HOLDER_GROWTH: f64 = 0.1;
/// Largest relative change of the boundary barrier constant from `h` to `h/2`.
pub const BOUNDARY_DRIFT: f64 = 0.2;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Solver(#[from] truncfrac::Error),

    #[error(transparent)]
    Output(#[from] OutputError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Violation,
    Error,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub experiment: &'static str,
    pub status: Status,
    pub violations: Vec<String>,
    pub error: Option<String>,
    pub config: RunConfig,
    pub results: Value,
    pub files: Vec<FileMeta>,
}

impl Report {
    pub fn exit_code(&self) -> u8 {
        match self.status {
            Status::Ok => 0,
            Status::Violation => 1,
            Status::Error => 2,
        }
    }
}

struct Findings {
    results: Value,
    violations: Vec<String>,
}

impl Findings {
    fn new(results: Value) -> Self {
        Findings {
            results,
            violations: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(what());
        }
    }
}

/// Runs the experiment and always writes `report.json`, including on
/// solver failure. Only an unwritable output directory is an `Err`.
pub fn run(config: RunConfig) -> Result<Report, OutputError> {
    let mut out = Artifacts::create(&config.out)?;
    let outcome = match config.experiment {
        Experiment::Elliptic => elliptic(&config, &mut out),
        Experiment::Parabolic => parabolic(&config, &mut out),
        Experiment::Eigen => eigen(&config, &mut out),
        Experiment::Barrier => barrier(&config, &mut out),
        Experiment::Regularity => regularity(&config, &mut out),
        Experiment::Decay => decay(&config, &mut out),
        Experiment::Lowerbound => lowerbound(&config, &mut out),
        Experiment::Envelope => envelope(&config, &mut out),
    };
    let (status, findings, error) = match outcome {
        Ok(f) if f.violations.is_empty() => (Status::Ok, f, None),
        Ok(f) => (Status::Violation, f, None),
        Err(RunError::Output(e)) => return Err(e),
        Err(e) => (Status::Error, Findings::new(Value::Null), Some(e.to_string())),
    };
    let report = Report {
        experiment: config.experiment.name(),
        status,
        violations: findings.violations,
        error,
        config,
        results: findings.results,
        files: out.files().to_vec(),
    };
    out.write_json("report.json", &report)?;
    Ok(report)
}

fn grid_for(config: &RunConfig, h: f64) -> Result<Arc<Grid2>, RunError> {
    Ok(Arc::new(build_grid(&config.domain, h, 4)?))
}

fn solver_options(config: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: config.tol,
        ..SolverOptions::default()
    }
}

fn interior_range(u: &Field) -> (f64, f64) {
    u.interior_values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
}

fn center_value(u: &Field) -> Option<f64> {
    let grid = u.grid();
    grid.nearest_node(grid.domain().center())
        .filter(|&i| grid.is_interior(i))
        .map(|i| u.value_at(i))
}

fn solve_summary(s: &Solution) -> Value {
    let r = &s.report;
    json!({
        "residual": r.residual,
        "tolerance": r.tolerance,
        "iterations": r.iterations,
        "inner_iterations": r.inner_iterations,
        "method": r.method,
        "converged": r.converged,
    })
}

fn relative_gap(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn sandwich_summary(r: &SandwichReport) -> Value {
    json!({ "mu_enlarged": r.mu, "c1": r.c1, "c2": r.c2, "finite": r.finite })
}

fn eigen_pair(config: &RunConfig, grid: Arc<Grid2>) -> Result<EigenPair, RunError> {
    Ok(principal_eigenpair(grid, config.order(), config.direction_set(), &EigenOptions::default())?)
}

fn enlarged(config: &RunConfig) -> Result<EigenPair, RunError> {
    Ok(enlarged_eigenpair(
        &config.domain,
        config.h,
        ENLARGED_SCALE,
        config.order(),
        config.direction_set(),
        &EigenOptions::default(),
    )?)
}

fn snapshot_times(t_end: f64) -> Vec<f64> {
    (0..=8).map(|k| t_end * k as f64 / 8.0).collect()
}

/// `−Λ₁u = 1` with `g ≡ 0`.
fn elliptic(config: &RunConfig, out: &mut Artifacts) -> Result<Findings, RunError> {
    let problem = EllipticProblem::new(grid_for(config, config.h)?, config.order(), config.direction_set(), ExteriorData::zero(), |_| 1.0)?;
    let sol = solve_elliptic(&problem, &solver_options(config))?;
    out.grid("solution.csv", "solution of −Λ₁u = 1, u = 0 outside", &sol.field)?;
    let history = sol.report.residual_history.iter().enumerate().map(|(k, r)| vec![k as f64, *r]);
    out.table("residuals.csv", "residual before each policy update", vec![column("iteration", NONE), column("residual", VALUE)], history)?;
    let (lo, hi) = interior_range(&sol.field);
    let mut f = Findings::new(json!({
        "solve": solve_summary(&sol),
        "min": lo,
        "max": hi,
        "center": center_value(&sol.field),
    }));
    f.require(lo >= 0.0, || format!("nonnegative source gave min u = {lo:e} < 0"));
    Ok(f)
}

/// Affine `g`, `u₀ = g` plus a positive bump; steady state reached in
/// finite time.
fn parabolic(config: &RunConfig, out: &mut Artifacts) -> Result<Findings, RunError> {
    let g = ExteriorData::affine(0.5, Vec2::new(1.0, -0.5));
    let run = finite_time_run(grid_for(config, config.h)?, config.order(), config.direction_set(), g, config.t_end, FINITE_TIME_THRESHOLD)?;
    out.trace("trace.csv", "‖(u − z)₊‖_∞ at every step", &run.trace.times, &run.trace.sup_norm)?;
    out.grid("envelope.csv", "steady state z", &run.z)?;
    out.grid("final.csv", "u at the last step", &run.trace.final_field)?;
    let mut f = Findings::new(json!({
        "threshold": FINITE_TIME_THRESHOLD,
        "reached_at": run.reached_at,
        "dt": run.trace.dt,
        "steps": run.trace.steps,
        "final_norm": run.trace.sup_norm.last(),
    }));
    f.require(run.reached_at.is_some(), || format!("‖(u − z)₊‖_∞ stayed above {FINITE_TIME_THRESHOLD:e} up to t = {}", config.t_end));
    Ok(f)
}

fn eigen(config: &RunConfig, out: &mut Artifacts) -> Result<Findings, RunError> {
    let pair = eigen_pair(config, grid_for(config, config.h)?)?;
    out.grid("phi.csv", "principal eigenfunction, sup-normalized, φ ≤ 0", &pair.phi)?;
    let trace = pair.trace.iter().enumerate().map(|(k, mu)| vec![k as f64, *mu]);
    out.table("mu_trace.csv", "eigenvalue estimate per iteration", vec![column("iteration", NONE), column("mu", RATE)], trace)?;
    let (_, hi) = interior_range(&pair.phi);
    let mut f = Findings::new(json!({
        "mu": pair.mu,
        "residual": pair.residual,
        "iterations": pair.iterations,
        "max_interior": hi,
    }));
    f.require(pair.residual <= EIGEN_RESIDUAL_BOUND, || format!("residual {:e} above {EIGEN_RESIDUAL_BOUND:e}", pair.residual));
    f.require(hi < 0.0, || format!("eigenfunction reaches {hi:e} inside"));
    Ok(f)
}

/// Barrier checks on the unit ball; the configured domain and grid are
/// not used.
fn barrier(config: &RunConfig, out: &mut Artifacts) -> Result<Findings, RunError> {
    let report = check_barrier_w(config.order(), config.gamma, BARRIER_SAMPLES, config.seed)?;
    let j = barrier_v_integral(config.order(), config.gamma)?;
    let rows = report.samples.iter().map(|s| vec![s.x.x, s.x.y, s.theta.x, s.theta.y, s.d, s.value, s.scaled]);
    let columns = vec![
        column("x", LENGTH),
        column("y", LENGTH),
        column("theta_x", NONE),
        column("theta_y", NONE),
        column("d", LENGTH),
        column("value", VALUE),
        column("scaled", VALUE),
    ];
    out.table("samples.csv", "I_θ(w_γ)(x) at random (x, θ) in the unit ball; scaled = value · d^(2s−γ)", columns, rows)?;
    let violations = report.samples.iter().filter(|s| s.value >= 0.0).count();
    let mut f = Findings::new(json!({
        "samples": BARRIER_SAMPLES,
        "constant": report.constant,
        "max_scaled": report.max_scaled,
        "max_violation": report.samples.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max),
        "nonnegative_samples": violations,
        "universal_integral": j,
    }));
    f.require(violations == 0, || format!("{violations} samples with I_θ(w_γ) ≥ 0"));
    f.require(j < 0.0, || format!("universal integral {j:e} is not negative"));
    Ok(f)
}

/// `−Λ₁u = 1` with `g(y) = |y₁ − 0.2|^γ` at `h` and `h/2`.
fn regularity(config: &RunConfig, out: &mut Artifacts) -> Result<Findings, RunError> {
    let gamma = config.gamma;
    let solve_at = |h: f64| -> Result<Solution, RunError> {
        let g = ExteriorData::from_fn(move |y: Vec2| (y.x - 0.2).abs().powf(gamma));
        let p = EllipticProblem::new(grid_for(config, h)?, config.order(), config.direction_set(), g, |_| 1.0)?;
        Ok(solve_elliptic(&p, &solver_options(config))?)
    };
    let coarse = solve_at(config.h)?;
    let fine = solve_at(config.h / 2.0)?;
    out.grid("solution.csv", "solution at h", &coarse.field)?;
    out.grid("solution_fine.csv", "solution at h/2", &fine.field)?;
    let (hc, hf) = (holder_seminorm(&coarse.field, gamma)?, holder_seminorm(&fine.field, gamma)?);
    let (bc, bf) = (boundary_barrier_constant(&coarse.field, gamma), boundary_barrier_constant(&fine.field, gamma));
    let growth = hf.seminorm / hc.seminorm - 1.0;
    let drift = relative_gap(bf.constant, bc.constant);
    let rows = [(config.h, &hc, &bc), (config.h / 2.0, &hf, &bf)].map(|(h, hr, br)| vec![h, hr.seminorm, br.constant]);
    out.table(
        "refinement.csv",
        "Hölder seminorm and boundary barrier constant per spacing",
        vec![column("h", LENGTH), column("seminorm", VALUE), column("boundary_constant", VALUE)],
        rows,
    )?;
    let mut f = Findings::new(json!({
        "solve": solve_summary(&coarse),
        "solve_fine": solve_summary(&fine),
        "seminorm": hc.seminorm,
        "seminorm_fine": hf.seminorm,
        "growth": growth,
        "boundary_constant": bc.constant,
        "boundary_constant_fine": bf.constant,
        "boundary_drift": drift,
    }));
    f.require(growth <= HOLDER_GROWTH, || format!("seminorm grew by {:.1}% from h to h/2", 100.0 * growth));
    f.require(drift <= BOUNDARY_DRIFT, || format!("boundary constant moved by {:.1}% from h to h/2", 100.0 * drift));
    Ok(f)
}

/// `g ≡ 0`, negative bump start; fitted rate against `μ₁`.
fn decay(config: &RunConfig, out: &mut Artifacts) -> Result<Findings, RunError> {
    let grid = grid_for(config, config.h)?;
    let pair = eigen_pair(config, grid.clone())?;
    let run = decay_run(grid.clone(), config.order(), config.direction_set(), config.t_end, snapshot_times(config.t_end))?;
    let big = enlarged(config)?;
    let sandwich = asymp_sandwich_check(&run.trace.snapshots, &Field::zeros(grid), &big)?;
    out.trace("trace.csv", "‖u(·, t)‖_∞", &run.trace.times, &run.trace.sup_norm)?;
    out.grid("phi.csv", "principal eigenfunction", &pair.phi)?;
    let ratio = run.fit.rate / pair.mu;
    let (_, max_u) = run.trace.value_range;
    let mut f = Findings::new(json!({
        "fitted_mu": run.fit.rate,
        "mu1": pair.mu,
        "ratio": ratio,
        "fit": run.fit,
        "eigen_residual": pair.residual,
        "max_value": max_u,
        "sandwich": sandwich_summary(&sandwich),
    }));
    f.require((ratio - 1.0).abs() <= RATE_TOLERANCE, || format!("fitted rate {:.4} vs μ₁ {:.4}", run.fit.rate, pair.mu));
    f.require(max_u <= 0.0, || format!("u reached {max_u:e} > 0"));
    f.require(sandwich.finite, || "sandwich constants are not finite".into());
    Ok(f)
}

/// Slab data over the segment eigenfunction; rate of `u(0, t) − z(0)`
/// against `μ₁¹`.
fn lowerbound(config: &RunConfig, out: &mut Artifacts) -> Result<Findings, RunError> {
    let run = lower_bound_run(grid_for(config, config.h)?, config.order(), config.direction_set(), config.t_end, snapshot_times(config.t_end))?;
    let big = enlarged(config)?;
    let sandwich = asymp_sandwich_check(&run.snapshots, &run.z, &big)?;
    out.table("gap.csv", "u(0, t) − z(0)", vec![column("t", TIME), column("gap", VALUE)], run.times.iter().zip(&run.gap).map(|(t, g)| vec![*t, *g]))?;
    let seg = run.segment.nodes.iter().zip(&run.segment.phi).map(|(x, v)| vec![*x, *v]);
    out.table("segment.csv", "1D segment eigenfunction φ₁¹", vec![column("x", LENGTH), column("value", NONE)], seg)?;
    out.grid("envelope.csv", "steady state z", &run.z)?;
    let ratio = run.fit.rate / run.segment.mu;
    let min_gap = run.gap.iter().copied().fold(f64::INFINITY, f64::min);
    let mut f = Findings::new(json!({
        "k2": run.fit.rate,
        "k1": run.fit.log_c.exp(),
        "mu1_segment": run.segment.mu,
        "ratio": ratio,
        "kappa": run.kappa,
        "z_center": run.z_center,
        "min_gap": min_gap,
        "fit": run.fit,
        "sandwich": sandwich_summary(&sandwich),
    }));
    f.require((ratio - 1.0).abs() <= RATE_TOLERANCE, || format!("K₂ {:.4} vs μ₁¹ {:.4}", run.fit.rate, run.segment.mu));
    f.require(min_gap > 0.0, || format!("u(0, t) − z(0) reached {min_gap:e}"));
    f.require(sandwich.finite, || "sandwich constants are not finite".into());
    Ok(f)
}

/// Envelope of `g(y) = min(|y − c|², 4)`.
fn envelope(config: &RunConfig, out: &mut Artifacts) -> Result<Findings, RunError> {
    let c = config.domain.center();
    let g = ExteriorData::from_fn(move |y: Vec2| (y - c).norm_sq().min(4.0));
    let opts = SolverOptions {
        tol: Some(config.tol.unwrap_or(1e-9)),
        ..SolverOptions::default()
    };
    let sol = s_convex_envelope(grid_for(config, config.h)?, g, config.order(), config.direction_set(), &opts)?;
    out.grid("envelope.csv", "s-convex envelope of min(|y − c|², 4)", &sol.field)?;
    let check_tol = 10.0 * sol.report.tolerance;
    let check = is_s_convex(&sol.field, config.order(), &config.direction_set(), check_tol)?;
    let mut f = Findings::new(json!({
        "solve": solve_summary(&sol),
        "center": center_value(&sol.field),
        "min_operator_value": check.min_value,
        "convexity_tolerance": check_tol,
    }));
    f.require(check.convex, || format!("Λ₁z reaches {:e} < −{check_tol:e}", check.min_value));
    Ok(f)
}
