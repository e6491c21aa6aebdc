mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{disk_grid, order, Smooth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use truncfrac::analysis::boundary_barrier_constant;
use truncfrac::elliptic::{is_s_convex, s_convex_envelope, solve_elliptic, EllipticProblem, SolverOptions};
use truncfrac::integrate::integrate_pieces;
use truncfrac::operator::eval_ray_value;
use truncfrac::*;

fn solve(h: f64, m: usize, g: ExteriorData, f: impl Fn(Vec2) -> f64, tol: Option<f64>) -> Field {
    let p = EllipticProblem::new(disk_grid(h), order(0.75), DirectionSet::uniform(m).unwrap(), g, f).unwrap();
    let opts = SolverOptions {
        tol,
        ..SolverOptions::default()
    };
    let s = solve_elliptic(&p, &opts).unwrap();
    assert!(s.report.converged);
    s.field
}

fn center_value(u: &Field) -> f64 {
    u.value_at(u.grid().nearest_node(Vec2::ZERO).unwrap())
}

#[test]
fn affine_exterior_data_is_reproduced() {
    let g = ExteriorData::affine(0.3, Vec2::new(-1.2, 0.8));
    let p = EllipticProblem::new(disk_grid(0.05), order(0.75), DirectionSet::uniform(64).unwrap(), g.clone(), |_| 0.0).unwrap();
    let s = solve_elliptic(&p, &SolverOptions::default()).unwrap();
    assert!(s.report.residual <= 1e-8, "{}", s.report.residual);
    for &i in s.field.grid().interior() {
        assert!((s.field.value_at(i) - g.eval(s.field.grid().node(i))).abs() < 1e-8);
    }
}

#[test]
fn zero_data_gives_zero_solution() {
    let u = solve(0.1, 32, ExteriorData::zero(), |_| 0.0, None);
    assert!(u.sup_norm_interior() == 0.0);
}

#[test]
fn invalid_tolerance_is_rejected() {
    let p = EllipticProblem::new(disk_grid(0.2), order(0.75), DirectionSet::uniform(8).unwrap(), ExteriorData::zero(), |_| 1.0).unwrap();
    for tol in [0.0, -1.0, f64::NAN] {
        let opts = SolverOptions {
            tol: Some(tol),
            ..SolverOptions::default()
        };
        assert!(matches!(solve_elliptic(&p, &opts), Err(Error::InvalidTolerance(_))));
    }
}

#[test]
fn negative_source_gives_nonpositive_radial_solution() {
    let coarse = solve(0.05, 64, ExteriorData::zero(), |_| -1.0, None);
    assert!(coarse.values().iter().all(|v| *v <= 0.0));
    // radial: values at the four axis images of a node agree
    let grid = coarse.grid();
    let at = |p: Vec2| coarse.value_at(grid.nearest_node(p).unwrap());
    for r in [0.2, 0.5, 0.8] {
        let v = at(Vec2::new(r, 0.0));
        for p in [Vec2::new(-r, 0.0), Vec2::new(0.0, r), Vec2::new(0.0, -r)] {
            assert!((at(p) - v).abs() < 1e-9);
        }
    }
    // self-convergence: successive changes of u(0) contract under halving
    let coarsest = center_value(&solve(0.1, 64, ExteriorData::zero(), |_| -1.0, None));
    let fine = center_value(&solve(0.025, 64, ExteriorData::zero(), |_| -1.0, None));
    let c = center_value(&coarse);
    assert!(c < 0.0);
    assert!((c - fine).abs() < 0.6 * (coarsest - c).abs(), "{coarsest} {c} {fine}");
    assert!(((c - fine) / fine).abs() < 0.03, "{c} vs {fine}");
}

#[test]
fn positive_source_gives_nonnegative_solution() {
    let u = solve(0.1, 32, ExteriorData::zero(), |_| 1.0, None);
    assert!(u.values().iter().all(|v| *v >= 0.0));
    assert!(center_value(&u) > 0.0);
}

/// One-dimensional fractional-harmonic extension of `g` from `|t| ≥ 1` to
/// `0`, by the Poisson kernel of the interval.
fn poisson_center(s: f64, g: impl Fn(f64) -> f64) -> f64 {
    let kernel = |y: f64| 2.0 * (PI * s).sin() / PI * g(y) / (y * (y * y - 1.0).powf(s));
    // y = 1 + t^{1/(1−s)} absorbs the (y − 1)^{−s} singularity
    let near = |t: f64| {
        let y = 1.0 + t.powf(1.0 / (1.0 - s));
        2.0 * (PI * s).sin() / PI * g(y) / (y * (y + 1.0).powf(s) * (1.0 - s))
    };
    let near = integrate_pieces(&near, &[0.0, 1.0], 1e-11, 1e-10).unwrap().value;
    let far = integrate_pieces(&|r: f64| kernel(2.0 / r) * 2.0 / (r * r), &[0.0, 1.0], 1e-11, 1e-10).unwrap().value;
    near + far
}

#[test]
fn envelope_of_clipped_quadratic_lies_between_one_and_the_line_bound() {
    let s = 0.75;
    // the Poisson kernel has unit mass
    assert!((poisson_center(s, |_| 1.0) - 1.0).abs() < 1e-8);
    let data = |r2: f64| r2.min(4.0);
    let g = ExteriorData::from_fn(move |y: Vec2| data(y.norm_sq()));
    let opts = SolverOptions {
        tol: Some(1e-9),
        ..SolverOptions::default()
    };
    let dirs = DirectionSet::uniform(64).unwrap();
    let z = s_convex_envelope(disk_grid(0.05), g, order(s), dirs.clone(), &opts).unwrap().field;
    let z0 = center_value(&z);
    // restricted to a line through 0, z is below the 1D harmonic extension
    let line = poisson_center(s, |t| data(t * t));
    // constant 1 is s-convex below g ≥ 1, so z ≥ 1
    assert!(z0 >= 1.0 && z0 <= line, "{z0} vs {line}");
    assert!(z.values().iter().all(|v| *v >= 1.0 - 1e-9));
    assert!(is_s_convex(&z, order(s), &dirs, 1e-8).unwrap().convex);
}

#[test]
fn envelope_of_random_data_is_s_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dirs = DirectionSet::uniform(32).unwrap();
    let opts = SolverOptions {
        tol: Some(1e-9),
        ..SolverOptions::default()
    };
    for _ in 0..5 {
        let g = Smooth::random(&mut rng, 1.0).exterior();
        let z = s_convex_envelope(disk_grid(0.1), g, order(0.75), dirs.clone(), &opts).unwrap().field;
        let check = is_s_convex(&z, order(0.75), &dirs, 1e-8).unwrap();
        assert!(check.convex, "{}", check.min_value);
    }
}

#[test]
fn zero_data_envelope_is_zero() {
    let z = s_convex_envelope(disk_grid(0.1), ExteriorData::zero(), order(0.75), DirectionSet::uniform(16).unwrap(), &SolverOptions::default())
        .unwrap()
        .field;
    assert!(z.sup_norm_interior() == 0.0);
}

#[test]
fn convexity_check_matches_a_direct_scan() {
    let grid = disk_grid(0.1);
    let dirs = DirectionSet::uniform(32).unwrap();
    let affine = Field::from_exterior(grid.clone(), ExteriorData::affine(1.0, Vec2::new(0.5, 2.0)));
    assert!(is_s_convex(&affine, order(0.75), &dirs, 1e-9).unwrap().convex);

    let tent = Field::new(grid.clone(), ExteriorData::zero(), |p| -(1.0 - p.norm_sq()).max(0.0));
    let check = is_s_convex(&tent, order(0.75), &dirs, 1e-9).unwrap();
    let mut expected = Vec::new();
    for &i in grid.interior() {
        let min = (0..dirs.len())
            .map(|m| eval_ray_value(&tent, i, dirs.unit(m), order(0.75)).unwrap())
            .fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            expected.push(i);
        }
    }
    let found: Vec<usize> = check.violations.iter().map(|v| v.0).collect();
    assert_eq!(found, expected);
    assert_eq!(check.convex, expected.is_empty());
}

#[test]
fn comparison_for_ordered_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dirs = DirectionSet::uniform(16).unwrap();
    let opts = SolverOptions {
        tol: Some(1e-11),
        ..SolverOptions::default()
    };
    for _ in 0..10 {
        let g = Smooth::random(&mut rng, 1.0);
        let dg = Smooth::random(&mut rng, 0.5).abs();
        let f = Smooth::random(&mut rng, 2.0);
        let df = Smooth::random(&mut rng, 1.0).abs();
        let grid = disk_grid(0.1);
        let sub = EllipticProblem::new(grid.clone(), order(0.75), dirs.clone(), g.exterior(), |p| f.eval(p)).unwrap();
        let g2 = move |y: Vec2| g.eval(y) + dg(y);
        let sup_ = EllipticProblem::new(grid, order(0.75), dirs.clone(), ExteriorData::from_fn(g2), |p| f.eval(p) + df(p)).unwrap();
        let a = solve_elliptic(&sub, &opts).unwrap().field;
        let b = solve_elliptic(&sup_, &opts).unwrap().field;
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!(*x <= *y + 1e-8, "{x} > {y}");
        }
    }
}

#[test]
fn strong_maximum_principle_for_nonpositive_sources() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..6 {
        let f = Smooth::random(&mut rng, 0.2).abs();
        // a source supported in a small patch off center
        let c = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let src = move |p: Vec2| if trial > 0 && (p - c).norm() < 0.15 { -f(p) } else { 0.0 };
        let u = solve(0.1, 16, ExteriorData::zero(), src, Some(1e-12));
        let interior = u.interior_values();
        if interior.iter().all(|v| *v == 0.0) {
            assert_eq!(trial, 0);
            continue;
        }
        let max = interior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(max < -1e-12, "trial {trial}: {max}");
    }
}

#[test]
fn boundary_barrier_constant_is_stable_under_refinement() {
    let gamma = 0.3;
    let data = move |y: Vec2| (y.x - 0.2).abs().powf(gamma);
    let constants: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&h| {
            let u = solve(h, 32, ExteriorData::from_fn(data), |_| 1.0, None);
            boundary_barrier_constant(&u, gamma).constant
        })
        .collect();
    assert!(constants[0] > 0.0);
    assert!(((constants[1] - constants[0]) / constants[0]).abs() <= 0.2, "{constants:?}");
}

#[test]
fn policy_residuals_do_not_increase() {
    let g = Smooth::random(&mut ChaCha8Rng::seed_from_u64(3), 1.0).exterior();
    let p = EllipticProblem::new(disk_grid(0.05), order(0.75), DirectionSet::uniform(32).unwrap(), g, |p| p.x).unwrap();
    let s = solve_elliptic(&p, &SolverOptions::default()).unwrap();
    let hist = &s.report.residual_history;
    assert!(!hist.is_empty());
    for w in hist.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-12, "{hist:?}");
    }
}

#[test]
fn solution_does_not_depend_on_the_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let grid = disk_grid(0.1);
    let g = Smooth::random(&mut rng, 1.0).exterior();
    let p = EllipticProblem::new(grid.clone(), order(0.75), DirectionSet::uniform(32).unwrap(), g, |p| 1.0 - p.y).unwrap();
    let n = grid.interior_count();
    let sols: Vec<Field> = (0..5)
        .map(|_| {
            let start: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let opts = SolverOptions {
                tol: Some(1e-10),
                start: Some(start),
                ..SolverOptions::default()
            };
            solve_elliptic(&p, &opts).unwrap().field
        })
        .collect();
    for a in &sols {
        for b in &sols {
            assert!(a.sup_distance_interior(b) <= 1e-6);
        }
    }
}

#[test]
fn ellipse_problem_solves() {
    let domain = ConvexDomain::ellipse(Vec2::ZERO, 1.0, 0.5, 0.3).unwrap();
    let grid = Arc::new(build_grid(&domain, 0.05, 4).unwrap());
    let p = EllipticProblem::new(grid, order(0.75), DirectionSet::uniform(32).unwrap(), ExteriorData::zero(), |_| -1.0).unwrap();
    let s = solve_elliptic(&p, &SolverOptions::default()).unwrap();
    assert!(s.report.converged);
    assert!(s.field.values().iter().all(|v| *v <= 0.0));
}
