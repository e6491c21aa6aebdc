mod common;

use std::sync::Arc;

use common::{disk_grid, order, Smooth};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use truncfrac::elliptic::{solve_elliptic, EllipticProblem, SolverOptions};
use truncfrac::parabolic::{cfl_step, evolve, step, EvolveOptions, ParabolicProblem, TraceNorm};
use truncfrac::*;

fn scheme(h: f64, m: usize, g: ExteriorData) -> Arc<RayScheme> {
    Arc::new(RayScheme::new(disk_grid(h), order(0.75), DirectionSet::uniform(m).unwrap(), g).unwrap())
}

fn bump(center: Vec2, radius: f64, height: f64) -> impl Fn(Vec2) -> f64 {
    move |p| height * (1.0 - (p - center).norm_sq() / (radius * radius)).max(0.0).powi(2)
}

#[test]
fn time_step_scales_like_h_to_the_two_s() {
    let coarse = cfl_step(&scheme(0.1, 16, ExteriorData::zero()));
    let fine = cfl_step(&scheme(0.05, 16, ExteriorData::zero()));
    let expected = 2f64.powf(-1.5);
    let ratio = fine / coarse;
    assert!(((ratio - expected) / expected).abs() <= 0.1, "{ratio} vs {expected}");
}

#[test]
fn zero_data_stays_zero() {
    let s = scheme(0.1, 16, ExteriorData::zero());
    let u0 = Field::zeros(s.grid().clone());
    let trace = evolve(&ParabolicProblem::new(s, &u0, 0.5).unwrap(), &EvolveOptions::default()).unwrap();
    assert!(trace.sup_norm.iter().all(|v| *v == 0.0));
}

#[test]
fn affine_state_is_steady() {
    let g = ExteriorData::affine(-0.4, Vec2::new(0.7, 1.9));
    let s = scheme(0.05, 64, g.clone());
    let u = Field::from_exterior(s.grid().clone(), g);
    let v = step(&s, &u, cfl_step(&s)).unwrap();
    assert!(u.sup_distance_interior(&v) < 1e-8);
}

#[test]
fn single_step_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let s = scheme(0.1, 32, Smooth::random(&mut rng, 1.0).exterior());
    let dt = cfl_step(&s);
    for _ in 0..20 {
        let a = Smooth::random(&mut rng, 1.0);
        let d = Smooth::random(&mut rng, 0.5).abs();
        let u = Field::new(s.grid().clone(), s.exterior().clone(), |p| a.eval(p));
        let v = Field::new(s.grid().clone(), s.exterior().clone(), |p| a.eval(p) + d(p));
        let (u1, v1) = (step(&s, &u, dt).unwrap(), step(&s, &v, dt).unwrap());
        for (x, y) in u1.values().iter().zip(v1.values()) {
            assert!(x <= y, "{x} > {y}");
        }
    }
}

#[test]
fn ordered_data_stay_ordered_in_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..5 {
        let g = Smooth::random(&mut rng, 1.0);
        let dg = Smooth::random(&mut rng, 0.3).abs();
        let a = Smooth::random(&mut rng, 1.0);
        let d = Smooth::random(&mut rng, 0.5).abs();
        let low = scheme(0.1, 16, g.exterior());
        let high = scheme(0.1, 16, ExteriorData::from_fn(move |y| g.eval(y) + dg(y)));
        let u0 = Field::new(low.grid().clone(), low.exterior().clone(), |p| a.eval(p));
        let v0 = Field::new(high.grid().clone(), high.exterior().clone(), |p| a.eval(p) + d(p));
        let dt = cfl_step(&low).min(cfl_step(&high));
        let (mut u, mut v) = (u0, v0);
        for _ in 0..40 {
            u = step(&low, &u, dt).unwrap();
            v = step(&high, &v, dt).unwrap();
            for (x, y) in u.values().iter().zip(v.values()) {
                assert!(*x <= *y + 1e-10);
            }
        }
    }
}

#[test]
fn sup_norm_is_bounded_by_the_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    // bounded exterior data, |g| ≤ 0.8
    let s = scheme(0.1, 16, ExteriorData::from_fn(|y: Vec2| 0.8 * (2.0 * y.x + y.y).sin()));
    let a = Smooth::random(&mut rng, 2.0);
    let u0 = Field::new(s.grid().clone(), s.exterior().clone(), |p| a.eval(p));
    let bound = u0.sup_norm_interior().max(0.8);
    let dt = cfl_step(&s);
    let mut u = u0;
    for _ in 0..60 {
        u = step(&s, &u, dt).unwrap();
        assert!(u.sup_norm_interior() <= bound + 1e-12);
    }
}

#[test]
fn nonpositive_start_stays_nonpositive() {
    let s = scheme(0.1, 32, ExteriorData::zero());
    let u0 = Field::new(s.grid().clone(), ExteriorData::zero(), bump(Vec2::new(0.2, -0.1), 0.5, -1.0));
    let trace = evolve(
        &ParabolicProblem::new(s, &u0, 1.0).unwrap(),
        &EvolveOptions {
            snapshot_times: (0..10).map(|k| 0.1 * k as f64).collect(),
            ..EvolveOptions::default()
        },
    )
    .unwrap();
    for (_, snap) in &trace.snapshots {
        assert!(snap.values().iter().all(|v| *v <= 0.0));
    }
    assert!(trace.final_field.values().iter().all(|v| *v <= 0.0));
}

#[test]
fn decaying_trace_is_eventually_monotone() {
    let s = scheme(0.1, 32, ExteriorData::zero());
    let u0 = Field::new(s.grid().clone(), ExteriorData::zero(), bump(Vec2::ZERO, 0.6, -1.0));
    let trace = evolve(&ParabolicProblem::new(s, &u0, 1.0).unwrap(), &EvolveOptions::default()).unwrap();
    assert!(trace.times.windows(2).all(|w| w[0] < w[1]));
    let half = trace.sup_norm.len() / 2;
    for w in trace.sup_norm[half..].windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn evolution_converges_to_the_elliptic_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let g = Smooth::random(&mut rng, 1.0).exterior();
    let s = scheme(0.1, 16, g);
    let problem = EllipticProblem::from_scheme(s.clone(), vec![0.0; s.grid().interior_count()]).unwrap();
    let z = solve_elliptic(
        &problem,
        &SolverOptions {
            tol: Some(1e-12),
            ..SolverOptions::default()
        },
    )
    .unwrap()
    .field;
    let u0 = Field::new(s.grid().clone(), s.exterior().clone(), |p| (3.0 * p.x).sin());
    let trace = evolve(
        &ParabolicProblem::new(s, &u0, 6.0).unwrap(),
        &EvolveOptions {
            reference: Some(z.interior_values()),
            stop_below: Some(1e-5),
            ..EvolveOptions::default()
        },
    )
    .unwrap();
    assert!(trace.stopped_at.is_some(), "{:?}", trace.sup_norm.last());
    assert!(trace.final_field.sup_distance_interior(&z) < 1e-4);
}

#[test]
fn positive_part_vanishes_in_finite_time_for_affine_data() {
    let g = ExteriorData::affine(0.5, Vec2::new(1.0, -0.5));
    let s = scheme(0.1, 32, g.clone());
    let hump = bump(Vec2::new(-0.1, 0.2), 0.5, 1.0);
    let gg = g.clone();
    let u0 = Field::new(s.grid().clone(), g.clone(), move |p| gg.eval(p) + hump(p));
    let z: Vec<f64> = s.grid().interior().iter().map(|&i| g.eval(s.grid().node(i))).collect();
    let trace = evolve(
        &ParabolicProblem::new(s, &u0, 5.0).unwrap(),
        &EvolveOptions {
            reference: Some(z),
            norm: TraceNorm::PositivePart,
            stop_below: Some(1e-6),
            sample_every: 1,
            ..EvolveOptions::default()
        },
    )
    .unwrap();
    let t = trace.stopped_at.expect("positive part never fell below 1e-6");
    assert!(t > 0.0 && t < 5.0);
}

#[test]
fn oversized_step_is_rejected() {
    let s = scheme(0.2, 8, ExteriorData::zero());
    let u0 = Field::zeros(s.grid().clone());
    let p = ParabolicProblem::new(s.clone(), &u0, 1.0).unwrap();
    let opts = EvolveOptions {
        dt: Some(2.0 * cfl_step(&s)),
        ..EvolveOptions::default()
    };
    assert!(matches!(evolve(&p, &opts), Err(Error::CflViolation { .. })));
}
