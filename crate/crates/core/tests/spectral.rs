mod common;

use std::sync::Arc;

use common::{disk_grid, order};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use truncfrac::spectral::{
    enlarged_eigenpair, maximal_eigenpair_from_duality, principal_eigenpair, residual_of, segment_eigenpair_1d, start_bump,
    EigenOptions, ENLARGED_SCALE,
};
use truncfrac::*;

fn eigen(grid: Arc<Grid2>, m: usize, start: Option<Vec<f64>>) -> spectral::EigenPair {
    let opts = EigenOptions {
        start,
        ..EigenOptions::default()
    };
    principal_eigenpair(grid, order(0.75), DirectionSet::uniform(m).unwrap(), &opts).unwrap()
}

#[test]
fn principal_pair_is_certified_and_negative() {
    let grid = disk_grid(0.1);
    let pair = eigen(grid.clone(), 32, None);
    assert!(pair.mu > 0.0);
    assert!(pair.residual <= 1e-3, "{}", pair.residual);
    assert!((pair.phi.sup_norm_interior() - 1.0).abs() < 1e-12);
    let max_interior = pair.phi.interior_values().into_iter().fold(f64::NEG_INFINITY, f64::max);
    assert!(max_interior < -1e-10, "{max_interior}");
    for i in 0..grid.len() {
        if !grid.is_interior(i) {
            assert_eq!(pair.phi.value_at(i), 0.0);
        }
    }
    // the stored residual is the recomputed one
    let again = residual_of(&pair, &DirectionSet::uniform(32).unwrap(), order(0.75)).unwrap();
    assert!((again - pair.residual).abs() < 1e-15);
}

#[test]
fn scaling_the_start_changes_nothing() {
    let grid = disk_grid(0.1);
    let start = start_bump(&grid);
    let doubled: Vec<f64> = start.iter().map(|v| 2.0 * v).collect();
    let a = eigen(grid.clone(), 16, Some(start));
    let b = eigen(grid, 16, Some(doubled));
    assert!((a.mu - b.mu).abs() <= 1e-10 * a.mu);
    assert!(a.phi.sup_distance_interior(&b.phi) <= 1e-10);
}

#[test]
fn invalid_starts_are_rejected() {
    let grid = disk_grid(0.2);
    let n = grid.interior_count();
    let opts = |start: Vec<f64>| EigenOptions {
        start: Some(start),
        ..EigenOptions::default()
    };
    let run = |o: &EigenOptions| principal_eigenpair(grid.clone(), order(0.75), DirectionSet::uniform(8).unwrap(), o);
    assert!(matches!(run(&opts(vec![0.0; n])), Err(Error::DegenerateStart)));
    assert!(run(&opts(vec![1.0; n])).is_err());
    assert!(run(&opts(vec![-1.0; n + 1])).is_err());
}

#[test]
fn maximal_pair_from_duality() {
    let dirs = DirectionSet::uniform(32).unwrap();
    let pair = eigen(disk_grid(0.1), 32, None);
    let dual = maximal_eigenpair_from_duality(&pair, &dirs, order(0.75)).unwrap();
    assert_eq!(dual.mu, pair.mu);
    assert!(dual.maximal);
    assert!((dual.residual - pair.residual).abs() <= 1e-12);
    let interior = dual.phi.interior_values();
    assert!(interior.iter().all(|v| *v > 0.0));
    assert!(dual.phi.values().iter().all(|v| *v >= 0.0));
}

#[test]
fn doubling_the_disk_scales_the_eigenvalue() {
    let small = eigen(disk_grid(0.1), 32, None);
    let domain = ConvexDomain::ball(Vec2::ZERO, 2.0).unwrap();
    let big = eigen(Arc::new(build_grid(&domain, 0.1, 4).unwrap()), 32, None);
    let ratio = big.mu / small.mu;
    let expected = 2f64.powf(-1.5);
    assert!(((ratio - expected) / expected).abs() <= 0.05, "{ratio} vs {expected}");
}

#[test]
fn enlarged_domain_has_smaller_eigenvalue() {
    let base = eigen(disk_grid(0.1), 16, None);
    let big = enlarged_eigenpair(&ConvexDomain::unit_ball(), 0.1, ENLARGED_SCALE, order(0.75), DirectionSet::uniform(16).unwrap(), &EigenOptions::default())
        .unwrap();
    assert!(big.mu < base.mu);
    assert!(big.phi.grid().domain().max_semi_axis() == ENLARGED_SCALE);
}

#[test]
fn random_starts_reach_the_same_pair() {
    let grid = disk_grid(0.1);
    let n = grid.interior_count();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let opts_tol = EigenOptions::default().tol;
    let pairs: Vec<_> = (0..5)
        .map(|_| {
            let start: Vec<f64> = (0..n).map(|_| -rng.gen_range(0.0..1.0)).collect();
            eigen(grid.clone(), 16, Some(start))
        })
        .collect();
    for a in &pairs {
        for b in &pairs {
            assert!((a.mu - b.mu).abs() <= opts_tol * a.mu, "{} {}", a.mu, b.mu);
            assert!(a.phi.sup_distance_interior(&b.phi) <= 1e-4);
        }
    }
}

#[test]
fn eigenvalue_trace_settles() {
    let pair = eigen(disk_grid(0.1), 16, None);
    let t = &pair.trace;
    assert!(t.len() >= 6, "{t:?}");
    let diffs: Vec<f64> = t.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for w in diffs[diffs.len() - 5..].windows(2) {
        assert!(w[1] <= w[0], "{diffs:?}");
    }
}

#[test]
fn ellipse_pair_is_negative_inside() {
    let domain = ConvexDomain::ellipse(Vec2::new(0.1, -0.2), 1.0, 0.6, 0.4).unwrap();
    let pair = eigen(Arc::new(build_grid(&domain, 0.08, 4).unwrap()), 16, None);
    assert!(pair.residual <= 1e-3);
    assert!(pair.phi.interior_values().iter().all(|v| *v < 0.0));
}

#[test]
fn segment_scaling_symmetry_and_refinement() {
    let s = order(0.75);
    let one = segment_eigenpair_1d(1.0, s, 0.05, 1e-10).unwrap();
    let two = segment_eigenpair_1d(2.0, s, 0.05, 1e-10).unwrap();
    let expected = 2f64.powf(-1.5);
    let ratio = two.mu / one.mu;
    assert!(((ratio - expected) / expected).abs() <= 0.02, "{ratio}");

    let n = one.phi.len();
    for i in 0..n {
        assert!((one.phi[i] - one.phi[n - 1 - i]).abs() <= 1e-6);
        assert!(one.phi[i] > 0.0);
    }

    let fine = segment_eigenpair_1d(1.0, s, 0.025, 1e-10).unwrap();
    assert!(((one.mu - fine.mu) / fine.mu).abs() <= 0.01, "{} vs {}", one.mu, fine.mu);
}

#[test]
fn segment_interpolant_vanishes_outside() {
    let pair = segment_eigenpair_1d(1.0, order(0.6), 0.1, 1e-10).unwrap();
    assert_eq!(pair.eval(1.0), 0.0);
    assert_eq!(pair.eval(-1.5), 0.0);
    assert!((pair.eval(0.0) - 1.0).abs() < 1e-12);
    assert!(pair.eval(0.95) > 0.0 && pair.eval(0.95) < pair.eval(0.9));
}
