#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use truncfrac::{build_grid, ConvexDomain, ExteriorData, FracOrder, Grid2, Vec2};

pub fn disk_grid(h: f64) -> Arc<Grid2> {
    Arc::new(build_grid(&ConvexDomain::unit_ball(), h, 4).unwrap())
}

pub fn order(s: f64) -> FracOrder {
    FracOrder::new(s).unwrap()
}

/// A random smooth function `c0 + c·y + a sin(k·y + φ)` as plain data.
#[derive(Clone, Copy, Debug)]
pub struct Smooth {
    c0: f64,
    c: Vec2,
    a: f64,
    k: Vec2,
    phase: f64,
}

impl Smooth {
    pub fn random<R: Rng>(rng: &mut R, scale: f64) -> Self {
        Smooth {
            c0: scale * rng.gen_range(-1.0..1.0),
            c: Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale,
            a: scale * rng.gen_range(-1.0..1.0),
            k: Vec2::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)),
            phase: rng.gen_range(0.0..6.3),
        }
    }

    pub fn eval(&self, y: Vec2) -> f64 {
        self.c0 + self.c.dot(y) + self.a * (self.k.dot(y) + self.phase).sin()
    }

    /// Nonnegative variant `|·|`.
    pub fn abs(self) -> impl Fn(Vec2) -> f64 + Clone + Send + Sync + 'static {
        move |y| self.eval(y).abs()
    }

    pub fn exterior(self) -> ExteriorData {
        ExteriorData::from_fn(move |y| self.eval(y))
    }
}

pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
