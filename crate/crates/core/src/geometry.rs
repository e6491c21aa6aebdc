//! Planar strictly convex domains, Cartesian grids and the unit-ball
//! quantities used by the boundary barriers.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of boundary samples used by the inner-ball and convexity checks.
pub const BOUNDARY_SAMPLES: usize = 360;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2 { x: c, y: s }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Ball,
    Ellipse,
}

/// A ball or an ellipse. Serialized as `{kind, center, a, b, rotation}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexDomain {
    pub kind: DomainKind,
    pub center: [f64; 2],
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub rotation: f64,
}

impl ConvexDomain {
    pub fn ball(center: Vec2, radius: f64) -> Result<Self> {
        let d = ConvexDomain {
            kind: DomainKind::Ball,
            center: [center.x, center.y],
            a: radius,
            b: radius,
            rotation: 0.0,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_ball() -> Self {
        ConvexDomain::ball(Vec2::ZERO, 1.0).expect("unit ball is valid")
    }

    pub fn ellipse(center: Vec2, a: f64, b: f64, rotation: f64) -> Result<Self> {
        let d = ConvexDomain {
            kind: DomainKind::Ellipse,
            center: [center.x, center.y],
            a,
            b,
            rotation,
        };
        d.validate()?;
        Ok(d)
    }

    /// Checks the invariants; needed after deserialization.
    pub fn validate(&self) -> Result<()> {
        let finite = self.a.is_finite()
            && self.b.is_finite()
            && self.rotation.is_finite()
            && self.center.iter().all(|c| c.is_finite());
        if !finite {
            return Err(Error::InvalidDomain("non-finite parameter".into()));
        }
        if !(self.b > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "semi-axes must be positive, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if self.a < self.b {
            return Err(Error::InvalidDomain(format!(
                "expected a >= b, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if self.kind == DomainKind::Ball && self.a != self.b {
            return Err(Error::InvalidDomain("a ball needs a == b".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.center[0], self.center[1])
    }

    pub fn max_semi_axis(&self) -> f64 {
        self.a
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.a
    }

    fn to_local(&self, p: Vec2) -> Vec2 {
        (p - self.center()).rotate(-self.rotation)
    }

    fn to_global(&self, q: Vec2) -> Vec2 {
        q.rotate(self.rotation) + self.center()
    }

    /// `(x/a)² + (y/b)²` in the domain frame; `< 1` inside.
    pub fn level(&self, p: Vec2) -> f64 {
        let q = self.to_local(p);
        (q.x / self.a).powi(2) + (q.y / self.b).powi(2)
    }

    /// Membership in the open domain.
    pub fn contains(&self, p: Vec2) -> bool {
        self.level(p) < 1.0
    }

    pub fn boundary_point(&self, t: f64) -> Vec2 {
        self.to_global(Vec2::new(self.a * t.cos(), self.b * t.sin()))
    }

    pub fn outward_normal(&self, t: f64) -> Vec2 {
        Vec2::new(t.cos() / self.a, t.sin() / self.b)
            .normalized()
            .rotate(self.rotation)
    }

    /// Radius `R` with `Ω = ⋂_z B_R(z − Rν(z))`: the largest radius of
    /// curvature of the boundary, `a²/b` (`R = a` for a ball).
    pub fn inner_ball_radius(&self) -> f64 {
        self.a * self.a / self.b
    }

    /// Largest amount by which a sampled boundary point escapes a sampled
    /// supporting ball `B_R(z − Rν(z))`; `≤ 0` means every ball contains
    /// the sampled boundary (hence, by convexity, the domain).
    pub fn inner_ball_excess(&self, radius: f64, samples: usize) -> f64 {
        let pts: Vec<(Vec2, Vec2)> = (0..samples)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / samples as f64;
                (self.boundary_point(t), self.outward_normal(t))
            })
            .collect();
        let mut worst = f64::NEG_INFINITY;
        for &(z, nu) in &pts {
            let c = z - nu * radius;
            for &(w, _) in &pts {
                worst = worst.max((w - c).norm() - radius);
            }
        }
        worst
    }

    /// Closest boundary point to `p` (any `p`).
    pub fn nearest_boundary_point(&self, p: Vec2) -> Vec2 {
        let q = self.to_local(p);
        if self.kind == DomainKind::Ball || self.a == self.b {
            let r = q.norm();
            let dir = if r > 0.0 { q * (1.0 / r) } else { Vec2::new(1.0, 0.0) };
            return self.to_global(dir * self.a);
        }
        let dist2 = |t: f64| {
            let (s, c) = t.sin_cos();
            (self.a * c - q.x).powi(2) + (self.b * s - q.y).powi(2)
        };
        let n = 720;
        let step = 2.0 * PI / n as f64;
        let (mut best_t, mut best) = (0.0, f64::INFINITY);
        for i in 0..n {
            let t = i as f64 * step;
            let v = dist2(t);
            if v < best {
                best = v;
                best_t = t;
            }
        }
        // golden-section refinement inside the bracketing cells
        let (mut lo, mut hi) = (best_t - step, best_t + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (dist2(x1), dist2(x2));
        for _ in 0..80 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = dist2(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = dist2(x2);
            }
        }
        let t = 0.5 * (lo + hi);
        self.boundary_point(t)
    }

    pub fn distance_to_boundary(&self, p: Vec2) -> f64 {
        (p - self.nearest_boundary_point(p)).norm()
    }

    /// Concentric copy scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let d = ConvexDomain {
            a: self.a * factor,
            b: self.b * factor,
            ..self.clone()
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Exterior,
}

/// Uniform node lattice on the square `center + [−L, L]²`.
///
/// Nodes sit at `center + (i − N, j − N)·h` for `0 ≤ i, j ≤ 2N`, so the
/// domain center is always a node and grids built with the same spacing
/// and center are nested.
#[derive(Clone, Debug)]
pub struct Grid2 {
    domain: ConvexDomain,
    h: f64,
    half_cells: usize,
    side: usize,
    classes: Vec<NodeClass>,
    interior: Vec<usize>,
    interior_of: Vec<usize>,
}

pub const NOT_INTERIOR: usize = usize::MAX;

/// Builds the grid with half-width `L = max-semi-axis + pad·h` (rounded up
/// to a whole number of cells) and classifies every node.
pub fn build_grid(domain: &ConvexDomain, h: f64, pad: usize) -> Result<Grid2> {
    domain.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param("h", format!("spacing must be positive, got {h}")));
    }
    if pad < 4 {
        return Err(Error::param("pad", format!("need at least 4 cells, got {pad}")));
    }
    let half_width = domain.max_semi_axis() + pad as f64 * h;
    let half_cells = (half_width / h - 1e-9).ceil() as usize;
    let side = 2 * half_cells + 1;
    let mut grid = Grid2 {
        domain: domain.clone(),
        h,
        half_cells,
        side,
        classes: Vec::with_capacity(side * side),
        interior: Vec::new(),
        interior_of: vec![NOT_INTERIOR; side * side],
    };
    for idx in 0..side * side {
        let class = if domain.contains(grid.node(idx)) {
            grid.interior_of[idx] = grid.interior.len();
            grid.interior.push(idx);
            NodeClass::Interior
        } else {
            NodeClass::Exterior
        };
        grid.classes.push(class);
    }
    // A spacing wider than the domain's narrowest width resolves nothing
    // but the center node.
    if grid.interior.is_empty() || h > 2.0 * domain.b {
        return Err(Error::NoInteriorNodes { h });
    }
    Ok(grid)
}

impl Grid2 {
    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// `L`, the half-width of the box.
    pub fn half_width(&self) -> f64 {
        self.half_cells as f64 * self.h
    }

    pub fn half_cells(&self) -> usize {
        self.half_cells
    }

    /// Nodes per side.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.side * self.side
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.side + i
    }

    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.side, idx / self.side)
    }

    /// Lower-left corner of the box.
    pub fn origin(&self) -> Vec2 {
        let l = self.half_width();
        self.domain.center() - Vec2::new(l, l)
    }

    pub fn node(&self, idx: usize) -> Vec2 {
        let (i, j) = self.ij(idx);
        let n = self.half_cells as f64;
        self.domain.center() + Vec2::new((i as f64 - n) * self.h, (j as f64 - n) * self.h)
    }

    pub fn class(&self, idx: usize) -> NodeClass {
        self.classes[idx]
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.classes[idx] == NodeClass::Interior
    }

    /// Node indices of the interior nodes, in row-major order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    /// Position in [`Grid2::interior`] of node `idx`, or [`NOT_INTERIOR`].
    pub fn interior_position(&self, idx: usize) -> usize {
        self.interior_of[idx]
    }

    /// Node nearest to `p`, if `p` lies in the box.
    pub fn nearest_node(&self, p: Vec2) -> Option<usize> {
        let o = self.origin();
        let gi = ((p.x - o.x) / self.h).round();
        let gj = ((p.y - o.y) / self.h).round();
        let max = (self.side - 1) as f64;
        if gi < 0.0 || gj < 0.0 || gi > max || gj > max {
            return None;
        }
        Some(self.index(gi as usize, gj as usize))
    }

    /// Interior node with the largest distance to the boundary.
    pub fn deepest_interior_node(&self) -> usize {
        let mut best = (self.interior[0], f64::NEG_INFINITY);
        for &idx in &self.interior {
            let d = self.domain.distance_to_boundary(self.node(idx));
            if d > best.1 + 1e-14 {
                best = (idx, d);
            }
        }
        best.0
    }
}

/// Unit-ball quantities along the line `x + tθ` used by the `d(x)^γ` barrier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierGeom {
    pub x: Vec2,
    pub theta: Vec2,
    /// `(1 − |x|²)₊`
    pub d: f64,
    /// `⟨x, θ⟩/|x|`, taken as 0 at the origin
    pub mu: f64,
    pub t0: f64,
    pub t1: f64,
}

impl BarrierGeom {
    /// `t² + 2⟨x,θ⟩t − d(x)`, whose roots are `t0 < 0 < t1`.
    pub fn p(&self, t: f64) -> f64 {
        t * t + 2.0 * self.x.dot(self.theta) * t - self.d
    }
}

pub fn barrier_geom(x: Vec2, theta: Vec2) -> Result<BarrierGeom> {
    let r2 = x.norm_sq();
    if !(r2 < 1.0) {
        return Err(Error::OutsideUnitBall { x: x.x, y: x.y });
    }
    let nt = theta.norm();
    if (nt - 1.0).abs() > 1e-12 {
        return Err(Error::param("theta", format!("must be a unit vector, |θ| = {nt}")));
    }
    let d = 1.0 - r2;
    let b = x.dot(theta);
    let r = r2.sqrt();
    let mu = if r > 0.0 { b / r } else { 0.0 };
    let disc = (d + b * b).sqrt();
    // larger-magnitude root first, then the other from the product t0·t1 = −d
    let big = if b >= 0.0 { -b - disc } else { -b + disc };
    let small = -d / big;
    let (t0, t1) = if big < 0.0 { (big, small) } else { (small, big) };
    Ok(BarrierGeom {
        x,
        theta,
        d,
        mu,
        t0,
        t1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ball_grid_matches_definition() {
        let d = ConvexDomain::unit_ball();
        let g = build_grid(&d, 0.1, 4).unwrap();
        assert!((g.half_width() - 1.4).abs() < 1e-12);
        assert_eq!(g.side(), 29);
        for idx in 0..g.len() {
            let p = g.node(idx);
            assert_eq!(g.is_interior(idx), p.norm_sq() < 1.0);
        }
        // center node exists and is interior
        let c = g.nearest_node(Vec2::ZERO).unwrap();
        assert!(g.node(c).norm() < 1e-12);
        assert!(g.is_interior(c));
    }

    #[test]
    fn boundary_nodes_are_exterior() {
        let d = ConvexDomain::unit_ball();
        let g = build_grid(&d, 0.1, 4).unwrap();
        let on_boundary = g.nearest_node(Vec2::new(1.0, 0.0)).unwrap();
        assert!(!g.is_interior(on_boundary));
    }

    #[test]
    fn wide_spacing_has_no_interior() {
        let d = ConvexDomain::unit_ball();
        assert!(matches!(build_grid(&d, 3.0, 4), Err(Error::NoInteriorNodes { .. })));
    }

    #[test]
    fn small_pad_rejected() {
        let d = ConvexDomain::unit_ball();
        assert!(build_grid(&d, 0.1, 3).is_err());
    }

    #[test]
    fn ellipse_count_matches_scan() {
        let d = ConvexDomain::ellipse(Vec2::ZERO, 1.0, 0.5, 0.0).unwrap();
        let h = 0.05;
        let g = build_grid(&d, h, 4).unwrap();
        let n = g.half_cells() as i64;
        let mut count = 0;
        for j in -n..=n {
            for i in -n..=n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                if x * x + 4.0 * y * y < 1.0 {
                    count += 1;
                }
            }
        }
        assert_eq!(g.interior_count(), count);
    }

    #[test]
    fn inner_ball_radius_examples() {
        assert_eq!(ConvexDomain::unit_ball().inner_ball_radius(), 1.0);
        let e = ConvexDomain::ellipse(Vec2::ZERO, 2.0, 2.0, 0.0).unwrap();
        assert_eq!(e.inner_ball_radius(), 2.0);
        let e = ConvexDomain::ellipse(Vec2::ZERO, 1.0, 0.5, 0.3).unwrap();
        assert!((e.inner_ball_radius() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn inner_balls_contain_domain() {
        for d in [
            ConvexDomain::unit_ball(),
            ConvexDomain::ellipse(Vec2::new(0.3, -0.2), 1.0, 0.5, 0.7).unwrap(),
            ConvexDomain::ellipse(Vec2::ZERO, 1.5, 1.2, 0.0).unwrap(),
        ] {
            let r = d.inner_ball_radius();
            assert!(d.inner_ball_excess(r, BOUNDARY_SAMPLES) <= 1e-12);
            // any smaller radius fails
            assert!(d.inner_ball_excess(0.95 * r, BOUNDARY_SAMPLES) > 0.0);
        }
    }

    #[test]
    fn ellipse_distance() {
        let e = ConvexDomain::ellipse(Vec2::ZERO, 1.0, 0.5, 0.0).unwrap();
        assert!((e.distance_to_boundary(Vec2::ZERO) - 0.5).abs() < 1e-10);
        assert!((e.distance_to_boundary(Vec2::new(0.9, 0.0)) - 0.1).abs() < 1e-10);
        let rotated = ConvexDomain::ellipse(Vec2::new(1.0, 1.0), 1.0, 0.5, PI / 2.0).unwrap();
        assert!((rotated.distance_to_boundary(Vec2::new(1.0, 1.8)) - 0.2).abs() < 1e-10);
    }

    #[test]
    fn barrier_geom_examples() {
        let g = barrier_geom(Vec2::ZERO, Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!((g.d, g.t0, g.t1), (1.0, -1.0, 1.0));

        let g = barrier_geom(Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert!((g.t0 + 1.5).abs() < 1e-14);
        assert!((g.t1 - 0.5).abs() < 1e-14);
        assert!((g.t0 * g.t1 + 0.75).abs() < 1e-14);

        let g = barrier_geom(Vec2::new(0.5, 0.0), Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!(g.mu, 0.0);
        assert!((g.t1 - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((g.t0 + g.t1).abs() < 1e-15);
    }

    #[test]
    fn barrier_geom_rejects_outside() {
        assert!(matches!(
            barrier_geom(Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)),
            Err(Error::OutsideUnitBall { .. })
        ));
    }

    #[test]
    fn domain_round_trips_through_serde_shape() {
        let d = ConvexDomain::ellipse(Vec2::new(0.1, 0.2), 1.0, 0.5, 0.25).unwrap();
        assert_eq!(d.kind, DomainKind::Ellipse);
        assert_eq!(d.center, [0.1, 0.2]);
    }
}
