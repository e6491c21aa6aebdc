//! The extremal operators `Λ₁ˢu = inf_θ I_θ u` and `Λ_Nˢu = sup_θ I_θ u`
//! on grid fields.
//!
//! Samples `x ± k h θ` are read by bilinear interpolation inside the grid
//! box and from the exterior data outside it; beyond `T = K h` the tail
//! rule takes over. Every coefficient on a non-center value is nonnegative,
//! so the discrete operator is monotone.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{ExteriorData, Field};
use crate::geometry::{Grid2, Vec2};
use crate::linalg::CsrMatrix;
use crate::quadrature::{make_weights, tail_exterior_part, FracOrder, RayQuadrature};

pub const DEFAULT_DIRECTIONS: usize = 64;

/// `M` angles evenly spaced in `[0, π)`; `θ` and `−θ` give the same
/// symmetrized integral, so half a circle is enough.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    angles: Vec<f64>,
    units: Vec<Vec2>,
}

impl DirectionSet {
    pub fn uniform(count: usize) -> Result<Self> {
        if count < 8 {
            return Err(Error::param("directions", format!("need at least 8, got {count}")));
        }
        let angles: Vec<f64> = (0..count).map(|i| PI * i as f64 / count as f64).collect();
        let units = angles.iter().map(|&a| Vec2::from_angle(a)).collect();
        Ok(DirectionSet { angles, units })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angle(&self, m: usize) -> f64 {
        self.angles[m]
    }

    pub fn unit(&self, m: usize) -> Vec2 {
        self.units[m]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// Per-interior-node operator values and the optimal direction index.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorEval {
    /// `Λ₁ˢu` (or `Λ_Nˢu` for [`apply_lambda_n`]) in interior order.
    pub values: Vec<f64>,
    /// argmin (argmax) direction index; ties go to the smallest index.
    pub arg: Vec<usize>,
    /// `Λ_Nˢu`, filled by [`RayScheme::apply_extremal`].
    pub maximal: Option<Vec<f64>>,
}

/// Number of ray samples so that `T = K h_r` covers the domain diameter:
/// beyond that distance every point is exterior.
fn ray_count(grid: &Grid2, ray_spacing: f64) -> usize {
    (grid.domain().diameter() / ray_spacing).ceil() as usize + 1
}

/// Offset of the `k`-th ray sample in grid units: the lower-left corner of
/// its cell relative to the ray's base node, and the bilinear fractions.
/// Nodes sit on integer coordinates, so this does not depend on the node.
#[derive(Clone, Copy, Debug)]
struct Tap {
    di: i64,
    dj: i64,
    fx: f64,
    fy: f64,
}

impl Tap {
    fn new(gx: f64, gy: f64) -> Self {
        // Snap roundoff-level fractions (cos(π/2) ≠ 0 in floating point) so
        // samples on grid lines read exactly the nodes on those lines.
        let split = |g: f64| {
            let r = g.round();
            if (g - r).abs() < 1e-12 {
                (r as i64, 0.0)
            } else {
                let f = g.floor();
                (f as i64, g - f)
            }
        };
        let (di, fx) = split(gx);
        let (dj, fy) = split(gy);
        Tap { di, dj, fx, fy }
    }

    fn in_box(&self, i0: i64, j0: i64, last_cell: i64) -> bool {
        let (ci, cj) = (i0 + self.di, j0 + self.dj);
        ci >= 0 && cj >= 0 && ci <= last_cell && cj <= last_cell
    }

    #[inline]
    fn offset(&self, side: usize) -> isize {
        (self.dj * side as i64 + self.di) as isize
    }

    #[inline]
    fn read(&self, values: &[f64], base: usize, side: usize) -> f64 {
        let b = (base as isize + self.offset(side)) as usize;
        let (fx, fy) = (self.fx, self.fy);
        (1.0 - fy) * ((1.0 - fx) * values[b] + fx * values[b + 1])
            + fy * ((1.0 - fx) * values[b + side] + fx * values[b + side + 1])
    }
}

/// The discretized family `{I_θ}` on a grid for fixed order, directions and
/// exterior data. Contributions that only ever read exterior data (samples
/// past the last cell touching an interior node, and the tail) are folded
/// into one constant per (node, direction) at construction.
#[derive(Clone, Debug)]
pub struct RayScheme {
    grid: Arc<Grid2>,
    order: FracOrder,
    dirs: DirectionSet,
    quad: RayQuadrature,
    exterior: ExteriorData,
    ray_ratio: f64,
    node_values_ext: Vec<f64>,
    /// `taps[(2m + side) K + k − 1]`, side 0 along `+θ`, 1 along `−θ`.
    taps: Vec<Tap>,
    fixed: Vec<f64>,
    spans: Vec<[u32; 2]>,
}

impl RayScheme {
    pub fn new(grid: Arc<Grid2>, order: FracOrder, dirs: DirectionSet, exterior: ExteriorData) -> Result<Self> {
        Self::with_ray_spacing(grid, order, dirs, exterior, 1.0)
    }

    /// `h_r = ratio · h`.
    pub fn with_ray_spacing(
        grid: Arc<Grid2>,
        order: FracOrder,
        dirs: DirectionSet,
        exterior: ExteriorData,
        ratio: f64,
    ) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::param("ray_ratio", format!("must be positive, got {ratio}")));
        }
        let h_r = ratio * grid.spacing();
        let quad = make_weights(order, h_r, ray_count(&grid, h_r))?;
        let node_values_ext: Vec<f64> = (0..grid.len())
            .map(|idx| if grid.is_interior(idx) { 0.0 } else { exterior.eval(grid.node(idx)) })
            .collect();
        let count = quad.count();
        let mut taps = Vec::with_capacity(dirs.len() * 2 * count);
        for m in 0..dirs.len() {
            let theta = dirs.unit(m);
            for sign in [1.0f64, -1.0] {
                for k in 1..=count {
                    let step = sign * ratio * k as f64;
                    taps.push(Tap::new(step * theta.x, step * theta.y));
                }
            }
        }
        let mut scheme = RayScheme {
            grid,
            order,
            dirs,
            quad,
            exterior,
            ray_ratio: ratio,
            node_values_ext,
            taps,
            fixed: Vec::new(),
            spans: Vec::new(),
        };
        scheme.precompute();
        Ok(scheme)
    }

    #[inline]
    fn taps_for(&self, m: usize, side: usize) -> &[Tap] {
        let k = self.quad.count();
        let start = (2 * m + side) * k;
        &self.taps[start..start + k]
    }

    fn precompute(&mut self) {
        let grid = &self.grid;
        let side = grid.side();
        let last_cell = side as i64 - 2;
        let m_count = self.dirs.len();
        let n = grid.interior_count();
        let w = self.quad.weights();
        let t = self.quad.truncation();
        let h_r = self.quad.spacing();
        let mut fixed = vec![0.0; n * m_count];
        let mut spans = vec![[0u32; 2]; n * m_count];
        for (pos, &idx) in grid.interior().iter().enumerate() {
            let (i0, j0) = grid.ij(idx);
            let (i0, j0) = (i0 as i64, j0 as i64);
            let x = grid.node(idx);
            for m in 0..m_count {
                let theta = self.dirs.unit(m);
                let mut acc = 0.0;
                for (s, sign) in [1.0f64, -1.0].into_iter().enumerate() {
                    let taps = self.taps_for(m, s);
                    // samples whose cell lies in the box, in ray order
                    let inside = taps
                        .iter()
                        .take_while(|tp| tp.in_box(i0, j0, last_cell))
                        .count();
                    let mut last = 0usize;
                    for (k, tp) in taps[..inside].iter().enumerate() {
                        let b = (idx as isize + tp.offset(side)) as usize;
                        if grid.is_interior(b)
                            || grid.is_interior(b + 1)
                            || grid.is_interior(b + side)
                            || grid.is_interior(b + side + 1)
                        {
                            last = k + 1;
                        }
                    }
                    spans[pos * m_count + m][s] = last as u32;
                    if self.exterior.is_zero() {
                        continue;
                    }
                    for k in last + 1..=w.len() {
                        let v = if k <= inside {
                            taps[k - 1].read(&self.node_values_ext, idx, side)
                        } else {
                            self.exterior.eval(x + theta * (sign * k as f64 * h_r))
                        };
                        acc += w[k - 1] * v;
                    }
                }
                if !self.exterior.is_zero() {
                    acc += tail_exterior_part(self.order, &|p| self.exterior.eval(p), x, theta, t);
                }
                fixed[pos * m_count + m] = acc;
            }
        }
        self.fixed = fixed;
        self.spans = spans;
    }

    pub fn grid(&self) -> &Arc<Grid2> {
        &self.grid
    }

    pub fn order(&self) -> FracOrder {
        self.order
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.dirs
    }

    pub fn quadrature(&self) -> &RayQuadrature {
        &self.quad
    }

    pub fn exterior(&self) -> &ExteriorData {
        &self.exterior
    }

    /// A field on this scheme's grid with this scheme's exterior data.
    pub fn field_from_interior(&self, interior: &[f64]) -> Result<Field> {
        Field::from_interior(self.grid.clone(), self.exterior.clone(), interior)
    }

    /// Full node vector from interior values, exterior nodes set to `g`.
    pub fn node_values(&self, interior: &[f64]) -> Vec<f64> {
        let mut v = self.node_values_ext.clone();
        for (&idx, &x) in self.grid.interior().iter().zip(interior) {
            v[idx] = x;
        }
        v
    }

    /// Largest coefficient of the center value, `2 Σ w_k + tail mass`.
    pub fn center_coefficient(&self) -> f64 {
        self.quad.center_coefficient()
    }

    /// `I_θ u` at the interior node with position `pos`, direction `m`.
    /// `values` holds all nodes; exterior nodes must equal `g`.
    pub fn ray_value(&self, values: &[f64], pos: usize, m: usize) -> f64 {
        let side = self.grid.side();
        let idx = self.grid.interior()[pos];
        let w = self.quad.weights();
        let span = self.spans[pos * self.dirs.len() + m];
        let mut acc = 0.0;
        for s in 0..2 {
            let taps = &self.taps_for(m, s)[..span[s] as usize];
            for (wk, tp) in w.iter().zip(taps) {
                acc += wk * tp.read(values, idx, side);
            }
        }
        acc + self.fixed[pos * self.dirs.len() + m] - self.center_coefficient() * values[idx]
    }

    fn extremal(&self, values: &[f64], want_min: bool, want_max: bool) -> (Vec<f64>, Vec<usize>, Vec<f64>, Vec<usize>) {
        let n = self.grid.interior_count();
        let mut vmin = Vec::with_capacity(if want_min { n } else { 0 });
        let mut amin = Vec::with_capacity(if want_min { n } else { 0 });
        let mut vmax = Vec::with_capacity(if want_max { n } else { 0 });
        let mut amax = Vec::with_capacity(if want_max { n } else { 0 });
        for pos in 0..n {
            let (mut lo, mut lo_m) = (f64::INFINITY, 0);
            let (mut hi, mut hi_m) = (f64::NEG_INFINITY, 0);
            for m in 0..self.dirs.len() {
                let v = self.ray_value(values, pos, m);
                if v < lo {
                    lo = v;
                    lo_m = m;
                }
                if v > hi {
                    hi = v;
                    hi_m = m;
                }
            }
            if want_min {
                vmin.push(lo);
                amin.push(lo_m);
            }
            if want_max {
                vmax.push(hi);
                amax.push(hi_m);
            }
        }
        (vmin, amin, vmax, amax)
    }

    /// `Λ₁ˢu` with argmin directions.
    pub fn apply_lambda1(&self, values: &[f64]) -> OperatorEval {
        let (values, arg, _, _) = self.extremal(values, true, false);
        OperatorEval {
            values,
            arg,
            maximal: None,
        }
    }

    /// `Λ_Nˢu` with argmax directions.
    pub fn apply_lambda_n(&self, values: &[f64]) -> OperatorEval {
        let (_, _, values, arg) = self.extremal(values, false, true);
        OperatorEval {
            values,
            arg,
            maximal: None,
        }
    }

    /// Both extremal operators in one pass; `values`/`arg` hold `Λ₁ˢ`.
    pub fn apply_extremal(&self, values: &[f64]) -> OperatorEval {
        let (vmin, amin, vmax, _) = self.extremal(values, true, true);
        OperatorEval {
            values: vmin,
            arg: amin,
            maximal: Some(vmax),
        }
    }

    /// `I_θ u` for every interior node under a fixed direction map.
    pub fn apply_policy(&self, values: &[f64], policy: &[usize]) -> Vec<f64> {
        policy
            .iter()
            .enumerate()
            .map(|(pos, &m)| self.ray_value(values, pos, m))
            .collect()
    }

    /// Golden-section search for the continuum infimum over the arc between
    /// the neighbours of direction `m`. Not used by the solvers, which stay
    /// on the discrete set to keep the scheme monotone.
    pub fn refine_direction(&self, field: &Field, pos: usize, m: usize) -> (f64, f64) {
        let step = PI / self.dirs.len() as f64;
        let center = self.dirs.angle(m);
        let idx = self.grid.interior()[pos];
        let f = |a: f64| eval_ray_value_with(field, idx, Vec2::from_angle(a), &self.quad, self.ray_ratio);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (center - step, center + step);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..40 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2);
            }
        }
        let a = 0.5 * (lo + hi);
        let (va, vm) = (f(a), f(center));
        if va < vm {
            (a, va)
        } else {
            (center, vm)
        }
    }

    /// Linear system for a frozen direction map: `I_{θ(x)}u(x) = c_x − (Mu)_x`
    /// on interior unknowns, with `M` a diagonally dominant M-matrix.
    pub fn frozen_system(&self, policy: &[usize]) -> FrozenSystem {
        let grid = &*self.grid;
        let side = grid.side();
        let n = grid.interior_count();
        let w = self.quad.weights();
        let m_count = self.dirs.len();
        let center = self.center_coefficient();
        let mut matrix = CsrMatrix::with_capacity(n, n * 64);
        let mut constant = vec![0.0; n];
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(512);
        for (pos, &m) in policy.iter().enumerate() {
            let idx = grid.interior()[pos];
            let span = self.spans[pos * m_count + m];
            row.clear();
            row.push((pos, center));
            let mut c = self.fixed[pos * m_count + m];
            for s in 0..2 {
                let taps = &self.taps_for(m, s)[..span[s] as usize];
                for (wk, tp) in w.iter().zip(taps) {
                    let b = (idx as isize + tp.offset(side)) as usize;
                    let corners = [
                        (b, (1.0 - tp.fx) * (1.0 - tp.fy)),
                        (b + 1, tp.fx * (1.0 - tp.fy)),
                        (b + side, (1.0 - tp.fx) * tp.fy),
                        (b + side + 1, tp.fx * tp.fy),
                    ];
                    for (node, cw) in corners {
                        if cw == 0.0 {
                            continue;
                        }
                        let coef = wk * cw;
                        let p = grid.interior_position(node);
                        if p == crate::geometry::NOT_INTERIOR {
                            c += coef * self.node_values_ext[node];
                        } else {
                            row.push((p, -coef));
                        }
                    }
                }
            }
            matrix.push_row(&mut row);
            constant[pos] = c;
        }
        FrozenSystem { matrix, constant }
    }
}

/// `I_θ u(x) = c − (M u)(x)` for a frozen direction map.
#[derive(Clone, Debug)]
pub struct FrozenSystem {
    pub matrix: CsrMatrix,
    pub constant: Vec<f64>,
}

fn eval_ray_value_with(u: &Field, node: usize, theta: Vec2, quad: &RayQuadrature, ratio: f64) -> f64 {
    let grid = u.grid();
    let side = grid.side();
    let last_cell = side as i64 - 2;
    let (i0, j0) = grid.ij(node);
    let x = grid.node(node);
    let values = u.values();
    let center = values[node];
    let h_r = quad.spacing();
    let k = quad.count();
    let mut plus = Vec::with_capacity(k);
    let mut minus = Vec::with_capacity(k);
    for (out, sign) in [(&mut plus, 1.0f64), (&mut minus, -1.0)] {
        for kk in 1..=k {
            let step = sign * ratio * kk as f64;
            let tap = Tap::new(step * theta.x, step * theta.y);
            out.push(if tap.in_box(i0 as i64, j0 as i64, last_cell) {
                tap.read(values, node, side)
            } else {
                u.exterior().eval(x + theta * (sign * kk as f64 * h_r))
            });
        }
    }
    let near = quad.apply_ray(center, &plus, &minus).expect("lengths match");
    let tail = crate::quadrature::tail_integral(quad.order(), &|p| u.exterior().eval(p), x, theta, quad.truncation(), center)
        .expect("truncation is positive");
    near + tail
}

/// `I_θ u(x)` at grid node `node` for any unit direction, straight from the
/// definition (no cached exterior contributions).
pub fn eval_ray_value(u: &Field, node: usize, theta: Vec2, order: FracOrder) -> Result<f64> {
    let grid = u.grid();
    let quad = make_weights(order, grid.spacing(), ray_count(grid, grid.spacing()))?;
    Ok(eval_ray_value_with(u, node, theta.normalized(), &quad, 1.0))
}

pub fn apply_lambda1(u: &Field, dirs: &DirectionSet, order: FracOrder) -> Result<OperatorEval> {
    let scheme = RayScheme::new(u.grid().clone(), order, dirs.clone(), u.exterior().clone())?;
    Ok(scheme.apply_lambda1(u.values()))
}

pub fn apply_lambda_n(u: &Field, dirs: &DirectionSet, order: FracOrder) -> Result<OperatorEval> {
    let scheme = RayScheme::new(u.grid().clone(), order, dirs.clone(), u.exterior().clone())?;
    Ok(scheme.apply_lambda_n(u.values()))
}
