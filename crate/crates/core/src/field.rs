use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Grid2, Vec2};

/// Exterior data `g` on `ℝ² ∖ Ω`.
#[derive(Clone)]
pub struct ExteriorData {
    f: Arc<dyn Fn(Vec2) -> f64 + Send + Sync>,
    zero: bool,
    label: &'static str,
}

impl ExteriorData {
    pub fn zero() -> Self {
        ExteriorData {
            f: Arc::new(|_| 0.0),
            zero: true,
            label: "zero",
        }
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        ExteriorData {
            f: Arc::new(move |_| c),
            zero: false,
            label: "constant",
        }
    }

    /// `g(y) = c0 + ⟨grad, y⟩`
    pub fn affine(c0: f64, grad: Vec2) -> Self {
        ExteriorData {
            f: Arc::new(move |y| c0 + grad.dot(y)),
            zero: false,
            label: "affine",
        }
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(Vec2) -> f64 + Send + Sync + 'static,
    {
        ExteriorData {
            f: Arc::new(f),
            zero: false,
            label: "custom",
        }
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        (self.f)(p)
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn negated(&self) -> Self {
        if self.zero {
            return self.clone();
        }
        let f = self.f.clone();
        ExteriorData {
            f: Arc::new(move |p| -f(p)),
            zero: false,
            label: self.label,
        }
    }
}

impl fmt::Debug for ExteriorData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExteriorData({})", self.label)
    }
}

/// Grid function together with its exterior data. Non-interior nodes always
/// hold `g` evaluated at the node.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid2>,
    values: Vec<f64>,
    exterior: ExteriorData,
}

impl Field {
    /// Interior nodes from `interior`, all other nodes from `exterior`.
    pub fn new<F: Fn(Vec2) -> f64>(grid: Arc<Grid2>, exterior: ExteriorData, interior: F) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let p = grid.node(idx);
                if grid.is_interior(idx) {
                    interior(p)
                } else {
                    exterior.eval(p)
                }
            })
            .collect();
        Field {
            grid,
            values,
            exterior,
        }
    }

    pub fn zeros(grid: Arc<Grid2>) -> Self {
        let values = vec![0.0; grid.len()];
        Field {
            grid,
            values,
            exterior: ExteriorData::zero(),
        }
    }

    /// Field equal to `g` everywhere, interior included.
    pub fn from_exterior(grid: Arc<Grid2>, exterior: ExteriorData) -> Self {
        let g = exterior.clone();
        Field::new(grid, exterior, move |p| g.eval(p))
    }

    /// Interior values in [`Grid2::interior`] order.
    pub fn from_interior(grid: Arc<Grid2>, exterior: ExteriorData, interior: &[f64]) -> Result<Self> {
        let mut f = Field::from_exterior(grid, exterior);
        f.set_interior(interior)?;
        Ok(f)
    }

    pub fn grid(&self) -> &Arc<Grid2> {
        &self.grid
    }

    pub fn exterior(&self) -> &ExteriorData {
        &self.exterior
    }

    /// All node values, row-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interior_values(&self) -> Vec<f64> {
        self.grid.interior().iter().map(|&i| self.values[i]).collect()
    }

    pub fn set_interior(&mut self, interior: &[f64]) -> Result<()> {
        let n = self.grid.interior_count();
        if interior.len() != n {
            return Err(Error::param(
                "interior",
                format!("expected {n} interior values, got {}", interior.len()),
            ));
        }
        for (&idx, &v) in self.grid.interior().iter().zip(interior) {
            self.values[idx] = v;
        }
        Ok(())
    }

    pub fn value_at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// `−u` with exterior data `−g`.
    pub fn negated(&self) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            exterior: self.exterior.negated(),
        }
    }

    /// `max |u|` over interior nodes.
    pub fn sup_norm_interior(&self) -> f64 {
        self.grid
            .interior()
            .iter()
            .fold(0.0f64, |m, &i| m.max(self.values[i].abs()))
    }

    /// `max |u − v|` over interior nodes of a field on the same grid.
    pub fn sup_distance_interior(&self, other: &Field) -> f64 {
        self.grid
            .interior()
            .iter()
            .fold(0.0f64, |m, &i| m.max((self.values[i] - other.values[i]).abs()))
    }
}
