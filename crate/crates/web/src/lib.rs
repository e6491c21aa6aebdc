//! Browser bindings: an eigenfunction heatmap, a decay curve against `μ₁`
//! and a barrier profile, all on the unit disk.

use std::sync::Arc;

use truncfrac::analysis::{barrier_w_value, fit_decay, DEFAULT_WINDOW};
use truncfrac::parabolic::{evolve, EvolveOptions, ParabolicProblem};
use truncfrac::spectral::{principal_eigenpair, start_bump, EigenOptions, EigenPair};
use truncfrac::{build_grid, ConvexDomain, DirectionSet, ExteriorData, Field, FracOrder, Grid2, RayScheme, Vec2};
use wasm_bindgen::prelude::*;

fn disk(h: f64) -> truncfrac::Result<Arc<Grid2>> {
    Ok(Arc::new(build_grid(&ConvexDomain::unit_ball(), h, 4)?))
}

fn eigen(s: f64, h: f64, directions: usize) -> truncfrac::Result<EigenPair> {
    principal_eigenpair(disk(h)?, FracOrder::new(s)?, DirectionSet::uniform(directions)?, &EigenOptions::default())
}

fn js(e: truncfrac::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Row-major grid values; nodes outside the disk hold zero.
#[wasm_bindgen]
pub struct Heatmap {
    side: usize,
    half_width: f64,
    values: Vec<f64>,
    mu: f64,
    residual: f64,
}

#[wasm_bindgen]
impl Heatmap {
    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.side
    }

    /// The grid covers `[−half_width, half_width]²`.
    #[wasm_bindgen(getter, js_name = halfWidth)]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

pub fn heatmap(s: f64, h: f64, directions: usize) -> truncfrac::Result<Heatmap> {
    let pair = eigen(s, h, directions)?;
    let grid = pair.phi.grid();
    Ok(Heatmap {
        side: grid.side(),
        half_width: grid.half_width(),
        values: pair.phi.values().to_vec(),
        mu: pair.mu,
        residual: pair.residual,
    })
}

/// Principal eigenfunction of the unit disk, sup-normalized and negative.
#[wasm_bindgen(js_name = eigenfunction)]
pub fn eigenfunction_js(s: f64, h: f64, directions: usize) -> Result<Heatmap, JsError> {
    heatmap(s, h, directions).map_err(js)
}

#[wasm_bindgen]
pub struct DecayCurve {
    times: Vec<f64>,
    norms: Vec<f64>,
    rate: f64,
    mu: f64,
    fit_start: f64,
    log_c: f64,
}

#[wasm_bindgen]
impl DecayCurve {
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    /// `‖u(·, t)‖_∞` at each time.
    #[wasm_bindgen(getter)]
    pub fn norms(&self) -> Vec<f64> {
        self.norms.clone()
    }

    /// Fitted rate over the trailing window.
    #[wasm_bindgen(getter)]
    pub fn rate(&self) -> f64 {
        self.rate
    }

    #[wasm_bindgen(getter)]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[wasm_bindgen(getter, js_name = fitStart)]
    pub fn fit_start(&self) -> f64 {
        self.fit_start
    }

    /// The fit is `exp(log_c − rate t)`.
    #[wasm_bindgen(getter, js_name = logC)]
    pub fn log_c(&self) -> f64 {
        self.log_c
    }
}

/// `g ≡ 0` and the eigen solver's start bump as `u₀`.
pub fn decay(s: f64, h: f64, directions: usize, t_end: f64) -> truncfrac::Result<DecayCurve> {
    let grid = disk(h)?;
    let order = FracOrder::new(s)?;
    let dirs = DirectionSet::uniform(directions)?;
    let pair = principal_eigenpair(grid.clone(), order, dirs.clone(), &EigenOptions::default())?;
    let scheme = Arc::new(RayScheme::new(grid.clone(), order, dirs, ExteriorData::zero())?);
    let u0 = Field::from_interior(grid.clone(), ExteriorData::zero(), &start_bump(&grid))?;
    let trace = evolve(&ParabolicProblem::new(scheme, &u0, t_end)?, &EvolveOptions::default())?;
    let fit = fit_decay(&trace, DEFAULT_WINDOW)?;
    Ok(DecayCurve {
        times: trace.times,
        norms: trace.sup_norm,
        rate: fit.rate,
        mu: pair.mu,
        fit_start: fit.t_start,
        log_c: fit.log_c,
    })
}

#[wasm_bindgen(js_name = decayCurve)]
pub fn decay_js(s: f64, h: f64, directions: usize, t_end: f64) -> Result<DecayCurve, JsError> {
    decay(s, h, directions, t_end).map_err(js)
}

#[wasm_bindgen]
pub struct BarrierProfile {
    xs: Vec<f64>,
    values: Vec<f64>,
    scaled: Vec<f64>,
}

#[wasm_bindgen]
impl BarrierProfile {
    #[wasm_bindgen(getter)]
    pub fn xs(&self) -> Vec<f64> {
        self.xs.clone()
    }

    /// `I_θ(w_γ)(x)`.
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// `I_θ(w_γ)(x) · d(x)^(2s−γ)`, `d = 1 − |x|²`.
    #[wasm_bindgen(getter)]
    pub fn scaled(&self) -> Vec<f64> {
        self.scaled.clone()
    }
}

/// `I_θ(w_γ)` at `samples` points of the horizontal diameter, direction
/// `θ` at angle `angle` to it.
pub fn barrier(s: f64, gamma: f64, angle: f64, samples: usize) -> truncfrac::Result<BarrierProfile> {
    let order = FracOrder::new(s)?;
    let upper = order.two_s() - 1.0;
    if !(gamma > 0.0 && gamma < upper) {
        return Err(truncfrac::Error::InvalidGamma { gamma, upper });
    }
    let theta = Vec2::from_angle(angle);
    let n = samples.max(2);
    let mut out = BarrierProfile {
        xs: Vec::with_capacity(n),
        values: Vec::with_capacity(n),
        scaled: Vec::with_capacity(n),
    };
    for k in 0..n {
        let x = -0.99 + 1.98 * k as f64 / (n - 1) as f64;
        let value = barrier_w_value(order, gamma, Vec2::new(x, 0.0), theta)?;
        out.xs.push(x);
        out.values.push(value);
        out.scaled.push(value * (1.0 - x * x).powf(2.0 * s - gamma));
    }
    Ok(out)
}

#[wasm_bindgen(js_name = barrierProfile)]
pub fn barrier_js(s: f64, gamma: f64, angle: f64, samples: usize) -> Result<BarrierProfile, JsError> {
    barrier(s, gamma, angle, samples).map_err(js)
}
