//! Run configuration: flags over a flat `key = value` file over defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use truncfrac::{ConvexDomain, DirectionSet, FracOrder, Vec2};

pub const DEFAULT_S: f64 = 0.75;
pub const DEFAULT_GAMMA: f64 = 0.3;
pub const DEFAULT_H: f64 = 0.05;
pub const DEFAULT_DIRECTIONS: usize = 64;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_T_END: f64 = 2.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid `{field}`: {reason}")]
    Field { field: &'static str, reason: String },

    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
}

fn field(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        reason: reason.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Elliptic,
    Parabolic,
    Eigen,
    Barrier,
    Regularity,
    Decay,
    Lowerbound,
    Envelope,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Elliptic => "elliptic",
            Experiment::Parabolic => "parabolic",
            Experiment::Eigen => "eigen",
            Experiment::Barrier => "barrier",
            Experiment::Regularity => "regularity",
            Experiment::Decay => "decay",
            Experiment::Lowerbound => "lowerbound",
            Experiment::Envelope => "envelope",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DomainShape {
    Ball,
    Ellipse,
}

/// Settings shared by every subcommand. Each one may come from a flag or
/// from the config file; flags win.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Flat `key = value` file with any of the settings below
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub domain: Option<DomainShape>,
    /// Radius of the ball, or first semi-axis of the ellipse
    #[arg(long)]
    pub a: Option<f64>,
    /// Second semi-axis of the ellipse
    #[arg(long)]
    pub b: Option<f64>,
    /// Ellipse rotation in radians
    #[arg(long)]
    pub rotation: Option<f64>,
    /// Fractional order in (0, 1)
    #[arg(long)]
    pub s: Option<f64>,
    /// Hölder or barrier exponent
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Grid spacing
    #[arg(long)]
    pub h: Option<f64>,
    /// Number of directions in [0, π)
    #[arg(long)]
    pub directions: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Solver residual tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Settings, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Fills every unset field from `base`.
    pub fn or(self, base: Settings) -> Settings {
        Settings {
            config: self.config.or(base.config),
            domain: self.domain.or(base.domain),
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            rotation: self.rotation.or(base.rotation),
            s: self.s.or(base.s),
            gamma: self.gamma.or(base.gamma),
            h: self.h.or(base.h),
            directions: self.directions.or(base.directions),
            t_end: self.t_end.or(base.t_end),
            tol: self.tol.or(base.tol),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub domain: ConvexDomain,
    pub s: f64,
    pub gamma: f64,
    pub h: f64,
    pub directions: usize,
    pub t_end: f64,
    pub tol: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn order(&self) -> FracOrder {
        FracOrder::new(self.s).expect("validated")
    }

    pub fn direction_set(&self) -> DirectionSet {
        DirectionSet::uniform(self.directions).expect("validated")
    }
}

fn positive(name: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(field(name, format!("must be positive and finite, got {v}")))
    }
}

/// Merges flags over the config file named by `--config`, fills defaults
/// and validates every field against the requirements of `experiment`.
pub fn parse_config(experiment: Experiment, flags: Settings) -> Result<RunConfig, ConfigError> {
    let file = match &flags.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let merged = flags.or(file);

    let s = merged.s.unwrap_or(DEFAULT_S);
    if !(s > 0.0 && s < 1.0) {
        return Err(field("s", format!("s must lie in (0,1), got {s}")));
    }
    let gamma = merged.gamma.unwrap_or(DEFAULT_GAMMA);
    if matches!(experiment, Experiment::Regularity | Experiment::Barrier) {
        let upper = 2.0 * s - 1.0;
        if !(gamma > 0.0 && gamma < upper) {
            return Err(field("gamma", format!("must lie in (0, 2s−1) = (0, {upper}), got {gamma}")));
        }
    }
    let h = positive("h", merged.h.unwrap_or(DEFAULT_H))?;
    let directions = merged.directions.unwrap_or(DEFAULT_DIRECTIONS);
    DirectionSet::uniform(directions).map_err(|e| field("directions", e.to_string()))?;
    let t_end = positive("t_end", merged.t_end.unwrap_or(DEFAULT_T_END))?;
    let tol = merged.tol.map(|t| positive("tol", t)).transpose()?;

    let a = positive("a", merged.a.unwrap_or(1.0))?;
    let shape = merged.domain.unwrap_or(DomainShape::Ball);
    let domain = match shape {
        DomainShape::Ball => {
            if merged.b.is_some_and(|b| b != a) {
                return Err(field("b", "a ball has a single radius `a`"));
            }
            ConvexDomain::ball(Vec2::ZERO, a)
        }
        DomainShape::Ellipse => {
            let b = positive("b", merged.b.ok_or_else(|| field("b", "an ellipse needs both semi-axes"))?)?;
            ConvexDomain::ellipse(Vec2::ZERO, a, b, merged.rotation.unwrap_or(0.0))
        }
    }
    .map_err(|e| field("domain", e.to_string()))?;
    if experiment == Experiment::Lowerbound && shape != DomainShape::Ball {
        return Err(field("domain", "the lower-bound experiment needs a ball"));
    }
    if h > 2.0 * domain.b {
        return Err(field("h", format!("spacing {h} exceeds the domain width {}", 2.0 * domain.b)));
    }

    Ok(RunConfig {
        experiment,
        domain,
        s,
        gamma,
        h,
        directions,
        t_end,
        tol,
        seed: merged.seed.unwrap_or(DEFAULT_SEED),
        out: merged.out.unwrap_or_else(|| PathBuf::from("out").join(experiment.name())),
    })
}
