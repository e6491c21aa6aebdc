//! Monotone discretization of the truncated fractional operator
//!
//! `Λ₁ˢu(x) = inf_θ ∫ (u(x + τθ) − u(x)) / |τ|^{1+2s} dτ`
//!
//! on convex planar domains, with elliptic (policy iteration), parabolic
//! (explicit) and principal-eigenvalue solvers plus the barrier, Hölder and
//! decay checks built on them.

mod clock;

pub mod analysis;
pub mod elliptic;
pub mod error;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod integrate;
pub mod linalg;
pub mod operator;
pub mod parabolic;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{ExteriorData, Field};
pub use geometry::{build_grid, ConvexDomain, DomainKind, Grid2, Vec2};
pub use operator::{apply_lambda1, apply_lambda_n, DirectionSet, OperatorEval, RayScheme};
pub use quadrature::{make_weights, FracOrder, RayQuadrature};
