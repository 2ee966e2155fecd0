//! Descent along generalized linearizations on Riemannian manifolds and
//! discretized loop spaces.
//!
//! A linearization `(ν, δ)` of a manifold `X` replaces the exponential and
//! logarithm maps of gradient descent: `ν(x, y)` lives in `T*X × ℝ`, and the
//! path `t ↦ δ(t·d_xF)` through `x` is searched by a one-dimensional method.
//! A bounded gap function on the bundle induces the metric `d_X` used for
//! stopping and for the analysis of limit points.

pub mod adherence;
pub mod audit;
pub mod cli;
pub mod descent;
pub mod error;
pub mod fixed_point;
pub mod gap;
pub mod linearization;
pub mod manifold;
pub mod mapping;
pub mod method;
pub mod problems;

pub use error::{Error, Result};
