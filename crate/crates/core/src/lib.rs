//! Parametric finite element simulation of solid-state dewetting on curved
//! substrates.
//!
//! The film/vapour interface is a polygonal curve whose endpoints slide on a
//! static, arclength-parameterized substrate. Each time step solves the
//! energy-stable scheme by a Picard iteration; the corrected variant also
//! conserves the enclosed area exactly on curved substrates.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod anisotropy;
pub mod config;
pub mod convergence;
pub mod diagnostics;
pub mod error;
pub mod film;
pub mod geometry;
pub mod linalg;
pub mod output;
pub mod presets;
pub mod quadrature;
pub mod real;
pub mod scheme;
pub mod solver;
pub mod substrate;
pub mod vec2;

pub use error::{Result, SsdError};
pub use real::Real;

pub type Vector = vec2::Vec2<f64>;
pub type Matrix = vec2::Mat2<f64>;
pub type Curve = geometry::PolygonalCurve<f64>;
pub type State = scheme::SchemeState<f64>;
pub type Aniso = anisotropy::Anisotropy<f64>;
pub type CircleSubstrate = substrate::Circle<f64>;
pub type LineSubstrate = substrate::Line<f64>;
pub type CornerSubstrate = substrate::SmoothedCorner<f64>;
pub type GraphSubstrate = substrate::ArclengthCurve<f64>;
pub type Run = solver::RunResult<f64>;

pub type CurveF32 = geometry::PolygonalCurve<f32>;
pub type StateF32 = scheme::SchemeState<f32>;
pub type AnisoF32 = anisotropy::Anisotropy<f32>;
