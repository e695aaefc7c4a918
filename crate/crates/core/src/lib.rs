//! Gaussian-weighted surface geometry on triangle meshes.
//!
//! The ambient space is ℝ³ with the Gaussian weight (1/4π)·e^{-|x|²/4}.
//! Critical points of the weighted area are self-shrinkers of mean
//! curvature flow; this crate computes weighted areas, entropy, shrinker
//! residuals, stability spectra, mass-draining radial flows, tightening
//! descent, and sweepout widths, all at desk scale.

pub mod entropy;
pub mod error;
pub mod measure;
pub mod mesh;
pub mod numerics;
pub mod quad;
pub mod radial;
pub mod report;
pub mod sweepout;
pub mod tighten;
pub mod variation;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{AnalyticTail, DensityParams};
pub use mesh::{DifferentialData, PrimitiveKind, TopologyReport, TriMesh};
pub use quad::{AreaResult, QuadratureSpec};

/// 3D point/vector aliases used across the crate.
pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;
