//! Numerical Lie sphere geometry.
//!
//! Oriented hyperspheres, planes, and points of S^n and R^n are represented
//! as points of a projective quadric in R^{n+3}; oriented contact, pencils of
//! spheres, the transformation group, Legendre lifts of hypersurfaces, and
//! curvature-sphere analysis (Dupin, isoparametric, reducibility
//! certificates) are all computed in those coordinates.

pub mod config;
pub mod construct;
pub mod coords;
pub mod dupin;
pub mod error;
pub mod legendre;
pub mod linalg;
pub mod pencil;
pub mod transform;

pub use config::Tolerances;
pub use error::{ErrorCategory, GeomError, Result};
