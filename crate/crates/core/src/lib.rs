//! Mean curvature flow of spacelike graphs inside convex cones of
//! Minkowski space.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod cone;
pub mod config;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod mesh;

pub use cone::{ConeKind, ConeSpec};
pub use config::{parse_config, InitialData, RunConfig};
pub use diagnostics::{AuditReport, DiagnosticsRecord};
pub use error::{Error, Result};
pub use flow::{ParabolicityReport, StepControl};
pub use geometry::{Jet, NodeGeometry, SpacetimeVector};
pub use mesh::{Field, Mesh};
