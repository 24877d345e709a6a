//! Two-dimensional universal meshes with a quasi-static brittle fracture
//! simulator on top.
//!
//! A fixed background triangulation (the universal mesh) is deformed to
//! conform exactly to an immersed curve by projecting a selected set of edges
//! onto the curve and relaxing nearby vertices. On the conformed, split mesh
//! the crate solves plane linear elasticity with quadratic triangles, extracts
//! stress intensity factors with domain interaction integrals, and advances
//! the crack under the Principle of Local Symmetry with the load scaled so
//! that K_I = K_c at every step.
//!
//! See the crate examples for runnable entry points per capability and the
//! `verify` module for the acceptance suites.

pub mod config;
pub mod conform;
pub mod curve;
pub mod error;
pub mod exact;
pub mod fem;
pub mod fracture;
pub mod geometry;
pub mod io;
pub mod verify;

pub use error::PipelineError;
pub use geometry::{Point2, Triangulation};
