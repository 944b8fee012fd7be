//! Stabilized cut finite elements for the Laplace-Beltrami problem on
//! surfaces given implicitly by a level set inside a fixed simplex mesh.
//!
//! The pipeline is: [`mesh`] builds a structured background mesh,
//! [`levelset`] interpolates an analytic signed distance onto it,
//! [`cutgeom`] extracts the piecewise linear surface and the active cells,
//! [`assembly`] builds the tangential stiffness, the face-jump penalty, the
//! load and the mean-value constraint, and [`linalg`] solves and analyses the
//! resulting bordered system. [`analysis`] measures errors and rates and
//! [`experiments`] drives the convergence and conditioning studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod cutgeom;
pub mod error;
pub mod experiments;
pub mod geom;
pub mod levelset;
pub mod linalg;
pub mod mesh;
pub mod problem;

pub use error::{Error, Result};
