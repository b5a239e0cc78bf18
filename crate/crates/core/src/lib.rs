//! Walsh phase-plane analysis at finite resolution.
//!
//! Functions on `[0, 1)` are piecewise constant on `2^res` dyadic cells and
//! carry either exact values in Q(sqrt 2) or `f64`. On top of the Walsh
//! transform sit tiles and bitiles of the phase plane, wave packets, the
//! model Carleson operator, trees and forests, and the size, mass and
//! multi-scale decompositions of bitile collections. The [`harness`] module
//! checks the identities and bounds these objects satisfy and measures the
//! operator norms.

pub mod carleson;
pub mod decomposition;
pub mod dyadic;
pub mod error;
pub mod grid;
pub mod harness;
pub mod phase_plane;
pub mod scalar;
pub mod walsh;

pub use error::{Error, Result};
pub use grid::{AnyGrid, CellSet, ExactGrid, FloatGrid, GridFunction, Side};
pub use scalar::{ExactScalar, Scalar};
