//! Discrete harmonic maps from the disk with a free boundary on a constraint
//! submanifold, harmonic replacement, min-max tightening of sweepouts and bubble-tree
//! diagnostics.
//!
//! Energies use the convention `E(u) = ½∫|∇u|²`, so a conformal map has energy equal
//! to its area.

pub mod bubbles;
pub mod constructions;
pub mod domain;
pub mod energy;
pub mod error;
pub mod manifold;
pub mod minmax;
pub mod solver;
pub mod vec;

pub use error::{Error, Result};
