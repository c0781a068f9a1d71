//! Third-order relativistic dynamics of a classical spinning particle moving
//! in a plane.
//!
//! The crate evaluates and integrates the Poincaré-invariant third-order
//! equation of motion, checks that it is variational and invariant, builds
//! its Lagrangians and the degenerate-Legendre Hamiltonian picture, and
//! connects the canonical momentum to the Dixon momentum of a spinning
//! particle obeying the Pirani condition.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod equation;
pub mod error;
pub mod fd;
pub mod hamiltonian;
pub mod lagrangian;
pub mod minkowski;
pub mod sampling;
pub mod spin;
pub mod suites;
pub mod symmetry;
pub mod variationality;

pub use error::{Error, Result};
pub use minkowski::{Convention, Mat2, Mat3, Vec2, Vec3};
