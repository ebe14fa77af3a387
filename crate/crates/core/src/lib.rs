//! Exact construction and verification of the arithmetic Euler top.
//!
//! The crate builds a p-derivation on the p-adic completion of an open set
//! of affine 3-space that kills the two quadratic integrals of the Euler
//! rigid-body flow, and checks by exact computation mod `p^N` that it
//! linearizes on the elliptic level sets, with the inverse Hasse invariant as
//! the scaling factor.

pub mod classical;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod harness;
pub mod hasse;
pub mod local;
pub mod padic;
pub mod poly;

pub use error::{Error, Result};
