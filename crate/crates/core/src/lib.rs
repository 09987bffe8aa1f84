//! Parametric search and verification of decompositions
//! `4/P = 1/A + 1/B + 1/C` for primes `P`.
//!
//! Every search path ends in [`decomp::verify`], so any [`decomp::Decomposition`]
//! handed out by this crate has passed the exact identity check.

pub mod arith;
pub mod decomp;
pub mod ed1;
pub mod ed2;
pub mod error;
pub mod lattice;
pub mod report;
pub mod solver;
pub mod transform;
pub mod window;

pub use arith::Nat;
pub use decomp::{Decomposition, Method};
pub use error::Error;
