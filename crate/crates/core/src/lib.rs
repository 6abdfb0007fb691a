//! Numerical toolkit for discrete restriction experiments on lattice spheres.
//!
//! The crate is layered bottom-up: modular arithmetic, complete exponential
//! sums, lattice shell enumeration, quadratic Weyl sums and their Poisson
//! approximation on major arcs, the circle-method decomposition of the
//! restriction kernel, and finally the Monte Carlo restriction experiments.

pub mod arith;
pub mod bump;
pub mod error;
pub mod exec;
pub mod exp_sums;
pub mod kernel;
pub mod numeric;
pub mod quadrature;
pub mod report;
pub mod restriction;
pub mod rng;
pub mod sphere;
pub mod weyl;

pub use error::{Error, Result};
