//! Numerical laboratory for one-dimensional Schrodinger operators with
//! rough potentials.
//!
//! The crate studies what happens when a potential V is mollified by the
//! time-averaged heat kernel k_t: eigenfunctions and landscape functions of
//! the original operator -Delta + V satisfy the smoothed equations up to a
//! residual that is first order in t, and the smoothed potential V * k_t
//! localizes eigenfunctions the same way the reciprocal of the landscape
//! function does. Everything here is built to measure those statements:
//! deterministic tridiagonal solvers, a bisection eigensolver, discrete
//! convolution against sampled kernels, Brownian path sampling for the
//! Feynman-Kac representation, and the analysis and reporting layers on top.
//!
//! All randomness flows through counter-based streams seeded explicitly, so
//! every artifact the crate writes is reproducible byte for byte on any
//! machine and any number of worker threads.

pub mod analysis;
pub mod config;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod landscape;
pub mod operator;
pub mod pipeline;
pub mod potential;
pub mod quad;
pub mod regularize;
pub mod report;
pub mod rng;
pub mod special;
pub mod stochastic;
pub mod svg;
pub mod table;

pub use error::{Error, Result};
