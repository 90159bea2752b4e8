//! Staged shallow-tunnel excavation in gravitational elastic ground.
//!
//! Each excavation stage is an independent problem on the lower half-plane with
//! one cavity. The region is mapped onto an annulus `α < |ζ| < 1` (a Möbius step,
//! then charge simulation forward and dipole simulation backward), the mixed
//! ground-surface condition is handled by a branch function, and the series
//! coefficients of the complex potentials come from a truncated linear system.
//!
//! Module order follows the pipeline: [`geometry`] → [`conformal`] →
//! [`rh_solver`] → [`fields`] → [`verify`]; [`pipeline`] wires a configured
//! stage through all of it and [`cli`] exposes the `seqtunnel` commands.

pub mod cli;
pub mod config;
pub mod conformal;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod output;
pub mod pipeline;
pub mod rh_solver;
pub mod verify;

pub use num_complex::Complex64 as C64;
