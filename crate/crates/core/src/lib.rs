//! Simulation and stability analysis of piecewise-smooth (Filippov) systems
//! with a switching surface `x1 = 0` and a boundary equilibrium at the origin.
//!
//! - [`parser`]: text expressions for vector-field components.
//! - [`system`]: the piecewise system, surface classification, sliding field,
//!   and the reduced system `(A, c)`.
//! - [`integrator`]: event-driven Filippov solutions, CSV export and the
//!   discontinuous time reparameterization.
//! - [`reduction`]: linearization at the origin, hypothesis checks,
//!   stability probes and robustness sweeps.
//! - [`sphere`]: the one-dimensional return map on the projected tangency
//!   section of four-dimensional reduced systems.
//! - [`config`] and [`cli`]: JSON system definitions and the command-line
//!   front end.

pub mod builtin;
pub mod cli;
pub mod config;
pub mod integrator;
pub mod linalg;
pub mod parallel;
pub mod parser;
pub mod reduction;
pub mod sphere;
pub mod system;
