//! Simulation and verification toolkit for critical level-set percolation of
//! the Gaussian free field on the cable graph of Z^d.
//!
//! Two routes produce the same percolation clusters:
//!
//! * [`gff`] samples the discrete GFF on a box with zero boundary values and
//!   opens cable edges with the Brownian-bridge law.
//! * [`loops`] samples the random-walk loop soup at intensity 1/2, lifts it to
//!   local times and glues cable edges; [`loops::explorer`] does the same lazily
//!   around the origin so that large boxes in high dimension stay affordable.
//!
//! [`walk_oracle`] holds exact random-walk numerics (kernels, return
//! probabilities, Green's functions, loop masses) that the samplers are
//! calibrated against. [`cluster`] answers connectivity and chemical-distance
//! queries on a realized configuration, [`chains`] implements glued-loop
//! sequences, simple chains and simple geodesics, and [`experiments`] turns
//! all of it into Monte Carlo estimates with error bars.

pub mod chains;
pub mod cli;
pub mod cluster;
pub mod config;
pub mod error;
pub mod experiments;
pub mod gff;
pub mod lattice;
pub mod linalg;
pub mod loops;
pub mod rng;
pub mod walk_oracle;

pub use error::{Error, Result};
pub use lattice::{BoxSpec, Norm, Vertex};
