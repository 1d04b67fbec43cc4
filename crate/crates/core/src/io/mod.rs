//! Configuration parsing and result files.

pub mod config;
pub mod csv;
pub mod vtk;

pub use config::{RunConfig, SolverChoice};
