//! Space-time PGD solver for quasi-static cyclic elasto-plasticity in 2D, with a
//! micro/macro multi-time separation of the time modes and an incremental FE
//! reference solver.
//!
//! The pipeline is: [`cases`] builds a mesh and a loading waveform,
//! [`assembly`] factorizes the elastic stiffness with a rank-one Dirichlet lifting,
//! [`driver::run`] alternates [`plasticity::history_sweep`] and [`pgd::pgd_solve`]
//! until the space-time iterates stop changing, and [`multitime`] splits each
//! time mode over a micro (one cycle) and macro (cycle index) grid.

pub mod assembly;
pub mod cases;
pub mod cli;
pub mod driver;
pub mod element;
pub mod error;
pub mod io;
pub mod lowrank;
pub mod material;
pub mod mesh;
pub mod multitime;
pub mod pgd;
pub mod plasticity;
pub mod reference;

pub use assembly::{assemble_stiffness, StiffnessSystem};
pub use cases::{make_waveform, CaseSpec, Geometry, LoadWaveform};
pub use driver::{run, solve_elastic, DriverOptions, SolveReport};
pub use error::{Error, Result};
pub use material::{Material, Voigt};
pub use mesh::Mesh;
pub use multitime::{decompose, make_grid, reconstruct, MultiTimeGrid, MultiTimeModes};
pub use pgd::{compress_rhs, evaluate_field, pgd_solve, PgdOptions, SeparatedRhs, SpaceTimeField};
pub use plasticity::{history_sweep, plastic_rhs, trial_and_return, PlasticState};
pub use reference::{probe, solve_incremental, Quantity};
