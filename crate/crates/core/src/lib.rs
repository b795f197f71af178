//! Linearized boundary control reconstruction of a density perturbation in
//! the 1D acoustic wave equation `rho u_tt - u_xx + q u = 0` on `[-1, 1]`.

pub mod bc_operators;
pub mod checks;
pub mod control;
pub mod data;
pub mod error;
pub mod fd_kernels;
pub mod grid;
pub mod harness;
pub mod recon;
pub mod trace;
pub mod wave_sim;

pub use error::{Error, Result};
pub use grid::SimulationGrid;
pub use trace::{BoundaryTrace, Side};
