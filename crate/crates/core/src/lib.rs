//! Structure-preserving simulation of 2D incompressible ideal MHD on periodic
//! staggered grids.
//!
//! The crate is layered bottom-up: [`grid`] and [`dec`] provide the discrete
//! exterior calculus, [`operators`] the MHD stencils, [`integrator`] the
//! implicit variational time step, [`diagnostics`] and [`cases`] the
//! conserved quantities and benchmark initial data, and [`io`] the
//! configuration, output formats and run driver.

pub mod cases;
pub mod dec;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod io;
pub mod operators;

pub use error::{Error, Result};
pub use grid::Grid;
