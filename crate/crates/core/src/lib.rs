pub mod angular;
pub mod dg;
pub mod error;
pub mod geodesic_grid;
pub mod integrator;
pub mod io;
pub mod operator;
pub mod positivity;
pub mod problems;
pub mod quadrature;
pub mod runner;
pub mod transport;

pub use error::{Error, Result};
