pub mod catalog;
pub mod classical;
pub mod cli;
pub mod determining;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod integral;
pub mod operator;
pub mod quadrature;
pub mod quantum_grid;
pub mod sampling;
pub mod taylor;

pub use error::{Error, Result};
pub use field::{Jet, Point, ScalarField};
