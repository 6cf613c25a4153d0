//! Numerical laboratory for late-time tails of wave equations with an
//! inverse-square potential and of the charged wave equation.

pub mod elliptic;
pub mod error;
pub mod evolve_ads;
pub mod evolve_null;
pub mod geometry;
pub mod harmonics;
pub mod initdata;
pub mod io;
pub mod model;
pub mod quadrature;
pub mod tails;
pub mod tridiag;
pub mod twisted;

pub use error::{Error, Result};
pub use model::{exponent_table, validate_params, ExponentTable, Kind, ModelParams};
