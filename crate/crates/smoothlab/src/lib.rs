//! Fractional moduli of smoothness, bandlimited approximation and
//! inequality checks for functions on 1-D and 2-D periodic grids.

pub mod approx;
pub mod corpus;
pub mod error;
pub mod grid;
pub mod moduli;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
