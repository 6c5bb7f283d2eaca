//! AdaMomentum and its Adam-family relatives behind one update kernel,
//! plus the problems and harnesses used to measure how they behave.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod optim;
pub mod problems;

pub use error::{Error, Result};
