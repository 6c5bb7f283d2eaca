//! Parameter vectors, seeded random streams, SαS sampling and the
//! finite-difference gradient oracle.

mod fdiff;
mod rng;
mod stable;
mod vector;

pub use fdiff::{finite_diff_grad, DEFAULT_FD_STEP};
pub use rng::{derive_stream, RngStream};
pub use stable::{sas_sample, standard_sas, StableNoiseSpec};
pub use vector::ParamVector;
