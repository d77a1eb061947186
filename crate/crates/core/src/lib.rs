//! Classical random-field models for quantum dephasing and depolarizing noise.

pub mod bloch;
pub mod cli;
pub mod dephasing;
pub mod depolarize;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod models;
pub mod multiqubit;

pub use error::{Error, Result};
