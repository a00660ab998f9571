//! Spatially coupled LDPC codes from algebraic lifts.

pub mod abcode;
pub mod abscount;
pub mod coupler;
pub mod error;
pub mod optimize;
pub mod perm;
pub mod windowed;

pub use error::{Error, Result};
