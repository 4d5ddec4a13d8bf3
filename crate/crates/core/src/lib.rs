//! Multiplicative and additive compound matrices, the Kronecker lifting
//! matrices that connect them to tensor powers, and compound dynamics.

pub mod cli;
pub mod compounds;
pub mod dynamics;
pub mod error;
pub mod indexing;
pub mod kron;
pub mod lifting;
pub mod limits;
pub mod matrix;
pub mod random;
pub mod spectral;

pub use error::{Error, Result};
pub use limits::Limits;
pub use matrix::Matrix;
