pub mod cell;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod homogenize;
pub mod material;
pub mod parallel;
pub mod tensor;
pub mod voigt;

pub use error::{Error, ErrorKind, Result};
