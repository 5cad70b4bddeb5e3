pub mod classifier;
pub mod error;
pub mod harmonic;
pub mod homogeneous;
pub mod hunter;
pub mod linalg;
pub mod operators;
pub mod poly;
pub mod profile;
pub mod sphere;
pub mod verifier;

pub use error::{Error, Result};
