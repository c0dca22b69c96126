//! Exact construction of a doubling measure on `R^d` that charges a
//! rectifiable curve, with certified checks of every bound along the way.

pub mod arith;
pub mod cascade;
pub mod check;
pub mod error;
pub mod geometry;
pub mod kset;
pub mod measure;
pub mod report;
pub mod traverse;
pub mod verify;

pub use error::{Error, Result};
