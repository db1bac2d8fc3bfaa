//! Frobenius solutions, Frobenius constants and motivic gamma functions of
//! regular-singular differential operators in the theta derivation `D = t d/dt`.

pub mod arith;
pub mod catalog;
pub mod error;
pub mod frobenius;
pub mod jet;
pub mod limits;
pub mod linalg;
pub mod local;
pub mod monodromy;
pub mod op;
pub mod parser;
pub mod qstructure;
pub mod quad;
pub mod recognition;
pub mod gamma;
pub mod poly;
pub mod special;

pub use error::{FrobError, Result};
