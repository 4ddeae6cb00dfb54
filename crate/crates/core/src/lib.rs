//! Smoothing kernels, basic spaces and asymptotic testing for nonlinear
//! generalized functions on open subsets of the real line.

pub mod basic;
pub mod cli;
pub mod dist;
pub mod error;
pub mod jet;
pub mod kernel;
pub mod simplified;
pub mod smooth;
pub mod testing;
pub mod verdict;

pub use error::{Error, Result};
pub use verdict::Verdict;
