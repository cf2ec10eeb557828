//! Coset monogamy-of-entanglement game bounds and a squeezed-state
//! continuous-variable QKD simulation built on them.

pub mod analysis;
pub mod bounds;
pub mod coding;
pub mod config;
pub mod cv_gaussian;
pub mod error;
pub mod finite_coset;
pub mod qkd;
pub mod seed;

pub use error::{Error, Result};
