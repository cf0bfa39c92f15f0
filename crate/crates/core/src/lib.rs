//! Information-theoretic fitness of internal models, and the constrained
//! evolution of the architectures that carry them.
#![no_std]
extern crate alloc;

pub mod collective;
pub mod conceptualization;
pub mod constraints;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod infotheory;
pub mod models;
pub mod rng;
pub mod training;
pub mod worlds;

pub use error::{Error, Result};
