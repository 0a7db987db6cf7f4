//! Occupancy counts of an infinite urn scheme under fixed-`n` and Poisson
//! sampling: exact moments, their asymptotics, and coupled simulation.

pub mod cli;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod moments;
pub mod quad;
pub mod sim;

pub use error::{Error, Result};
