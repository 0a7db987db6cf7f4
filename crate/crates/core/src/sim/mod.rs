//! Monte Carlo simulation of the urn under both sampling schemes.

mod coupled;
mod seed;
mod state;

pub use coupled::{
    poisson_increments, run_coupled, run_coupled_with_counts, run_many, Checkpoint, CheckpointGrid, Trajectory,
};
pub use seed::{splitmix64, trajectory_seed};
pub use state::{OccupancySnapshot, OccupancyState, DEFAULT_K_MAX};
