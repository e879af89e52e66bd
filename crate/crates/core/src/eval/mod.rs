//! Closed-loop evaluation: per-parameter H∞ norm distributions, state
//! statistics from Monte Carlo and from the expanded systems, and the
//! reconstruction error of the two Galerkin transforms.

mod norms;
mod simulate;

pub use norms::{norm_distribution, norm_samples, NormDistribution};
pub use simulate::{
    moment_error, simulate_expanded, simulate_monte_carlo, simulate_stats, transform_error, transition_matrix,
    MomentErrors, SimConfig, Source, TrajectoryStats,
};
