use crate::exec::Execution;
use crate::linalg::spectral_abscissa;
use crate::plant::{grid, Gain, UncertainPlant};

pub const DEFAULT_GRID: usize = 1001;
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Eigenvalue sweep of `A_cl(ξ)` over a tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub grid_points: usize,
    /// Largest closed-loop real part over the grid.
    pub max_real_part: f64,
    /// Grid point attaining `max_real_part`.
    pub worst_xi: Vec<f64>,
    pub margin: f64,
    /// `max_real_part < −margin`.
    pub stable: bool,
}

/// Robust-stability post-analysis on `grid_n` equispaced points per
/// parameter dimension.
pub fn stability_post_analysis(plant: &UncertainPlant, k: &Gain, grid_n: usize, margin: f64) -> StabilityReport {
    stability_post_analysis_with(plant, k, grid_n, margin, Execution::default())
}

pub fn stability_post_analysis_with(
    plant: &UncertainPlant,
    k: &Gain,
    grid_n: usize,
    margin: f64,
    exec: Execution,
) -> StabilityReport {
    let pts = grid(&plant.dist, grid_n.max(2));
    let abscissae = exec.map_slice(&pts, |xi| {
        let a = &plant.sample(xi).close(k).a;
        spectral_abscissa(a)
    });
    let mut worst = 0;
    for (i, v) in abscissae.iter().enumerate() {
        if v.is_nan() || *v > abscissae[worst] {
            worst = i;
            if v.is_nan() {
                break;
            }
        }
    }
    let max_real_part = abscissae[worst];
    StabilityReport {
        grid_points: pts.len(),
        max_real_part,
        worst_xi: pts[worst].clone(),
        margin,
        stable: max_real_part < -margin,
    }
}
