use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hinf::{hinf_norm, DEFAULT_TOL};
use crate::plant::{close_loop, grid, Gain, UncertainPlant};
use crate::polychaos::Marginal;

/// H∞ norms of the closed loop over a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NormDistribution {
    pub xi: Vec<Vec<f64>>,
    /// `γ(ξ)`; `+∞` where the closed loop is unstable.
    pub gamma: Vec<f64>,
    /// Probability weights of the grid points, summing to one.
    pub weights: Vec<f64>,
    pub worst_case: f64,
    /// Weighted mean over stable samples.
    pub averaged: f64,
    pub unstable: Vec<Vec<f64>>,
}

// Equispaced mean for uniform marginals; density-proportional weights
// otherwise.
fn grid_weights(plant: &UncertainPlant, xi: &[Vec<f64>]) -> Vec<f64> {
    let raw: Vec<f64> = xi
        .iter()
        .map(|x| {
            plant
                .dist
                .marginals()
                .iter()
                .zip(x)
                .map(|(m, &v)| match m {
                    Marginal::Uniform { .. } => 1.0,
                    Marginal::Gaussian { mean, std } => (-0.5 * ((v - mean) / std).powi(2)).exp(),
                })
                .product()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Norms on `grid_n` equispaced points per dimension; unstable samples are
/// recorded, not rejected.
pub fn norm_samples(plant: &UncertainPlant, k: &Gain, grid_n: usize, exec: Execution) -> Result<NormDistribution> {
    if grid_n < 2 {
        return Err(Error::InvalidArgument("norm grid needs at least 2 points".into()));
    }
    k.check_dims(&plant.dims())?;
    let xi = grid(&plant.dist, grid_n);
    let gamma: Vec<f64> = exec
        .map_slice(&xi, |x| {
            let sys = close_loop(plant, k, x)?;
            match hinf_norm(&sys, DEFAULT_TOL) {
                Ok(g) => Ok(g),
                Err(Error::UnstableSystem(_)) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let weights = grid_weights(plant, &xi);
    let unstable: Vec<Vec<f64>> =
        xi.iter().zip(&gamma).filter(|(_, g)| !g.is_finite()).map(|(x, _)| x.clone()).collect();
    let worst_case = gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (num, den) = gamma
        .iter()
        .zip(&weights)
        .filter(|(g, _)| g.is_finite())
        .fold((0.0, 0.0), |(n, d), (g, w)| (n + g * w, d + w));
    let averaged = if den > 0.0 { num / den } else { f64::INFINITY };
    Ok(NormDistribution { xi, gamma, weights, worst_case, averaged, unstable })
}

/// As [`norm_samples`], failing with the first unstable sample.
pub fn norm_distribution(plant: &UncertainPlant, k: &Gain, grid_n: usize) -> Result<NormDistribution> {
    let d = norm_samples(plant, k, grid_n, Execution::default())?;
    if let Some(x) = d.unstable.first() {
        return Err(Error::UnstableSample(x.clone()));
    }
    Ok(d)
}
