use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};

use crate::error::{Error, Result};

/// Law of one scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    /// Uniform on `[a, b]`; Legendre family.
    Uniform { a: f64, b: f64 },
    /// Normal with the given mean and standard deviation; Hermite family.
    Gaussian { mean: f64, std: f64 },
}

impl Marginal {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!("uniform bounds must satisfy a < b, got [{a}, {b}]")));
        }
        Ok(Marginal::Uniform { a, b })
    }

    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        if !(mean.is_finite() && std.is_finite() && std > 0.0) {
            return Err(Error::InvalidArgument(format!("gaussian needs finite mean and std > 0, got ({mean}, {std})")));
        }
        Ok(Marginal::Gaussian { mean, std })
    }

    pub fn standard_gaussian() -> Self {
        Marginal::Gaussian { mean: 0.0, std: 1.0 }
    }

    /// Monic three-term recurrence `π_{k+1} = (x − α_k) π_k − β_k π_{k−1}`
    /// for `k < n`, with `β_0 = 1` (probability measure).
    pub fn recurrence(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut alpha = vec![0.0; n];
        let mut beta = vec![0.0; n];
        match *self {
            Marginal::Uniform { a, b } => {
                let c = 0.5 * (a + b);
                let h2 = 0.25 * (b - a) * (b - a);
                for k in 0..n {
                    alpha[k] = c;
                    let kf = k as f64;
                    beta[k] = if k == 0 { 1.0 } else { h2 * kf * kf / (4.0 * kf * kf - 1.0) };
                }
            }
            Marginal::Gaussian { mean, std } => {
                for k in 0..n {
                    alpha[k] = mean;
                    beta[k] = if k == 0 { 1.0 } else { std * std * k as f64 };
                }
            }
        }
        (alpha, beta)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Uniform { a, b } => 0.5 * (a + b),
            Marginal::Gaussian { mean, .. } => mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Marginal::Uniform { a, b } => (b - a) * (b - a) / 12.0,
            Marginal::Gaussian { std, .. } => std * std,
        }
    }

    /// Interval swept by grid sampling: the support for uniform laws and
    /// `mean ± 3 std` for Gaussian ones.
    pub fn grid_range(&self) -> (f64, f64) {
        match *self {
            Marginal::Uniform { a, b } => (a, b),
            Marginal::Gaussian { mean, std } => (mean - 3.0 * std, mean + 3.0 * std),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            Marginal::Gaussian { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + std * z
            }
        }
    }

    /// Endpoints of the range of `x^power` for `x` in the grid range.
    pub fn power_range(&self, power: u32) -> (f64, f64) {
        let (lo, hi) = self.grid_range();
        let (a, b) = (lo.powi(power as i32), hi.powi(power as i32));
        if power % 2 == 0 && lo < 0.0 && hi > 0.0 {
            (0.0, a.max(b))
        } else {
            (a.min(b), a.max(b))
        }
    }
}

/// Joint law of independent parameters `ξ = (ξ_1, …, ξ_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    marginals: Vec<Marginal>,
}

impl Distribution {
    pub fn independent(marginals: Vec<Marginal>) -> Self {
        Self { marginals }
    }

    pub fn uniform_unit(n_xi: usize) -> Self {
        Self::independent(vec![Marginal::Uniform { a: -1.0, b: 1.0 }; n_xi])
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn marginal(&self, k: usize) -> &Marginal {
        &self.marginals[k]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.marginals.iter().map(|m| m.sample(rng)).collect()
    }
}
