//! The uncertain plant
//!
//! ```text
//! ẋ = A(ξ) x + B_w(ξ) w + B(ξ) u
//! y = C(ξ) x + D_w(ξ) w
//! z = C_z x + D_zw w + D_z u
//! ```
//!
//! under static output feedback `u = K y`, plus parameter sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, Mat};
use crate::lti::LtiSystem;
use crate::polychaos::{Distribution, PolynomialMatrix};

pub mod benchmark;

/// State, control, disturbance, measurement and performance dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantDims {
    pub n_x: usize,
    pub n_u: usize,
    pub n_w: usize,
    pub n_y: usize,
    pub n_z: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertainPlant {
    pub a: PolynomialMatrix,
    pub b_w: PolynomialMatrix,
    pub b: PolynomialMatrix,
    pub c: PolynomialMatrix,
    pub d_w: PolynomialMatrix,
    pub c_z: Mat,
    pub d_zw: Mat,
    pub d_z: Mat,
    pub dist: Distribution,
}

/// The plant matrices at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantSample {
    pub a: Mat,
    pub b_w: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d_w: Mat,
    pub c_z: Mat,
    pub d_zw: Mat,
    pub d_z: Mat,
}

/// Closed-loop quadruple `(A_cl, B_cl, C_cl, D_cl)` at a fixed `ξ`.
pub type ClosedLoopSample = LtiSystem;

impl UncertainPlant {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: PolynomialMatrix,
        b_w: PolynomialMatrix,
        b: PolynomialMatrix,
        c: PolynomialMatrix,
        d_w: PolynomialMatrix,
        c_z: Mat,
        d_zw: Mat,
        d_z: Mat,
        dist: Distribution,
    ) -> Result<Self> {
        let n_x = a.rows();
        let n_w = b_w.cols();
        let n_u = b.cols();
        let n_y = c.rows();
        let n_z = c_z.nrows();
        let check = |name: &str, got: (usize, usize), want: (usize, usize)| -> Result<()> {
            if got != want {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {}x{}",
                    got.0, got.1, want.0, want.1
                )));
            }
            Ok(())
        };
        if n_x == 0 {
            return Err(Error::Dimension("A must have at least one state".into()));
        }
        check("A", a.shape(), (n_x, n_x))?;
        check("B_w", b_w.shape(), (n_x, n_w))?;
        check("B", b.shape(), (n_x, n_u))?;
        check("C", c.shape(), (n_y, n_x))?;
        check("D_w", d_w.shape(), (n_y, n_w))?;
        check("C_z", c_z.shape(), (n_z, n_x))?;
        check("D_zw", d_zw.shape(), (n_z, n_w))?;
        check("D_z", d_z.shape(), (n_z, n_u))?;
        if n_u == 0 || n_y == 0 || n_w == 0 || n_z == 0 {
            return Err(Error::Dimension("every channel needs at least one signal".into()));
        }
        let n_xi = dist.dim();
        for (name, m) in [("A", &a), ("B_w", &b_w), ("B", &b), ("C", &c), ("D_w", &d_w)] {
            if m.n_xi() != n_xi {
                return Err(Error::Dimension(format!(
                    "{name} depends on {} parameters but the distribution has {n_xi}",
                    m.n_xi()
                )));
            }
        }
        Ok(Self { a, b_w, b, c, d_w, c_z, d_zw, d_z, dist })
    }

    pub fn dims(&self) -> PlantDims {
        PlantDims {
            n_x: self.a.rows(),
            n_u: self.b.cols(),
            n_w: self.b_w.cols(),
            n_y: self.c.rows(),
            n_z: self.c_z.nrows(),
        }
    }

    pub fn n_xi(&self) -> usize {
        self.dist.dim()
    }

    /// Largest polynomial degree over the parameter-dependent matrices.
    pub fn degree(&self) -> usize {
        [&self.a, &self.b_w, &self.b, &self.c, &self.d_w]
            .iter()
            .map(|m| m.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn sample(&self, xi: &[f64]) -> PlantSample {
        PlantSample {
            a: self.a.eval(xi),
            b_w: self.b_w.eval(xi),
            b: self.b.eval(xi),
            c: self.c.eval(xi),
            d_w: self.d_w.eval(xi),
            c_z: self.c_z.clone(),
            d_zw: self.d_zw.clone(),
            d_z: self.d_z.clone(),
        }
    }
}

impl PlantSample {
    /// Closed loop under `u = K y`.
    pub fn close(&self, k: &Gain) -> ClosedLoopSample {
        let k = k.matrix();
        let bk = &self.b * k;
        let dzk = &self.d_z * k;
        LtiSystem {
            a: &self.a + &bk * &self.c,
            b: &self.b_w + &bk * &self.d_w,
            c: &self.c_z + &dzk * &self.c,
            d: &self.d_zw + &dzk * &self.d_w,
        }
    }
}

/// Static output-feedback gain `K ∈ R^{n_u × n_y}` with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Gain(Mat);

impl Gain {
    pub fn new(k: Mat) -> Result<Self> {
        if k.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("gain has non-finite entries".into()));
        }
        Ok(Self(k))
    }

    /// Single-row gain (one control input).
    pub fn row(values: &[f64]) -> Result<Self> {
        Self::new(Mat::from_row_slice(1, values.len(), values))
    }

    pub fn zeros(n_u: usize, n_y: usize) -> Self {
        Self(Mat::zeros(n_u, n_y))
    }

    // Solver iterates are finite by construction.
    pub(crate) fn from_mat(k: Mat) -> Self {
        Self(k)
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn norm_max(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn check_dims(&self, dims: &PlantDims) -> Result<()> {
        if self.shape() != (dims.n_u, dims.n_y) {
            return Err(Error::Dimension(format!(
                "gain is {}x{}, expected {}x{}",
                self.0.nrows(),
                self.0.ncols(),
                dims.n_u,
                dims.n_y
            )));
        }
        Ok(())
    }
}

/// `Σ_S M_S ξ^S`.
pub fn eval_polymat(m: &PolynomialMatrix, xi: &[f64]) -> Mat {
    m.eval(xi)
}

/// Closed-loop matrices at `xi`.
pub fn close_loop(plant: &UncertainPlant, k: &Gain, xi: &[f64]) -> Result<ClosedLoopSample> {
    k.check_dims(&plant.dims())?;
    if xi.len() != plant.n_xi() {
        return Err(Error::Dimension(format!("ξ has {} entries, expected {}", xi.len(), plant.n_xi())));
    }
    Ok(plant.sample(xi).close(k))
}

/// Parameter sampling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// `n` equispaced points per dimension over the grid range (tensor grid).
    Grid,
    /// `n` independent draws from the distribution.
    Random { seed: u64 },
}

/// Deterministic parameter samples.
pub fn sample_xi(dist: &Distribution, n: usize, mode: Sampling) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    Ok(match mode {
        Sampling::Grid => grid(dist, n),
        Sampling::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        }
    })
}

/// Tensor grid with `n` equispaced points per dimension (midpoint for `n = 1`).
pub fn grid(dist: &Distribution, n: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = dist
        .marginals()
        .iter()
        .map(|m| {
            let (lo, hi) = m.grid_range();
            if n == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            }
        })
        .collect();
    let mut pts = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(pts.len() * axis.len());
        for p in &pts {
            for &x in axis {
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

/// Corners of the grid-range box, the default polytope vertices.
pub fn box_vertices(dist: &Distribution) -> Vec<Vec<f64>> {
    let mut pts = vec![Vec::new()];
    for m in dist.marginals() {
        let (lo, hi) = m.grid_range();
        let mut next = Vec::new();
        for p in &pts {
            for x in [lo, hi] {
                let mut q: Vec<f64> = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_rows;

    #[test]
    fn grid_three_points() {
        let g = sample_xi(&Distribution::uniform_unit(1), 3, Sampling::Grid).unwrap();
        assert_eq!(g, vec![vec![-1.0], vec![0.0], vec![1.0]]);
    }

    #[test]
    fn random_is_seeded() {
        let d = Distribution::uniform_unit(2);
        let a = sample_xi(&d, 5, Sampling::Random { seed: 9 }).unwrap();
        let b = sample_xi(&d, 5, Sampling::Random { seed: 9 }).unwrap();
        let c = sample_xi(&d, 5, Sampling::Random { seed: 10 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(sample_xi(&Distribution::uniform_unit(1), 0, Sampling::Grid).is_err());
    }

    #[test]
    fn gain_rejects_nan() {
        assert!(Gain::row(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let c = |m: Mat| PolynomialMatrix::constant(m, 1);
        let r = UncertainPlant::new(
            c(from_rows(&[&[-1.0]])),
            c(from_rows(&[&[1.0]])),
            c(from_rows(&[&[1.0]])),
            c(from_rows(&[&[1.0, 0.0]])),
            c(from_rows(&[&[0.0]])),
            from_rows(&[&[1.0]]),
            from_rows(&[&[0.0]]),
            from_rows(&[&[0.0]]),
            Distribution::uniform_unit(1),
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
    }
}
