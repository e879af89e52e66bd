use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::multi_index::MultiIndex;
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Matrix whose entries are polynomials in `ξ`, stored as
/// `M(ξ) = Σ_S M_S ξ^S` over multi-indices `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMatrix {
    rows: usize,
    cols: usize,
    n_xi: usize,
    terms: BTreeMap<MultiIndex, Mat>,
}

impl PolynomialMatrix {
    pub fn zeros(rows: usize, cols: usize, n_xi: usize) -> Self {
        Self { rows, cols, n_xi, terms: BTreeMap::new() }
    }

    pub fn constant(m: Mat, n_xi: usize) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols(), n_xi);
        out.terms.insert(MultiIndex::zero(n_xi), m);
        out
    }

    /// Adds `coeff · ξ^S` to the matrix.
    pub fn add_term(&mut self, s: MultiIndex, coeff: Mat) -> Result<()> {
        if s.dim() != self.n_xi {
            return Err(Error::Dimension(format!("monomial {s} has {} variables, expected {}", s.dim(), self.n_xi)));
        }
        if coeff.shape() != (self.rows, self.cols) {
            return Err(Error::Dimension(format!(
                "coefficient is {}x{}, expected {}x{}",
                coeff.nrows(),
                coeff.ncols(),
                self.rows,
                self.cols
            )));
        }
        let rows = self.rows;
        let cols = self.cols;
        *self.terms.entry(s).or_insert_with(|| DMatrix::zeros(rows, cols)) += coeff;
        Ok(())
    }

    /// Adds `value · ξ^S` to entry `(r, c)`.
    pub fn add_entry(&mut self, r: usize, c: usize, s: MultiIndex, value: f64) -> Result<()> {
        if r >= self.rows || c >= self.cols {
            return Err(Error::Dimension(format!("entry ({r},{c}) outside {}x{}", self.rows, self.cols)));
        }
        let mut m = DMatrix::zeros(self.rows, self.cols);
        m[(r, c)] = value;
        self.add_term(s, m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn n_xi(&self) -> usize {
        self.n_xi
    }

    /// Nonzero terms in multi-index order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Mat)> {
        self.terms.iter().filter(|(_, m)| m.iter().any(|x| *x != 0.0))
    }

    /// Largest total degree among nonzero terms; zero for the zero matrix.
    pub fn degree(&self) -> usize {
        self.terms().map(|(s, _)| s.degree()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    /// `Σ_S M_S ξ^S`.
    pub fn eval(&self, xi: &[f64]) -> Mat {
        assert_eq!(xi.len(), self.n_xi, "parameter dimension");
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for (s, m) in &self.terms {
            out += m * s.eval(xi);
        }
        out
    }

    /// Coefficient of `ξ^S` (zero when absent).
    pub fn coefficient(&self, s: &MultiIndex) -> Mat {
        self.terms.get(s).cloned().unwrap_or_else(|| DMatrix::zeros(self.rows, self.cols))
    }

    /// Keeps the polynomial structure but replaces every coefficient by its
    /// value under `f`.
    pub fn map_coefficients<F: Fn(&Mat) -> Mat>(&self, f: F) -> Result<Self> {
        let mut terms = BTreeMap::new();
        let mut shape = None;
        for (s, m) in &self.terms {
            let v = f(m);
            if let Some(sh) = shape {
                if sh != v.shape() {
                    return Err(Error::Dimension("map_coefficients changed shapes inconsistently".into()));
                }
            }
            shape = Some(v.shape());
            terms.insert(s.clone(), v);
        }
        let (rows, cols) = shape.unwrap_or((self.rows, self.cols));
        Ok(Self { rows, cols, n_xi: self.n_xi, terms })
    }

    /// Product of two polynomial matrices.
    pub fn mul(&self, rhs: &PolynomialMatrix) -> Result<Self> {
        if self.cols != rhs.rows || self.n_xi != rhs.n_xi {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols, self.n_xi);
        for (s, a) in &self.terms {
            for (t, b) in &rhs.terms {
                out.add_term(s.add(t), a * b)?;
            }
        }
        Ok(out)
    }

    /// Entrywise sum.
    pub fn add(&self, rhs: &PolynomialMatrix) -> Result<Self> {
        if self.shape() != rhs.shape() || self.n_xi != rhs.n_xi {
            return Err(Error::Dimension("cannot add polynomial matrices of different shape".into()));
        }
        let mut out = self.clone();
        for (t, b) in &rhs.terms {
            out.add_term(t.clone(), b.clone())?;
        }
        Ok(out)
    }
}
