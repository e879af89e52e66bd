use std::collections::HashMap;

use super::distribution::Distribution;
use super::multi_index::{basis_count, graded_lex, MultiIndex};
use super::polymat::PolynomialMatrix;
use super::quadrature::{orthonormal_values, Quadrature};
use crate::error::{Error, Result};
use crate::linalg::{zeros, Mat};

/// Orthonormality defect above which construction fails.
pub const SELF_CHECK_TOL: f64 = 1e-8;

/// Orthonormal polynomial basis `{φ_i}` of total degree ≤ `p` for a
/// distribution of independent parameters.
///
/// Functions are tabulated up to a larger working degree `w ≥ p` so that
/// products such as `φ_i(ξ) B(ξ)` have exact expansions. The first
/// `size()` entries of the table form the degree-`p` basis; `φ_0 ≡ 1`.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    dist: Distribution,
    degree: usize,
    working_degree: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    recurrences: Vec<(Vec<f64>, Vec<f64>)>,
    univariate: Vec<Vec<Vec<f64>>>,
    monomial_inverse: Vec<Vec<Vec<f64>>>,
    quadrature: Quadrature,
}

/// Default Gauss nodes per dimension: enough for the `3p + d` integrands of
/// the Galerkin assembly and for every triple product in the working table.
pub fn default_quad_nodes(p: usize, working_degree: usize) -> usize {
    let d = working_degree.saturating_sub(p);
    let assembly = (3 * p + d + 2).div_ceil(2) + 1;
    let triple = (3 * working_degree + 1).div_ceil(2);
    assembly.max(triple).max(1)
}

impl OrthonormalBasis {
    /// Builds the basis of degree `p` with a monomial table up to
    /// `p + plant_degree`. `quad_nodes` overrides the per-dimension Gauss
    /// node count.
    pub fn build(dist: &Distribution, p: usize, plant_degree: usize, quad_nodes: Option<usize>) -> Result<Self> {
        let n_xi = dist.dim();
        let w = p + plant_degree;
        let nodes = quad_nodes.unwrap_or_else(|| default_quad_nodes(p, w));
        if nodes == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
        }
        let indices = graded_lex(n_xi, w);
        let lookup = indices.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let recurrences: Vec<_> = dist.marginals().iter().map(|m| m.recurrence(w + 2)).collect();
        let univariate: Vec<_> = recurrences.iter().map(|(a, b)| monomial_coefficients(a, b, w)).collect();
        let monomial_inverse: Vec<_> = univariate.iter().map(|c| invert_lower(c)).collect();
        let quadrature = Quadrature::tensor(dist, nodes);
        let basis = Self {
            dist: dist.clone(),
            degree: p,
            working_degree: w,
            indices,
            lookup,
            recurrences,
            univariate,
            monomial_inverse,
            quadrature,
        };
        let defect = basis.univariate_orthonormality_defect(nodes);
        if defect > SELF_CHECK_TOL {
            return Err(Error::QuadratureTooSmall(defect));
        }
        Ok(basis)
    }

    // Gram defect of the 1-D families up to the working degree. The tensor
    // rule factorizes, so this bounds the multivariate defect.
    fn univariate_orthonormality_defect(&self, nodes: usize) -> f64 {
        let w = self.working_degree;
        let mut worst: f64 = 0.0;
        for (k, m) in self.dist.marginals().iter().enumerate() {
            let (x, wt) = super::quadrature::gauss_rule(m, nodes);
            let (a, b) = &self.recurrences[k];
            let vals: Vec<Vec<f64>> = x.iter().map(|&xi| orthonormal_values(a, b, w, xi)).collect();
            for i in 0..=w {
                for j in 0..=i {
                    let g: f64 = vals.iter().zip(&wt).map(|(v, q)| q * v[i] * v[j]).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g - target).abs());
                }
            }
        }
        worst
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    pub fn n_xi(&self) -> usize {
        self.dist.dim()
    }

    /// PCE degree `p`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn working_degree(&self) -> usize {
        self.working_degree
    }

    /// `N_p + 1`.
    pub fn size(&self) -> usize {
        basis_count(self.n_xi(), self.degree)
    }

    /// Number of basis functions of total degree ≤ `d`.
    pub fn size_for_degree(&self, d: usize) -> usize {
        basis_count(self.n_xi(), d)
    }

    /// Number of tabulated functions (degree ≤ working degree).
    pub fn table_size(&self) -> usize {
        self.indices.len()
    }

    pub fn multi_index(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    pub fn position(&self, s: &MultiIndex) -> Option<usize> {
        self.lookup.get(s).copied()
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    /// Values of every tabulated `φ_i` at `xi`.
    pub fn eval_all(&self, xi: &[f64]) -> Vec<f64> {
        self.eval_first(xi, self.table_size())
    }

    /// Values of `φ_0 … φ_{n−1}` at `xi`.
    pub fn eval_first(&self, xi: &[f64], n: usize) -> Vec<f64> {
        assert_eq!(xi.len(), self.n_xi(), "parameter dimension");
        assert!(n <= self.table_size(), "requested beyond the working table");
        let w = self.working_degree;
        let uni: Vec<Vec<f64>> = self
            .recurrences
            .iter()
            .zip(xi)
            .map(|((a, b), &x)| orthonormal_values(a, b, w, x))
            .collect();
        self.indices[..n]
            .iter()
            .map(|m| m.exponents().iter().enumerate().map(|(k, &e)| uni[k][e as usize]).product())
            .collect()
    }

    pub fn eval(&self, i: usize, xi: &[f64]) -> f64 {
        let w = self.working_degree;
        self.indices[i]
            .exponents()
            .iter()
            .enumerate()
            .map(|(k, &e)| {
                let (a, b) = &self.recurrences[k];
                orthonormal_values(a, b, w, xi[k])[e as usize]
            })
            .product()
    }

    /// Monomial coefficients of the univariate `φ_n` in dimension `k`:
    /// entry `m` multiplies `ξ_k^m`.
    pub fn univariate_coefficients(&self, k: usize, n: usize) -> &[f64] {
        &self.univariate[k][n]
    }

    /// Monomial representation of `φ_i` as `(S, coefficient)` pairs.
    pub fn basis_polynomial(&self, i: usize) -> Vec<(MultiIndex, f64)> {
        let idx = &self.indices[i];
        let mut terms = vec![(Vec::<u32>::new(), 1.0)];
        for (k, &e) in idx.exponents().iter().enumerate() {
            let coeffs = &self.univariate[k][e as usize];
            let mut next = Vec::new();
            for (exps, c) in &terms {
                for (m, &a) in coeffs.iter().enumerate() {
                    if a != 0.0 {
                        let mut ex = exps.clone();
                        ex.push(m as u32);
                        next.push((ex, c * a));
                    }
                }
            }
            terms = next;
        }
        terms.into_iter().map(|(e, c)| (MultiIndex::new(e), c)).collect()
    }

    /// Exact expansion `ξ^S = Σ_k β_{Sk} φ_k`, zero-padded to `len`.
    pub fn monomial_pce(&self, s: &MultiIndex, len: usize) -> Result<Vec<f64>> {
        if s.dim() != self.n_xi() {
            return Err(Error::Dimension(format!("monomial {s} has {} variables, expected {}", s.dim(), self.n_xi())));
        }
        if s.degree() > self.working_degree {
            return Err(Error::DegreeOverflow { degree: s.degree(), max: self.working_degree });
        }
        let needed = self.size_for_degree(s.degree());
        if len < needed || len > self.table_size() {
            return Err(Error::InvalidArgument(format!(
                "coefficient length {len} outside [{needed}, {}]",
                self.table_size()
            )));
        }
        let mut out = vec![0.0; len];
        let mut partial: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), 1.0)];
        for (k, &e) in s.exponents().iter().enumerate() {
            let row = &self.monomial_inverse[k][e as usize];
            let mut next = Vec::new();
            for (exps, c) in &partial {
                for (n, &b) in row.iter().enumerate().take(e as usize + 1) {
                    if b != 0.0 {
                        let mut ex = exps.clone();
                        ex.push(n as u32);
                        next.push((ex, c * b));
                    }
                }
            }
            partial = next;
        }
        for (exps, c) in partial {
            let pos = self.lookup[&MultiIndex::new(exps)];
            out[pos] += c;
        }
        Ok(out)
    }

    /// `ψ_i = E{f φ_i}` for `i < size()`.
    pub fn project<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        self.project_n(f, self.size())
    }

    /// `ψ_i = E{f φ_i}` for `i < n`.
    pub fn project_n<F: Fn(&[f64]) -> f64>(&self, f: F, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (x, w) in self.quadrature.nodes.iter().zip(&self.quadrature.weights) {
            let fx = f(x) * w;
            for (o, v) in out.iter_mut().zip(self.eval_first(x, n)) {
                *o += fx * v;
            }
        }
        out
    }

    /// `E{φ_i φ_j φ_k}` by quadrature; exact within the working table.
    pub fn triple_product(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = i.max(j).max(k) + 1;
        self.quadrature
            .nodes
            .iter()
            .zip(&self.quadrature.weights)
            .map(|(x, w)| {
                let v = self.eval_first(x, n);
                w * v[i] * v[j] * v[k]
            })
            .sum()
    }

    /// Dense tensor `e[(i·n + j)·n + k] = E{φ_i φ_j φ_k}` for indices `< n`.
    pub fn triple_tensor(&self, n: usize) -> Vec<f64> {
        let mut e = vec![0.0; n * n * n];
        for (x, w) in self.quadrature.nodes.iter().zip(&self.quadrature.weights) {
            let v = self.eval_first(x, n);
            for i in 0..n {
                for j in 0..n {
                    let wij = w * v[i] * v[j];
                    for k in 0..n {
                        e[(i * n + j) * n + k] += wij * v[k];
                    }
                }
            }
        }
        e
    }

    /// Exact PCE coefficients `M̂_0 … M̂_{N_q}` of a polynomial matrix.
    pub fn polymat_pce(&self, m: &PolynomialMatrix, q: usize) -> Result<Vec<Mat>> {
        if m.n_xi() != self.n_xi() {
            return Err(Error::Dimension(format!("matrix in {} variables, basis in {}", m.n_xi(), self.n_xi())));
        }
        if m.degree() > q {
            return Err(Error::InvalidArgument(format!("matrix degree {} exceeds output degree {q}", m.degree())));
        }
        if q > self.working_degree {
            return Err(Error::DegreeOverflow { degree: q, max: self.working_degree });
        }
        let len = self.size_for_degree(q);
        let mut out = vec![zeros(m.rows(), m.cols()); len];
        for (s, coeff) in m.terms() {
            let beta = self.monomial_pce(s, len)?;
            for (o, b) in out.iter_mut().zip(beta) {
                if b != 0.0 {
                    *o += coeff * b;
                }
            }
        }
        Ok(out)
    }

    /// Expectation of a matrix-valued function under the stored quadrature.
    pub fn expect_matrix<F: Fn(&[f64], &[f64]) -> Mat>(&self, n_phi: usize, f: F) -> Mat {
        let mut acc: Option<Mat> = None;
        for (x, w) in self.quadrature.nodes.iter().zip(&self.quadrature.weights) {
            let v = self.eval_first(x, n_phi);
            let fx = f(x, &v) * *w;
            match acc.as_mut() {
                Some(a) => *a += fx,
                None => acc = Some(fx),
            }
        }
        acc.unwrap_or_else(|| zeros(0, 0))
    }
}

/// `(mean, variance) = (ψ_0, Σ_{i≥1} ψ_i²)`.
pub fn mean_var(coeffs: &[f64]) -> (f64, f64) {
    assert!(!coeffs.is_empty(), "empty coefficient vector");
    (coeffs[0], coeffs[1..].iter().map(|c| c * c).sum())
}

// Rows `n` hold the monomial coefficients of φ_n, n ≤ w.
fn monomial_coefficients(alpha: &[f64], beta: &[f64], w: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(w + 1);
    out.push({
        let mut v = vec![0.0; w + 1];
        v[0] = 1.0;
        v
    });
    for k in 0..w {
        let mut next = vec![0.0; w + 1];
        let cur = &out[k];
        for m in 0..w {
            next[m + 1] += cur[m];
        }
        for m in 0..=w {
            next[m] -= alpha[k] * cur[m];
        }
        if k >= 1 {
            let prev = &out[k - 1];
            let s = beta[k].sqrt();
            for m in 0..=w {
                next[m] -= s * prev[m];
            }
        }
        let s = beta[k + 1].sqrt();
        for v in next.iter_mut() {
            *v /= s;
        }
        out.push(next);
    }
    out
}

// Inverts the lower-triangular coefficient table: row k gives ξ^k in φ_0..φ_k.
fn invert_lower(coeffs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = coeffs.len();
    let mut inv = vec![vec![0.0; n]; n];
    for k in 0..n {
        // ξ^k = (φ_k − Σ_{m<k} a_{km} ξ^m) / a_{kk}
        let akk = coeffs[k][k];
        inv[k][k] = 1.0 / akk;
        for m in 0..k {
            let a = coeffs[k][m];
            if a == 0.0 {
                continue;
            }
            for j in 0..=m {
                inv[k][j] -= a * inv[m][j] / akk;
            }
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polychaos::Marginal;

    fn unit(p: usize, d: usize) -> OrthonormalBasis {
        OrthonormalBasis::build(&Distribution::uniform_unit(1), p, d, None).unwrap()
    }

    #[test]
    fn legendre_coefficients() {
        let b = unit(3, 0);
        let s5 = 5f64.sqrt();
        let s7 = 7f64.sqrt();
        let expect = [
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 3f64.sqrt(), 0.0, 0.0],
            vec![-s5 / 2.0, 0.0, 1.5 * s5, 0.0],
            vec![0.0, -1.5 * s7, 0.0, 2.5 * s7],
        ];
        for (n, row) in expect.iter().enumerate() {
            for (m, v) in row.iter().enumerate() {
                assert!((b.univariate_coefficients(0, n)[m] - v).abs() < 1e-13, "φ_{n} coefficient {m}");
            }
        }
    }

    #[test]
    fn constant_basis() {
        let b = unit(0, 0);
        assert_eq!(b.size(), 1);
        assert_eq!(b.eval(0, &[0.3]), 1.0);
    }

    #[test]
    fn monomial_round_trip_2d_gaussian() {
        let dist = Distribution::independent(vec![Marginal::standard_gaussian(), Marginal::uniform(0.0, 2.0).unwrap()]);
        let b = OrthonormalBasis::build(&dist, 2, 2, None).unwrap();
        let s = MultiIndex::new(vec![2, 2]);
        let beta = b.monomial_pce(&s, b.table_size()).unwrap();
        for xi in [[0.3, 1.7], [-1.2, 0.2]] {
            let phi = b.eval_all(&xi);
            let r: f64 = beta.iter().zip(&phi).map(|(a, c)| a * c).sum();
            assert!((r - s.eval(&xi)).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_nodes_rejected() {
        let err = OrthonormalBasis::build(&Distribution::uniform_unit(1), 4, 0, Some(2)).unwrap_err();
        assert!(matches!(err, Error::QuadratureTooSmall(_)));
    }

    #[test]
    fn degree_overflow() {
        let b = unit(2, 1);
        assert!(matches!(
            b.monomial_pce(&MultiIndex::new(vec![4]), 5),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn mean_var_examples() {
        assert_eq!(mean_var(&[2.0, 0.0, 0.0]), (2.0, 0.0));
        let (m, v) = mean_var(&[0.0, 1.0 / 3f64.sqrt()]);
        assert_eq!(m, 0.0);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }
}
