use nalgebra::{DMatrix, SymmetricEigen};

use super::distribution::{Distribution, Marginal};

/// Tensor-product Gauss rule; weights sum to one (probability measure).
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `E{f(ξ)}` under the rule.
    pub fn expect<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    /// Tensor product of per-dimension rules built for `dist`.
    pub fn tensor(dist: &Distribution, nodes_per_dim: usize) -> Self {
        let rules: Vec<(Vec<f64>, Vec<f64>)> = dist
            .marginals()
            .iter()
            .map(|m| gauss_rule(m, nodes_per_dim))
            .collect();
        let mut nodes = vec![Vec::new()];
        let mut weights = vec![1.0];
        for (x, w) in &rules {
            let mut nn = Vec::with_capacity(nodes.len() * x.len());
            let mut nw = Vec::with_capacity(nodes.len() * x.len());
            for (p, pw) in nodes.iter().zip(&weights) {
                for (xi, wi) in x.iter().zip(w) {
                    let mut q = p.clone();
                    q.push(*xi);
                    nn.push(q);
                    nw.push(pw * wi);
                }
            }
            nodes = nn;
            weights = nw;
        }
        Self { nodes, weights }
    }
}

/// Orthonormal polynomial values `φ_0(x) … φ_n(x)` from the recurrence.
pub fn orthonormal_values(alpha: &[f64], beta: &[f64], n: usize, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(1.0);
    if n == 0 {
        return v;
    }
    v.push((x - alpha[0]) / beta[1].sqrt());
    for k in 1..n {
        let next = ((x - alpha[k]) * v[k] - beta[k].sqrt() * v[k - 1]) / beta[k + 1].sqrt();
        v.push(next);
    }
    v
}

/// `φ_n(x)` and `φ_n'(x)` by differentiating the recurrence.
fn value_and_derivative(alpha: &[f64], beta: &[f64], n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut d0) = (1.0, 0.0);
    if n == 0 {
        return (p0, d0);
    }
    let s1 = beta[1].sqrt();
    let (mut p1, mut d1) = ((x - alpha[0]) / s1, 1.0 / s1);
    for k in 1..n {
        let s = beta[k + 1].sqrt();
        let sk = beta[k].sqrt();
        let p2 = ((x - alpha[k]) * p1 - sk * p0) / s;
        let d2 = (p1 + (x - alpha[k]) * d1 - sk * d0) / s;
        p0 = p1;
        d0 = d1;
        p1 = p2;
        d1 = d2;
    }
    (p1, d1)
}

/// `n`-point Gauss rule for one marginal (Golub–Welsch, then Newton-polished
/// nodes and Christoffel weights). Nodes ascend.
pub fn gauss_rule(m: &Marginal, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let (alpha, beta) = m.recurrence(n + 1);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jac[(k, k)] = alpha[k];
        if k + 1 < n {
            let s = beta[k + 1].sqrt();
            jac[(k, k + 1)] = s;
            jac[(k + 1, k)] = s;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d) = value_and_derivative(&alpha, &beta, n, *x);
            if d == 0.0 {
                break;
            }
            let step = p / d;
            *x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
                break;
            }
        }
    }
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let v = orthonormal_values(&alpha, &beta, n - 1, x);
            1.0 / v.iter().map(|t| t * t).sum::<f64>()
        })
        .collect();
    (nodes, weights)
}
