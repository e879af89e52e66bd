use std::fmt;

/// Exponent vector `(s_1, …, s_n)` of the monomial `ξ_1^{s_1}⋯ξ_n^{s_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(n_xi: usize) -> Self {
        Self(vec![0; n_xi])
    }

    /// `ξ_k^power` in `n_xi` variables.
    pub fn axis(n_xi: usize, k: usize, power: u32) -> Self {
        let mut e = vec![0; n_xi];
        e[k] = power;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// Evaluates the monomial at `xi`.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(xi)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }

    /// Componentwise sum, i.e. the exponent of a product of monomials.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of total degree ≤ `max_degree` in graded lexicographic
/// order: ascending total degree, then descending exponent of `ξ_1`, `ξ_2`, ….
pub fn graded_lex(n_xi: usize, max_degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut buf = vec![0u32; n_xi];
    for d in 0..=max_degree {
        if n_xi == 0 {
            if d == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            continue;
        }
        compositions(d as u32, 0, &mut buf, &mut out);
    }
    out
}

fn compositions(remaining: u32, pos: usize, buf: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex(buf.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        buf[pos] = e;
        compositions(remaining - e, pos + 1, buf, out);
    }
}

/// `(n + p)! / (n! p!)`, the number of multi-indices of degree ≤ p.
pub fn basis_count(n_xi: usize, p: usize) -> usize {
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for k in 1..=n_xi.min(p) as u128 {
        num *= (n_xi.max(p) as u128) + k;
        den *= k;
    }
    (num / den) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_in_two_variables() {
        let idx = graded_lex(2, 2);
        let e: Vec<Vec<u32>> = idx.iter().map(|m| m.exponents().to_vec()).collect();
        assert_eq!(
            e,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn counts_match_binomial() {
        for n in 1..=4 {
            for p in 0..=8 {
                assert_eq!(graded_lex(n, p).len(), basis_count(n, p), "n={n} p={p}");
            }
        }
        assert_eq!(basis_count(1, 10), 11);
        assert_eq!(basis_count(3, 2), 10);
    }

    #[test]
    fn degree_and_eval() {
        let m = MultiIndex::new(vec![2, 1]);
        assert_eq!(m.degree(), 3);
        assert!((m.eval(&[3.0, 0.5]) - 4.5).abs() < 1e-15);
    }
}
