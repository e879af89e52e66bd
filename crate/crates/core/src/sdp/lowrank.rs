//! Symmetric coefficient matrices stored as `F = Σ_r (e_r a_rᵀ + a_r e_rᵀ)`
//! over a greedy row cover of the sparsity pattern.

use crate::linalg::Mat;

#[derive(Debug, Clone)]
pub(super) struct LowRank {
    pub rows: Vec<usize>,
    pub vecs: Vec<Vec<f64>>,
}

impl LowRank {
    pub fn from_dense(f: &Mat) -> Self {
        let n = f.nrows();
        let mut assigned = vec![false; n * n];
        let mut counts = vec![0usize; n];
        for r in 0..n {
            for c in 0..n {
                if f[(r, c)] != 0.0 {
                    counts[r] += 1;
                }
            }
        }
        let mut rows = Vec::new();
        let mut vecs = Vec::new();
        while let Some((r, &best)) = counts.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))) {
            if best == 0 {
                break;
            }
            let mut a = vec![0.0; n];
            for c in 0..n {
                let v = f[(r, c)];
                if v == 0.0 || assigned[r * n + c] {
                    continue;
                }
                assigned[r * n + c] = true;
                assigned[c * n + r] = true;
                counts[r] -= 1;
                if c == r {
                    a[r] = 0.5 * v;
                } else {
                    a[c] = v;
                    counts[c] -= 1;
                }
            }
            rows.push(r);
            vecs.push(a);
        }
        Self { rows, vecs }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// `⟨F, Y⟩` for symmetric `Y`.
    pub fn inner(&self, y: &Mat) -> f64 {
        let mut acc = 0.0;
        for (&r, a) in self.rows.iter().zip(&self.vecs) {
            let mut s = 0.0;
            for (c, &v) in a.iter().enumerate() {
                if v != 0.0 {
                    s += y[(r, c)] * v;
                }
            }
            acc += 2.0 * s;
        }
        acc
    }

    /// `dst += alpha · F`.
    pub fn add_to(&self, dst: &mut Mat, alpha: f64) {
        for (&r, a) in self.rows.iter().zip(&self.vecs) {
            for (c, &v) in a.iter().enumerate() {
                if v != 0.0 {
                    dst[(r, c)] += alpha * v;
                    dst[(c, r)] += alpha * v;
                }
            }
        }
    }

    /// `W F W` for symmetric `W`, by rank-two updates.
    pub fn congruence(&self, w: &Mat) -> Mat {
        let n = w.nrows();
        let mut y = Mat::zeros(n, n);
        for (&r, a) in self.rows.iter().zip(&self.vecs) {
            let mut u = vec![0.0; n];
            for (c, &v) in a.iter().enumerate() {
                if v != 0.0 {
                    for (i, ui) in u.iter_mut().enumerate() {
                        *ui += w[(i, c)] * v;
                    }
                }
            }
            for j in 0..n {
                let wj = w[(j, r)];
                let uj = u[j];
                for i in 0..n {
                    y[(i, j)] += w[(i, r)] * uj + u[i] * wj;
                }
            }
        }
        y
    }
}
