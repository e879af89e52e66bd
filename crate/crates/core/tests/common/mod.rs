//! Oracles shared by the integration tests. Nothing here calls into the
//! library's basis, quadrature or plant evaluation.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Mat = DMatrix<f64>;

/// Legendre `P_0..P_n` and `P_n'` at `x` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (Vec<f64>, f64) {
    let mut p = vec![1.0, x];
    for k in 1..n {
        let kf = k as f64;
        p.push(((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0));
    }
    p.truncate(n + 1);
    let dp = if n == 0 { 0.0 } else { n as f64 * (x * p[n] - p[n - 1]) / (x * x - 1.0) };
    (p, dp)
}

/// Gauss–Legendre rule for the uniform probability measure on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p[n] / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes.push(x);
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// `φ_0..φ_n` orthonormal under `U[−1, 1]`: `√(2k+1) P_k`.
pub fn phi(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![1.0, x];
    for k in 1..n {
        let kf = k as f64;
        p.push(((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0));
    }
    p.truncate(n + 1);
    p.iter().enumerate().map(|(k, v)| v * ((2 * k + 1) as f64).sqrt()).collect()
}

pub fn rows(r: &[&[f64]]) -> Mat {
    Mat::from_fn(r.len(), r[0].len(), |i, j| r[i][j])
}

/// Two-state benchmark plant written out by hand.
pub struct BenchSample {
    pub a: Mat,
    pub b_w: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d_w: Mat,
    pub c_z: Mat,
    pub d_zw: Mat,
    pub d_z: Mat,
}

pub fn bench(xi: f64) -> BenchSample {
    let x3 = xi * xi * xi;
    BenchSample {
        a: rows(&[&[0.6 * x3, -0.4], &[0.1, 0.5]]),
        b_w: rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]]),
        b: rows(&[&[0.2 + x3], &[0.2]]),
        c: rows(&[&[1.0, x3], &[0.0, 1.0]]),
        d_w: rows(&[&[0.0, 0.0, 1.0 + 2.0 * x3, 0.0], &[0.0, 0.0, 0.0, 1.0]]),
        c_z: rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]),
        d_zw: Mat::zeros(3, 4),
        d_z: rows(&[&[0.0], &[0.0], &[0.2]]),
    }
}

/// Closed loop `(A_cl, B_cl, C_cl, D_cl)` of the benchmark at `ξ`.
pub fn bench_cl(xi: f64, k: &Mat) -> (Mat, Mat, Mat, Mat) {
    let s = bench(xi);
    (
        &s.a + &s.b * k * &s.c,
        &s.b_w + &s.b * k * &s.d_w,
        &s.c_z + &s.d_z * k * &s.c,
        &s.d_zw + &s.d_z * k * &s.d_w,
    )
}

/// `φᵀ ⊗ I_n`.
pub fn kron_row(phi: &[f64], n: usize) -> Mat {
    Mat::from_row_slice(1, phi.len(), phi).kronecker(&Mat::identity(n, n))
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| normal(rng))
}

/// Random Hurwitz `(A, B, C, D)` with state dimension in `2..=5`.
pub fn random_stable(rng: &mut ChaCha8Rng) -> (Mat, Mat, Mat, Mat) {
    let n = rng.random_range(2..=5);
    let m = rng.random_range(1..=3);
    let p = rng.random_range(1..=3);
    let mut a = random_mat(rng, n, n);
    let abscissa = a.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let shift = abscissa + rng.random_range(0.1..1.0);
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    let d = random_mat(rng, p, m) * 0.3;
    (a, random_mat(rng, n, m), random_mat(rng, p, n), d)
}

/// Largest singular value of `C (jωI − A)⁻¹ B + D` on a dense log grid
/// refined by golden-section search; a lower bound on the H∞ norm.
pub fn sweep_hinf(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> f64 {
    use nalgebra::Complex;
    let n = a.nrows();
    let gain = |w: f64| -> f64 {
        let m = nalgebra::DMatrix::<Complex<f64>>::from_fn(n, n, |i, j| {
            Complex::new(-a[(i, j)], if i == j { w } else { 0.0 })
        });
        let bc = b.map(|v| Complex::new(v, 0.0));
        let x = m.lu().solve(&bc).expect("jω is not an eigenvalue");
        let g = c.map(|v| Complex::new(v, 0.0)) * x + d.map(|v| Complex::new(v, 0.0));
        g.singular_values().max()
    };
    let grid: Vec<f64> = std::iter::once(0.0).chain((0..4000).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 3999.0))).collect();
    let (mut best_i, mut best) = (0, 0.0);
    for (i, &w) in grid.iter().enumerate() {
        let g = gain(w);
        if g > best {
            best = g;
            best_i = i;
        }
    }
    let (mut lo, mut hi) = (grid[best_i.saturating_sub(1)], grid[(best_i + 1).min(grid.len() - 1)]);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let (m1, m2) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if gain(m1) > gain(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.max(gain(0.5 * (lo + hi)))
}
