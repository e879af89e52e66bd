mod common;

use common::{bench_cl, gauss_legendre, rows, Mat};
use pce_hinf::eval::{moment_error, norm_samples, simulate_expanded, simulate_monte_carlo, transform_error, SimConfig};
use pce_hinf::linalg::from_rows;
use pce_hinf::plant::{benchmark, Gain, UncertainPlant};
use pce_hinf::polychaos::{build_basis, PolynomialMatrix};
use pce_hinf::Execution;

fn gain(k: [f64; 2]) -> Gain {
    Gain::row(&k).unwrap()
}

// Exact mean of x(t) under U[−1, 1] from a 101-node rule.
fn exact_mean(k: &Mat, x0: &[f64], t: f64) -> Mat {
    let (nodes, weights) = gauss_legendre(101);
    let x0 = Mat::from_column_slice(2, 1, x0);
    let mut mean = Mat::zeros(2, 1);
    for (&xi, &w) in nodes.iter().zip(&weights) {
        mean += (bench_cl(xi, k).0 * t).exp() * &x0 * w;
    }
    mean
}

#[test]
fn monte_carlo_error_shrinks_like_inverse_square_root() {
    let plant = benchmark::plant();
    let k = gain(benchmark::K_NOMINAL_P2);
    let x0 = [1.0, 1.0];
    let truth = exact_mean(k.matrix(), &x0, 1.0);
    let rms = |n: usize| -> f64 {
        let mut acc = 0.0;
        for seed in 0..60 {
            let cfg = SimConfig { t_end: 1.0, dt: 1e-2, record_every: 100, n_mc: n, seed, ..SimConfig::default() };
            let s = simulate_monte_carlo(&plant, &k, &x0, &cfg).unwrap();
            let m = Mat::from_column_slice(2, 1, s.mean.last().unwrap());
            acc += (m - &truth).norm_squared();
        }
        (acc / 60.0).sqrt()
    };
    let ratio = rms(200) / rms(400);
    assert!((1.2..=1.7).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn expanded_variance_is_nonnegative() {
    let plant = benchmark::plant();
    let basis = build_basis(&plant.dist, 3, plant.degree(), None).unwrap();
    let cfg = SimConfig { t_end: 2.0, dt: 1e-2, ..SimConfig::default() };
    let (p, l) = simulate_expanded(&plant, &gain(benchmark::K_NOMINAL_P3), &basis, &[1.0, -0.5], &cfg).unwrap();
    assert!(p.var.iter().chain(&l.var).flatten().all(|&v| v >= 0.0));
}

#[test]
fn monte_carlo_is_identical_across_execution_policies() {
    let plant = benchmark::plant();
    let k = gain(benchmark::K_WORST_CASE);
    let run = |execution| {
        let cfg = SimConfig { t_end: 0.5, dt: 1e-2, n_mc: 300, seed: 4, execution, ..SimConfig::default() };
        simulate_monte_carlo(&plant, &k, &[1.0, 1.0], &cfg).unwrap()
    };
    let (a, b) = (run(Execution::Sequential), run(Execution::Parallel));
    assert_eq!(a.mean, b.mean);
    assert_eq!(a.var, b.var);
    let n1 = norm_samples(&plant, &k, 101, Execution::Sequential).unwrap();
    let n2 = norm_samples(&plant, &k, 101, Execution::Parallel).unwrap();
    assert_eq!(n1, n2);
}

#[test]
fn nominal_designs_trade_worst_case_for_average() {
    let plant = benchmark::plant();
    let wc = norm_samples(&plant, &gain(benchmark::K_WORST_CASE), 1000, Execution::default()).unwrap();
    for k in [benchmark::K_NOMINAL_P2, benchmark::K_NOMINAL_P3, benchmark::K_NOMINAL_P10] {
        let nd = norm_samples(&plant, &gain(k), 1000, Execution::default()).unwrap();
        assert!(nd.averaged < wc.averaged && nd.worst_case > wc.worst_case, "{k:?}");
    }
}

fn constant_io_plant() -> UncertainPlant {
    let b = benchmark::plant();
    let c = |m: Mat| PolynomialMatrix::constant(m, 1);
    UncertainPlant::new(
        b.a.clone(),
        b.b_w.clone(),
        c(rows(&[&[0.2], &[0.2]])),
        c(Mat::identity(2, 2)),
        c(from_rows(&[&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]])),
        b.c_z.clone(),
        b.d_zw.clone(),
        b.d_z.clone(),
        b.dist.clone(),
    )
    .unwrap()
}

#[test]
fn transforms_coincide_for_constant_input_output_maps() {
    let plant = constant_io_plant();
    let basis = build_basis(&plant.dist, 2, plant.degree(), None).unwrap();
    let cfg = SimConfig { t_end: 2.0, dt: 1e-2, ..SimConfig::default() };
    let (p, l) = transform_error(&plant, &gain([0.0, -1.0]), &basis, &[1.0, 1.0], &cfg, 41).unwrap();
    assert_eq!(p, l);
}

#[test]
fn errors_shrink_tenfold_from_degree_two_to_eight() {
    let plant = benchmark::plant();
    let k = gain(benchmark::K_NOMINAL_P2);
    let cfg = SimConfig { dt: 1e-2, record_every: 1, ..SimConfig::default() };
    let at = |p: usize| {
        let basis = build_basis(&plant.dist, p, plant.degree(), None).unwrap();
        let me = moment_error(&plant, &k, &basis, &[1.0, 1.0], &cfg, 101).unwrap();
        [me.mean_proposed, me.mean_legacy, me.var_proposed, me.var_legacy]
    };
    let (lo, hi) = (at(2), at(8));
    for (a, b) in lo.iter().zip(&hi) {
        assert!(b * 10.0 <= *a, "{b} vs {a}");
    }
}
