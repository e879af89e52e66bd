mod common;

use common::{random_stable, Mat};
use pce_hinf::hinf::{brl_lmi, brl_matrix, polytopic_gamma_lmi, polytopic_lmi, robust_lmi, PStructure, RobustnessBound, TauMode};
use pce_hinf::plant::{benchmark, close_loop, Gain};
use pce_hinf::sdp::{feasibility, solve, write_sdpa, LmiProblem, SdpOptions, SdpStatus};
use pce_hinf::LtiSystem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Shared-P vertex minimum at the published worst-case gain, computed with
// cvxpy + Clarabel.
const POLYTOPIC_GAMMA_KWC: f64 = 65.80467;

fn k_wc() -> Gain {
    Gain::row(&benchmark::K_WORST_CASE).unwrap()
}

const VERTICES: [[f64; 1]; 2] = [[-1.0], [1.0]];

#[test]
fn polytopic_minimum_at_published_worst_case_gain() {
    let plant = benchmark::plant();
    let v: Vec<Vec<f64>> = VERTICES.iter().map(|v| v.to_vec()).collect();
    let lp = polytopic_gamma_lmi(&plant, &k_wc(), &v).unwrap();
    let sol = solve(&lp, &SdpOptions::default());
    assert_eq!(sol.status, SdpStatus::Optimal);
    let g = sol.x[lp.n_vars() - 1];
    assert!((g - POLYTOPIC_GAMMA_KWC).abs() / POLYTOPIC_GAMMA_KWC < 1e-4, "{g}");
}

#[test]
fn polytopic_verdicts_around_the_minimum() {
    let plant = benchmark::plant();
    let v: Vec<Vec<f64>> = VERTICES.iter().map(|v| v.to_vec()).collect();
    let verdict = |g: f64| feasibility(&polytopic_lmi(&plant, &k_wc(), g, &v).unwrap()).0;
    assert!(verdict(66.0));
    for g in [65.7, 55.0, 53.0] {
        assert!(!verdict(g), "γ = {g}");
    }
}

#[test]
fn polytopic_witness_certifies_each_vertex() {
    let plant = benchmark::plant();
    let v: Vec<Vec<f64>> = VERTICES.iter().map(|v| v.to_vec()).collect();
    let (ok, x) = feasibility(&polytopic_lmi(&plant, &k_wc(), 70.0, &v).unwrap());
    assert!(ok);
    let p = Mat::from_row_slice(2, 2, &[x[0], x[1], x[1], x[2]]);
    for vert in &v {
        let sys = close_loop(&plant, &k_wc(), vert).unwrap();
        assert!(brl_matrix(&sys, &p, 70.0).symmetric_eigenvalues().max() < 0.0);
        let (ok, _) = feasibility(&brl_lmi(&sys, 70.0, PStructure::Full).unwrap());
        assert!(ok);
    }
}

#[test]
fn robust_verdicts_at_zero_bound_match_brl() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let rho = RobustnessBound::new(0.0).unwrap();
    for _ in 0..10 {
        let (a, b, c, d) = random_stable(&mut rng);
        let sys = LtiSystem::new(a, b, c, d).unwrap();
        let g = pce_hinf::hinf::hinf_norm(&sys, 1e-8).unwrap();
        for scale in [0.95, 1.05, 2.0] {
            let brl = feasibility(&brl_lmi(&sys, scale * g, PStructure::Full).unwrap()).0;
            let robust = feasibility(&robust_lmi(&sys, scale * g, rho, TauMode::Free).unwrap()).0;
            assert_eq!(brl, scale > 1.0);
            assert_eq!(robust, brl, "γ = {scale}·‖G‖∞");
        }
    }
}

#[test]
fn huge_bound_is_infeasible_on_benchmark() {
    let plant = benchmark::plant();
    let basis = pce_hinf::polychaos::build_basis(&plant.dist, 2, plant.degree(), None).unwrap();
    let blocks = pce_hinf::galerkin::expand_blocks(&plant, &basis).unwrap();
    let sys = pce_hinf::galerkin::assemble_closed_loop(&blocks, &Gain::row(&benchmark::K_NOMINAL_P2).unwrap()).unwrap().to_lti();
    let rho = RobustnessBound::new(1e3).unwrap();
    for g in [10.0, 100.0, 1e3] {
        assert!(!feasibility(&robust_lmi(&sys, g, rho, TauMode::Free).unwrap()).0, "γ = {g}");
    }
}

// Rebuilds `Σ x_i F_i − F_0` from the SDPA text.
fn sdpa_eval(text: &str, dims: &[usize], x: &[f64]) -> Vec<Mat> {
    let mut mats: Vec<Mat> = dims.iter().map(|&n| Mat::zeros(n, n)).collect();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('*')).collect();
    for line in &data[4..] {
        let f: Vec<&str> = line.split_whitespace().collect();
        let (i, k, r, c): (usize, usize, usize, usize) =
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap());
        let v: f64 = f[4].parse().unwrap();
        let s = if i == 0 { -v } else { v * x[i - 1] };
        mats[k - 1][(r - 1, c - 1)] += s;
        if r != c {
            mats[k - 1][(c - 1, r - 1)] += s;
        }
    }
    mats
}

#[test]
fn sdpa_dump_encodes_the_shifted_problem() {
    let plant = benchmark::plant();
    let v: Vec<Vec<f64>> = VERTICES.iter().map(|v| v.to_vec()).collect();
    let lp: LmiProblem = polytopic_gamma_lmi(&plant, &k_wc(), &v).unwrap();
    let text = write_sdpa(&lp);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('*')).collect();
    assert_eq!(data[0].trim().parse::<usize>().unwrap(), lp.n_vars());
    assert_eq!(data[1].trim().parse::<usize>().unwrap(), lp.blocks().len());
    let dims: Vec<usize> = data[2].split_whitespace().map(|s| s.parse().unwrap()).collect();
    let x = [1.3, -0.2, 0.7, 42.0];
    let rebuilt = sdpa_eval(&text, &dims, &x);
    for (b, m) in lp.blocks().iter().zip(&rebuilt) {
        let expected = b.eval(&x) - Mat::identity(b.dim(), b.dim()) * lp.margin();
        assert!((m - expected).amax() < 1e-9 * (1.0 + m.amax()));
    }
}
