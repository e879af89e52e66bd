mod common;

use common::{gauss_legendre, phi, random_mat, random_stable, Mat};
use pce_hinf::galerkin::{assemble_closed_loop, expand_blocks};
use pce_hinf::hinf::{frequency_gain, hinf_norm};
use pce_hinf::plant::{benchmark, Gain};
use pce_hinf::polychaos::{build_basis, Distribution, Marginal, MultiIndex};
use pce_hinf::LtiSystem;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hermite_normalized(n: usize, x: f64) -> Vec<f64> {
    let mut h = vec![1.0, x];
    for k in 1..n {
        h.push(x * h[k] - k as f64 * h[k - 1]);
    }
    h.truncate(n + 1);
    let mut fact = 1.0;
    h.iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 0 {
                fact *= k as f64;
            }
            v / fact.sqrt()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn legendre_basis_matches_closed_form(x in -1.0f64..1.0) {
        let basis = build_basis(&Distribution::uniform_unit(1), 8, 0, None).unwrap();
        let got = basis.eval_all(&[x]);
        for (g, e) in got.iter().zip(phi(8, x)) {
            prop_assert!((g - e).abs() < 1e-11 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn gaussian_basis_is_normalized_hermite(mean in -2.0f64..2.0, std in 0.1f64..3.0, x in -5.0f64..5.0) {
        let dist = Distribution::independent(vec![Marginal::gaussian(mean, std).unwrap()]);
        let basis = build_basis(&dist, 6, 0, None).unwrap();
        let got = basis.eval_all(&[x]);
        for (g, e) in got.iter().zip(hermite_normalized(6, (x - mean) / std)) {
            prop_assert!((g - e).abs() < 1e-9 * (1.0 + e.abs()), "{g} vs {e}");
        }
    }

    #[test]
    fn monomial_expansion_is_exact(e1 in 0u32..4, e2 in 0u32..4, x1 in -1.0f64..1.0, x2 in -1.0f64..1.0) {
        let dist = Distribution::independent(vec![Marginal::uniform(-1.0, 1.0).unwrap(), Marginal::uniform(0.0, 2.0).unwrap()]);
        let basis = build_basis(&dist, 6, 0, None).unwrap();
        let s = MultiIndex::new(vec![e1, e2]);
        let beta = basis.monomial_pce(&s, basis.size()).unwrap();
        let xi = [x1, x2 + 1.0];
        let recon: f64 = beta.iter().zip(basis.eval_all(&xi)).map(|(b, f)| b * f).sum();
        let exact = xi[0].powi(e1 as i32) * xi[1].powi(e2 as i32);
        prop_assert!((recon - exact).abs() < 1e-10);
    }

    #[test]
    fn expanded_closed_loop_is_affine_in_gain(seed in 0u64..1000, alpha in -2.0f64..2.0) {
        let plant = benchmark::plant();
        let basis = build_basis(&plant.dist, 2, plant.degree(), None).unwrap();
        let blocks = expand_blocks(&plant, &basis).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k1, k2) = (random_mat(&mut rng, 1, 2), random_mat(&mut rng, 1, 2));
        let cl = |k: Mat| assemble_closed_loop(&blocks, &Gain::new(k).unwrap()).unwrap();
        let mix = cl(&k1 * alpha + &k2 * (1.0 - alpha));
        let (a, b) = (cl(k1), cl(k2));
        for (m, (x, y)) in [(&mix.a, (&a.a, &b.a)), (&mix.b, (&a.b, &b.b)), (&mix.c, (&a.c, &b.c)), (&mix.d, (&a.d, &b.d))] {
            let lin = x * alpha + y * (1.0 - alpha);
            prop_assert!((m - &lin).amax() < 1e-10 * (1.0 + lin.amax()));
        }
    }

    #[test]
    fn norm_dominates_every_frequency(seed in 0u64..1000, w in 0.0f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c, d) = random_stable(&mut rng);
        let sys = LtiSystem::new(a, b, c, d).unwrap();
        let g = hinf_norm(&sys, 1e-8).unwrap();
        prop_assert!(frequency_gain(&sys, w) <= g * (1.0 + 1e-7));
    }
}

#[test]
fn quadrature_oracle_integrates_polynomials() {
    let (x, w) = gauss_legendre(10);
    for k in 0..20 {
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
        let exact = if k % 2 == 0 { 1.0 / (k as f64 + 1.0) } else { 0.0 };
        assert!((got - exact).abs() < 1e-14, "k = {k}");
    }
}
