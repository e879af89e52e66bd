//! Bilinear matrix-inequality models shared by the alternating solver.
//!
//! A model maps `(P, τ, γ, K)` to a list of symmetric blocks, each required
//! to be negative definite. Every block is affine in `(P, τ, γ)` for fixed
//! `K` and affine in `(K, γ)` for fixed `(P, τ)`.

use crate::galerkin::{assemble_closed_loop, ExpandedBlocks};
use crate::hinf::{brl_matrix, quad_stab_matrix, robust_matrix};
use crate::linalg::{eye, he, spectral_abscissa, Mat};
use crate::lti::LtiSystem;
use crate::plant::{Gain, PlantSample};

pub(crate) trait BmiModel: Sync {
    fn n_p(&self) -> usize;
    fn k_shape(&self) -> (usize, usize);
    fn uses_tau(&self) -> bool;
    fn blocks(&self, p: &Mat, tau: f64, gamma: f64, k: &Mat) -> Vec<Mat>;
    /// Internal-stability part of the model, without the performance channel.
    fn stab_blocks(&self, p: &Mat, tau: f64, k: &Mat) -> Vec<Mat>;
    /// Spectral abscissa of the state matrices, maximized over blocks.
    fn abscissa(&self, k: &Mat) -> f64;
    /// `(lower, upper)` with `lower·I ≼ P ≼ upper·I`.
    fn p_bounds(&self) -> (f64, Option<f64>) {
        (0.0, None)
    }
}

fn close(s: &PlantSample, k: &Mat) -> LtiSystem {
    let bk = &s.b * k;
    let dzk = &s.d_z * k;
    LtiSystem {
        a: &s.a + &bk * &s.c,
        b: &s.b_w + &bk * &s.d_w,
        c: &s.c_z + &dzk * &s.c,
        d: &s.d_zw + &dzk * &s.d_w,
    }
}

/// Shared-`P` bounded-real inequality at polytope vertices.
pub(crate) struct VertexModel {
    pub samples: Vec<PlantSample>,
}

impl BmiModel for VertexModel {
    fn n_p(&self) -> usize {
        self.samples[0].a.nrows()
    }

    fn k_shape(&self) -> (usize, usize) {
        (self.samples[0].b.ncols(), self.samples[0].c.nrows())
    }

    fn uses_tau(&self) -> bool {
        false
    }

    fn blocks(&self, p: &Mat, _tau: f64, gamma: f64, k: &Mat) -> Vec<Mat> {
        self.samples.iter().map(|s| brl_matrix(&close(s, k), p, gamma)).collect()
    }

    fn stab_blocks(&self, p: &Mat, _tau: f64, k: &Mat) -> Vec<Mat> {
        self.samples.iter().map(|s| he(&(p * close(s, k).a))).collect()
    }

    fn abscissa(&self, k: &Mat) -> f64 {
        self.samples.iter().map(|s| spectral_abscissa(&close(s, k).a)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Bounded-real (`rho2 = None`) or robust LDI inequality on the expanded
/// closed loop.
pub(crate) struct ExpandedModel {
    pub blocks: ExpandedBlocks,
    pub rho2: Option<f64>,
}

impl ExpandedModel {
    fn closed(&self, k: &Mat) -> LtiSystem {
        assemble_closed_loop(&self.blocks, &Gain::from_mat(k.clone()))
            .expect("gain shape fixed by the model")
            .to_lti()
    }
}

impl BmiModel for ExpandedModel {
    fn n_p(&self) -> usize {
        self.blocks.n_states()
    }

    fn k_shape(&self) -> (usize, usize) {
        (self.blocks.dims.n_u, self.blocks.dims.n_y)
    }

    fn uses_tau(&self) -> bool {
        self.rho2.is_some()
    }

    fn blocks(&self, p: &Mat, tau: f64, gamma: f64, k: &Mat) -> Vec<Mat> {
        let sys = self.closed(k);
        vec![match self.rho2 {
            None => brl_matrix(&sys, p, gamma),
            Some(r) => robust_matrix(&sys, p, tau, gamma, r),
        }]
    }

    fn stab_blocks(&self, p: &Mat, tau: f64, k: &Mat) -> Vec<Mat> {
        let sys = self.closed(k);
        vec![match self.rho2 {
            None => he(&(p * &sys.a)),
            Some(r) => quad_stab_matrix(&sys.a, p, tau, r),
        }]
    }

    fn abscissa(&self, k: &Mat) -> f64 {
        spectral_abscissa(&self.closed(k).a)
    }
}

/// Decay-rate relaxation `stab(P, τ, K) ≼ α I` with `I ≼ P ≼ cI`; the
/// performance slot carries `α`.
pub(crate) struct Stabilize<'a, M: BmiModel> {
    pub inner: &'a M,
    pub p_max: f64,
}

impl<M: BmiModel> BmiModel for Stabilize<'_, M> {
    fn n_p(&self) -> usize {
        self.inner.n_p()
    }

    fn k_shape(&self) -> (usize, usize) {
        self.inner.k_shape()
    }

    fn uses_tau(&self) -> bool {
        self.inner.uses_tau()
    }

    fn blocks(&self, p: &Mat, tau: f64, alpha: f64, k: &Mat) -> Vec<Mat> {
        self.inner
            .stab_blocks(p, tau, k)
            .into_iter()
            .map(|b| {
                let n = b.nrows();
                b - eye(n) * alpha
            })
            .collect()
    }

    fn stab_blocks(&self, p: &Mat, tau: f64, k: &Mat) -> Vec<Mat> {
        self.inner.stab_blocks(p, tau, k)
    }

    fn abscissa(&self, k: &Mat) -> f64 {
        self.inner.abscissa(k)
    }

    fn p_bounds(&self) -> (f64, Option<f64>) {
        (1.0, Some(self.p_max))
    }
}
