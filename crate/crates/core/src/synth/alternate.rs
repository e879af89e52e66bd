//! Alternating convex steps for the bilinear models.
//!
//! The P-step fixes `K` and minimizes `γ` over `(P, τ, γ)`. The K-step
//! solves the inequality linearized around `(P₀, K₀)`,
//!
//! ```text
//! F(P₀ + ΔP, τ, γ, K₀) + F(P₀, 0, 0, K₀ + ΔK) − F(P₀, 0, 0, K₀) ≺ 0,   |ΔK_ij| ≤ r,
//! ```
//!
//! which contains the frozen-`P` step `ΔP = 0` as a feasible point. A
//! candidate gain is accepted only when a fresh P-step certifies a smaller
//! `γ`; the trust radius `r` doubles on acceptance and shrinks by four on
//! rejection.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;

use crate::hinf::{PStructure, SymVar};
use crate::linalg::{eye, min_eig_sym, Mat};
use crate::sdp::{solve, LmiProblem, SdpOptions, SdpSolution, SdpStatus};

use super::model::BmiModel;

const R_INIT: f64 = 1.0;
const R_MAX: f64 = 10.0;
const R_MIN: f64 = 1e-5;

/// Feasible point of a model at a fixed gain.
#[derive(Debug, Clone)]
pub(crate) struct Certificate {
    pub p: Mat,
    pub tau: f64,
    pub gamma: f64,
}

struct Layout {
    p: SymVar,
    tau: Option<usize>,
    gamma: usize,
    k: usize,
    n_vars: usize,
}

impl Layout {
    fn new<M: BmiModel>(model: &M, with_k: bool) -> Self {
        let p = SymVar::new(0, model.n_p(), PStructure::Full);
        let mut next = p.end();
        let tau = model.uses_tau().then(|| {
            next += 1;
            next - 1
        });
        let gamma = next;
        let k = gamma + 1;
        let (ku, ky) = model.k_shape();
        let n_vars = if with_k { k + ku * ky } else { k };
        Self { p, tau, gamma, k, n_vars }
    }

    fn tau(&self, x: &[f64]) -> f64 {
        self.tau.map_or(0.0, |i| x[i])
    }

    fn dk(&self, x: &[f64], shape: (usize, usize)) -> Mat {
        Mat::from_row_slice(shape.0, shape.1, &x[self.k..self.k + shape.0 * shape.1])
    }
}

fn p_constraints<M: BmiModel>(lp: &mut LmiProblem, model: &M, pv: SymVar, base: Option<&Mat>) {
    let (lo, hi) = model.p_bounds();
    let n = pv.n;
    let p_of = move |x: &[f64]| match base {
        Some(b) => b + pv.mat(x),
        None => pv.mat(x),
    };
    lp.add_affine_block(|x| p_of(x) - eye(n) * lo).expect("well-formed block");
    if let Some(hi) = hi {
        lp.add_affine_block(|x| eye(n) * hi - p_of(x)).expect("well-formed block");
    }
}

fn accepted_point(lp: &LmiProblem, sol: &SdpSolution) -> bool {
    match sol.status {
        SdpStatus::Optimal => true,
        SdpStatus::MaxIter | SdpStatus::NumericalFailure => lp.slack(&sol.x) >= 0.0,
        SdpStatus::Infeasible | SdpStatus::Unbounded => false,
    }
}

/// Minimizes `γ` over `(P, τ, γ)` at fixed `K`.
pub(crate) fn p_step<M: BmiModel>(model: &M, k: &Mat) -> Option<Certificate> {
    let lay = Layout::new(model, false);
    let mut lp = LmiProblem::new(lay.n_vars);
    p_constraints(&mut lp, model, lay.p, None);
    if let Some(t) = lay.tau {
        lp.add_lower_bound(t, 0.0).ok()?;
    }
    let n_blocks = model.blocks(&eye(model.n_p()), 1.0, 1.0, k).len();
    for b in 0..n_blocks {
        lp.add_negdef_affine(|x| model.blocks(&lay.p.mat(x), lay.tau(x), x[lay.gamma], k).swap_remove(b))
            .ok()?;
    }
    lp.minimize_var(lay.gamma);
    let sol = solve(&lp, &SdpOptions::default());
    if !accepted_point(&lp, &sol) {
        return None;
    }
    Some(Certificate { p: lay.p.mat(&sol.x), tau: lay.tau(&sol.x), gamma: sol.x[lay.gamma] })
}

/// Linearized joint step; returns the candidate gain.
pub(crate) fn k_step<M: BmiModel>(model: &M, cert: &Certificate, k0: &Mat, radius: f64) -> Option<Mat> {
    let lay = Layout::new(model, true);
    let shape = model.k_shape();
    let p0 = &cert.p;
    let base = model.blocks(p0, 0.0, 0.0, k0);
    let mut lp = LmiProblem::new(lay.n_vars);
    p_constraints(&mut lp, model, lay.p, Some(p0));
    if let Some(t) = lay.tau {
        lp.add_lower_bound(t, 0.0).ok()?;
    }
    for i in lay.k..lay.n_vars {
        lp.add_lower_bound(i, -radius).ok()?;
        lp.add_upper_bound(i, radius).ok()?;
    }
    for (b, fb) in base.iter().enumerate() {
        lp.add_negdef_affine(|x| {
            let p = p0 + lay.p.mat(x);
            let k = k0 + lay.dk(x, shape);
            let lin_p = model.blocks(&p, lay.tau(x), x[lay.gamma], k0).swap_remove(b);
            let lin_k = model.blocks(p0, 0.0, 0.0, &k).swap_remove(b);
            lin_p + lin_k - fb
        })
        .ok()?;
    }
    lp.minimize_var(lay.gamma);
    let sol = solve(&lp, &SdpOptions::default());
    if !accepted_point(&lp, &sol) {
        return None;
    }
    Some(k0 + lay.dk(&sol.x, shape))
}

/// Outcome of one descent.
#[derive(Debug, Clone)]
pub(crate) struct Descent {
    pub k: Mat,
    pub cert: Certificate,
    /// Accepted `γ` values, nonincreasing.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Trust-region descent from `k0`. Stops when the radius collapses, after
/// `max_iters` K-steps, when an accepted step improves `γ` by less than
/// `tol·|γ|`, or once `γ < stop_below`.
pub(crate) fn descend<M: BmiModel>(
    model: &M,
    k0: &Mat,
    max_iters: usize,
    tol: f64,
    stop_below: Option<f64>,
) -> Option<Descent> {
    let mut cert = p_step(model, k0)?;
    let mut k = k0.clone();
    let mut trace = vec![cert.gamma];
    let mut r = R_INIT;
    let mut iterations = 0;
    while iterations < max_iters && r >= R_MIN {
        if stop_below.is_some_and(|s| cert.gamma < s) {
            break;
        }
        iterations += 1;
        let next = k_step(model, &cert, &k, r).and_then(|kn| p_step(model, &kn).map(|c| (kn, c)));
        match next {
            Some((kn, c)) if c.gamma < cert.gamma => {
                let gain = cert.gamma - c.gamma;
                k = kn;
                cert = c;
                trace.push(cert.gamma);
                r = (2.0 * r).min(R_MAX);
                if gain < tol * cert.gamma.abs().max(1e-12) {
                    break;
                }
            }
            _ => r /= 4.0,
        }
    }
    Some(Descent { k, cert, trace, iterations })
}

/// `min(λ_min(P) , min_b λ_min(−F_b))` at a certificate.
pub(crate) fn certificate_slack<M: BmiModel>(model: &M, cert: &Certificate, k: &Mat) -> f64 {
    let mut s = min_eig_sym(&cert.p);
    if model.uses_tau() {
        s = s.min(cert.tau);
    }
    for b in model.blocks(&cert.p, cert.tau, cert.gamma, k) {
        s = s.min(min_eig_sym(&(-b)));
    }
    s
}

struct Abscissa<'a, M: BmiModel> {
    model: &'a M,
    shape: (usize, usize),
    floor: f64,
}

impl<M: BmiModel> CostFunction for Abscissa<'_, M> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, k: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let a = self.model.abscissa(&Mat::from_row_slice(self.shape.0, self.shape.1, k));
        Ok(if a.is_nan() { f64::INFINITY } else { a.max(self.floor) })
    }
}

/// Nelder–Mead descent of the closed-loop spectral abscissa from `k0`,
/// flattened below `floor`. Returns the best gain visited.
pub(crate) fn minimize_abscissa<M: BmiModel>(model: &M, k0: &Mat, step: f64, floor: f64, max_iters: u64) -> Mat {
    let shape = model.k_shape();
    let x0: Vec<f64> = k0.transpose().iter().copied().collect();
    let mut simplex = vec![x0.clone()];
    for i in 0..x0.len() {
        let mut v = x0.clone();
        v[i] += step * (1.0 + x0[i].abs());
        simplex.push(v);
    }
    let solver = match NelderMead::new(simplex).with_sd_tolerance(1e-10) {
        Ok(s) => s,
        Err(_) => return k0.clone(),
    };
    let problem = Abscissa { model, shape, floor };
    match Executor::new(problem, solver).configure(|st| st.max_iters(max_iters)).run() {
        Ok(res) => match res.state().get_best_param() {
            Some(best) => Mat::from_row_slice(shape.0, shape.1, best),
            None => k0.clone(),
        },
        Err(_) => k0.clone(),
    }
}
