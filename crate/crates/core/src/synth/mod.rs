//! Static output-feedback synthesis by alternating convex steps.
//!
//! Three problems share one solver:
//!
//! * [`SynthesisMode::WorstCase`]: bounded-real inequality at the vertices
//!   of the parameter box with a common Lyapunov matrix.
//! * [`SynthesisMode::NominalPce`]: bounded-real inequality on the expanded
//!   closed loop.
//! * [`SynthesisMode::RobustPce`]: the robust LDI inequality on the
//!   expanded closed loop with truncation bound `ρ²`.
//!
//! Each restart alternates a P-step and a linearized K-step (see
//! `alternate`); a gain that fails the P-step is first driven to
//! feasibility by a decay-rate relaxation. Restarts run under the
//! configured [`Execution`] policy. [`rho_bisection`] searches the
//! smallest `ρ²` whose synthesized gain passes the grid post-analysis.
//!
//! Mean-square stability of the uncertain closed loop follows from
//! quadratic stability of the LDI only while the truncation residual stays
//! bounded with probability one. That hypothesis cannot be checked at run
//! time; the eigenvalue sweep of [`stability_post_analysis`] stands in.

mod alternate;
mod model;
mod stability;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::galerkin::expand_blocks;
use crate::linalg::{sigma_max, Mat};
use crate::plant::{box_vertices, Gain, UncertainPlant};
use crate::polychaos::{build_basis, OrthonormalBasis};

use alternate::{certificate_slack, descend, minimize_abscissa, Descent};
use model::{BmiModel, ExpandedModel, Stabilize, VertexModel};

pub use stability::{
    stability_post_analysis, stability_post_analysis_with, StabilityReport, DEFAULT_GRID, DEFAULT_MARGIN,
};

/// Bisection tolerance on `ρ²`.
pub const RHO2_TOL: f64 = 1e-4;

const STAB_P_MAX: f64 = 1e3;
const STAB_TARGET: f64 = -1e-3;
const STAB_ITERS: usize = 60;
const RESTART_SPREAD: f64 = 0.25;
const ABSCISSA_STEP: f64 = 0.5;
const ABSCISSA_FLOOR: f64 = -0.1;
const ABSCISSA_ITERS: u64 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisMode {
    WorstCase,
    NominalPce,
    RobustPce,
}

/// Starting gain for restart 0.
#[derive(Debug, Clone, PartialEq)]
pub enum KInit {
    /// Zero if the open loop is stable on the grid, else the worst-case
    /// design, else a seeded random gain.
    Auto,
    Zero,
    Given(Gain),
    /// Standard normal entries scaled by `1/‖B̂₀‖`.
    Random,
}

#[derive(Debug, Clone)]
pub struct SynthesisConfig {
    pub mode: SynthesisMode,
    pub p: usize,
    pub rho2: f64,
    pub k_init: KInit,
    /// K-step budget per restart.
    pub max_outer_iters: usize,
    /// Relative `γ` improvement below which a restart stops.
    pub gamma_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Polytope vertices for `WorstCase`; the parameter box corners if `None`.
    pub vertices: Option<Vec<Vec<f64>>>,
    pub grid_n: usize,
    pub stability_margin: f64,
    pub execution: Execution,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            mode: SynthesisMode::NominalPce,
            p: 2,
            rho2: 0.0,
            k_init: KInit::Auto,
            max_outer_iters: 60,
            gamma_tol: 1e-7,
            restarts: 1,
            seed: 0,
            vertices: None,
            grid_n: DEFAULT_GRID,
            stability_margin: DEFAULT_MARGIN,
            execution: Execution::default(),
        }
    }
}

impl SynthesisConfig {
    pub fn new(mode: SynthesisMode, p: usize) -> Self {
        Self { mode, p, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho2 >= 0.0) || !self.rho2.is_finite() {
            return Err(Error::InvalidArgument(format!("ρ² must be finite and nonnegative, got {}", self.rho2)));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("at least one restart is required".into()));
        }
        if self.grid_n < 2 {
            return Err(Error::InvalidArgument("post-analysis grid needs at least 2 points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub k: Gain,
    pub gamma: f64,
    /// K-steps over all restarts.
    pub iterations: usize,
    /// Accepted `γ` per restart; empty for restarts that found no start.
    pub traces: Vec<Vec<f64>>,
    pub stability: StabilityReport,
    pub rho2: f64,
    pub mode: SynthesisMode,
    /// Lyapunov matrix certifying `γ` at `k`.
    pub p_matrix: Mat,
    pub tau: Option<f64>,
    /// Smallest eigenvalue margin of the certificate, see [`recheck`].
    pub certificate_slack: f64,
}

#[allow(clippy::large_enum_variant)]
enum AnyModel {
    Vertex(VertexModel),
    Expanded(ExpandedModel),
}

fn build_model(plant: &UncertainPlant, basis: Option<&OrthonormalBasis>, cfg: &SynthesisConfig) -> Result<AnyModel> {
    Ok(match cfg.mode {
        SynthesisMode::WorstCase => {
            let vertices = cfg.vertices.clone().unwrap_or_else(|| box_vertices(&plant.dist));
            if vertices.is_empty() {
                return Err(Error::InvalidArgument("empty vertex list".into()));
            }
            for v in &vertices {
                if v.len() != plant.n_xi() {
                    return Err(Error::Dimension(format!("vertex has {} entries, expected {}", v.len(), plant.n_xi())));
                }
            }
            AnyModel::Vertex(VertexModel { samples: vertices.iter().map(|v| plant.sample(v)).collect() })
        }
        SynthesisMode::NominalPce | SynthesisMode::RobustPce => {
            let basis = basis.ok_or_else(|| Error::InvalidArgument("PCE modes need a basis".into()))?;
            if basis.degree() != cfg.p {
                return Err(Error::InvalidArgument(format!(
                    "basis degree {} differs from configured p = {}",
                    basis.degree(),
                    cfg.p
                )));
            }
            let blocks = expand_blocks(plant, basis)?;
            // At ρ² = 0 the robust inequality is the BRL in the limit τ → ∞.
            let rho2 = (cfg.mode == SynthesisMode::RobustPce && cfg.rho2 > 0.0).then_some(cfg.rho2);
            AnyModel::Expanded(ExpandedModel { blocks, rho2 })
        }
    })
}

// `‖B̂₀‖` for the random-gain scale.
fn input_scale(plant: &UncertainPlant, model: &AnyModel) -> f64 {
    let s = match model {
        AnyModel::Vertex(_) => {
            let mean: Vec<f64> = plant.dist.marginals().iter().map(|m| m.mean()).collect();
            sigma_max(&plant.b.eval(&mean))
        }
        AnyModel::Expanded(m) => sigma_max(&m.blocks.b_hat[0]),
    };
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

fn random_gain(shape: (usize, usize), scale: f64, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Mat::from_fn(shape.0, shape.1, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z / scale
    })
}

fn perturb(k: &Mat, scale: f64, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    k.map(|v| {
        let z: f64 = StandardNormal.sample(&mut rng);
        v + RESTART_SPREAD * z * (v.abs() + 1.0 / scale)
    })
}

// Falls back to abscissa descent, then to the decay-rate relaxation, when
// `k0` admits no certificate.
fn restart<M: BmiModel>(model: &M, k0: &Mat, cfg: &SynthesisConfig) -> Option<Descent> {
    if let Some(d) = descend(model, k0, cfg.max_outer_iters, cfg.gamma_tol, None) {
        return Some(d);
    }
    let k1 = minimize_abscissa(model, k0, ABSCISSA_STEP, ABSCISSA_FLOOR, ABSCISSA_ITERS);
    if let Some(d) = descend(model, &k1, cfg.max_outer_iters, cfg.gamma_tol, None) {
        return Some(d);
    }
    let stab = Stabilize { inner: model, p_max: STAB_P_MAX };
    let pre = descend(&stab, &k1, STAB_ITERS, 0.0, Some(STAB_TARGET))?;
    let mut d = descend(model, &pre.k, cfg.max_outer_iters, cfg.gamma_tol, None)?;
    d.iterations += pre.iterations;
    Some(d)
}

fn initial_gain(
    plant: &UncertainPlant,
    model: &AnyModel,
    cfg: &SynthesisConfig,
    shape: (usize, usize),
    scale: f64,
) -> Result<Mat> {
    Ok(match &cfg.k_init {
        KInit::Zero => Mat::zeros(shape.0, shape.1),
        KInit::Random => random_gain(shape, scale, cfg.seed),
        KInit::Given(k) => {
            k.check_dims(&plant.dims())?;
            k.matrix().clone()
        }
        KInit::Auto => {
            let zero = Gain::zeros(shape.0, shape.1);
            let open = stability_post_analysis_with(plant, &zero, cfg.grid_n, cfg.stability_margin, cfg.execution);
            if open.stable || matches!(model, AnyModel::Vertex(_)) {
                zero.into_matrix()
            } else {
                let wc_cfg = SynthesisConfig {
                    mode: SynthesisMode::WorstCase,
                    k_init: KInit::Zero,
                    restarts: 1,
                    ..cfg.clone()
                };
                match synthesize(plant, None, &wc_cfg) {
                    Ok(r) => r.k.into_matrix(),
                    Err(_) => random_gain(shape, scale, cfg.seed),
                }
            }
        }
    })
}

fn run<M: BmiModel>(
    plant: &UncertainPlant,
    model: &M,
    k0: Mat,
    scale: f64,
    cfg: &SynthesisConfig,
) -> Result<SynthesisResult> {
    let outcomes: Vec<Option<Descent>> = cfg.execution.map(cfg.restarts, |i| {
        let start = if i == 0 { k0.clone() } else { perturb(&k0, scale, cfg.seed.wrapping_add(i as u64)) };
        restart(model, &start, cfg)
    });
    let iterations = outcomes.iter().flatten().map(|d| d.iterations).sum();
    let traces = outcomes.iter().map(|o| o.as_ref().map(|d| d.trace.clone()).unwrap_or_default()).collect();
    let best = outcomes
        .into_iter()
        .flatten()
        .min_by(|a, b| a.cert.gamma.total_cmp(&b.cert.gamma))
        .ok_or(Error::NoFeasibleStart)?;
    let k = Gain::new(best.k.clone())?;
    let stability = stability_post_analysis_with(plant, &k, cfg.grid_n, cfg.stability_margin, cfg.execution);
    Ok(SynthesisResult {
        certificate_slack: certificate_slack(model, &best.cert, &best.k),
        gamma: best.cert.gamma,
        tau: model.uses_tau().then_some(best.cert.tau),
        p_matrix: best.cert.p,
        k,
        iterations,
        traces,
        stability,
        rho2: if cfg.mode == SynthesisMode::RobustPce { cfg.rho2 } else { 0.0 },
        mode: cfg.mode,
    })
}

/// Synthesizes a static output-feedback gain. `basis` is required for the
/// PCE modes and ignored by `WorstCase`.
pub fn synthesize(
    plant: &UncertainPlant,
    basis: Option<&OrthonormalBasis>,
    cfg: &SynthesisConfig,
) -> Result<SynthesisResult> {
    cfg.validate()?;
    let model = build_model(plant, basis, cfg)?;
    let dims = plant.dims();
    let shape = (dims.n_u, dims.n_y);
    let scale = input_scale(plant, &model);
    let k0 = initial_gain(plant, &model, cfg, shape, scale)?;
    match &model {
        AnyModel::Vertex(m) => run(plant, m, k0, scale, cfg),
        AnyModel::Expanded(m) => run(plant, m, k0, scale, cfg),
    }
}

/// Builds the degree-`cfg.p` basis for the plant and synthesizes.
pub fn synthesize_auto(plant: &UncertainPlant, cfg: &SynthesisConfig) -> Result<SynthesisResult> {
    if cfg.mode == SynthesisMode::WorstCase {
        return synthesize(plant, None, cfg);
    }
    let basis = build_basis(&plant.dist, cfg.p, plant.degree(), None)?;
    synthesize(plant, Some(&basis), cfg)
}

/// Re-evaluates the mode's inequality at the stored certificate and returns
/// its smallest eigenvalue margin; nonnegative up to round-off when the
/// reported `γ` is certified.
pub fn recheck(plant: &UncertainPlant, basis: Option<&OrthonormalBasis>, result: &SynthesisResult) -> Result<f64> {
    let cfg = SynthesisConfig { mode: result.mode, p: basis.map_or(0, |b| b.degree()), rho2: result.rho2, ..Default::default() };
    let model = build_model(plant, basis, &cfg)?;
    let cert = alternate::Certificate {
        p: result.p_matrix.clone(),
        tau: result.tau.unwrap_or(0.0),
        gamma: result.gamma,
    };
    let k = result.k.matrix();
    Ok(match &model {
        AnyModel::Vertex(m) => certificate_slack(m, &cert, k),
        AnyModel::Expanded(m) => certificate_slack(m, &cert, k),
    })
}

/// Smallest `ρ² ∈ [0, ρ²_hi]` whose robust design passes the grid
/// post-analysis, to within [`RHO2_TOL`]. `ρ² = 0` is probed first; every
/// probe is warm-started from the worst-case design unless `cfg.k_init`
/// names a gain.
pub fn rho_bisection(
    plant: &UncertainPlant,
    basis: &OrthonormalBasis,
    cfg: &SynthesisConfig,
    rho2_hi: f64,
) -> Result<(f64, SynthesisResult)> {
    if !(rho2_hi > 0.0) || !rho2_hi.is_finite() {
        return Err(Error::InvalidArgument(format!("ρ²_hi must be positive, got {rho2_hi}")));
    }
    let k_init = match &cfg.k_init {
        KInit::Given(k) => KInit::Given(k.clone()),
        _ => {
            let wc = SynthesisConfig { mode: SynthesisMode::WorstCase, k_init: KInit::Zero, restarts: 1, ..cfg.clone() };
            KInit::Given(synthesize(plant, None, &wc)?.k)
        }
    };
    let probe = |rho2: f64| -> Result<SynthesisResult> {
        let c = SynthesisConfig { mode: SynthesisMode::RobustPce, rho2, k_init: k_init.clone(), ..cfg.clone() };
        synthesize(plant, Some(basis), &c)
    };
    if let Ok(r) = probe(0.0) {
        if r.stability.stable {
            return Ok((0.0, r));
        }
    }
    let mut best = match probe(rho2_hi) {
        Ok(r) if r.stability.stable => r,
        Ok(_) => return Err(Error::AllProbesUnstable),
        Err(_) => return Err(Error::InfeasibleAtHi(rho2_hi)),
    };
    let (mut lo, mut hi) = (0.0, rho2_hi);
    while hi - lo > RHO2_TOL {
        let mid = 0.5 * (lo + hi);
        match probe(mid) {
            Ok(r) if r.stability.stable => {
                hi = mid;
                best = r;
            }
            _ => lo = mid,
        }
    }
    Ok((hi, best))
}

