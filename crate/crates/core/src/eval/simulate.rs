use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::galerkin::{assemble_closed_loop, assemble_legacy, expand_blocks};
use crate::linalg::{dvec, eye, Mat};
use crate::plant::{sample_xi, Gain, Sampling, UncertainPlant};
use crate::polychaos::{OrthonormalBasis, Quadrature};
use nalgebra::DVector;

const CHUNK: usize = 64;

/// Fixed-step integration settings for zero-disturbance responses.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Keep every `record_every`-th step (the initial state is always kept).
    pub record_every: usize,
    pub n_mc: usize,
    pub seed: u64,
    /// State norm treated as numerical blow-up.
    pub blowup: f64,
    pub execution: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            dt: 1e-3,
            record_every: 10,
            n_mc: 5000,
            seed: 0,
            blowup: 1e12,
            execution: Execution::default(),
        }
    }
}

impl SimConfig {
    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !(self.t_end > 0.0) || self.record_every == 0 {
            return Err(Error::InvalidArgument("need dt > 0, T > 0 and a positive record stride".into()));
        }
        Ok((self.t_end / self.dt).round() as usize)
    }

    fn times(&self, steps: usize) -> Vec<f64> {
        (0..=steps).step_by(self.record_every).map(|k| k as f64 * self.dt).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    MonteCarlo,
    ExpandedProposed,
    ExpandedLegacy,
}

impl Source {
    pub fn tag(self) -> &'static str {
        match self {
            Source::MonteCarlo => "monte_carlo",
            Source::ExpandedProposed => "expanded_proposed",
            Source::ExpandedLegacy => "expanded_legacy",
        }
    }
}

/// Per-state mean and variance on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStats {
    pub source: Source,
    pub t: Vec<f64>,
    /// `mean[k][i]` is the mean of state `i` at `t[k]`.
    pub mean: Vec<Vec<f64>>,
    pub var: Vec<Vec<f64>>,
}

/// One classical RK4 step of `ẋ = Ax` is `x ← T x` with
/// `T = Σ_{j≤4} (hA)^j / j!`.
pub fn transition_matrix(a: &Mat, dt: f64) -> Mat {
    let n = a.nrows();
    let ha = a * dt;
    let mut t = eye(n);
    let mut term = eye(n);
    for j in 1..=4 {
        term = &term * &ha / j as f64;
        t += &term;
    }
    t
}

// Recorded states of `x ← T x`, including `x0`.
fn propagate(t: &Mat, x0: DVector<f64>, steps: usize, stride: usize, blowup: f64, dt: f64) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(steps / stride + 1);
    let mut x = x0;
    out.push(x.clone());
    for k in 1..=steps {
        x = t * x;
        if k % stride == 0 {
            if !(x.norm() <= blowup) {
                return Err(Error::Blowup(k as f64 * dt));
            }
            out.push(x.clone());
        }
    }
    Ok(out)
}

fn check_x0(plant: &UncertainPlant, x0: &[f64]) -> Result<()> {
    if x0.len() != plant.dims().n_x {
        return Err(Error::Dimension(format!("x0 has {} entries, expected {}", x0.len(), plant.dims().n_x)));
    }
    Ok(())
}

#[derive(Clone)]
struct Welford {
    n: f64,
    mean: Vec<Vec<f64>>,
    m2: Vec<Vec<f64>>,
}

impl Welford {
    fn new(n_t: usize, n_x: usize) -> Self {
        Self { n: 0.0, mean: vec![vec![0.0; n_x]; n_t], m2: vec![vec![0.0; n_x]; n_t] }
    }

    fn push(&mut self, traj: &[DVector<f64>]) {
        self.n += 1.0;
        for (k, x) in traj.iter().enumerate() {
            for i in 0..x.len() {
                let d = x[i] - self.mean[k][i];
                self.mean[k][i] += d / self.n;
                self.m2[k][i] += d * (x[i] - self.mean[k][i]);
            }
        }
    }

    // Pairwise combination; exact in exact arithmetic.
    fn merge(&mut self, o: &Welford) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        for k in 0..self.mean.len() {
            for i in 0..self.mean[k].len() {
                let d = o.mean[k][i] - self.mean[k][i];
                self.mean[k][i] += d * o.n / n;
                self.m2[k][i] += o.m2[k][i] + d * d * self.n * o.n / n;
            }
        }
        self.n = n;
    }
}

/// Monte-Carlo statistics of `ẋ = A_cl(ξ)x` over `n_mc` seeded samples,
/// with the unbiased variance estimator.
pub fn simulate_monte_carlo(plant: &UncertainPlant, k: &Gain, x0: &[f64], cfg: &SimConfig) -> Result<TrajectoryStats> {
    check_x0(plant, x0)?;
    k.check_dims(&plant.dims())?;
    if cfg.n_mc < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least 2 samples".into()));
    }
    let steps = cfg.steps()?;
    let t = cfg.times(steps);
    let n_x = x0.len();
    let xi = sample_xi(&plant.dist, cfg.n_mc, Sampling::Random { seed: cfg.seed })?;
    let chunks: Vec<&[Vec<f64>]> = xi.chunks(CHUNK).collect();
    let partial = cfg.execution.map_slice(&chunks, |chunk| -> Result<Welford> {
        let mut acc = Welford::new(t.len(), n_x);
        for x in chunk.iter() {
            let a = plant.sample(x).close(k).a;
            let traj = propagate(&transition_matrix(&a, cfg.dt), dvec(x0), steps, cfg.record_every, cfg.blowup, cfg.dt)?;
            acc.push(&traj);
        }
        Ok(acc)
    });
    let mut total = Welford::new(t.len(), n_x);
    for p in partial {
        total.merge(&p?);
    }
    let var = total.m2.iter().map(|row| row.iter().map(|m| m / (total.n - 1.0)).collect()).collect();
    Ok(TrajectoryStats { source: Source::MonteCarlo, t, mean: total.mean, var })
}

// Mean is block 0; variance sums the squares of blocks 1..N_p.
fn expanded_stats(source: Source, t: Vec<f64>, traj: &[DVector<f64>], n_x: usize) -> TrajectoryStats {
    let n_blocks = traj.first().map_or(0, |x| x.len() / n_x);
    let mean = traj.iter().map(|x| (0..n_x).map(|i| x[i]).collect()).collect();
    let var = traj
        .iter()
        .map(|x| (0..n_x).map(|i| (1..n_blocks).map(|j| x[j * n_x + i].powi(2)).sum()).collect())
        .collect();
    TrajectoryStats { source, t, mean, var }
}

fn expanded_trajectories(
    plant: &UncertainPlant,
    k: &Gain,
    basis: &OrthonormalBasis,
    x0: &[f64],
    cfg: &SimConfig,
) -> Result<[Vec<DVector<f64>>; 2]> {
    check_x0(plant, x0)?;
    let steps = cfg.steps()?;
    let blocks = expand_blocks(plant, basis)?;
    let mut init = DVector::zeros(blocks.n_states());
    init.rows_mut(0, x0.len()).copy_from_slice(x0);
    let run = |a: &Mat| propagate(&transition_matrix(a, cfg.dt), init.clone(), steps, cfg.record_every, cfg.blowup, cfg.dt);
    let proposed = run(&assemble_closed_loop(&blocks, k)?.a)?;
    let legacy = run(&assemble_legacy(&blocks, k)?.a)?;
    Ok([proposed, legacy])
}

/// Statistics implied by the proposed and legacy expanded systems.
pub fn simulate_expanded(
    plant: &UncertainPlant,
    k: &Gain,
    basis: &OrthonormalBasis,
    x0: &[f64],
    cfg: &SimConfig,
) -> Result<(TrajectoryStats, TrajectoryStats)> {
    let [proposed, legacy] = expanded_trajectories(plant, k, basis, x0, cfg)?;
    let t = cfg.times(cfg.steps()?);
    Ok((
        expanded_stats(Source::ExpandedProposed, t.clone(), &proposed, x0.len()),
        expanded_stats(Source::ExpandedLegacy, t, &legacy, x0.len()),
    ))
}

/// Monte-Carlo, proposed and legacy statistics for the same initial state.
pub fn simulate_stats(
    plant: &UncertainPlant,
    k: &Gain,
    basis: &OrthonormalBasis,
    x0: &[f64],
    cfg: &SimConfig,
) -> Result<(TrajectoryStats, TrajectoryStats, TrajectoryStats)> {
    let mc = simulate_monte_carlo(plant, k, x0, cfg)?;
    let (proposed, legacy) = simulate_expanded(plant, k, basis, x0, cfg)?;
    Ok((mc, proposed, legacy))
}

// Per-node trajectories on a tensor Gauss grid.
fn node_trajectories(
    plant: &UncertainPlant,
    k: &Gain,
    quad: &Quadrature,
    x0: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<Vec<DVector<f64>>>> {
    let steps = cfg.steps()?;
    cfg.execution
        .map_slice(&quad.nodes, |xi| {
            let a = plant.sample(xi).close(k).a;
            propagate(&transition_matrix(&a, cfg.dt), dvec(x0), steps, cfg.record_every, cfg.blowup, cfg.dt)
        })
        .into_iter()
        .collect()
}

/// `sup_{ξ, t} ‖x(t, ξ) − Φ_xᵀ(ξ) X(t)‖₂` for the proposed and legacy
/// expanded systems, over an `n_nodes`-per-dimension Gauss grid.
pub fn transform_error(
    plant: &UncertainPlant,
    k: &Gain,
    basis: &OrthonormalBasis,
    x0: &[f64],
    cfg: &SimConfig,
    n_nodes: usize,
) -> Result<(f64, f64)> {
    let [proposed, legacy] = expanded_trajectories(plant, k, basis, x0, cfg)?;
    let quad = Quadrature::tensor(&plant.dist, n_nodes);
    let truth = node_trajectories(plant, k, &quad, x0, cfg)?;
    let n_x = x0.len();
    let n_p1 = basis.size();
    let sup = |expanded: &[DVector<f64>]| -> f64 {
        let mut worst: f64 = 0.0;
        for (xi, traj) in quad.nodes.iter().zip(&truth) {
            let phi = basis.eval_first(xi, n_p1);
            for (x, big) in traj.iter().zip(expanded) {
                let mut e2 = 0.0;
                for i in 0..n_x {
                    let rec: f64 = (0..n_p1).map(|j| phi[j] * big[j * n_x + i]).sum();
                    e2 += (x[i] - rec).powi(2);
                }
                worst = worst.max(e2.sqrt());
            }
        }
        worst
    };
    Ok((sup(&proposed), sup(&legacy)))
}

/// Sup-in-time errors of the expanded mean and variance against exact
/// moments from an `n_nodes`-per-dimension Gauss rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentErrors {
    pub mean_proposed: f64,
    pub mean_legacy: f64,
    pub var_proposed: f64,
    pub var_legacy: f64,
}

pub fn moment_error(
    plant: &UncertainPlant,
    k: &Gain,
    basis: &OrthonormalBasis,
    x0: &[f64],
    cfg: &SimConfig,
    n_nodes: usize,
) -> Result<MomentErrors> {
    let (proposed, legacy) = simulate_expanded(plant, k, basis, x0, cfg)?;
    let quad = Quadrature::tensor(&plant.dist, n_nodes);
    let truth = node_trajectories(plant, k, &quad, x0, cfg)?;
    let n_x = x0.len();
    let n_t = proposed.t.len();
    let mut mean = vec![vec![0.0; n_x]; n_t];
    let mut second = vec![vec![0.0; n_x]; n_t];
    for (w, traj) in quad.weights.iter().zip(&truth) {
        for (k, x) in traj.iter().enumerate() {
            for i in 0..n_x {
                mean[k][i] += w * x[i];
                second[k][i] += w * x[i] * x[i];
            }
        }
    }
    let var: Vec<Vec<f64>> =
        mean.iter().zip(&second).map(|(m, s)| m.iter().zip(s).map(|(m, s)| s - m * m).collect()).collect();
    let sup = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(u, v)| u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    };
    Ok(MomentErrors {
        mean_proposed: sup(&mean, &proposed.mean),
        mean_legacy: sup(&mean, &legacy.mean),
        var_proposed: sup(&var, &proposed.var),
        var_legacy: sup(&var, &legacy.var),
    })
}
