//! Dense semidefinite programming for LMI problems.
//!
//! Problems have the form
//!
//! ```text
//! minimize  cᵀx   subject to   F_0^k + Σ_i x_i F_i^k ≽ margin · I   for every block k
//! ```
//!
//! and are solved by an infeasible-start primal-dual interior-point method
//! with Nesterov–Todd scaling and Mehrotra predictor-corrector steps.
//! Feasibility is decided first by a phase-1 problem that maximizes the
//! smallest constraint eigenvalue; a strictly feasible point then seeds the
//! optimization phase.

mod dump;
mod ipm;
mod lowrank;

use crate::error::{Error, Result};
use crate::linalg::{min_eig_sym, sym, zeros, Mat};

pub use dump::write_sdpa;

/// Default shift used to encode strict inequalities.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// One symmetric block `F_0 + Σ x_i F_i ≽ margin · I`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlock {
    pub f0: Mat,
    /// One coefficient per decision variable.
    pub coeffs: Vec<Mat>,
}

impl LmiBlock {
    pub fn dim(&self) -> usize {
        self.f0.nrows()
    }

    /// `F_0 + Σ x_i F_i`.
    pub fn eval(&self, x: &[f64]) -> Mat {
        let mut m = self.f0.clone();
        for (fi, &xi) in self.coeffs.iter().zip(x) {
            if xi != 0.0 {
                m += fi * xi;
            }
        }
        m
    }
}

/// Linear objective over affine symmetric-block constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiProblem {
    n_vars: usize,
    objective: Vec<f64>,
    blocks: Vec<LmiBlock>,
    margin: f64,
    var_names: Vec<String>,
}

impl LmiProblem {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            objective: vec![0.0; n_vars],
            blocks: Vec::new(),
            margin: DEFAULT_MARGIN,
            var_names: (0..n_vars).map(|i| format!("x{i}")).collect(),
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        assert!(margin >= 0.0 && margin.is_finite(), "margin must be a finite nonnegative number");
        self.margin = margin;
        self
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn blocks(&self) -> &[LmiBlock] {
        &self.blocks
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn set_objective(&mut self, c: Vec<f64>) -> Result<()> {
        if c.len() != self.n_vars {
            return Err(Error::Dimension(format!("objective has {} entries, expected {}", c.len(), self.n_vars)));
        }
        self.objective = c;
        Ok(())
    }

    /// Minimizes a single variable.
    pub fn minimize_var(&mut self, i: usize) {
        self.objective = vec![0.0; self.n_vars];
        self.objective[i] = 1.0;
    }

    pub fn set_var_names(&mut self, names: Vec<String>) -> Result<()> {
        if names.len() != self.n_vars {
            return Err(Error::Dimension("one name per variable required".into()));
        }
        self.var_names = names;
        Ok(())
    }

    /// Adds `F_0 + Σ x_i F_i ≽ margin·I`; matrices are symmetrized.
    pub fn add_block(&mut self, f0: Mat, coeffs: Vec<Mat>) -> Result<()> {
        let n = f0.nrows();
        if f0.ncols() != n {
            return Err(Error::Dimension("F_0 must be square".into()));
        }
        if coeffs.len() != self.n_vars {
            return Err(Error::Dimension(format!("{} coefficients for {} variables", coeffs.len(), self.n_vars)));
        }
        if coeffs.iter().any(|f| f.shape() != (n, n)) {
            return Err(Error::Dimension("coefficient shape differs from F_0".into()));
        }
        if f0.iter().chain(coeffs.iter().flat_map(|f| f.iter())).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite LMI data".into()));
        }
        self.blocks.push(LmiBlock { f0: sym(&f0), coeffs: coeffs.iter().map(sym).collect() });
        Ok(())
    }

    /// Adds the block `f(x) ≽ margin·I` for an affine map `f`, extracting
    /// `F_0 = f(0)` and `F_i = f(e_i) − f(0)`.
    pub fn add_affine_block<F: Fn(&[f64]) -> Mat>(&mut self, f: F) -> Result<()> {
        let mut x = vec![0.0; self.n_vars];
        let f0 = f(&x);
        let mut coeffs = Vec::with_capacity(self.n_vars);
        for i in 0..self.n_vars {
            x[i] = 1.0;
            coeffs.push(f(&x) - &f0);
            x[i] = 0.0;
        }
        self.add_block(f0, coeffs)
    }

    /// Adds `f(x) ≼ −margin·I` for an affine map `f`.
    pub fn add_negdef_affine<F: Fn(&[f64]) -> Mat>(&mut self, f: F) -> Result<()> {
        self.add_affine_block(|x| -f(x))
    }

    /// Adds the scalar constraint `x_i ≥ lower + margin`.
    pub fn add_lower_bound(&mut self, i: usize, lower: f64) -> Result<()> {
        let mut coeffs = vec![zeros(1, 1); self.n_vars];
        coeffs[i][(0, 0)] = 1.0;
        self.add_block(Mat::from_element(1, 1, -lower), coeffs)
    }

    /// Adds the scalar constraint `x_i ≤ upper − margin`.
    pub fn add_upper_bound(&mut self, i: usize, upper: f64) -> Result<()> {
        let mut coeffs = vec![zeros(1, 1); self.n_vars];
        coeffs[i][(0, 0)] = -1.0;
        self.add_block(Mat::from_element(1, 1, upper), coeffs)
    }

    /// `λ_min(F^k(x))` for every block (without the margin).
    pub fn min_eigs(&self, x: &[f64]) -> Vec<f64> {
        self.blocks.iter().map(|b| min_eig_sym(&b.eval(x))).collect()
    }

    /// Smallest `λ_min(F^k(x)) − margin` over blocks.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.min_eigs(x).into_iter().fold(f64::INFINITY, f64::min) - self.margin
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }
}

/// Solver termination status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    /// The objective decreases without bound over the feasible set.
    Unbounded,
    MaxIter,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SdpOptions {
    pub max_iter: usize,
    /// Relative duality-gap tolerance `⟨X, S⟩ / (1 + |cᵀx|)`.
    pub gap_tol: f64,
    /// Relative primal/dual residual tolerance.
    pub feas_tol: f64,
    /// Starting point; used directly when strictly feasible.
    pub warm_start: Option<Vec<f64>>,
    /// `‖x‖_∞` beyond which the objective is declared unbounded.
    pub divergence_bound: f64,
    /// Stop after phase 1 when the objective is identically zero.
    pub skip_trivial_phase2: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            warm_start: None,
            divergence_bound: 1e9,
            skip_trivial_phase2: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Final iterate (the phase-1 witness when infeasible).
    pub x: Vec<f64>,
    pub objective: f64,
    /// `λ_min(F^k(x))` per block, margin not subtracted.
    pub min_eig: Vec<f64>,
    /// Final relative duality gap.
    pub gap: f64,
    /// Interior-point iterations over both phases.
    pub iterations: usize,
    /// Optimal phase-1 value `t*` when phase 1 ran.
    pub phase1_value: Option<f64>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Smallest block eigenvalue.
    pub fn min_eig_overall(&self) -> f64 {
        self.min_eig.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Solves the problem; see the module docs for the two-phase scheme.
pub fn solve(problem: &LmiProblem, opts: &SdpOptions) -> SdpSolution {
    ipm::solve(problem, opts)
}

/// Decides strict feasibility: `true` iff the phase-1 optimum satisfies
/// `t* < −margin/2`, together with the witness.
pub fn feasibility(problem: &LmiProblem) -> (bool, Vec<f64>) {
    let mut p = problem.clone();
    p.objective = vec![0.0; p.n_vars];
    let sol = solve(&p, &SdpOptions::default());
    (sol.status == SdpStatus::Optimal, sol.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eye, from_rows, he};

    #[test]
    fn empty_problem_is_feasible_at_zero() {
        let p = LmiProblem::new(3);
        let (ok, x) = feasibility(&p);
        assert!(ok);
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn max_eigenvalue_by_sdp() {
        let m = from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, -1.0], &[0.0, -1.0, 0.5]]);
        let mut p = LmiProblem::new(1).with_margin(0.0);
        p.add_affine_block(|x| eye(3) * x[0] - &m).unwrap();
        p.minimize_var(0);
        let sol = solve(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Optimal);
        let lmax = crate::linalg::max_eig_sym(&m);
        assert!((sol.x[0] - lmax).abs() < 1e-8 * (1.0 + lmax.abs()), "{} vs {lmax}", sol.x[0]);
    }

    fn lyapunov(a: &Mat) -> LmiProblem {
        // P = [p0 p1; p1 p2]
        let mut p = LmiProblem::new(3);
        let pm = |x: &[f64]| from_rows(&[&[x[0], x[1]], &[x[1], x[2]]]);
        p.add_affine_block(pm).unwrap();
        let a = a.clone();
        p.add_negdef_affine(move |x| he(&(pm(x) * &a))).unwrap();
        p
    }

    #[test]
    fn lyapunov_verdicts() {
        let stable = from_rows(&[&[-1.0, 0.5], &[0.0, -2.0]]);
        let (ok, x) = feasibility(&lyapunov(&stable));
        assert!(ok);
        assert!(lyapunov(&stable).slack(&x) > 0.0);
        let unstable = from_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let sol = solve(&lyapunov(&unstable), &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn unbounded_objective_flagged() {
        let mut p = LmiProblem::new(1);
        p.add_affine_block(|x| Mat::from_element(1, 1, x[0])).unwrap();
        p.set_objective(vec![-1.0]).unwrap();
        assert_eq!(solve(&p, &SdpOptions::default()).status, SdpStatus::Unbounded);
    }

    #[test]
    fn bounded_scalar_minimum_sits_at_margin() {
        let mut p = LmiProblem::new(1);
        p.add_affine_block(|x| eye(2) * x[0]).unwrap();
        p.minimize_var(0);
        let sol = solve(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.x[0] - DEFAULT_MARGIN).abs() < 1e-8);
    }
}
