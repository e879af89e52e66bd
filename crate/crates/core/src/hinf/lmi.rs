use crate::error::{Error, Result};
use crate::linalg::{block, eye, he, zeros, Mat};
use crate::lti::LtiSystem;
use crate::plant::{close_loop, Gain, UncertainPlant};
use crate::sdp::LmiProblem;

/// Norm bound `ρ²` on the LDI uncertainty, `ΔᵀΔ ≼ ρ² I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessBound(f64);

impl RobustnessBound {
    pub fn new(rho2: f64) -> Result<Self> {
        if !(rho2 >= 0.0) || !rho2.is_finite() {
            return Err(Error::InvalidArgument(format!("ρ² must be finite and nonnegative, got {rho2}")));
        }
        Ok(Self(rho2))
    }

    pub fn rho2(self) -> f64 {
        self.0
    }
}

/// Parameterization of the Lyapunov matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PStructure {
    #[default]
    Full,
    Diagonal,
}

/// Multiplier `τ` of the LDI channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauMode {
    /// Decision variable with `τ > 0`.
    Free,
    Fixed(f64),
}

/// Symmetric matrix variable stored in a slice of the decision vector,
/// upper triangle row by row (or the diagonal only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymVar {
    pub offset: usize,
    pub n: usize,
    pub structure: PStructure,
}

impl SymVar {
    pub fn new(offset: usize, n: usize, structure: PStructure) -> Self {
        Self { offset, n, structure }
    }

    pub fn count(&self) -> usize {
        match self.structure {
            PStructure::Full => self.n * (self.n + 1) / 2,
            PStructure::Diagonal => self.n,
        }
    }

    pub fn end(&self) -> usize {
        self.offset + self.count()
    }

    pub fn mat(&self, x: &[f64]) -> Mat {
        let n = self.n;
        let mut p = zeros(n, n);
        let mut k = self.offset;
        match self.structure {
            PStructure::Full => {
                for i in 0..n {
                    for j in i..n {
                        p[(i, j)] = x[k];
                        p[(j, i)] = x[k];
                        k += 1;
                    }
                }
            }
            PStructure::Diagonal => {
                for i in 0..n {
                    p[(i, i)] = x[k];
                    k += 1;
                }
            }
        }
        p
    }

    /// Inverse of [`SymVar::mat`]; off-pattern entries are ignored.
    pub fn write(&self, p: &Mat, x: &mut [f64]) {
        let mut k = self.offset;
        for i in 0..self.n {
            match self.structure {
                PStructure::Full => {
                    for j in i..self.n {
                        x[k] = 0.5 * (p[(i, j)] + p[(j, i)]);
                        k += 1;
                    }
                }
                PStructure::Diagonal => {
                    x[k] = p[(i, i)];
                    k += 1;
                }
            }
        }
    }

    pub fn names(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::with_capacity(self.count());
        for i in 0..self.n {
            match self.structure {
                PStructure::Full => out.extend((i..self.n).map(|j| format!("{prefix}[{i},{j}]"))),
                PStructure::Diagonal => out.push(format!("{prefix}[{i},{i}]")),
            }
        }
        out
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("γ must be positive and finite, got {gamma}")));
    }
    Ok(())
}

/// `[He{PA}, PB, Cᵀ; BᵀP, −γI, Dᵀ; C, D, −γI]`.
pub fn brl_matrix(sys: &LtiSystem, p: &Mat, gamma: f64) -> Mat {
    let (n, nw, nz) = (sys.n_states(), sys.n_inputs(), sys.n_outputs());
    let pa = p * &sys.a;
    let pb = p * &sys.b;
    let h = he(&pa);
    let gw = eye(nw) * -gamma;
    let gz = eye(nz) * -gamma;
    let (pbt, ct, dt) = (pb.transpose(), sys.c.transpose(), sys.d.transpose());
    block(
        &[n, nw, nz],
        &[n, nw, nz],
        &[
            vec![Some(&h), Some(&pb), Some(&ct)],
            vec![Some(&pbt), Some(&gw), Some(&dt)],
            vec![Some(&sys.c), Some(&sys.d), Some(&gz)],
        ],
    )
}

/// Robust bounded-real matrix with rows `[state; w; Δ; z]`:
///
/// ```text
/// [He{PA} + τρ²I, PB,   PA,   Cᵀ;
///  BᵀP,          −γI,  0,    Dᵀ;
///  AᵀP,          0,    −τI,  Cᵀ;
///  C,            D,    C,    −γI]
/// ```
pub fn robust_matrix(sys: &LtiSystem, p: &Mat, tau: f64, gamma: f64, rho2: f64) -> Mat {
    let (n, nw, nz) = (sys.n_states(), sys.n_inputs(), sys.n_outputs());
    let pa = p * &sys.a;
    let pb = p * &sys.b;
    let h = he(&pa) + eye(n) * (tau * rho2);
    let gw = eye(nw) * -gamma;
    let gz = eye(nz) * -gamma;
    let tt = eye(n) * -tau;
    let (pat, pbt, ct, dt) = (pa.transpose(), pb.transpose(), sys.c.transpose(), sys.d.transpose());
    block(
        &[n, nw, n, nz],
        &[n, nw, n, nz],
        &[
            vec![Some(&h), Some(&pb), Some(&pa), Some(&ct)],
            vec![Some(&pbt), Some(&gw), None, Some(&dt)],
            vec![Some(&pat), None, Some(&tt), Some(&ct)],
            vec![Some(&sys.c), Some(&sys.d), Some(&sys.c), Some(&gz)],
        ],
    )
}

/// `[He{PA} + τρ²I, PA; AᵀP, −τI]`.
pub fn quad_stab_matrix(a: &Mat, p: &Mat, tau: f64, rho2: f64) -> Mat {
    let n = a.nrows();
    let pa = p * a;
    let h = he(&pa) + eye(n) * (tau * rho2);
    let pat = pa.transpose();
    let tt = eye(n) * -tau;
    block(&[n, n], &[n, n], &[vec![Some(&h), Some(&pa)], vec![Some(&pat), Some(&tt)]])
}

fn new_problem(pv: &SymVar, extra: &[&str]) -> Result<LmiProblem> {
    let mut lp = LmiProblem::new(pv.end() + extra.len());
    let mut names = pv.names("P");
    names.extend(extra.iter().map(|s| s.to_string()));
    lp.set_var_names(names)?;
    lp.add_affine_block(|x| pv.mat(x))?;
    Ok(lp)
}

/// BRL feasibility in `P` at fixed `γ`, with `P ≻ 0`.
pub fn brl_lmi(sys: &LtiSystem, gamma: f64, structure: PStructure) -> Result<LmiProblem> {
    check_gamma(gamma)?;
    let pv = SymVar::new(0, sys.n_states(), structure);
    let mut lp = new_problem(&pv, &[])?;
    lp.add_negdef_affine(|x| brl_matrix(sys, &pv.mat(x), gamma))?;
    Ok(lp)
}

/// BRL in `(P, γ)` minimizing `γ`; `γ` is the last variable.
pub fn brl_gamma_lmi(sys: &LtiSystem, structure: PStructure) -> Result<LmiProblem> {
    let pv = SymVar::new(0, sys.n_states(), structure);
    let mut lp = new_problem(&pv, &["gamma"])?;
    let g = pv.end();
    lp.add_negdef_affine(|x| brl_matrix(sys, &pv.mat(x), x[g]))?;
    lp.minimize_var(g);
    Ok(lp)
}

/// Robust LDI inequality in `P` (and `τ` when free) at fixed `γ`.
pub fn robust_lmi(sys: &LtiSystem, gamma: f64, rho: RobustnessBound, tau: TauMode) -> Result<LmiProblem> {
    check_gamma(gamma)?;
    let pv = SymVar::new(0, sys.n_states(), PStructure::Full);
    let rho2 = rho.rho2();
    match tau {
        TauMode::Free => {
            let mut lp = new_problem(&pv, &["tau"])?;
            let t = pv.end();
            lp.add_lower_bound(t, 0.0)?;
            lp.add_negdef_affine(|x| robust_matrix(sys, &pv.mat(x), x[t], gamma, rho2))?;
            Ok(lp)
        }
        TauMode::Fixed(tv) => {
            if !(tv > 0.0) {
                return Err(Error::InvalidArgument(format!("τ must be positive, got {tv}")));
            }
            let mut lp = new_problem(&pv, &[])?;
            lp.add_negdef_affine(|x| robust_matrix(sys, &pv.mat(x), tv, gamma, rho2))?;
            Ok(lp)
        }
    }
}

/// Robust LDI inequality in `(P, τ, γ)` minimizing `γ`.
pub fn robust_gamma_lmi(sys: &LtiSystem, rho: RobustnessBound) -> Result<LmiProblem> {
    let pv = SymVar::new(0, sys.n_states(), PStructure::Full);
    let mut lp = new_problem(&pv, &["tau", "gamma"])?;
    let (t, g) = (pv.end(), pv.end() + 1);
    let rho2 = rho.rho2();
    lp.add_lower_bound(t, 0.0)?;
    lp.add_negdef_affine(|x| robust_matrix(sys, &pv.mat(x), x[t], x[g], rho2))?;
    lp.minimize_var(g);
    Ok(lp)
}

fn vertex_systems(plant: &UncertainPlant, k: &Gain, vertices: &[Vec<f64>]) -> Result<Vec<LtiSystem>> {
    if vertices.is_empty() {
        return Err(Error::InvalidArgument("empty vertex list".into()));
    }
    vertices.iter().map(|v| close_loop(plant, k, v)).collect()
}

/// One BRL block per vertex closed loop, sharing `P`.
pub fn polytopic_lmi(plant: &UncertainPlant, k: &Gain, gamma: f64, vertices: &[Vec<f64>]) -> Result<LmiProblem> {
    check_gamma(gamma)?;
    let systems = vertex_systems(plant, k, vertices)?;
    let pv = SymVar::new(0, plant.dims().n_x, PStructure::Full);
    let mut lp = new_problem(&pv, &[])?;
    for sys in &systems {
        lp.add_negdef_affine(|x| brl_matrix(sys, &pv.mat(x), gamma))?;
    }
    Ok(lp)
}

/// Shared-`P` vertex BRL minimizing `γ`.
pub fn polytopic_gamma_lmi(plant: &UncertainPlant, k: &Gain, vertices: &[Vec<f64>]) -> Result<LmiProblem> {
    let systems = vertex_systems(plant, k, vertices)?;
    let pv = SymVar::new(0, plant.dims().n_x, PStructure::Full);
    let mut lp = new_problem(&pv, &["gamma"])?;
    let g = pv.end();
    for sys in &systems {
        lp.add_negdef_affine(|x| brl_matrix(sys, &pv.mat(x), x[g]))?;
    }
    lp.minimize_var(g);
    Ok(lp)
}

/// Quadratic stability of the LDI with state matrix `A` in `(P, τ)`.
pub fn quad_stab_lmi(a: &Mat, rho: RobustnessBound) -> Result<LmiProblem> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("state matrix must be square".into()));
    }
    let pv = SymVar::new(0, a.nrows(), PStructure::Full);
    let mut lp = new_problem(&pv, &["tau"])?;
    let t = pv.end();
    let rho2 = rho.rho2();
    lp.add_lower_bound(t, 0.0)?;
    lp.add_negdef_affine(|x| quad_stab_matrix(a, &pv.mat(x), x[t], rho2))?;
    Ok(lp)
}
