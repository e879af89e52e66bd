//! Primal-dual path following with Nesterov–Todd scaling.
//!
//! Internal standard form, block diagonal:
//!
//! ```text
//! (D)  min cᵀx   s.t.  S = G_0 + Σ x_i G_i ≽ 0
//! (P)  max −⟨G_0, X⟩   s.t.  ⟨G_i, X⟩ = c_i,  X ≽ 0
//! ```
//!
//! with `G_0 = s_k (F_0 − margin·I)` and `G_i = s_k F_i` for a per-block
//! Frobenius scale `s_k`.

use nalgebra::{Cholesky, SymmetricEigen, SVD};

use super::lowrank::LowRank;
use super::{LmiProblem, SdpOptions, SdpSolution, SdpStatus};
use crate::linalg::{min_eig_sym, sym, Mat};

struct StdBlock {
    g0: Mat,
    g: Vec<LowRank>,
}

struct StdProblem {
    c: Vec<f64>,
    blocks: Vec<StdBlock>,
}

impl StdProblem {
    fn m(&self) -> usize {
        self.c.len()
    }

    fn order(&self) -> usize {
        self.blocks.iter().map(|b| b.g0.nrows()).sum()
    }

    fn eval(&self, x: &[f64]) -> Vec<Mat> {
        self.blocks
            .iter()
            .map(|b| {
                let mut m = b.g0.clone();
                for (g, &xi) in b.g.iter().zip(x) {
                    if xi != 0.0 {
                        g.add_to(&mut m, xi);
                    }
                }
                m
            })
            .collect()
    }

    fn adjoint(&self, y: &[Mat]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for (b, yk) in self.blocks.iter().zip(y) {
            for (o, g) in out.iter_mut().zip(&b.g) {
                if !g.is_zero() {
                    *o += g.inner(yk);
                }
            }
        }
        out
    }
}

enum Exit {
    Converged,
    MaxIter,
    Numerical,
    Diverged,
    Hook,
}

struct Outcome {
    exit: Exit,
    x: Vec<f64>,
    relgap: f64,
    iters: usize,
}

struct Progress<'a> {
    x: &'a [f64],
    dobj: f64,
    dual_feasible: bool,
    primal_feasible: bool,
}

fn frob(m: &Mat) -> f64 {
    m.norm()
}

fn inner(a: &Mat, b: &Mat) -> f64 {
    a.dot(b)
}

// Largest α ≤ ∞ with Z + αΔ ≽ 0, given the Cholesky factor of Z.
fn max_step(chol_l: &Mat, delta: &Mat) -> f64 {
    let linv_d = chol_l.solve_lower_triangular(delta).expect("nonsingular factor");
    let t = chol_l
        .solve_lower_triangular(&linv_d.transpose())
        .expect("nonsingular factor");
    let lmin = SymmetricEigen::new(sym(&t)).eigenvalues.min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

struct Scaling {
    w: Mat,
    g: Mat,
    ginv: Mat,
    lambda: Vec<f64>,
    lx: Mat,
    ls: Mat,
}

fn nt_scaling(x: &Mat, s: &Mat) -> Option<Scaling> {
    let lx = Cholesky::new(sym(x))?.l();
    let ls = Cholesky::new(sym(s))?.l();
    let n = x.nrows();
    let svd = SVD::new(ls.transpose() * &lx, true, true);
    let v = svd.v_t.as_ref()?.transpose();
    let sig = &svd.singular_values;
    if sig.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let mut g = &lx * &v;
    for j in 0..n {
        let f = 1.0 / sig[j].sqrt();
        g.column_mut(j).scale_mut(f);
    }
    let linv = lx.solve_lower_triangular(&Mat::identity(n, n))?;
    let mut ginv = v.transpose() * linv;
    for i in 0..n {
        let f = sig[i].sqrt();
        ginv.row_mut(i).scale_mut(f);
    }
    let w = &g * g.transpose();
    Some(Scaling { w, g, ginv, lambda: sig.iter().copied().collect(), lx, ls })
}

struct Direction {
    dx: Vec<f64>,
    ds: Vec<Mat>,
    dxm: Vec<Mat>,
}

fn solve_schur(chol: &Cholesky<f64, nalgebra::Dyn>, rhs: Vec<f64>) -> Vec<f64> {
    let b = nalgebra::DVector::from_vec(rhs);
    chol.solve(&b).iter().copied().collect()
}

#[allow(clippy::too_many_arguments)]
fn direction(
    prob: &StdProblem,
    scal: &[Scaling],
    chol: &Cholesky<f64, nalgebra::Dyn>,
    rp: &[f64],
    rd: &[Mat],
    rc: &[Mat],
) -> Direction {
    let tmp: Vec<Mat> = scal
        .iter()
        .zip(rd)
        .zip(rc)
        .map(|((sc, rdk), rck)| rck - &sc.w * rdk * &sc.w)
        .collect();
    let proj = prob.adjoint(&tmp);
    let rhs: Vec<f64> = proj.iter().zip(rp).map(|(a, b)| a - b).collect();
    let dx = solve_schur(chol, rhs);
    let mut ds = Vec::with_capacity(prob.blocks.len());
    let mut dxm = Vec::with_capacity(prob.blocks.len());
    for ((b, sc), (rdk, rck)) in prob.blocks.iter().zip(scal).zip(rd.iter().zip(rc)) {
        let mut d = rdk.clone();
        for (g, &v) in b.g.iter().zip(&dx) {
            if v != 0.0 {
                g.add_to(&mut d, v);
            }
        }
        let dxk = sym(&(rck - &sc.w * &d * &sc.w));
        ds.push(d);
        dxm.push(dxk);
    }
    Direction { dx, ds, dxm }
}

fn schur_matrix(prob: &StdProblem, scal: &[Scaling]) -> Mat {
    let m = prob.m();
    let mut mm = Mat::zeros(m, m);
    for (b, sc) in prob.blocks.iter().zip(scal) {
        for j in 0..m {
            let gj = &b.g[j];
            if gj.is_zero() {
                continue;
            }
            let y = gj.congruence(&sc.w);
            for i in 0..=j {
                let gi = &b.g[i];
                if gi.is_zero() {
                    continue;
                }
                let v = gi.inner(&y);
                mm[(i, j)] += v;
                if i != j {
                    mm[(j, i)] += v;
                }
            }
        }
    }
    mm
}

fn factor_schur(mm: Mat) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = Cholesky::new(mm.clone()) {
        return Some(c);
    }
    let m = mm.nrows();
    let scale = (0..m).map(|i| mm[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = mm;
    for i in 0..m {
        reg[(i, i)] += 1e-13 * scale;
    }
    Cholesky::new(reg)
}

// Core path-following loop. `hook` may stop early on a certified verdict.
fn path_follow<H: Fn(&Progress) -> bool>(
    prob: &StdProblem,
    mut x: Vec<f64>,
    mut s: Vec<Mat>,
    mut xm: Vec<Mat>,
    opts: &SdpOptions,
    hook: H,
) -> Outcome {
    let n_total = prob.order() as f64;
    let c_norm = prob.c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let g0_norm = prob.blocks.iter().map(|b| frob(&b.g0).powi(2)).sum::<f64>().sqrt();
    let mut relgap = f64::INFINITY;
    for it in 0..opts.max_iter {
        let gx = prob.eval(&x);
        let rd: Vec<Mat> = gx.iter().zip(&s).map(|(g, sk)| g - sk).collect();
        let ax = prob.adjoint(&xm);
        let rp: Vec<f64> = prob.c.iter().zip(&ax).map(|(c, a)| c - a).collect();
        let pobj: f64 = prob.c.iter().zip(&x).map(|(c, v)| c * v).sum();
        let dobj: f64 = -prob.blocks.iter().zip(&xm).map(|(b, xk)| inner(&b.g0, xk)).sum::<f64>();
        let gap: f64 = xm.iter().zip(&s).map(|(a, b)| inner(a, b)).sum();
        let mu = gap / n_total;
        relgap = gap.max(0.0) / (1.0 + pobj.abs());
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + c_norm);
        let dinf = rd.iter().map(|m| frob(m).powi(2)).sum::<f64>().sqrt() / (1.0 + g0_norm);

        let progress = Progress {
            x: &x,
            dobj,
            dual_feasible: pinf < opts.feas_tol,
            primal_feasible: dinf < opts.feas_tol,
        };
        if hook(&progress) {
            return Outcome { exit: Exit::Hook, x, relgap, iters: it };
        }
        if relgap < opts.gap_tol && pinf < opts.feas_tol && dinf < opts.feas_tol {
            return Outcome { exit: Exit::Converged, x, relgap, iters: it };
        }
        if x.iter().any(|v| v.abs() > opts.divergence_bound) {
            return Outcome { exit: Exit::Diverged, x, relgap, iters: it };
        }

        let mut scal = Vec::with_capacity(prob.blocks.len());
        for (xk, sk) in xm.iter().zip(&s) {
            match nt_scaling(xk, sk) {
                Some(sc) => scal.push(sc),
                None => return Outcome { exit: Exit::Numerical, x, relgap, iters: it },
            }
        }
        let chol = match factor_schur(schur_matrix(prob, &scal)) {
            Some(c) => c,
            None => return Outcome { exit: Exit::Numerical, x, relgap, iters: it },
        };

        // Predictor.
        let rc: Vec<Mat> = xm.iter().map(|xk| -xk).collect();
        let pred = direction(prob, &scal, &chol, &rp, &rd, &rc);
        let (ax_a, as_a) = step_lengths(&scal, &pred);
        let ax_a = ax_a.min(1.0);
        let as_a = as_a.min(1.0);
        let mu_aff: f64 = xm
            .iter()
            .zip(&pred.dxm)
            .zip(s.iter().zip(&pred.ds))
            .map(|((xk, dxk), (sk, dsk))| inner(&(xk + dxk * ax_a), &(sk + dsk * as_a)))
            .sum::<f64>()
            / n_total;
        let sigma = if mu > 0.0 { (mu_aff.max(0.0) / mu).powi(3).clamp(0.0, 1.0) } else { 0.0 };

        // Corrector in the scaled space.
        let rc: Vec<Mat> = scal
            .iter()
            .zip(pred.dxm.iter().zip(&pred.ds))
            .map(|(sc, (dxk, dsk))| {
                let n = sc.lambda.len();
                let dxt = &sc.ginv * dxk * sc.ginv.transpose();
                let dst = sc.g.transpose() * dsk * &sc.g;
                let corr = sym(&(dxt * dst));
                let mut t = Mat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let mut h = -corr[(i, j)];
                        if i == j {
                            h += sigma * mu - sc.lambda[i] * sc.lambda[i];
                        }
                        t[(i, j)] = 2.0 * h / (sc.lambda[i] + sc.lambda[j]);
                    }
                }
                sym(&(&sc.g * t * sc.g.transpose()))
            })
            .collect();
        let dir = direction(prob, &scal, &chol, &rp, &rd, &rc);
        let (amax_x, amax_s) = step_lengths(&scal, &dir);
        let factor = 0.9 + 0.09 * ax_a.min(as_a);
        let alpha_x = (factor * amax_x).min(1.0);
        let alpha_s = (factor * amax_s).min(1.0);
        if !(alpha_x.is_finite() && alpha_s.is_finite()) || (alpha_x < 1e-14 && alpha_s < 1e-14) {
            return Outcome { exit: Exit::Numerical, x, relgap, iters: it };
        }
        for (xk, d) in xm.iter_mut().zip(&dir.dxm) {
            *xk += d * alpha_x;
        }
        for (v, d) in x.iter_mut().zip(&dir.dx) {
            *v += alpha_s * d;
        }
        for (sk, d) in s.iter_mut().zip(&dir.ds) {
            *sk += d * alpha_s;
        }
    }
    Outcome { exit: Exit::MaxIter, x, relgap, iters: opts.max_iter }
}

fn step_lengths(scal: &[Scaling], dir: &Direction) -> (f64, f64) {
    let mut ax = f64::INFINITY;
    let mut as_ = f64::INFINITY;
    for (sc, (dxk, dsk)) in scal.iter().zip(dir.dxm.iter().zip(&dir.ds)) {
        ax = ax.min(max_step(&sc.lx, dxk));
        as_ = as_.min(max_step(&sc.ls, dsk));
    }
    (ax, as_)
}

// Per-block scale: inverse of the largest Frobenius norm among its data.
fn block_scales(problem: &LmiProblem) -> Vec<f64> {
    problem
        .blocks()
        .iter()
        .map(|b| {
            let mut mx = frob(&b.f0);
            for f in &b.coeffs {
                mx = mx.max(frob(f));
            }
            if mx > 0.0 {
                1.0 / mx
            } else {
                1.0
            }
        })
        .collect()
}

fn initial_dual(prob: &StdProblem) -> Vec<Mat> {
    prob.blocks
        .iter()
        .map(|b| {
            let n = b.g0.nrows();
            let mut ratio: f64 = 0.0;
            for (g, c) in b.g.iter().zip(&prob.c) {
                if !g.is_zero() {
                    let mut d = Mat::zeros(n, n);
                    g.add_to(&mut d, 1.0);
                    ratio = ratio.max((1.0 + c.abs()) / (1.0 + frob(&d)));
                }
            }
            let zeta = (n as f64).sqrt().max(n as f64 * ratio).max(1.0);
            Mat::identity(n, n) * zeta
        })
        .collect()
}

pub(super) fn solve(problem: &LmiProblem, opts: &SdpOptions) -> SdpSolution {
    let m = problem.n_vars();
    let margin = problem.margin();
    let finish = |status: SdpStatus, x: Vec<f64>, gap: f64, iterations: usize, phase1_value: Option<f64>| SdpSolution {
        status,
        objective: problem.objective_value(&x),
        min_eig: problem.min_eigs(&x),
        x,
        gap,
        iterations,
        phase1_value,
    };
    let objective_is_zero = problem.objective().iter().all(|&c| c == 0.0);

    if problem.blocks().is_empty() {
        let status = if objective_is_zero { SdpStatus::Optimal } else { SdpStatus::Unbounded };
        return finish(status, vec![0.0; m], 0.0, 0, None);
    }

    let scales = block_scales(problem);
    let lowrank: Vec<Vec<LowRank>> = problem
        .blocks()
        .iter()
        .zip(&scales)
        .map(|(b, &s)| b.coeffs.iter().map(|f| LowRank::from_dense(&(f * s))).collect())
        .collect();
    let g0s: Vec<Mat> = problem
        .blocks()
        .iter()
        .zip(&scales)
        .map(|(b, &s)| (&b.f0 - Mat::identity(b.dim(), b.dim()) * margin) * s)
        .collect();

    let mut x0 = opts.warm_start.clone().unwrap_or_else(|| vec![0.0; m]);
    x0.resize(m, 0.0);
    let mut iterations = 0;
    let mut phase1_value = None;

    // A strictly feasible warm start skips phase 1.
    let warm_ok = opts.warm_start.is_some() && problem.slack(&x0) > 0.0;
    let x_feasible = if warm_ok {
        x0
    } else {
        // Phase 1: min t s.t. s_k(F(x) − mI + tI) ≽ 0, t ≥ −1.
        let mut blocks: Vec<StdBlock> = g0s
            .iter()
            .zip(&lowrank)
            .zip(&scales)
            .map(|((g0, g), &s)| {
                let mut gv = g.clone();
                gv.push(LowRank::from_dense(&(Mat::identity(g0.nrows(), g0.nrows()) * s)));
                StdBlock { g0: g0.clone(), g: gv }
            })
            .collect();
        let mut tg = vec![LowRank { rows: Vec::new(), vecs: Vec::new() }; m];
        tg.push(LowRank::from_dense(&Mat::from_element(1, 1, 1.0)));
        blocks.push(StdBlock { g0: Mat::from_element(1, 1, 1.0), g: tg });
        let mut c = vec![0.0; m + 1];
        c[m] = 1.0;
        let p1 = StdProblem { c, blocks };

        let worst = problem
            .min_eigs(&x0)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let t0 = (margin - worst).max(0.0) + 1.0;
        let mut xs = x0.clone();
        xs.push(t0);
        let s0 = p1.eval(&xs);
        let xm0 = initial_dual(&p1);
        let threshold = -0.5 * margin;
        let early = opts.skip_trivial_phase2 && objective_is_zero;
        let out = path_follow(&p1, xs, s0, xm0, opts, |pr| {
            let t = pr.x[m];
            (early && pr.primal_feasible && t < threshold) || (pr.dual_feasible && pr.dobj > threshold && t > threshold)
        });
        iterations += out.iters;
        let t = out.x[m];
        phase1_value = Some(t);
        let mut xw = out.x.clone();
        xw.truncate(m);
        let certified_feasible = t < threshold && problem.slack(&xw) > -1e-12 * (1.0 + margin);
        match out.exit {
            Exit::Converged | Exit::Hook => {
                if !certified_feasible {
                    return finish(SdpStatus::Infeasible, xw, out.relgap, iterations, phase1_value);
                }
            }
            Exit::MaxIter | Exit::Numerical | Exit::Diverged => {
                if !certified_feasible {
                    let status = if matches!(out.exit, Exit::MaxIter) { SdpStatus::MaxIter } else { SdpStatus::NumericalFailure };
                    return finish(status, xw, out.relgap, iterations, phase1_value);
                }
            }
        }
        if objective_is_zero && opts.skip_trivial_phase2 {
            return finish(SdpStatus::Optimal, xw, 0.0, iterations, phase1_value);
        }
        xw
    };

    // Phase 2 from the strictly feasible point.
    let blocks: Vec<StdBlock> = g0s
        .into_iter()
        .zip(lowrank)
        .map(|(g0, g)| StdBlock { g0, g })
        .collect();
    let p2 = StdProblem { c: problem.objective().to_vec(), blocks };
    let gx = p2.eval(&x_feasible);
    let s0: Vec<Mat> = gx
        .iter()
        .map(|g| {
            let n = g.nrows();
            let lmin = min_eig_sym(g);
            let target = 1e-2;
            if lmin < target {
                g + Mat::identity(n, n) * (target - lmin)
            } else {
                g.clone()
            }
        })
        .collect();
    let xm0 = initial_dual(&p2);
    let out = path_follow(&p2, x_feasible.clone(), s0, xm0, opts, |_| false);
    iterations += out.iters;
    let status = match out.exit {
        Exit::Converged | Exit::Hook => SdpStatus::Optimal,
        Exit::MaxIter => SdpStatus::MaxIter,
        Exit::Numerical => SdpStatus::NumericalFailure,
        Exit::Diverged => SdpStatus::Unbounded,
    };
    // A failed phase 2 still owns a feasible point from phase 1.
    let x = if problem.slack(&out.x) >= -1e-9 || status == SdpStatus::Unbounded {
        out.x
    } else {
        x_feasible
    };
    finish(status, x, out.relgap, iterations, phase1_value)
}
