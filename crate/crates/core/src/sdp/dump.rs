//! SDPA sparse text format for cross-checking with external solvers.
//!
//! SDPA solves `min cᵀx s.t. Σ x_i F_i − F_0 ≽ 0`, so the stored constant
//! matrix is `margin·I − F_0`.

use std::fmt::Write as _;

use super::LmiProblem;

pub fn write_sdpa(problem: &LmiProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "* LMI problem, margin {:e}", problem.margin());
    for (i, name) in problem.var_names().iter().enumerate() {
        let _ = writeln!(out, "* x{} = {}", i + 1, name);
    }
    let _ = writeln!(out, "{}", problem.n_vars());
    let _ = writeln!(out, "{}", problem.blocks().len());
    let sizes: Vec<String> = problem.blocks().iter().map(|b| b.dim().to_string()).collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let c: Vec<String> = problem.objective().iter().map(|v| format!("{v:e}")).collect();
    let _ = writeln!(out, "{}", c.join(" "));
    for (k, b) in problem.blocks().iter().enumerate() {
        let n = b.dim();
        for r in 0..n {
            for col in r..n {
                let shift = if r == col { problem.margin() } else { 0.0 };
                let v = shift - b.f0[(r, col)];
                if v != 0.0 {
                    let _ = writeln!(out, "0 {} {} {} {:e}", k + 1, r + 1, col + 1, v);
                }
            }
        }
        for (i, f) in b.coeffs.iter().enumerate() {
            for r in 0..n {
                for col in r..n {
                    let v = f[(r, col)];
                    if v != 0.0 {
                        let _ = writeln!(out, "{} {} {} {} {:e}", i + 1, k + 1, r + 1, col + 1, v);
                    }
                }
            }
        }
    }
    out
}
