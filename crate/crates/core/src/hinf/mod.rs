//! Deterministic H∞ analysis and the matrix inequalities used for synthesis.
//!
//! [`hinf_norm`] computes the L2-induced gain of a stable state-space system
//! from the imaginary-axis eigenvalues of the associated Hamiltonian.
//! The LMI builders assemble, for fixed system data, the bounded-real
//! inequality, its robust counterpart for norm-bounded LDIs, the polytopic
//! worst-case inequality and the quadratic-stability test. Every builder has
//! a matrix-valued twin (`*_matrix`) that evaluates the inequality at
//! concrete decision values; the inequality holds iff that matrix is
//! negative definite.

mod lmi;
mod norm;

pub use lmi::{
    brl_gamma_lmi, brl_lmi, brl_matrix, polytopic_gamma_lmi, polytopic_lmi, quad_stab_lmi, quad_stab_matrix,
    robust_gamma_lmi, robust_lmi, robust_matrix, PStructure, RobustnessBound, SymVar, TauMode,
};
pub use norm::{frequency_gain, hinf_norm, DEFAULT_TOL};
