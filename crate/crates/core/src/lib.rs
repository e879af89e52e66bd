//! Polynomial-chaos Galerkin transformation and H∞ static output-feedback
//! synthesis for LTI plants with polynomial dependence on random parameters.
//!
//! The crate is organised bottom-up:
//!
//! * [`polychaos`]: orthonormal polynomial bases, Gauss quadrature and exact
//!   expansions of monomials and polynomial matrices.
//! * [`plant`]: the uncertain plant, per-sample closed loops and parameter
//!   sampling.
//! * [`galerkin`]: the expanded (PCE-transformed) closed-loop system and the
//!   legacy open-loop transform it is compared against.
//! * [`sdp`]: a dense primal-dual interior-point solver for LMI problems.
//! * [`hinf`]: H∞ norm computation and the LMI families used in synthesis.
//! * [`synth`]: alternating-SDP synthesis, stability post-analysis and the
//!   robustness-bound bisection.
//! * [`eval`]: norm distributions, trajectory statistics and transform errors.

// Negated float comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod eval;
pub mod exec;
pub mod galerkin;
pub mod hinf;
pub mod linalg;
pub mod lti;
pub mod plant;
pub mod polychaos;
pub mod sdp;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Execution;
pub use lti::LtiSystem;
