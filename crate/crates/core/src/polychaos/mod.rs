//! Orthonormal polynomial chaos: bases, quadrature, exact monomial and
//! polynomial-matrix expansions.

mod basis;
mod distribution;
mod multi_index;
mod polymat;
mod quadrature;

pub use basis::{default_quad_nodes, mean_var, OrthonormalBasis, SELF_CHECK_TOL};
pub use distribution::{Distribution, Marginal};
pub use multi_index::{basis_count, graded_lex, MultiIndex};
pub use polymat::PolynomialMatrix;
pub use quadrature::{gauss_rule, orthonormal_values, Quadrature};

use crate::error::Result;

/// Builds the degree-`p` basis with a monomial table up to `p + plant_degree`.
pub fn build_basis(dist: &Distribution, p: usize, plant_degree: usize, quad_nodes: Option<usize>) -> Result<OrthonormalBasis> {
    OrthonormalBasis::build(dist, p, plant_degree, quad_nodes)
}
