//! Stochastic Galerkin transformation of the closed loop.
//!
//! With `Φ_xᵀ(ξ) = φᵀ(ξ) ⊗ I_{n_x}` and the stacked coefficient vector
//! `X = [x_0; …; x_{N_p}]`, the proposed transform projects the *closed*
//! loop:
//!
//! ```text
//! 𝒜̄_cl = 𝒜 + ℬ̄ K̄ C̄        ℬ̄_cl = ℬ_w + ℬ̄ K̄ D̄_w
//! C̄_cl = C̄_Z + D̄_Z K̄ C̄    D̄_cl = D̄_Zw + D̄_Z K̄ D̄_w      K̄ = I_{N_q+1} ⊗ K
//! ```
//!
//! The legacy transform projects the open loop and closes it afterwards,
//! which keeps only the first `N_p + 1` coefficient blocks of `B`, `C` and
//! `D_w`. The two differ exactly by the tail `ℬ_1 𝒦_1 𝒞_1`.

use crate::error::{Error, Result};
use crate::linalg::{add_scaled, hcat, kron_eye, max_abs, vcat, zeros, Mat};
use crate::lti::LtiSystem;
use crate::plant::{Gain, PlantDims, UncertainPlant};
use crate::polychaos::OrthonormalBasis;

/// Galerkin building blocks, independent of the gain.
#[derive(Debug, Clone)]
pub struct ExpandedBlocks {
    pub p: usize,
    pub q: usize,
    /// `N_p + 1`.
    pub n_p1: usize,
    /// `N_q + 1`.
    pub n_q1: usize,
    pub dims: PlantDims,
    /// `𝒜`, block `(i, j)` is `E{φ_i φ_j A}`.
    pub a_cal: Mat,
    /// `ℬ_w`, block `i` is `E{φ_i B_w}`.
    pub b_w_cal: Mat,
    /// `B̂_k = E{φ_k Φ_x B}`, `k ≤ N_q`.
    pub b_hat: Vec<Mat>,
    /// `Ĉ_k = E{φ_k C Φ_xᵀ}`, `k ≤ N_q`.
    pub c_hat: Vec<Mat>,
    /// `D̂_{w,k} = E{φ_k D_w}`, `k ≤ N_q`.
    pub d_w_hat: Vec<Mat>,
    pub c_z: Mat,
    pub d_z: Mat,
    pub d_zw: Mat,
}

/// Which transform produced an expanded closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Proposed,
    Legacy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedClosedLoop {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub transform: Transform,
}

impl ExpandedClosedLoop {
    pub fn to_lti(&self) -> LtiSystem {
        LtiSystem { a: self.a.clone(), b: self.b.clone(), c: self.c.clone(), d: self.d.clone() }
    }
}

/// `q = max(p + deg B, p + deg C, deg D_w)`: the largest degree among
/// `Φ_x B`, `C Φ_xᵀ` and `D_w`.
pub fn output_degree(plant: &UncertainPlant, p: usize) -> usize {
    (p + plant.b.degree()).max(p + plant.c.degree()).max(plant.d_w.degree())
}

/// Computes every gain-independent block by exact quadrature.
pub fn expand_blocks(plant: &UncertainPlant, basis: &OrthonormalBasis) -> Result<ExpandedBlocks> {
    if basis.distribution() != &plant.dist {
        return Err(Error::InvalidArgument("basis and plant use different distributions".into()));
    }
    let p = basis.degree();
    let degree_in = plant.degree();
    if p + degree_in > basis.working_degree() {
        return Err(Error::DegreeOverflow { degree: p + degree_in, max: basis.working_degree() });
    }
    let q = output_degree(plant, p);
    if q > basis.working_degree() {
        return Err(Error::DegreeOverflow { degree: q, max: basis.working_degree() });
    }
    let dims = plant.dims();
    let PlantDims { n_x, n_u, n_w, n_y, .. } = dims;
    let n_p1 = basis.size();
    let n_q1 = basis.size_for_degree(q);
    let n = n_x * n_p1;

    let mut a_cal = zeros(n, n);
    let mut b_w_cal = zeros(n, n_w);
    let mut b_hat = vec![zeros(n, n_u); n_q1];
    let mut c_hat = vec![zeros(n_y, n); n_q1];
    let mut d_w_hat = vec![zeros(n_y, n_w); n_q1];

    let quad = basis.quadrature();
    for (xi, &wq) in quad.nodes.iter().zip(&quad.weights) {
        let phi = basis.eval_first(xi, n_q1);
        let s = plant.sample(xi);
        for i in 0..n_p1 {
            let wi = wq * phi[i];
            if wi == 0.0 {
                continue;
            }
            add_scaled(b_w_cal.view_mut((i * n_x, 0), (n_x, n_w)), wi, &s.b_w);
            for j in 0..n_p1 {
                add_scaled(a_cal.view_mut((i * n_x, j * n_x), (n_x, n_x)), wi * phi[j], &s.a);
            }
            for k in 0..n_q1 {
                let wik = wi * phi[k];
                add_scaled(b_hat[k].view_mut((i * n_x, 0), (n_x, n_u)), wik, &s.b);
                add_scaled(c_hat[k].view_mut((0, i * n_x), (n_y, n_x)), wik, &s.c);
            }
        }
        for k in 0..n_q1 {
            add_scaled(d_w_hat[k].as_view_mut(), wq * phi[k], &s.d_w);
        }
    }

    Ok(ExpandedBlocks {
        p,
        q,
        n_p1,
        n_q1,
        dims,
        a_cal,
        b_w_cal,
        b_hat,
        c_hat,
        d_w_hat,
        c_z: plant.c_z.clone(),
        d_z: plant.d_z.clone(),
        d_zw: plant.d_zw.clone(),
    })
}

impl ExpandedBlocks {
    /// `n_x (N_p + 1)`.
    pub fn n_states(&self) -> usize {
        self.dims.n_x * self.n_p1
    }

    /// `ℬ̄ = [B̂_0 … B̂_{N_q}]`.
    pub fn b_bar(&self) -> Mat {
        hcat(&self.b_hat)
    }

    /// `C̄ = [Ĉ_0; …; Ĉ_{N_q}]`.
    pub fn c_bar(&self) -> Mat {
        vcat(&self.c_hat)
    }

    /// `D̄_w = [D̂_{w,0}; …; D̂_{w,N_q}]`.
    pub fn d_w_bar(&self) -> Mat {
        vcat(&self.d_w_hat)
    }

    /// `K̄ = I_{N_q+1} ⊗ K`.
    pub fn k_bar(&self, k: &Gain) -> Mat {
        kron_eye(self.n_q1, k.matrix())
    }

    /// `C̄_Z = [I_{N_p+1} ⊗ C_z; 0]`.
    pub fn c_z_bar(&self) -> Mat {
        let n_z = self.dims.n_z;
        let mut out = zeros(n_z * self.n_q1, self.n_states());
        out.view_mut((0, 0), (n_z * self.n_p1, self.n_states()))
            .copy_from(&kron_eye(self.n_p1, &self.c_z));
        out
    }

    /// `D̄_Z = I_{N_q+1} ⊗ D_z`.
    pub fn d_z_bar(&self) -> Mat {
        kron_eye(self.n_q1, &self.d_z)
    }

    /// `D̄_Zw = [D_zw; 0; …; 0]` with `N_q + 1` row blocks.
    pub fn d_zw_bar(&self) -> Mat {
        zero_padded(&self.d_zw, self.n_q1)
    }

    /// Legacy `ℬ = [B̂_0 … B̂_{N_p}]`.
    pub fn b_legacy(&self) -> Mat {
        hcat(&self.b_hat[..self.n_p1])
    }

    /// Tail `ℬ_1 = [B̂_{N_p+1} … B̂_{N_q}]`.
    pub fn b_tail(&self) -> Mat {
        tail_h(&self.b_hat, self.n_p1, self.n_states())
    }

    /// Legacy `𝒞 = [Ĉ_0; …; Ĉ_{N_p}]`.
    pub fn c_legacy(&self) -> Mat {
        vcat(&self.c_hat[..self.n_p1])
    }

    /// Tail `𝒞_1`.
    pub fn c_tail(&self) -> Mat {
        tail_v(&self.c_hat, self.n_p1, self.n_states())
    }

    /// Legacy `𝒟_w`.
    pub fn d_w_legacy(&self) -> Mat {
        vcat(&self.d_w_hat[..self.n_p1])
    }

    /// Tail `𝒟_{w,1}`.
    pub fn d_w_tail(&self) -> Mat {
        tail_v(&self.d_w_hat, self.n_p1, self.dims.n_w)
    }

    /// Legacy `𝒦 = I_{N_p+1} ⊗ K`.
    pub fn k_legacy(&self, k: &Gain) -> Mat {
        kron_eye(self.n_p1, k.matrix())
    }

    /// Tail `𝒦_1 = I_{N_q−N_p} ⊗ K`.
    pub fn k_tail(&self, k: &Gain) -> Mat {
        kron_eye(self.n_q1 - self.n_p1, k.matrix())
    }

    /// Whether `B`, `C` and `D_w` carry no coefficients beyond `N_p`, in
    /// which case both transforms coincide.
    pub fn tail_is_zero(&self) -> bool {
        let zero = |ms: &[Mat]| ms.iter().all(|m| max_abs(m) == 0.0);
        zero(&self.b_hat[self.n_p1..]) && zero(&self.c_hat[self.n_p1..]) && zero(&self.d_w_hat[self.n_p1..])
    }

    fn check_gain(&self, k: &Gain) -> Result<()> {
        k.check_dims(&self.dims)
    }
}

fn zero_padded(top: &Mat, blocks: usize) -> Mat {
    let mut out = zeros(top.nrows() * blocks, top.ncols());
    out.view_mut((0, 0), top.shape()).copy_from(top);
    out
}

fn tail_h(parts: &[Mat], from: usize, rows: usize) -> Mat {
    if parts.len() == from {
        return zeros(rows, 0);
    }
    hcat(&parts[from..])
}

fn tail_v(parts: &[Mat], from: usize, cols: usize) -> Mat {
    if parts.len() == from {
        return zeros(0, cols);
    }
    vcat(&parts[from..])
}

/// Closed-loop sums over coefficient blocks `0..n_blocks`.
fn assemble(blocks: &ExpandedBlocks, k: &Gain, n_blocks: usize, transform: Transform) -> Result<ExpandedClosedLoop> {
    blocks.check_gain(k)?;
    let km = k.matrix();
    let n = blocks.n_states();
    let PlantDims { n_x, n_w, n_z, .. } = blocks.dims;

    let mut a = blocks.a_cal.clone();
    let mut b = blocks.b_w_cal.clone();
    let mut c = zeros(n_z * n_blocks, n);
    let mut d = zeros(n_z * n_blocks, n_w);
    let dzk = &blocks.d_z * km;
    for kk in 0..n_blocks {
        let bk = &blocks.b_hat[kk] * km;
        a += &bk * &blocks.c_hat[kk];
        b += &bk * &blocks.d_w_hat[kk];
        let mut c_row = &dzk * &blocks.c_hat[kk];
        if kk < blocks.n_p1 {
            let mut v = c_row.view_mut((0, kk * n_x), (n_z, n_x));
            v += &blocks.c_z;
        }
        c.view_mut((kk * n_z, 0), (n_z, n)).copy_from(&c_row);
        let mut d_row = &dzk * &blocks.d_w_hat[kk];
        if kk == 0 {
            d_row += &blocks.d_zw;
        }
        d.view_mut((kk * n_z, 0), (n_z, n_w)).copy_from(&d_row);
    }
    Ok(ExpandedClosedLoop { a, b, c, d, transform })
}

/// Proposed closed-loop transform.
pub fn assemble_closed_loop(blocks: &ExpandedBlocks, k: &Gain) -> Result<ExpandedClosedLoop> {
    assemble(blocks, k, blocks.n_q1, Transform::Proposed)
}

/// Legacy open-loop transform closed with `𝒦 = I_{N_p+1} ⊗ K`.
pub fn assemble_legacy(blocks: &ExpandedBlocks, k: &Gain) -> Result<ExpandedClosedLoop> {
    assemble(blocks, k, blocks.n_p1, Transform::Legacy)
}

/// `Φ_xᵀ(ξ) X = Σ_i φ_i(ξ) X_i`.
pub fn reconstruct_state(x: &[f64], n_x: usize, phi: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n_x];
    for (i, &f) in phi.iter().enumerate().take(x.len() / n_x) {
        for r in 0..n_x {
            out[r] += f * x[i * n_x + r];
        }
    }
    out
}

/// Both sides of the output-energy identity
/// `‖C̄_cl X + D̄_cl w‖² = E{‖C_cl(ξ) Φ_xᵀ(ξ) X + D_cl(ξ) w‖²}`.
pub fn znorm_identity_check(
    plant: &UncertainPlant,
    basis: &OrthonormalBasis,
    blocks: &ExpandedBlocks,
    k: &Gain,
    x: &[f64],
    w: &[f64],
) -> Result<(f64, f64)> {
    let n = blocks.n_states();
    let n_w = blocks.dims.n_w;
    if x.len() != n || w.len() != n_w {
        return Err(Error::Dimension(format!("expected X of length {n} and w of length {n_w}")));
    }
    let cl = assemble_closed_loop(blocks, k)?;
    let xv = Mat::from_column_slice(n, 1, x);
    let wv = Mat::from_column_slice(n_w, 1, w);
    let z = &cl.c * &xv + &cl.d * &wv;
    let lhs = z.norm_squared();

    let n_x = blocks.dims.n_x;
    let quad = basis.quadrature();
    let mut rhs = 0.0;
    for (xi, &wq) in quad.nodes.iter().zip(&quad.weights) {
        let phi = basis.eval_first(xi, blocks.n_p1);
        let state = Mat::from_column_slice(n_x, 1, &reconstruct_state(x, n_x, &phi));
        let s = plant.sample(xi).close(k);
        let zq = &s.c * &state + &s.d * &wv;
        rhs += wq * zq.norm_squared();
    }
    Ok((lhs, rhs))
}

/// Quadrature (`rhs`) and Galerkin (`lhs`) forms of
/// `Γ_1 = E{Φ_x C_clᵀ C_cl Φ_xᵀ}`, `Γ_2 = E{D_clᵀ C_cl Φ_xᵀ}`,
/// `Γ_3 = E{D_clᵀ D_cl}`.
#[derive(Debug, Clone)]
pub struct GammaIdentities {
    pub lhs: [Mat; 3],
    pub rhs: [Mat; 3],
}

impl GammaIdentities {
    /// Largest entrywise discrepancy per identity.
    pub fn defects(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| max_abs(&(&self.lhs[i] - &self.rhs[i])))
    }
}

pub fn gamma_identities(
    plant: &UncertainPlant,
    basis: &OrthonormalBasis,
    blocks: &ExpandedBlocks,
    k: &Gain,
) -> Result<GammaIdentities> {
    let cl = assemble_closed_loop(blocks, k)?;
    let lhs = [
        cl.c.transpose() * &cl.c,
        cl.d.transpose() * &cl.c,
        cl.d.transpose() * &cl.d,
    ];
    let n_x = blocks.dims.n_x;
    let n = blocks.n_states();
    let n_w = blocks.dims.n_w;
    let mut rhs = [zeros(n, n), zeros(n_w, n), zeros(n_w, n_w)];
    let quad = basis.quadrature();
    for (xi, &wq) in quad.nodes.iter().zip(&quad.weights) {
        let phi = basis.eval_first(xi, blocks.n_p1);
        let phi_t = kron_row(&phi, n_x);
        let s = plant.sample(xi).close(k);
        let cphi = &s.c * &phi_t;
        add_scaled(rhs[0].as_view_mut(), wq, &(cphi.transpose() * &cphi));
        add_scaled(rhs[1].as_view_mut(), wq, &(s.d.transpose() * &cphi));
        add_scaled(rhs[2].as_view_mut(), wq, &(s.d.transpose() * &s.d));
    }
    Ok(GammaIdentities { lhs, rhs })
}

/// `Φ_xᵀ = φᵀ ⊗ I_{n_x}` as an `n_x × n_x·len(φ)` matrix.
pub fn kron_row(phi: &[f64], n_x: usize) -> Mat {
    let mut out = zeros(n_x, n_x * phi.len());
    for (i, &f) in phi.iter().enumerate() {
        for r in 0..n_x {
            out[(r, i * n_x + r)] = f;
        }
    }
    out
}

/// `max |E{Φ_x Φ_xᵀ} − I|` under the basis quadrature.
pub fn kron_orthonormality_defect(basis: &OrthonormalBasis, n_x: usize) -> f64 {
    let n = basis.size();
    let g = basis.expect_matrix(n, |_, phi| {
        let t = kron_row(phi, n_x);
        t.transpose() * t
    });
    max_abs(&(g - Mat::identity(n * n_x, n * n_x)))
}
