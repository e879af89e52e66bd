//! Two-state benchmark plant with cubic dependence on one uniform
//! parameter `ξ ~ U[−1, 1]`, and reference gains designed for it.
//!
//! ```text
//! A(ξ)  = [0.6ξ³  −0.4; 0.1  0.5]      B_w = [I₂  0₂ₓ₂]
//! B(ξ)  = [0.2 + ξ³; 0.2]              C(ξ) = [1  ξ³; 0  1]
//! D_w(ξ)= [0 0 1+2ξ³ 0; 0 0 0 1]
//! C_z   = [I₂; 0]   D_z = [0; 0; 0.2]   D_zw = 0
//! ```

use super::UncertainPlant;
use crate::linalg::{from_rows, Mat};
use crate::polychaos::{Distribution, MultiIndex, PolynomialMatrix};

/// Worst-case polytopic design.
pub const K_WORST_CASE: [f64; 2] = [-0.1281, -9.4664];
/// Nominal PCE designs at degrees 2, 3 and 10.
pub const K_NOMINAL_P2: [f64; 2] = [1.8539, -27.4996];
pub const K_NOMINAL_P3: [f64; 2] = [1.5298, -28.6719];
pub const K_NOMINAL_P10: [f64; 2] = [5.1988, -74.7948];

/// Reference `(worst-case, averaged)` H∞ norms over a 1000-point grid.
pub const NORMS_WORST_CASE: (f64, f64) = (54.1316, 21.0501);
pub const NORMS_NOMINAL_P2: (f64, f64) = (80.1360, 14.7713);
pub const NORMS_NOMINAL_P3: (f64, f64) = (57.7491, 15.1790);
pub const NORMS_NOMINAL_P10: (f64, f64) = (55.4751, 17.7026);

/// Reference gains with labels and their grid norms.
pub fn reference_gains() -> Vec<(&'static str, [f64; 2], (f64, f64))> {
    vec![
        ("worst_case", K_WORST_CASE, NORMS_WORST_CASE),
        ("nominal_p2", K_NOMINAL_P2, NORMS_NOMINAL_P2),
        ("nominal_p3", K_NOMINAL_P3, NORMS_NOMINAL_P3),
        ("nominal_p10", K_NOMINAL_P10, NORMS_NOMINAL_P10),
    ]
}

pub fn plant() -> UncertainPlant {
    let cubic = MultiIndex::new(vec![3]);
    let constant = |m: Mat| PolynomialMatrix::constant(m, 1);

    let mut a = constant(from_rows(&[&[0.0, -0.4], &[0.1, 0.5]]));
    a.add_entry(0, 0, cubic.clone(), 0.6).expect("static shape");

    let b_w = constant(from_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]]));

    let mut b = constant(from_rows(&[&[0.2], &[0.2]]));
    b.add_entry(0, 0, cubic.clone(), 1.0).expect("static shape");

    let mut c = constant(from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]));
    c.add_entry(0, 1, cubic.clone(), 1.0).expect("static shape");

    let mut d_w = constant(from_rows(&[&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]));
    d_w.add_entry(0, 2, cubic, 2.0).expect("static shape");

    let c_z = from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
    let d_z = from_rows(&[&[0.0], &[0.0], &[0.2]]);
    let d_zw = Mat::zeros(3, 4);

    UncertainPlant::new(a, b_w, b, c, d_w, c_z, d_zw, d_z, Distribution::uniform_unit(1))
        .expect("benchmark plant is dimensionally consistent")
}
