//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Complex, DMatrix, DMatrixViewMut, DVector, Schur, SymmetricEigen};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex<f64>>;

pub fn eye(n: usize) -> Mat {
    DMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> Mat {
    DMatrix::zeros(r, c)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// `I_n ⊗ b`, built without touching the zero blocks.
pub fn kron_eye(n: usize, b: &Mat) -> Mat {
    let (r, c) = b.shape();
    let mut out = zeros(n * r, n * c);
    for i in 0..n {
        out.view_mut((i * r, i * c), (r, c)).copy_from(b);
    }
    out
}

/// `dst += alpha · src` in place.
pub fn add_scaled(mut dst: DMatrixViewMut<'_, f64>, alpha: f64, src: &Mat) {
    dst.zip_apply(src, |d, s| *d += alpha * s);
}

/// `m + mᵀ`.
pub fn he(m: &Mat) -> Mat {
    m + m.transpose()
}

/// `(m + mᵀ) / 2`.
pub fn sym(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Assembles a block matrix from a grid of optional blocks.
///
/// Row heights and column widths are taken from `rows` and `cols`; `None`
/// entries are zero. Panics on a block whose shape disagrees with the grid.
pub fn block(rows: &[usize], cols: &[usize], entries: &[Vec<Option<&Mat>>]) -> Mat {
    assert_eq!(entries.len(), rows.len());
    let nr: usize = rows.iter().sum();
    let nc: usize = cols.iter().sum();
    let mut out = zeros(nr, nc);
    let mut r0 = 0;
    for (bi, row) in entries.iter().enumerate() {
        assert_eq!(row.len(), cols.len());
        let mut c0 = 0;
        for (bj, e) in row.iter().enumerate() {
            if let Some(m) = e {
                assert_eq!(m.shape(), (rows[bi], cols[bj]), "block ({bi},{bj}) shape");
                out.view_mut((r0, c0), (rows[bi], cols[bj])).copy_from(*m);
            }
            c0 += cols[bj];
        }
        r0 += rows[bi];
    }
    out
}

/// Horizontal concatenation; all parts share the row count.
pub fn hcat(parts: &[Mat]) -> Mat {
    let r = parts.first().map_or(0, |m| m.nrows());
    let c: usize = parts.iter().map(|m| m.ncols()).sum();
    let mut out = zeros(r, c);
    let mut c0 = 0;
    for m in parts {
        out.view_mut((0, c0), m.shape()).copy_from(m);
        c0 += m.ncols();
    }
    out
}

/// Vertical concatenation; all parts share the column count.
pub fn vcat(parts: &[Mat]) -> Mat {
    let c = parts.first().map_or(0, |m| m.ncols());
    let r: usize = parts.iter().map(|m| m.nrows()).sum();
    let mut out = zeros(r, c);
    let mut r0 = 0;
    for m in parts {
        out.view_mut((r0, 0), m.shape()).copy_from(m);
        r0 += m.nrows();
    }
    out
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(a: &Mat) -> Vec<Complex<f64>> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    match Schur::try_new(a.clone(), f64::EPSILON, 10_000) {
        Some(s) => s.complex_eigenvalues().iter().copied().collect(),
        None => vec![Complex::new(f64::NAN, 0.0); a.nrows()],
    }
}

/// Largest real part over the spectrum; NaN if the eigensolver diverged.
pub fn spectral_abscissa(a: &Mat) -> f64 {
    eigenvalues(a)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eig_sym(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(sym(m)).eigenvalues.min()
}

/// Largest eigenvalue of the symmetric part of `m`.
pub fn max_eig_sym(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    SymmetricEigen::new(sym(m)).eigenvalues.max()
}

/// Largest singular value of a real matrix.
pub fn sigma_max(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Largest singular value of a complex matrix.
pub fn sigma_max_c(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex::new(x, 0.0))
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Row-major construction from nested slices.
pub fn from_rows(rows: &[&[f64]]) -> Mat {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    DMatrix::from_fn(r, c, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_eye_matches_kronecker() {
        let b = from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        assert_eq!(kron_eye(3, &b), kron(&eye(3), &b));
    }

    #[test]
    fn block_places_entries() {
        let a = eye(2);
        let b = from_rows(&[&[7.0], &[8.0]]);
        let m = block(&[2, 1], &[2, 1], &[vec![Some(&a), Some(&b)], vec![None, None]]);
        assert_eq!(m[(1, 2)], 8.0);
        assert_eq!(m[(2, 2)], 0.0);
        assert_eq!(m[(0, 0)], 1.0);
    }

    #[test]
    fn spectral_abscissa_of_triangular() {
        let a = from_rows(&[&[-1.0, 5.0], &[0.0, -2.0]]);
        assert!((spectral_abscissa(&a) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn concatenation_shapes() {
        let a = eye(2);
        assert_eq!(hcat(&[a.clone(), a.clone()]).shape(), (2, 4));
        assert_eq!(vcat(&[a.clone(), a]).shape(), (4, 2));
    }
}
