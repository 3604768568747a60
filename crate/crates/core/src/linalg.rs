//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `‖M‖_F`, or 1 when `M = 0`, for scaling relative thresholds.
pub fn scale_of(m: &DMatrix<f64>) -> f64 {
    let s = m.norm();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

pub fn is_symmetric(m: &DMatrix<f64>, atol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= atol
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric eigendecomposition with eigenvalues in ascending order and
/// eigenvectors permuted to match.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = symmetrize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    sym_eigen(m).0
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn lambda_min(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

/// Largest eigenvalue of the symmetric part of `m`.
pub fn lambda_max(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).last().copied().unwrap_or(f64::NEG_INFINITY)
}

/// All eigenvalues of a real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn complex_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// 2-norm condition number; infinite for singular matrices.
pub fn cond(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Numerical rank with threshold `rel * σ_max`.
pub fn rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel * top).count()
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// `m - shift * I` over the complex field.
pub fn shifted(m: &DMatrix<f64>, shift: Complex64) -> DMatrix<Complex64> {
    let mut c = to_complex(m);
    for k in 0..m.nrows().min(m.ncols()) {
        c[(k, k)] -= shift;
    }
    c
}

/// Right singular vectors of a square complex matrix for its `k` smallest
/// singular values, as orthonormal columns. Also returns all singular
/// values in ascending order.
pub fn complex_null_basis(m: &DMatrix<Complex64>, k: usize) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.ncols();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    // Pad wide inputs so V is full.
    let work = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let sv = order.iter().map(|&i| svd.singular_values[i]).collect();
    let basis = DMatrix::from_fn(n, k, |r, c| v_t[(order[c], r)].conj());
    (sv, basis)
}

/// Orthonormal basis of the orthogonal complement of `range(Y)` when `Y`
/// has full column rank. Uses the symmetric eigendecomposition of `Y Yᵀ`.
pub fn orthogonal_complement(y: &DMatrix<f64>) -> DMatrix<f64> {
    let n = y.nrows();
    let keep = n - y.ncols();
    if keep == 0 {
        return DMatrix::zeros(n, 0);
    }
    let (_, vectors) = sym_eigen(&(y * y.transpose()));
    vectors.columns(0, keep).into_owned()
}

/// Solves `Aᵀ P + P A = -Q` for `P` by vectorization.
pub fn lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::dims("lyapunov", format!("{n}x{n}"), format!("{:?}", q.shape())));
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    // vec(AᵀP) = (I ⊗ Aᵀ) vec(P),  vec(PA) = (Aᵀ ⊗ I) vec(P)  (column-major vec)
    let op = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = DVector::from_iterator(n * n, q.iter().map(|v| -v));
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("Lyapunov operator is singular".into()))?;
    Ok(symmetrize(&DMatrix::from_column_slice(n, n, sol.as_slice())))
}

/// Block `(i, j)` of size `rows × cols` in a block-partitioned matrix.
pub fn block(m: &DMatrix<f64>, i: usize, j: usize, rows: usize, cols: usize) -> DMatrix<f64> {
    m.view((i * rows, j * cols), (rows, cols)).into_owned()
}

pub fn add_block(m: &mut DMatrix<f64>, i: usize, j: usize, b: &DMatrix<f64>, sign: f64) {
    let (r, c) = b.shape();
    let mut v = m.view_mut((i * r, j * c), (r, c));
    v += b * sign;
}

/// Block diagonal with `copies` repetitions of `b`, i.e. `I ⊗ b`.
pub fn block_diag_repeat(b: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    DMatrix::<f64>::identity(copies, copies).kronecker(b)
}

pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = DMatrix::zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyapunov_solves_equation() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]);
        let q = DMatrix::identity(2, 2);
        let p = lyapunov(&a, &q).unwrap();
        let residual = a.transpose() * &p + &p * &a + &q;
        assert!(residual.norm() < 1e-12);
        assert!(lambda_min(&p) > 0.0);
    }

    #[test]
    fn sym_eigen_sorted() {
        let m = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let (vals, vecs) = sym_eigen(&m);
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complement_is_orthogonal() {
        let y = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 0.0]);
        let w = orthogonal_complement(&y);
        assert_eq!(w.shape(), (3, 2));
        assert!((y.transpose() * &w).norm() < 1e-14);
        assert!((w.transpose() * &w - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn null_basis_of_jordan_block() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let (sv, basis) = complex_null_basis(&to_complex(&j), 1);
        assert!(sv[0] < 1e-14 && (sv[1] - 1.0).abs() < 1e-14);
        assert!((basis[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }
}
