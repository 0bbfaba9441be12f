use super::{svd, Matrix, Metric};
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("cholesky needs a square matrix".into()));
    }
    if a.is_empty() {
        return Err(Error::Empty("cholesky"));
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return Err(Error::NotPositive(format!("pivot {j} is {d:e}")));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the lower factor.
pub fn cholesky_solve<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let s: T = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        y[i] = (b[i] - s) / l[(i, i)];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s: T = (i + 1..n).map(|k| l[(k, i)] * x[k]).sum();
        x[i] = (y[i] - s) / l[(i, i)];
    }
    x
}

/// Minimum-norm least-squares solution of `A x = b`, treating singular values
/// `σ ≤ rel_tol · σ_max` as zero.
pub fn pseudo_solve<T: Scalar>(a: &Matrix<T>, b: &[T], rel_tol: T) -> Result<Vec<T>> {
    if a.is_empty() {
        return Err(Error::Empty("pseudo_solve matrix"));
    }
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    if !(rel_tol > T::zero() && rel_tol < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    let dec = svd(a)?;
    let threshold = rel_tol * dec.singular_values[0];
    let mut x = vec![T::zero(); a.cols()];
    for (k, &s) in dec.singular_values.iter().enumerate() {
        if !(s > threshold) || s == T::zero() {
            break;
        }
        let coef = dot(&dec.left_vectors.column(k), b) / s;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += coef * dec.right_vectors[(i, k)];
        }
    }
    Ok(x)
}

/// Solves `(A + αI) v = b` for `A` self-adjoint and positive semidefinite in
/// `metric`, through the symmetric system `(Lᵀ A L⁻ᵀ + αI) Lᵀv = Lᵀ b`.
pub fn solve_shifted<T: Scalar>(a: &Matrix<T>, alpha: T, b: &[T], metric: &Metric<T>) -> Result<Vec<T>> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("shift must be positive, got {alpha}")));
    }
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let mut s = metric.symmetrize(a)?;
    for i in 0..s.rows() {
        s[(i, i)] += alpha;
    }
    let l = cholesky(&s)?;
    let z = cholesky_solve(&l, &metric.lift(b));
    Ok(metric.lower(&z))
}
