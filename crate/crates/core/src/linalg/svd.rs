//! Thin singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of a working copy of `A` are orthogonalised pairwise until every
//! pair is numerically orthogonal; the column norms are then the singular
//! values. Accurate for the small dense matrices used in this crate
//! (a few hundred rows at most).

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

const MAX_SWEEPS: usize = 80;

/// `A = U · diag(S) · Vᵀ` with `k = min(rows, cols)` columns in `U` and `V`.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    /// `rows × k`, orthonormal columns.
    pub left_vectors: Matrix<T>,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<T>,
    /// `cols × k`, orthonormal columns.
    pub right_vectors: Matrix<T>,
}

impl<T: Scalar> Svd<T> {
    pub fn rank(&self, rel_tol: T) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or_else(T::zero);
        self.singular_values.iter().filter(|&&s| s > rel_tol * smax).count()
    }

    /// `U · diag(S) · Vᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let u = &self.left_vectors;
        let v = &self.right_vectors;
        Matrix::from_fn(u.rows(), v.rows(), |i, j| {
            (0..self.singular_values.len())
                .map(|k| u[(i, k)] * self.singular_values[k] * v[(j, k)])
                .sum()
        })
    }
}

pub fn svd<T: Scalar>(a: &Matrix<T>) -> Result<Svd<T>> {
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input".into()));
    }
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose())?;
        Ok(Svd {
            left_vectors: t.right_vectors,
            singular_values: t.singular_values,
            right_vectors: t.left_vectors,
        })
    }
}

/// Largest singular value.
pub fn spectral_norm<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    if a.is_empty() {
        return Ok(T::zero());
    }
    Ok(svd(a)?.singular_values[0])
}

/// Smallest singular value exceeding `rel_tol · σ_max`.
pub fn min_positive_singular<T: Scalar>(a: &Matrix<T>, rel_tol: T) -> Result<T> {
    if a.is_empty() {
        return Err(Error::Empty("min_positive_singular"));
    }
    let s = svd(a)?.singular_values;
    let threshold = rel_tol * s[0];
    s.iter()
        .rev()
        .copied()
        .find(|&x| x > threshold && x > T::zero())
        .ok_or(Error::NumericallyZero)
}

fn jacobi_tall<T: Scalar>(a: &Matrix<T>) -> Result<Svd<T>> {
    let (m, n) = (a.rows(), a.cols());
    // Column-major working storage keeps the pairwise updates contiguous.
    let mut u: Vec<Vec<T>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            e
        })
        .collect();
    let tol = T::epsilon() * T::from_usize_lossy(m.max(1));
    // Pairs involving a column at roundoff level relative to ‖A‖_F are left alone.
    let negligible = (tol * a.frobenius()).powi(2);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = u.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NotConverged { sweeps: MAX_SWEEPS });
    }

    let sigma: Vec<T> = u.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).expect("finite"));

    let smax = sigma.get(order[0]).copied().unwrap_or_else(T::zero);
    let null_tol = T::epsilon() * T::from_usize_lossy(m.max(n)) * smax;
    let mut left: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for &j in &order {
        values.push(sigma[j]);
        if sigma[j] > null_tol && sigma[j] > T::zero() {
            left.push(u[j].iter().map(|&x| x / sigma[j]).collect());
        } else {
            pending.push(left.len());
            left.push(vec![T::zero(); m]);
        }
    }
    complete_orthonormal(&mut left, &pending, m);

    let left_vectors = Matrix::from_fn(m, n, |i, k| left[k][i]);
    let right_vectors = Matrix::from_fn(n, n, |i, k| v[order[k]][i]);
    Ok(Svd {
        left_vectors,
        singular_values: values,
        right_vectors,
    })
}

fn rotate<T: Scalar>(x: &mut [T], y: &mut [T], c: T, s: T) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Fills the `pending` columns with unit vectors orthogonal to all others.
fn complete_orthonormal<T: Scalar>(cols: &mut [Vec<T>], pending: &[usize], m: usize) {
    let mut candidate = 0usize;
    for &slot in pending {
        while candidate < m {
            let mut e = vec![T::zero(); m];
            e[candidate] = T::one();
            candidate += 1;
            // Two Gram-Schmidt passes for stability.
            for _ in 0..2 {
                for (k, c) in cols.iter().enumerate() {
                    if k == slot || c.iter().all(|x| *x == T::zero()) {
                        continue;
                    }
                    let proj = dot(c, &e);
                    for (ei, &ci) in e.iter_mut().zip(c) {
                        *ei -= proj * ci;
                    }
                }
            }
            let norm = dot(&e, &e).sqrt();
            if norm > T::lit(1e-3) {
                cols[slot] = e.into_iter().map(|x| x / norm).collect();
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let s = svd(&Matrix::<f64>::identity(3)).unwrap();
        assert_eq!(s.singular_values, vec![1.0, 1.0, 1.0]);
        let s = svd(&Matrix::from_diag(&[3.0, 0.0, 2.0])).unwrap();
        assert_eq!(s.singular_values, vec![3.0, 2.0, 0.0]);
        // The zero singular value still gets an orthonormal left vector.
        let u = &s.left_vectors;
        let utu = &u.transpose() * u;
        assert!(utu.sub(&Matrix::identity(3)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn wide_matrix_goes_through_transpose() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let s = svd(&a).unwrap();
        assert_eq!(s.left_vectors.rows(), 2);
        assert_eq!(s.right_vectors.rows(), 3);
        assert!(s.reconstruct().sub(&a).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn norms() {
        assert_eq!(spectral_norm(&Matrix::from_diag(&[1.0, 5.0, 2.0])).unwrap(), 5.0);
        assert_eq!(spectral_norm(&Matrix::<f64>::zeros(3, 3)).unwrap(), 0.0);
        assert_eq!(
            min_positive_singular(&Matrix::from_diag(&[3.0, 2.0, 0.0]), 1e-12).unwrap(),
            2.0
        );
        assert_eq!(min_positive_singular(&Matrix::<f64>::identity(4), 1e-12).unwrap(), 1.0);
        assert_eq!(
            min_positive_singular(&Matrix::<f64>::zeros(2, 2), 1e-12),
            Err(Error::NumericallyZero)
        );
    }

    #[test]
    fn rejects_nan() {
        let mut a = Matrix::<f64>::identity(2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(svd(&a), Err(Error::NonFinite(_))));
    }
}
