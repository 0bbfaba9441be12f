//! Finite-dimensional inner-product spaces `(ℝⁿ, ⟨u, v⟩ = uᵀ M v)`.
//!
//! Every metric is factored as `M = L Lᵀ`; the map `v ↦ Lᵀ v` is an isometry
//! onto plain `ℝⁿ`, which turns operators self-adjoint in the metric into
//! ordinary symmetric matrices.

use super::{cholesky, Matrix};
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// `ℝⁿ_w`: diagonal metric with strictly positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSpace<T> {
    weights: Vec<T>,
}

impl<T: Scalar> WeightedSpace<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("weighted space"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > T::zero())) {
            return Err(Error::InvalidParameter(format!(
                "weights must be finite and strictly positive, got {w}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn unit(n: usize) -> Self {
        Self {
            weights: vec![T::one(); n],
        }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// Metric given by a full symmetric positive definite Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GramSpace<T> {
    gram: Matrix<T>,
    factor: Matrix<T>,
}

impl<T: Scalar> GramSpace<T> {
    pub fn new(gram: Matrix<T>) -> Result<Self> {
        let factor = cholesky(&gram)?;
        Ok(Self { gram, factor })
    }

    pub fn gram(&self) -> &Matrix<T> {
        &self.gram
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Metric<T> {
    Euclidean(usize),
    Weighted(WeightedSpace<T>),
    Gram(GramSpace<T>),
}

impl<T: Scalar> From<WeightedSpace<T>> for Metric<T> {
    fn from(w: WeightedSpace<T>) -> Self {
        Metric::Weighted(w)
    }
}

/// Relative tolerance for the self-adjointness check, never below a few
/// hundred ulps of the scalar type.
pub(crate) fn self_adjoint_tol<T: Scalar>() -> T {
    T::lit(1e-8).max(T::epsilon() * T::lit(512.0))
}

impl<T: Scalar> Metric<T> {
    pub fn dim(&self) -> usize {
        match self {
            Metric::Euclidean(n) => *n,
            Metric::Weighted(w) => w.weights.len(),
            Metric::Gram(g) => g.gram.rows(),
        }
    }

    /// `M v`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        match self {
            Metric::Euclidean(_) => v.to_vec(),
            Metric::Weighted(w) => v.iter().zip(&w.weights).map(|(&x, &w)| x * w).collect(),
            Metric::Gram(g) => g.gram.matvec(v).expect("metric dimension"),
        }
    }

    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        dot(u, &self.apply(v))
    }

    pub fn norm(&self, v: &[T]) -> T {
        self.inner(v, v).max(T::zero()).sqrt()
    }

    pub fn matrix(&self) -> Matrix<T> {
        match self {
            Metric::Euclidean(n) => Matrix::identity(*n),
            Metric::Weighted(w) => Matrix::from_diag(&w.weights),
            Metric::Gram(g) => g.gram.clone(),
        }
    }

    /// `Lᵀ v`: coordinates in which the metric becomes the dot product.
    pub fn lift(&self, v: &[T]) -> Vec<T> {
        match self {
            Metric::Euclidean(_) => v.to_vec(),
            Metric::Weighted(w) => v.iter().zip(&w.weights).map(|(&x, &w)| x * w.sqrt()).collect(),
            Metric::Gram(g) => {
                let l = &g.factor;
                let n = l.rows();
                (0..n).map(|i| (i..n).map(|k| l[(k, i)] * v[k]).sum()).collect()
            }
        }
    }

    /// Inverse of [`Metric::lift`]: solves `Lᵀ v = z`.
    pub fn lower(&self, z: &[T]) -> Vec<T> {
        match self {
            Metric::Euclidean(_) => z.to_vec(),
            Metric::Weighted(w) => z.iter().zip(&w.weights).map(|(&x, &w)| x / w.sqrt()).collect(),
            Metric::Gram(g) => {
                let l = &g.factor;
                let n = l.rows();
                let mut v = vec![T::zero(); n];
                for i in (0..n).rev() {
                    let s: T = (i + 1..n).map(|k| l[(k, i)] * v[k]).sum();
                    v[i] = (z[i] - s) / l[(i, i)];
                }
                v
            }
        }
    }

    /// Checks that `A` is self-adjoint in this metric (`M·A` symmetric to
    /// `1e-8·‖M·A‖`) and returns the symmetric matrix `Lᵀ A L⁻ᵀ`.
    pub fn symmetrize(&self, a: &Matrix<T>) -> Result<Matrix<T>> {
        let n = self.dim();
        if a.rows() != n || a.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a {n}-dimensional space",
                a.rows(),
                a.cols()
            )));
        }
        let ma = self.matrix().matmul(a)?;
        let asymmetry = ma.asymmetry();
        let scale = ma.max_abs();
        if asymmetry > self_adjoint_tol::<T>() * scale {
            return Err(Error::NotSelfAdjoint {
                asymmetry: asymmetry.as_f64(),
                scale: scale.as_f64(),
            });
        }
        let mut s = match self {
            Metric::Euclidean(_) => a.clone(),
            Metric::Weighted(w) => {
                let r: Vec<T> = w.weights.iter().map(|w| w.sqrt()).collect();
                Matrix::from_fn(n, n, |i, j| r[i] * a[(i, j)] / r[j])
            }
            Metric::Gram(_) => {
                // Rows of Lᵀ A L⁻ᵀ are lift(A column)ᵀ pushed through L⁻¹.
                let lifted_cols: Vec<Vec<T>> = (0..n).map(|j| self.lift(&a.column(j))).collect();
                let lifted = Matrix::from_fn(n, n, |i, j| lifted_cols[j][i]);
                // S = lifted · L⁻ᵀ  ⇔  Sᵀ = L⁻¹ liftedᵀ ; solve each row with lower().
                let rows: Vec<Vec<T>> = (0..n).map(|i| self.lower_transpose_row(lifted.row(i))).collect();
                Matrix::from_fn(n, n, |i, j| rows[i][j])
            }
        };
        s.symmetrize_in_place();
        Ok(s)
    }

    /// Solves `xᵀ Lᵀ = rᵀ`, i.e. `L x = r` (forward substitution).
    fn lower_transpose_row(&self, r: &[T]) -> Vec<T> {
        match self {
            Metric::Gram(g) => {
                let l = &g.factor;
                let n = l.rows();
                let mut x = vec![T::zero(); n];
                for i in 0..n {
                    let s: T = (0..i).map(|k| l[(i, k)] * x[k]).sum();
                    x[i] = (r[i] - s) / l[(i, i)];
                }
                x
            }
            _ => unreachable!("only used for Gram metrics"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_be_positive() {
        assert!(WeightedSpace::new(vec![1.0, 0.0]).is_err());
        assert!(WeightedSpace::new(vec![1.0, -2.0]).is_err());
        assert!(WeightedSpace::<f64>::new(vec![]).is_err());
        assert!(WeightedSpace::new(vec![0.5, 2.0]).is_ok());
    }

    #[test]
    fn lift_is_an_isometry() {
        let gram = Matrix::from_rows(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 0.5], vec![0.0, 0.5, 2.0]]).unwrap();
        let m = Metric::Gram(GramSpace::new(gram).unwrap());
        let v = [0.3f64, -1.2, 2.0];
        let z = m.lift(&v);
        assert!((dot(&z, &z) - m.inner(&v, &v)).abs() < 1e-13);
        let back = m.lower(&z);
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn gram_symmetrization_preserves_spectrum() {
        let gram = Matrix::from_rows(&[vec![2.0f64, 0.5], vec![0.5, 1.0]]).unwrap();
        let metric = Metric::Gram(GramSpace::new(gram.clone()).unwrap());
        // A = G M with G symmetric is self-adjoint in M.
        let g = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.3]]).unwrap();
        let a = &g * &gram;
        let s = metric.symmetrize(&a).unwrap();
        let trace_a = a[(0, 0)] + a[(1, 1)];
        assert!((s[(0, 0)] + s[(1, 1)] - trace_a).abs() < 1e-14);
        assert!(s.asymmetry() == 0.0);
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let m = Metric::Weighted(WeightedSpace::new(vec![1.0, 2.0]).unwrap());
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(m.symmetrize(&a), Err(Error::NotSelfAdjoint { .. })));
    }
}
