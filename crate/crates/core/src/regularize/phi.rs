use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiKind<T> {
    /// `φ(λ) = λ^ν`, `ν ∈ (0, 1]` (mildly ill-posed).
    Power(T),
    /// `φ(λ) = (log 1/λ)^{-p}`, `p > 0` (severely ill-posed), for `λ < 1`.
    Log(T),
}

/// Source function with its constant `c₀` in
/// `sup_λ α φ(λ)/(λ + α) ≤ c₀ φ(α)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourcePhi<T> {
    pub kind: PhiKind<T>,
    pub c0: T,
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    let (l, h) = (lo.ln(), hi.ln());
    let steps = T::from_usize_lossy(count.saturating_sub(1).max(1));
    (0..count)
        .map(|i| (l + (h - l) * T::from_usize_lossy(i) / steps).exp())
        .collect()
}

impl<T: Scalar> SourcePhi<T> {
    /// `c₀ = 1`: the supremum equals `ν^ν (1−ν)^{1−ν} α^ν ≤ α^ν`.
    pub fn power(nu: T) -> Result<Self> {
        if !(nu > T::zero() && nu <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "power source needs ν in (0, 1], got {nu}"
            )));
        }
        Ok(Self {
            kind: PhiKind::Power(nu),
            c0: T::one(),
        })
    }

    /// `c₀` is the supremum measured on a log grid `λ, α ∈ [1e-12, 0.5]`,
    /// enlarged by 1% to cover points between grid nodes.
    pub fn log(p: T) -> Result<Self> {
        if !(p > T::zero()) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("log source needs p > 0, got {p}")));
        }
        let mut phi = Self {
            kind: PhiKind::Log(p),
            c0: T::one(),
        };
        let lambdas = log_grid(T::lit(1e-12), T::lit(0.5), 200);
        let alphas = log_grid(T::lit(1e-12), T::lit(0.5), 60);
        phi.c0 = phi.source_ratio(&lambdas, &alphas)? * T::lit(1.01);
        Ok(phi)
    }

    pub fn eval(&self, lambda: T) -> Result<T> {
        if !(lambda > T::zero()) {
            return Err(Error::InvalidParameter(format!("φ needs λ > 0, got {lambda}")));
        }
        match self.kind {
            PhiKind::Power(nu) => Ok(lambda.powf(nu)),
            PhiKind::Log(p) => {
                if lambda >= T::one() {
                    return Err(Error::OutsideAsymptoticRegime(lambda.as_f64()));
                }
                Ok((T::one() / lambda).ln().powf(-p))
            }
        }
    }

    /// `max_{α} max_{λ} α φ(λ) / ((λ + α) φ(α))` over the given grids.
    pub fn source_ratio(&self, lambdas: &[T], alphas: &[T]) -> Result<T> {
        let mut worst = T::zero();
        for &alpha in alphas {
            let pa = self.eval(alpha)?;
            for &lambda in lambdas {
                let r = alpha * self.eval(lambda)? / ((lambda + alpha) * pa);
                worst = worst.max(r);
            }
        }
        Ok(worst)
    }
}

pub fn phi_eval<T: Scalar>(phi: &SourcePhi<T>, lambda: T) -> Result<T> {
    phi.eval(lambda)
}
