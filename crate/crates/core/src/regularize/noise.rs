use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::Metric;
use crate::scalar::{all_finite, Scalar};

/// Noise of norm exactly `delta_n` in `Y_n`, drawn from `seed`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec<T> {
    pub delta_n: T,
    pub seed: u64,
}

impl<T: Scalar> NoiseSpec<T> {
    pub fn new(delta_n: T, seed: u64) -> Result<Self> {
        if !(delta_n >= T::zero()) || !delta_n.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise level must be >= 0, got {delta_n}"
            )));
        }
        Ok(Self { delta_n, seed })
    }

    pub fn noiseless() -> Self {
        Self {
            delta_n: T::zero(),
            seed: 0,
        }
    }
}

/// Gaussian direction normalized to `‖e‖_M = δ`.
pub fn noise_vector<T: Scalar>(metric: &Metric<T>, spec: &NoiseSpec<T>) -> Result<Vec<T>> {
    let n = metric.dim();
    if !(spec.delta_n >= T::zero()) || !spec.delta_n.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise level must be >= 0, got {}",
            spec.delta_n
        )));
    }
    if spec.delta_n == T::zero() || n == 0 {
        return Ok(vec![T::zero(); n]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    loop {
        let e: Vec<T> = (0..n).map(|_| T::lit(StandardNormal.sample(&mut rng))).collect();
        let norm = metric.norm(&e);
        if norm > T::zero() && norm.is_finite() {
            let s = spec.delta_n / norm;
            return Ok(e.into_iter().map(|x| x * s).collect());
        }
    }
}

/// `ỹ_n = y_n + e` with `‖e‖_M = δ_n`.
pub fn add_noise<T: Scalar>(y_n: &[T], metric: &Metric<T>, spec: &NoiseSpec<T>) -> Result<Vec<T>> {
    if y_n.len() != metric.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data of length {} in a {}-dimensional space",
            y_n.len(),
            metric.dim()
        )));
    }
    if !all_finite(y_n) {
        return Err(Error::NonFinite("discrete data".into()));
    }
    let e = noise_vector(metric, spec)?;
    Ok(y_n.iter().zip(e).map(|(&y, e)| y + e).collect())
}
