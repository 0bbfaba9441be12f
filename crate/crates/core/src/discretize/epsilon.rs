//! `ε_n ≈ ‖T*T − T_n*T_n‖` on a reference grid.
//!
//! Both operators are integral operators on `L²(Ω)` with kernels
//!
//! * `(T*T)(s, s') = ∫ k(σ, s) k(σ, s') dσ`,
//! * `(T_n*T_n)(s, s') = Σ_ij r_i(s) M_ij r_j(s')`,
//!
//! so the operator norm of the difference is the spectral radius of the
//! Nyström matrix `√ρ_k H(s_k, s_l) √ρ_l` on the reference rule `(s_k, ρ_k)`.

use super::DiscreteSystem;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::problem::{Function, Kernel};
use crate::quadrature::{QuadratureRule, Reference};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonConfig<T> {
    /// Multiplier applied to the measured norm.
    pub safety: T,
    /// The reference grid must have at least this many points per unit of `n`.
    pub min_points_per_n: usize,
}

impl<T: Scalar> Default for EpsilonConfig<T> {
    fn default() -> Self {
        Self {
            safety: T::lit(1.1),
            min_points_per_n: 4,
        }
    }
}

/// `T` and `T*T` sampled on a reference grid, reusable across discretizations
/// of one kernel.
#[derive(Clone, Debug)]
pub struct ReferenceOperator<T> {
    reference: Reference<T>,
    kernel: Kernel<T>,
    /// `√ω_q k(σ_q, s_l)` over the fine rule `σ_q` and grid `s_l`.
    weighted_kernel: Matrix<T>,
    /// `√ρ_k (T*T)(s_k, s_l) √ρ_l`.
    normal: Matrix<T>,
    normal_norm: T,
}

impl<T: Scalar> ReferenceOperator<T> {
    pub fn new(kernel: &Kernel<T>, reference: &Reference<T>) -> Result<Self> {
        if reference.domain() != kernel.domain() {
            return Err(Error::InvalidParameter(
                "reference rule lives on a different domain".into(),
            ));
        }
        let grid = reference.grid.nodes();
        let fine = &reference.fine;
        let weighted_kernel = Matrix::from_fn(fine.len(), grid.len(), |q, l| {
            fine.weights()[q].sqrt() * kernel.eval(fine.nodes()[q], grid[l])
        });
        if !weighted_kernel.is_finite() {
            return Err(Error::NonFinite("kernel on the reference grid".into()));
        }
        let mut normal = weighted_kernel.transpose().matmul(&weighted_kernel)?;
        let sqrt_rho: Vec<T> = reference.grid.weights().iter().map(|w| w.sqrt()).collect();
        for k in 0..grid.len() {
            for l in 0..grid.len() {
                normal[(k, l)] *= sqrt_rho[k] * sqrt_rho[l];
            }
        }
        normal.symmetrize_in_place();
        let normal_norm = symmetric_eigen(&normal)?.spectral_radius();
        Ok(Self {
            reference: reference.clone(),
            kernel: kernel.clone(),
            weighted_kernel,
            normal,
            normal_norm,
        })
    }

    pub fn reference(&self) -> &Reference<T> {
        &self.reference
    }

    pub fn grid(&self) -> &QuadratureRule<T> {
        &self.reference.grid
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    /// Symmetrized Nyström matrix of `T*T`.
    pub fn normal_matrix(&self) -> &Matrix<T> {
        &self.normal
    }

    /// `‖T*T‖ = ‖T‖²`.
    pub fn normal_norm(&self) -> T {
        self.normal_norm
    }

    /// `(T* y)(s_l) = ∫ k(σ, s_l) y(σ) dσ` at the grid nodes.
    pub fn adjoint_on_grid(&self, y: &Function<T>) -> Vec<T> {
        let fine = &self.reference.fine;
        let wy: Vec<T> = fine.iter().map(|(s, w)| w.sqrt() * y.eval(s)).collect();
        (0..self.weighted_kernel.cols())
            .map(|l| (0..fine.len()).map(|q| self.weighted_kernel[(q, l)] * wy[q]).sum())
            .collect()
    }

    /// `(T x)(σ_q)` at the fine nodes for `x` given by grid values, scaled by `√ω_q`.
    pub(crate) fn weighted_forward(&self, x_grid: &[T]) -> Vec<T> {
        let rho = self.reference.grid.weights();
        (0..self.weighted_kernel.rows())
            .map(|q| {
                self.weighted_kernel
                    .row(q)
                    .iter()
                    .zip(x_grid)
                    .zip(rho)
                    .map(|((&k, &x), &r)| k * x * r)
                    .sum()
            })
            .collect()
    }
}

/// Symmetrized Nyström matrix of `T_n*T_n` on the grid: `Eᵀ M E` with
/// `E_il = r_i(s_l) √ρ_l`.
pub fn discrete_normal_on_grid<T: Scalar>(sys: &DiscreteSystem<T>, grid: &QuadratureRule<T>) -> Result<Matrix<T>> {
    let n = sys.n();
    let mut e = Matrix::zeros(n, grid.len());
    for (l, (s, rho)) in grid.iter().enumerate() {
        let sr = rho.sqrt();
        for (i, r) in sys.rows_at(s).into_iter().enumerate() {
            e[(i, l)] = r * sr;
        }
    }
    let me = sys.metric().matrix().matmul(&e)?;
    let mut out = e.transpose().matmul(&me)?;
    out.symmetrize_in_place();
    Ok(out)
}

/// Estimates `ε_n` on `reference_rule` (≥ 4n points) with default settings
/// and caches it in the system.
pub fn estimate_epsilon<T: Scalar>(sys: &DiscreteSystem<T>, reference_rule: &QuadratureRule<T>) -> Result<T> {
    let reference = Reference::from_grid(reference_rule.clone())?;
    let op = ReferenceOperator::new(sys.kernel(), &reference)?;
    estimate_epsilon_with(sys, &op, EpsilonConfig::default())
}

/// `safety · ‖T*T − T_n*T_n‖`, floored at `64 ε_mach ‖T*T‖` so that a
/// positive operator never reports an exactly zero perturbation. The first
/// value computed for a system is cached; later calls return their own
/// estimate without overwriting it.
pub fn estimate_epsilon_with<T: Scalar>(
    sys: &DiscreteSystem<T>,
    op: &ReferenceOperator<T>,
    config: EpsilonConfig<T>,
) -> Result<T> {
    let grid = op.grid();
    if grid.len() < config.min_points_per_n * sys.n() {
        return Err(Error::RuleTooCoarse(format!(
            "reference rule has {} points, need at least {} for n = {}",
            grid.len(),
            config.min_points_per_n * sys.n(),
            sys.n()
        )));
    }
    if !(config.safety >= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "safety factor must be >= 1, got {}",
            config.safety
        )));
    }
    let discrete = discrete_normal_on_grid(sys, grid)?;
    let diff = op.normal_matrix().sub(&discrete)?;
    let measured = symmetric_eigen(&diff)?.spectral_radius();
    let floor = T::lit(64.0) * T::epsilon() * op.normal_norm();
    let eps = config.safety * measured.max(floor);
    sys.set_epsilon(eps);
    Ok(eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_default_system, SchemeKind};
    use crate::problem::catalog;
    use crate::quadrature::{gauss_legendre, Domain};

    #[test]
    fn zero_kernel_has_zero_epsilon() {
        let k = Kernel::new(Domain::unit(), "zero", |_, _| 0.0).unwrap();
        let sys = build_default_system(&k, SchemeKind::COLLOCATION, 4).unwrap();
        let grid = gauss_legendre(64, Domain::unit()).unwrap();
        assert_eq!(estimate_epsilon(&sys, &grid).unwrap(), 0.0);
        assert_eq!(sys.epsilon(), Some(0.0));
    }

    #[test]
    fn coarse_reference_rejected() {
        let p = catalog::<f64>("green-m1").unwrap();
        let sys = build_default_system(&p.kernel, SchemeKind::COLLOCATION, 16).unwrap();
        let grid = gauss_legendre(32, Domain::unit()).unwrap();
        assert!(matches!(estimate_epsilon(&sys, &grid), Err(Error::RuleTooCoarse(_))));
        assert_eq!(sys.epsilon(), None);
    }

    #[test]
    fn green_epsilon_decreases() {
        let p = catalog::<f64>("green-m1").unwrap();
        let grid = gauss_legendre(128, Domain::unit()).unwrap();
        let reference = Reference::from_grid(grid).unwrap();
        let op = ReferenceOperator::new(&p.kernel, &reference).unwrap();
        let mut last = f64::INFINITY;
        for n in [4, 8, 16] {
            let sys = build_default_system(&p.kernel, SchemeKind::OrthoPiecewiseConstant, n).unwrap();
            let eps = estimate_epsilon_with(&sys, &op, EpsilonConfig::default()).unwrap();
            assert!(eps > 0.0 && eps < last, "n = {n}: {eps:e}");
            last = eps;
        }
        // ‖T*T‖ = π⁻⁴
        assert!((op.normal_norm() - std::f64::consts::PI.powi(-4)).abs() < 1e-8);
    }

    #[test]
    fn first_estimate_is_cached() {
        let p = catalog::<f64>("rank1-sine").unwrap();
        let sys = build_default_system(&p.kernel, SchemeKind::COLLOCATION, 4).unwrap();
        let a = estimate_epsilon(&sys, &gauss_legendre(64, Domain::unit()).unwrap()).unwrap();
        let _ = estimate_epsilon(&sys, &gauss_legendre(96, Domain::unit()).unwrap()).unwrap();
        assert_eq!(sys.epsilon(), Some(a));
    }
}
