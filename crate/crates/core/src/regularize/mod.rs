//! Minimum-norm and Tikhonov solvers for the discrete system, the continuous
//! Tikhonov reference, source functions and the noise model.

mod noise;
mod phi;

pub use noise::{add_noise, noise_vector, NoiseSpec};
pub use phi::{log_grid, phi_eval, PhiKind, SourcePhi};

use crate::discretize::{DiscreteSystem, ReferenceOperator, SchemeKind};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, pseudo_solve, solve_shifted};
use crate::problem::{Function, TestProblem};
use crate::quadrature::{QuadratureRule, Reference};
use crate::scalar::{all_finite, norm2, Scalar};

/// `x = T_n* v` together with the coordinates `v`.
#[derive(Clone, Debug)]
pub struct Reconstruction<T> {
    pub coordinates: Vec<T>,
    pub function: Function<T>,
    /// `0` for the generalized-inverse path.
    pub alpha_used: T,
    pub scheme: SchemeKind,
    pub n: usize,
}

fn check_data<T: Scalar>(sys: &DiscreteSystem<T>, y: &[T]) -> Result<()> {
    if y.len() != sys.n() {
        return Err(Error::DimensionMismatch(format!(
            "data of length {} for n = {}",
            y.len(),
            sys.n()
        )));
    }
    if !all_finite(y) {
        return Err(Error::NonFinite("discrete data".into()));
    }
    Ok(())
}

fn reconstruct<T: Scalar>(sys: &DiscreteSystem<T>, v: Vec<T>, alpha: T) -> Result<Reconstruction<T>> {
    Ok(Reconstruction {
        function: sys.apply_adjoint(&v)?,
        coordinates: v,
        alpha_used: alpha,
        scheme: sys.scheme(),
        n: sys.n(),
    })
}

/// Coordinates `z = S† Lᵀ y` with the residual `‖S z − Lᵀ y‖` and `‖Lᵀ y‖`.
fn lifted_pseudo_solve<T: Scalar>(sys: &DiscreteSystem<T>, y: &[T], rel_tol: T) -> Result<(Vec<T>, T, T)> {
    let b = sys.metric().lift(y);
    let z = pseudo_solve(sys.symmetric_matrix(), &b, rel_tol)?;
    let sz = sys.symmetric_matrix().matvec(&z)?;
    let residual: Vec<T> = sz.iter().zip(&b).map(|(&p, &q)| p - q).collect();
    Ok((z, norm2(&residual), norm2(&b)))
}

/// `x_n† = T_n* v` with `T_n T_n* v = y_n`, requiring `y_n ∈ R(T_n)`: the
/// truncated solve must leave a residual of at most `rel_tol · ‖y_n‖`.
pub fn min_norm_solution<T: Scalar>(sys: &DiscreteSystem<T>, y_n: &[T], rel_tol: T) -> Result<Reconstruction<T>> {
    check_data(sys, y_n)?;
    let (z, residual, scale) = lifted_pseudo_solve(sys, y_n, rel_tol)?;
    let allowed = rel_tol * scale;
    if residual > allowed {
        return Err(Error::InconsistentData {
            residual: residual.as_f64(),
            allowed: allowed.as_f64(),
        });
    }
    reconstruct(sys, sys.metric().lower(&z), T::zero())
}

/// `T_n† y_n` for arbitrary `y_n`: the minimum-norm least-squares solution
/// (no consistency requirement).
pub fn generalized_inverse<T: Scalar>(sys: &DiscreteSystem<T>, y_n: &[T], rel_tol: T) -> Result<Reconstruction<T>> {
    check_data(sys, y_n)?;
    let (z, _, _) = lifted_pseudo_solve(sys, y_n, rel_tol)?;
    reconstruct(sys, sys.metric().lower(&z), T::zero())
}

/// `x_{α,n} = T_n* v` with `(T_n T_n* + α I) v = ỹ_n`.
pub fn tikhonov_discrete<T: Scalar>(sys: &DiscreteSystem<T>, y_tilde_n: &[T], alpha: T) -> Result<Reconstruction<T>> {
    check_data(sys, y_tilde_n)?;
    let v = solve_shifted(sys.matrix(), alpha, y_tilde_n, sys.metric())?;
    reconstruct(sys, v, alpha)
}

/// `α := ε_n`.
pub fn choose_alpha<T: Scalar>(eps_n: T) -> Result<T> {
    if !(eps_n > T::zero()) || !eps_n.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "a-priori rule needs ε_n > 0, got {eps_n}"
        )));
    }
    Ok(eps_n)
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("α must be positive, got {alpha}")));
    }
    Ok(())
}

/// `x_α = (T*T + αI)⁻¹ T*y`: spectral formula when the problem carries a
/// singular system, dense Nyström solve on `ref_rule` otherwise.
pub fn tikhonov_continuous_reference<T: Scalar>(
    problem: &TestProblem<T>,
    ref_rule: &QuadratureRule<T>,
    alpha: T,
) -> Result<Function<T>> {
    check_alpha(alpha)?;
    match &problem.svd {
        Some(exp) => Ok(exp.tikhonov_apply(&problem.y, ref_rule, alpha)),
        None => {
            let reference = Reference::from_grid(ref_rule.clone())?;
            let op = ReferenceOperator::new(&problem.kernel, &reference)?;
            tikhonov_dense(&op, &problem.y, alpha)
        }
    }
}

/// Dense path: `(N + αI) z = √ρ T*y` on the grid (`N` the symmetrized
/// Nyström matrix of `T*T`, `z = √ρ x`), extended off the grid by
/// `x = α⁻¹ T*(y − T x)`.
pub fn tikhonov_dense<T: Scalar>(op: &ReferenceOperator<T>, y: &Function<T>, alpha: T) -> Result<Function<T>> {
    check_alpha(alpha)?;
    let grid = op.grid();
    let sqrt_rho: Vec<T> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let rhs: Vec<T> = op
        .adjoint_on_grid(y)
        .iter()
        .zip(&sqrt_rho)
        .map(|(&v, &r)| v * r)
        .collect();
    let mut shifted = op.normal_matrix().clone();
    for i in 0..shifted.rows() {
        shifted[(i, i)] += alpha;
    }
    let z = cholesky_solve(&cholesky(&shifted)?, &rhs);
    let x_grid: Vec<T> = z.iter().zip(&sqrt_rho).map(|(&z, &r)| z / r).collect();

    let fine = &op.reference().fine;
    let forward = op.weighted_forward(&x_grid);
    let coef: Vec<T> = fine
        .iter()
        .zip(forward)
        .map(|((s, w), f)| (w.sqrt() * (w.sqrt() * y.eval(s) - f)) / alpha)
        .collect();
    let nodes = fine.nodes().to_vec();
    let kernel = op.kernel().clone();
    Ok(Function::new(move |t| {
        nodes.iter().zip(&coef).map(|(&s, &c)| c * kernel.eval(s, t)).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_default_system, build_system};
    use crate::problem::{catalog, Kernel};
    use crate::quadrature::{gauss_legendre, Domain};

    fn l2(rule: &QuadratureRule<f64>, f: impl Fn(f64) -> f64) -> f64 {
        rule.integrate(|t| f(t).powi(2)).sqrt()
    }

    fn scalar_system() -> DiscreteSystem<f64> {
        let k = Kernel::new(Domain::unit(), "constant", |_, _| 1.0).unwrap();
        build_system(
            &k,
            SchemeKind::COLLOCATION,
            1,
            &gauss_legendre(4, Domain::unit()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn scalar_tikhonov() {
        let sys = scalar_system();
        let r = tikhonov_discrete(&sys, &[3.0], 0.5).unwrap();
        assert!((r.function.eval(0.2) - 2.0).abs() < 1e-14);
        assert_eq!(r.alpha_used, 0.5);
        assert!(tikhonov_discrete(&sys, &[3.0], 0.0).is_err());
        let z = tikhonov_discrete(&sys, &[0.0], 0.1).unwrap();
        assert_eq!(z.function.eval(0.4), 0.0);
    }

    #[test]
    fn zero_data_gives_zero() {
        let p = catalog::<f64>("rank1-sine").unwrap();
        let sys = build_default_system(&p.kernel, SchemeKind::COLLOCATION, 8).unwrap();
        let r = min_norm_solution(&sys, &[0.0; 8], 1e-10).unwrap();
        assert_eq!(r.alpha_used, 0.0);
        assert_eq!(r.function.eval(0.3), 0.0);
    }

    #[test]
    fn rank_one_min_norm() {
        let p = catalog::<f64>("rank1-sine").unwrap();
        let sys = build_default_system(&p.kernel, SchemeKind::COLLOCATION, 16).unwrap();
        let y = sys.project(&p.y);
        let r = min_norm_solution(&sys, &y, 1e-10).unwrap();
        let rule = gauss_legendre(256, p.domain()).unwrap();
        let err = l2(&rule, |t| r.function.eval(t) - p.x_dagger.eval(t));
        assert!(err <= 1e-6, "{err:e}");
    }

    #[test]
    fn inconsistent_data_is_rejected() {
        let p = catalog::<f64>("rank1-sine").unwrap();
        let sys = build_default_system(&p.kernel, SchemeKind::COLLOCATION, 8).unwrap();
        let mut y = sys.project(&p.y);
        y[0] += 0.5;
        assert!(matches!(
            min_norm_solution(&sys, &y, 1e-10),
            Err(Error::InconsistentData { .. })
        ));
        assert!(generalized_inverse(&sys, &y, 1e-10).is_ok());
    }

    #[test]
    fn large_shift_vanishes() {
        let p = catalog::<f64>("rank1-sine").unwrap();
        let sys = build_default_system(&p.kernel, SchemeKind::COLLOCATION, 16).unwrap();
        let r = tikhonov_discrete(&sys, &sys.project(&p.y), 1e6).unwrap();
        let rule = gauss_legendre(256, p.domain()).unwrap();
        assert!(l2(&rule, |t| r.function.eval(t)) <= 1e-3);
    }

    #[test]
    fn alpha_rule() {
        assert_eq!(choose_alpha(1e-3).unwrap(), 1e-3);
        assert!(choose_alpha(0.0).is_err());
        assert!(choose_alpha(f64::NAN).is_err());
    }

    #[test]
    fn rank_one_continuous_reference() {
        let p = catalog::<f64>("rank1-sine").unwrap();
        let rule = gauss_legendre(256, p.domain()).unwrap();
        let xa = tikhonov_continuous_reference(&p, &rule, 0.25).unwrap();
        let err = l2(&rule, |t| p.x_dagger.eval(t) - xa.eval(t));
        assert!((err - 0.2).abs() < 1e-12, "{err}");
        let tiny = tikhonov_continuous_reference(&p, &rule, 1e-10).unwrap();
        assert!(l2(&rule, |t| tiny.eval(t) - p.x_dagger.eval(t)) <= 1e-8);
    }

    #[test]
    fn dense_path_matches_rank_one_algebra() {
        let p = catalog::<f64>("rank1-sine").unwrap();
        let reference = Reference::standard(p.domain()).unwrap();
        let op = ReferenceOperator::new(&p.kernel, &reference).unwrap();
        let xa = tikhonov_dense(&op, &p.y, 0.25).unwrap();
        let err = l2(&reference.grid, |t| xa.eval(t) - p.x_dagger.eval(t) / 1.25);
        assert!(err < 1e-12, "{err:e}");
    }
}
