//! Operator norms behind `‖T*T − T_n*T_n‖ ≤ (‖T‖ + ‖T_n‖)‖(I − π_n)T‖`.
//!
//! `Y_n` is placed inside `L²(Ω)` by its basis functions `b_i` (hats, cell
//! indicators, or for collocation the indicators of consecutive intervals of
//! length `w_i`, an isometry of `ℝⁿ_w`). With `P f = Σ_i (π_n f)_i b_i`,
//! `T_n` is replaced by `P T`, which has the same `T_n*T_n` and norm.
//!
//! Inputs are discretized on the reference grid `(s_l, ρ_l)`, outputs on a
//! rule `(σ_q, ω_q)` that integrates products of basis functions exactly;
//! for ortho-pc it is the scheme's own cell rule, which makes `P` an
//! orthogonal projection of the discrete output space.

use super::{BoundContext, BoundReport};
use crate::discretize::DiscreteSystem;
use crate::error::Result;
use crate::linalg::{symmetric_eigen, Matrix};
use crate::quadrature::{composite_gauss, QuadratureRule};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorNorms<T> {
    /// `‖T*T − T_n*T_n‖`.
    pub perturbation: T,
    /// `‖(I − π_n)T‖`.
    pub projection_defect: T,
    pub t_norm: T,
    pub tn_norm: T,
}

fn output_rule<T: Scalar>(sys: &DiscreteSystem<T>, grid: &QuadratureRule<T>) -> Result<QuadratureRule<T>> {
    if let Some(cells) = sys.cell_rule() {
        return Ok(cells.rule().clone());
    }
    let dom = sys.domain();
    let mut breaks = sys.basis_breakpoints();
    breaks.extend_from_slice(grid.nodes());
    breaks.push(dom.a);
    breaks.push(dom.b);
    composite_gauss(&breaks, 2)
}

fn gram_norm<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    let mut g = a.transpose().matmul(a)?;
    g.symmetrize_in_place();
    Ok(symmetric_eigen(&g)?.largest().max(T::zero()).sqrt())
}

pub fn operator_norms<T: Scalar>(sys: &DiscreteSystem<T>, grid: &QuadratureRule<T>) -> Result<OperatorNorms<T>> {
    let out = output_rule(sys, grid)?;
    let n = sys.n();
    let kernel = sys.kernel();
    let sqrt_rho: Vec<T> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let sqrt_omega: Vec<T> = out.weights().iter().map(|w| w.sqrt()).collect();

    let k = Matrix::from_fn(out.len(), grid.len(), |q, l| {
        sqrt_omega[q] * kernel.eval(out.nodes()[q], grid.nodes()[l]) * sqrt_rho[l]
    });
    let mut rows = Matrix::zeros(n, grid.len());
    for (l, &s) in grid.nodes().iter().enumerate() {
        for (i, r) in sys.rows_at(s).into_iter().enumerate() {
            rows[(i, l)] = r * sqrt_rho[l];
        }
    }
    let basis = Matrix::from_fn(out.len(), n, |q, i| {
        sqrt_omega[q] * sys.basis_function(i, out.nodes()[q])
    });
    let c = basis.matmul(&rows)?;
    let d = k.sub(&c)?;

    let mut diff = k.transpose().matmul(&k)?.sub(&c.transpose().matmul(&c)?)?;
    diff.symmetrize_in_place();
    Ok(OperatorNorms {
        perturbation: symmetric_eigen(&diff)?.spectral_radius(),
        projection_defect: gram_norm(&d)?,
        t_norm: gram_norm(&k)?,
        tn_norm: gram_norm(&c)?,
    })
}

/// `Th-special-1` for every scheme, `Remark-squared`
/// (`‖T*T − T_n*T_n‖ ≤ ‖(I − π_n)T‖²`) for orthogonal projections; both
/// with absolute tolerance `1e-8`.
pub fn verify_operator_estimates<T: Scalar>(
    problem_id: &str,
    sys: &DiscreteSystem<T>,
    grid: &QuadratureRule<T>,
) -> Result<Vec<BoundReport>> {
    let norms = operator_norms(sys, grid)?;
    let ctx = || BoundContext::new(problem_id, sys);
    let mut out = vec![BoundReport::check_with_tol(
        "Th-special-1",
        norms.perturbation,
        (norms.t_norm + norms.tn_norm) * norms.projection_defect,
        1e-8,
        ctx(),
    )];
    if sys.scheme().is_orthogonal_projection() {
        out.push(BoundReport::check_with_tol(
            "Remark-squared",
            norms.perturbation,
            norms.projection_defect * norms.projection_defect,
            1e-8,
            ctx(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_default_system, SchemeKind};
    use crate::problem::catalog;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn orthogonal_scheme_is_sharp() {
        let p = catalog::<f64>("green-m1").unwrap();
        let grid = gauss_legendre(128, p.domain()).unwrap();
        for n in [4, 8] {
            let sys = build_default_system(&p.kernel, SchemeKind::OrthoPiecewiseConstant, n).unwrap();
            let m = operator_norms(&sys, &grid).unwrap();
            let sq = m.projection_defect * m.projection_defect;
            assert!((m.perturbation - sq).abs() <= 1e-12, "{m:?}");
            assert!((m.t_norm - std::f64::consts::PI.powi(-2)).abs() < 1e-6);
            assert!(m.tn_norm <= m.t_norm + 1e-12);
        }
    }

    #[test]
    fn collocation_embedding_preserves_normal_operator() {
        let p = catalog::<f64>("rank3-decay").unwrap();
        let grid = gauss_legendre(64, p.domain()).unwrap();
        let sys = build_default_system(&p.kernel, SchemeKind::COLLOCATION, 8).unwrap();
        let m = operator_norms(&sys, &grid).unwrap();
        assert!(
            (m.tn_norm - sys.sigma_max()).abs() < 1e-8,
            "{} vs {}",
            m.tn_norm,
            sys.sigma_max()
        );
        for r in verify_operator_estimates("rank3-decay", &sys, &grid).unwrap() {
            assert!(r.passed(), "{r}");
        }
    }
}
