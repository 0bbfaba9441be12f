use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{l2_inner, measurement_rule, BoundContext, BoundReport};
use crate::discretize::DiscreteSystem;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, svd, Matrix};
use crate::problem::Function;
use crate::quadrature::QuadratureRule;
use crate::regularize::generalized_inverse;
use crate::scalar::Scalar;

/// `‖T_n†‖` from `Y_n` to `L²(Ω)`: largest singular value of the matrix whose
/// columns are `T_n† y_j` sampled on the inner rule (scaled by `√ω`), for a
/// `Y_n`-orthonormal basis `y_j`.
pub fn pseudoinverse_norm<T: Scalar>(sys: &DiscreteSystem<T>) -> Result<T> {
    let n = sys.n();
    let rule = sys.inner_rule();
    let mut weighted_rows = Matrix::zeros(rule.len(), n);
    for (q, (t, w)) in rule.iter().enumerate() {
        let sw = w.sqrt();
        for (i, r) in sys.rows_at(t).into_iter().enumerate() {
            weighted_rows[(q, i)] = r * sw;
        }
    }
    let mut coef = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        let y = sys.metric().lower(&e);
        let v = generalized_inverse(sys, &y, sys.rel_tol())?.coordinates;
        for (i, c) in sys.metric().apply(&v).into_iter().enumerate() {
            coef[(i, j)] = c;
        }
    }
    spectral_norm(&weighted_rows.matmul(&coef)?)
}

fn random_polynomial<T: Scalar>(rng: &mut ChaCha8Rng, degree: usize, a: T, b: T) -> Function<T> {
    let coef: Vec<T> = (0..=degree).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
    let (mid, half) = ((a + b) * T::lit(0.5), (b - a) * T::lit(0.5));
    Function::new(move |t| {
        let u = (t - mid) / half;
        coef.iter().rev().fold(T::zero(), |acc, &c| acc * u + c)
    })
}

/// Identities every assembled system must satisfy:
///
/// * `W-symmetry`, `PSD`: the matrix is self-adjoint and positive
///   semidefinite in the metric of `Y_n`;
/// * `sigma-relation`: `σ_min²` is the smallest positive eigenvalue of `T_n T_n*`;
/// * `pinv-norm`: `‖T_n†‖ σ_min = 1`;
/// * `adjointness`: `⟨T_n x, v⟩_{Y_n} = ⟨x, T_n* v⟩` for a random polynomial `x`
///   and random `v`;
/// * `svd-reconstruction`: `‖U Σ Vᵀ − A‖ ≤ 1e-9 ‖A‖`.
pub fn verify_structure<T: Scalar>(
    problem_id: &str,
    sys: &DiscreteSystem<T>,
    grid: &QuadratureRule<T>,
    seed: u64,
) -> Result<Vec<BoundReport>> {
    let ctx = || BoundContext::new(problem_id, sys);
    let mut out = Vec::new();
    let tiny = T::min_positive_value();

    let ma = sys.metric().matrix().matmul(sys.matrix())?;
    out.push(BoundReport::check_with_tol(
        "W-symmetry",
        ma.asymmetry() / ma.max_abs().max(tiny),
        T::lit(1e-8),
        0.0,
        ctx(),
    ));

    let spectrum = sys.spectrum();
    let largest = spectrum.last().copied().unwrap_or_else(T::zero);
    let smallest = spectrum.first().copied().unwrap_or_else(T::zero);
    out.push(BoundReport::check_with_tol(
        "PSD",
        (-smallest).max(T::zero()) / largest.max(tiny),
        T::lit(1e-8),
        0.0,
        ctx(),
    ));

    match sys.sigma_min() {
        Ok(sigma) => {
            let threshold = sys.rel_tol() * largest;
            let lambda = spectrum
                .iter()
                .copied()
                .find(|&l| l > threshold)
                .ok_or(Error::NumericallyZero)?;
            out.push(BoundReport::check_with_tol(
                "sigma-relation",
                (sigma * sigma - lambda).abs() / lambda,
                T::lit(1e-8),
                0.0,
                ctx(),
            ));
            let pinv = pseudoinverse_norm(sys)?;
            out.push(BoundReport::check_with_tol(
                "pinv-norm",
                (pinv * sigma - T::one()).abs(),
                T::lit(1e-10),
                0.0,
                ctx(),
            ));
        }
        Err(Error::NumericallyZero) => {
            out.push(BoundReport::skipped(
                "sigma-relation",
                "numerically zero operator",
                ctx(),
            ));
            out.push(BoundReport::skipped("pinv-norm", "numerically zero operator", ctx()));
        }
        Err(e) => return Err(e),
    }

    let rule = measurement_rule(sys, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = sys.domain();
    let x = random_polynomial(&mut rng, 5, dom.a, dom.b);
    let v: Vec<T> = (0..sys.n()).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
    let tx = sys.apply_forward(&x, &rule);
    let lhs = sys.metric().inner(&tx, &v);
    let rhs = l2_inner(&x, &sys.apply_adjoint(&v)?, &rule);
    out.push(BoundReport::check_with_tol(
        "adjointness",
        (lhs - rhs).abs(),
        T::lit(1e-8) * (T::one() + lhs.abs()),
        0.0,
        ctx(),
    ));

    let a = sys.matrix();
    let dec = svd(a)?;
    let residual = dec.reconstruct().sub(a)?.frobenius() / a.frobenius().max(tiny);
    out.push(BoundReport::check_with_tol(
        "svd-reconstruction",
        residual,
        T::lit(1e-9),
        0.0,
        ctx(),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_default_system, CollocationNodes, SchemeKind};
    use crate::problem::catalog;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn identities_hold_for_all_schemes() {
        let p = catalog::<f64>("green-m1").unwrap();
        let grid = gauss_legendre(64, p.domain()).unwrap();
        for scheme in SchemeKind::defaults()
            .into_iter()
            .chain([SchemeKind::Collocation(CollocationNodes::Trapezoid)])
        {
            for n in [2, 4, 8, 16] {
                let sys = build_default_system(&p.kernel, scheme, n).unwrap();
                for r in verify_structure("green-m1", &sys, &grid, 11).unwrap() {
                    assert!(!r.failed(), "{scheme} n={n}: {r}");
                }
            }
        }
    }

    #[test]
    fn pseudoinverse_norm_rank_deficient() {
        let p = catalog::<f64>("rank3-decay").unwrap();
        let sys = build_default_system(&p.kernel, SchemeKind::Interpolatory, 12).unwrap();
        let norm = pseudoinverse_norm(&sys).unwrap();
        assert!((norm * sys.sigma_min().unwrap() - 1.0).abs() < 1e-10);
    }
}
