use approx::assert_relative_eq;
use illposed::{
    add_noise, build_default_system, catalog, pseudo_solve, svd, tikhonov_discrete, CollocationNodes, Matrix,
    NoiseSpec, SchemeKind,
};
use proptest::prelude::*;

fn scheme_strategy() -> impl Strategy<Value = SchemeKind> {
    prop_oneof![
        Just(SchemeKind::COLLOCATION),
        Just(SchemeKind::Collocation(CollocationNodes::Trapezoid)),
        Just(SchemeKind::Interpolatory),
        Just(SchemeKind::OrthoPiecewiseConstant),
    ]
}

fn matrix_strategy() -> impl Strategy<Value = Matrix<f64>> {
    (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0f64..10.0, r * c).prop_map(move |v| Matrix::from_fn(r, c, |i, j| v[i * c + j]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn noise_has_exact_norm(delta in 0.0f64..10.0, seed in any::<u64>(), n in 2usize..24, scheme in scheme_strategy()) {
        let p = catalog::<f64>("rank3-decay").unwrap();
        let sys = build_default_system(&p.kernel, scheme, n).unwrap();
        let y = sys.project(&p.y);
        let noisy = add_noise(&y, sys.metric(), &NoiseSpec::new(delta, seed).unwrap()).unwrap();
        let e: Vec<f64> = noisy.iter().zip(&y).map(|(a, b)| a - b).collect();
        prop_assert!((sys.metric().norm(&e) - delta).abs() <= 1e-12 * (1.0 + delta));
    }

    #[test]
    fn tikhonov_noise_amplification_is_bounded(
        alpha in 1e-6f64..1.0,
        delta in 1e-6f64..1.0,
        seed in any::<u64>(),
        n in 2usize..20,
        scheme in scheme_strategy(),
    ) {
        let p = catalog::<f64>("green-m1").unwrap();
        let sys = build_default_system(&p.kernel, scheme, n).unwrap();
        let y = sys.project(&p.y);
        let noisy = add_noise(&y, sys.metric(), &NoiseSpec::new(delta, seed).unwrap()).unwrap();
        let a = tikhonov_discrete(&sys, &y, alpha).unwrap();
        let b = tikhonov_discrete(&sys, &noisy, alpha).unwrap();
        let dv: Vec<f64> = a.coordinates.iter().zip(&b.coordinates).map(|(x, y)| x - y).collect();
        // ‖T_n*(v_a − v_b)‖² = ⟨A dv, dv⟩_M.
        let adv = sys.matrix().matvec(&dv).unwrap();
        let diff = sys.metric().inner(&adv, &dv).max(0.0).sqrt();
        prop_assert!(diff <= delta / alpha.sqrt() * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn svd_reconstructs(a in matrix_strategy()) {
        let dec = svd(&a).unwrap();
        let residual = dec.reconstruct().sub(&a).unwrap().frobenius();
        prop_assert!(residual <= 1e-10 * (1.0 + a.frobenius()));
        prop_assert!(dec.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn pseudo_solve_satisfies_normal_equations(a in matrix_strategy(), seed in prop::collection::vec(-1.0f64..1.0, 7)) {
        let b: Vec<f64> = seed.iter().copied().cycle().take(a.rows()).collect();
        let x = pseudo_solve(&a, &b, 1e-12).unwrap();
        let r: Vec<f64> = a.matvec(&x).unwrap().iter().zip(&b).map(|(ax, b)| ax - b).collect();
        let atr = a.transpose().matvec(&r).unwrap();
        let scale = a.frobenius().powi(2) * (1.0 + b.iter().map(|v| v * v).sum::<f64>().sqrt());
        prop_assert!(atr.iter().all(|v| v.abs() <= 1e-9 * (1.0 + scale)));
    }
}

#[test]
fn symmetric_form_matches_metric_matrix() {
    let p = catalog::<f64>("green-m1").unwrap();
    let sys = build_default_system(&p.kernel, SchemeKind::Interpolatory, 8).unwrap();
    let s = sys.symmetric_matrix();
    for i in 0..8 {
        for j in 0..8 {
            assert_relative_eq!(s[(i, j)], s[(j, i)], epsilon = 1e-15, max_relative = 1e-12);
        }
    }
}
