use std::io::Write;

use rayon::prelude::*;

use super::{format_float, l2_error, measurement_rule, prepare_system, MeasureConfig};
use crate::discretize::{ReferenceOperator, SchemeKind};
use crate::error::{Error, Result};
use crate::problem::TestProblem;
use crate::quadrature::Reference;
use crate::regularize::{add_noise, choose_alpha, min_norm_solution, tikhonov_discrete, NoiseSpec};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub eps_n: f64,
    /// `0` for a numerically zero operator.
    pub sigma_min: f64,
    pub alpha: f64,
    pub delta: f64,
    /// `‖x† − x_n†‖`.
    pub err_min_norm: f64,
    /// `‖x† − x_{α,n}‖`, by default with `α = ε_n`.
    pub err_tikh: f64,
    /// `‖x† − x̃_{α,n}‖` when noise is requested.
    pub err_noisy: Option<f64>,
}

pub const CONVERGENCE_HEADER: [&str; 8] = [
    "n",
    "eps_n",
    "sigma_min",
    "alpha",
    "delta",
    "err_min_norm",
    "err_tikh",
    "err_noisy",
];

pub fn convergence_study<T: Scalar>(
    problem: &TestProblem<T>,
    scheme: SchemeKind,
    n_list: &[usize],
    spec: Option<&NoiseSpec<T>>,
) -> Result<Vec<ConvergenceRow>> {
    convergence_study_with(problem, scheme, n_list, spec, None, &MeasureConfig::default())
}

/// One row per `n` (computed in parallel, returned in `n_list` order). A
/// fixed `alpha` overrides the rule `α = ε_n`.
pub fn convergence_study_with<T: Scalar>(
    problem: &TestProblem<T>,
    scheme: SchemeKind,
    n_list: &[usize],
    spec: Option<&NoiseSpec<T>>,
    alpha: Option<T>,
    config: &MeasureConfig,
) -> Result<Vec<ConvergenceRow>> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("empty n list".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "n list must be increasing, got {n_list:?}"
        )));
    }
    let reference = Reference::with_points(config.ref_points, problem.domain())?;
    let op = ReferenceOperator::new(&problem.kernel, &reference)?;
    n_list
        .par_iter()
        .map(|&n| {
            let sys = prepare_system(problem, scheme, n, config, &op)?;
            let eps = sys.epsilon().unwrap_or_else(T::zero);
            let rule = measurement_rule(&sys, &reference.grid)?;
            let y_n = sys.project(&problem.y);
            let xn = min_norm_solution(&sys, &y_n, sys.rel_tol())?;
            let alpha = match alpha {
                Some(a) => a,
                None => choose_alpha(eps)?,
            };
            let xa = tikhonov_discrete(&sys, &y_n, alpha)?;
            let (delta, err_noisy) = match spec {
                Some(spec) => {
                    let y_tilde = add_noise(&y_n, sys.metric(), spec)?;
                    let x = tikhonov_discrete(&sys, &y_tilde, alpha)?;
                    (
                        spec.delta_n,
                        Some(l2_error(&problem.x_dagger, &x.function, &rule).as_f64()),
                    )
                }
                None => (T::zero(), None),
            };
            Ok(ConvergenceRow {
                n,
                eps_n: eps.as_f64(),
                sigma_min: sys.sigma_min().map(|s| s.as_f64()).unwrap_or(0.0),
                alpha: alpha.as_f64(),
                delta: delta.as_f64(),
                err_min_norm: l2_error(&problem.x_dagger, &xn.function, &rule).as_f64(),
                err_tikh: l2_error(&problem.x_dagger, &xa.function, &rule).as_f64(),
                err_noisy,
            })
        })
        .collect()
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], writer: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv output: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CONVERGENCE_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            format_float(r.eps_n),
            format_float(r.sigma_min),
            format_float(r.alpha),
            format_float(r.delta),
            format_float(r.err_min_norm),
            format_float(r.err_tikh),
            r.err_noisy.map(format_float).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidParameter(format!("csv output: {e}")))
}
