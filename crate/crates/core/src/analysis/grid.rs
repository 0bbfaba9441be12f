//! The verification grid: problems × schemes × n, evaluated in parallel and
//! merged in plan order.

use rayon::prelude::*;

use super::{
    verify_operator_estimates, verify_source, verify_source_constant, verify_structure, verify_th1_with,
    verify_th3_with, verify_th5_with, BoundReport,
};
use crate::discretize::{
    build_system, default_inner_rule, estimate_epsilon_with, DiscreteSystem, EpsilonConfig, ReferenceOperator,
    SchemeKind, DEFAULT_INNER_FACTOR,
};
use crate::error::Result;
use crate::problem::{builtin_ids, catalog, TestProblem};
use crate::quadrature::{Reference, REFERENCE_POINTS};
use crate::regularize::{log_grid, NoiseSpec, SourcePhi};
use crate::scalar::Scalar;

/// Shared measurement settings.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureConfig {
    pub ref_points: usize,
    /// Inner-rule points per panel.
    pub inner_factor: usize,
    pub safety: f64,
    /// Minimum reference points per unit of `n`.
    pub grid_ratio: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            ref_points: REFERENCE_POINTS,
            inner_factor: DEFAULT_INNER_FACTOR,
            safety: 1.1,
            grid_ratio: 4,
        }
    }
}

/// Assembles the system with the aligned inner rule and caches `ε_n`.
pub fn prepare_system<T: Scalar>(
    problem: &TestProblem<T>,
    scheme: SchemeKind,
    n: usize,
    config: &MeasureConfig,
    op: &ReferenceOperator<T>,
) -> Result<DiscreteSystem<T>> {
    let inner = default_inner_rule(problem.domain(), scheme, n, config.inner_factor)?;
    let sys = build_system(&problem.kernel, scheme, n, &inner)?;
    let eps_config = EpsilonConfig {
        safety: T::lit(config.safety),
        min_points_per_n: config.grid_ratio,
    };
    estimate_epsilon_with(&sys, op, eps_config)?;
    Ok(sys)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationPlan {
    pub problems: Vec<String>,
    pub schemes: Vec<SchemeKind>,
    pub ns: Vec<usize>,
    pub th1_alphas: Vec<f64>,
    pub th3_deltas: Vec<f64>,
    pub th5_alphas: Vec<f64>,
    pub th5_deltas: Vec<f64>,
    /// Dimensions for the operator-norm estimates.
    pub norm_ns: Vec<usize>,
    pub source_alphas: Vec<f64>,
    /// Exponents `ν` for the `Power(ν)` source-constant check.
    pub source_powers: Vec<f64>,
    pub seed: u64,
    pub config: MeasureConfig,
}

impl Default for VerificationPlan {
    fn default() -> Self {
        Self {
            problems: builtin_ids().iter().map(|s| s.to_string()).collect(),
            schemes: SchemeKind::defaults().to_vec(),
            ns: vec![8, 16, 32],
            th1_alphas: vec![1e-1, 1e-2, 1e-3, 1e-4],
            th3_deltas: vec![1e-6, 1e-4],
            th5_alphas: vec![1e-2, 1e-4],
            th5_deltas: vec![1e-2, 1e-4],
            norm_ns: vec![4, 8, 16],
            source_alphas: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            source_powers: vec![0.25, 0.5, 1.0],
            seed: 20160601,
            config: MeasureConfig::default(),
        }
    }
}

enum Job {
    Source(usize),
    Cell(usize, SchemeKind, usize),
    Norms(usize, SchemeKind, usize),
}

impl VerificationPlan {
    /// Th-1, Th-3 and Th-5 reports plus structural identities for one system.
    pub fn verify_cell<T: Scalar>(
        &self,
        problem: &TestProblem<T>,
        sys: &DiscreteSystem<T>,
        reference: &Reference<T>,
    ) -> Result<Vec<BoundReport>> {
        let lits = |xs: &[f64]| xs.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        let mut out = verify_th1_with(problem, sys, &lits(&self.th1_alphas), reference)?;
        for &delta in &self.th3_deltas {
            let spec = NoiseSpec::new(T::lit(delta), self.seed)?;
            out.extend(verify_th3_with(problem, sys, &spec, reference)?);
        }
        for &delta in &self.th5_deltas {
            let spec = NoiseSpec::new(T::lit(delta), self.seed)?;
            out.extend(verify_th5_with(
                problem,
                sys,
                &lits(&self.th5_alphas),
                &spec,
                reference,
            )?);
        }
        out.extend(verify_structure(&problem.id, sys, &reference.grid, self.seed)?);
        Ok(out)
    }

    fn jobs(&self) -> Vec<Job> {
        let mut jobs = Vec::new();
        for p in 0..self.problems.len() {
            jobs.push(Job::Source(p));
            for &scheme in &self.schemes {
                jobs.extend(self.ns.iter().map(|&n| Job::Cell(p, scheme, n)));
                jobs.extend(self.norm_ns.iter().map(|&n| Job::Norms(p, scheme, n)));
            }
        }
        jobs
    }
}

/// Runs the whole plan in `f64`; report order depends only on the plan.
pub fn run_verification(plan: &VerificationPlan) -> Result<Vec<BoundReport>> {
    let lambdas = log_grid(1e-12, 1e2, 200);
    let mut out = Vec::new();
    for &nu in &plan.source_powers {
        let phi = SourcePhi::power(nu)?;
        out.push(verify_source_constant(
            &phi,
            &lambdas,
            &plan.source_alphas,
            &format!("power-{nu}"),
        )?);
    }

    let setups: Vec<(TestProblem<f64>, Reference<f64>, ReferenceOperator<f64>)> = plan
        .problems
        .par_iter()
        .map(|id| {
            let problem = catalog::<f64>(id)?;
            let reference = Reference::with_points(plan.config.ref_points, problem.domain())?;
            let op = ReferenceOperator::new(&problem.kernel, &reference)?;
            Ok((problem, reference, op))
        })
        .collect::<Result<_>>()?;

    let chunks: Vec<Vec<BoundReport>> = plan
        .jobs()
        .into_par_iter()
        .map(|job| match job {
            Job::Source(p) => {
                let (problem, reference, _) = &setups[p];
                verify_source(problem, &plan.source_alphas, reference)
            }
            Job::Cell(p, scheme, n) => {
                let (problem, reference, op) = &setups[p];
                let sys = prepare_system(problem, scheme, n, &plan.config, op)?;
                plan.verify_cell(problem, &sys, reference)
            }
            Job::Norms(p, scheme, n) => {
                let (problem, reference, op) = &setups[p];
                let sys = prepare_system(problem, scheme, n, &plan.config, op)?;
                verify_operator_estimates(&problem.id, &sys, &reference.grid)
            }
        })
        .collect::<Result<_>>()?;
    out.extend(chunks.into_iter().flatten());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_plan_passes_and_is_ordered() {
        let plan = VerificationPlan {
            problems: vec!["rank1-sine".into()],
            schemes: vec![SchemeKind::COLLOCATION],
            ns: vec![8],
            norm_ns: vec![4],
            ..VerificationPlan::default()
        };
        let a = run_verification(&plan).unwrap();
        assert!(
            a.iter().all(|r| !r.failed()),
            "{:#?}",
            a.iter().filter(|r| r.failed()).collect::<Vec<_>>()
        );
        let b = run_verification(&plan).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert_eq!(a[0].bound_id, "source-c0");
    }
}
