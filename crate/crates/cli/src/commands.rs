use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use illposed::{
    add_noise, catalog, choose_alpha, convergence_study_with, format_float, prepare_system, read_matrix_csv,
    run_verification, tikhonov_discrete, verify_operator_estimates, write_bounds_csv, write_convergence_csv,
    write_matrix_csv, BoundReport, NoiseSpec, Reference, ReferenceOperator, SchemeKind, TestProblem, VerificationPlan,
};

use crate::config::RunConfig;
use crate::CliError;

/// Outcome of a command that completed without a hard error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    BoundFailed,
}

/// Writes `dir/name` through a temporary file in the same directory.
fn write_atomic(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<PathBuf, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.join(name).display()));
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush().map_err(io)?;
    }
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| io(e.error))?;
    Ok(path)
}

fn prepare_out(config: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&config.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", config.out.display())))?;
    Ok(&config.out)
}

/// `base.csv` for a single scheme, `base_<scheme>.csv` when several are run.
fn file_name(base: &str, scheme: SchemeKind, multi: bool, n: Option<usize>) -> String {
    let mut name = base.to_string();
    if multi {
        name.push('_');
        name.push_str(scheme.name());
    }
    if let Some(n) = n {
        name.push_str(&format!("_{n}"));
    }
    name.push_str(".csv");
    name
}

fn noise_spec(config: &RunConfig) -> Result<Option<NoiseSpec<f64>>, CliError> {
    config
        .delta
        .map(|d| NoiseSpec::new(d, config.seed.unwrap_or(0)).map_err(CliError::from))
        .transpose()
}

struct Setup {
    problem: TestProblem<f64>,
    reference: Reference<f64>,
    op: ReferenceOperator<f64>,
}

fn setup(config: &RunConfig) -> Result<Setup, CliError> {
    let problem = catalog::<f64>(config.require_problem()?)?;
    let reference = Reference::with_points(config.measure.ref_points, problem.domain())?;
    let op = ReferenceOperator::new(&problem.kernel, &reference)?;
    Ok(Setup { problem, reference, op })
}

fn write_study(
    config: &RunConfig,
    problem: &TestProblem<f64>,
    base: &str,
) -> Result<Vec<(SchemeKind, Vec<illposed::ConvergenceRow>)>, CliError> {
    let n_list = config.require_n_list()?;
    let spec = noise_spec(config)?;
    let schemes = config.schemes_or_default();
    let multi = schemes.len() > 1;
    let dir = prepare_out(config)?;
    let mut all = Vec::new();
    for scheme in schemes {
        let rows = convergence_study_with(problem, scheme, n_list, spec.as_ref(), config.alpha, &config.measure)?;
        write_atomic(dir, &file_name(base, scheme, multi, None), |w| {
            write_convergence_csv(&rows, w).map_err(CliError::from)
        })?;
        all.push((scheme, rows));
    }
    Ok(all)
}

pub fn solve(config: &RunConfig, dump_matrix: bool) -> Result<Outcome, CliError> {
    let s = setup(config)?;
    let dir = prepare_out(config)?.to_path_buf();
    let multi = config.schemes_or_default().len() > 1;
    let spec = noise_spec(config)?;
    let studies = write_study(config, &s.problem, "summary")?;
    for (scheme, rows) in studies {
        for row in rows {
            let n = row.n;
            let sys = prepare_system(&s.problem, scheme, n, &config.measure, &s.op)?;
            let mut y_n = sys.project(&s.problem.y);
            if let Some(spec) = &spec {
                y_n = add_noise(&y_n, sys.metric(), spec)?;
            }
            let alpha = match config.alpha {
                Some(a) => a,
                None => choose_alpha(sys.epsilon().unwrap_or(0.0))?,
            };
            let x = tikhonov_discrete(&sys, &y_n, alpha)?;
            let nodes = s.reference.grid.nodes();
            write_atomic(&dir, &file_name("solution", scheme, multi, Some(n)), |w| {
                let mut csv = csv::Writer::from_writer(w);
                let err = |e: csv::Error| CliError::Io(e.to_string());
                csv.write_record(["s", "x_reconstructed", "x_true"]).map_err(err)?;
                for &t in nodes {
                    csv.write_record([
                        format_float(t),
                        format_float(x.function.eval(t)),
                        format_float(s.problem.x_dagger.eval(t)),
                    ])
                    .map_err(err)?;
                }
                csv.flush().map_err(|e| CliError::Io(e.to_string()))
            })?;
            if dump_matrix {
                write_atomic(&dir, &file_name("matrix", scheme, multi, Some(n)), |w| {
                    write_matrix_csv(sys.matrix(), w).map_err(CliError::from)
                })?;
            }
        }
    }
    Ok(Outcome::Ok)
}

pub fn study(config: &RunConfig) -> Result<Outcome, CliError> {
    let problem = catalog::<f64>(config.require_problem()?)?;
    write_study(config, &problem, "convergence")?;
    Ok(Outcome::Ok)
}

/// Restricts the default grid to whatever the configuration pins down.
pub fn plan_for(config: &RunConfig) -> VerificationPlan {
    let mut plan = VerificationPlan {
        config: config.measure.clone(),
        ..VerificationPlan::default()
    };
    if let Some(p) = &config.problem {
        plan.problems = vec![p.clone()];
    }
    if let Some(s) = &config.schemes {
        plan.schemes = s.clone();
    }
    if let Some(ns) = &config.n_list {
        plan.ns = ns.clone();
    }
    if let Some(a) = config.alpha {
        plan.th1_alphas = vec![a];
        plan.th5_alphas = vec![a];
    }
    if let Some(d) = config.delta {
        plan.th3_deltas = vec![d];
        plan.th5_deltas = vec![d];
    }
    if let Some(seed) = config.seed {
        plan.seed = seed;
    }
    plan
}

fn replay(config: &RunConfig, plan: &VerificationPlan, path: &Path) -> Result<Vec<BoundReport>, CliError> {
    let schemes = config.schemes_or_default();
    let (scheme, n) = match (schemes.as_slice(), config.n_list.as_deref()) {
        ([scheme], Some([n])) if config.problem.is_some() => (*scheme, *n),
        _ => {
            return Err(CliError::Usage(
                "--replay needs exactly one problem, one scheme and one n".into(),
            ))
        }
    };
    let s = setup(config)?;
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    let matrix = read_matrix_csv(BufReader::new(file)).map_err(|e| CliError::Numerical(e.to_string()))?;
    let assembled = prepare_system(&s.problem, scheme, n, &config.measure, &s.op)?;
    let sys = assembled
        .with_matrix(matrix)
        .map_err(|e| CliError::Numerical(format!("replayed matrix rejected: {e}")))?;
    if let Some(eps) = assembled.epsilon() {
        sys.set_epsilon(eps);
    }
    let mut out = plan.verify_cell(&s.problem, &sys, &s.reference)?;
    out.extend(verify_operator_estimates(&s.problem.id, &sys, &s.reference.grid)?);
    Ok(out)
}

pub fn verify(config: &RunConfig, replay_path: Option<&Path>) -> Result<Outcome, CliError> {
    let plan = plan_for(config);
    let max_n = plan.ns.iter().chain(&plan.norm_ns).copied().max().unwrap_or(0);
    if plan.config.ref_points < 4 * max_n {
        return Err(CliError::Usage(format!(
            "ref_points = {} is below 4·max(n) = {}",
            plan.config.ref_points,
            4 * max_n
        )));
    }
    let reports = match replay_path {
        Some(path) => replay(config, &plan, path)?,
        None => run_verification(&plan)?,
    };
    let dir = prepare_out(config)?;
    write_atomic(dir, "bounds.csv", |w| {
        write_bounds_csv(&reports, w).map_err(CliError::from)
    })?;
    let failed: Vec<&BoundReport> = reports.iter().filter(|r| r.failed()).collect();
    for r in &failed {
        eprintln!("FAILED {r}");
    }
    let skipped = reports.iter().filter(|r| r.is_skipped()).count();
    eprintln!(
        "{} reports, {} failed, {} skipped",
        reports.len(),
        failed.len(),
        skipped
    );
    Ok(if failed.is_empty() {
        Outcome::Ok
    } else {
        Outcome::BoundFailed
    })
}
