//! Acceptance suite: one PASS/FAIL line per criterion on stdout.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use illposed::{
    build_default_system, catalog, convergence_study, l2_error, measurement_rule, min_norm_solution, run_verification,
    BoundReport, Reference, SchemeKind, VerificationPlan,
};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn select<'a>(reports: &'a [BoundReport], ids: &[&str]) -> Vec<&'a BoundReport> {
    reports.iter().filter(|r| ids.contains(&r.bound_id.as_str())).collect()
}

/// Every selected report is non-failed, at least `min_checked` of them were
/// actually checked, and none is missing.
fn all_hold(reports: &[BoundReport], ids: &[&str], expected: usize, min_checked: usize) -> Outcome {
    let sel = select(reports, ids);
    let failed: Vec<String> = sel.iter().filter(|r| r.failed()).map(|r| r.to_string()).collect();
    let checked = sel.iter().filter(|r| r.passed()).count();
    let skipped = sel.iter().filter(|r| r.is_skipped()).count();
    let detail = format!(
        "{} reports ({checked} passed, {skipped} skipped, {} failed){}",
        sel.len(),
        failed.len(),
        failed
            .first()
            .map(|f| format!("; first failure: {f}"))
            .unwrap_or_default()
    );
    outcome(
        failed.is_empty() && sel.len() == expected && checked >= min_checked,
        detail,
    )
}

fn ac1() -> Outcome {
    let p = catalog::<f64>("rank3-decay").unwrap();
    let sys = build_default_system(&p.kernel, SchemeKind::COLLOCATION, 32).unwrap();
    let reference = Reference::standard(p.domain()).unwrap();
    let rule = measurement_rule(&sys, &reference.grid).unwrap();
    let x = min_norm_solution(&sys, &sys.project(&p.y), sys.rel_tol()).unwrap();
    let closed_form = p.svd.as_ref().unwrap().pseudoinverse_apply(&p.y, &reference.fine);
    let err = l2_error(&closed_form, &x.function, &rule);
    outcome(err <= 1e-6, format!("‖T†y − x_32†‖ = {err:e}"))
}

fn ac6() -> Outcome {
    let p = catalog::<f64>("green-m1").unwrap();
    let rows = convergence_study(&p, SchemeKind::COLLOCATION, &[8, 16, 32, 64], None).unwrap();
    let eps_dec = rows.windows(2).all(|w| w[1].eps_n < w[0].eps_n);
    let err_dec = rows.windows(2).all(|w| w[1].err_min_norm < w[0].err_min_norm);
    let last = rows.last().unwrap().err_min_norm;
    let trail: Vec<String> = rows
        .iter()
        .map(|r| format!("n={} ε={:.2e} err={:.2e}", r.n, r.eps_n, r.err_min_norm))
        .collect();
    outcome(eps_dec && err_dec && last <= 1e-3, trail.join(", "))
}

fn ac7(reports: &[BoundReport]) -> Outcome {
    let c0 = all_hold(reports, &["source-c0"], 3, 3);
    let tikh: Vec<BoundReport> = reports
        .iter()
        .filter(|r| r.bound_id == "Th-Tikh" && r.context.problem == "green-m1")
        .cloned()
        .collect();
    let tikh = all_hold(&tikh, &["Th-Tikh"], 5, 5);
    outcome(
        c0.ok && tikh.ok,
        format!("source-c0: {}; Th-Tikh on green-m1: {}", c0.detail, tikh.detail),
    )
}

fn ac9() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_illposed");
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = Command::new(bin)
            .args(["verify", "--out"])
            .arg(&out)
            .env_remove("ILLPOSED_REF_POINTS")
            .output()
            .unwrap()
            .status;
        (
            status.code(),
            fs::read(Path::new(&out).join("bounds.csv")).unwrap_or_default(),
        )
    };
    let (code_a, a) = run("a");
    let (code_b, b) = run("b");
    let ok = code_a == Some(0) && code_b == Some(0) && !a.is_empty() && a == b;
    outcome(
        ok,
        format!(
            "exit codes {code_a:?}/{code_b:?}, {} bytes, identical: {}",
            a.len(),
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let reports = run_verification(&VerificationPlan::default()).expect("default verification grid");
    let criteria: Vec<Criterion> = vec![
        ("AC1", Box::new(ac1)),
        ("AC2", Box::new(|| all_hold(&reports, &["Th-1-eps"], 27, 27))),
        ("AC3", Box::new(|| all_hold(&reports, &["Th-3-stability"], 54, 1))),
        ("AC4", Box::new(|| all_hold(&reports, &["Th-5-noise"], 162, 162))),
        (
            "AC5",
            Box::new(|| all_hold(&reports, &["Remark-squared", "Th-special-1"], 36, 36)),
        ),
        ("AC6", Box::new(ac6)),
        ("AC7", Box::new(|| ac7(&reports))),
        (
            "AC8",
            Box::new(|| {
                all_hold(
                    &reports,
                    &["pinv-norm", "adjointness", "W-symmetry", "PSD", "svd-reconstruction"],
                    135,
                    135,
                )
            }),
        ),
        ("AC9", Box::new(ac9)),
    ];
    let mut all_ok = true;
    for (id, check) in criteria {
        let o = check();
        all_ok &= o.ok;
        println!("{id} {} {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
