//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::process::ExitCode;
use std::time::Instant;

use lft::verify::{
    biconjugate_suite, closed_forms_suite, convexity_suite, divergence_suite, gradients_suite, involution_suite, oracle_large,
    oracle_suite, reverse_order_suite, subdifferential_suite, theorem_full, SuiteReport, Tolerances,
};
use lft::{CheckReport, Result};

const SEED: u64 = 20240611;

type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn summarize(checks: &[CheckReport]) -> String {
    checks.iter().map(|c| format!("{} {:?} worst={:.3e}", c.check, c.status, c.worst_violation)).collect::<Vec<_>>().join(" | ")
}

fn from_suite(s: &SuiteReport) -> Outcome {
    Outcome { pass: s.passed(), detail: summarize(&s.checks) }
}

fn timed(limit: Option<f64>, run: impl FnOnce() -> Result<Outcome>) -> Outcome {
    let start = Instant::now();
    let mut out = run().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
    let secs = start.elapsed().as_secs_f64();
    if let Some(limit) = limit {
        out.pass &= secs < limit;
        out.detail = format!("{} | {secs:.2}s (limit {limit}s)", out.detail);
    } else {
        out.detail = format!("{} | {secs:.2}s", out.detail);
    }
    out
}

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let criteria: Vec<Criterion> = vec![
        (
            "theorem: (L F)_P = L(F_P-diamond)",
            Box::new(|| timed(Some(60.0), || Ok(from_suite(&theorem_full(SEED, 500, 100, &tol)?)))),
        ),
        ("diamond involution", Box::new(|| timed(Some(1.0), || Ok(from_suite(&involution_suite(SEED, 1000, &tol)))))),
        ("convexity of deformations", Box::new(|| timed(None, || Ok(from_suite(&convexity_suite(SEED, 100, 500, &tol)?))))),
        ("closed-form conjugates", Box::new(|| timed(None, || Ok(from_suite(&closed_forms_suite(SEED, 1000, &tol)?))))),
        (
            "fast = brute discrete transform",
            Box::new(|| {
                timed(None, || {
                    let small = oracle_suite(SEED, 200, 512)?;
                    let large = oracle_large(SEED, 100_000, 1000)?;
                    let pass = small.passed() && large.check.passed() && large.speedup >= 20.0;
                    let detail = format!(
                        "{} | speedup {:.1}x (fast {:.4}s, brute est. {:.2}s)",
                        summarize(&[small, large.check]),
                        large.speedup,
                        large.fast_seconds,
                        large.brute_seconds_estimate
                    );
                    Ok(Outcome { pass, detail })
                })
            }),
        ),
        ("biconjugation", Box::new(|| timed(None, || Ok(from_suite(&biconjugate_suite(SEED, &tol)?))))),
        ("reverse ordering", Box::new(|| timed(None, || Ok(from_suite(&reverse_order_suite(SEED, 100)?))))),
        ("reciprocal gradients", Box::new(|| timed(None, || Ok(from_suite(&gradients_suite(100, &tol)?))))),
        ("divergence layer", Box::new(|| timed(None, || Ok(from_suite(&divergence_suite(SEED, 500, 100, &tol)?))))),
        (
            "subdifferential of exp-abs at 0",
            Box::new(|| {
                timed(None, || {
                    let suite = subdifferential_suite(&tol)?;
                    let kink = suite.checks[0].clone();
                    let note = kink.note.clone().unwrap_or_default();
                    Ok(Outcome { pass: kink.passed(), detail: format!("{} | {note}", summarize(&[kink])) })
                })
            }),
        ),
    ];

    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {}", if out.pass { "PASS" } else { "FAIL" }, i + 1, out.detail);
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
