//! One PASS/FAIL line per acceptance criterion. Lines go straight to stderr
//! so they survive the test harness's output capture.

use nlverify::report::CheckReport;
use nlverify::suites::{run_suite_timed, JobTiming, Params};
use std::io::Write;
use std::process::Command;
use std::time::Duration;

struct Outcome {
    ok: bool,
    detail: String,
}

fn checks_with<'a>(checks: &'a [CheckReport], prefixes: &[&str]) -> Vec<&'a CheckReport> {
    checks.iter().filter(|c| prefixes.iter().any(|p| c.check_id.starts_with(p))).collect()
}

fn time_of(timings: &[JobTiming], prefixes: &[&str]) -> Duration {
    timings.iter().filter(|t| t.checks.iter().any(|c| prefixes.iter().any(|p| c.starts_with(p)))).map(|t| t.elapsed).sum()
}

/// All checks under `prefixes` pass, there are exactly `expect` of them, and
/// their jobs took less than `limit` in total.
fn judge(checks: &[CheckReport], timings: &[JobTiming], prefixes: &[&str], expect: usize, limit: Option<Duration>) -> Outcome {
    let found = checks_with(checks, prefixes);
    let failed: Vec<&str> = found.iter().filter(|c| !c.pass).map(|c| c.check_id.as_str()).collect();
    let mut detail = format!("{} checks", found.len());
    let mut ok = found.len() == expect && failed.is_empty();
    if found.len() != expect {
        detail += &format!(", expected {expect}");
    }
    if !failed.is_empty() {
        detail += &format!(", failing: {}", failed.join(" "));
    }
    if let Some(limit) = limit {
        let t = time_of(timings, prefixes);
        detail += &format!(", {:.2}s", t.as_secs_f64());
        ok &= t < limit;
    }
    Outcome { ok, detail }
}

fn run_binary() -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_nlverify")).args(["run", "all", "--seed", "42"]).output().expect("binary runs");
    out.stdout
}

#[test]
fn acceptance() {
    let (report, timings) = run_suite_timed("all", &Params::default()).expect("suite runs");
    let c = &report.checks;
    let t = &timings;
    let secs = Duration::from_secs;

    let mut results: Vec<(&str, Outcome)> = vec![
        ("torsion identity", judge(c, t, &["fraclap.torsion_interior."], 6, Some(secs(60)))),
        ("exterior closed form", judge(c, t, &["fraclap.torsion_exterior."], 6, None)),
        ("barrier", judge(c, t, &["barrier."], 3, None)),
        ("stability functions", judge(c, t, &["stability.signs.", "stability.f_limit."], 18, None)),
        ("mean-value formula", judge(c, t, &["poisson.meanvalue_fd.", "poisson.meanvalue_r_spread."], 6, Some(secs(120)))),
        ("odd operator reduction", judge(c, t, &["bochner.residual.", "bochner.symbol_lift."], 8, None)),
        ("ellipsoid limit", judge(c, t, &["ellipsoid.limit_ratio", "ellipsoid.sup_quotient"], 2, Some(secs(300)))),
        ("slab scaling", judge(c, t, &["slab.exponent", "slab.upper_bound_ratio"], 2, None)),
        ("half-space energy", judge(c, t, &["halfspace_energy."], 9, None)),
        ("moments", judge(c, t, &["moments.n3"], 5, None)),
        ("counterexample pinning", judge(c, t, &["counterexamples.harnack_sup.", "counterexamples.harnack_inf.", "counterexamples.smp_values."], 6, None)),
        (
            "constant cross-relations",
            judge(
                c,
                t,
                &["constants.gamma_dimension_shift", "constants.c_tilde.", "constants.kappa_lambda_relation", "constants.lambda1_"],
                7,
                None,
            ),
        ),
    ];

    let a = run_binary();
    let b = run_binary();
    results.push((
        "determinism",
        Outcome { ok: !a.is_empty() && a == b, detail: format!("{} bytes, identical: {}", a.len(), a == b) },
    ));

    let mut err = std::io::stderr().lock();
    for (i, (name, o)) in results.iter().enumerate() {
        writeln!(err, "criterion {:>2} {} {name}: {}", i + 1, if o.ok { "PASS" } else { "FAIL" }, o.detail).unwrap();
    }
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, r)| !r.1.ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
