use nlverify::report::{CheckReport, Mode, Report};
use nlverify::suites::{explain, run_suite, Params, SUITES};
use proptest::prelude::*;
use std::collections::BTreeSet;

#[test]
fn every_suite_passes_with_defaults() {
    let p = Params::default();
    let all = run_suite("all", &p).unwrap();
    assert!(all.all_pass(), "{:#?}", all.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    let ids: BTreeSet<&str> = all.checks.iter().map(|c| c.check_id.as_str()).collect();
    assert_eq!(ids.len(), all.checks.len(), "duplicate check ids");

    let mut union = 0;
    for name in &SUITES[..9] {
        let r = run_suite(name, &p).unwrap();
        assert!(!r.checks.is_empty(), "{name}");
        union += r.checks.len();
    }
    assert_eq!(union, all.checks.len());
}

#[test]
fn checks_are_explained_and_described() {
    let r = run_suite("all", &Params::default()).unwrap();
    for c in &r.checks {
        assert!(explain(&c.check_id).is_some(), "{}", c.check_id);
        assert!(!c.paper_ref.is_empty(), "{}", c.check_id);
    }
}

#[test]
fn randomized_checks_record_their_seed() {
    let p = Params { seed: 7, ..Params::default() };
    let r = run_suite("perimeter", &p).unwrap();
    for id in ["perimeter.disk", "moments.n3.ball_mc", "moments.n3.sphere_mc"] {
        let c = r.checks.iter().find(|c| c.check_id == id).unwrap();
        assert_eq!(c.metadata.get("seed").map(String::as_str), Some("7"), "{id}");
    }
}

#[test]
fn reports_are_reproducible_and_seed_sensitive() {
    let p = Params::default();
    let a = run_suite("perimeter", &p).unwrap().to_json().unwrap();
    let b = run_suite("perimeter", &p).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    let c = run_suite("perimeter", &Params { seed: 43, ..p }).unwrap().to_json().unwrap();
    assert_ne!(a, c);
}

#[test]
fn json_report_round_trips() {
    let r = run_suite("constants", &Params::default()).unwrap();
    let json = r.to_json().unwrap();
    let back: Report<Params> = serde_json::from_str(&json).unwrap();
    // infinite relative errors travel as null, so compare the serialized form
    assert_eq!(back.to_json().unwrap(), json);
    assert_eq!(back.params, r.params);
}

#[test]
fn invalid_params_are_rejected() {
    assert!(run_suite("constants", &Params { s: 1.0, ..Params::default() }).is_err());
    assert!(run_suite("constants", &Params { n: 0, ..Params::default() }).is_err());
    assert!(run_suite("slab", &Params { alpha: 1.0, ..Params::default() }).is_err());
    assert!(run_suite("perimeter", &Params { samples: 0, ..Params::default() }).is_err());
}

fn mode() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Abs), Just(Mode::Rel), Just(Mode::Either), Just(Mode::UpperBound), Just(Mode::LowerBound)]
}

proptest! {
    #[test]
    fn pass_follows_declared_mode(c in -1e3f64..1e3, r in -1e3f64..1e3, tol in 0.0f64..10.0, m in mode()) {
        let rep = CheckReport::compare("x", "", c, r, tol, m);
        let expect = match m {
            Mode::Abs => rep.abs_err <= tol,
            Mode::Rel => rep.rel_err <= tol,
            Mode::Either => rep.abs_err <= tol || rep.rel_err <= tol,
            Mode::UpperBound => c <= r + tol,
            Mode::LowerBound => c >= r - tol,
        };
        prop_assert_eq!(rep.pass, expect);
        prop_assert!(!rep.clone().converged(false).pass);
        let json = serde_json::to_string(&rep).unwrap();
        let back: CheckReport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, rep);
    }

    #[test]
    fn counterexample_suite_ignores_seed(seed in 0u64..1000) {
        let r = run_suite("counterexamples", &Params { seed, ..Params::default() }).unwrap();
        prop_assert!(r.all_pass());
    }
}
