use std::time::{Duration, Instant};

use af2::bounds::Bounds;
use af2::suite::*;

#[test]
fn bundled_suite_passes_at_default_bounds() {
    let start = Instant::now();
    let report = run_suite(&Bounds::default());
    assert!(report.all_pass(), "{report}");
    assert!(start.elapsed() < Duration::from_secs(60));
    let names: Vec<&str> = report.checks.iter().map(|c| c.case.as_str()).collect();
    for case in ["A/identity", "B/identity", "C/identity", "C'/identity", "K/identity"] {
        assert!(names.iter().any(|n| n.starts_with(case)), "missing {case}");
    }
}

#[test]
fn depth_zero_is_weaker_never_wrong() {
    let report = run_suite(&Bounds { max_inst_depth: 0, ..Bounds::default() });
    assert!(report.failures().is_empty(), "{report}");
    assert!(!report.weaker().is_empty());
}

#[test]
fn corrupted_expectation_is_reported() {
    let mut cases = parse_cases(BUNDLED_CASES).unwrap();
    let i = cases.iter().position(|c| c.name == "A/identity").unwrap();
    for e in &mut cases[i].expects {
        if e.0 == "typable" {
            e.1 = "yes".into();
        }
    }
    let report = run_cases(&cases, &Bounds::default());
    let fails = report.failures();
    assert_eq!(fails.len(), 1, "{report}");
    assert_eq!((fails[0].case.as_str(), fails[0].key.as_str()), ("A/identity", "typable"));
}

#[test]
fn parse_errors_carry_positions() {
    let e = parse_cases("case X\nterm \\x. )").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(e.col > 5, "{e:?}");
    assert_eq!(parse_cases("expect proper yes").unwrap_err().line, 1);
    assert_eq!(parse_cases("case X\n\ncase Y\nfrobnicate 1").unwrap_err().line, 4);
    assert_eq!(parse_cases("case X\ntheory peano").unwrap_err().line, 2);
    let ok = parse_cases("# header\ncase X\ntype forall X/0. X -> X  # comment\nexpect proper yes\n").unwrap();
    assert_eq!(ok.len(), 1);
    assert_eq!(ok[0].line, 2);
}

#[test]
fn runs_are_deterministic() {
    let cases = parse_cases(BUNDLED_CASES).unwrap();
    let a = run_cases(&cases[..8], &Bounds::default());
    let b = run_cases(&cases[..8], &Bounds::default());
    assert_eq!(a, b);
}
