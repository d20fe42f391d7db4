use af2::bounds::Bounds;
use af2::datatypes::*;
use af2::lambda::{church, delta, identity, Term};
use af2::logic::{FoTerm, Theory};
use af2::syntax::{parse_term, parse_theory};
use proptest::prelude::*;

/// `λnλxλf ((n)λu x)(λgλh (h)(g)f) λu u`, predecessor on data-first numerals.
fn pred_program() -> Term {
    parse_term("\\n x f. n (\\u. x) (\\g h. h (g f)) (\\u. u)").unwrap()
}

fn theory(src: &str) -> Theory {
    let mut th = parse_theory(&format!("fun 0/0. fun s/1. fun p/1. {src}")).unwrap();
    th.sig.funs.insert("1".into(), 0);
    th
}

#[test]
fn data_type_shapes() {
    let x = FoTerm::var("x");
    assert_eq!(nat_type(&x).to_string(), "forall X/1. X(0) -> (forall y. X(y) -> X(s(y))) -> X(x)");
    assert_eq!(bool_type(&x).to_string(), "forall X/1. X(0) -> X(1) -> X(x)");
    let l = list_type(&nat_type(&FoTerm::var("y")), "y", &x);
    assert!(l.to_string().starts_with("forall X/1. X(nil) -> (forall y. forall z. "));
    assert_eq!(l.fo_free(), ["x"]);
}

#[test]
fn adequacy() {
    let b = Bounds::default();
    assert_eq!(is_adequate(&Theory::pred(), &b), Adequacy::Adequate);
    assert_eq!(is_adequate(&Theory::empty(), &b), Adequacy::Adequate);
    assert!(matches!(is_adequate(&theory("eq s(0) = 0."), &b), Adequacy::Inadequate { .. }));
    assert!(matches!(is_adequate(&theory("eq s(x) = s(0)."), &b), Adequacy::Inadequate { .. }));
    assert!(matches!(is_adequate(&theory("eq p(x) = s(x)."), &b), Adequacy::Adequate));
    let bare = parse_theory("fun p/1.").unwrap();
    assert!(matches!(is_adequate(&bare, &b), Adequacy::UnknownWithinBounds(_)));
}

#[test]
fn pred_is_defined_by_its_equations() {
    let b = Bounds::default();
    assert_eq!(defines_function(&FunctionSpec::pred(8), &b), Ok(()));
    let mut wrong = FunctionSpec::pred(3);
    wrong.table[2].1 = 2;
    assert_eq!(defines_function(&wrong, &b), Err(vec![vec![2]]));
    let mut no_eqs = FunctionSpec::pred(2);
    no_eqs.theory = Theory::empty();
    assert_eq!(defines_function(&no_eqs, &b), Err(vec![vec![0], vec![1], vec![2]]));
}

#[test]
fn successor_and_predecessor_programs() {
    let b = Bounds::default();
    assert!(represents(&succ_program(), &FunctionSpec::succ(10), &b).all_pass());
    assert!(represents(&pred_program(), &FunctionSpec::pred(10), &b).all_pass());
    let id = represents(&identity(), &FunctionSpec::succ(3), &b);
    assert_eq!(id.rows[2].outcome, RowOutcome::Fail(Some(2)));
    let loops = Term::lam("n", Term::app(delta(), delta()));
    let r = represents(&loops, &FunctionSpec::succ(1), &b);
    assert!(r.rows.iter().all(|row| row.outcome == RowOutcome::StepBound));
    let k = represents(&parse_term("\\n x f. f").unwrap(), &FunctionSpec::succ(1), &b);
    assert_eq!(k.rows[0].outcome, RowOutcome::Fail(None));
}

#[test]
fn programming_theorem_on_the_successor_derivation() {
    let b = Bounds::default();
    match programming_theorem_check(&succ_derivation(), &FunctionSpec::succ(10), &b) {
        ProgThm::Checked(report) => {
            assert!(report.all_pass(), "{report}");
            assert_eq!(report.rows.len(), 11);
        }
        ProgThm::Preconditions(e) => panic!("{e:?}"),
    }
    let ProgThm::Preconditions(errs) = programming_theorem_check(&zero_derivation(), &FunctionSpec::succ(2), &b) else {
        panic!("the zero derivation has the wrong type");
    };
    assert_eq!(errs.len(), 1);
    let mut bad = FunctionSpec::succ(2);
    bad.theory = theory("eq s(0) = 0.");
    assert!(matches!(programming_theorem_check(&succ_derivation(), &bad, &b), ProgThm::Preconditions(_)));
}

#[test]
fn spec_files() {
    let s = parse_spec("fun 0/0. fun s/1. fun p/1.\neq p(0) = 0. eq p(s x) = x.\ntable p(0) = 0. table p(3) = 2.").unwrap();
    assert_eq!((s.name.as_str(), s.arity), ("p", 1));
    assert_eq!(s.table, vec![(vec![0], 0), (vec![3], 2)]);
    assert_eq!(s.theory.equations, Theory::pred().equations);
    let e = parse_spec("fun 0/0. fun s/1.\ntable q(1) = 2.").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(parse_spec("fun p/1. fun q/1. table p(1) = 0. table q(1) = 0.").is_err());
    assert!(parse_spec("fun p/1. table p(1) = 0").is_err());
}

proptest! {
    #[test]
    fn predecessor_agrees_with_arithmetic(n in 0usize..25) {
        let t = Term::app(pred_program(), church(n));
        let out = af2::lambda::normalize(&t, &Bounds::default());
        prop_assert_eq!(out.normal(), Some(&church(n.saturating_sub(1))));
    }

    #[test]
    fn corrupted_rows_are_reported(n in 0usize..8, delta in 1usize..3) {
        let mut spec = FunctionSpec::pred(8);
        spec.table[n].1 += delta;
        prop_assert_eq!(defines_function(&spec, &Bounds::default()), Err(vec![vec![n]]));
        let r = represents(&pred_program(), &spec, &Bounds::default());
        prop_assert_eq!(r.rows.iter().filter(|row| row.outcome != RowOutcome::Pass).count(), 1);
    }
}
