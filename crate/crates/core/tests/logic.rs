mod common;

use std::collections::BTreeSet;

use af2::bounds::Bounds;
use af2::logic::*;
use af2::syntax::{parse_formula, parse_fo_term, parse_theory, print_theory};
use common::{fo_term, formula};
use proptest::prelude::*;

fn f(s: &str) -> Formula {
    parse_formula(s, &Signature::standard()).unwrap()
}

fn ft(s: &str) -> FoTerm {
    parse_fo_term(s, &Signature::standard()).unwrap()
}

fn pairs(x: &str, t: FoTerm) -> Vec<(String, FoTerm)> {
    vec![(x.to_string(), t)]
}

#[test]
fn first_order_substitution() {
    let a = f("forall y. X(x, y)");
    let r = a.fo_subst(&pairs("x", ft("s(y)")));
    assert!(r.alpha_eq(&f("forall z. X(s(y), z)")));
    assert_eq!(r.fo_free(), ["y"]);
    assert_eq!(a.fo_subst(&pairs("y", ft("0"))), a);
    let simul = f("X(x, y)").fo_subst(&[("x".into(), ft("y")), ("y".into(), ft("x"))]);
    assert_eq!(simul, f("X(y, x)"));
}

#[test]
fn relational_substitution() {
    let a = f("forall y. X(y) -> X(s(y))");
    let g = f("Y(x) -> Y(0)");
    let r = a.rel_subst("X", &["x".into()], &g).unwrap();
    assert!(r.alpha_eq(&f("forall y. (Y(y) -> Y(0)) -> Y(s(y)) -> Y(0)")));

    // The free `y` of the substituted formula is not captured.
    let r = a.rel_subst("X", &["x".into()], &f("Z(x, y)")).unwrap();
    assert_eq!(r.fo_free(), ["y"]);
    assert!(r.alpha_eq(&f("forall w. Z(w, y) -> Z(s(w), y)")));

    // A bound relation variable of the same name shadows.
    let b = f("forall X/1. X(0)");
    assert_eq!(b.rel_subst("X", &["x".into()], &g).unwrap(), b);

    assert_eq!(a.rel_subst("X", &["x".into(), "x".into()], &g), Err(LogicError::DuplicateParams));
}

#[test]
fn closure_quantifies_first_order_then_relational() {
    let c = f("X(x) -> Y(y, x)").closure();
    assert!(c.is_closed());
    assert_eq!(c.to_string(), "forall x. forall y. forall X/1. forall Y/2. X(x) -> Y(y, x)");
    assert_eq!(c.closure(), c);
}

#[test]
fn equation_instances() {
    let pred = Theory::pred();
    assert!(eq_instance(&ft("p(0)"), &ft("0"), &pred));
    assert!(eq_instance(&ft("0"), &ft("p(0)"), &pred));
    assert!(eq_instance(&ft("p(s(s(y)))"), &ft("s(y)"), &pred));
    assert!(!eq_instance(&ft("p(s(y))"), &ft("s(y)"), &pred));
    assert!(!eq_instance(&ft("p(p(0))"), &ft("0"), &pred));
    assert!(!eq_instance(&ft("0"), &ft("0"), &Theory::empty()));
}

#[test]
fn bounded_congruence() {
    let pred = Theory::pred();
    let b = Bounds::default();
    assert_eq!(approx_e(&ft("p(p(0))"), &ft("0"), &pred, &b), Congruence::Equal);
    assert_eq!(approx_e(&ft("p(s(p(s(x))))"), &ft("x"), &pred, &b), Congruence::Equal);
    assert_eq!(approx_e(&ft("s(0)"), &ft("0"), &pred, &b), Congruence::NotEqualWithinBounds);
    assert_eq!(approx_e(&ft("p(0)"), &ft("0"), &Theory::empty(), &b), Congruence::NotEqualWithinBounds);
    let zero = Bounds { max_congr_depth: 0, ..b };
    assert_eq!(approx_e(&ft("p(0)"), &ft("0"), &pred, &zero), Congruence::NotEqualWithinBounds);
    assert_eq!(approx_e(&ft("x"), &ft("x"), &pred, &zero), Congruence::Equal);
}

#[test]
fn theory_files_round_trip() {
    let th = parse_theory("fun 0/0. fun s/1. fun p/1. eq p(0) = 0. eq p(s x) = x.").unwrap();
    assert_eq!(th.equations, Theory::pred().equations);
    assert_eq!(parse_theory(&print_theory(&th)).unwrap(), th);
    let e = parse_theory("fun s/1.\nrel s/1.").unwrap_err();
    assert_eq!((e.line, e.col), (2, 5));
    assert!(parse_theory("eq q(0) = 0.").is_err());
}

/// Value of a ground term over `0`, `s`, `p` in the standard model of the
/// predecessor theory.
fn value(t: &FoTerm) -> Option<u64> {
    match t {
        FoTerm::App(c, a) if c == "0" && a.is_empty() => Some(0),
        FoTerm::App(c, a) if c == "s" && a.len() == 1 => value(&a[0]).map(|v| v + 1),
        FoTerm::App(c, a) if c == "p" && a.len() == 1 => value(&a[0]).map(|v| v.saturating_sub(1)),
        _ => None,
    }
}

fn ground() -> impl Strategy<Value = FoTerm> {
    Just(FoTerm::cst("0")).prop_recursive(5, 6, 1, |inner| {
        prop_oneof![inner.clone().prop_map(|t| FoTerm::app("s", vec![t])), inner.prop_map(|t| FoTerm::app("p", vec![t]))]
    })
}

fn fo_vars(a: &Formula) -> BTreeSet<String> {
    a.fo_free().into_iter().collect()
}

proptest! {
    #[test]
    fn congruence_is_sound_for_the_standard_model(a in ground(), b in ground()) {
        if approx_e(&a, &b, &Theory::pred(), &Bounds::default()) == Congruence::Equal {
            prop_assert_eq!(value(&a), value(&b));
        }
    }

    #[test]
    fn congruence_is_symmetric(a in ground(), b in ground()) {
        let th = Theory::pred();
        let bd = Bounds::default();
        prop_assert_eq!(approx_e(&a, &b, &th, &bd), approx_e(&b, &a, &th, &bd));
    }

    #[test]
    fn fo_subst_free_variables(a in formula(4), u in fo_term(), x in prop::sample::select(vec!["x", "y"])) {
        let r = a.fo_subst(&pairs(x, u.clone()));
        let mut want = fo_vars(&a);
        if want.remove(x) {
            want.extend(u.vars());
        }
        prop_assert_eq!(fo_vars(&r), want);
    }

    #[test]
    fn fo_subst_respects_alpha(a in formula(4), u in fo_term()) {
        let renamed = a.canonical();
        prop_assert!(a.fo_subst(&pairs("x", u.clone())).alpha_eq(&renamed.fo_subst(&pairs("x", u))));
    }

    #[test]
    fn rel_subst_by_own_atom_is_identity(a in formula(4)) {
        let id = Formula::atom("X", vec![FoTerm::var("z")]);
        prop_assert!(a.rel_subst("X", &["z".into()], &id).unwrap().alpha_eq(&a));
    }

    #[test]
    fn rel_subst_removes_the_variable(a in formula(4)) {
        let g = f("Y -> Y");
        let r = a.rel_subst("X", &["z".into()], &g).unwrap();
        prop_assert!(!r.has_rel_free("X", 1));
        prop_assert_eq!(fo_vars(&r).is_subset(&fo_vars(&a)), true);
    }

    #[test]
    fn closure_is_closed_and_printable(a in formula(4)) {
        let c = a.closure();
        prop_assert!(c.is_closed());
        prop_assert_eq!(parse_formula(&a.to_string(), &Signature::standard()).unwrap(), a);
    }
}
