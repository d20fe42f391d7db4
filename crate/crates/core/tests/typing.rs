use af2::bounds::Bounds;
use af2::datatypes::nat_type;
use af2::lambda::{church, Term};
use af2::logic::{FoTerm, Formula, Signature, Theory};
use af2::syntax::{parse_formula, parse_fo_term, parse_term};
use af2::typing::*;
use proptest::prelude::*;

fn f(s: &str) -> Formula {
    parse_formula(s, &Signature::standard()).unwrap()
}

fn ft(s: &str) -> FoTerm {
    parse_fo_term(s, &Signature::standard()).unwrap()
}

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

fn ctx(items: &[(&str, &str)]) -> Context {
    Context(items.iter().map(|(x, a)| (x.to_string(), f(a))).collect())
}

fn infer(c: &Context, term: &str, ty: &str, th: &Theory, mode: InferMode) -> InferResult {
    infer_normal(c, &t(term), &f(ty), th, mode, &Bounds::default())
}

fn derive(c: &Context, term: &str, ty: &str, th: &Theory, mode: InferMode) -> Derivation {
    infer(c, term, ty, th, mode).derivation().cloned().expect("typable")
}

fn binder(d: &Derivation) -> String {
    match &d.ty {
        Formula::ForallRel(y, _, _) => y.clone(),
        other => panic!("expected a second-order quantifier, found {other}"),
    }
}

/// `Γ ⊢ λx x : B → B` from the axiom.
fn identity_at(c: &Context, b: &str) -> Derivation {
    let inner = Derivation::leaf(c.with("x", f(b)), "x", f(b));
    Derivation::node(Rule::R2, c.clone(), t("\\x. x"), Formula::arrow(f(b), f(b)), Payload::Var("x".into()), vec![inner])
}

const A: &str = "forall X/1. (X(0) -> forall y. X(y)) -> X(0) -> X(0)";
const D: &str = "forall X/0. (forall Y/0. Y -> X) -> X";

#[test]
fn accepts_the_polymorphic_identity() {
    let d = derive(&Context::new(), "\\x. x", "forall Y. Y -> Y", &Theory::empty(), InferMode::Af2Zero);
    assert_eq!(check_derivation(&d, &Theory::empty(), Mode::Af2Zero), Ok(()));
    assert_eq!(check_derivation(&d, &Theory::empty(), Mode::Af2), Ok(()));
}

#[test]
fn rejects_generalizing_a_context_variable() {
    let c = ctx(&[("x", "X(y)")]);
    let leaf = Derivation::leaf(c.clone(), "x", f("X(y)"));
    let d = Derivation::node(Rule::R4, c, t("x"), f("forall y. X(y)"), Payload::None, vec![leaf]);
    let r = check_derivation(&d, &Theory::empty(), Mode::Af2).unwrap_err();
    assert_eq!(r.path, Vec::<usize>::new());
    assert_eq!(r.rule, Rule::R4);
    assert!(matches!(r.reason, Reason::Freshness(_)));

    let c = ctx(&[("x", "X(y)")]);
    let leaf = Derivation::leaf(c.clone(), "x", f("X(y)"));
    let d = Derivation::node(Rule::R6, c, t("x"), f("forall X/1. X(y)"), Payload::None, vec![leaf]);
    assert!(matches!(check_derivation(&d, &Theory::empty(), Mode::Af2).unwrap_err().reason, Reason::Freshness(_)));
}

#[test]
fn equality_rule_needs_an_equation_instance() {
    let c = ctx(&[("x", "X(p(0))")]);
    let leaf = Derivation::leaf(c.clone(), "x", f("X(p(0))"));
    let payload = Payload::Eq { template: f("X(z)"), var: "z".into(), from: ft("p(0)"), to: ft("0") };
    let d = Derivation::node(Rule::R8, c, t("x"), f("X(0)"), payload, vec![leaf]);
    assert_eq!(check_derivation(&d, &Theory::pred(), Mode::Af2), Ok(()));
    let r = check_derivation(&d, &Theory::empty(), Mode::Af2).unwrap_err();
    assert!(matches!(r.reason, Reason::NotEquationInstance(_)));
}

#[test]
fn second_order_instantiation_is_not_in_the_zero_fragment() {
    let id = derive(&Context::new(), "\\x. x", "forall Y. Y -> Y", &Theory::empty(), InferMode::Af2Zero);
    let payload = Payload::RelInst { var: binder(&id), params: vec![], formula: f("X(0) -> X(0)") };
    let d = Derivation::node(Rule::R7, Context::new(), t("\\x. x"), f("(X(0) -> X(0)) -> X(0) -> X(0)"), payload, vec![id]);
    assert_eq!(check_derivation(&d, &Theory::empty(), Mode::Af2), Ok(()));
    let r = check_derivation(&d, &Theory::empty(), Mode::Af2Zero).unwrap_err();
    assert!(matches!(r.reason, Reason::Mode(_)));
}

#[test]
fn translation_from_the_zero_fragment() {
    let c = ctx(&[("y", "forall Z/1. Z(0) -> Z(0)")]);
    let d = derive(&c, "y", "X(0) -> X(0)", &Theory::empty(), InferMode::Af2Zero);
    assert!(d.uses_rule(Rule::R7o));
    let e = af2_0_to_af2(&d);
    assert!(!e.uses_rule(Rule::R7o));
    assert_eq!(check_derivation(&e, &Theory::empty(), Mode::Af2), Ok(()));
    assert_eq!((e.term.clone(), e.ty.clone()), (d.term, d.ty));
}

#[test]
fn weakening_and_strengthening() {
    let d = derive(&Context::new(), "\\x. x", "forall Y. Y -> Y", &Theory::empty(), InferMode::Af2Zero);
    let extra = ctx(&[("z", "Y"), ("x", "X(y)")]);
    let w = weaken(&d, &extra);
    assert_eq!(check_derivation(&w, &Theory::empty(), Mode::Af2), Ok(()));
    assert!(w.ctx.same_as(&extra));
    assert!(w.ty.alpha_eq(&d.ty));
    let s = strengthen(&w);
    assert!(s.ctx.0.is_empty());
    assert_eq!(check_derivation(&s, &Theory::empty(), Mode::Af2), Ok(()));
}

#[test]
fn transport_along_an_equation() {
    let c = ctx(&[("x", "X(p(s(0)))")]);
    let d = Derivation::leaf(c, "x", f("X(p(s(0)))"));
    let e = transport_eq(&d, &f("X(z)"), "z", &ft("p(s(0))"), &ft("0"), &Theory::pred(), &Bounds::default()).unwrap();
    assert_eq!(e.ty, f("X(0)"));
    assert_eq!(check_derivation(&e, &Theory::pred(), Mode::Af2), Ok(()));
    let bad = transport_eq(&d, &f("X(z)"), "z", &ft("p(s(0))"), &ft("s(0)"), &Theory::pred(), &Bounds::default());
    assert!(bad.is_err());
}

#[test]
fn instantiation_order() {
    let th = Theory::pred();
    let b = Bounds::default();
    let c = leq(&f("forall x. X(x)"), &f("X(s(0))"), &th, &b).unwrap();
    assert!(c.verify(&th) && c.is_leq());
    assert!(leq(&f("X(0)"), &f("forall x. X(x)"), &th, &b).is_none());
    let c = leq(&f("forall Y/1. Y(0) -> Y(0)"), &f("(X(0) -> X(0)) -> X(0) -> X(0)"), &th, &b).unwrap();
    assert!(c.verify(&th));
    let c = sim(&f("X(p(0))"), &f("X(0)"), &th, &b).unwrap();
    assert!(c.verify(&th) && c.is_sim());
    assert!(sim(&f("X(s(0))"), &f("X(0)"), &th, &b).is_none());
}

#[test]
fn generation_reads_off_an_abstraction() {
    let dec = generation(&Context::new(), &t("\\x. x"), &f("forall Y. Y -> Y"), &Theory::empty(), &Bounds::default()).unwrap();
    let Decomposition::Abs { xi, b, c, .. } = dec else { panic!("expected an abstraction") };
    assert_eq!(xi.len(), 1);
    assert!(b.alpha_eq(&c));
    let dec = generation(&ctx(&[("y", "forall x. X(x)")]), &t("y"), &f("X(0)"), &Theory::empty(), &Bounds::default()).unwrap();
    assert!(matches!(dec, Decomposition::Var { .. }));
    assert!(generation(&Context::new(), &t("\\x. x"), &f(A), &Theory::empty(), &Bounds::default()).is_err());
}

#[test]
fn subject_reduction_at_the_root() {
    let c = ctx(&[("y", "Y")]);
    let app = Derivation::node(Rule::R3, c.clone(), t("(\\x. x) y"), f("Y"), Payload::None, vec![identity_at(&c, "Y"), Derivation::leaf(c, "y", f("Y"))]);
    assert_eq!(check_derivation(&app, &Theory::empty(), Mode::Af2), Ok(()));
    let r = subject_reduce(&app, &[]).unwrap();
    assert_eq!(r.term, t("y"));
    assert_eq!(r.ty, f("Y"));
    assert_eq!(check_derivation(&r, &Theory::empty(), Mode::Af2), Ok(()));
    assert_eq!(subject_reduce(&r, &[]), Err(ReduceError::NoRedex));
}

#[test]
fn subject_reduction_through_instantiation() {
    // (λx x)y with λx x : ∀Y (Y → Y) instantiated at X(0).
    let c = ctx(&[("y", "X(0)")]);
    let id = weaken(&derive(&Context::new(), "\\x. x", "forall Y. Y -> Y", &Theory::empty(), InferMode::Af2Zero), &c);
    let inst = Derivation::node(Rule::R7, c.clone(), t("\\x. x"), f("X(0) -> X(0)"), Payload::RelInst { var: binder(&id), params: vec![], formula: f("X(0)") }, vec![id]);
    let app = Derivation::node(Rule::R3, c.clone(), t("(\\x. x) y"), f("X(0)"), Payload::None, vec![inst, Derivation::leaf(c, "y", f("X(0)"))]);
    assert_eq!(check_derivation(&app, &Theory::empty(), Mode::Af2), Ok(()));
    let r = subject_reduce(&app, &[]).unwrap();
    assert_eq!((r.term.clone(), r.ty.clone()), (t("y"), f("X(0)")));
    assert_eq!(check_derivation(&r, &Theory::empty(), Mode::Af2), Ok(()));
}

#[test]
fn inference_examples() {
    let th = Theory::empty();
    assert!(matches!(infer(&Context::new(), "\\x. x", A, &th, InferMode::Af2Bounded), InferResult::NotTypable { exhaustive: true, .. }));
    let d = derive(&Context::new(), "\\x. x (\\y. y)", D, &th, InferMode::Af2Bounded);
    assert_eq!(check_derivation(&d, &th, Mode::Af2), Ok(()));
    assert!(infer(&Context::new(), "\\x. x (\\y. y)", D, &th, InferMode::Af2Zero).derivation().is_none());
    let d = derive(&ctx(&[("y", "forall x. X(x)")]), "y", "X(p(0))", &Theory::pred(), InferMode::Af2Zero);
    assert_eq!(check_derivation(&d, &Theory::pred(), Mode::Af2Zero), Ok(()));
}

#[test]
fn derivation_json_rejects_bad_input() {
    let sig = Signature::standard();
    assert!(matches!(parse_derivation("{", &sig), Err(FormatError::Json(_))));
    let bad = r#"{"rule":"R9","ctx":[],"term":"x","type":"X","payload":null,"premises":[]}"#;
    assert!(matches!(parse_derivation(bad, &sig), Err(FormatError::Field { field: "rule", .. })));
}

proptest! {
    #[test]
    fn numerals_are_typed_and_round_trip(k in 0usize..6) {
        let th = Theory::empty();
        let n = nat_type(&FoTerm::numeral(k));
        let r = infer_normal(&Context::new(), &church(k), &n, &th, InferMode::Af2Zero, &Bounds::default());
        let d = r.derivation().expect("numerals are typable").clone();
        prop_assert_eq!(check_derivation(&d, &th, Mode::Af2Zero), Ok(()));
        let back = parse_derivation(&print_derivation(&d), &th.sig).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(print_derivation(&back), print_derivation(&d));
    }

    #[test]
    fn numerals_are_not_typed_at_other_numerals(k in 0usize..4, j in 0usize..4) {
        prop_assume!(k != j);
        let n = nat_type(&FoTerm::numeral(j));
        let r = infer_normal(&Context::new(), &church(k), &n, &Theory::empty(), InferMode::Af2Zero, &Bounds::default());
        prop_assert!(r.derivation().is_none());
    }

    #[test]
    fn weakening_preserves_validity(k in 0usize..4, extra in prop::sample::select(vec!["X(x)", "Y", "forall x. X(x)", "X(0) -> Y"])) {
        let th = Theory::empty();
        let n = nat_type(&FoTerm::numeral(k));
        let d = infer_normal(&Context::new(), &church(k), &n, &th, InferMode::Af2Zero, &Bounds::default()).derivation().unwrap().clone();
        let w = weaken(&d, &ctx(&[("z", extra), ("x", extra)]));
        prop_assert_eq!(check_derivation(&w, &th, Mode::Af2Zero), Ok(()));
        prop_assert_eq!(check_derivation(&strengthen(&w), &th, Mode::Af2Zero), Ok(()));
    }
}

#[test]
fn subject_reduction_of_a_successor_application() {
    use af2::datatypes::{succ_derivation, zero_derivation};
    let (s, z) = (succ_derivation(), zero_derivation());
    let one = nat_type(&FoTerm::numeral(1));
    let inst = Derivation::node(Rule::R5, Context::new(), s.term.clone(), Formula::arrow(nat_type(&FoTerm::numeral(0)), one.clone()), Payload::Term(FoTerm::numeral(0)), vec![s.clone()]);
    let app = Derivation::node(Rule::R3, Context::new(), Term::app(s.term.clone(), z.term.clone()), one.clone(), Payload::None, vec![inst, z]);
    assert_eq!(check_derivation(&app, &Theory::empty(), Mode::Af2), Ok(()));
    // The argument's generalized X meets the X free in the body's contexts.
    let r = subject_reduce(&app, &[]).unwrap();
    assert_eq!(check_derivation(&r, &Theory::empty(), Mode::Af2), Ok(()));
    assert!(r.ty.alpha_eq(&one));
}
