mod common;

use std::collections::BTreeSet;

use af2::datatypes::{nat_type, zero_derivation};
use af2::lambda::{church, Term};
use af2::logic::{FoTerm, Formula, Signature};
use af2::sandbox::*;
use af2::syntax::{parse_formula, parse_term};
use af2::typing::{infer_normal, Context, InferMode};
use common::{fo_term, formula};
use fixedbitset::FixedBitSet;
use proptest::prelude::*;

const SMALL: &str = "
base a b
size-bound 5
step-bound 4
family-limit 6
interp 0: -> a
interp s: a -> b, b -> a
term \\x. x
term y
set Y = terms y
";

fn model(src: &str) -> SandboxModel {
    parse_config(src).unwrap().build().unwrap()
}

fn f(s: &str) -> Formula {
    parse_formula(s, &Signature::standard()).unwrap()
}

fn config_error_line(src: &str) -> usize {
    match parse_config(src).and_then(|c| c.build().map(|_| c)) {
        Err(SandboxError::Config { line, .. }) => line,
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn configuration_errors_name_the_line() {
    assert_eq!(config_error_line("base a\nfrobnicate 3"), 2);
    assert_eq!(config_error_line("variant gamma"), 1);
    assert_eq!(config_error_line("base a b\n\ninterp s: a -> b"), 3);
    assert_eq!(config_error_line("interp q: -> a"), 1);
    assert_eq!(config_error_line("base a\ninterp 0: -> c"), 2);
    assert_eq!(config_error_line("set S = pred halts"), 1);
    assert_eq!(config_error_line("size-bound seven"), 1);
    assert!(matches!(parse_config("base a b c d").unwrap().build(), Err(SandboxError::Limit(_))));
    assert!(matches!(parse_config("term \\x.").map(|_| ()), Err(SandboxError::Config { line: 1, .. })));
}

#[test]
fn universe_contents() {
    let u = TermUniverse::build(&[parse_term("(\\x. x) y").unwrap()], 5, 4, 100);
    assert!(u.index_of(&parse_term("y").unwrap()).is_some());
    assert!(u.index_of(&parse_term("\\x. x").unwrap()).is_some());
    assert!(u.reduct_closed);
    let i = u.index_of(&parse_term("(\\x. x) y").unwrap()).unwrap();
    let y = u.index_of(&parse_term("y").unwrap()).unwrap();
    assert_eq!(u.beta_reducts(i), [y]);
}

/// Members that reach `s` by β-reduction inside the universe.
fn reaches(m: &SandboxModel, s: &FixedBitSet) -> FixedBitSet {
    let u = &m.universe;
    let mut out = u.empty_set();
    for t in 0..u.len() {
        let mut seen = BTreeSet::from([t]);
        let mut stack = vec![t];
        while let Some(v) = stack.pop() {
            if s.contains(v) {
                out.insert(t);
                break;
            }
            for &r in u.beta_reducts(v) {
                if seen.insert(r) {
                    stack.push(r);
                }
            }
        }
    }
    out
}

#[test]
fn family_members_are_saturated() {
    let m = model(SMALL);
    assert!(m.family.len() >= 2);
    for g in &m.family {
        assert_eq!(&m.saturate(g), g);
    }
    assert!(m.family.contains(&m.universe.full()));
}

#[test]
fn adequacy_spot_checks() {
    let m = model(SMALL);
    let id = infer_normal(&Context::new(), &parse_term("\\x. x").unwrap(), &f("forall Y. Y -> Y"), &m.theory, InferMode::Af2Zero, &Default::default());
    assert_eq!(adequacy_spot(&m, id.derivation().unwrap()), Spot::Pass);
    assert_eq!(member(&m, &parse_term("\\x. x").unwrap(), &f("forall Y. Y")).unwrap(), Membership::No);
    assert_eq!(member(&m, &parse_term("\\z. z z").unwrap(), &f("forall Y. Y")).unwrap(), Membership::Unknown);

    // 0 : N[0] over a base where every numeral denotes the same element.
    let nat = model("base a\nsize-bound 5\ninterp 0: -> a\ninterp s: a -> a\nterm \\x f. x\nterm y\nset Y = terms y");
    let spot = adequacy_spot(&nat, &zero_derivation());
    assert!(matches!(spot, Spot::Pass | Spot::OutOfUniverse(_)), "{spot}");
    assert!(!matches!(adequacy_spot(&nat, &zero_derivation()), Spot::Fail(_)));

    let mut open = zero_derivation();
    open.ctx = Context(vec![("z".into(), nat_type(&FoTerm::var("x")))]);
    assert!(matches!(adequacy_spot(&nat, &open), Spot::Precondition(_)));
}

#[test]
fn models_must_satisfy_the_theory() {
    let m = model("base a b\ninterp 0: -> a\ninterp s: a -> b, b -> b\ninterp p: a -> a, b -> a\neq p(0) = 0.\neq p(s x) = x.\nterm \\x. x");
    assert!(m.satisfies_theory().is_err());
    let m = model("base a b\ninterp 0: -> a\ninterp s: a -> b, b -> a\ninterp p: a -> b, b -> a\neq p(0) = 0.\neq p(s x) = x.\nterm \\x. x");
    assert!(m.satisfies_theory().is_err());
    let m = model("base a\ninterp 0: -> a\ninterp s: a -> a\ninterp p: a -> a\neq p(0) = 0.\neq p(s x) = x.\nterm \\x. x");
    assert_eq!(m.satisfies_theory(), Ok(()));
    assert_eq!(m.fo_value(&FoTerm::numeral(5), &Interpretation::default()), Ok(0));
}

#[test]
fn numerals_inhabit_the_nat_type() {
    let m = model("base a\nsize-bound 5\ninterp 0: -> a\ninterp s: a -> a\nterm \\x f. f x\nterm \\x f. x\nterm y\nset Y = terms y");
    for k in 0..2 {
        let v = member(&m, &church(k), &nat_type(&FoTerm::numeral(k))).unwrap();
        assert_ne!(v, Membership::No, "{k}");
        let d = infer_normal(&Context::new(), &church(k), &nat_type(&FoTerm::numeral(k)), &m.theory, InferMode::Af2Zero, &Default::default());
        let spot = adequacy_spot(&m, d.derivation().unwrap());
        assert!(!matches!(spot, Spot::Fail(_)), "{k}: {spot}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn saturation_is_closure_under_expansion(bits in prop::collection::vec(any::<bool>(), 64)) {
        let m = model(SMALL);
        let mut s = m.universe.empty_set();
        for (i, b) in bits.iter().enumerate().take(m.universe.len()) {
            s.set(i, *b);
        }
        let sat = m.saturate(&s);
        prop_assert_eq!(&m.saturate(&sat), &sat);
        prop_assert_eq!(sat, reaches(&m, &s));
    }

    #[test]
    fn substitution_lemma_for_terms(a in formula(3), t in fo_term(), x in prop::sample::select(vec!["x", "y"])) {
        let m = model(SMALL);
        let fo: Vec<String> = vec!["x".into(), "y".into()];
        let rel = vec![("X".to_string(), 1), ("Y".to_string(), 0)];
        for i in m.interpretations(&fo, &rel).into_iter().step_by(7) {
            prop_assert!(check_lemma_2_2(&m, &i, &a, x, &t).unwrap());
        }
    }

    #[test]
    fn substitution_lemma_for_formulas(a in formula(3), g in formula(2)) {
        let m = model(SMALL);
        let fo: Vec<String> = vec!["x".into(), "y".into()];
        let rel = vec![("X".to_string(), 1), ("Y".to_string(), 0)];
        for i in m.interpretations(&fo, &rel).into_iter().step_by(11) {
            let out = check_lemma_2_3(&m, &i, &a, "X", &["x".to_string()], &g).unwrap();
            prop_assert_ne!(out, LemmaOutcome::Fails);
        }
    }

    #[test]
    fn arrow_is_antitone_on_the_left(i in 0usize..6, j in 0usize..6, k in 0usize..6) {
        let m = model(SMALL);
        let n = m.family.len();
        let (g, h, c) = (&m.family[i % n], &m.family[j % n], &m.family[k % n]);
        if g.is_subset(h) {
            let big = m.arrow(&Interval::exact(h.clone()), &Interval::exact(c.clone()));
            let small = m.arrow(&Interval::exact(g.clone()), &Interval::exact(c.clone()));
            prop_assert!(big.low.is_subset(&small.low));
        }
    }
}

#[test]
fn variables_are_in_every_arrow_into_the_universe() {
    let m = model(SMALL);
    let y = Term::var("y");
    let v = m.arrow(&Interval::exact(m.family[1].clone()), &Interval::exact(m.universe.full()));
    assert!(v.low.contains(m.universe.index_of(&y).unwrap()));
}
