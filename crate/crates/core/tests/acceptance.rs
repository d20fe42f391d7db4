//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

mod common;

use std::time::{Duration, Instant};

use af2::bounds::Bounds;
use af2::datatypes::*;
use af2::lambda::*;
use af2::logic::{FoTerm, Formula, Signature, Theory};
use af2::sandbox::*;
use af2::suite::{parse_cases, run_suite, BUNDLED_CASES};
use af2::syntax::{parse_formula, parse_term};
use af2::typeclass::{classify, classify_quant2, BPlus};
use af2::typing::*;
use common::{formula, term_up_to};
use proptest::prop_oneof;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn f(s: &str) -> Formula {
    parse_formula(s, &Signature::standard()).unwrap()
}

/// `n` deterministic samples of a strategy.
fn samples<S: Strategy>(s: S, n: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..n).map(|_| s.new_tree(&mut runner).unwrap().current()).collect()
}

fn timed(limit: Option<Duration>, run: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = run();
    let took = start.elapsed();
    v.detail = format!("{}; {:.2} s", v.detail, took.as_secs_f64());
    if let Some(l) = limit {
        if took >= l {
            v.ok = false;
            v.detail = format!("{} (limit {} s)", v.detail, l.as_secs());
        }
    }
    v
}

fn c1() -> Verdict {
    let r = run_suite(&Bounds::default());
    let fails: Vec<String> = r.failures().iter().map(|c| format!("{}/{}", c.case, c.key)).collect();
    let ok = r.all_pass() && !r.checks.is_empty();
    verdict(ok, format!("{} checks, {} fail, {} weaker {:?}", r.checks.len(), fails.len(), r.weaker().len(), fails))
}

fn c2() -> Verdict {
    let x = FoTerm::var("x");
    let types = [nat_type(&x), bool_type(&x), list_type(&nat_type(&FoTerm::var("y")), "y", &x)];
    let yes = types.iter().filter(|t| classify(t, &Theory::empty(), &Bounds::default()).b_plus == BPlus::Yes).count();
    verdict(yes == 3, format!("{yes}/3 bPlus Yes"))
}

fn c3() -> Verdict {
    let b = Bounds::default();
    let adequate = is_adequate(&Theory::pred(), &b) == Adequacy::Adequate;
    let defines = defines_function(&FunctionSpec::pred(8), &b).is_ok();
    let rows = match programming_theorem_check(&succ_derivation(), &FunctionSpec::succ(10), &b) {
        ProgThm::Checked(r) if r.all_pass() => r.rows.len(),
        _ => 0,
    };
    let decoded = (0..=10).all(|n| {
        let out = normalize(&Term::app(succ_program(), church(n)), &b);
        out.normal().and_then(decode_church) == Some(n + 1)
    });
    let ok = adequate && defines && rows == 11 && decoded;
    verdict(ok, format!("adequate {adequate}, defines p {defines}, represents rows passed {rows}/11, decode n+1 {decoded}"))
}

/// Closed term/type pairs: the bundled cases plus numerals and small combinators.
fn typing_pairs() -> Vec<(Term, Formula, Theory)> {
    let mut out = Vec::new();
    for c in parse_cases(BUNDLED_CASES).unwrap() {
        if let (Some(t), Some(a)) = (c.term, c.ty) {
            out.push((t, a, c.theory));
        }
    }
    for k in 0..=8 {
        out.push((church(k), nat_type(&FoTerm::numeral(k)), Theory::empty()));
    }
    let extra = [
        ("\\x. x", "forall X/0. X -> X"),
        ("\\x y. x", "forall X/0. forall Y/0. X -> Y -> X"),
        ("\\x y. x", "forall X/1. X(0) -> X(1) -> X(0)"),
        ("\\x y. y", "forall X/1. X(0) -> X(1) -> X(1)"),
        ("\\x f. f (f x)", "forall X/1. X(0) -> (forall y. X(y) -> X(s(y))) -> X(s(s(0)))"),
        ("\\f x. f x", "forall X/0. forall Y/0. (X -> Y) -> X -> Y"),
        ("\\x. x", "forall X/1. (forall y. X(y)) -> forall y. X(y)"),
    ];
    for (t, a) in extra {
        out.push((parse_term(t).unwrap(), f(a), Theory::empty()));
    }
    out
}

fn c4() -> Verdict {
    let b = Bounds::default();
    let (mut eligible, mut bad) = (0, Vec::new());
    for (t, a, th) in typing_pairs() {
        if !t.is_beta_normal() || !t.free_vars().is_empty() || !classify_quant2(&a).is_pos() {
            continue;
        }
        let Some(d) = infer_normal(&Context::new(), &t, &a, &th, InferMode::Af2Bounded, &b).derivation().cloned() else {
            continue;
        };
        eligible += 1;
        let zero = infer_normal(&Context::new(), &t, &a, &th, InferMode::Af2Zero, &b);
        let ok = check_derivation(&d, &th, Mode::Af2).is_ok()
            && zero.derivation().is_some_and(|z| check_derivation(z, &th, Mode::Af2Zero).is_ok());
        if !ok {
            bad.push(format!("{t} : {a}"));
        }
    }
    verdict(eligible > 0 && bad.is_empty(), format!("{eligible} eligible pairs, {} discrepancies {bad:?}", bad.len()))
}

/// `⊢ (λx x) t : A` from `⊢ t : A`.
fn apply_identity(d: &Derivation) -> Derivation {
    let a = d.ty.clone();
    let leaf = Derivation::leaf(d.ctx.with("x", a.clone()), "x", a.clone());
    let id = Derivation::node(Rule::R2, d.ctx.clone(), identity(), Formula::arrow(a.clone(), a.clone()), Payload::Var("x".into()), vec![leaf]);
    Derivation::node(Rule::R3, d.ctx.clone(), Term::app(identity(), d.term.clone()), a, Payload::None, vec![id, d.clone()])
}

/// `⊢ (succ) t : N[s(k)]` from `⊢ t : N[k]`.
fn apply_succ(d: &Derivation, k: usize) -> Derivation {
    let s = succ_derivation();
    let n = FoTerm::numeral(k);
    let inst = Derivation::node(
        Rule::R5,
        Context::new(),
        s.term.clone(),
        Formula::arrow(nat_type(&n), nat_type(&FoTerm::numeral(k + 1))),
        Payload::Term(n),
        vec![s.clone()],
    );
    Derivation::node(Rule::R3, Context::new(), Term::app(s.term, d.term.clone()), nat_type(&FoTerm::numeral(k + 1)), Payload::None, vec![inst, d.clone()])
}

fn derivation_corpus() -> Vec<(Derivation, Theory)> {
    let b = Bounds::default();
    let mut out: Vec<(Derivation, Theory)> = Vec::new();
    for (t, a, th) in typing_pairs() {
        if !t.is_beta_normal() {
            continue;
        }
        if let Some(d) = infer_normal(&Context::new(), &t, &a, &th, InferMode::Af2Bounded, &b).derivation() {
            out.push((d.clone(), th));
        }
    }
    out.push((succ_derivation(), Theory::empty()));
    let mut num = zero_derivation();
    out.push((num.clone(), Theory::empty()));
    for k in 0..3 {
        num = apply_succ(&num, k);
        out.push((num.clone(), Theory::empty()));
    }
    let wrapped: Vec<(Derivation, Theory)> = out.iter().map(|(d, th)| (apply_identity(d), th.clone())).collect();
    out.extend(wrapped);
    out
}

fn c5() -> Verdict {
    let (mut steps, mut failures, mut checked) = (0usize, Vec::new(), 0usize);
    for (d, th) in derivation_corpus() {
        if check_derivation(&d, &th, Mode::Af2).is_err() {
            continue;
        }
        checked += 1;
        // Every β-step of the subject, then onward from each reduct.
        let mut work = vec![d];
        let mut budget = 200;
        while let Some(cur) = work.pop() {
            for p in cur.term.redexes(RedexKind::Beta) {
                steps += 1;
                let want = cur.term.contract(RedexKind::Beta, &p).unwrap();
                match subject_reduce(&cur, &p) {
                    Ok(r) if r.term == want && r.ty.alpha_eq(&cur.ty) && check_derivation(&r, &th, Mode::Af2).is_ok() => {
                        if budget > 0 {
                            budget -= 1;
                            work.push(r);
                        }
                    }
                    Ok(_) => failures.push(format!("{} at {p:?}: wrong or unchecked reduct", cur.term)),
                    Err(e) => failures.push(format!("{} at {p:?}: {e}", cur.term)),
                }
            }
        }
    }
    verdict(steps > 0 && failures.is_empty(), format!("{checked} derivations, {steps} beta-steps, {} failures {failures:?}", failures.len()))
}

fn c6() -> Verdict {
    let eta_expanded = term_up_to(9).prop_map(|t| Term::lam("z", Term::app(t, Term::var("z"))));
    let terms = samples(prop_oneof![term_up_to(12), eta_expanded], 500);
    let mut rng = StdRng::seed_from_u64(7);
    let (mut failures, mut mixed, mut reordered) = (0, 0, 0);
    for t in &terms {
        let n = rng.gen_range(1..=6);
        let mut steps = Vec::new();
        let mut cur = t.clone();
        for _ in 0..n {
            // Pick the kind first so that η-steps are not drowned out by β-steps.
            let (beta, eta) = (cur.redexes(RedexKind::Beta), cur.redexes(RedexKind::Eta));
            let (kind, mut paths) = match (beta.is_empty(), eta.is_empty()) {
                (true, true) => break,
                (false, true) => (RedexKind::Beta, beta),
                (true, false) => (RedexKind::Eta, eta),
                (false, false) if rng.gen_bool(0.5) => (RedexKind::Beta, beta),
                _ => (RedexKind::Eta, eta),
            };
            let s = TraceStep { kind, path: paths.swap_remove(rng.gen_range(0..paths.len())) };
            cur = cur.contract(s.kind, &s.path).unwrap();
            steps.push(s);
        }
        let tr = ReductionTrace::from_steps(t.clone(), steps).unwrap();
        if tr.steps.iter().any(|s| s.kind == RedexKind::Eta) && tr.steps.iter().any(|s| s.kind == RedexKind::Beta) {
            mixed += 1;
        }
        if !tr.is_postponed() {
            reordered += 1;
        }
        match postpone_eta(&tr, &Bounds::default()) {
            Ok(out) if out.is_postponed() && out.validate().is_ok() && out.start == tr.start && out.end == tr.end => {}
            _ => failures += 1,
        }
    }
    let ok = terms.len() >= 500 && terms.iter().all(|t| t.size() <= 12) && failures == 0;
    verdict(ok, format!("{} traces ({mixed} mixed, {reordered} needing reordering), {failures} failures", terms.len()))
}

const CONFIGS: [&str; 4] = [
    "base a b\nsize-bound 5\nstep-bound 4\nfamily-limit 6\ninterp 0: -> a\ninterp s: a -> b, b -> a\nterm \\x. x\nterm y\nset Y = terms y",
    "base a b\nfamily-limit 6\ninterp 0: -> a\ninterp s: a -> b, b -> b\nterm \\x. x\nset E = terms",
    "base a\nsize-bound 5\nfamily-limit 6\ninterp 0: -> a\ninterp s: a -> a\nterm \\x f. f x\nterm \\x f. x\nterm y\nset Y = terms y",
    "base a b\nsize-bound 6\nfamily-limit 6\ninterp 0: -> a\ninterp s: a -> b, b -> b\nterm \\x f. x\nterm \\x f. f x\nset E = terms",
];

fn c7() -> Verdict {
    let formulas: Vec<Formula> = samples(formula(3), 400).into_iter().filter(|a| a.size() <= 8).take(30).collect();
    let fo_terms = [FoTerm::cst("0"), FoTerm::app("s", vec![FoTerm::var("y")])];
    let gs = ["X(s(x))", "Y -> X(x)", "forall y. X(y)", "forall Y/0. Y -> X(x)"].map(f);
    let fo: Vec<String> = vec!["x".into(), "y".into()];
    let rel = vec![("X".to_string(), 1), ("Y".to_string(), 0)];
    let closed: Vec<Derivation> = derivation_corpus().into_iter().map(|(d, _)| d).filter(|d| d.ctx.0.is_empty()).collect();
    let (mut l22, mut l23, mut skipped) = (0usize, 0usize, 0usize);
    let (mut spots, mut passes, mut outside) = (0usize, 0usize, 0usize);
    let mut problems = Vec::new();
    for (k, src) in CONFIGS.iter().enumerate() {
        let m = parse_config(src).unwrap().build().unwrap();
        if m.base.len() > 2 || m.family.len() > 6 {
            problems.push(format!("config {k} exceeds the size limits"));
        }
        let interps = m.interpretations(&fo, &rel);
        for a in &formulas {
            for i in &interps {
                for x in ["x", "y"] {
                    for t in &fo_terms {
                        l22 += 1;
                        if check_lemma_2_2(&m, i, a, x, t) != Ok(true) {
                            problems.push(format!("config {k}: substitution of {t} for {x} in {a}"));
                        }
                    }
                }
                for g in &gs {
                    l23 += 1;
                    match check_lemma_2_3(&m, i, a, "X", &["x".to_string()], g) {
                        Ok(LemmaOutcome::Holds) => {}
                        Ok(LemmaOutcome::Skipped) => skipped += 1,
                        other => problems.push(format!("config {k}: {g} for X in {a}: {other:?}")),
                    }
                }
            }
        }
        for d in &closed {
            spots += 1;
            match adequacy_spot(&m, d) {
                Spot::Fail(e) => problems.push(format!("config {k}: adequacy fails for {}: {e}", d.term)),
                Spot::Pass => passes += 1,
                Spot::OutOfUniverse(_) => outside += 1,
                Spot::Precondition(_) => {}
            }
        }
    }
    problems.truncate(5);
    verdict(
        problems.is_empty(),
        format!(
            "{} configs, {} formulas, {l22} term-substitution and {l23} formula-substitution instances ({skipped} skipped), {spots} adequacy spots ({passes} pass, {outside} out of universe, {} unmet preconditions, 0 fail) {problems:?}",
            CONFIGS.len(),
            formulas.len(),
            spots - passes - outside,
        ),
    )
}

fn c8() -> Verdict {
    let b = Bounds::default();
    let terms = samples(term_up_to(15), 500);
    let mut fv_bad = 0;
    for t in &terms {
        let fv = t.free_vars();
        for p in t.redexes(RedexKind::Beta) {
            fv_bad += usize::from(!t.contract(RedexKind::Beta, &p).unwrap().free_vars().is_subset(&fv));
        }
        for p in t.redexes(RedexKind::Eta) {
            fv_bad += usize::from(t.contract(RedexKind::Eta, &p).unwrap().free_vars() != fv);
        }
    }
    let round = (0..=50).all(|k| decode_church(&church(k)) == Some(k));
    let (a, g) = (Term::var("a"), Term::var("g"));
    let iter = (0..=10).all(|k| normalize(&Term::apps(church(k), [a.clone(), g.clone()]), &b).normal() == Some(&iterate(&g, k, a.clone())));
    verdict(fv_bad == 0 && round && iter, format!("Fv laws on {} terms ({fv_bad} violations), round trip k<=50 {round}, iteration k<=10 {iter}", terms.len()))
}

fn main() {
    let s = Duration::from_secs;
    let criteria: [(&str, Option<Duration>, fn() -> Verdict); 8] = [
        ("counterexample suite", Some(s(60)), c1),
        ("data types are good positive", Some(s(10)), c2),
        ("programming theorem on successor", Some(s(5)), c3),
        ("AF2_0 agrees on forall2+ goals", None, c4),
        ("subject reduction", None, c5),
        ("eta postponement", None, c6),
        ("substitution lemmas and adequacy at finite scale", Some(s(120)), c7),
        ("lambda-calculus laws", Some(s(5)), c8),
    ];
    let mut failed = 0;
    for (n, (name, limit, run)) in criteria.into_iter().enumerate() {
        let v = timed(limit, run);
        println!("{} {} {name}: {}", if v.ok { "PASS" } else { "FAIL" }, n + 1, v.detail);
        failed += usize::from(!v.ok);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
