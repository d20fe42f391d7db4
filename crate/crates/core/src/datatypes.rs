//! Church data types, adequate equation systems and the programming theorem
//! harness.

use std::fmt;

use crate::bounds::Bounds;
use crate::lambda::{decode_church, church, normalize, Normalization, Term};
use crate::logic::{approx_e, Closure, Congruence, FoTerm, Formula, Theory};
use crate::syntax::{parse_theory_items, ParseError, Parser, Tok};
use crate::typing::{check_derivation, Context, Derivation, Mode, Payload, Rule};

fn x_var() -> FoTerm {
    FoTerm::var("x")
}

/// `N[x] = ∀X{X0 → [∀y(Xy → Xsy) → Xx]}`.
pub fn nat_type(x: &FoTerm) -> Formula {
    let xa = |t: FoTerm| Formula::atom("X", vec![t]);
    let step = Formula::forall_fo(
        "y",
        Formula::arrow(xa(FoTerm::var("y")), xa(FoTerm::app("s", vec![FoTerm::var("y")]))),
    );
    let body = Formula::arrows([xa(FoTerm::cst("0")), step], xa(x_var()));
    Formula::forall_rel("X", 1, body).fo_subst(&[("x".into(), x.clone())])
}

/// `B[x] = ∀X{X0 → (X1 → Xx)}`.
pub fn bool_type(x: &FoTerm) -> Formula {
    let xa = |t: FoTerm| Formula::atom("X", vec![t]);
    let body = Formula::arrows([xa(FoTerm::cst("0")), xa(FoTerm::cst("1"))], xa(x_var()));
    Formula::forall_rel("X", 1, body).fo_subst(&[("x".into(), x.clone())])
}

/// `LU[x] = ∀X{X(nil) → [∀y∀z(U[y] → (Xz → X(cons(y, z)))) → Xx]}`, where
/// `U[y]` is `u` with its variable `uvar` replaced by `y`.
pub fn list_type(u: &Formula, uvar: &str, x: &FoTerm) -> Formula {
    let xa = |t: FoTerm| Formula::atom("X", vec![t]);
    let uy = u.fo_subst(&[(uvar.to_string(), FoTerm::var("y"))]);
    let cons = FoTerm::app("cons", vec![FoTerm::var("y"), FoTerm::var("z")]);
    let step = Formula::forall_fo("y", Formula::forall_fo("z", Formula::arrows([uy, xa(FoTerm::var("z"))], xa(cons))));
    let body = Formula::arrows([xa(FoTerm::cst("nil")), step], xa(x_var()));
    Formula::forall_rel("X", 1, body).fo_subst(&[("x".into(), x.clone())])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Adequacy {
    Adequate,
    /// `s(a) ≈ 0`, or `s(a) ≈ s(b)` with `a`, `b` apart.
    Inadequate { left: FoTerm, right: FoTerm, reason: String },
    UnknownWithinBounds(String),
}

impl fmt::Display for Adequacy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Adequacy::Adequate => write!(f, "adequate (within bounds)"),
            Adequacy::Inadequate { left, right, reason } => write!(f, "inadequate: {left} = {right} ({reason})"),
            Adequacy::UnknownWithinBounds(why) => write!(f, "unknown within bounds: {why}"),
        }
    }
}

/// Ground terms over `syms` (name, arity) of depth at most `depth`.
fn ground_terms(syms: &[(String, usize)], depth: usize) -> Vec<FoTerm> {
    let mut levels: Vec<FoTerm> = Vec::new();
    for _ in 0..depth {
        let mut next: Vec<FoTerm> = Vec::new();
        for (f, n) in syms {
            let mut tuples: Vec<Vec<FoTerm>> = vec![Vec::new()];
            for _ in 0..*n {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        levels.iter().map(move |a| {
                            let mut t2 = t.clone();
                            t2.push(a.clone());
                            t2
                        })
                    })
                    .collect();
            }
            for args in tuples {
                let t = FoTerm::App(f.clone(), args);
                if !next.contains(&t) {
                    next.push(t);
                }
            }
        }
        levels = next;
    }
    levels
}

/// Bounded adequacy check. The universe is the ground terms of depth at most
/// `max_inst_depth + 2` over `0`, `s` and the symbols of the equations, closed
/// under `max_congr_depth` rounds of rewriting.
pub fn is_adequate(th: &Theory, bounds: &Bounds) -> Adequacy {
    if th.sig.funs.get("0") != Some(&0) || th.sig.funs.get("s") != Some(&1) {
        return Adequacy::UnknownWithinBounds("0/0 and s/1 must be declared".into());
    }
    let mut syms: Vec<(String, usize)> = vec![("0".into(), 0), ("s".into(), 1)];
    for e in &th.equations {
        for t in [&e.lhs, &e.rhs] {
            for (_, sub) in t.positions() {
                if let FoTerm::App(f, args) = sub {
                    let k = (f.clone(), args.len());
                    if !syms.contains(&k) {
                        syms.push(k);
                    }
                }
            }
        }
    }
    let depth = bounds.max_inst_depth + 2;
    let seeds = ground_terms(&syms, depth);
    let mut c = Closure::build(&seeds, th, depth + bounds.max_inst_depth, bounds.max_congr_depth);
    let zero = FoTerm::cst("0");
    let terms: Vec<FoTerm> = c.terms().to_vec();
    let succs: Vec<&FoTerm> = terms.iter().filter(|t| matches!(t, FoTerm::App(f, a) if f == "s" && a.len() == 1)).collect();
    for t in &succs {
        if c.same(t, &zero) == Some(true) {
            return Adequacy::Inadequate { left: (*t).clone(), right: zero, reason: "successor equal to 0".into() };
        }
    }
    for (i, t) in succs.iter().enumerate() {
        for u in &succs[i + 1..] {
            if c.same(t, u) == Some(true) {
                let (FoTerm::App(_, a), FoTerm::App(_, b)) = (t, u) else { continue };
                if c.same(&a[0], &b[0]) == Some(false) {
                    return Adequacy::Inadequate {
                        left: (*t).clone(),
                        right: (*u).clone(),
                        reason: format!("s is not injective: {} and {} are apart", a[0], b[0]),
                    };
                }
            }
        }
    }
    Adequacy::Adequate
}

/// A function symbol with ground-truth values on numerals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSpec {
    pub name: String,
    pub arity: usize,
    pub theory: Theory,
    pub table: Vec<(Vec<usize>, usize)>,
}

impl FunctionSpec {
    /// The pred spec: `p(n) = max(n - 1, 0)` for `n ≤ up_to`.
    pub fn pred(up_to: usize) -> FunctionSpec {
        FunctionSpec {
            name: "p".into(),
            arity: 1,
            theory: Theory::pred(),
            table: (0..=up_to).map(|n| (vec![n], n.saturating_sub(1))).collect(),
        }
    }

    /// Successor as a defined function: `s` itself, no equations needed.
    pub fn succ(up_to: usize) -> FunctionSpec {
        FunctionSpec { name: "s".into(), arity: 1, theory: Theory::pred(), table: (0..=up_to).map(|n| (vec![n], n + 1)).collect() }
    }

    fn applied(&self, args: &[FoTerm]) -> FoTerm {
        FoTerm::app(&self.name, args.to_vec())
    }

    /// `∀x1...∀xk {N[x1] → ... → N[xk] → N[f(x1, ..., xk)]}`.
    pub fn totality_type(&self) -> Formula {
        let xs: Vec<String> = (1..=self.arity).map(|i| format!("x{i}")).collect();
        let vars: Vec<FoTerm> = xs.iter().map(|x| FoTerm::var(x)).collect();
        let mut f = Formula::arrows(vars.iter().map(nat_type).collect::<Vec<_>>(), nat_type(&self.applied(&vars)));
        for x in xs.iter().rev() {
            f = Formula::forall_fo(x, f);
        }
        f
    }
}

/// Rows whose equation `f(n1..nk) ≈ s^m(0)` is not confirmed.
pub fn defines_function(spec: &FunctionSpec, bounds: &Bounds) -> Result<(), Vec<Vec<usize>>> {
    let bad: Vec<Vec<usize>> = spec
        .table
        .iter()
        .filter(|(ins, out)| {
            let lhs = spec.applied(&ins.iter().map(|n| FoTerm::numeral(*n)).collect::<Vec<_>>());
            approx_e(&lhs, &FoTerm::numeral(*out), &spec.theory, bounds) != Congruence::Equal
        })
        .map(|(ins, _)| ins.clone())
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowOutcome {
    Pass,
    /// Normal form reached; its numeral value if it is one.
    Fail(Option<usize>),
    StepBound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub inputs: Vec<usize>,
    pub expected: usize,
    pub outcome: RowOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.outcome == RowOutcome::Pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let ins: Vec<String> = r.inputs.iter().map(|n| n.to_string()).collect();
            let out = match &r.outcome {
                RowOutcome::Pass => "pass".to_string(),
                RowOutcome::Fail(Some(k)) => format!("fail (got {k})"),
                RowOutcome::Fail(None) => "fail (not a numeral)".to_string(),
                RowOutcome::StepBound => "step bound".to_string(),
            };
            writeln!(f, "({}) expected {}: {}", ins.join(", "), r.expected, out)?;
        }
        Ok(())
    }
}

/// Normalizes `(P) n1 ... nk` for every table row and decodes the result.
pub fn represents(p: &Term, spec: &FunctionSpec, bounds: &Bounds) -> Report {
    let rows = spec
        .table
        .iter()
        .map(|(ins, out)| {
            let t = Term::apps(p.clone(), ins.iter().map(|n| church(*n)));
            let outcome = match normalize(&t, bounds) {
                Normalization::Normal { term, .. } => match decode_church(&term) {
                    Some(k) if k == *out => RowOutcome::Pass,
                    other => RowOutcome::Fail(other),
                },
                _ => RowOutcome::StepBound,
            };
            Row { inputs: ins.clone(), expected: *out, outcome }
        })
        .collect();
    Report { rows }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProgThm {
    /// All preconditions hold; the report is expected to be all-pass.
    Checked(Report),
    Preconditions(Vec<String>),
}

/// Runs the programming theorem on a derivation of the totality statement.
pub fn programming_theorem_check(d: &Derivation, spec: &FunctionSpec, bounds: &Bounds) -> ProgThm {
    let mut errs = Vec::new();
    if !d.ctx.0.is_empty() {
        errs.push("the derivation has a nonempty context".to_string());
    }
    let want = spec.totality_type();
    if !d.ty.alpha_eq(&want) {
        errs.push(format!("the derivation concludes {}, expected {want}", d.ty));
    }
    if let Err(r) = check_derivation(d, &spec.theory, Mode::Af2) {
        errs.push(format!("the derivation does not check: {r}"));
    }
    match is_adequate(&spec.theory, bounds) {
        Adequacy::Adequate => {}
        other => errs.push(format!("the theory is not adequate: {other}")),
    }
    if let Err(rows) = defines_function(spec, bounds) {
        errs.push(format!("the equations do not define the table on {rows:?}"));
    }
    if errs.is_empty() {
        ProgThm::Checked(represents(&d.term, spec, bounds))
    } else {
        ProgThm::Preconditions(errs)
    }
}

/// Function table file: theory declarations plus rows `table f(2) = 1.`.
pub fn parse_spec(src: &str) -> Result<FunctionSpec, ParseError> {
    let empty = crate::logic::Signature::default();
    let mut p = Parser::new(src, &empty)?;
    let mut th = Theory::default();
    let mut table = Vec::new();
    let mut name: Option<(String, usize)> = None;
    loop {
        parse_theory_items(&mut p, &mut th)?;
        if !p.is_keyword("table") {
            break;
        }
        p.bump();
        let (line, col) = p.here();
        let f = p.ident()?;
        p.expect(&Tok::Open('('))?;
        let mut ins = Vec::new();
        if !p.eat(&Tok::Close(')')) {
            loop {
                ins.push(p.number()?);
                if p.eat(&Tok::Close(')')) {
                    break;
                }
                p.expect(&Tok::Comma)?;
            }
        }
        p.expect(&Tok::Eq)?;
        let out = p.number()?;
        p.expect(&Tok::Dot)?;
        match &name {
            None => name = Some((f.clone(), ins.len())),
            Some((g, k)) if *g == f && *k == ins.len() => {}
            Some((g, k)) => return Err(ParseError { line, col, msg: format!("table rows must all use {g}/{k}") }),
        }
        if th.sig.funs.get(&f) != Some(&ins.len()) {
            return Err(ParseError { line, col, msg: format!("{f}/{} is not a declared function symbol", ins.len()) });
        }
        table.push((ins, out));
    }
    p.expect_end()?;
    let (name, arity) = name.unwrap_or_default();
    Ok(FunctionSpec { name, arity, theory: th, table })
}

/// The successor program `λnλxλf (f)((n)x)f`.
pub fn succ_program() -> Term {
    let v = Term::var;
    Term::lam("n", Term::lam("a", Term::lam("f", Term::app(v("f"), Term::apps(v("n"), [v("a"), v("f")])))))
}

/// Derivation of `⊢ λnλxλf (f)((n)x)f : ∀x{N[x] → N[s(x)]}`, written out
/// rule by rule.
pub fn succ_derivation() -> Derivation {
    let x = FoTerm::var("x");
    let sx = FoTerm::app("s", vec![x.clone()]);
    let xa = |t: FoTerm| Formula::atom("X", vec![t]);
    let step = Formula::forall_fo("y", Formula::arrow(xa(FoTerm::var("y")), xa(FoTerm::app("s", vec![FoTerm::var("y")]))));
    let nx = nat_type(&x);
    let v = Term::var;

    let g0 = Context(vec![("n".into(), nx.clone())]);
    let g1 = g0.with("a", xa(FoTerm::cst("0")));
    let g2 = g1.with("f", step.clone());

    let mk = |rule, ctx: &Context, term: Term, ty: Formula, payload, premises| Derivation {
        rule,
        ctx: ctx.clone(),
        term,
        ty,
        payload,
        premises,
    };
    // n : X0 → ∀y(Xy → Xsy) → Xx, instantiating N[x] at X itself.
    let n_leaf = Derivation::leaf(g2.clone(), "n", nx.clone());
    let n_inst = mk(
        Rule::R7,
        &g2,
        v("n"),
        Formula::arrows([xa(FoTerm::cst("0")), step.clone()], xa(x.clone())),
        Payload::RelInst { var: "X".into(), params: vec!["x1".into()], formula: xa(FoTerm::var("x1")) },
        vec![n_leaf],
    );
    let a_leaf = Derivation::leaf(g2.clone(), "a", xa(FoTerm::cst("0")));
    let na = mk(Rule::R3, &g2, Term::app(v("n"), v("a")), Formula::arrow(step.clone(), xa(x.clone())), Payload::None, vec![n_inst, a_leaf]);
    let f_leaf = Derivation::leaf(g2.clone(), "f", step.clone());
    let naf = mk(Rule::R3, &g2, Term::apps(v("n"), [v("a"), v("f")]), xa(x.clone()), Payload::None, vec![na, f_leaf.clone()]);
    let f_inst = mk(Rule::R5, &g2, v("f"), Formula::arrow(xa(x.clone()), xa(sx.clone())), Payload::Term(x.clone()), vec![f_leaf]);
    let body_term = Term::app(v("f"), Term::apps(v("n"), [v("a"), v("f")]));
    let body = mk(Rule::R3, &g2, body_term.clone(), xa(sx.clone()), Payload::None, vec![f_inst, naf]);
    let lam_f_term = Term::lam("f", body_term);
    let lam_f = mk(Rule::R2, &g1, lam_f_term.clone(), Formula::arrow(step.clone(), xa(sx.clone())), Payload::Var("f".into()), vec![body]);
    let lam_a_term = Term::lam("a", lam_f_term);
    let inner = Formula::arrows([xa(FoTerm::cst("0")), step], xa(sx.clone()));
    let lam_a = mk(Rule::R2, &g0, lam_a_term.clone(), inner.clone(), Payload::Var("a".into()), vec![lam_f]);
    let gen_x = mk(Rule::R6, &g0, lam_a_term.clone(), Formula::forall_rel("X", 1, inner), Payload::None, vec![lam_a]);
    let empty = Context::new();
    let prog = succ_program();
    let lam_n = mk(Rule::R2, &empty, prog.clone(), Formula::arrow(nx, nat_type(&sx)), Payload::Var("n".into()), vec![gen_x]);
    mk(
        Rule::R4,
        &empty,
        prog,
        Formula::forall_fo("x", Formula::arrow(nat_type(&x), nat_type(&sx))),
        Payload::None,
        vec![lam_n],
    )
}

/// `⊢ 0̲ : N[0]` by R1, R2 twice and R6.
pub fn zero_derivation() -> Derivation {
    let xa = |t: FoTerm| Formula::atom("X", vec![t]);
    let zero = FoTerm::cst("0");
    let step = Formula::forall_fo("y", Formula::arrow(xa(FoTerm::var("y")), xa(FoTerm::app("s", vec![FoTerm::var("y")]))));
    let g1 = Context(vec![("x".into(), xa(zero.clone()))]);
    let g2 = g1.with("f", step.clone());
    let leaf = Derivation::leaf(g2, "x", xa(zero.clone()));
    let t1 = Term::lam("f", Term::var("x"));
    let d1 = Derivation::node(Rule::R2, g1, t1.clone(), Formula::arrow(step.clone(), xa(zero.clone())), Payload::Var("f".into()), vec![leaf]);
    let t0 = Term::lam("x", t1);
    let body = Formula::arrows([xa(zero.clone()), step], xa(zero.clone()));
    let d0 = Derivation::node(Rule::R2, Context::new(), t0.clone(), body.clone(), Payload::Var("x".into()), vec![d1]);
    Derivation::node(Rule::R6, Context::new(), t0, Formula::forall_rel("X", 1, body), Payload::None, vec![d0])
}
