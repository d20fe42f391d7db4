//! AF2 / AF2₀ judgments: contexts, derivation trees and their checker.

use std::collections::BTreeSet;
use std::fmt;

use crate::lambda::Term;
use crate::logic::{eq_instance, FoTerm, Formula, Head, Theory};

pub mod chain;
pub mod format;
pub mod generation;
pub mod infer;
pub mod transform;
pub(crate) mod unify;

pub use chain::{leq, sim, ChainStep, InstChain};
pub use generation::{generation, Decomposition, Segment};
pub use infer::{infer_normal, InferMode, InferResult};
pub use format::{parse_derivation, print_derivation, FormatError};
pub use transform::{af2_0_to_af2, strengthen, subject_reduce, transport_eq, weaken, ReduceError, TransportError};

/// Ordered λ-variable declarations. Order only matters for printing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context(pub Vec<(String, Formula)>);

impl Context {
    pub fn new() -> Context {
        Context(Vec::new())
    }

    pub fn get(&self, x: &str) -> Option<&Formula> {
        self.0.iter().find(|(y, _)| y == x).map(|(_, a)| a)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.get(x).is_some()
    }

    pub fn with(&self, x: &str, a: Formula) -> Context {
        let mut c = self.clone();
        c.0.push((x.to_string(), a));
        c
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.0.iter().map(|(x, _)| x)
    }

    pub fn has_fo_free(&self, x: &str) -> bool {
        self.0.iter().any(|(_, a)| a.has_fo_free(x))
    }

    pub fn has_rel_free(&self, x: &str, n: usize) -> bool {
        self.0.iter().any(|(_, a)| a.has_rel_free(x, n))
    }

    /// Same declarations up to order and α-equivalence of types.
    pub fn same_as(&self, other: &Context) -> bool {
        self.0.len() == other.0.len() && self.0.iter().all(|(x, a)| other.get(x).is_some_and(|b| a.alpha_eq(b)))
    }

    pub fn restrict(&self, keep: &dyn Fn(&str) -> bool) -> Context {
        Context(self.0.iter().filter(|(x, _)| keep(x)).cloned().collect())
    }

    pub fn map_types(&self, f: &dyn Fn(&Formula) -> Formula) -> Context {
        Context(self.0.iter().map(|(x, a)| (x.clone(), f(a))).collect())
    }

    pub fn names(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        for (x, a) in &self.0 {
            s.insert(x.clone());
            a.all_names(&mut s);
        }
        s
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, a)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x} : {a}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R7o,
    R8,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
            Rule::R4 => "R4",
            Rule::R5 => "R5",
            Rule::R6 => "R6",
            Rule::R7 => "R7",
            Rule::R7o => "R7_0",
            Rule::R8 => "R8",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Some(match s {
            "R1" => Rule::R1,
            "R2" => Rule::R2,
            "R3" => Rule::R3,
            "R4" => Rule::R4,
            "R5" => Rule::R5,
            "R6" => Rule::R6,
            "R7" => Rule::R7,
            "R7_0" => Rule::R7o,
            "R8" => Rule::R8,
            _ => return None,
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    None,
    /// R2: the λ-variable declared in the premise.
    Var(String),
    /// R5: instantiation term.
    Term(FoTerm),
    /// R7: `A[F/X(params)]`.
    RelInst { var: String, params: Vec<String>, formula: Formula },
    /// R7₀: `A[Y/X]` for a relation variable or symbol `Y` of the same arity.
    RelRename { var: String, rel: Head },
    /// R8: premise type `template[from/var]`, conclusion `template[to/var]`.
    Eq { template: Formula, var: String, from: FoTerm, to: FoTerm },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub ctx: Context,
    pub term: Term,
    pub ty: Formula,
    pub payload: Payload,
    pub premises: Vec<Derivation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Af2,
    Af2Zero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    /// Side condition (*): generalized variable free in the context.
    Freshness(String),
    /// Side condition (**): instantiation is not a well-formed term or formula.
    WellFormed(String),
    /// Side condition (***): not an instance of an equation.
    NotEquationInstance(String),
    /// Rule R7 used in AF2₀ mode.
    Mode(String),
    /// Premises, conclusion or payload do not fit the rule.
    Shape(String),
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::Freshness(s) => write!(f, "side condition (*): {s}"),
            Reason::WellFormed(s) => write!(f, "side condition (**): {s}"),
            Reason::NotEquationInstance(s) => write!(f, "side condition (***): {s}"),
            Reason::Mode(s) => write!(f, "mode: {s}"),
            Reason::Shape(s) => write!(f, "shape: {s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    /// Premise indices from the root to the failing node.
    pub path: Vec<usize>,
    pub rule: Rule,
    pub reason: Reason,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(f, "node [{}] ({}): {}", p.join("."), self.rule, self.reason)
    }
}

impl Derivation {
    pub fn leaf(ctx: Context, x: &str, ty: Formula) -> Derivation {
        Derivation { rule: Rule::R1, ctx, term: Term::var(x), ty, payload: Payload::None, premises: Vec::new() }
    }

    pub fn node(rule: Rule, ctx: Context, term: Term, ty: Formula, payload: Payload, premises: Vec<Derivation>) -> Derivation {
        Derivation { rule, ctx, term, ty, payload, premises }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn uses_rule(&self, r: Rule) -> bool {
        self.rule == r || self.premises.iter().any(|p| p.uses_rule(r))
    }

    /// Every name occurring anywhere in the tree.
    pub fn names(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_names(&mut s);
        s
    }

    fn collect_names(&self, s: &mut BTreeSet<String>) {
        s.extend(self.ctx.names());
        s.extend(self.term.free_vars());
        self.ty.all_names(s);
        match &self.payload {
            Payload::None => {}
            Payload::Var(x) => {
                s.insert(x.clone());
            }
            Payload::Term(u) => {
                s.extend(u.vars());
            }
            Payload::RelInst { var, params, formula } => {
                s.insert(var.clone());
                s.extend(params.iter().cloned());
                formula.all_names(s);
            }
            Payload::RelRename { var, rel } => {
                s.insert(var.clone());
                s.insert(rel.name().to_string());
            }
            Payload::Eq { template, var, from, to } => {
                template.all_names(s);
                s.insert(var.clone());
                s.extend(from.vars());
                s.extend(to.vars());
            }
        }
        for p in &self.premises {
            p.collect_names(s);
        }
    }
}

/// Checks every node against its rule, side conditions included.
pub fn check_derivation(d: &Derivation, th: &Theory, mode: Mode) -> Result<(), Rejection> {
    let mut path = Vec::new();
    check_node(d, th, mode, &mut path)
}

fn check_node(d: &Derivation, th: &Theory, mode: Mode, path: &mut Vec<usize>) -> Result<(), Rejection> {
    if let Err(reason) = check_local(d, th, mode) {
        return Err(Rejection { path: path.clone(), rule: d.rule, reason });
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_node(p, th, mode, path)?;
        path.pop();
    }
    Ok(())
}

fn shape<T>(msg: impl Into<String>) -> Result<T, Reason> {
    Err(Reason::Shape(msg.into()))
}

fn premises(d: &Derivation, n: usize) -> Result<&[Derivation], Reason> {
    if d.premises.len() != n {
        return shape(format!("{} expects {n} premise(s), found {}", d.rule, d.premises.len()));
    }
    Ok(&d.premises)
}

/// A premise with the same context and subject as its conclusion.
fn same_subject(d: &Derivation) -> Result<&Derivation, Reason> {
    let p = &premises(d, 1)?[0];
    if !p.ctx.same_as(&d.ctx) {
        return shape("premise context differs from conclusion context");
    }
    if p.term != d.term {
        return shape("premise subject differs from conclusion subject");
    }
    Ok(p)
}

fn expect_type(found: &Formula, expected: &Formula, what: &str) -> Result<(), Reason> {
    if found.alpha_eq(expected) {
        Ok(())
    } else {
        shape(format!("{what}: expected {expected}, found {found}"))
    }
}

fn check_local(d: &Derivation, th: &Theory, mode: Mode) -> Result<(), Reason> {
    match d.rule {
        Rule::R1 => {
            premises(d, 0)?;
            let Term::Var(x) = &d.term else { return shape("R1 subject must be a variable") };
            match d.ctx.get(x) {
                Some(a) => expect_type(&d.ty, a, "declared type"),
                None => shape(format!("{x} is not declared in the context")),
            }
        }
        Rule::R2 => {
            let p = &premises(d, 1)?[0];
            let Term::Abs(_, body) = &d.term else { return shape("R2 subject must be an abstraction") };
            let Payload::Var(x) = &d.payload else { return shape("R2 payload must name the λ-variable") };
            let Formula::Arrow(b, c) = &d.ty else { return shape("R2 conclusion must be an arrow") };
            if d.ctx.contains(x) || d.term.has_free(x) {
                return shape(format!("λ-variable {x} is not fresh"));
            }
            if !p.ctx.same_as(&d.ctx.with(x, (**b).clone())) {
                return shape(format!("premise context must extend the conclusion context with {x} : {b}"));
            }
            if p.term != Term::open_var(body, x) {
                return shape("premise subject must be the abstraction body");
            }
            expect_type(&p.ty, c, "premise type")
        }
        Rule::R3 => {
            let ps = premises(d, 2)?;
            let Term::App(u, v) = &d.term else { return shape("R3 subject must be an application") };
            if !ps[0].ctx.same_as(&d.ctx) || !ps[1].ctx.same_as(&d.ctx) {
                return shape("premise contexts differ from conclusion context");
            }
            if ps[0].term != **u || ps[1].term != **v {
                return shape("premise subjects must be the function and the argument");
            }
            let Formula::Arrow(b, a) = &ps[0].ty else { return shape("function premise must have an arrow type") };
            expect_type(&ps[1].ty, b, "argument type")?;
            expect_type(&d.ty, a, "result type")
        }
        Rule::R4 => {
            let p = same_subject(d)?;
            let Formula::ForallFo(x, a) = &d.ty else { return shape("R4 conclusion must be ∀x A") };
            if d.ctx.has_fo_free(x) {
                return Err(Reason::Freshness(format!("{x} is free in the context")));
            }
            expect_type(&p.ty, a, "premise type")
        }
        Rule::R5 => {
            let p = same_subject(d)?;
            let Payload::Term(u) = &d.payload else { return shape("R5 payload must be a term") };
            let Formula::ForallFo(x, a) = &p.ty else { return shape("R5 premise must be ∀x A") };
            th.sig.check_term(u).map_err(|e| Reason::WellFormed(e.to_string()))?;
            expect_type(&d.ty, &a.fo_subst(&[(x.clone(), u.clone())]), "instantiated type")
        }
        Rule::R6 => {
            let p = same_subject(d)?;
            let Formula::ForallRel(x, n, a) = &d.ty else { return shape("R6 conclusion must be ∀X A") };
            if d.ctx.has_rel_free(x, *n) {
                return Err(Reason::Freshness(format!("{x}/{n} is free in the context")));
            }
            expect_type(&p.ty, a, "premise type")
        }
        Rule::R7 => {
            if mode == Mode::Af2Zero {
                return Err(Reason::Mode("R7 is not a rule of AF2₀".into()));
            }
            let p = same_subject(d)?;
            let Payload::RelInst { var, params, formula } = &d.payload else {
                return shape("R7 payload must be (X, params, F)");
            };
            let Formula::ForallRel(x, n, a) = &p.ty else { return shape("R7 premise must be ∀X A") };
            if var != x {
                return shape(format!("payload names {var}, premise quantifies {x}"));
            }
            if params.len() != *n {
                return Err(Reason::WellFormed(format!("{x} has arity {n}, payload gives {} parameters", params.len())));
            }
            formula.well_formed(&th.sig).map_err(|e| Reason::WellFormed(e.to_string()))?;
            let inst = a.rel_subst(x, params, formula).map_err(|e| Reason::WellFormed(e.to_string()))?;
            expect_type(&d.ty, &inst, "instantiated type")
        }
        Rule::R7o => {
            let p = same_subject(d)?;
            let Payload::RelRename { var, rel } = &d.payload else { return shape("R7_0 payload must name a relation") };
            let Formula::ForallRel(x, n, a) = &p.ty else { return shape("R7_0 premise must be ∀X A") };
            if var != x {
                return shape(format!("payload names {var}, premise quantifies {x}"));
            }
            if let Head::Sym(s) = rel {
                match th.sig.rels.get(s) {
                    Some(m) if m == n => {}
                    _ => return Err(Reason::WellFormed(format!("relation symbol {s} is not declared with arity {n}"))),
                }
            }
            let params: Vec<String> = (0..*n).map(|i| format!("p_{i}")).collect();
            let f = Formula::Atom(rel.clone(), params.iter().map(|v| FoTerm::var(v)).collect());
            let inst = a.rel_subst(x, &params, &f).map_err(|e| Reason::WellFormed(e.to_string()))?;
            expect_type(&d.ty, &inst, "instantiated type")
        }
        Rule::R8 => {
            let p = same_subject(d)?;
            let Payload::Eq { template, var, from, to } = &d.payload else {
                return shape("R8 payload must be (B, x, u, v)");
            };
            if !eq_instance(from, to, th) {
                return Err(Reason::NotEquationInstance(format!("{from} = {to} is not an instance of an equation")));
            }
            expect_type(&p.ty, &template.fo_subst(&[(var.clone(), from.clone())]), "premise type")?;
            expect_type(&d.ty, &template.fo_subst(&[(var.clone(), to.clone())]), "conclusion type")
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(d: &Derivation, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
            writeln!(f, "{:indent$}{}  {} |- {} : {}", "", d.rule, d.ctx, d.term, d.ty, indent = indent)?;
            for p in &d.premises {
                go(p, f, indent + 2)?;
            }
            Ok(())
        }
        go(self, f, 0)
    }
}
