//! Untyped λ-terms in locally nameless form: bound variables are de Bruijn
//! indices, free variables keep their names. Binder names are printing hints
//! only and never take part in equality, so `==` is α-equivalence.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::bounds::Bounds;

/// Binder name kept for printing. Compares equal to every other hint.
#[derive(Clone, Debug)]
pub struct Hint(pub String);

impl PartialEq for Hint {
    fn eq(&self, _: &Hint) -> bool {
        true
    }
}
impl Eq for Hint {}
impl Hash for Hint {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Bound(usize),
    Abs(Hint, Box<Term>),
    App(Box<Term>, Box<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Fun,
    Arg,
    Body,
}

pub type Path = Vec<Dir>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RedexKind {
    Beta,
    Eta,
}

impl fmt::Display for RedexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RedexKind::Beta => write!(f, "beta"),
            RedexKind::Eta => write!(f, "eta"),
        }
    }
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps<I: IntoIterator<Item = Term>>(head: Term, args: I) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    /// `λname. body`, binding every free occurrence of `name` in `body`.
    pub fn lam(name: &str, body: Term) -> Term {
        Term::Abs(Hint(name.to_string()), Box::new(body.close(name, 0)))
    }

    pub fn is_abs(&self) -> bool {
        matches!(self, Term::Abs(..))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Bound(_) => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Bound(_) => {}
            Term::Abs(_, b) => b.collect_free(out),
            Term::App(f, a) => {
                f.collect_free(out);
                a.collect_free(out);
            }
        }
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => y == x,
            Term::Bound(_) => false,
            Term::Abs(_, b) => b.has_free(x),
            Term::App(f, a) => f.has_free(x) || a.has_free(x),
        }
    }

    /// Whether de Bruijn index `k` (relative to this position) occurs.
    pub fn has_loose(&self, k: usize) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Bound(i) => *i == k,
            Term::Abs(_, b) => b.has_loose(k + 1),
            Term::App(f, a) => f.has_loose(k) || a.has_loose(k),
        }
    }

    /// True when no index escapes its binders.
    pub fn is_locally_closed(&self) -> bool {
        fn go(t: &Term, depth: usize) -> bool {
            match t {
                Term::Var(_) => true,
                Term::Bound(i) => *i < depth,
                Term::Abs(_, b) => go(b, depth + 1),
                Term::App(f, a) => go(f, depth) && go(a, depth),
            }
        }
        go(self, 0)
    }

    fn shift(&self, d: isize, cutoff: usize) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::Bound(i) => {
                if *i >= cutoff {
                    Term::Bound((*i as isize + d) as usize)
                } else {
                    self.clone()
                }
            }
            Term::Abs(h, b) => Term::Abs(h.clone(), Box::new(b.shift(d, cutoff + 1))),
            Term::App(f, a) => Term::app(f.shift(d, cutoff), a.shift(d, cutoff)),
        }
    }

    /// Replaces index `j` by `s`, lowering the indices above `j`.
    fn subst_index(&self, j: usize, s: &Term) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::Bound(i) => {
                if *i == j {
                    s.shift(j as isize, 0)
                } else if *i > j {
                    Term::Bound(i - 1)
                } else {
                    self.clone()
                }
            }
            Term::Abs(h, b) => Term::Abs(h.clone(), Box::new(b.subst_index(j + 1, s))),
            Term::App(f, a) => Term::app(f.subst_index(j, s), a.subst_index(j, s)),
        }
    }

    /// Body of a binder with its variable replaced by `u`.
    pub fn open_with(body: &Term, u: &Term) -> Term {
        body.subst_index(0, u)
    }

    /// Body of a binder with its variable replaced by the free name `x`.
    pub fn open_var(body: &Term, x: &str) -> Term {
        body.subst_index(0, &Term::var(x))
    }

    fn close(&self, x: &str, depth: usize) -> Term {
        match self {
            Term::Var(y) if y == x => Term::Bound(depth),
            Term::Var(_) | Term::Bound(_) => self.clone(),
            Term::Abs(h, b) => Term::Abs(h.clone(), Box::new(b.close(x, depth + 1))),
            Term::App(f, a) => Term::app(f.close(x, depth), a.close(x, depth)),
        }
    }

    /// Capture-avoiding `t[u/x]` for a free variable `x`.
    pub fn substitute(&self, x: &str, u: &Term) -> Term {
        match self {
            Term::Var(y) if y == x => u.clone(),
            Term::Var(_) | Term::Bound(_) => self.clone(),
            Term::Abs(h, b) => Term::Abs(h.clone(), Box::new(b.substitute(x, &u.shift(1, 0)))),
            Term::App(f, a) => Term::app(f.substitute(x, u), a.substitute(x, u)),
        }
    }

    /// Renames free variables; names not in the map are kept.
    pub fn rename_free(&self, map: &dyn Fn(&str) -> Option<String>) -> Term {
        match self {
            Term::Var(y) => match map(y) {
                Some(z) => Term::Var(z),
                None => self.clone(),
            },
            Term::Bound(_) => self.clone(),
            Term::Abs(h, b) => Term::Abs(h.clone(), Box::new(b.rename_free(map))),
            Term::App(f, a) => Term::app(f.rename_free(map), a.rename_free(map)),
        }
    }

    pub fn subterm(&self, path: &[Dir]) -> Option<&Term> {
        let mut t = self;
        for d in path {
            t = match (t, d) {
                (Term::App(f, _), Dir::Fun) => f,
                (Term::App(_, a), Dir::Arg) => a,
                (Term::Abs(_, b), Dir::Body) => b,
                _ => return None,
            };
        }
        Some(t)
    }

    fn replace_at(&self, path: &[Dir], f: &dyn Fn(&Term) -> Option<Term>) -> Option<Term> {
        match path.split_first() {
            None => f(self),
            Some((d, rest)) => match (self, d) {
                (Term::App(l, r), Dir::Fun) => Some(Term::app(l.replace_at(rest, f)?, (**r).clone())),
                (Term::App(l, r), Dir::Arg) => Some(Term::app((**l).clone(), r.replace_at(rest, f)?)),
                (Term::Abs(h, b), Dir::Body) => Some(Term::Abs(h.clone(), Box::new(b.replace_at(rest, f)?))),
                _ => None,
            },
        }
    }

    pub fn is_beta_redex(&self) -> bool {
        matches!(self, Term::App(f, _) if f.is_abs())
    }

    pub fn is_eta_redex(&self) -> bool {
        match self {
            Term::Abs(_, b) => matches!(&**b, Term::App(m, x) if **x == Term::Bound(0) && !m.has_loose(0)),
            _ => false,
        }
    }

    fn contract_here(&self, kind: RedexKind) -> Option<Term> {
        match (kind, self) {
            (RedexKind::Beta, Term::App(f, a)) => match &**f {
                Term::Abs(_, body) => Some(Term::open_with(body, a)),
                _ => None,
            },
            (RedexKind::Eta, Term::Abs(_, b)) if self.is_eta_redex() => match &**b {
                Term::App(m, _) => Some(m.shift(-1, 0)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Contracts the redex of the given kind at `path`; `None` if there is none.
    pub fn contract(&self, kind: RedexKind, path: &[Dir]) -> Option<Term> {
        self.replace_at(path, &|t| t.contract_here(kind))
    }

    /// All redex positions of a kind, leftmost-outermost first.
    pub fn redexes(&self, kind: RedexKind) -> Vec<Path> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_redexes(kind, &mut path, &mut out);
        out
    }

    fn collect_redexes(&self, kind: RedexKind, path: &mut Path, out: &mut Vec<Path>) {
        let here = match kind {
            RedexKind::Beta => self.is_beta_redex(),
            RedexKind::Eta => self.is_eta_redex(),
        };
        if here {
            out.push(path.clone());
        }
        match self {
            Term::App(f, a) => {
                path.push(Dir::Fun);
                f.collect_redexes(kind, path, out);
                path.pop();
                path.push(Dir::Arg);
                a.collect_redexes(kind, path, out);
                path.pop();
            }
            Term::Abs(_, b) => {
                path.push(Dir::Body);
                b.collect_redexes(kind, path, out);
                path.pop();
            }
            _ => {}
        }
    }

    /// Leftmost-outermost β-step, `None` when the term is β-normal.
    pub fn beta_step(&self) -> Option<Term> {
        match self {
            Term::App(f, a) => {
                if let Term::Abs(_, body) = &**f {
                    return Some(Term::open_with(body, a));
                }
                if let Some(f2) = f.beta_step() {
                    return Some(Term::App(Box::new(f2), a.clone()));
                }
                a.beta_step().map(|a2| Term::App(f.clone(), Box::new(a2)))
            }
            Term::Abs(h, b) => b.beta_step().map(|b2| Term::Abs(h.clone(), Box::new(b2))),
            _ => None,
        }
    }

    /// Leftmost-outermost η-step.
    pub fn eta_step(&self) -> Option<Term> {
        let p = self.redexes(RedexKind::Eta).into_iter().next()?;
        self.contract(RedexKind::Eta, &p)
    }

    pub fn is_beta_normal(&self) -> bool {
        match self {
            Term::App(f, a) => !f.is_abs() && f.is_beta_normal() && a.is_beta_normal(),
            Term::Abs(_, b) => b.is_beta_normal(),
            _ => true,
        }
    }

    /// Head variable and arguments of a spine `(x) u1 ... un`.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(&**a);
            t = f;
        }
        args.reverse();
        (t, args)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalization {
    Normal { term: Term, steps: usize },
    StepBoundExceeded { steps: usize, last: Term },
    SizeBoundExceeded { steps: usize, size: usize },
}

impl Normalization {
    pub fn normal(&self) -> Option<&Term> {
        match self {
            Normalization::Normal { term, .. } => Some(term),
            _ => None,
        }
    }
}

/// Leftmost-outermost β-normalization under the step and size caps.
pub fn normalize(t: &Term, b: &Bounds) -> Normalization {
    let mut cur = t.clone();
    let mut steps = 0;
    loop {
        let size = cur.size();
        if size > b.max_term_size {
            return Normalization::SizeBoundExceeded { steps, size };
        }
        if steps >= b.max_steps {
            if cur.is_beta_normal() {
                return Normalization::Normal { term: cur, steps };
            }
            return Normalization::StepBoundExceeded { steps, last: cur };
        }
        match cur.beta_step() {
            None => return Normalization::Normal { term: cur, steps },
            Some(next) => {
                cur = next;
                steps += 1;
            }
        }
    }
}

/// β-normalizes, then contracts η-redexes until none remain.
pub fn beta_eta_normalize(t: &Term, b: &Bounds) -> Normalization {
    match normalize(t, b) {
        Normalization::Normal { term, mut steps } => {
            let mut cur = term;
            while let Some(next) = cur.eta_step() {
                cur = next;
                steps += 1;
            }
            Normalization::Normal { term: cur, steps }
        }
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// Distinct normal forms, or a bound tripped before both were reached.
    NotEquivalentWithinBounds { distinct_normal_forms: bool },
}

pub fn beta_eta_equiv(t: &Term, u: &Term, b: &Bounds) -> Equivalence {
    match (beta_eta_normalize(t, b), beta_eta_normalize(u, b)) {
        (Normalization::Normal { term: a, .. }, Normalization::Normal { term: c, .. }) => {
            if a == c {
                Equivalence::Equivalent
            } else {
                Equivalence::NotEquivalentWithinBounds { distinct_normal_forms: true }
            }
        }
        _ => Equivalence::NotEquivalentWithinBounds { distinct_normal_forms: false },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub kind: RedexKind,
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTrace {
    pub start: Term,
    pub steps: Vec<TraceStep>,
    pub end: Term,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("step {index}: no {kind} redex at {path:?}")]
    NoRedex { index: usize, kind: RedexKind, path: Path },
    #[error("replay ends in a different term than the recorded end")]
    WrongEnd,
    #[error("could not commute steps {index} and {next}")]
    Stuck { index: usize, next: usize },
    #[error("rewrite budget of {0} passes exhausted")]
    Budget(usize),
}

impl ReductionTrace {
    /// Builds a trace by replaying `steps` from `start`.
    pub fn from_steps(start: Term, steps: Vec<TraceStep>) -> Result<ReductionTrace, TraceError> {
        let terms = replay(&start, &steps)?;
        let end = terms.last().cloned().unwrap_or_else(|| start.clone());
        Ok(ReductionTrace { start, steps, end })
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        let terms = replay(&self.start, &self.steps)?;
        if terms.last().unwrap_or(&self.start) != &self.end {
            return Err(TraceError::WrongEnd);
        }
        Ok(())
    }

    /// All β-steps precede all η-steps.
    pub fn is_postponed(&self) -> bool {
        let first_eta = self.steps.iter().position(|s| s.kind == RedexKind::Eta);
        match first_eta {
            None => true,
            Some(i) => self.steps[i..].iter().all(|s| s.kind == RedexKind::Eta),
        }
    }
}

/// Intermediate terms after each step (the start is not included).
pub fn replay(start: &Term, steps: &[TraceStep]) -> Result<Vec<Term>, TraceError> {
    let mut out = Vec::with_capacity(steps.len());
    let mut cur = start.clone();
    for (index, s) in steps.iter().enumerate() {
        cur = cur
            .contract(s.kind, &s.path)
            .ok_or_else(|| TraceError::NoRedex { index, kind: s.kind, path: s.path.clone() })?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Reorders a mixed trace into β-steps followed by η-steps with the same
/// endpoints, by repeatedly commuting the first η-step that precedes a β-step.
/// The number of commutation passes is capped by `b.max_steps`.
pub fn postpone_eta(tr: &ReductionTrace, b: &Bounds) -> Result<ReductionTrace, TraceError> {
    tr.validate()?;
    let mut steps = tr.steps.clone();
    let mut passes = 0;
    loop {
        let Some(i) = steps
            .windows(2)
            .position(|w| w[0].kind == RedexKind::Eta && w[1].kind == RedexKind::Beta)
        else {
            break;
        };
        passes += 1;
        if passes > b.max_steps {
            return Err(TraceError::Budget(b.max_steps));
        }
        let before = replay(&tr.start, &steps[..i])?;
        let s = before.last().cloned().unwrap_or_else(|| tr.start.clone());
        let swapped = commute(&s, &steps[i].path, &steps[i + 1].path, b)
            .ok_or(TraceError::Stuck { index: i, next: i + 1 })?;
        steps.splice(i..i + 2, swapped);
    }
    let out = ReductionTrace { start: tr.start.clone(), steps, end: tr.end.clone() };
    out.validate()?;
    Ok(out)
}

/// Given `s →η s1` at `q` and `s1 →β s2` at `p`, returns β-steps followed by
/// η-steps leading from `s` to `s2`.
fn commute(s: &Term, q: &[Dir], p: &[Dir], b: &Bounds) -> Option<Vec<TraceStep>> {
    let s1 = s.contract(RedexKind::Eta, q)?;
    let s2 = s1.contract(RedexKind::Beta, p)?;
    let beta = |path: Path| TraceStep { kind: RedexKind::Beta, path };

    // The η-step created the β-redex: (λx.(M)x)N → (M)N.
    if q.len() == p.len() + 1 && q.starts_with(p) && q[p.len()] == Dir::Fun {
        let steps = vec![beta(p.to_vec()), beta(p.to_vec())];
        let out = replay(s, &steps).ok()?;
        return (out.last() == Some(&s2)).then_some(steps);
    }

    // Otherwise the β-redex already exists in `s`, one level deeper when it
    // sat inside the η-redex.
    let mapped: Path = if p.starts_with(q) {
        let mut m = q.to_vec();
        m.push(Dir::Body);
        m.push(Dir::Fun);
        m.extend_from_slice(&p[q.len()..]);
        m
    } else {
        p.to_vec()
    };
    let s3 = s.contract(RedexKind::Beta, &mapped)?;
    let mut seen = HashSet::new();
    let etas = eta_path(&s3, &s2, b.max_steps, &mut seen)?;
    let mut steps = vec![beta(mapped)];
    steps.extend(etas.into_iter().map(|path| TraceStep { kind: RedexKind::Eta, path }));
    Some(steps)
}

/// η-steps from `from` to `to`, by depth-first search over η-redexes.
fn eta_path(from: &Term, to: &Term, budget: usize, seen: &mut HashSet<Term>) -> Option<Vec<Path>> {
    if from == to {
        return Some(Vec::new());
    }
    let (fs, ts) = (from.size(), to.size());
    if fs <= ts || (fs - ts) % 3 != 0 || seen.len() > budget || !seen.insert(from.clone()) {
        return None;
    }
    for p in from.redexes(RedexKind::Eta) {
        let next = from.contract(RedexKind::Eta, &p)?;
        if let Some(mut rest) = eta_path(&next, to, budget, seen) {
            rest.insert(0, p);
            return Some(rest);
        }
    }
    None
}

/// `δ = λx (x)x`.
pub fn delta() -> Term {
    Term::lam("x", Term::app(Term::var("x"), Term::var("x")))
}

/// `I = λx x`.
pub fn identity() -> Term {
    Term::lam("x", Term::var("x"))
}

/// Church numeral `k̲ = λxλf (f)^k x` (data first, step function second).
pub fn church(k: usize) -> Term {
    let mut body = Term::var("x");
    for _ in 0..k {
        body = Term::app(Term::var("f"), body);
    }
    Term::lam("x", Term::lam("f", body))
}

/// Inverse of [`church`] on α-variants of numerals; anything else is `None`.
pub fn decode_church(t: &Term) -> Option<usize> {
    let Term::Abs(_, b1) = t else { return None };
    let Term::Abs(_, b2) = &**b1 else { return None };
    let mut k = 0;
    let mut cur = &**b2;
    loop {
        match cur {
            Term::Bound(1) => return Some(k),
            Term::App(f, a) if **f == Term::Bound(0) => {
                k += 1;
                cur = a;
            }
            _ => return None,
        }
    }
}

/// `succ = λnλxλf (f)(((n)x)f)`.
pub fn church_succ() -> Term {
    let inner = Term::apps(Term::var("n"), [Term::var("x"), Term::var("f")]);
    Term::lam("n", Term::lam("x", Term::lam("f", Term::app(Term::var("f"), inner))))
}

/// `(t)^k u`.
pub fn iterate(t: &Term, k: usize, u: Term) -> Term {
    (0..k).fold(u, |acc, _| Term::app(t.clone(), acc))
}

// ---- printing ----

fn fresh_name(hint: &str, avoid: &dyn Fn(&str) -> bool) -> String {
    if !avoid(hint) {
        return hint.to_string();
    }
    let base = hint.trim_end_matches(|c: char| c.is_ascii_digit());
    let base = if base.is_empty() { "x" } else { base };
    (1..).map(|i| format!("{base}{i}")).find(|c| !avoid(c)).expect("infinite supply")
}

impl Term {
    fn write_named(&self, f: &mut fmt::Formatter<'_>, names: &mut Vec<String>, free: &BTreeSet<String>, ctx: Ctx) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Bound(i) => match names.len().checked_sub(i + 1) {
                Some(k) => write!(f, "{}", names[k]),
                None => write!(f, "#{i}"),
            },
            Term::Abs(h, body) => {
                let name = fresh_name(&h.0, &|c| free.contains(c) || names.iter().any(|n| n == c));
                if ctx != Ctx::Top {
                    write!(f, "(")?;
                }
                write!(f, "\\{name}. ")?;
                names.push(name);
                body.write_named(f, names, free, Ctx::Top)?;
                names.pop();
                if ctx != Ctx::Top {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Term::App(fun, arg) => {
                if ctx == Ctx::Arg {
                    write!(f, "(")?;
                }
                fun.write_named(f, names, free, Ctx::Fun)?;
                write!(f, " ")?;
                arg.write_named(f, names, free, Ctx::Arg)?;
                if ctx == Ctx::Arg {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Top,
    Fun,
    Arg,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let free = self.free_vars();
        self.write_named(f, &mut Vec::new(), &free, Ctx::Top)
    }
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: String = self
            .path
            .iter()
            .map(|d| match d {
                Dir::Fun => 'f',
                Dir::Arg => 'a',
                Dir::Body => 'b',
            })
            .collect();
        write!(f, "{}@{}", self.kind, if p.is_empty() { "." } else { &p })
    }
}
