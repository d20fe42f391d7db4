//! Finite realizability models: a finite universe of λ-terms stands in for
//! Λ, truth values are saturated subsets of it, and formulas are valued by
//! the usual clauses.
//!
//! Membership is three-valued. An application that leaves the universe makes
//! arrow membership unknown, so every valuation is a pair of bounds: `low`
//! holds the definite members, `up` the members not definitely excluded.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::bounds::Bounds;
use crate::lambda::{normalize, Normalization, RedexKind, Term};
use crate::logic::{FoTerm, Formula, Head, Signature, Theory};
use crate::syntax::{parse_term, parse_theory_items, ParseError, Parser};
use crate::typing::{check_derivation, Derivation, Mode};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SandboxError {
    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("limit exceeded: {0}")]
    Limit(String),
    #[error("{0} is not interpreted")]
    Unbound(String),
}

/// Finite stand-in for Λ: seeds, their closed subterms, applications of
/// members up to the size bound, and β-reducts.
#[derive(Clone, Debug)]
pub struct TermUniverse {
    pub size_bound: usize,
    pub step_bound: usize,
    members: Vec<Term>,
    index: HashMap<Term, usize>,
    app: Vec<Option<usize>>,
    beta: Vec<Vec<usize>>,
    eta: Vec<Vec<usize>>,
    head: Vec<Option<usize>>,
    /// Every one-step β-reduct of a member is a member.
    pub reduct_closed: bool,
}

fn closed_subterms(t: &Term, out: &mut Vec<Term>) {
    if t.is_locally_closed() {
        out.push(t.clone());
    }
    match t {
        Term::Abs(_, b) => closed_subterms(b, out),
        Term::App(f, a) => {
            closed_subterms(f, out);
            closed_subterms(a, out);
        }
        _ => {}
    }
}

fn one_step(t: &Term, kind: RedexKind) -> Vec<Term> {
    t.redexes(kind).iter().filter_map(|p| t.contract(kind, p)).collect()
}

/// The head β-step `(λx u) t t1..tn → (u[t/x]) t1..tn`, if the head is a redex.
fn head_step(t: &Term) -> Option<Term> {
    let (h, args) = t.spine();
    if matches!(h, Term::Abs(..)) && !args.is_empty() {
        t.beta_step()
    } else {
        None
    }
}

impl TermUniverse {
    /// `cap` bounds the number of members; reducts beyond it leave the
    /// universe open under β, which `reduct_closed` records.
    pub fn build(seeds: &[Term], size_bound: usize, step_bound: usize, cap: usize) -> TermUniverse {
        let mut members: Vec<Term> = Vec::new();
        let mut index: HashMap<Term, usize> = HashMap::new();
        let add = |t: Term, members: &mut Vec<Term>, index: &mut HashMap<Term, usize>| -> bool {
            if index.contains_key(&t) || members.len() >= cap {
                return false;
            }
            index.insert(t.clone(), members.len());
            members.push(t);
            true
        };
        for s in seeds {
            let mut subs = Vec::new();
            closed_subterms(s, &mut subs);
            for t in subs {
                add(t, &mut members, &mut index);
            }
        }
        // Applications of members, smallest first.
        let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
        for (i, u) in members.iter().enumerate() {
            for (j, t) in members.iter().enumerate() {
                let n = u.size() + t.size() + 1;
                if n <= size_bound {
                    pairs.push((n, i, j));
                }
            }
        }
        pairs.sort();
        for (_, i, j) in pairs {
            let t = Term::app(members[i].clone(), members[j].clone());
            add(t, &mut members, &mut index);
        }
        // β-reducts, round by round.
        let mut frontier: Vec<usize> = (0..members.len()).collect();
        for _ in 0..step_bound {
            let mut next = Vec::new();
            for i in frontier {
                for r in one_step(&members[i].clone(), RedexKind::Beta) {
                    if add(r, &mut members, &mut index) {
                        next.push(members.len() - 1);
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        let n = members.len();
        let mut app = vec![None; n * n];
        for (i, u) in members.iter().enumerate() {
            for (j, t) in members.iter().enumerate() {
                app[i * n + j] = index.get(&Term::app(u.clone(), t.clone())).copied();
            }
        }
        let mut reduct_closed = true;
        let mut beta = Vec::with_capacity(n);
        let mut eta = Vec::with_capacity(n);
        let mut head = Vec::with_capacity(n);
        for t in &members {
            let rs = one_step(t, RedexKind::Beta);
            let known: Vec<usize> = rs.iter().filter_map(|r| index.get(r).copied()).collect();
            reduct_closed &= known.len() == rs.iter().collect::<std::collections::HashSet<_>>().len();
            beta.push(known);
            eta.push(one_step(t, RedexKind::Eta).iter().filter_map(|r| index.get(r).copied()).collect());
            head.push(head_step(t).and_then(|r| index.get(&r).copied()));
        }
        TermUniverse { size_bound, step_bound, members, index, app, beta, eta, head, reduct_closed }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Term] {
        &self.members
    }

    pub fn index_of(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn app(&self, u: usize, t: usize) -> Option<usize> {
        self.app[u * self.members.len() + t]
    }

    /// One-step β-reducts of member `i` that are members.
    pub fn beta_reducts(&self, i: usize) -> &[usize] {
        &self.beta[i]
    }

    pub fn full(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.len());
        s.insert_range(..);
        s
    }

    pub fn empty_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Beta,
    BetaEta,
}

/// Standard saturation closes under β-expansion; the weak one only under
/// head-redex expansion `(u[t/x]) t1..tn ∈ G ⇒ (λx u) t t1..tn ∈ G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Saturation {
    Standard,
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub base: usize,
    pub family: usize,
    pub arity: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { base: 3, family: 8, arity: 1 }
    }
}

/// A three-valued set: `low ⊆ up`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub low: FixedBitSet,
    pub up: FixedBitSet,
}

impl Interval {
    pub fn exact(s: FixedBitSet) -> Interval {
        Interval { low: s.clone(), up: s }
    }

    pub fn is_exact(&self) -> bool {
        self.low == self.up
    }

    fn intersect(&mut self, other: &Interval) {
        self.low.intersect_with(&other.low);
        self.up.intersect_with(&other.up);
    }
}

/// Relation symbol or variable value: one set per argument tuple, tuples in
/// lexicographic order over the base.
pub type RelValue = Vec<Interval>;

#[derive(Clone, Debug, Default)]
pub struct Interpretation {
    pub fo: BTreeMap<String, usize>,
    pub rel: BTreeMap<(String, usize), RelValue>,
}

impl Interpretation {
    pub fn with_fo(&self, x: &str, a: usize) -> Interpretation {
        let mut i = self.clone();
        i.fo.insert(x.to_string(), a);
        i
    }

    pub fn with_rel(&self, x: &str, n: usize, v: RelValue) -> Interpretation {
        let mut i = self.clone();
        i.rel.insert((x.to_string(), n), v);
        i
    }
}

#[derive(Clone, Debug)]
pub struct SandboxModel {
    pub universe: TermUniverse,
    pub variant: Variant,
    pub saturation: Saturation,
    pub base: Vec<String>,
    pub family: Vec<FixedBitSet>,
    pub family_names: Vec<String>,
    /// Whether closing the family under → and ∩ finished within the limit.
    pub closed: bool,
    pub funs: BTreeMap<String, (usize, BTreeMap<Vec<usize>, usize>)>,
    /// Relation symbol tables into family indices.
    pub rels: BTreeMap<String, (usize, BTreeMap<Vec<usize>, usize>)>,
    pub theory: Theory,
    pub limits: Limits,
    ext: HashMap<(usize, usize), Ext>,
}

/// Members among the reducts of an application outside the universe.
#[derive(Clone, Debug, Default)]
struct Ext {
    hits: Vec<usize>,
}

/// Seed set descriptions for [`SandboxModel::build`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeedSet {
    Terms(Vec<Term>),
    NormalWithinBound,
    NoNormalWithinBound,
    /// Reduces to the given free variable, or to any variable.
    ReducesToVariable(Option<String>),
}

fn tuples(base: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t| (0..base).map(move |a| [t.clone(), vec![a]].concat())).collect();
    }
    out
}

fn tuple_index(base: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, a| acc * base + a)
}

impl SandboxModel {
    pub fn saturate(&self, s: &FixedBitSet) -> FixedBitSet {
        let u = &self.universe;
        let mut s = s.clone();
        loop {
            let mut changed = false;
            for t in 0..u.len() {
                if s.contains(t) {
                    continue;
                }
                let hit = match (self.variant, self.saturation) {
                    (_, Saturation::Weak) => u.head[t].is_some_and(|r| s.contains(r)),
                    (Variant::Beta, Saturation::Standard) => u.beta[t].iter().any(|&r| s.contains(r)),
                    (Variant::BetaEta, Saturation::Standard) => u.beta[t].iter().chain(&u.eta[t]).any(|&r| s.contains(r)),
                };
                if hit {
                    s.insert(t);
                    changed = true;
                }
            }
            if !changed {
                return s;
            }
        }
    }

    /// `G → G'` over the universe, three-valued.
    pub fn arrow(&self, g: &Interval, g2: &Interval) -> Interval {
        let u = &self.universe;
        let mut low = u.empty_set();
        let mut up = u.empty_set();
        // The full universe stands for Λ itself.
        if g2.low.is_full() {
            return Interval::exact(u.full());
        }
        for v in 0..u.len() {
            let definite = g.up.ones().all(|t| match u.app(v, t) {
                Some(w) => g2.low.contains(w),
                None => self.ext[&(v, t)].hits.iter().any(|&w| g2.low.contains(w)),
            });
            // An application outside the universe can confirm membership
            // through a reduct but never refute it.
            let refuted = g.low.ones().any(|t| u.app(v, t).is_some_and(|w| !g2.up.contains(w)));
            low.set(v, definite);
            up.set(v, !refuted);
        }
        Interval { low: self.saturate(&low), up: self.saturate(&up) }
    }

    /// Builds the model and closes the family under → (definite part) and ∩.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        universe: TermUniverse,
        variant: Variant,
        saturation: Saturation,
        base: Vec<String>,
        seeds: Vec<(String, SeedSet)>,
        funs: BTreeMap<String, (usize, BTreeMap<Vec<usize>, usize>)>,
        rels: BTreeMap<String, (usize, Vec<(Vec<usize>, String)>)>,
        theory: Theory,
        limits: Limits,
    ) -> Result<SandboxModel, SandboxError> {
        if base.is_empty() {
            return Err(SandboxError::Limit("the base must not be empty".into()));
        }
        if base.len() > limits.base {
            return Err(SandboxError::Limit(format!("base has {} elements, limit {}", base.len(), limits.base)));
        }
        let mut m = SandboxModel {
            universe,
            variant,
            saturation,
            base,
            family: Vec::new(),
            family_names: Vec::new(),
            closed: true,
            funs,
            rels: BTreeMap::new(),
            theory,
            limits,
            ext: HashMap::new(),
        };
        m.ext = m.external_applications();
        let full = m.universe.full();
        m.push_member("universe".into(), full);
        let bounds = Bounds { max_steps: m.universe.step_bound.max(1), ..Bounds::default() };
        for (name, seed) in seeds {
            let mut s = m.universe.empty_set();
            for (i, t) in m.universe.members.iter().enumerate() {
                let keep = match &seed {
                    SeedSet::Terms(ts) => ts.contains(t),
                    SeedSet::NormalWithinBound => matches!(normalize(t, &bounds), Normalization::Normal { .. }),
                    SeedSet::NoNormalWithinBound => !matches!(normalize(t, &bounds), Normalization::Normal { .. }),
                    SeedSet::ReducesToVariable(y) => match normalize(t, &bounds) {
                        Normalization::Normal { term: Term::Var(v), .. } => y.as_ref().is_none_or(|y| *y == v),
                        _ => false,
                    },
                };
                s.set(i, keep);
            }
            let s = m.saturate(&s);
            m.push_member(name, s);
        }
        if m.family.len() > limits.family {
            return Err(SandboxError::Limit(format!("{} seed sets, family limit {}", m.family.len(), limits.family)));
        }
        m.close_family();
        for (r, (n, rows)) in rels {
            let mut table = BTreeMap::new();
            for (args, set) in rows {
                let k = m
                    .family_names
                    .iter()
                    .position(|s| *s == set)
                    .ok_or_else(|| SandboxError::Unbound(format!("set {set}")))?;
                table.insert(args, k);
            }
            m.rels.insert(r, (n, table));
        }
        Ok(m)
    }

    fn steps(&self, t: &Term) -> Vec<Term> {
        match (self.variant, self.saturation) {
            (_, Saturation::Weak) => head_step(t).into_iter().collect(),
            (Variant::Beta, _) => one_step(t, RedexKind::Beta),
            (Variant::BetaEta, _) => {
                let mut r = one_step(t, RedexKind::Beta);
                r.extend(one_step(t, RedexKind::Eta));
                r
            }
        }
    }

    /// Values are read as expansion closures of their members, so an
    /// application outside the universe belongs to a value if one of its
    /// reducts does. Reducts are followed up to the step bound and stop at
    /// members.
    fn external_applications(&self) -> HashMap<(usize, usize), Ext> {
        const NODE_CAP: usize = 64;
        let u = &self.universe;
        let mut out = HashMap::new();
        for v in 0..u.len() {
            for t in 0..u.len() {
                if u.app(v, t).is_some() {
                    continue;
                }
                let mut e = Ext::default();
                let mut seen = std::collections::HashSet::new();
                let mut frontier = vec![Term::app(u.members[v].clone(), u.members[t].clone())];
                let mut depth = 0;
                while !frontier.is_empty() {
                    if depth == u.step_bound || seen.len() > NODE_CAP {
                        break;
                    }
                    depth += 1;
                    let mut next = Vec::new();
                    for x in frontier {
                        for r in self.steps(&x) {
                            if let Some(k) = u.index_of(&r) {
                                if !e.hits.contains(&k) {
                                    e.hits.push(k);
                                }
                            } else if seen.insert(r.clone()) {
                                next.push(r);
                            }
                        }
                    }
                    frontier = next;
                }
                out.insert((v, t), e);
            }
        }
        out
    }

    fn push_member(&mut self, name: String, s: FixedBitSet) -> bool {
        if let Some(k) = self.family.iter().position(|g| *g == s) {
            if !self.family_names[k].starts_with('#') || name.starts_with('#') {
                return false;
            }
            self.family_names[k] = name;
            return false;
        }
        self.family.push(s);
        self.family_names.push(name);
        true
    }

    fn close_family(&mut self) {
        loop {
            let n = self.family.len();
            let mut new = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let a = self.arrow(&Interval::exact(self.family[i].clone()), &Interval::exact(self.family[j].clone())).low;
                    new.push((format!("#({} -> {})", self.family_names[i], self.family_names[j]), a));
                    let mut c = self.family[i].clone();
                    c.intersect_with(&self.family[j]);
                    new.push((format!("#({} & {})", self.family_names[i], self.family_names[j]), c));
                }
            }
            let mut grew = false;
            for (name, s) in new {
                if self.family.contains(&s) {
                    continue;
                }
                if self.family.len() >= self.limits.family {
                    self.closed = false;
                    return;
                }
                grew |= self.push_member(name, s);
            }
            if !grew {
                return;
            }
        }
    }

    pub fn fo_value(&self, t: &FoTerm, i: &Interpretation) -> Result<usize, SandboxError> {
        match t {
            FoTerm::Var(x) => i.fo.get(x).copied().ok_or_else(|| SandboxError::Unbound(format!("variable {x}"))),
            FoTerm::App(f, args) => {
                let vals = args.iter().map(|a| self.fo_value(a, i)).collect::<Result<Vec<_>, _>>()?;
                let (n, table) = self.funs.get(f).ok_or_else(|| SandboxError::Unbound(format!("symbol {f}")))?;
                if *n != vals.len() {
                    return Err(SandboxError::Unbound(format!("{f}/{}", vals.len())));
                }
                table.get(&vals).copied().ok_or_else(|| SandboxError::Unbound(format!("{f} at {vals:?}")))
            }
        }
    }

    /// Every relation value over the family for arity `n`.
    fn rel_values(&self, n: usize) -> Vec<RelValue> {
        let k = self.base.len().pow(n as u32);
        let mut out: Vec<RelValue> = vec![Vec::new()];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|v| self.family.iter().map(move |g| [v.clone(), vec![Interval::exact(g.clone())]].concat()))
                .collect();
        }
        out
    }

    pub fn eval(&self, i: &Interpretation, a: &Formula) -> Result<Interval, SandboxError> {
        match a {
            Formula::Atom(h, args) => {
                let vals = args.iter().map(|t| self.fo_value(t, i)).collect::<Result<Vec<_>, _>>()?;
                match h {
                    Head::Var(x) => {
                        let v = i.rel.get(&(x.clone(), args.len())).ok_or_else(|| SandboxError::Unbound(format!("relation {x}/{}", args.len())))?;
                        Ok(v[tuple_index(self.base.len(), &vals)].clone())
                    }
                    Head::Sym(p) => match self.rels.get(p) {
                        Some((_, table)) => {
                            let k = table.get(&vals).copied().unwrap_or(0);
                            Ok(Interval::exact(self.family[k].clone()))
                        }
                        None => Ok(Interval::exact(self.universe.full())),
                    },
                }
            }
            Formula::Arrow(b, c) => Ok(self.arrow(&self.eval(i, b)?, &self.eval(i, c)?)),
            Formula::ForallFo(x, b) => {
                let mut acc = Interval::exact(self.universe.full());
                for e in 0..self.base.len() {
                    acc.intersect(&self.eval(&i.with_fo(x, e), b)?);
                }
                Ok(acc)
            }
            Formula::ForallRel(x, n, b) => {
                if *n > self.limits.arity {
                    return Err(SandboxError::Limit(format!("quantified relation arity {n}, limit {}", self.limits.arity)));
                }
                let mut acc = Interval::exact(self.universe.full());
                for v in self.rel_values(*n) {
                    acc.intersect(&self.eval(&i.with_rel(x, *n, v), b)?);
                }
                Ok(acc)
            }
        }
    }

    /// All interpretations of the given free variables over the base and
    /// the family (relation values only for arity ≤ the limit).
    pub fn interpretations(&self, fo: &[String], rel: &[(String, usize)]) -> Vec<Interpretation> {
        let mut out = vec![Interpretation::default()];
        for x in fo {
            out = out.into_iter().flat_map(|i| (0..self.base.len()).map(move |a| i.with_fo(x, a))).collect();
        }
        for (x, n) in rel {
            let vals = self.rel_values(*n);
            out = out.into_iter().flat_map(|i| vals.iter().map(move |v| i.with_rel(x, *n, v.clone()))).collect();
        }
        out
    }

    /// The closure of every equation holds.
    pub fn satisfies_theory(&self) -> Result<(), String> {
        for e in &self.theory.equations {
            let mut vars = e.lhs.vars();
            for v in e.rhs.vars() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            for tuple in tuples(self.base.len(), vars.len()) {
                let i = Interpretation { fo: vars.iter().cloned().zip(tuple).collect(), rel: BTreeMap::new() };
                let l = self.fo_value(&e.lhs, &i).map_err(|err| err.to_string())?;
                let r = self.fo_value(&e.rhs, &i).map_err(|err| err.to_string())?;
                if l != r {
                    return Err(format!("{} = {} fails at {:?}", e.lhs, e.rhs, i.fo));
                }
            }
        }
        Ok(())
    }
}

/// `|A[t/x]|_I = |A|_{I[x ← t_I]}`.
pub fn check_lemma_2_2(m: &SandboxModel, i: &Interpretation, a: &Formula, x: &str, t: &FoTerm) -> Result<bool, SandboxError> {
    let lhs = m.eval(i, &a.fo_subst(&[(x.to_string(), t.clone())]))?;
    let v = m.fo_value(t, i)?;
    let rhs = m.eval(&i.with_fo(x, v), a)?;
    Ok(lhs == rhs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LemmaOutcome {
    Holds,
    Fails,
    /// The relation built from `F` takes a value outside the family.
    Skipped,
}

/// `|A[F/X(params)]|_I = |A|_{I[X ← Φ]}` with `Φ(a) = |F|_{I[params ← a]}`.
pub fn check_lemma_2_3(
    m: &SandboxModel,
    i: &Interpretation,
    a: &Formula,
    x: &str,
    params: &[String],
    f: &Formula,
) -> Result<LemmaOutcome, SandboxError> {
    let n = params.len();
    let mut phi = Vec::new();
    for tuple in tuples(m.base.len(), n) {
        let mut j = i.clone();
        for (p, e) in params.iter().zip(tuple) {
            j = j.with_fo(p, e);
        }
        phi.push(m.eval(&j, f)?);
    }
    if !phi.iter().all(|v| v.is_exact() && m.family.contains(&v.low)) {
        return Ok(LemmaOutcome::Skipped);
    }
    let inst = a.rel_subst(x, params, f).map_err(|e| SandboxError::Limit(e.to_string()))?;
    let lhs = m.eval(i, &inst)?;
    let rhs = m.eval(&i.with_rel(x, n, phi), a)?;
    Ok(if lhs == rhs { LemmaOutcome::Holds } else { LemmaOutcome::Fails })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Spot {
    Pass,
    Fail(String),
    OutOfUniverse(String),
    Precondition(String),
}

impl fmt::Display for Spot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spot::Pass => write!(f, "pass"),
            Spot::Fail(d) => write!(f, "FAIL: {d}"),
            Spot::OutOfUniverse(d) => write!(f, "out of universe: {d}"),
            Spot::Precondition(d) => write!(f, "precondition not met: {d}"),
        }
    }
}

/// Spot check of the adequacy lemma: the subject of a closed judgment lies
/// in the value of its type.
pub fn adequacy_spot(m: &SandboxModel, d: &Derivation) -> Spot {
    if let Err(r) = check_derivation(d, &m.theory, Mode::Af2) {
        return Spot::Precondition(format!("derivation does not check: {r}"));
    }
    if !d.ctx.0.is_empty() || !d.ty.fo_free().is_empty() || !d.ty.rel_free().is_empty() {
        return Spot::Precondition("the judgment is not closed".into());
    }
    if let Err(e) = m.satisfies_theory() {
        return Spot::Precondition(format!("the model does not satisfy the theory: {e}"));
    }
    let Some(k) = m.universe.index_of(&d.term) else {
        return Spot::OutOfUniverse(format!("{} is not in the universe", d.term));
    };
    match m.eval(&Interpretation::default(), &d.ty) {
        Err(e) => Spot::Precondition(e.to_string()),
        Ok(v) if v.low.contains(k) => Spot::Pass,
        Ok(v) if v.up.contains(k) => Spot::OutOfUniverse("membership depends on applications outside the universe".into()),
        Ok(_) if !m.universe.reduct_closed => Spot::OutOfUniverse("the universe is not closed under β-reduction".into()),
        Ok(_) if !m.closed => Spot::OutOfUniverse("the family is not closed under arrow and intersection".into()),
        Ok(_) => Spot::Fail(format!("{} is not in the value of {}", d.term, d.ty)),
    }
}

/// Membership of a closed term in the value of a closed type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Yes,
    No,
    Unknown,
}

pub fn member(m: &SandboxModel, t: &Term, a: &Formula) -> Result<Membership, SandboxError> {
    let Some(k) = m.universe.index_of(t) else { return Ok(Membership::Unknown) };
    let v = m.eval(&Interpretation::default(), a)?;
    Ok(if v.low.contains(k) {
        Membership::Yes
    } else if v.up.contains(k) {
        Membership::Unknown
    } else {
        Membership::No
    })
}

/// A parsed configuration, before the model is built.
#[derive(Clone, Debug)]
pub struct SandboxConfig {
    pub variant: Variant,
    pub saturation: Saturation,
    pub size_bound: usize,
    pub step_bound: usize,
    pub universe_cap: usize,
    pub seeds: Vec<Term>,
    pub base: Vec<String>,
    pub theory: Theory,
    pub funs: BTreeMap<String, (usize, BTreeMap<Vec<usize>, usize>)>,
    pub rels: BTreeMap<String, (usize, Vec<(Vec<usize>, String)>)>,
    pub sets: Vec<(String, SeedSet)>,
    pub limits: Limits,
}

impl Default for SandboxConfig {
    fn default() -> Self {
        SandboxConfig {
            variant: Variant::Beta,
            saturation: Saturation::Standard,
            size_bound: 7,
            step_bound: 6,
            universe_cap: 300,
            seeds: Vec::new(),
            base: vec!["a".into()],
            theory: Theory::default(),
            funs: BTreeMap::new(),
            rels: BTreeMap::new(),
            sets: Vec::new(),
            limits: Limits::default(),
        }
    }
}

impl SandboxConfig {
    pub fn build(&self) -> Result<SandboxModel, SandboxError> {
        let u = TermUniverse::build(&self.seeds, self.size_bound, self.step_bound, self.universe_cap);
        SandboxModel::build(
            u,
            self.variant,
            self.saturation,
            self.base.clone(),
            self.sets.clone(),
            self.funs.clone(),
            self.rels.clone(),
            self.theory.clone(),
            self.limits,
        )
    }
}

fn table_rows(line: usize, src: &str, base: &[String]) -> Result<Vec<(Vec<usize>, String)>, SandboxError> {
    let err = |msg: String| SandboxError::Config { line, msg };
    let mut rows = Vec::new();
    for entry in src.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (lhs, rhs) = entry.split_once("->").ok_or_else(|| err(format!("expected `args -> value` in `{entry}`")))?;
        let args = lhs
            .split_whitespace()
            .map(|a| base.iter().position(|b| b == a).ok_or_else(|| err(format!("`{a}` is not a base element"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((args, rhs.trim().to_string()));
    }
    Ok(rows)
}

/// Line-based configuration:
///
/// ```text
/// variant beta            # or betaeta
/// saturation standard     # or weak
/// size-bound 7
/// step-bound 6
/// universe-cap 300
/// family-limit 8
/// term \x. x              # universe seed, repeatable
/// base a b
/// fun f/1.                # theory lines over the standard signature
/// interp s: a -> b, b -> b
/// set S = terms y ; \x. x
/// set T = pred normal-within-bound
/// relinterp P: a -> S, b -> universe
/// ```
pub fn parse_config(src: &str) -> Result<SandboxConfig, SandboxError> {
    let mut c = SandboxConfig::default();
    let mut theory_src = String::new();
    let mut interps: Vec<(usize, String, String)> = Vec::new();
    let mut relinterps: Vec<(usize, String, String)> = Vec::new();
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let err = |msg: String| SandboxError::Config { line, msg };
        let (key, rest) = text.split_once(char::is_whitespace).map(|(a, b)| (a, b.trim())).unwrap_or((text, ""));
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(format!("`{s}` is not a number")));
        match key {
            "variant" => {
                c.variant = match rest {
                    "beta" => Variant::Beta,
                    "betaeta" => Variant::BetaEta,
                    _ => return Err(err(format!("unknown variant `{rest}`"))),
                }
            }
            "saturation" => {
                c.saturation = match rest {
                    "standard" => Saturation::Standard,
                    "weak" => Saturation::Weak,
                    _ => return Err(err(format!("unknown saturation `{rest}`"))),
                }
            }
            "size-bound" => c.size_bound = num(rest)?,
            "step-bound" => c.step_bound = num(rest)?,
            "universe-cap" => c.universe_cap = num(rest)?,
            "family-limit" => c.limits.family = num(rest)?,
            "base-limit" => c.limits.base = num(rest)?,
            "arity-limit" => c.limits.arity = num(rest)?,
            "term" => c.seeds.push(parse_term(rest).map_err(|e| err(e.to_string()))?),
            "base" => c.base = rest.split_whitespace().map(String::from).collect(),
            "fun" | "rel" | "eq" => {
                theory_src.push_str(text);
                theory_src.push('\n');
            }
            "interp" => {
                let (name, table) = rest.split_once(':').ok_or_else(|| err("expected `interp f: ...`".into()))?;
                interps.push((line, name.trim().to_string(), table.to_string()));
            }
            "relinterp" => {
                let (name, table) = rest.split_once(':').ok_or_else(|| err("expected `relinterp P: ...`".into()))?;
                relinterps.push((line, name.trim().to_string(), table.to_string()));
            }
            "set" => {
                let (name, def) = rest.split_once('=').ok_or_else(|| err("expected `set NAME = ...`".into()))?;
                let name = name.trim().to_string();
                let def = def.trim();
                let seed = if let Some(ts) = def.strip_prefix("terms") {
                    let terms = ts
                        .split(';')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_term(s).map_err(|e| err(e.to_string())))
                        .collect::<Result<Vec<_>, _>>()?;
                    SeedSet::Terms(terms)
                } else if let Some(p) = def.strip_prefix("pred") {
                    let mut words = p.split_whitespace();
                    match (words.next(), words.next()) {
                        (Some("normal-within-bound"), None) => SeedSet::NormalWithinBound,
                        (Some("no-normal-within-bound"), None) => SeedSet::NoNormalWithinBound,
                        (Some("reduces-to-variable"), v) => SeedSet::ReducesToVariable(v.map(String::from)),
                        _ => return Err(err(format!("unknown predicate `{}`", p.trim()))),
                    }
                } else {
                    return Err(err(format!("set definition must start with `terms` or `pred`: `{def}`")));
                };
                c.sets.push((name, seed));
            }
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
    }
    let sig = Signature::default();
    let mut p = Parser::new(&theory_src, &sig)?;
    c.theory = Theory::empty();
    parse_theory_items(&mut p, &mut c.theory)?;
    p.expect_end()?;
    for (line, name, table) in interps {
        let n = *c.theory.sig.funs.get(&name).ok_or(SandboxError::Config { line, msg: format!("{name} is not a declared function symbol") })?;
        let mut rows = BTreeMap::new();
        for (args, v) in table_rows(line, &table, &c.base)? {
            if args.len() != n {
                return Err(SandboxError::Config { line, msg: format!("{name} takes {n} arguments") });
            }
            let v = c.base.iter().position(|b| *b == v).ok_or(SandboxError::Config { line, msg: format!("`{v}` is not a base element") })?;
            rows.insert(args, v);
        }
        if rows.len() != c.base.len().pow(n as u32) {
            return Err(SandboxError::Config { line, msg: format!("the table of {name} is not total") });
        }
        c.funs.insert(name, (n, rows));
    }
    for (line, name, table) in relinterps {
        let n = *c.theory.sig.rels.get(&name).ok_or(SandboxError::Config { line, msg: format!("{name} is not a declared relation symbol") })?;
        let rows = table_rows(line, &table, &c.base)?;
        if rows.iter().any(|(a, _)| a.len() != n) {
            return Err(SandboxError::Config { line, msg: format!("{name} takes {n} arguments") });
        }
        c.rels.insert(name, (n, rows));
    }
    Ok(c)
}
