//! The orders `≤` (head instantiations) and `∼` (equational rewrites) as
//! replayable chains.

use std::collections::BTreeSet;
use std::fmt;

use crate::bounds::Bounds;
use crate::logic::{eq_instance, fresh_from, rewrite_path, FoTerm, Formula, Head, Theory};

use super::unify::{heads, is_meta, Unifier};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainStep {
    /// `∀x A` to `A[u/x]`.
    FoInst(FoTerm),
    /// `∀X A` to `A[F/X(params)]`.
    RelInst { var: String, params: Vec<String>, formula: Formula },
    /// `C[u/x]` to `C[v/x]` for an equation instance `u = v`.
    EqStep { template: Formula, var: String, from: FoTerm, to: FoTerm },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstChain {
    pub from: Formula,
    pub steps: Vec<ChainStep>,
    pub to: Formula,
}

impl ChainStep {
    /// Applies one step, checking that it fits `cur`.
    pub fn apply(&self, cur: &Formula, th: &Theory) -> Result<Formula, String> {
        match self {
            ChainStep::FoInst(u) => match cur {
                Formula::ForallFo(x, a) => Ok(a.fo_subst(&[(x.clone(), u.clone())])),
                _ => Err(format!("{cur} has no first-order head quantifier")),
            },
            ChainStep::RelInst { var, params, formula } => match cur {
                Formula::ForallRel(x, n, a) if x == var && *n == params.len() => {
                    a.rel_subst(x, params, formula).map_err(|e| e.to_string())
                }
                _ => Err(format!("{cur} does not start with a quantifier on {var}/{}", params.len())),
            },
            ChainStep::EqStep { template, var, from, to } => {
                if !eq_instance(from, to, th) {
                    return Err(format!("{from} = {to} is not an equation instance"));
                }
                let before = template.fo_subst(&[(var.clone(), from.clone())]);
                if !before.alpha_eq(cur) {
                    return Err(format!("template gives {before}, current formula is {cur}"));
                }
                Ok(template.fo_subst(&[(var.clone(), to.clone())]))
            }
        }
    }

    pub fn is_eq(&self) -> bool {
        matches!(self, ChainStep::EqStep { .. })
    }
}

impl InstChain {
    pub fn empty(a: &Formula) -> InstChain {
        InstChain { from: a.clone(), steps: Vec::new(), to: a.clone() }
    }

    pub fn replay(&self, th: &Theory) -> Result<Formula, String> {
        let mut cur = self.from.clone();
        for s in &self.steps {
            cur = s.apply(&cur, th)?;
        }
        Ok(cur)
    }

    /// Replays and compares with the recorded target.
    pub fn verify(&self, th: &Theory) -> bool {
        self.replay(th).is_ok_and(|f| f.alpha_eq(&self.to))
    }

    pub fn is_leq(&self) -> bool {
        self.steps.iter().all(|s| !s.is_eq())
    }

    pub fn is_sim(&self) -> bool {
        self.steps.iter().all(ChainStep::is_eq)
    }

    pub fn then(mut self, other: InstChain) -> InstChain {
        self.steps.extend(other.steps);
        self.to = other.to;
        self
    }
}

impl fmt::Display for ChainStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainStep::FoInst(u) => write!(f, "inst {u}"),
            ChainStep::RelInst { var, params, formula } => write!(f, "inst {var}({}) := {formula}", params.join(", ")),
            ChainStep::EqStep { template, var, from, to } => write!(f, "rewrite {from} => {to} in [{template}] at {var}"),
        }
    }
}

impl fmt::Display for InstChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.from)?;
        let mut cur = self.from.clone();
        for s in &self.steps {
            let next = s.apply(&cur, &Theory::default()).ok();
            match (&next, s) {
                (Some(n), _) => {
                    write!(f, "\n  [{s}] {n}")?;
                    cur = n.clone();
                }
                (None, ChainStep::EqStep { template, var, to, .. }) => {
                    cur = template.fo_subst(&[(var.clone(), to.clone())]);
                    write!(f, "\n  [{s}] {cur}")?;
                }
                (None, _) => write!(f, "\n  [{s}] ?")?,
            }
        }
        Ok(())
    }
}

/// Searches for `a ≤ b`: head instantiations of `a` reaching `b` up to α.
pub fn leq(a: &Formula, b: &Formula, th: &Theory, bounds: &Bounds) -> Option<InstChain> {
    let mut u = Unifier::new(false);
    for v in b.fo_free() {
        u.add_eigen(&v);
    }
    let mut taken = a.names();
    taken.extend(b.names());
    let budget = a.size() + bounds.max_inst_depth + 1;
    let mut steps = Vec::new();
    let mut work = bounds.max_steps;
    let (u, steps) = leq_search(a, b, &mut u, &mut steps, budget, th, &mut work, &taken)?;
    let steps: Vec<ChainStep> = steps
        .into_iter()
        .map(|s| match s {
            ChainStep::FoInst(t) => ChainStep::FoInst(u.zonk(&t)),
            ChainStep::RelInst { var, params, formula } => ChainStep::RelInst { var, params, formula: u.zonk_formula(&formula) },
            s => s,
        })
        .collect();
    let chain = InstChain { from: a.clone(), steps, to: b.clone() };
    chain.verify(th).then_some(chain)
}

#[allow(clippy::too_many_arguments)]
fn leq_search(
    cur: &Formula,
    b: &Formula,
    u: &mut Unifier,
    steps: &mut Vec<ChainStep>,
    budget: usize,
    th: &Theory,
    work: &mut usize,
    taken: &BTreeSet<String>,
) -> Option<(Unifier, Vec<ChainStep>)> {
    if *work == 0 {
        return None;
    }
    *work -= 1;
    let mut trial = u.clone();
    if trial.unify(cur, b) {
        let mut taken = taken.clone();
        let mut open = Vec::new();
        for s in steps.iter() {
            if let ChainStep::FoInst(t) = s {
                open.extend(trial.metas_of_term(t));
            }
        }
        trial.default_metas(&open, &mut taken);
        return Some((trial, steps.clone()));
    }
    if budget == 0 {
        return None;
    }
    match cur {
        Formula::ForallFo(x, a) => {
            let m = u.fresh_meta(x);
            let next = a.fo_subst(&[(x.clone(), m.clone())]);
            steps.push(ChainStep::FoInst(m));
            let r = leq_search(&next, b, u, steps, budget - 1, th, work, taken);
            steps.pop();
            r
        }
        Formula::ForallRel(x, n, a) => {
            for (params, f) in rel_candidates(x, *n, a, b, u) {
                let Ok(next) = a.rel_subst(x, &params, &f) else { continue };
                steps.push(ChainStep::RelInst { var: x.clone(), params, formula: f });
                let mut u2 = u.clone();
                let r = leq_search(&next, b, &mut u2, steps, budget - 1, th, work, taken);
                steps.pop();
                if r.is_some() {
                    return r;
                }
            }
            None
        }
        _ => None,
    }
}

/// Candidate instantiations for `∀X/n body` aiming at `target`: subformulas
/// of the target found opposite an occurrence of `X`, abstracted over the
/// occurrence's arguments, then atoms over heads in scope.
pub(crate) fn rel_candidates(x: &str, n: usize, body: &Formula, target: &Formula, u: &Unifier) -> Vec<(Vec<String>, Formula)> {
    let mut taken = body.names();
    taken.extend(target.names());
    let mut params = Vec::new();
    for i in 0..n {
        let p = fresh_from(&format!("v{i}"), &|c| taken.contains(c) || params.iter().any(|q: &String| q == c));
        params.push(p);
    }
    let mut out: Vec<(Vec<String>, Formula)> = Vec::new();
    let push = |f: Formula, out: &mut Vec<(Vec<String>, Formula)>| {
        if !out.iter().any(|(_, g)| g.alpha_eq(&f)) {
            out.push((params.clone(), f));
        }
    };
    let mut pairs = Vec::new();
    opposite(x, n, body, target, &mut Vec::new(), &mut pairs);
    for (args, g) in pairs {
        let args: Vec<FoTerm> = args.iter().map(|t| u.zonk(t)).collect();
        if args.iter().any(|t| t.vars().iter().any(|v| is_meta(v))) {
            continue;
        }
        let mut f = g.clone();
        for (t, p) in args.iter().zip(&params) {
            f = abstract_term(&f, t, &FoTerm::var(p));
        }
        push(f, &mut out);
    }
    let pv: Vec<FoTerm> = params.iter().map(|p| FoTerm::var(p)).collect();
    push(Formula::Atom(Head::Var(x.to_string()), pv.clone()), &mut out);
    let mut hs = Vec::new();
    heads(target, &mut hs);
    heads(body, &mut hs);
    for (h, m) in hs {
        if m == n && !(h == Head::Var(x.to_string())) {
            push(Formula::Atom(h, pv.clone()), &mut out);
        }
    }
    out
}

pub(crate) fn opposite_pairs(x: &str, n: usize, a: &Formula, b: &Formula) -> Vec<(Vec<FoTerm>, Formula)> {
    let mut out = Vec::new();
    opposite(x, n, a, b, &mut Vec::new(), &mut out);
    out
}

/// Pairs (arguments of an `X` occurrence in `a`, subformula of `b` in the same
/// position), skipping subformulas that mention variables bound in `b`.
fn opposite(x: &str, n: usize, a: &Formula, b: &Formula, bound: &mut Vec<String>, out: &mut Vec<(Vec<FoTerm>, Formula)>) {
    match (a, b) {
        (Formula::Atom(Head::Var(y), args), _) if y == x && args.len() == n => {
            let names = b.names();
            if bound.iter().all(|v| !names.contains(v)) {
                out.push((args.clone(), b.clone()));
            }
        }
        (Formula::Arrow(a1, a2), Formula::Arrow(b1, b2)) => {
            opposite(x, n, a1, b1, bound, out);
            opposite(x, n, a2, b2, bound, out);
        }
        (Formula::ForallFo(_, a1), Formula::ForallFo(y, b1)) | (Formula::ForallRel(_, _, a1), Formula::ForallRel(y, _, b1)) => {
            bound.push(y.clone());
            opposite(x, n, a1, b1, bound, out);
            bound.pop();
        }
        _ => {}
    }
}

/// Replaces every occurrence of the term `t` in atom arguments by `by`.
pub(crate) fn abstract_term(f: &Formula, t: &FoTerm, by: &FoTerm) -> Formula {
    fn in_term(s: &FoTerm, t: &FoTerm, by: &FoTerm) -> FoTerm {
        if s == t {
            return by.clone();
        }
        match s {
            FoTerm::Var(_) => s.clone(),
            FoTerm::App(g, args) => FoTerm::App(g.clone(), args.iter().map(|a| in_term(a, t, by)).collect()),
        }
    }
    match f {
        Formula::Atom(h, args) => Formula::Atom(h.clone(), args.iter().map(|a| in_term(a, t, by)).collect()),
        Formula::Arrow(a, b) => Formula::arrow(abstract_term(a, t, by), abstract_term(b, t, by)),
        Formula::ForallFo(y, a) => {
            if t.has_var(y) {
                f.clone()
            } else {
                Formula::ForallFo(y.clone(), Box::new(abstract_term(a, t, by)))
            }
        }
        Formula::ForallRel(y, n, a) => Formula::ForallRel(y.clone(), *n, Box::new(abstract_term(a, t, by))),
    }
}

/// Searches for `a ∼ b`: the two formulas must agree up to the terms in atom
/// arguments, and each pair of terms must be joined by equation rewrites
/// that avoid bound variables.
pub fn sim(a: &Formula, b: &Formula, th: &Theory, bounds: &Bounds) -> Option<InstChain> {
    let b = align_binders(a, b)?;
    let mut pairs = Vec::new();
    term_pairs(a, &b, &mut Vec::new(), &mut pairs)?;
    let mut taken = a.names();
    taken.extend(b.names());
    let mut cur = a.clone();
    let mut steps = Vec::new();
    for (k, (bound, s, t)) in pairs.into_iter().enumerate() {
        if s == t {
            continue;
        }
        let path = rewrite_path(&s, &t, th, bounds, &bound)?;
        for r in path {
            let z = fresh_from("z", &|c| taken.contains(c));
            let template = replace_atom_arg(&cur, k, &r.pos, &FoTerm::var(&z));
            let next = template.fo_subst(&[(z.clone(), r.to.clone())]);
            steps.push(ChainStep::EqStep { template, var: z, from: r.from, to: r.to });
            cur = next;
        }
    }
    let chain = InstChain { from: a.clone(), steps, to: b.clone() };
    chain.verify(th).then_some(chain)
}

/// Renames the binders of `b` to those of `a` where the shapes agree.
fn align_binders(a: &Formula, b: &Formula) -> Option<Formula> {
    match (a, b) {
        (Formula::Atom(h1, xs), Formula::Atom(h2, ys)) => (h1 == h2 && xs.len() == ys.len()).then(|| b.clone()),
        (Formula::Arrow(a1, a2), Formula::Arrow(b1, b2)) => Some(Formula::arrow(align_binders(a1, b1)?, align_binders(a2, b2)?)),
        (Formula::ForallFo(x, a1), Formula::ForallFo(y, b1)) => {
            if x != y && b1.has_fo_free(x) {
                return None;
            }
            let b1 = b1.fo_subst(&[(y.clone(), FoTerm::var(x))]);
            Some(Formula::forall_fo(x, align_binders(a1, &b1)?))
        }
        (Formula::ForallRel(x, n, a1), Formula::ForallRel(y, m, b1)) if n == m => {
            if x != y && b1.has_rel_free(x, *n) {
                return None;
            }
            let b1 = b1.rename_rel(y, *n, x);
            Some(Formula::forall_rel(x, *n, align_binders(a1, &b1)?))
        }
        _ => None,
    }
}

/// Corresponding atom arguments of two same-shaped formulas, with the
/// first-order variables bound at that point.
fn term_pairs(a: &Formula, b: &Formula, bound: &mut Vec<String>, out: &mut Vec<(Vec<String>, FoTerm, FoTerm)>) -> Option<()> {
    match (a, b) {
        (Formula::Atom(h1, xs), Formula::Atom(h2, ys)) if h1 == h2 && xs.len() == ys.len() => {
            for (s, t) in xs.iter().zip(ys) {
                out.push((bound.clone(), s.clone(), t.clone()));
            }
            Some(())
        }
        (Formula::Arrow(a1, a2), Formula::Arrow(b1, b2)) => {
            term_pairs(a1, b1, bound, out)?;
            term_pairs(a2, b2, bound, out)
        }
        (Formula::ForallFo(x, a1), Formula::ForallFo(y, b1)) if x == y => {
            bound.push(x.clone());
            let r = term_pairs(a1, b1, bound, out);
            bound.pop();
            r
        }
        (Formula::ForallRel(x, n, a1), Formula::ForallRel(y, m, b1)) if x == y && n == m => term_pairs(a1, b1, bound, out),
        _ => None,
    }
}

/// Replaces, inside the `k`-th atom argument (in left-to-right order), the
/// subterm at `pos` by `by`.
pub(crate) fn replace_atom_arg(f: &Formula, k: usize, pos: &[usize], by: &FoTerm) -> Formula {
    fn go(f: &Formula, k: &mut usize, pos: &[usize], by: &FoTerm) -> Formula {
        match f {
            Formula::Atom(h, args) => {
                let mut out = Vec::new();
                for a in args {
                    if *k == 0 {
                        out.push(a.replace_at(pos, by));
                        *k = usize::MAX;
                    } else {
                        if *k != usize::MAX {
                            *k -= 1;
                        }
                        out.push(a.clone());
                    }
                }
                Formula::Atom(h.clone(), out)
            }
            Formula::Arrow(a, b) => {
                let a2 = go(a, k, pos, by);
                let b2 = go(b, k, pos, by);
                Formula::arrow(a2, b2)
            }
            Formula::ForallFo(x, a) => Formula::ForallFo(x.clone(), Box::new(go(a, k, pos, by))),
            Formula::ForallRel(x, n, a) => Formula::ForallRel(x.clone(), *n, Box::new(go(a, k, pos, by))),
        }
    }
    go(f, &mut k.clone(), pos, by)
}
