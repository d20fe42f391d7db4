//! Bounded inverse typing of β-normal terms.
//!
//! The search is syntax-directed. Head quantifiers of the goal are
//! introduced with fresh eigenvariables; an abstraction needs an arrow goal;
//! a head-variable spine `(y)u1...un` instantiates the declared type of `y`
//! step by step, proving each argument against the current arrow's left side
//! and finally matching the goal. First-order instantiations are
//! metavariables solved by unification; second-order ones range over a
//! finite candidate list fixed by the mode.

use std::collections::BTreeSet;

use crate::bounds::Bounds;
use crate::lambda::Term;
use crate::logic::{approx_e, fresh_from, Congruence, FoTerm, Formula, Head, Theory};

use super::chain::{opposite_pairs, sim};
use super::transform::apply_chain;
use super::unify::{is_meta, Unifier};
use super::{check_derivation, Context, Derivation, Mode, Payload, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InferMode {
    /// Second-order instantiation by relation variables and symbols only.
    Af2Zero,
    /// Second-order instantiation by formulas of size at most `max_inst_depth`.
    Af2Bounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InferResult {
    Typable(Derivation),
    /// `exhaustive` is set when the whole candidate space was explored
    /// without hitting any cap, so the answer is definite relative to the
    /// candidate bounds.
    NotTypable { exhaustive: bool, explored: usize },
}

impl InferResult {
    pub fn derivation(&self) -> Option<&Derivation> {
        match self {
            InferResult::Typable(d) => Some(d),
            InferResult::NotTypable { .. } => None,
        }
    }
}

type Cont<'k> = &'k mut dyn FnMut(&mut Search<'_>, Unifier, Derivation) -> bool;

struct Search<'a> {
    th: &'a Theory,
    mode: InferMode,
    bounds: &'a Bounds,
    explored: usize,
    /// A cap other than the candidate bounds cut the search.
    truncated: bool,
    taken: BTreeSet<String>,
    result: Option<Derivation>,
}

pub fn infer_normal(ctx: &Context, t: &Term, a: &Formula, th: &Theory, mode: InferMode, bounds: &Bounds) -> InferResult {
    let mut taken = ctx.names();
    taken.extend(t.free_vars());
    a.all_names(&mut taken);
    taken.extend(th.sig.funs.keys().cloned());
    taken.extend(th.sig.rels.keys().cloned());
    let mut s = Search { th, mode, bounds, explored: 0, truncated: false, taken, result: None };
    if !t.is_beta_normal() || !t.is_locally_closed() {
        return InferResult::NotTypable { exhaustive: false, explored: 0 };
    }
    let mut u = Unifier::new(!th.equations.is_empty());
    for v in ctx.0.iter().flat_map(|(_, b)| b.fo_free()).chain(a.fo_free()) {
        u.add_eigen(&v);
    }
    let found = s.prove(u, ctx, t, a, &mut |s, u, d| s.finish(u, d));
    match (found, s.result.take()) {
        (true, Some(d)) => InferResult::Typable(d),
        _ => InferResult::NotTypable { exhaustive: !s.truncated, explored: s.explored },
    }
}

fn node(rule: Rule, ctx: &Context, term: Term, ty: Formula, payload: Payload, premises: Vec<Derivation>) -> Derivation {
    Derivation { rule, ctx: ctx.clone(), term, ty, payload, premises }
}

impl Search<'_> {
    fn fresh(&mut self, base: &str) -> String {
        let v = fresh_from(base, &|c| self.taken.contains(c));
        self.taken.insert(v.clone());
        v
    }

    fn tick(&mut self) -> bool {
        self.explored += 1;
        if self.explored > self.bounds.max_steps {
            self.truncated = true;
            return false;
        }
        true
    }

    fn prove(&mut self, u: Unifier, ctx: &Context, t: &Term, goal: &Formula, k: Cont<'_>) -> bool {
        if !self.tick() {
            return false;
        }
        let goal = u.zonk_formula(goal);
        match &goal {
            Formula::ForallFo(x, a) => {
                let mut u = u;
                let e = self.fresh(x);
                u.add_eigen(&e);
                let body = a.fo_subst(&[(x.clone(), FoTerm::var(&e))]);
                let concl = Formula::forall_fo(&e, body.clone());
                self.prove(u, ctx, t, &body, &mut |s, u, d| {
                    let n = node(Rule::R4, ctx, d.term.clone(), concl.clone(), Payload::None, vec![d]);
                    k(s, u, n)
                })
            }
            Formula::ForallRel(x, n, a) => {
                let e = self.fresh(x);
                let body = a.rename_rel(x, *n, &e);
                let concl = Formula::forall_rel(&e, *n, body.clone());
                self.prove(u, ctx, t, &body, &mut |s, u, d| {
                    let nd = node(Rule::R6, ctx, d.term.clone(), concl.clone(), Payload::None, vec![d]);
                    k(s, u, nd)
                })
            }
            _ => match t {
                Term::Abs(_, body) => {
                    let Formula::Arrow(b, c) = &goal else { return false };
                    let x = self.fresh("x");
                    let ctx2 = ctx.with(&x, (**b).clone());
                    let opened = Term::open_var(body, &x);
                    self.prove(u, &ctx2, &opened, c, &mut |s, u, d| {
                        let n = node(Rule::R2, ctx, t.clone(), goal.clone(), Payload::Var(x.clone()), vec![d]);
                        k(s, u, n)
                    })
                }
                Term::Var(_) | Term::App(..) => {
                    let (head, args) = t.spine();
                    let Term::Var(y) = head else { return false };
                    let Some(f) = ctx.get(y) else { return false };
                    let leaf = Derivation::leaf(ctx.clone(), y, f.clone());
                    let cap = f.size() + self.bounds.max_inst_depth + 1;
                    self.spine(u, ctx, leaf, &args, 0, &goal, cap, k)
                }
                Term::Bound(_) => false,
            },
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn spine(&mut self, u: Unifier, ctx: &Context, d: Derivation, args: &[&Term], i: usize, goal: &Formula, cap: usize, k: Cont<'_>) -> bool {
        if !self.tick() {
            return false;
        }
        let ty = u.zonk_formula(&d.ty);
        if i == args.len() && !ty.starts_with_quantifier() {
            let mut u2 = u.clone();
            if !u2.unify(&ty, goal) {
                return false;
            }
            let out = if u2.modulo_e {
                node(Rule::R8, ctx, d.term.clone(), goal.clone(), Payload::None, vec![d])
            } else {
                d
            };
            return k(self, u2, out);
        }
        match &ty {
            Formula::ForallFo(x, a) => {
                let mut u = u;
                let m = u.fresh_meta(x);
                let next = a.fo_subst(&[(x.clone(), m.clone())]);
                let d2 = node(Rule::R5, ctx, d.term.clone(), next, Payload::Term(m), vec![d]);
                self.spine(u, ctx, d2, args, i, goal, cap, k)
            }
            Formula::ForallRel(x, n, a) => {
                if cap == 0 {
                    self.truncated = true;
                    return false;
                }
                let target = (i == args.len()).then_some(goal);
                for (rule, payload, next) in self.rel_candidates(&u, ctx, x, *n, a, target) {
                    let d2 = node(rule, ctx, d.term.clone(), next, payload, vec![d.clone()]);
                    if self.spine(u.clone(), ctx, d2, args, i, goal, cap - 1, k) {
                        return true;
                    }
                    if self.explored > self.bounds.max_steps {
                        return false;
                    }
                }
                false
            }
            Formula::Arrow(c, b) => {
                let arg = args[i];
                let b = (**b).clone();
                self.prove(u, ctx, arg, c, &mut |s, u, darg| {
                    let term = Term::app(d.term.clone(), darg.term.clone());
                    let d2 = node(Rule::R3, ctx, term, b.clone(), Payload::None, vec![d.clone(), darg]);
                    s.spine(u, ctx, d2, args, i + 1, goal, cap, k)
                })
            }
            Formula::Atom(..) => false,
        }
    }

    /// Instantiations of `∀X/n a`, in a fixed order.
    fn rel_candidates(
        &mut self,
        u: &Unifier,
        ctx: &Context,
        x: &str,
        n: usize,
        a: &Formula,
        target: Option<&Formula>,
    ) -> Vec<(Rule, Payload, Formula)> {
        let mut scope: Vec<(Head, usize)> = Vec::new();
        if let Some(g) = target {
            for (v, m) in g.rel_free() {
                scope.push((Head::Var(v), m));
            }
        }
        for (_, b) in &ctx.0 {
            for (v, m) in b.rel_free() {
                scope.push((Head::Var(v), m));
            }
        }
        for (v, m) in Formula::forall_rel(x, n, a.clone()).rel_free() {
            scope.push((Head::Var(v), m));
        }
        for (s, m) in &self.th.sig.rels {
            scope.push((Head::Sym(s.clone()), *m));
        }
        let mut uniq: Vec<(Head, usize)> = Vec::new();
        for h in scope {
            if !uniq.contains(&h) {
                uniq.push(h);
            }
        }
        let fresh = self.fresh(x);
        let params: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
        let pv: Vec<FoTerm> = params.iter().map(|p| FoTerm::var(p)).collect();
        let mut out: Vec<(Rule, Payload, Formula)> = Vec::new();
        match self.mode {
            InferMode::Af2Zero => {
                let mut rels: Vec<Head> = uniq.iter().filter(|(_, m)| *m == n).map(|(h, _)| h.clone()).collect();
                rels.push(Head::Var(fresh));
                for rel in rels {
                    let f = Formula::Atom(rel.clone(), pv.clone());
                    if let Ok(next) = a.rel_subst(x, &params, &f) {
                        out.push((Rule::R7o, Payload::RelRename { var: x.to_string(), rel }, next));
                    }
                }
            }
            InferMode::Af2Bounded => {
                let limit = self.bounds.max_inst_depth;
                let mut forms: Vec<Formula> = Vec::new();
                let push = |f: Formula, forms: &mut Vec<Formula>| {
                    if f.size() <= limit && !forms.iter().any(|g| g.alpha_eq(&f)) {
                        forms.push(f);
                    }
                };
                for (h, m) in &uniq {
                    if *m == n {
                        push(Formula::Atom(h.clone(), pv.clone()), &mut forms);
                    }
                }
                if let Some(g) = target {
                    for (ts, sub) in opposite_pairs(x, n, a, g) {
                        let ts: Vec<FoTerm> = ts.iter().map(|t| u.zonk(t)).collect();
                        if ts.iter().any(|t| t.vars().iter().any(|v| is_meta(v))) {
                            continue;
                        }
                        let mut f = sub;
                        for (t, p) in ts.iter().zip(&pv) {
                            f = super::chain::abstract_term(&f, t, p);
                        }
                        push(f, &mut forms);
                    }
                }
                push(Formula::Atom(Head::Var(fresh.clone()), pv.clone()), &mut forms);
                // Other atoms over heads in scope, arguments from the parameters
                // and the constant 0.
                let mut pool = pv.clone();
                pool.push(FoTerm::cst("0"));
                let mut atoms = Vec::new();
                for (h, m) in &uniq {
                    for argv in tuples(&pool, *m) {
                        atoms.push(Formula::Atom(h.clone(), argv));
                    }
                }
                for f in &atoms {
                    push(f.clone(), &mut forms);
                }
                let z = self.fresh("Z");
                push(Formula::forall_rel(&z, 0, Formula::atom(&z, vec![])), &mut forms);
                for a1 in atoms.iter().take(12) {
                    for a2 in atoms.iter().take(12) {
                        push(Formula::arrow(a1.clone(), a2.clone()), &mut forms);
                    }
                }
                for f in forms {
                    if let Ok(next) = a.rel_subst(x, &params, &f) {
                        out.push((
                            Rule::R7,
                            Payload::RelInst { var: x.to_string(), params: params.clone(), formula: f },
                            next,
                        ));
                    }
                }
            }
        }
        out
    }

    /// Top-level continuation: close the derivation and check it.
    fn finish(&mut self, mut u: Unifier, d: Derivation) -> bool {
        let mut metas = BTreeSet::new();
        collect_metas(&d, &u, &mut metas);
        for (a, b) in &u.deferred {
            for m in u.metas_of_term(a).into_iter().chain(u.metas_of_term(b)) {
                metas.insert(m);
                self.truncated = true;
            }
        }
        let metas: Vec<String> = metas.into_iter().collect();
        let mut taken = self.taken.clone();
        u.default_metas(&metas, &mut taken);
        for (a, b) in &u.deferred {
            if approx_e(&u.zonk(a), &u.zonk(b), self.th, self.bounds) != Congruence::Equal {
                return false;
            }
        }
        let d = zonk_deriv(&d, &u);
        let Some(d) = expand_conversions(&d, self.th, self.bounds) else { return false };
        let mode = match self.mode {
            InferMode::Af2Zero => Mode::Af2Zero,
            InferMode::Af2Bounded => Mode::Af2,
        };
        if check_derivation(&d, self.th, mode).is_err() {
            debug_assert!(false, "search produced an ill-formed derivation:\n{d}");
            return false;
        }
        self.result = Some(d);
        true
    }
}

/// All ordered `m`-tuples over `pool`.
fn tuples(pool: &[FoTerm], m: usize) -> Vec<Vec<FoTerm>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|t| pool.iter().map(move |p| {
                let mut t2 = t.clone();
                t2.push(p.clone());
                t2
            }))
            .collect();
    }
    out
}

fn collect_metas(d: &Derivation, u: &Unifier, out: &mut BTreeSet<String>) {
    let mut add_f = |f: &Formula| out.extend(u.open_metas(f));
    for (_, a) in &d.ctx.0 {
        add_f(a);
    }
    add_f(&d.ty);
    match &d.payload {
        Payload::Term(t) => out.extend(u.metas_of_term(t)),
        Payload::RelInst { formula, .. } => out.extend(u.open_metas(formula)),
        _ => {}
    }
    for p in &d.premises {
        collect_metas(p, u, out);
    }
}

pub(crate) fn zonk_deriv(d: &Derivation, u: &Unifier) -> Derivation {
    Derivation {
        rule: d.rule,
        ctx: d.ctx.map_types(&|a| u.zonk_formula(a)),
        term: d.term.clone(),
        ty: u.zonk_formula(&d.ty),
        payload: match &d.payload {
            Payload::Term(t) => Payload::Term(u.zonk(t)),
            Payload::RelInst { var, params, formula } => {
                Payload::RelInst { var: var.clone(), params: params.clone(), formula: u.zonk_formula(formula) }
            }
            p => p.clone(),
        },
        premises: d.premises.iter().map(|p| zonk_deriv(p, u)).collect(),
    }
}

/// Replaces pending conversions (R8 nodes without payload) by R8 chains.
fn expand_conversions(d: &Derivation, th: &Theory, bounds: &Bounds) -> Option<Derivation> {
    let premises: Option<Vec<Derivation>> = d.premises.iter().map(|p| expand_conversions(p, th, bounds)).collect();
    let premises = premises?;
    if d.rule == Rule::R8 && d.payload == Payload::None {
        let p = premises.into_iter().next()?;
        if p.ty.alpha_eq(&d.ty) {
            return Some(p);
        }
        let chain = sim(&p.ty, &d.ty, th, bounds)?;
        return Some(apply_chain(p, &chain, th));
    }
    let mut out = d.clone();
    out.premises = premises;
    Some(out)
}
