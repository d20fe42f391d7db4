//! Operations on derivations: substitution, weakening, strengthening,
//! equational transport and one-step subject reduction.

use std::collections::BTreeSet;

use crate::bounds::Bounds;
use crate::lambda::{Dir, Term};
use crate::logic::{approx_e, fresh_from, rewrite_path, Congruence, FoTerm, Formula, Head, Theory};

use super::chain::{ChainStep, InstChain};
use super::{Context, Derivation, Payload, Rule};

/// Appends the nodes realizing `chain` below `d`.
pub fn apply_chain(d: Derivation, chain: &InstChain, th: &Theory) -> Derivation {
    let mut cur = d;
    for s in &chain.steps {
        let ty = s.apply(&cur.ty, th).expect("chain replays");
        let (rule, payload) = match s {
            ChainStep::FoInst(u) => (Rule::R5, Payload::Term(u.clone())),
            ChainStep::RelInst { var, params, formula } => {
                (Rule::R7, Payload::RelInst { var: var.clone(), params: params.clone(), formula: formula.clone() })
            }
            ChainStep::EqStep { template, var, from, to } => {
                (Rule::R8, Payload::Eq { template: template.clone(), var: var.clone(), from: from.clone(), to: to.clone() })
            }
        };
        cur = Derivation { rule, ctx: cur.ctx.clone(), term: cur.term.clone(), ty, payload, premises: vec![cur] };
    }
    cur
}

fn map_formulas(d: &Derivation, f: &dyn Fn(&Formula) -> Formula, p: &dyn Fn(&Derivation) -> (Rule, Payload)) -> Derivation {
    let (rule, payload) = p(d);
    Derivation {
        rule,
        ctx: d.ctx.map_types(f),
        term: d.term.clone(),
        ty: f(&d.ty),
        payload,
        premises: d.premises.iter().map(|q| map_formulas(q, f, p)).collect(),
    }
}

fn fresh_name(base: &str, taken: &mut BTreeSet<String>) -> String {
    let base = base.trim_start_matches(['?', '!']);
    let base = if base.is_empty() { "v" } else { base };
    let v = fresh_from(base, &|c| taken.contains(c));
    taken.insert(v.clone());
    v
}

/// `d[u/y]` without any renaming of generalized variables.
fn subst_fo_raw(d: &Derivation, y: &str, u: &FoTerm, taken: &mut BTreeSet<String>) -> Derivation {
    let pairs = [(y.to_string(), u.clone())];
    let mut uvars: BTreeSet<String> = u.vars().into_iter().collect();
    uvars.insert(y.to_string());
    let taken_cell = std::cell::RefCell::new(std::mem::take(taken));
    let out = map_formulas(d, &|a| a.fo_subst(&pairs), &|n| {
        let payload = match &n.payload {
            Payload::Term(t) => Payload::Term(t.subst_pairs(&pairs)),
            Payload::Eq { template, var, from, to } => {
                let (template, var) = if uvars.contains(var) {
                    let z = fresh_name(var, &mut taken_cell.borrow_mut());
                    (template.fo_subst(&[(var.clone(), FoTerm::var(&z))]), z)
                } else {
                    (template.clone(), var.clone())
                };
                Payload::Eq { template: template.fo_subst(&pairs), var, from: from.subst_pairs(&pairs), to: to.subst_pairs(&pairs) }
            }
            Payload::RelInst { var, params, formula } => {
                let mut params = params.clone();
                let mut formula = formula.clone();
                for q in params.iter_mut() {
                    if uvars.contains(q) {
                        let q2 = fresh_name(q, &mut taken_cell.borrow_mut());
                        formula = formula.fo_subst(&[(q.clone(), FoTerm::var(&q2))]);
                        *q = q2;
                    }
                }
                Payload::RelInst { var: var.clone(), params, formula: formula.fo_subst(&pairs) }
            }
            p => p.clone(),
        };
        (n.rule, payload)
    });
    *taken = taken_cell.into_inner();
    out
}

fn generalized(d: &Derivation) -> Option<(String, Option<usize>)> {
    match (d.rule, &d.ty) {
        (Rule::R4, Formula::ForallFo(x, _)) => Some((x.clone(), None)),
        (Rule::R6, Formula::ForallRel(x, n, _)) => Some((x.clone(), Some(*n))),
        _ => None,
    }
}

/// Renames every variable generalized by R4/R6 whose name is in `avoid`.
pub fn freshen(d: &Derivation, avoid: &BTreeSet<String>) -> Derivation {
    let mut taken = d.names();
    taken.extend(avoid.iter().cloned());
    freshen_in(d, avoid, &mut taken)
}

fn freshen_in(d: &Derivation, avoid: &BTreeSet<String>, taken: &mut BTreeSet<String>) -> Derivation {
    let mut out = d.clone();
    out.premises = d.premises.iter().map(|p| freshen_in(p, avoid, taken)).collect();
    if let Some((x, arity)) = generalized(d) {
        if avoid.contains(&x) {
            let x2 = fresh_name(&x, taken);
            let prem = &out.premises[0];
            out.premises[0] = match arity {
                None => subst_fo_raw(prem, &x, &FoTerm::var(&x2), taken),
                Some(n) => {
                    let params: Vec<String> = (0..n).map(|i| format!("p_{i}")).collect();
                    let f = Formula::atom(&x2, params.iter().map(|p| FoTerm::var(p)).collect());
                    subst_rel_raw(prem, &x, n, &params, &f, taken)
                }
            };
            let body = Box::new(out.premises[0].ty.clone());
            out.ty = match arity {
                None => Formula::ForallFo(x2, body),
                Some(n) => Formula::ForallRel(x2, n, body),
            };
        }
    }
    out
}

/// `d[u/y]`, renaming generalized variables that would capture `u` or
/// rebind `y`.
pub fn subst_fo_deriv(d: &Derivation, y: &str, u: &FoTerm) -> Derivation {
    let mut avoid: BTreeSet<String> = u.vars().into_iter().collect();
    avoid.insert(y.to_string());
    let d = freshen(d, &avoid);
    let mut taken = d.names();
    taken.extend(avoid);
    subst_fo_raw(&d, y, u, &mut taken)
}

fn subst_rel_raw(d: &Derivation, x: &str, n: usize, params: &[String], f: &Formula, taken: &mut BTreeSet<String>) -> Derivation {
    let fnames = f.names();
    let taken_cell = std::cell::RefCell::new(std::mem::take(taken));
    let sub = |a: &Formula| a.rel_subst(x, params, f).expect("arity-consistent substitution");
    let out = map_formulas(d, &sub, &|node| match &node.payload {
        Payload::RelInst { var, params: q, formula } => {
            let mut q = q.clone();
            let mut g = formula.clone();
            for p in q.iter_mut() {
                if fnames.contains(p) {
                    let p2 = fresh_name(p, &mut taken_cell.borrow_mut());
                    g = g.fo_subst(&[(p.clone(), FoTerm::var(&p2))]);
                    *p = p2;
                }
            }
            (node.rule, Payload::RelInst { var: var.clone(), params: q, formula: sub(&g) })
        }
        Payload::RelRename { var, rel: Head::Var(y) } if y == x => {
            let arity = match &node.premises.first().map(|p| &p.ty) {
                Some(Formula::ForallRel(_, m, _)) => *m,
                _ => usize::MAX,
            };
            if arity != n {
                return (node.rule, node.payload.clone());
            }
            match f {
                Formula::Atom(h, args) if args.iter().map(|a| a.to_string()).eq(params.iter().cloned()) => {
                    (Rule::R7o, Payload::RelRename { var: var.clone(), rel: h.clone() })
                }
                _ => (Rule::R7, Payload::RelInst { var: var.clone(), params: params.to_vec(), formula: f.clone() }),
            }
        }
        Payload::Eq { template, var, from, to } => {
            let (template, var) = if fnames.contains(var) {
                let z = fresh_name(var, &mut taken_cell.borrow_mut());
                (template.fo_subst(&[(var.clone(), FoTerm::var(&z))]), z)
            } else {
                (template.clone(), var.clone())
            };
            (node.rule, Payload::Eq { template: sub(&template), var, from: from.clone(), to: to.clone() })
        }
        p => (node.rule, p.clone()),
    });
    *taken = taken_cell.into_inner();
    out
}

/// `d[F/X(params)]` on every formula of the tree. R7₀ nodes instantiating
/// with `X` become R7 nodes unless `F` is itself an atom over the params.
pub fn subst_rel_deriv(d: &Derivation, x: &str, n: usize, params: &[String], f: &Formula) -> Derivation {
    let mut avoid = f.names();
    avoid.insert(x.to_string());
    let d = freshen(d, &avoid);
    let mut taken = d.names();
    taken.extend(avoid);
    subst_rel_raw(&d, x, n, params, f, &mut taken)
}

fn rename_lambda_var(d: &Derivation, y: &str, y2: &str) -> Derivation {
    let ren = |v: &str| (v == y).then(|| y2.to_string());
    Derivation {
        rule: d.rule,
        ctx: Context(d.ctx.0.iter().map(|(v, a)| (ren(v).unwrap_or_else(|| v.clone()), a.clone())).collect()),
        term: d.term.rename_free(&ren),
        ty: d.ty.clone(),
        payload: match &d.payload {
            Payload::Var(v) if v == y => Payload::Var(y2.to_string()),
            p => p.clone(),
        },
        premises: d.premises.iter().map(|p| rename_lambda_var(p, y, y2)).collect(),
    }
}

/// Adds the declarations of `extra` to every context of `d`. Generalized
/// variables free in `extra` and λ-variables declared in `extra` are renamed
/// inside `d` first.
pub fn weaken(d: &Derivation, extra: &Context) -> Derivation {
    if extra.0.is_empty() {
        return d.clone();
    }
    let mut avoid = BTreeSet::new();
    for (_, a) in &extra.0 {
        a.all_names(&mut avoid);
    }
    let mut d = freshen(d, &avoid);
    let mut taken = d.names();
    taken.extend(extra.names());
    d = rename_bound_lambda(&d, extra, &mut taken);
    add_bindings(&d, extra)
}

fn rename_bound_lambda(d: &Derivation, extra: &Context, taken: &mut BTreeSet<String>) -> Derivation {
    if let (Rule::R2, Payload::Var(y)) = (d.rule, &d.payload) {
        if extra.contains(y) {
            let y2 = fresh_name(y, taken);
            let prem = rename_lambda_var(&d.premises[0], y, &y2);
            let mut out = d.clone();
            out.payload = Payload::Var(y2);
            out.premises = vec![rename_bound_lambda(&prem, extra, taken)];
            return out;
        }
    }
    let mut out = d.clone();
    out.premises = d.premises.iter().map(|p| rename_bound_lambda(p, extra, taken)).collect();
    out
}

fn add_bindings(d: &Derivation, extra: &Context) -> Derivation {
    let mut out = d.clone();
    for (x, a) in &extra.0 {
        if !out.ctx.contains(x) {
            out.ctx.0.push((x.clone(), a.clone()));
        }
    }
    out.premises = d.premises.iter().map(|p| add_bindings(p, extra)).collect();
    out
}

/// Restricts every context to the free variables of the root subject.
pub fn strengthen(d: &Derivation) -> Derivation {
    let keep = d.term.free_vars();
    let drop: BTreeSet<String> = d.ctx.vars().filter(|x| !keep.contains(*x)).cloned().collect();
    fn go(d: &Derivation, drop: &BTreeSet<String>) -> Derivation {
        Derivation {
            rule: d.rule,
            ctx: d.ctx.restrict(&|x| !drop.contains(x)),
            term: d.term.clone(),
            ty: d.ty.clone(),
            payload: d.payload.clone(),
            premises: d.premises.iter().map(|p| go(p, drop)).collect(),
        }
    }
    go(d, &drop)
}

/// Replaces every R7₀ node by the R7 node with the corresponding atomic formula.
pub fn af2_0_to_af2(d: &Derivation) -> Derivation {
    let mut out = d.clone();
    if let (Rule::R7o, Payload::RelRename { var, rel }) = (d.rule, &d.payload) {
        let n = match &d.premises[0].ty {
            Formula::ForallRel(_, n, _) => *n,
            _ => 0,
        };
        let params: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
        let formula = Formula::Atom(rel.clone(), params.iter().map(|p| FoTerm::var(p)).collect());
        out.rule = Rule::R7;
        out.payload = Payload::RelInst { var: var.clone(), params, formula };
    }
    out.premises = d.premises.iter().map(af2_0_to_af2).collect();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("derivation concludes {found}, expected {expected}")]
    TypeMismatch { found: Formula, expected: Formula },
    #[error("{0} and {1} are not provably equal within bounds")]
    NotEqual(FoTerm, FoTerm),
    #[error("no rewrite sequence from {0} to {1} within bounds")]
    NoPath(FoTerm, FoTerm),
}

/// From `Γ ⊢ u : B[a/x]` and `a ≈ b`, a derivation of `Γ ⊢ u : B[b/x]`
/// ending in one R8 node per rewrite.
pub fn transport_eq(
    d: &Derivation,
    b_tmpl: &Formula,
    x: &str,
    a: &FoTerm,
    b: &FoTerm,
    th: &Theory,
    bounds: &Bounds,
) -> Result<Derivation, TransportError> {
    let start = b_tmpl.fo_subst(&[(x.to_string(), a.clone())]);
    if !d.ty.alpha_eq(&start) {
        return Err(TransportError::TypeMismatch { found: d.ty.clone(), expected: start });
    }
    if a == b {
        return Ok(d.clone());
    }
    if approx_e(a, b, th, bounds) != Congruence::Equal {
        return Err(TransportError::NotEqual(a.clone(), b.clone()));
    }
    let path = rewrite_path(a, b, th, bounds, &[]).ok_or_else(|| TransportError::NoPath(a.clone(), b.clone()))?;
    let mut taken = d.names();
    b_tmpl.all_names(&mut taken);
    taken.extend(a.vars());
    taken.extend(b.vars());
    taken.insert(x.to_string());
    let z = fresh_name("z", &mut taken);
    let mut cur_term = a.clone();
    let mut out = d.clone();
    for r in path {
        let holed = cur_term.replace_at(&r.pos, &FoTerm::var(&z));
        let template = b_tmpl.fo_subst(&[(x.to_string(), holed)]);
        cur_term = cur_term.replace_at(&r.pos, &r.to);
        let ty = template.fo_subst(&[(z.clone(), r.to.clone())]);
        out = Derivation {
            rule: Rule::R8,
            ctx: out.ctx.clone(),
            term: out.term.clone(),
            ty,
            payload: Payload::Eq { template, var: z.clone(), from: r.from, to: r.to },
            premises: vec![out],
        };
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReduceError {
    #[error("no β-redex at the given position")]
    NoRedex,
    #[error("derivation does not have the expected shape: {0}")]
    Shape(String),
}

#[derive(Clone, Debug)]
enum Binder {
    Fo(String),
    Rel(String, usize),
}

/// A derivation of `Γ ⊢ λx b : ∀prefix (B → A)` put in the form: R2 over
/// `body`, followed by introductions of `prefix`.
struct Canon {
    prefix: Vec<Binder>,
    body: Derivation,
    x: String,
    b: Formula,
    a: Formula,
}

/// Renames prefix binders listed in `avoid` to fresh names throughout `c`.
fn freshen_prefix(c: &mut Canon, avoid: &BTreeSet<String>, taken: &mut BTreeSet<String>) {
    for i in 0..c.prefix.len() {
        match c.prefix[i].clone() {
            Binder::Fo(v) if avoid.contains(&v) => {
                let v2 = fresh_name(&v, taken);
                let t = FoTerm::var(&v2);
                c.body = subst_fo_deriv(&c.body, &v, &t);
                c.b = c.b.fo_subst(&[(v.clone(), t.clone())]);
                c.a = c.a.fo_subst(&[(v, t)]);
                c.prefix[i] = Binder::Fo(v2);
            }
            Binder::Rel(v, n) if avoid.contains(&v) => {
                let v2 = fresh_name(&v, taken);
                let params: Vec<String> = (0..n).map(|i| format!("p_{i}")).collect();
                let f = Formula::atom(&v2, params.iter().map(|p| FoTerm::var(p)).collect());
                c.body = subst_rel_deriv(&c.body, &v, n, &params, &f);
                c.b = c.b.rename_rel(&v, n, &v2);
                c.a = c.a.rename_rel(&v, n, &v2);
                c.prefix[i] = Binder::Rel(v2, n);
            }
            _ => {}
        }
    }
}

/// Replaces the type of the λ-variable `x` in `body` by `new_b`; each use of
/// `x` is followed by `conv`, which turns a leaf of type `new_b` back into one
/// of the old type.
fn retype_var(d: &Derivation, x: &str, new_b: &Formula, conv: &dyn Fn(Derivation) -> Derivation) -> Derivation {
    let ctx = Context(d.ctx.0.iter().map(|(y, a)| (y.clone(), if y == x { new_b.clone() } else { a.clone() })).collect());
    if d.rule == Rule::R1 && d.term == Term::var(x) {
        return conv(Derivation::leaf(ctx, x, new_b.clone()));
    }
    Derivation {
        rule: d.rule,
        ctx,
        term: d.term.clone(),
        ty: d.ty.clone(),
        payload: d.payload.clone(),
        premises: d.premises.iter().map(|p| retype_var(p, x, new_b, conv)).collect(),
    }
}

fn eq_node(d: Derivation, template: &Formula, z: &str, from: &FoTerm, to: &FoTerm) -> Derivation {
    Derivation {
        rule: Rule::R8,
        ctx: d.ctx.clone(),
        term: d.term.clone(),
        ty: template.fo_subst(&[(z.to_string(), to.clone())]),
        payload: Payload::Eq { template: template.clone(), var: z.to_string(), from: from.clone(), to: to.clone() },
        premises: vec![d],
    }
}

fn canon(d: &Derivation, taken: &mut BTreeSet<String>) -> Result<Canon, ReduceError> {
    let shape = |m: &str| Err(ReduceError::Shape(m.to_string()));
    match d.rule {
        Rule::R2 => {
            let (Payload::Var(x), Formula::Arrow(b, a)) = (&d.payload, &d.ty) else { return shape("malformed R2 node") };
            Ok(Canon { prefix: Vec::new(), body: d.premises[0].clone(), x: x.clone(), b: (**b).clone(), a: (**a).clone() })
        }
        Rule::R4 | Rule::R6 => {
            let mut c = canon(&d.premises[0], taken)?;
            let b = match &d.ty {
                Formula::ForallFo(x, _) => Binder::Fo(x.clone()),
                Formula::ForallRel(x, n, _) => Binder::Rel(x.clone(), *n),
                _ => return shape("malformed introduction"),
            };
            c.prefix.insert(0, b);
            Ok(c)
        }
        Rule::R5 => {
            let mut c = canon(&d.premises[0], taken)?;
            let Payload::Term(u) = &d.payload else { return shape("malformed R5 node") };
            let Some(Binder::Fo(y)) = c.prefix.first().cloned() else { return shape("R5 without matching introduction") };
            c.prefix.remove(0);
            let avoid: BTreeSet<String> = u.vars().into_iter().collect();
            freshen_prefix(&mut c, &avoid, taken);
            c.body = subst_fo_deriv(&c.body, &y, u);
            c.b = c.b.fo_subst(&[(y.clone(), u.clone())]);
            c.a = c.a.fo_subst(&[(y, u.clone())]);
            Ok(c)
        }
        Rule::R7 | Rule::R7o => {
            let mut c = canon(&d.premises[0], taken)?;
            let Some(Binder::Rel(x, n)) = c.prefix.first().cloned() else { return shape("R7 without matching introduction") };
            let (params, f) = match &d.payload {
                Payload::RelInst { params, formula, .. } => (params.clone(), formula.clone()),
                Payload::RelRename { rel, .. } => {
                    let params: Vec<String> = (0..n).map(|i| format!("p_{i}")).collect();
                    let f = Formula::Atom(rel.clone(), params.iter().map(|p| FoTerm::var(p)).collect());
                    (params, f)
                }
                _ => return shape("malformed R7 node"),
            };
            c.prefix.remove(0);
            let avoid = f.names();
            freshen_prefix(&mut c, &avoid, taken);
            c.body = subst_rel_deriv(&c.body, &x, n, &params, &f);
            c.b = c.b.rel_subst(&x, &params, &f).map_err(|e| ReduceError::Shape(e.to_string()))?;
            c.a = c.a.rel_subst(&x, &params, &f).map_err(|e| ReduceError::Shape(e.to_string()))?;
            Ok(c)
        }
        Rule::R8 => {
            let mut c = canon(&d.premises[0], taken)?;
            let Payload::Eq { template, var, from, to } = &d.payload else { return shape("malformed R8 node") };
            let mut avoid: BTreeSet<String> = from.vars().into_iter().collect();
            avoid.extend(to.vars());
            avoid.insert(var.clone());
            freshen_prefix(&mut c, &avoid, taken);
            // Peel the template's quantifiers, renaming them to the prefix names.
            let mut tmpl = template.clone();
            for b in &c.prefix {
                tmpl = match (b, tmpl) {
                    (Binder::Fo(v), Formula::ForallFo(w, body)) => body.fo_subst(&[(w, FoTerm::var(v))]),
                    (Binder::Rel(v, n), Formula::ForallRel(w, m, body)) if *n == m => body.rename_rel(&w, m, v),
                    _ => return shape("R8 template does not follow the quantifier prefix"),
                };
            }
            let Formula::Arrow(tb, ta) = tmpl else { return shape("R8 template is not an arrow") };
            let (f2, t2) = (from.clone(), to.clone());
            let tb2 = (*tb).clone();
            let var2 = var.clone();
            let new_b = tb.fo_subst(&[(var.clone(), to.clone())]);
            let conv = move |leaf: Derivation| eq_node(leaf, &tb2, &var2, &t2, &f2);
            let body = freshen(&c.body, &to.vars().into_iter().collect());
            let body = retype_var(&body, &c.x, &new_b, &conv);
            c.body = eq_node(body, &ta, var, from, to);
            c.b = new_b;
            c.a = ta.fo_subst(&[(var.clone(), to.clone())]);
            Ok(c)
        }
        Rule::R1 | Rule::R3 => shape("the function part of the redex is not typed as an abstraction"),
    }
}

/// Substitutes the derivation `e` of `Γ ⊢ v : B` for the λ-variable `x` in
/// `d`, whose contexts all declare `x : B`.
pub fn subst_lambda(d: &Derivation, x: &str, e: &Derivation) -> Derivation {
    let v = &e.term;
    let ctx = Context(d.ctx.0.iter().filter(|(y, _)| y != x).cloned().collect());
    if d.rule == Rule::R1 && d.term == Term::var(x) {
        let extra = Context(ctx.0.iter().filter(|(y, _)| !e.ctx.contains(y)).cloned().collect());
        return weaken(e, &extra);
    }
    Derivation {
        rule: d.rule,
        ctx,
        term: d.term.substitute(x, v),
        ty: d.ty.clone(),
        payload: d.payload.clone(),
        premises: d.premises.iter().map(|p| subst_lambda(p, x, e)).collect(),
    }
}

/// Given `d` concluding `Γ ⊢ t : A` and a β-redex of `t` at `path`, builds a
/// derivation of `Γ ⊢ t' : A` for the contracted term `t'`.
pub fn subject_reduce(d: &Derivation, path: &[Dir]) -> Result<Derivation, ReduceError> {
    reduce_at(d, path).map(|r| sync_binders(&r))
}

/// Realigns the variable named by R7/R7₀ payloads with the binder of the
/// premise, which renaming may have changed.
fn sync_binders(d: &Derivation) -> Derivation {
    let mut out = d.clone();
    out.premises = d.premises.iter().map(sync_binders).collect();
    if let Some(Formula::ForallRel(x, _, _)) = out.premises.first().map(|p| &p.ty) {
        match &mut out.payload {
            Payload::RelInst { var, .. } | Payload::RelRename { var, .. } if matches!(out.rule, Rule::R7 | Rule::R7o) => *var = x.clone(),
            _ => {}
        }
    }
    out
}

fn reduce_at(d: &Derivation, path: &[Dir]) -> Result<Derivation, ReduceError> {
    match d.rule {
        Rule::R4 | Rule::R5 | Rule::R6 | Rule::R7 | Rule::R7o | Rule::R8 => {
            let p = reduce_at(&d.premises[0], path)?;
            let mut out = d.clone();
            out.term = p.term.clone();
            out.premises = vec![p];
            Ok(out)
        }
        Rule::R2 => {
            let Some((Dir::Body, rest)) = path.split_first() else { return Err(ReduceError::NoRedex) };
            let Payload::Var(x) = &d.payload else { return Err(ReduceError::Shape("malformed R2 node".into())) };
            let p = reduce_at(&d.premises[0], rest)?;
            let mut out = d.clone();
            out.term = Term::lam(x, p.term.clone());
            out.premises = vec![p];
            Ok(out)
        }
        Rule::R3 => match path.split_first() {
            Some((Dir::Fun, rest)) | Some((Dir::Arg, rest)) => {
                let i = if path[0] == Dir::Fun { 0 } else { 1 };
                let p = reduce_at(&d.premises[i], rest)?;
                let mut out = d.clone();
                out.premises[i] = p;
                out.term = Term::app(out.premises[0].term.clone(), out.premises[1].term.clone());
                Ok(out)
            }
            Some((Dir::Body, _)) => Err(ReduceError::NoRedex),
            None => {
                if !d.term.is_beta_redex() {
                    return Err(ReduceError::NoRedex);
                }
                let mut taken = d.names();
                let c = canon(&d.premises[0], &mut taken)?;
                if !c.prefix.is_empty() {
                    return Err(ReduceError::Shape("abstraction type keeps quantifiers".into()));
                }
                let arg = &d.premises[1];
                let body = if c.b.alpha_eq(&arg.ty) { c.body } else {
                    return Err(ReduceError::Shape(format!("argument has type {}, abstraction expects {}", arg.ty, c.b)));
                };
                let mut out = subst_lambda(&body, &c.x, arg);
                out.ctx = d.ctx.clone();
                Ok(out)
            }
        },
        Rule::R1 => Err(ReduceError::NoRedex),
    }
}
