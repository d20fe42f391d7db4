//! First-order unification over formulas with metavariables, used by the
//! proof search, the chain finders and the classifier.
//!
//! Metavariables are first-order variables named `?k`. Each one carries the
//! clock value at which it was created; a metavariable may only be bound to
//! terms whose rigid variables were introduced before it. Names starting with
//! `!` stand for variables bound inside the formulas being unified.

use std::collections::{BTreeSet, HashMap};

use crate::logic::{fresh_from, FoTerm, Formula, Head};

#[derive(Clone, Debug, Default)]
pub(crate) struct Unifier {
    subst: HashMap<String, FoTerm>,
    stamp: HashMap<String, usize>,
    hint: HashMap<String, String>,
    eigen: HashMap<String, usize>,
    clock: usize,
    next_meta: usize,
    next_bound: usize,
    /// Rigid clashes postponed to a later check modulo the theory.
    pub deferred: Vec<(FoTerm, FoTerm)>,
    pub modulo_e: bool,
}

pub(crate) fn is_meta(x: &str) -> bool {
    x.starts_with('?')
}

fn is_local(x: &str) -> bool {
    x.starts_with('!')
}

impl Unifier {
    pub fn new(modulo_e: bool) -> Unifier {
        Unifier { modulo_e, ..Unifier::default() }
    }

    pub fn fresh_meta(&mut self, hint: &str) -> FoTerm {
        let name = format!("?{}", self.next_meta);
        self.next_meta += 1;
        self.stamp.insert(name.clone(), self.clock);
        self.clock += 1;
        self.hint.insert(name.clone(), hint.to_string());
        FoTerm::Var(name)
    }

    /// Registers a rigid variable that earlier metavariables must not see.
    pub fn add_eigen(&mut self, x: &str) {
        self.eigen.insert(x.to_string(), self.clock);
        self.clock += 1;
    }

    pub fn hint(&self, m: &str) -> &str {
        self.hint.get(m).map(String::as_str).unwrap_or("x")
    }

    pub fn zonk(&self, t: &FoTerm) -> FoTerm {
        t.subst(&|v| if is_meta(v) { self.subst.get(v).map(|u| self.zonk(u)) } else { None })
    }

    pub fn zonk_formula(&self, f: &Formula) -> Formula {
        let pairs: Vec<(String, FoTerm)> = f
            .fo_free()
            .into_iter()
            .filter(|v| is_meta(v) && self.subst.contains_key(v))
            .map(|v| {
                let u = self.zonk(&FoTerm::Var(v.clone()));
                (v, u)
            })
            .collect();
        f.fo_subst(&pairs)
    }

    fn bind(&mut self, m: &str, t: &FoTerm) -> bool {
        let t = self.zonk(t);
        if t == FoTerm::Var(m.to_string()) {
            return true;
        }
        let s = self.stamp[m];
        for v in t.vars() {
            if v == m || is_local(&v) {
                return false;
            }
            if is_meta(&v) {
                let e = self.stamp.get_mut(&v).expect("known metavariable");
                *e = (*e).min(s);
            } else if self.eigen.get(&v).is_some_and(|&e| e >= s) {
                return false;
            }
        }
        self.subst.insert(m.to_string(), t);
        true
    }

    pub fn unify_terms(&mut self, a: &FoTerm, b: &FoTerm) -> bool {
        let a = self.walk(a);
        let b = self.walk(b);
        match (&a, &b) {
            (FoTerm::Var(x), FoTerm::Var(y)) if x == y => true,
            (FoTerm::Var(x), _) if is_meta(x) => self.bind(x, &b),
            (_, FoTerm::Var(y)) if is_meta(y) => self.bind(y, &a),
            (FoTerm::App(f, xs), FoTerm::App(g, ys)) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| self.unify_terms(x, y))
            }
            _ => {
                if self.modulo_e {
                    let (za, zb) = (self.zonk(&a), self.zonk(&b));
                    if za.vars().iter().chain(zb.vars().iter()).all(|v| !is_local(v)) {
                        self.deferred.push((za, zb));
                        return true;
                    }
                }
                false
            }
        }
    }

    fn walk(&self, t: &FoTerm) -> FoTerm {
        let mut cur = t.clone();
        while let FoTerm::Var(x) = &cur {
            match self.subst.get(x) {
                Some(u) => cur = u.clone(),
                None => break,
            }
        }
        cur
    }

    fn fresh_local(&mut self) -> String {
        self.next_bound += 1;
        format!("!{}", self.next_bound)
    }

    pub fn unify(&mut self, a: &Formula, b: &Formula) -> bool {
        match (a, b) {
            (Formula::Atom(h1, xs), Formula::Atom(h2, ys)) => {
                h1 == h2 && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify_terms(x, y))
            }
            (Formula::Arrow(a1, b1), Formula::Arrow(a2, b2)) => self.unify(a1, a2) && self.unify(b1, b2),
            (Formula::ForallFo(x, a1), Formula::ForallFo(y, b1)) => {
                let z = FoTerm::Var(self.fresh_local());
                let a1 = a1.fo_subst(&[(x.clone(), z.clone())]);
                let b1 = b1.fo_subst(&[(y.clone(), z)]);
                self.unify(&a1, &b1)
            }
            (Formula::ForallRel(x, n, a1), Formula::ForallRel(y, m, b1)) if n == m => {
                let z = self.fresh_local();
                let a1 = a1.rename_rel(x, *n, &z);
                let b1 = b1.rename_rel(y, *n, &z);
                self.unify(&a1, &b1)
            }
            _ => false,
        }
    }

    /// Metavariables of `f` that are still unassigned.
    pub fn open_metas(&self, f: &Formula) -> Vec<String> {
        let z = self.zonk_formula(f);
        z.fo_free().into_iter().filter(|v| is_meta(v)).collect()
    }

    /// Assigns every unassigned metavariable in `metas` a fresh ordinary
    /// variable named after its hint.
    pub fn default_metas(&mut self, metas: &[String], taken: &mut BTreeSet<String>) {
        for m in metas {
            if self.subst.contains_key(m) {
                continue;
            }
            let base = self.hint(m).to_string();
            let base = if base.starts_with(['?', '!']) || base.is_empty() { "x".to_string() } else { base };
            let v = fresh_from(&base, &|c| taken.contains(c));
            taken.insert(v.clone());
            self.subst.insert(m.clone(), FoTerm::Var(v));
        }
    }

    pub fn metas_of_term(&self, t: &FoTerm) -> Vec<String> {
        self.zonk(t).vars().into_iter().filter(|v| is_meta(v)).collect()
    }
}

/// Relation heads of a formula, free or not.
pub(crate) fn heads(f: &Formula, out: &mut Vec<(Head, usize)>) {
    match f {
        Formula::Atom(h, args) => {
            let k = (h.clone(), args.len());
            if !out.contains(&k) {
                out.push(k);
            }
        }
        Formula::Arrow(a, b) => {
            heads(a, out);
            heads(b, out);
        }
        Formula::ForallFo(_, a) | Formula::ForallRel(_, _, a) => heads(a, out),
    }
}
