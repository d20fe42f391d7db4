//! Shared generators and independent reference implementations.
#![allow(dead_code)]

use std::collections::BTreeSet;

use af2::lambda::Term;
use af2::logic::{FoTerm, Formula};
use proptest::prelude::*;

/// Named λ-terms, kept separate from the kernel's representation so that
/// they can serve as an oracle.
#[derive(Clone, Debug)]
pub enum Named {
    V(String),
    L(String, Box<Named>),
    A(Box<Named>, Box<Named>),
}

impl Named {
    pub fn to_term(&self) -> Term {
        match self {
            Named::V(x) => Term::var(x),
            Named::L(x, b) => Term::lam(x, b.to_term()),
            Named::A(f, a) => Term::app(f.to_term(), a.to_term()),
        }
    }

    /// `Fv(x) = {x}`, `Fv(λx u) = Fv(u) \ {x}`, `Fv((t)u) = Fv(t) ∪ Fv(u)`.
    pub fn fv(&self) -> BTreeSet<String> {
        match self {
            Named::V(x) => [x.clone()].into(),
            Named::L(x, b) => {
                let mut s = b.fv();
                s.remove(x);
                s
            }
            Named::A(f, a) => f.fv().union(&a.fv()).cloned().collect(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Named::V(_) => 1,
            Named::L(_, b) => 1 + b.size(),
            Named::A(f, a) => 1 + f.size() + a.size(),
        }
    }

    /// Textbook capture-avoiding substitution with renaming.
    pub fn subst(&self, x: &str, u: &Named) -> Named {
        match self {
            Named::V(y) if y == x => u.clone(),
            Named::V(_) => self.clone(),
            Named::A(f, a) => Named::A(Box::new(f.subst(x, u)), Box::new(a.subst(x, u))),
            Named::L(y, _) if y == x => self.clone(),
            Named::L(y, b) => {
                let ufv = u.fv();
                if ufv.contains(y) && b.fv().contains(x) {
                    let mut avoid = ufv.clone();
                    avoid.extend(b.fv());
                    avoid.insert(x.to_string());
                    let mut k = 0;
                    let z = loop {
                        let c = format!("{y}{k}");
                        if !avoid.contains(&c) {
                            break c;
                        }
                        k += 1;
                    };
                    let b2 = b.subst(y, &Named::V(z.clone()));
                    Named::L(z, Box::new(b2.subst(x, u)))
                } else {
                    Named::L(y.clone(), Box::new(b.subst(x, u)))
                }
            }
        }
    }
}

pub fn named(max_depth: u32) -> impl Strategy<Value = Named> {
    let leaf = prop::sample::select(vec!["x", "y", "z", "w"]).prop_map(|v| Named::V(v.to_string()));
    leaf.prop_recursive(max_depth, 24, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["x", "y", "z"]), inner.clone()).prop_map(|(x, b)| Named::L(x.to_string(), Box::new(b))),
            (inner.clone(), inner).prop_map(|(f, a)| Named::A(Box::new(f), Box::new(a))),
        ]
    })
}

/// Terms of size at most `max`, biased towards redexes.
pub fn term_up_to(max: usize) -> impl Strategy<Value = Term> {
    let redexy = (named(3), named(3), prop::sample::select(vec!["x", "y"]))
        .prop_map(|(b, a, x)| Named::A(Box::new(Named::L(x.to_string(), Box::new(b))), Box::new(a)));
    prop_oneof![named(4), redexy, named(4).prop_map(|b| Named::L("x".into(), Box::new(Named::A(Box::new(b), Box::new(Named::V("x".into()))))))]
        .prop_filter("size bound", move |n| n.size() <= max)
        .prop_map(|n| n.to_term())
}

pub fn fo_term() -> impl Strategy<Value = FoTerm> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["x", "y"]).prop_map(FoTerm::var),
        Just(FoTerm::cst("0")),
    ];
    leaf.prop_recursive(2, 4, 1, |inner| inner.prop_map(|t| FoTerm::app("s", vec![t])))
}

/// Formulas over `X/1`, `Y/0`, `x`, `y`, `0`, `s`.
pub fn formula(depth: u32) -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![
        fo_term().prop_map(|t| Formula::atom("X", vec![t])),
        Just(Formula::atom("Y", vec![])),
    ];
    atom.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::arrow(a, b)),
            (prop::sample::select(vec!["x", "y"]), inner.clone()).prop_map(|(x, a)| Formula::forall_fo(x, a)),
            inner.clone().prop_map(|a| Formula::forall_rel("X", 1, a)),
            inner.prop_map(|a| Formula::forall_rel("Y", 0, a)),
        ]
    })
}
