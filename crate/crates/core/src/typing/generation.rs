//! Decomposition of typing judgments along the last syntax-directed rule.

use std::fmt;

use crate::bounds::Bounds;
use crate::lambda::Term;
use crate::logic::{FoTerm, Formula, Theory};

use super::chain::{ChainStep, InstChain};
use super::infer::{infer_normal, InferMode, InferResult};
use super::{Context, Derivation, Payload, Rule};

/// One argument of a head-variable spine: `B'_{i-1} ≤ C_i → B_i`, `B_i ∼ B'_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub arg_type: Formula,
    pub result: Formula,
    pub leq: InstChain,
    pub sim: InstChain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    /// `A = ∀ξ C'`, `B ≤ C ∼ C'` with `x : B` in the context.
    Var { xi: Vec<String>, b: Formula, c: Formula, c_prime: Formula, leq: InstChain, sim: InstChain },
    /// `A = ∀ξ (B' → C')`, premise `Γ, x : B ⊢ u : C`.
    Abs { xi: Vec<String>, b: Formula, b_prime: Formula, c: Formula, c_prime: Formula, sim_b: InstChain, sim_c: InstChain, premise: Derivation },
    /// `(y)u1...un : ∀ξ C'` with `y : F`.
    Spine { xi: Vec<String>, head: String, head_type: Formula, segments: Vec<Segment>, last_leq: InstChain, last_sim: InstChain, c_prime: Formula },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotFound {
    pub exhaustive: bool,
}

/// Finds a derivation of `ctx ⊢ t : a` and reads the decomposition off it.
/// Only β-normal subjects are handled; other applications report a
/// non-exhaustive failure.
pub fn generation(ctx: &Context, t: &Term, a: &Formula, th: &Theory, bounds: &Bounds) -> Result<Decomposition, NotFound> {
    match infer_normal(ctx, t, a, th, InferMode::Af2Bounded, bounds) {
        InferResult::Typable(d) => decompose(&d, th).ok_or(NotFound { exhaustive: false }),
        InferResult::NotTypable { exhaustive, .. } => Err(NotFound { exhaustive: exhaustive && t.is_beta_normal() }),
    }
}

fn step_of(d: &Derivation) -> Option<ChainStep> {
    Some(match &d.payload {
        Payload::Term(u) => ChainStep::FoInst(u.clone()),
        Payload::RelInst { var, params, formula } => {
            ChainStep::RelInst { var: var.clone(), params: params.clone(), formula: formula.clone() }
        }
        Payload::RelRename { var, rel } => {
            let n = match &d.premises[0].ty {
                Formula::ForallRel(_, n, _) => *n,
                _ => return None,
            };
            let params: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
            let formula = Formula::Atom(rel.clone(), params.iter().map(|p| FoTerm::var(p)).collect());
            ChainStep::RelInst { var: var.clone(), params, formula }
        }
        Payload::Eq { template, var, from, to } => {
            ChainStep::EqStep { template: template.clone(), var: var.clone(), from: from.clone(), to: to.clone() }
        }
        _ => return None,
    })
}

/// Reads the decomposition off a derivation whose shape follows the search:
/// introductions at the root, then R2 or a spine.
pub fn decompose(d: &Derivation, th: &Theory) -> Option<Decomposition> {
    let mut xi = Vec::new();
    let mut cur = d;
    while matches!(cur.rule, Rule::R4 | Rule::R6) {
        match &cur.ty {
            Formula::ForallFo(x, _) | Formula::ForallRel(x, _, _) => xi.push(x.clone()),
            _ => return None,
        }
        cur = &cur.premises[0];
    }
    if cur.rule == Rule::R2 {
        let Formula::Arrow(b, c) = &cur.ty else { return None };
        return Some(Decomposition::Abs {
            xi,
            b: (**b).clone(),
            b_prime: (**b).clone(),
            c: (**c).clone(),
            c_prime: (**c).clone(),
            sim_b: InstChain::empty(b),
            sim_c: InstChain::empty(c),
            premise: cur.premises[0].clone(),
        });
    }
    let c_prime = cur.ty.clone();
    // Nodes from the head leaf up to `cur`.
    let mut spine = Vec::new();
    let mut n = cur;
    loop {
        spine.push(n);
        if n.rule == Rule::R1 {
            break;
        }
        if n.premises.is_empty() {
            return None;
        }
        n = &n.premises[0];
    }
    spine.reverse();
    let Term::Var(head) = &spine[0].term else { return None };
    let head_type = spine[0].ty.clone();
    let mut segments = Vec::new();
    let mut chain = InstChain::empty(&head_type);
    let mut eqs = InstChain::empty(&head_type);
    for node in &spine[1..] {
        match node.rule {
            Rule::R5 | Rule::R7 | Rule::R7o => {
                chain.steps.push(step_of(node)?);
                chain.to = node.ty.clone();
            }
            Rule::R3 => {
                let Formula::Arrow(c_i, b_i) = &chain.to else { return None };
                segments.push(Segment { arg_type: (**c_i).clone(), result: (**b_i).clone(), leq: chain.clone(), sim: InstChain::empty(b_i) });
                chain = InstChain::empty(&node.ty);
            }
            Rule::R8 => {
                if eqs.steps.is_empty() {
                    eqs = InstChain::empty(&chain.to);
                }
                eqs.steps.push(step_of(node)?);
                eqs.to = node.ty.clone();
            }
            _ => return None,
        }
    }
    if eqs.steps.is_empty() {
        eqs = InstChain::empty(&chain.to);
    }
    debug_assert!(chain.verify(th) && eqs.verify(th));
    if segments.is_empty() {
        return Some(Decomposition::Var { xi, b: head_type, c: chain.to.clone(), c_prime, leq: chain, sim: eqs });
    }
    Some(Decomposition::Spine { xi, head: head.clone(), head_type, segments, last_leq: chain, last_sim: eqs, c_prime })
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decomposition::Var { xi, b, c, c_prime, .. } => {
                write!(f, "var clause: xi = ({}), B = {b}, C = {c}, C' = {c_prime}", xi.join(", "))
            }
            Decomposition::Abs { xi, b, b_prime, c, c_prime, .. } => {
                write!(f, "abs clause: xi = ({}), B = {b}, B' = {b_prime}, C = {c}, C' = {c_prime}", xi.join(", "))
            }
            Decomposition::Spine { xi, head, head_type, segments, last_leq, c_prime, .. } => {
                write!(f, "spine clause: xi = ({}), {head} : {head_type}", xi.join(", "))?;
                for (i, s) in segments.iter().enumerate() {
                    write!(f, "\n  C_{} = {}, B_{} = {}", i + 1, s.arg_type, i + 1, s.result)?;
                }
                write!(f, "\n  B_{} = {}, C' = {c_prime}", segments.len() + 1, last_leq.to)
            }
        }
    }
}
