//! Syntactic classes of types: quantifier polarity, properness, subtypes by
//! polarity, condition (*) and the good-positive-type verdict.

use std::collections::BTreeSet;
use std::fmt;

use crate::bounds::Bounds;
use crate::logic::{approx_e, fresh_from, Congruence, FoTerm, Formula, Signature, Theory};
use crate::typing::chain::rel_candidates;
use crate::typing::unify::Unifier;
use crate::typing::{leq, sim, ChainStep, InstChain};

/// Four-valued polarity verdict: atoms satisfy both definitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quant {
    Pos,
    Neg,
    Both,
    Neither,
}

impl Quant {
    fn from_pair(pos: bool, neg: bool) -> Quant {
        match (pos, neg) {
            (true, true) => Quant::Both,
            (true, false) => Quant::Pos,
            (false, true) => Quant::Neg,
            (false, false) => Quant::Neither,
        }
    }

    pub fn is_pos(self) -> bool {
        matches!(self, Quant::Pos | Quant::Both)
    }

    pub fn is_neg(self) -> bool {
        matches!(self, Quant::Neg | Quant::Both)
    }
}

impl fmt::Display for Quant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quant::Pos => "pos",
            Quant::Neg => "neg",
            Quant::Both => "both",
            Quant::Neither => "neither",
        })
    }
}

fn q2(a: &Formula) -> (bool, bool) {
    match a {
        Formula::Atom(..) => (true, true),
        Formula::Arrow(b, c) => {
            let (bp, bn) = q2(b);
            let (cp, cn) = q2(c);
            (cp && bn, cn && bp)
        }
        Formula::ForallFo(_, b) => q2(b),
        Formula::ForallRel(x, n, b) => {
            let (p, neg) = q2(b);
            (p, neg && !b.has_rel_free(x, *n))
        }
    }
}

/// Positive / negative second-order quantifiers.
pub fn classify_quant2(a: &Formula) -> Quant {
    let (p, n) = q2(a);
    Quant::from_pair(p, n)
}

fn q1(a: &Formula) -> (bool, bool) {
    match a {
        Formula::Atom(..) => (true, true),
        Formula::Arrow(b, c) => {
            let (bp, bn) = q1(b);
            let (cp, cn) = q1(c);
            let c_fo = matches!(**c, Formula::ForallFo(..));
            (cp && bn, cn && !c_fo && bp)
        }
        Formula::ForallFo(_, b) => (false, q1(b).1),
        Formula::ForallRel(x, n, b) => (q1(b).0 && b.has_rel_free(x, *n), false),
    }
}

/// Positive / negative types.
pub fn classify_quant(a: &Formula) -> Quant {
    let (p, n) = q1(a);
    Quant::from_pair(p, n)
}

pub fn is_proper(a: &Formula) -> bool {
    match a {
        Formula::Atom(..) => true,
        Formula::Arrow(b, c) => is_proper(b) && is_proper(c),
        Formula::ForallFo(x, b) => is_proper(b) && b.has_fo_free(x),
        Formula::ForallRel(x, n, b) => is_proper(b) && b.has_rel_free(x, *n),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

/// A subtype occurrence with its enclosing binders renamed: relation
/// binders to the representative of a fresh family, first-order binders to
/// substitution slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchematicSubtype {
    pub formula: Formula,
    /// Bound relation variable and the base name of its family.
    pub fresh_families: Vec<(String, String)>,
    pub substitution_slots: Vec<String>,
    /// Position in the original type: 0 for left/body, 1 for right.
    pub position: Vec<u8>,
    pub sign: Sign,
}

impl SchematicSubtype {
    /// Neither occurrence lies inside the other.
    pub fn disjoint(&self, other: &SchematicSubtype) -> bool {
        !self.position.starts_with(&other.position) && !other.position.starts_with(&self.position)
    }

    /// Substitution instances over the function symbols of `sig` and the slots,
    /// with terms of depth at most `depth`, at most `cap` of them.
    pub fn instances(&self, sig: &Signature, depth: usize, cap: usize) -> Vec<Formula> {
        let slots = &self.substitution_slots;
        if slots.is_empty() {
            return vec![self.formula.clone()];
        }
        let mut terms: Vec<FoTerm> = slots.iter().map(|s| FoTerm::var(s)).collect();
        for _ in 0..depth {
            let mut next = terms.clone();
            for (f, n) in &sig.funs {
                let mut tuples: Vec<Vec<FoTerm>> = vec![Vec::new()];
                for _ in 0..*n {
                    tuples = tuples
                        .into_iter()
                        .flat_map(|t| terms.iter().map(move |a| [t.clone(), vec![a.clone()]].concat()))
                        .take(cap)
                        .collect();
                }
                for args in tuples {
                    let t = FoTerm::App(f.clone(), args);
                    if !next.contains(&t) {
                        next.push(t);
                    }
                }
            }
            terms = next;
        }
        let mut out: Vec<Formula> = Vec::new();
        let mut assign: Vec<Vec<FoTerm>> = vec![Vec::new()];
        for _ in slots {
            assign = assign
                .into_iter()
                .flat_map(|a| terms.iter().map(move |t| [a.clone(), vec![t.clone()]].concat()))
                .take(cap)
                .collect();
        }
        for a in assign {
            let pairs: Vec<(String, FoTerm)> = slots.iter().cloned().zip(a).collect();
            out.push(self.formula.fo_subst(&pairs));
            if out.len() >= cap {
                break;
            }
        }
        out
    }
}

impl fmt::Display for SchematicSubtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula)?;
        if !self.substitution_slots.is_empty() {
            write!(f, "  [slots: {}]", self.substitution_slots.join(", "))?;
        }
        Ok(())
    }
}

/// All subtype occurrences of `a`, of both signs.
fn occurrences(a: &Formula) -> Vec<SchematicSubtype> {
    let mut taken = a.names();
    let mut out = Vec::new();
    walk(a, Sign::Pos, &mut Vec::new(), &mut Vec::new(), &mut taken, &mut out);
    if let (Formula::Atom(..), Some(root)) = (a, out.first().cloned()) {
        out.push(SchematicSubtype { sign: Sign::Neg, ..root });
    }
    out
}

fn walk(
    f: &Formula,
    sign: Sign,
    path: &mut Vec<u8>,
    families: &mut Vec<(String, String)>,
    taken: &mut BTreeSet<String>,
    out: &mut Vec<SchematicSubtype>,
) {
    let names = f.names();
    let fams: Vec<(String, String)> = families.iter().filter(|(_, fam)| names.contains(&format!("{fam}_0"))).cloned().collect();
    out.push(SchematicSubtype {
        formula: f.clone(),
        fresh_families: fams,
        substitution_slots: f.fo_free(),
        position: path.clone(),
        sign,
    });
    match f {
        Formula::Atom(..) => {}
        Formula::Arrow(b, c) => {
            path.push(0);
            walk(b, sign.flip(), path, families, taken, out);
            path.pop();
            path.push(1);
            walk(c, sign, path, families, taken, out);
            path.pop();
        }
        Formula::ForallRel(x, n, b) => {
            let base = fresh_from(x, &|c| taken.contains(&format!("{c}_0")));
            taken.insert(base.clone());
            let rep = format!("{base}_0");
            taken.insert(rep.clone());
            families.push((x.clone(), base));
            let body = b.rename_rel(x, *n, &rep);
            path.push(0);
            walk(&body, sign, path, families, taken, out);
            path.pop();
            families.pop();
        }
        Formula::ForallFo(x, b) => {
            let slot = fresh_from(x, &|c| taken.contains(c));
            taken.insert(slot.clone());
            let body = b.fo_subst(&[(x.clone(), FoTerm::var(&slot))]);
            path.push(0);
            walk(&body, sign, path, families, taken, out);
            path.pop();
        }
    }
}

/// Subtypes of the given sign, in traversal order. Substitution instances
/// are left schematic; see [`SchematicSubtype::instances`].
pub fn subtypes(a: &Formula, sign: Sign, _bounds: &Bounds) -> Vec<SchematicSubtype> {
    occurrences(a).into_iter().filter(|s| s.sign == sign).collect()
}

/// Data refuting condition (*): `B < G`, `G ∼ C_n`, `C ≤ C_1 → ... → C_n → D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarWitness {
    pub b: Formula,
    pub c: Formula,
    pub g: Formula,
    pub n: usize,
    /// `C_1, ..., C_n, D`.
    pub c_parts: Vec<Formula>,
    pub b_lt_g: InstChain,
    pub g_sim_cn: InstChain,
    pub c_leq: InstChain,
    pub b_subtype: Formula,
    pub c_subtype: Formula,
}

impl StarWitness {
    /// Replays the three chains and checks the strictness of `B < G`.
    pub fn verify(&self, th: &Theory) -> bool {
        let cn = &self.c_parts[self.n - 1];
        let arrow = Formula::arrows(self.c_parts[..self.n].to_vec(), self.c_parts[self.n].clone());
        self.b_lt_g.verify(th)
            && self.b_lt_g.from == self.b
            && self.b_lt_g.to.alpha_eq(&self.g)
            && !self.b.alpha_eq(&self.g)
            && self.g_sim_cn.verify(th)
            && self.g_sim_cn.from.alpha_eq(&self.g)
            && self.g_sim_cn.to.alpha_eq(cn)
            && self.c_leq.verify(th)
            && self.c_leq.from == self.c
            && self.c_leq.to.alpha_eq(&arrow)
    }
}

impl fmt::Display for StarWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "B = {}  (subtype {})", self.b, self.b_subtype)?;
        writeln!(f, "C = {}  (subtype {})", self.c, self.c_subtype)?;
        writeln!(f, "G = {}, n = {}", self.g, self.n)?;
        let parts: Vec<String> = self.c_parts.iter().map(|p| p.to_string()).collect();
        writeln!(f, "C_1..C_n, D = {}", parts.join(" ; "))?;
        writeln!(f, "B < G:\n  {}", self.b_lt_g.to_string().replace('\n', "\n  "))?;
        writeln!(f, "G ~ C_n:\n  {}", self.g_sim_cn.to_string().replace('\n', "\n  "))?;
        write!(f, "C <= C_1 -> ... -> C_n -> D:\n  {}", self.c_leq.to_string().replace('\n', "\n  "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Star {
    Violated(Box<StarWitness>),
    ClearWithinBounds(Bounds),
}

impl Star {
    /// No instantiation is allowed, so the scan is vacuous.
    pub fn is_trivial(&self) -> bool {
        matches!(self, Star::ClearWithinBounds(b) if b.max_inst_depth == 0)
    }
}

impl fmt::Display for Star {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Star::Violated(_) => write!(f, "violated"),
            Star::ClearWithinBounds(b) if b.max_inst_depth == 0 => write!(f, "clear at trivial bound (maxInstDepth=0)"),
            Star::ClearWithinBounds(b) => write!(f, "clear within bounds ({b})"),
        }
    }
}

fn rename_slots(f: &Formula, slots: &[String], u: &mut Unifier) -> Formula {
    let pairs: Vec<(String, FoTerm)> = slots.iter().map(|s| (s.clone(), u.fresh_meta(s))).collect();
    f.fo_subst(&pairs)
}

/// Strips head quantifiers of `c`: first-order ones become metavariables,
/// relation ones fresh relation variables.
fn strip_head(c: &Formula, u: &mut Unifier, taken: &mut BTreeSet<String>) -> (Formula, Vec<ChainStep>) {
    let mut cur = c.clone();
    let mut steps = Vec::new();
    loop {
        match cur {
            Formula::ForallFo(x, b) => {
                let m = u.fresh_meta(&x);
                cur = b.fo_subst(&[(x, m.clone())]);
                steps.push(ChainStep::FoInst(m));
            }
            Formula::ForallRel(x, n, b) => {
                let z = fresh_from(&x, &|c| taken.contains(c));
                taken.insert(z.clone());
                let params: Vec<String> = (0..n).map(|i| format!("p_{i}")).collect();
                let f = Formula::atom(&z, params.iter().map(|p| FoTerm::var(p)).collect());
                cur = b.rename_rel(&x, n, &z);
                steps.push(ChainStep::RelInst { var: x, params, formula: f });
            }
            other => return (other, steps),
        }
    }
}

struct StarSearch<'a> {
    th: &'a Theory,
    bounds: &'a Bounds,
    work: usize,
}

impl StarSearch<'_> {
    /// Instantiates head quantifiers of `cur` (at least once) until it unifies
    /// with `target`. Returns the unifier and the instance.
    fn lt(&mut self, cur: &Formula, target: &Formula, u: &Unifier, depth: usize, budget: usize) -> Option<(Unifier, Formula)> {
        if self.work == 0 {
            return None;
        }
        self.work -= 1;
        if depth > 0 {
            let mut trial = u.clone();
            if trial.unify(cur, target) && self.deferred_ok(&mut trial, cur, target) {
                return Some((trial, cur.clone()));
            }
        }
        if budget == 0 {
            return None;
        }
        match cur {
            Formula::ForallFo(x, a) => {
                let mut u2 = u.clone();
                let m = u2.fresh_meta(x);
                let next = a.fo_subst(&[(x.clone(), m)]);
                self.lt(&next, target, &u2, depth + 1, budget - 1)
            }
            Formula::ForallRel(x, n, a) => {
                for (params, f) in rel_candidates(x, *n, a, target, u) {
                    let Ok(next) = a.rel_subst(x, &params, &f) else { continue };
                    if let Some(r) = self.lt(&next, target, u, depth + 1, budget - 1) {
                        return Some(r);
                    }
                }
                None
            }
            _ => None,
        }
    }

    /// Checks the postponed clashes modulo the theory, after grounding the
    /// metavariables that remain in them.
    fn deferred_ok(&self, u: &mut Unifier, a: &Formula, b: &Formula) -> bool {
        let pending = std::mem::take(&mut u.deferred);
        let mut taken = a.names();
        taken.extend(b.names());
        for (s, t) in &pending {
            let mut metas = u.metas_of_term(s);
            metas.extend(u.metas_of_term(t));
            u.default_metas(&metas, &mut taken);
            if approx_e(&u.zonk(s), &u.zonk(t), self.th, self.bounds) != Congruence::Equal {
                return false;
            }
        }
        true
    }

    fn pair(&mut self, bs: &SchematicSubtype, cs: &SchematicSubtype, names: &BTreeSet<String>) -> Option<StarWitness> {
        let mut u = Unifier::new(!self.th.equations.is_empty());
        let b0 = rename_slots(&bs.formula, &bs.substitution_slots, &mut u);
        let c0 = rename_slots(&cs.formula, &cs.substitution_slots, &mut u);
        let mut taken = names.clone();
        let (c_body, c_steps) = strip_head(&c0, &mut u, &mut taken);
        let mut parts = Vec::new();
        let mut rest = c_body.clone();
        while let Formula::Arrow(l, r) = rest {
            parts.push(*l);
            rest = *r;
        }
        for n in (1..=parts.len()).rev() {
            let target = &parts[n - 1];
            let Some((mut u2, g)) = self.lt(&b0, target, &u, 0, self.bounds.max_inst_depth) else { continue };
            let mut all = Vec::new();
            for f in [&b0, &c0, &g, &c_body] {
                all.extend(u2.open_metas(f));
            }
            for s in &c_steps {
                if let ChainStep::FoInst(t) = s {
                    all.extend(u2.metas_of_term(t));
                }
            }
            let mut taken2 = taken.clone();
            u2.default_metas(&all, &mut taken2);
            let b = u2.zonk_formula(&b0);
            let c = u2.zonk_formula(&c0);
            let g = u2.zonk_formula(&g);
            if b.alpha_eq(&g) {
                continue;
            }
            let zparts: Vec<Formula> = parts.iter().map(|p| u2.zonk_formula(p)).collect();
            let d = Formula::arrows(zparts[n..].to_vec(), u2.zonk_formula(&rest));
            let mut c_parts = zparts[..n].to_vec();
            c_parts.push(d.clone());
            let arrow = Formula::arrows(zparts[..n].to_vec(), d);
            let steps: Vec<ChainStep> = c_steps
                .iter()
                .map(|s| match s {
                    ChainStep::FoInst(t) => ChainStep::FoInst(u2.zonk(t)),
                    s => s.clone(),
                })
                .collect();
            let c_leq = InstChain { from: c.clone(), steps, to: arrow };
            if !c_leq.verify(self.th) {
                continue;
            }
            let Some(b_lt_g) = leq(&b, &g, self.th, self.bounds) else { continue };
            let Some(g_sim_cn) = sim(&g, &zparts[n - 1], self.th, self.bounds) else { continue };
            let w = StarWitness {
                b,
                c,
                g,
                n,
                c_parts,
                b_lt_g,
                g_sim_cn,
                c_leq,
                b_subtype: bs.formula.clone(),
                c_subtype: cs.formula.clone(),
            };
            if w.verify(self.th) {
                return Some(w);
            }
        }
        None
    }
}

/// Scans pairs of subtypes of the sign selected by the polarity of `a`
/// (negative subtypes unless `a` is only negative). Quantified `C` come
/// first, then smaller pairs, then longer arrow prefixes of `C`.
pub fn check_condition_star(a: &Formula, th: &Theory, bounds: &Bounds) -> Star {
    if bounds.max_inst_depth == 0 {
        return Star::ClearWithinBounds(*bounds);
    }
    let sign = if classify_quant(a) == Quant::Neg { Sign::Pos } else { Sign::Neg };
    let subs = subtypes(a, sign, bounds);
    // A quantifier body adds nothing as C: its instances are instances of
    // the quantified occurrence.
    let is_body = |c: &SchematicSubtype| {
        c.position.last() == Some(&0)
            && subs.iter().any(|p| p.position.len() + 1 == c.position.len() && c.position.starts_with(&p.position) && p.formula.starts_with_quantifier())
    };
    let mut pairs: Vec<(bool, usize, usize, usize)> = Vec::new();
    for (i, b) in subs.iter().enumerate() {
        if !b.formula.starts_with_quantifier() {
            continue;
        }
        for (j, c) in subs.iter().enumerate() {
            if b.disjoint(c) && !is_body(c) && matches!(c.formula, Formula::Arrow(..) | Formula::ForallFo(..) | Formula::ForallRel(..)) {
                pairs.push((!c.formula.starts_with_quantifier(), b.formula.size() + c.formula.size(), i, j));
            }
        }
    }
    pairs.sort();
    let mut names = a.names();
    for s in &subs {
        s.formula.all_names(&mut names);
    }
    let mut search = StarSearch { th, bounds, work: bounds.max_steps };
    for (_, _, i, j) in pairs {
        if let Some(w) = search.pair(&subs[i], &subs[j], &names) {
            return Star::Violated(Box::new(w));
        }
        if search.work == 0 {
            break;
        }
    }
    Star::ClearWithinBounds(*bounds)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BPlus {
    Yes,
    No(String),
    UnknownWithinBounds(String),
}

impl fmt::Display for BPlus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BPlus::Yes => write!(f, "yes"),
            BPlus::No(r) => write!(f, "no ({r})"),
            BPlus::UnknownWithinBounds(r) => write!(f, "unknown within bounds ({r})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub forall2: Quant,
    pub forall: Quant,
    pub proper: bool,
    pub star: Star,
    pub b_plus: BPlus,
}

pub fn classify(a: &Formula, th: &Theory, bounds: &Bounds) -> Classification {
    let forall2 = classify_quant2(a);
    let forall = classify_quant(a);
    let proper = is_proper(a);
    let star = check_condition_star(a, th, bounds);
    let b_plus = if !forall.is_pos() {
        BPlus::No("not forall+".into())
    } else {
        match &star {
            Star::Violated(_) => BPlus::No("condition (*) violated".into()),
            s if s.is_trivial() => BPlus::UnknownWithinBounds("condition (*) only checked at maxInstDepth=0".into()),
            _ => BPlus::Yes,
        }
    };
    Classification { forall2, forall, proper, star, b_plus }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "forall2: {}", self.forall2)?;
        writeln!(f, "forall: {}", self.forall)?;
        writeln!(f, "proper: {}", self.proper)?;
        writeln!(f, "star: {}", self.star)?;
        write!(f, "bplus: {}", self.b_plus)?;
        if let Star::Violated(w) = &self.star {
            write!(f, "\nwitness:\n{w}")?;
        }
        Ok(())
    }
}
