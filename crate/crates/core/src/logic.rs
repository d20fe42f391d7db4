//! First-order terms, second-order formulas, substitutions, equational
//! theories and the congruence ≈_E.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::bounds::Bounds;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FoTerm {
    Var(String),
    App(String, Vec<FoTerm>),
}

impl FoTerm {
    pub fn var(x: &str) -> FoTerm {
        FoTerm::Var(x.to_string())
    }

    pub fn cst(c: &str) -> FoTerm {
        FoTerm::App(c.to_string(), Vec::new())
    }

    pub fn app(f: &str, args: Vec<FoTerm>) -> FoTerm {
        FoTerm::App(f.to_string(), args)
    }

    /// `s^n(0)`.
    pub fn numeral(n: usize) -> FoTerm {
        (0..n).fold(FoTerm::cst("0"), |t, _| FoTerm::app("s", vec![t]))
    }

    /// Inverse of [`FoTerm::numeral`].
    pub fn as_numeral(&self) -> Option<usize> {
        match self {
            FoTerm::App(c, a) if c == "0" && a.is_empty() => Some(0),
            FoTerm::App(s, a) if s == "s" && a.len() == 1 => a[0].as_numeral().map(|n| n + 1),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            FoTerm::Var(_) => 1,
            FoTerm::App(_, a) => 1 + a.iter().map(FoTerm::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            FoTerm::Var(_) => 0,
            FoTerm::App(_, a) => 1 + a.iter().map(FoTerm::depth).max().unwrap_or(0),
        }
    }

    pub fn vars_into(&self, out: &mut Vec<String>) {
        match self {
            FoTerm::Var(x) => {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
            FoTerm::App(_, a) => a.iter().for_each(|t| t.vars_into(out)),
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut v = Vec::new();
        self.vars_into(&mut v);
        v
    }

    pub fn has_var(&self, x: &str) -> bool {
        match self {
            FoTerm::Var(y) => y == x,
            FoTerm::App(_, a) => a.iter().any(|t| t.has_var(x)),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            FoTerm::Var(_) => false,
            FoTerm::App(_, a) => a.iter().all(FoTerm::is_ground),
        }
    }

    pub fn subst(&self, s: &dyn Fn(&str) -> Option<FoTerm>) -> FoTerm {
        match self {
            FoTerm::Var(x) => s(x).unwrap_or_else(|| self.clone()),
            FoTerm::App(f, a) => FoTerm::App(f.clone(), a.iter().map(|t| t.subst(s)).collect()),
        }
    }

    pub fn subst_pairs(&self, pairs: &[(String, FoTerm)]) -> FoTerm {
        self.subst(&|x| pairs.iter().find(|(y, _)| y == x).map(|(_, u)| u.clone()))
    }

    /// Subterms with their positions, pre-order.
    pub fn positions(&self) -> Vec<(Vec<usize>, &FoTerm)> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a FoTerm, p: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a FoTerm)>) {
            out.push((p.clone(), t));
            if let FoTerm::App(_, a) = t {
                for (i, c) in a.iter().enumerate() {
                    p.push(i);
                    go(c, p, out);
                    p.pop();
                }
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn replace_at(&self, pos: &[usize], by: &FoTerm) -> FoTerm {
        match pos.split_first() {
            None => by.clone(),
            Some((i, rest)) => match self {
                FoTerm::App(f, a) => {
                    let mut a = a.clone();
                    a[*i] = a[*i].replace_at(rest, by);
                    FoTerm::App(f.clone(), a)
                }
                FoTerm::Var(_) => self.clone(),
            },
        }
    }

    pub fn subterms(&self) -> Vec<FoTerm> {
        self.positions().into_iter().map(|(_, t)| t.clone()).collect()
    }
}

impl fmt::Display for FoTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoTerm::Var(x) => write!(f, "{x}"),
            FoTerm::App(c, a) if a.is_empty() => write!(f, "{c}"),
            FoTerm::App(c, a) => {
                write!(f, "{c}(")?;
                for (i, t) in a.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Head of an atomic formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Var(String),
    Sym(String),
}

impl Head {
    pub fn name(&self) -> &str {
        match self {
            Head::Var(n) | Head::Sym(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Head, Vec<FoTerm>),
    Arrow(Box<Formula>, Box<Formula>),
    ForallFo(String, Box<Formula>),
    ForallRel(String, usize, Box<Formula>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("relation variable {name} used with arity {found}, expected {expected}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("substitution parameters must be distinct")]
    DuplicateParams,
    #[error("function symbol {0} is not declared")]
    UndeclaredFun(String),
    #[error("function symbol {name} takes {expected} arguments, got {found}")]
    FunArity { name: String, expected: usize, found: usize },
    #[error("relation symbol {0} is not declared")]
    UndeclaredRel(String),
    #[error("{0}")]
    Other(String),
}

/// Picks `base`, or `base_1`, `base_2`, ... avoiding `taken`.
pub fn fresh_from(base: &str, taken: &dyn Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    let stem = match base.rfind('_') {
        Some(i) if base[i + 1..].chars().all(|c| c.is_ascii_digit()) && i > 0 => &base[..i],
        _ => base,
    };
    (1..).map(|i| format!("{stem}_{i}")).find(|c| !taken(c)).expect("infinite supply")
}

impl Formula {
    pub fn atom(x: &str, args: Vec<FoTerm>) -> Formula {
        Formula::Atom(Head::Var(x.to_string()), args)
    }

    pub fn arrow(a: Formula, b: Formula) -> Formula {
        Formula::Arrow(Box::new(a), Box::new(b))
    }

    /// `a1 -> (a2 -> ... -> last)`.
    pub fn arrows<I: IntoIterator<Item = Formula>>(args: I, last: Formula) -> Formula
    where
        I::IntoIter: DoubleEndedIterator,
    {
        args.into_iter().rev().fold(last, |acc, a| Formula::arrow(a, acc))
    }

    pub fn forall_fo(x: &str, a: Formula) -> Formula {
        Formula::ForallFo(x.to_string(), Box::new(a))
    }

    pub fn forall_rel(x: &str, n: usize, a: Formula) -> Formula {
        Formula::ForallRel(x.to_string(), n, Box::new(a))
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(..) => 1,
            Formula::Arrow(a, b) => 1 + a.size() + b.size(),
            Formula::ForallFo(_, a) | Formula::ForallRel(_, _, a) => 1 + a.size(),
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(..))
    }

    pub fn starts_with_quantifier(&self) -> bool {
        matches!(self, Formula::ForallFo(..) | Formula::ForallRel(..))
    }

    /// Free first-order variables in first-occurrence order.
    pub fn fo_free(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.fo_free_into(&mut Vec::new(), &mut out);
        out
    }

    fn fo_free_into(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Formula::Atom(_, args) => {
                for t in args {
                    for v in t.vars() {
                        if !bound.contains(&v) && !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
            }
            Formula::Arrow(a, b) => {
                a.fo_free_into(bound, out);
                b.fo_free_into(bound, out);
            }
            Formula::ForallFo(x, a) => {
                bound.push(x.clone());
                a.fo_free_into(bound, out);
                bound.pop();
            }
            Formula::ForallRel(_, _, a) => a.fo_free_into(bound, out),
        }
    }

    pub fn has_fo_free(&self, x: &str) -> bool {
        match self {
            Formula::Atom(_, args) => args.iter().any(|t| t.has_var(x)),
            Formula::Arrow(a, b) => a.has_fo_free(x) || b.has_fo_free(x),
            Formula::ForallFo(y, a) => y != x && a.has_fo_free(x),
            Formula::ForallRel(_, _, a) => a.has_fo_free(x),
        }
    }

    /// Free relation variables (name, arity) in first-occurrence order.
    pub fn rel_free(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        self.rel_free_into(&mut Vec::new(), &mut out);
        out
    }

    fn rel_free_into(&self, bound: &mut Vec<(String, usize)>, out: &mut Vec<(String, usize)>) {
        match self {
            Formula::Atom(Head::Var(x), args) => {
                let k = (x.clone(), args.len());
                if !bound.contains(&k) && !out.contains(&k) {
                    out.push(k);
                }
            }
            Formula::Atom(Head::Sym(_), _) => {}
            Formula::Arrow(a, b) => {
                a.rel_free_into(bound, out);
                b.rel_free_into(bound, out);
            }
            Formula::ForallFo(_, a) => a.rel_free_into(bound, out),
            Formula::ForallRel(x, n, a) => {
                bound.push((x.clone(), *n));
                a.rel_free_into(bound, out);
                bound.pop();
            }
        }
    }

    pub fn has_rel_free(&self, x: &str, n: usize) -> bool {
        match self {
            Formula::Atom(Head::Var(y), args) => y == x && args.len() == n,
            Formula::Atom(Head::Sym(_), _) => false,
            Formula::Arrow(a, b) => a.has_rel_free(x, n) || b.has_rel_free(x, n),
            Formula::ForallFo(_, a) => a.has_rel_free(x, n),
            Formula::ForallRel(y, m, a) => !(y == x && *m == n) && a.has_rel_free(x, n),
        }
    }

    /// Every name used anywhere, bound or free, first- or second-order.
    pub fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(h, args) => {
                out.insert(h.name().to_string());
                for t in args {
                    for (_, s) in t.positions() {
                        match s {
                            FoTerm::Var(x) => out.insert(x.clone()),
                            FoTerm::App(f, _) => out.insert(f.clone()),
                        };
                    }
                }
            }
            Formula::Arrow(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Formula::ForallFo(x, a) | Formula::ForallRel(x, _, a) => {
                out.insert(x.clone());
                a.all_names(out);
            }
        }
    }

    pub fn names(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.all_names(&mut s);
        s
    }

    /// Simultaneous capture-avoiding `A[u1/x1, ..., un/xn]`.
    pub fn fo_subst(&self, pairs: &[(String, FoTerm)]) -> Formula {
        let pairs: Vec<(String, FoTerm)> = pairs.iter().filter(|(x, u)| !matches!(u, FoTerm::Var(y) if y == x)).cloned().collect();
        if pairs.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Atom(h, args) => Formula::Atom(h.clone(), args.iter().map(|t| t.subst_pairs(&pairs)).collect()),
            Formula::Arrow(a, b) => Formula::arrow(a.fo_subst(&pairs), b.fo_subst(&pairs)),
            Formula::ForallRel(x, n, a) => Formula::ForallRel(x.clone(), *n, Box::new(a.fo_subst(&pairs))),
            Formula::ForallFo(y, a) => {
                let live: Vec<(String, FoTerm)> = pairs.iter().filter(|(x, _)| x != y && a.has_fo_free(x)).cloned().collect();
                if live.is_empty() {
                    return self.clone();
                }
                if live.iter().any(|(_, u)| u.has_var(y)) {
                    let mut taken = self.names();
                    for (x, u) in &live {
                        taken.insert(x.clone());
                        taken.extend(u.vars());
                    }
                    let y2 = fresh_from(y, &|c| taken.contains(c));
                    let renamed = a.fo_subst(&[(y.clone(), FoTerm::Var(y2.clone()))]);
                    Formula::ForallFo(y2, Box::new(renamed.fo_subst(&live)))
                } else {
                    Formula::ForallFo(y.clone(), Box::new(a.fo_subst(&live)))
                }
            }
        }
    }

    /// `A[F/X(x1, ..., xn)]`: each free atom `X(t1..tn)` becomes
    /// `F[t1/x1, ..., tn/xn]`, avoiding capture.
    pub fn rel_subst(&self, x: &str, params: &[String], f: &Formula) -> Result<Formula, LogicError> {
        let uniq: BTreeSet<&String> = params.iter().collect();
        if uniq.len() != params.len() {
            return Err(LogicError::DuplicateParams);
        }
        let f_fo: Vec<String> = f.fo_free().into_iter().filter(|v| !params.contains(v)).collect();
        let f_rel = f.rel_free();
        Ok(self.rel_subst_inner(x, params, f, &f_fo, &f_rel))
    }

    fn rel_subst_inner(&self, x: &str, params: &[String], f: &Formula, f_fo: &[String], f_rel: &[(String, usize)]) -> Formula {
        let n = params.len();
        match self {
            Formula::Atom(Head::Var(y), args) if y == x && args.len() == n => {
                let pairs: Vec<(String, FoTerm)> = params.iter().cloned().zip(args.iter().cloned()).collect();
                f.fo_subst(&pairs)
            }
            Formula::Atom(..) => self.clone(),
            Formula::Arrow(a, b) => Formula::arrow(a.rel_subst_inner(x, params, f, f_fo, f_rel), b.rel_subst_inner(x, params, f, f_fo, f_rel)),
            Formula::ForallRel(y, m, a) => {
                if y == x && *m == n || !a.has_rel_free(x, n) {
                    return self.clone();
                }
                if f_rel.iter().any(|(z, k)| z == y && k == m) {
                    let mut taken = self.names();
                    taken.extend(f.names());
                    taken.insert(x.to_string());
                    let y2 = fresh_from(y, &|c| taken.contains(c));
                    let args: Vec<String> = (0..*m).map(|i| format!("p_{i}")).collect();
                    let renamed = a
                        .rel_subst(y, &args, &Formula::atom(&y2, args.iter().map(|v| FoTerm::var(v)).collect()))
                        .expect("renaming keeps arities");
                    Formula::ForallRel(y2, *m, Box::new(renamed.rel_subst_inner(x, params, f, f_fo, f_rel)))
                } else {
                    Formula::ForallRel(y.clone(), *m, Box::new(a.rel_subst_inner(x, params, f, f_fo, f_rel)))
                }
            }
            Formula::ForallFo(y, a) => {
                if !a.has_rel_free(x, n) {
                    return self.clone();
                }
                if f_fo.contains(y) {
                    let mut taken = self.names();
                    taken.extend(f.names());
                    let y2 = fresh_from(y, &|c| taken.contains(c));
                    let renamed = a.fo_subst(&[(y.clone(), FoTerm::Var(y2.clone()))]);
                    Formula::ForallFo(y2, Box::new(renamed.rel_subst_inner(x, params, f, f_fo, f_rel)))
                } else {
                    Formula::ForallFo(y.clone(), Box::new(a.rel_subst_inner(x, params, f, f_fo, f_rel)))
                }
            }
        }
    }

    /// Renames a free relation variable to another name of the same arity.
    pub fn rename_rel(&self, x: &str, n: usize, y: &str) -> Formula {
        let params: Vec<String> = (0..n).map(|i| format!("p_{i}")).collect();
        let f = Formula::atom(y, params.iter().map(|p| FoTerm::var(p)).collect());
        self.rel_subst(x, &params, &f).unwrap_or_else(|_| self.clone())
    }

    /// Universal closure: first-order variables outermost, then relation
    /// variables, each group in first-occurrence order.
    pub fn closure(&self) -> Formula {
        let mut out = self.clone();
        for (x, n) in self.rel_free().into_iter().rev() {
            out = Formula::ForallRel(x, n, Box::new(out));
        }
        for x in self.fo_free().into_iter().rev() {
            out = Formula::ForallFo(x, Box::new(out));
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.fo_free().is_empty() && self.rel_free().is_empty()
    }

    /// Representative with bound variables renamed by binding depth; two
    /// formulas are α-equivalent iff their canonical forms are equal.
    pub fn canonical(&self) -> Formula {
        fn go(f: &Formula, fo: &mut Vec<(String, String)>, rel: &mut Vec<(String, usize, String)>, depth: usize) -> Formula {
            match f {
                Formula::Atom(h, args) => {
                    let h2 = match h {
                        Head::Var(x) => match rel.iter().rev().find(|(y, m, _)| y == x && *m == args.len()) {
                            Some((_, _, c)) => Head::Var(c.clone()),
                            None => h.clone(),
                        },
                        Head::Sym(_) => h.clone(),
                    };
                    let args2 = args
                        .iter()
                        .map(|t| t.subst(&|v| fo.iter().rev().find(|(y, _)| y == v).map(|(_, c)| FoTerm::Var(c.clone()))))
                        .collect();
                    Formula::Atom(h2, args2)
                }
                Formula::Arrow(a, b) => Formula::arrow(go(a, fo, rel, depth), go(b, fo, rel, depth)),
                Formula::ForallFo(x, a) => {
                    let c = format!("%{depth}");
                    fo.push((x.clone(), c.clone()));
                    let body = go(a, fo, rel, depth + 1);
                    fo.pop();
                    Formula::ForallFo(c, Box::new(body))
                }
                Formula::ForallRel(x, n, a) => {
                    let c = format!("%{depth}");
                    rel.push((x.clone(), *n, c.clone()));
                    let body = go(a, fo, rel, depth + 1);
                    rel.pop();
                    Formula::ForallRel(c, *n, Box::new(body))
                }
            }
        }
        go(self, &mut Vec::new(), &mut Vec::new(), 0)
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self == other || self.canonical() == other.canonical()
    }

    /// Splits `C1 -> (C2 -> ... -> D)` into its `n` leading arguments and the rest.
    pub fn arrow_parts(&self, n: usize) -> Option<(Vec<&Formula>, &Formula)> {
        let mut args = Vec::new();
        let mut cur = self;
        while args.len() < n {
            match cur {
                Formula::Arrow(a, b) => {
                    args.push(&**a);
                    cur = b;
                }
                _ => return None,
            }
        }
        Some((args, cur))
    }

    pub fn arrow_depth(&self) -> usize {
        match self {
            Formula::Arrow(_, b) => 1 + b.arrow_depth(),
            _ => 0,
        }
    }

    /// Checks function-symbol arities against a signature.
    pub fn well_formed(&self, sig: &Signature) -> Result<(), LogicError> {
        match self {
            Formula::Atom(h, args) => {
                if let Head::Sym(p) = h {
                    match sig.rels.get(p) {
                        None => return Err(LogicError::UndeclaredRel(p.clone())),
                        Some(&n) if n != args.len() => {
                            return Err(LogicError::ArityMismatch { name: p.clone(), expected: n, found: args.len() })
                        }
                        _ => {}
                    }
                }
                args.iter().try_for_each(|t| sig.check_term(t))
            }
            Formula::Arrow(a, b) => {
                a.well_formed(sig)?;
                b.well_formed(sig)
            }
            Formula::ForallFo(_, a) | Formula::ForallRel(_, _, a) => a.well_formed(sig),
        }
    }

    /// Atom argument terms, paired with the first-order variables bound above them.
    pub fn atom_args(&self) -> Vec<(Vec<String>, &FoTerm)> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, bound: &mut Vec<String>, out: &mut Vec<(Vec<String>, &'a FoTerm)>) {
            match f {
                Formula::Atom(_, args) => args.iter().for_each(|t| out.push((bound.clone(), t))),
                Formula::Arrow(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::ForallFo(x, a) => {
                    bound.push(x.clone());
                    go(a, bound, out);
                    bound.pop();
                }
                Formula::ForallRel(_, _, a) => go(a, bound, out),
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

// Printing: `->` is right-associative and `forall` extends as far right as
// possible, so only the left operand of an arrow ever needs parentheses.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(h, args) => {
                write!(f, "{}", h.name())?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, t) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{t}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
            Formula::Arrow(a, b) => {
                if a.is_atom() {
                    write!(f, "{a} -> {b}")
                } else {
                    write!(f, "({a}) -> {b}")
                }
            }
            Formula::ForallFo(x, a) => write!(f, "forall {x}. {a}"),
            Formula::ForallRel(x, 0, a) => write!(f, "forall {x}. {a}"),
            Formula::ForallRel(x, n, a) => write!(f, "forall {x}/{n}. {a}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub funs: BTreeMap<String, usize>,
    pub rels: BTreeMap<String, usize>,
}

impl Signature {
    /// Symbols used by the data types: `0, 1, nil` constants, `s, p` unary,
    /// `cons` binary.
    pub fn standard() -> Signature {
        let mut s = Signature::default();
        for (f, n) in [("0", 0), ("1", 0), ("nil", 0), ("s", 1), ("p", 1), ("cons", 2)] {
            s.funs.insert(f.to_string(), n);
        }
        s
    }

    pub fn check_term(&self, t: &FoTerm) -> Result<(), LogicError> {
        match t {
            FoTerm::Var(_) => Ok(()),
            FoTerm::App(f, args) => {
                match self.funs.get(f) {
                    None => return Err(LogicError::UndeclaredFun(f.clone())),
                    Some(&n) if n != args.len() => {
                        return Err(LogicError::FunArity { name: f.clone(), expected: n, found: args.len() })
                    }
                    _ => {}
                }
                args.iter().try_for_each(|a| self.check_term(a))
            }
        }
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.funs.get(name) == Some(&0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub lhs: FoTerm,
    pub rhs: FoTerm,
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Theory {
    pub sig: Signature,
    pub equations: Vec<Equation>,
}

impl Theory {
    /// Standard signature, no equations.
    pub fn empty() -> Theory {
        Theory { sig: Signature::standard(), equations: Vec::new() }
    }

    /// `p(0) = 0`, `p(s x) = x`.
    pub fn pred() -> Theory {
        Theory {
            sig: Signature::standard(),
            equations: vec![
                Equation { lhs: FoTerm::app("p", vec![FoTerm::cst("0")]), rhs: FoTerm::cst("0") },
                Equation { lhs: FoTerm::app("p", vec![FoTerm::app("s", vec![FoTerm::var("x")])]), rhs: FoTerm::var("x") },
            ],
        }
    }

    /// Equations whose two sides do not mention the same variables. They can
    /// only be used in the direction that does not invent a variable.
    pub fn unbalanced_equations(&self) -> Vec<&Equation> {
        self.equations
            .iter()
            .filter(|e| {
                let l: BTreeSet<String> = e.lhs.vars().into_iter().collect();
                let r: BTreeSet<String> = e.rhs.vars().into_iter().collect();
                l != r
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), LogicError> {
        for e in &self.equations {
            self.sig.check_term(&e.lhs)?;
            self.sig.check_term(&e.rhs)?;
        }
        if let Some(x) = self.sig.funs.keys().find(|k| self.sig.rels.contains_key(*k)) {
            return Err(LogicError::Other(format!("{x} declared both as function and relation symbol")));
        }
        Ok(())
    }
}

/// Extends `sub` so that `pat` instantiated by it equals `t`.
pub fn match_term(pat: &FoTerm, t: &FoTerm, sub: &mut BTreeMap<String, FoTerm>) -> bool {
    match pat {
        FoTerm::Var(x) => match sub.get(x) {
            Some(u) => u == t,
            None => {
                sub.insert(x.clone(), t.clone());
                true
            }
        },
        FoTerm::App(f, ps) => match t {
            FoTerm::App(g, ts) if f == g && ps.len() == ts.len() => ps.iter().zip(ts).all(|(p, u)| match_term(p, u, sub)),
            _ => false,
        },
    }
}

/// `a = b` (in either orientation) is an instance of an equation of `th`.
pub fn eq_instance(a: &FoTerm, b: &FoTerm, th: &Theory) -> bool {
    th.equations.iter().any(|e| {
        [(&e.lhs, &e.rhs), (&e.rhs, &e.lhs)].into_iter().any(|(l, r)| {
            let mut sub = BTreeMap::new();
            match_term(l, a, &mut sub) && match_term(r, b, &mut sub)
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Congruence {
    Equal,
    NotEqualWithinBounds,
}

/// One-step rewrites of `t` at its root by an equation instance, in both
/// orientations. Results with unbound variables are skipped.
fn root_rewrites(t: &FoTerm, th: &Theory) -> Vec<FoTerm> {
    let mut out = Vec::new();
    for e in &th.equations {
        for (l, r) in [(&e.lhs, &e.rhs), (&e.rhs, &e.lhs)] {
            let mut sub = BTreeMap::new();
            if match_term(l, t, &mut sub) && r.vars().iter().all(|v| sub.contains_key(v)) {
                let u = r.subst(&|x| sub.get(x).cloned());
                if !out.contains(&u) {
                    out.push(u);
                }
            }
        }
    }
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let n = self.parent[c];
            self.parent[c] = r;
            c = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Bounded congruence closure over a finite term universe. The universe
/// starts with the given terms and their subterms; each of `max_congr_depth`
/// rounds adds the root rewrites of every member whose depth stays within
/// `max_depth`, then closes under congruence.
pub struct Closure {
    ids: HashMap<FoTerm, usize>,
    terms: Vec<FoTerm>,
    uf: UnionFind,
}

impl Closure {
    pub fn build(seeds: &[FoTerm], th: &Theory, max_depth: usize, rounds: usize) -> Closure {
        let mut c = Closure { ids: HashMap::new(), terms: Vec::new(), uf: UnionFind { parent: Vec::new() } };
        for t in seeds {
            c.intern(t);
        }
        for _ in 0..rounds {
            if !c.round(th, max_depth) {
                break;
            }
        }
        c
    }

    fn intern(&mut self, t: &FoTerm) -> usize {
        if let FoTerm::App(_, args) = t {
            for a in args {
                self.intern(a);
            }
        }
        if let Some(&i) = self.ids.get(t) {
            return i;
        }
        let i = self.terms.len();
        self.terms.push(t.clone());
        self.ids.insert(t.clone(), i);
        self.uf.parent.push(i);
        i
    }

    /// One rewrite round; reports whether anything changed.
    fn round(&mut self, th: &Theory, max_depth: usize) -> bool {
        let n = self.terms.len();
        let mut changed = false;
        for i in 0..n {
            let t = self.terms[i].clone();
            for u in root_rewrites(&t, th) {
                if u.depth() <= max_depth {
                    let before = self.terms.len();
                    let j = self.intern(&u);
                    changed |= self.terms.len() != before;
                    changed |= self.uf.union(i, j);
                }
            }
        }
        changed |= close_congruence(&self.terms, &self.ids, &mut self.uf);
        changed
    }

    pub fn terms(&self) -> &[FoTerm] {
        &self.terms
    }

    pub fn contains(&self, t: &FoTerm) -> bool {
        self.ids.contains_key(t)
    }

    /// `None` when either term is outside the universe.
    pub fn same(&mut self, a: &FoTerm, b: &FoTerm) -> Option<bool> {
        let (i, j) = (*self.ids.get(a)?, *self.ids.get(b)?);
        Some(self.uf.find(i) == self.uf.find(j))
    }
}

/// `a ≈_E b` decided by bounded congruence closure seeded with `a` and `b`;
/// new terms may exceed the query depth by at most `max_inst_depth`.
pub fn approx_e(a: &FoTerm, b: &FoTerm, th: &Theory, bounds: &Bounds) -> Congruence {
    if a == b {
        return Congruence::Equal;
    }
    let max_depth = a.depth().max(b.depth()) + bounds.max_inst_depth;
    let mut c = Closure::build(&[a.clone(), b.clone()], th, max_depth, 0);
    for _ in 0..bounds.max_congr_depth {
        let changed = c.round(th, max_depth);
        if c.same(a, b) == Some(true) {
            return Congruence::Equal;
        }
        if !changed {
            break;
        }
    }
    Congruence::NotEqualWithinBounds
}

fn close_congruence(terms: &[FoTerm], ids: &HashMap<FoTerm, usize>, uf: &mut UnionFind) -> bool {
    let mut any = false;
    loop {
        let mut changed = false;
        let mut sig: HashMap<(String, Vec<usize>), usize> = HashMap::new();
        for (i, t) in terms.iter().enumerate() {
            if let FoTerm::App(f, args) = t {
                let key = (f.clone(), args.iter().map(|c| uf.find(ids[c])).collect());
                match sig.get(&key) {
                    Some(&j) => changed |= uf.union(i, j),
                    None => {
                        sig.insert(key, i);
                    }
                }
            }
        }
        if !changed {
            break;
        }
        any = true;
    }
    any
}

/// One rewrite of a subterm by an equation instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite {
    pub pos: Vec<usize>,
    pub from: FoTerm,
    pub to: FoTerm,
}

/// Shortest sequence of single equation-instance rewrites from `a` to `b`,
/// found by breadth-first search. Intermediate terms are capped at the larger
/// endpoint size plus `max_inst_depth`; rewritten subterms must avoid the
/// variables in `frozen`.
pub fn rewrite_path(a: &FoTerm, b: &FoTerm, th: &Theory, bounds: &Bounds, frozen: &[String]) -> Option<Vec<Rewrite>> {
    if a == b {
        return Some(Vec::new());
    }
    let cap = a.size().max(b.size()) + bounds.max_inst_depth.max(1) * 2;
    let max_len = bounds.max_congr_depth.max(1) * 2;
    let mut prev: HashMap<FoTerm, (FoTerm, Rewrite)> = HashMap::new();
    let mut seen: HashSet<FoTerm> = HashSet::from([a.clone()]);
    let mut queue = VecDeque::from([(a.clone(), 0usize)]);
    while let Some((t, d)) = queue.pop_front() {
        if d >= max_len {
            continue;
        }
        for (pos, sub) in t.positions() {
            if frozen.iter().any(|v| sub.has_var(v)) {
                continue;
            }
            for u in root_rewrites(sub, th) {
                if frozen.iter().any(|v| u.has_var(v)) {
                    continue;
                }
                let next = t.replace_at(&pos, &u);
                if next.size() > cap || seen.contains(&next) {
                    continue;
                }
                seen.insert(next.clone());
                prev.insert(next.clone(), (t.clone(), Rewrite { pos: pos.clone(), from: sub.clone(), to: u.clone() }));
                if &next == b {
                    let mut path = Vec::new();
                    let mut cur = next;
                    while let Some((p, r)) = prev.get(&cur) {
                        path.push(r.clone());
                        cur = p.clone();
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back((next, d + 1));
            }
        }
    }
    None
}
