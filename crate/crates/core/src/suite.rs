//! Regression corpus of syntactic facts and counterexamples, with a runner.
//!
//! Cases live in a plain-text file, one block per case:
//!
//! ```text
//! case A/classify
//! type forall X/1. (X(0) -> forall y. X(y)) -> X(0) -> X(0)
//! expect proper yes
//! expect star clear
//! ```
//!
//! Blocks are separated by blank lines; `#` starts a comment. Keys:
//! `case NAME`, `theory pred|empty`, `term T`, `type A`, `config LINE`
//! (one sandbox configuration line) and `expect KEY VALUE`.

use std::fmt;

use crate::bounds::Bounds;
use crate::lambda::{normalize, Normalization, Term};
use crate::logic::{Formula, Theory};
use crate::sandbox::{member, parse_config, Membership};
use crate::syntax::{parse_formula, parse_term, ParseError};
use crate::typeclass::{classify, BPlus, Classification, Star};
use crate::typing::{infer_normal, Context, InferMode, InferResult};

pub const BUNDLED_CASES: &str = include_str!("../suite.cases");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub name: String,
    pub line: usize,
    pub theory: Theory,
    pub term: Option<Term>,
    pub ty: Option<Formula>,
    pub config: Vec<String>,
    pub expects: Vec<(String, String)>,
}

/// How strongly an expectation is established.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evidence {
    Syntactic,
    /// Membership in one finite sandbox model, not in every model.
    FiniteScale,
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evidence::Syntactic => write!(f, "syntactic"),
            Evidence::FiniteScale => write!(f, "finite-scale evidence"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail(String),
    /// The check ran at bounds too small to support the expected claim.
    Weaker(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub case: String,
    pub key: String,
    pub expected: String,
    pub actual: String,
    pub evidence: Evidence,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| matches!(c.outcome, Outcome::Fail(_))).collect()
    }

    pub fn weaker(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| matches!(c.outcome, Outcome::Weaker(_))).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.outcome == Outcome::Pass)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let (tag, detail) = match &c.outcome {
                Outcome::Pass => ("PASS", String::new()),
                Outcome::Fail(d) => ("FAIL", format!(" ({d})")),
                Outcome::Weaker(d) => ("WEAKER", format!(" ({d})")),
            };
            writeln!(f, "{tag:6} {} {} = {} [got {}; {}]{detail}", c.case, c.key, c.expected, c.actual, c.evidence)?;
        }
        write!(
            f,
            "{} checks: {} pass, {} fail, {} weaker",
            self.checks.len(),
            self.checks.iter().filter(|c| c.outcome == Outcome::Pass).count(),
            self.failures().len(),
            self.weaker().len()
        )
    }
}

fn err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, col: 1, msg: msg.into() }
}

fn shift(e: ParseError, line: usize, col: usize) -> ParseError {
    ParseError { line: line + e.line - 1, col: if e.line == 1 { col + e.col - 1 } else { e.col }, msg: e.msg }
}

pub fn parse_cases(src: &str) -> Result<Vec<Case>, ParseError> {
    let mut cases = Vec::new();
    let mut cur: Option<Case> = None;
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let text = raw.split('#').next().unwrap_or("").trim_end();
        if text.trim().is_empty() {
            if raw.trim().is_empty() {
                cases.extend(cur.take());
            }
            continue;
        }
        let indent = text.len() - text.trim_start().len();
        let text = text.trim_start();
        let (key, rest) = text.split_once(char::is_whitespace).map(|(a, b)| (a, b.trim())).unwrap_or((text, ""));
        let col = indent + text.len() - rest.len() + 1;
        if key == "case" {
            cases.extend(cur.take());
            cur = Some(Case {
                name: rest.to_string(),
                line,
                theory: Theory::empty(),
                term: None,
                ty: None,
                config: Vec::new(),
                expects: Vec::new(),
            });
            continue;
        }
        let c = cur.as_mut().ok_or_else(|| err(line, "expected `case NAME`"))?;
        match key {
            "theory" => {
                c.theory = match rest {
                    "pred" => Theory::pred(),
                    "empty" => Theory::empty(),
                    _ => return Err(err(line, format!("unknown theory `{rest}`"))),
                }
            }
            "term" => c.term = Some(parse_term(rest).map_err(|e| shift(e, line, col))?),
            "type" => c.ty = Some(parse_formula(rest, &c.theory.sig).map_err(|e| shift(e, line, col))?),
            "config" => c.config.push(rest.to_string()),
            "expect" => {
                let (k, v) = rest.split_once(char::is_whitespace).ok_or_else(|| err(line, "expected `expect KEY VALUE`"))?;
                c.expects.push((k.to_string(), v.trim().to_string()));
            }
            _ => return Err(err(line, format!("unknown key `{key}`"))),
        }
    }
    cases.extend(cur);
    Ok(cases)
}

pub fn run_suite(bounds: &Bounds) -> SuiteReport {
    let cases = parse_cases(BUNDLED_CASES).expect("bundled cases parse");
    run_cases(&cases, bounds)
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

struct Ctx<'a> {
    case: &'a Case,
    bounds: &'a Bounds,
    class: Option<Classification>,
}

impl Ctx<'_> {
    fn ty(&self) -> Result<&Formula, String> {
        self.case.ty.as_ref().ok_or_else(|| "the case has no type".to_string())
    }

    fn term(&self) -> Result<&Term, String> {
        self.case.term.as_ref().ok_or_else(|| "the case has no term".to_string())
    }

    fn class(&mut self) -> Result<&Classification, String> {
        if self.class.is_none() {
            let c = classify(self.ty()?, &self.case.theory, self.bounds);
            self.class = Some(c);
        }
        Ok(self.class.as_ref().expect("set above"))
    }

    fn trivial(&self) -> bool {
        self.bounds.max_inst_depth == 0
    }

    /// Actual value, evidence kind, and whether a mismatch only reflects
    /// bounds too small to decide.
    fn actual(&mut self, key: &str, expected: &str) -> Result<(String, Evidence, bool), String> {
        let trivial = self.trivial();
        let syn = |s: String| Ok((s, Evidence::Syntactic, false));
        match key {
            "proper" => {
                let p = self.class()?.proper;
                syn(yes_no(p))
            }
            "forall+" => {
                let q = self.class()?.forall.is_pos();
                syn(yes_no(q))
            }
            "forall2+" => {
                let q = self.class()?.forall2.is_pos();
                syn(yes_no(q))
            }
            "star" => {
                let s = &self.class()?.star;
                let v = if matches!(s, Star::Violated(_)) { "violated" } else { "clear" };
                Ok((v.to_string(), Evidence::Syntactic, trivial))
            }
            "star-b" | "star-c" | "star-n" => {
                let s = self.class()?.star.clone();
                match s {
                    Star::Violated(w) => {
                        if !w.verify(&self.case.theory) {
                            return Err("the witness does not replay".into());
                        }
                        let v = match key {
                            "star-b" => w.b.to_string(),
                            "star-c" => w.c.to_string(),
                            _ => w.n.to_string(),
                        };
                        syn(v)
                    }
                    Star::ClearWithinBounds(_) => Ok(("clear".into(), Evidence::Syntactic, trivial)),
                }
            }
            "bplus" => {
                let v = match &self.class()?.b_plus {
                    BPlus::Yes => "yes",
                    BPlus::No(_) => "no",
                    BPlus::UnknownWithinBounds(_) => "unknown",
                };
                Ok((v.to_string(), Evidence::Syntactic, v == "unknown"))
            }
            "typable" | "typable0" => {
                let mode = if key == "typable" { InferMode::Af2Bounded } else { InferMode::Af2Zero };
                let r = infer_normal(&Context::new(), self.term()?, self.ty()?, &self.case.theory, mode, self.bounds);
                // A negative answer in bounded mode is relative to the instantiation depth.
                let weak = trivial && mode == InferMode::Af2Bounded;
                match r {
                    InferResult::Typable(_) => syn("yes".into()),
                    InferResult::NotTypable { exhaustive: true, .. } => Ok(("no".into(), Evidence::Syntactic, weak)),
                    InferResult::NotTypable { exhaustive: false, .. } => Ok(("no (search truncated)".into(), Evidence::Syntactic, true)),
                }
            }
            "normal-form" => {
                let v = match normalize(self.term()?, self.bounds) {
                    Normalization::Normal { .. } => "some",
                    _ => "none-within-bounds",
                };
                let v = if v != "some" && expected == "none" { "none" } else { v };
                syn(v.into())
            }
            "normal" => syn(yes_no(self.term()?.is_beta_normal())),
            "closed" => syn(yes_no(self.term()?.free_vars().is_empty())),
            "member" => {
                let cfg = parse_config(&self.case.config.join("\n")).map_err(|e| e.to_string())?;
                let m = cfg.build().map_err(|e| e.to_string())?;
                let ty = parse_formula(&self.ty()?.to_string(), &m.theory.sig).map_err(|e| e.to_string())?;
                let v = match member(&m, self.term()?, &ty).map_err(|e| e.to_string())? {
                    Membership::Yes => "yes",
                    Membership::No => "no",
                    Membership::Unknown => "unknown",
                };
                Ok((v.into(), Evidence::FiniteScale, false))
            }
            _ => Err(format!("unknown expectation `{key}`")),
        }
    }
}

pub fn run_cases(cases: &[Case], bounds: &Bounds) -> SuiteReport {
    let mut report = SuiteReport::default();
    for case in cases {
        let mut cx = Ctx { case, bounds, class: None };
        for (key, expected) in &case.expects {
            let (actual, evidence, outcome) = match cx.actual(key, expected) {
                Err(e) => (e.clone(), Evidence::Syntactic, Outcome::Fail(e)),
                Ok((actual, evidence, false)) if actual == *expected => (actual, evidence, Outcome::Pass),
                Ok((actual, evidence, true)) => {
                    let why = format!("bounds {bounds} too small to confirm");
                    (actual, evidence, Outcome::Weaker(why))
                }
                Ok((actual, evidence, false)) => (actual, evidence, Outcome::Fail("mismatch".into())),
            };
            report.checks.push(Check { case: case.name.clone(), key: key.clone(), expected: expected.clone(), actual, evidence, outcome });
        }
    }
    report
}
