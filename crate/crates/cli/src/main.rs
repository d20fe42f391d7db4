use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use af2::bounds::Bounds;
use af2::datatypes::{is_adequate, parse_spec, programming_theorem_check, represents, Adequacy, FunctionSpec, ProgThm, Report, RowOutcome};
use af2::lambda::{beta_eta_equiv, beta_eta_normalize, normalize, Equivalence, Normalization, Term};
use af2::logic::{Formula, Signature, Theory};
use af2::sandbox::{adequacy_spot, member, parse_config, Limits, Membership, Spot};
use af2::suite::{parse_cases, run_cases, Outcome, BUNDLED_CASES};
use af2::syntax::{parse_formula, parse_term, parse_theory_items, ParseError, Parser as TokParser};
use af2::typeclass::{check_condition_star, classify, subtypes, BPlus, Sign, Star};
use af2::typing::{check_derivation, infer_normal, parse_derivation, print_derivation, Context, InferMode, InferResult, Mode};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Kernel for second-order functional arithmetic.
///
/// Arguments that take terms, types or files accept `@PATH` to read the
/// value from a file.
#[derive(Parser)]
#[command(name = "af2", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Bound override, repeatable: maxSteps, maxTermSize, maxInstDepth, maxCongrDepth.
    #[arg(long = "bounds", value_name = "KEY=VALUE", global = true)]
    bounds: Vec<String>,
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// Equational theory: `empty`, `pred`, or a theory file (`@PATH` or PATH).
    #[arg(long, default_value = "empty", global = true)]
    theory: String,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Calculus {
    Beta,
    BetaEta,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMode {
    Af2,
    Af2zero,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchMode {
    Bounded,
    Zero,
}

#[derive(Clone, Copy, ValueEnum)]
enum Polarity {
    Pos,
    Neg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Succ,
    Pred,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normalize a λ-term (leftmost-outermost).
    Normalize {
        #[arg(long)]
        term: String,
        #[arg(long, value_enum, default_value = "beta")]
        calculus: Calculus,
    },
    /// Decide βη-equivalence of two terms within bounds.
    Equiv {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Check a derivation file.
    Check {
        #[arg(long)]
        derivation: String,
        #[arg(long, value_enum, default_value = "af2")]
        mode: CheckMode,
    },
    /// Search a derivation of a normal term at a type.
    Typecheck {
        #[arg(long)]
        term: String,
        #[arg(long = "type")]
        ty: String,
        /// Hypotheses `x : A; y : B`.
        #[arg(long, default_value = "")]
        context: String,
        #[arg(long, value_enum, default_value = "bounded")]
        mode: SearchMode,
    },
    /// Type-class analysis of a type.
    Classify {
        #[arg(long = "type")]
        ty: String,
    },
    /// Bounded check of condition (*).
    Star {
        #[arg(long = "type")]
        ty: String,
    },
    /// List the subtypes of a type with a given polarity.
    Subtypes {
        #[arg(long = "type")]
        ty: String,
        #[arg(long, value_enum, default_value = "neg")]
        sign: Polarity,
    },
    /// Bounded adequacy check of the equational theory.
    Adequate,
    /// Check that a program represents a function on numerals.
    Represents {
        #[arg(long)]
        program: String,
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Programming theorem: derivation of totality plus the checks it needs.
    Progthm {
        #[arg(long)]
        derivation: String,
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Build a finite model and run a membership or adequacy spot check.
    Sandbox {
        #[arg(long)]
        config: String,
        #[arg(long)]
        term: Option<String>,
        #[arg(long = "type")]
        ty: Option<String>,
        #[arg(long)]
        derivation: Option<String>,
        #[arg(long)]
        base_limit: Option<usize>,
        #[arg(long)]
        family_limit: Option<usize>,
        #[arg(long)]
        arity_limit: Option<usize>,
    },
    /// Run the regression corpus.
    Suite {
        /// Case file; the bundled corpus by default.
        #[arg(long)]
        cases: Option<String>,
    },
}

#[derive(Args)]
struct SpecArg {
    /// Function table file: theory declarations and `table f(n) = m.` rows.
    #[arg(long, conflicts_with = "builtin")]
    table: Option<String>,
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    /// Largest input for a builtin table.
    #[arg(long, default_value_t = 10)]
    up_to: usize,
}

/// Exit codes.
const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const BOUND: u8 = 2;
const INPUT: u8 = 3;

struct Verdict {
    code: u8,
    text: String,
    json: Value,
}

fn done(code: u8, text: impl Into<String>, json: Value) -> Result<Verdict, String> {
    Ok(Verdict { code, text: text.into(), json })
}

fn read_arg(s: &str) -> Result<String, String> {
    match s.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| format!("{path}: {e}")),
        None => Ok(s.to_string()),
    }
}

fn read_file(s: &str) -> Result<String, String> {
    let path = s.strip_prefix('@').unwrap_or(s);
    fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
}

fn located(what: &str, e: ParseError) -> String {
    format!("{what}: parse error at line {}, column {}: {}", e.line, e.col, e.msg)
}

fn term_arg(s: &str) -> Result<Term, String> {
    parse_term(read_arg(s)?.trim()).map_err(|e| located("term", e))
}

fn formula_arg(s: &str, sig: &Signature) -> Result<Formula, String> {
    parse_formula(read_arg(s)?.trim(), sig).map_err(|e| located("type", e))
}

/// Theory files extend the standard signature.
fn load_theory(s: &str) -> Result<Theory, String> {
    match s {
        "empty" => Ok(Theory::empty()),
        "pred" => Ok(Theory::pred()),
        _ => {
            let src = read_file(s)?;
            let empty = Signature::default();
            let mut p = TokParser::new(&src, &empty).map_err(|e| located("theory", e))?;
            let mut th = Theory::empty();
            parse_theory_items(&mut p, &mut th).map_err(|e| located("theory", e))?;
            p.expect_end().map_err(|e| located("theory", e))?;
            th.validate().map_err(|e| format!("theory: {e}"))?;
            Ok(th)
        }
    }
}

fn load_spec(a: &SpecArg) -> Result<FunctionSpec, String> {
    match (&a.table, a.builtin) {
        (Some(s), _) => parse_spec(&read_file(s)?).map_err(|e| located("table", e)),
        (None, Some(Builtin::Succ)) => Ok(FunctionSpec::succ(a.up_to)),
        (None, Some(Builtin::Pred)) => Ok(FunctionSpec::pred(a.up_to)),
        (None, None) => Err("give --table or --builtin".into()),
    }
}

fn parse_context(s: &str, sig: &Signature) -> Result<Context, String> {
    let mut ctx = Context::new();
    for item in s.split(';').map(str::trim).filter(|i| !i.is_empty()) {
        let (x, a) = item.split_once(':').ok_or_else(|| format!("context: expected `x : A` in `{item}`"))?;
        ctx.0.push((x.trim().to_string(), parse_formula(a.trim(), sig).map_err(|e| located("context", e))?));
    }
    Ok(ctx)
}

fn report_json(r: &Report) -> Value {
    Value::Array(
        r.rows
            .iter()
            .map(|row| {
                let (outcome, got) = match &row.outcome {
                    RowOutcome::Pass => ("pass", Value::from(row.expected)),
                    RowOutcome::Fail(k) => ("fail", k.map(Value::from).unwrap_or(Value::Null)),
                    RowOutcome::StepBound => ("step-bound", Value::Null),
                };
                json!({"inputs": row.inputs, "expected": row.expected, "got": got, "outcome": outcome})
            })
            .collect(),
    )
}

fn report_code(r: &Report) -> u8 {
    if r.all_pass() {
        OK
    } else if r.rows.iter().any(|x| matches!(x.outcome, RowOutcome::Fail(_))) {
        NEGATIVE
    } else {
        BOUND
    }
}

fn normalization(n: Normalization) -> Result<Verdict, String> {
    match n {
        Normalization::Normal { term, steps } => {
            done(OK, format!("{term}\n({steps} steps)"), json!({"verdict": "normal", "term": term.to_string(), "steps": steps}))
        }
        Normalization::StepBoundExceeded { .. } => done(BOUND, "StepBoundExceeded", json!({"verdict": "step-bound-exceeded"})),
        Normalization::SizeBoundExceeded { .. } => done(BOUND, "SizeBoundExceeded", json!({"verdict": "size-bound-exceeded"})),
    }
}

fn text_lines<T: Display>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n")
}

fn run(cli: &Cli) -> Result<Verdict, String> {
    let mut bounds = Bounds::default();
    for kv in &cli.common.bounds {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--bounds expects KEY=VALUE, got `{kv}`"))?;
        bounds.set(k.trim(), v).map_err(|e| e.to_string())?;
    }
    bounds.validate().map_err(|e| e.to_string())?;
    let th = load_theory(&cli.common.theory)?;
    match &cli.cmd {
        Cmd::Normalize { term, calculus } => {
            let t = term_arg(term)?;
            normalization(match calculus {
                Calculus::Beta => normalize(&t, &bounds),
                Calculus::BetaEta => beta_eta_normalize(&t, &bounds),
            })
        }
        Cmd::Equiv { left, right } => {
            let (l, r) = (term_arg(left)?, term_arg(right)?);
            match beta_eta_equiv(&l, &r, &bounds) {
                Equivalence::Equivalent => done(OK, "Equivalent", json!({"verdict": "equivalent"})),
                Equivalence::NotEquivalentWithinBounds { distinct_normal_forms: true } => {
                    done(NEGATIVE, "NotEquivalent (distinct normal forms)", json!({"verdict": "not-equivalent"}))
                }
                Equivalence::NotEquivalentWithinBounds { distinct_normal_forms: false } => {
                    done(BOUND, "NotEquivalentWithinBounds (a bound was reached)", json!({"verdict": "unknown-within-bounds"}))
                }
            }
        }
        Cmd::Check { derivation, mode } => {
            let d = parse_derivation(&read_file(derivation)?, &th.sig).map_err(|e| format!("derivation: {e}"))?;
            let mode = match mode {
                CheckMode::Af2 => Mode::Af2,
                CheckMode::Af2zero => Mode::Af2Zero,
            };
            match check_derivation(&d, &th, mode) {
                Ok(()) => done(OK, format!("Checked: {} |- {} : {}", d.ctx, d.term, d.ty), json!({"verdict": "checked"})),
                Err(r) => done(NEGATIVE, format!("Rejected: {r}"), json!({"verdict": "rejected", "path": r.path, "rule": r.rule.to_string(), "reason": r.reason.to_string()})),
            }
        }
        Cmd::Typecheck { term, ty, context, mode } => {
            let t = term_arg(term)?;
            let a = formula_arg(ty, &th.sig)?;
            let ctx = parse_context(context, &th.sig)?;
            let mode = match mode {
                SearchMode::Bounded => InferMode::Af2Bounded,
                SearchMode::Zero => InferMode::Af2Zero,
            };
            if !t.is_beta_normal() {
                return Err("typecheck: the term must be β-normal".into());
            }
            match infer_normal(&ctx, &t, &a, &th, mode, &bounds) {
                InferResult::Typable(d) => {
                    let tree: Value = serde_json::from_str(&print_derivation(&d)).expect("printed derivations are JSON");
                    done(OK, format!("Typable\n{d}"), json!({"verdict": "typable", "derivation": tree}))
                }
                InferResult::NotTypable { exhaustive: true, explored } => done(
                    NEGATIVE,
                    format!("NotTypableWithinBounds(exhaustive-at-bound), {explored} goals explored"),
                    json!({"verdict": "not-typable", "exhaustive": true, "explored": explored}),
                ),
                InferResult::NotTypable { exhaustive: false, explored } => done(
                    BOUND,
                    format!("NotTypableWithinBounds(truncated), {explored} goals explored"),
                    json!({"verdict": "not-typable", "exhaustive": false, "explored": explored}),
                ),
            }
        }
        Cmd::Classify { ty } => {
            let a = formula_arg(ty, &th.sig)?;
            let c = classify(&a, &th, &bounds);
            let (code, bplus) = match &c.b_plus {
                BPlus::Yes => (OK, "yes"),
                BPlus::No(_) => (NEGATIVE, "no"),
                BPlus::UnknownWithinBounds(_) => (BOUND, "unknown"),
            };
            let j = json!({
                "forall2": c.forall2.to_string(),
                "forall": c.forall.to_string(),
                "proper": c.proper,
                "star": star_json(&c.star),
                "bplus": bplus,
                "bplus_detail": c.b_plus.to_string(),
            });
            done(code, c.to_string(), j)
        }
        Cmd::Star { ty } => {
            let a = formula_arg(ty, &th.sig)?;
            let s = check_condition_star(&a, &th, &bounds);
            let code = match &s {
                Star::Violated(_) => NEGATIVE,
                s if s.is_trivial() => BOUND,
                _ => OK,
            };
            let text = match &s {
                Star::Violated(w) => format!("violated\n{w}"),
                s => s.to_string(),
            };
            done(code, text, star_json(&s))
        }
        Cmd::Subtypes { ty, sign } => {
            let a = formula_arg(ty, &th.sig)?;
            let sign = match sign {
                Polarity::Pos => Sign::Pos,
                Polarity::Neg => Sign::Neg,
            };
            let subs = subtypes(&a, sign, &bounds);
            let j: Vec<Value> = subs
                .iter()
                .map(|s| json!({"formula": s.formula.to_string(), "slots": s.substitution_slots, "position": s.position}))
                .collect();
            done(OK, text_lines(&subs), Value::Array(j))
        }
        Cmd::Adequate => match is_adequate(&th, &bounds) {
            a @ Adequacy::Adequate => done(OK, a.to_string(), json!({"verdict": "adequate"})),
            a @ Adequacy::Inadequate { .. } => done(NEGATIVE, a.to_string(), json!({"verdict": "inadequate", "detail": a.to_string()})),
            a @ Adequacy::UnknownWithinBounds(_) => done(BOUND, a.to_string(), json!({"verdict": "unknown-within-bounds", "detail": a.to_string()})),
        },
        Cmd::Represents { program, spec } => {
            let p = term_arg(program)?;
            let spec = load_spec(spec)?;
            let r = represents(&p, &spec, &bounds);
            done(report_code(&r), r.to_string().trim_end().to_string(), json!({"rows": report_json(&r)}))
        }
        Cmd::Progthm { derivation, spec } => {
            let spec = load_spec(spec)?;
            let d = parse_derivation(&read_file(derivation)?, &spec.theory.sig).map_err(|e| format!("derivation: {e}"))?;
            match programming_theorem_check(&d, &spec, &bounds) {
                ProgThm::Checked(r) => {
                    done(report_code(&r), format!("preconditions hold\n{}", r.to_string().trim_end()), json!({"verdict": "checked", "rows": report_json(&r)}))
                }
                ProgThm::Preconditions(errs) => {
                    done(NEGATIVE, format!("preconditions fail\n{}", errs.join("\n")), json!({"verdict": "preconditions-fail", "errors": errs}))
                }
            }
        }
        Cmd::Sandbox { config, term, ty, derivation, base_limit, family_limit, arity_limit } => {
            let mut cfg = parse_config(&read_file(config)?).map_err(|e| format!("config: {e}"))?;
            let d = Limits::default();
            cfg.limits.base = base_limit.unwrap_or(d.base.max(cfg.limits.base));
            cfg.limits.family = family_limit.unwrap_or(cfg.limits.family);
            cfg.limits.arity = arity_limit.unwrap_or(cfg.limits.arity);
            let m = cfg.build().map_err(|e| format!("sandbox: {e}"))?;
            let summary = format!(
                "universe: {} terms (closed under β: {}); family: {} sets (closed: {})",
                m.universe.len(),
                m.universe.reduct_closed,
                m.family.len(),
                m.closed
            );
            let mut j = json!({
                "universe": m.universe.len(),
                "universe_closed": m.universe.reduct_closed,
                "family": m.family_names,
                "family_closed": m.closed,
            });
            if let Some(path) = derivation {
                let d = parse_derivation(&read_file(path)?, &m.theory.sig).map_err(|e| format!("derivation: {e}"))?;
                let s = adequacy_spot(&m, &d);
                let (code, v) = match &s {
                    Spot::Pass => (OK, "pass"),
                    Spot::Fail(_) => (NEGATIVE, "fail"),
                    Spot::OutOfUniverse(_) => (BOUND, "out-of-universe"),
                    Spot::Precondition(_) => (INPUT, "precondition"),
                };
                j["verdict"] = json!(v);
                j["detail"] = json!(s.to_string());
                return done(code, format!("{summary}\nadequacy: {s}\n(finite-scale evidence)"), j);
            }
            match (term, ty) {
                (Some(t), Some(a)) => {
                    let t = term_arg(t)?;
                    let a = formula_arg(a, &m.theory.sig)?;
                    let r = member(&m, &t, &a).map_err(|e| format!("sandbox: {e}"))?;
                    let (code, v) = match r {
                        Membership::Yes => (OK, "yes"),
                        Membership::No => (NEGATIVE, "no"),
                        Membership::Unknown => (BOUND, "unknown"),
                    };
                    j["verdict"] = json!(v);
                    done(code, format!("{summary}\nmember: {v}\n(finite-scale evidence)"), j)
                }
                (None, None) => done(OK, summary, j),
                _ => Err("sandbox: --term and --type go together".into()),
            }
        }
        Cmd::Suite { cases } => {
            let src = match cases {
                Some(p) => read_file(p)?,
                None => BUNDLED_CASES.to_string(),
            };
            let cases = parse_cases(&src).map_err(|e| located("cases", e))?;
            let r = run_cases(&cases, &bounds);
            let code = if !r.failures().is_empty() {
                NEGATIVE
            } else if !r.weaker().is_empty() {
                BOUND
            } else {
                OK
            };
            let checks: Vec<Value> = r
                .checks
                .iter()
                .map(|c| {
                    let (o, d) = match &c.outcome {
                        Outcome::Pass => ("pass", String::new()),
                        Outcome::Fail(d) => ("fail", d.clone()),
                        Outcome::Weaker(d) => ("weaker", d.clone()),
                    };
                    json!({"case": c.case, "key": c.key, "expected": c.expected, "actual": c.actual,
                           "evidence": c.evidence.to_string(), "outcome": o, "detail": d})
                })
                .collect();
            done(code, r.to_string(), json!({"checks": checks}))
        }
    }
}

fn star_json(s: &Star) -> Value {
    match s {
        Star::Violated(w) => json!({
            "verdict": "violated",
            "b": w.b.to_string(),
            "c": w.c.to_string(),
            "g": w.g.to_string(),
            "n": w.n,
            "c_parts": w.c_parts.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        }),
        s if s.is_trivial() => json!({"verdict": "clear-at-trivial-bound"}),
        _ => json!({"verdict": "clear-within-bounds"}),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INPUT } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (code, text, body) = match run(&cli) {
        Ok(o) => (o.code, o.text, o.json),
        Err(e) => (INPUT, format!("error: {e}"), json!({"error": e})),
    };
    match cli.common.format {
        Format::Text if code == INPUT => eprintln!("{text}"),
        Format::Text => {
            let _ = writeln!(io::stdout(), "{text}");
        }
        Format::Json => {
            let out = json!({"exit": code, "result": body});
            let _ = writeln!(io::stdout(), "{}", serde_json::to_string_pretty(&out).expect("values serialize"));
        }
    }
    ExitCode::from(code)
}
