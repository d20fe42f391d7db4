//! Derivation files: a JSON tree whose nodes carry `rule`, `ctx`, `term`,
//! `type`, `payload` and `premises`, with terms and formulas in the surface
//! syntax.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Head, Signature};
use crate::syntax::{parse_fo_term, parse_formula, parse_term};

use super::{Context, Derivation, Payload, Rule};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Binding {
    var: String,
    #[serde(rename = "type")]
    ty: String,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPayload {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    var: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    term: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    params: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    template: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    from: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    to: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Node {
    rule: String,
    ctx: Vec<Binding>,
    term: String,
    #[serde(rename = "type")]
    ty: String,
    payload: Option<RawPayload>,
    premises: Vec<Node>,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed derivation file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("node [{}], field `{field}`: {msg}", path_str(.path))]
    Field { path: Vec<usize>, field: &'static str, msg: String },
}

fn path_str(p: &[usize]) -> String {
    p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
}

fn to_node(d: &Derivation) -> Node {
    let payload = match &d.payload {
        Payload::None => None,
        Payload::Var(x) => Some(RawPayload { var: Some(x.clone()), ..Default::default() }),
        Payload::Term(u) => Some(RawPayload { term: Some(u.to_string()), ..Default::default() }),
        Payload::RelInst { var, params, formula } => Some(RawPayload {
            var: Some(var.clone()),
            params: Some(params.clone()),
            formula: Some(formula.to_string()),
            ..Default::default()
        }),
        Payload::RelRename { var, rel } => {
            Some(RawPayload { var: Some(var.clone()), rel: Some(rel.name().to_string()), ..Default::default() })
        }
        Payload::Eq { template, var, from, to } => Some(RawPayload {
            var: Some(var.clone()),
            template: Some(template.to_string()),
            from: Some(from.to_string()),
            to: Some(to.to_string()),
            ..Default::default()
        }),
    };
    Node {
        rule: d.rule.name().to_string(),
        ctx: d.ctx.0.iter().map(|(x, a)| Binding { var: x.clone(), ty: a.to_string() }).collect(),
        term: d.term.to_string(),
        ty: d.ty.to_string(),
        payload,
        premises: d.premises.iter().map(to_node).collect(),
    }
}

/// Pretty-printed JSON, stable under `parse` then `print`.
pub fn print_derivation(d: &Derivation) -> String {
    let mut s = serde_json::to_string_pretty(&to_node(d)).expect("derivations serialize");
    s.push('\n');
    s
}

pub fn parse_derivation(src: &str, sig: &Signature) -> Result<Derivation, FormatError> {
    let node: Node = serde_json::from_str(src)?;
    from_node(&node, sig, &mut Vec::new())
}

fn from_node(n: &Node, sig: &Signature, path: &mut Vec<usize>) -> Result<Derivation, FormatError> {
    let err = |field: &'static str, msg: String| FormatError::Field { path: path.clone(), field, msg };
    let rule = Rule::from_name(&n.rule).ok_or_else(|| err("rule", format!("unknown rule {}", n.rule)))?;
    let mut ctx = Context::new();
    for b in &n.ctx {
        if ctx.contains(&b.var) {
            return Err(err("ctx", format!("{} declared twice", b.var)));
        }
        let a = parse_formula(&b.ty, sig).map_err(|e| err("ctx", e.to_string()))?;
        ctx.0.push((b.var.clone(), a));
    }
    let term = parse_term(&n.term).map_err(|e| err("term", e.to_string()))?;
    let ty = parse_formula(&n.ty, sig).map_err(|e| err("type", e.to_string()))?;
    let p = n.payload.as_ref();
    let need = |v: Option<&String>, what: &'static str| v.cloned().ok_or_else(|| err("payload", format!("missing `{what}`")));
    let payload = match rule {
        Rule::R2 => Payload::Var(need(p.and_then(|p| p.var.as_ref()), "var")?),
        Rule::R5 => {
            let s = need(p.and_then(|p| p.term.as_ref()), "term")?;
            Payload::Term(parse_fo_term(&s, sig).map_err(|e| err("payload", e.to_string()))?)
        }
        Rule::R7 => {
            let var = need(p.and_then(|p| p.var.as_ref()), "var")?;
            let params = p.and_then(|p| p.params.clone()).ok_or_else(|| err("payload", "missing `params`".into()))?;
            let s = need(p.and_then(|p| p.formula.as_ref()), "formula")?;
            let formula = parse_formula(&s, sig).map_err(|e| err("payload", e.to_string()))?;
            Payload::RelInst { var, params, formula }
        }
        Rule::R7o => {
            let var = need(p.and_then(|p| p.var.as_ref()), "var")?;
            let r = need(p.and_then(|p| p.rel.as_ref()), "rel")?;
            let rel = if sig.rels.contains_key(&r) { Head::Sym(r) } else { Head::Var(r) };
            Payload::RelRename { var, rel }
        }
        Rule::R8 => {
            let var = need(p.and_then(|p| p.var.as_ref()), "var")?;
            let t = need(p.and_then(|p| p.template.as_ref()), "template")?;
            let f = need(p.and_then(|p| p.from.as_ref()), "from")?;
            let to = need(p.and_then(|p| p.to.as_ref()), "to")?;
            Payload::Eq {
                template: parse_formula(&t, sig).map_err(|e| err("payload", e.to_string()))?,
                var,
                from: parse_fo_term(&f, sig).map_err(|e| err("payload", e.to_string()))?,
                to: parse_fo_term(&to, sig).map_err(|e| err("payload", e.to_string()))?,
            }
        }
        Rule::R1 | Rule::R3 | Rule::R4 | Rule::R6 => {
            if p.is_some() {
                return Err(err("payload", format!("{} takes no payload", rule)));
            }
            Payload::None
        }
    };
    let mut premises = Vec::new();
    for (i, q) in n.premises.iter().enumerate() {
        path.push(i);
        premises.push(from_node(q, sig, path)?);
        path.pop();
    }
    Ok(Derivation { rule, ctx, term, ty, payload, premises })
}
