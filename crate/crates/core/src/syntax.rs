//! ASCII surface syntax: lexer and recursive-descent parsers for λ-terms,
//! first-order terms, formulas and theory files.

use std::fmt;

use thiserror::Error;

use crate::lambda::Term;
use crate::logic::{Equation, FoTerm, Formula, Head, Signature, Theory};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Lambda,
    Dot,
    Comma,
    Arrow,
    Slash,
    Eq,
    Colon,
    Open(char),
    Close(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Lambda => write!(f, "`\\`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Open(c) | Tok::Close(c) => write!(f, "`{c}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    lex_at(src, 1, 1)
}

/// Lexes `src` as if it started at `line:col` of some file.
pub fn lex_at(src: &str, line0: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, line0, col0);
    while i < chars.len() {
        let c = chars[i];
        let (l, k) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: l, col: k });
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if ident_char(c) {
            let start = i;
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            push(&mut out, Tok::Ident(s));
            continue;
        }
        let tok = match c {
            '\\' => Tok::Lambda,
            '.' => Tok::Dot,
            ',' => Tok::Comma,
            '/' => Tok::Slash,
            '=' => Tok::Eq,
            ':' => Tok::Colon,
            '(' | '[' | '{' => Tok::Open(c),
            ')' | ']' | '}' => Tok::Close(c),
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                col += 1;
                Tok::Arrow
            }
            _ => return Err(ParseError { line: l, col: k, msg: format!("unexpected character `{c}`") }),
        };
        push(&mut out, tok);
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

fn closer(open: char) -> char {
    match open {
        '(' => ')',
        '[' => ']',
        _ => '}',
    }
}

pub fn is_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

pub fn is_lower(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_lowercase() || c == '_')
}

pub fn is_digit_ident(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_digit())
}

/// Token cursor shared by every format parser.
pub struct Parser<'s> {
    toks: Vec<Token>,
    pos: usize,
    pub sig: &'s Signature,
}

impl<'s> Parser<'s> {
    pub fn new(src: &str, sig: &'s Signature) -> Result<Parser<'s>, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, sig })
    }

    pub fn from_tokens(toks: Vec<Token>, sig: &'s Signature) -> Parser<'s> {
        Parser { toks, pos: 0, sig }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError { line, col, msg: msg.into() })
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.error(format!("expected {t}, found {}", self.peek()))
        }
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            self.error(format!("unexpected {}", self.peek()))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected an identifier, found {t}")),
        }
    }

    pub fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            t => self.error(format!("expected `{kw}`, found {t}")),
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn number(&mut self) -> Result<usize, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s.chars().all(|c| c.is_ascii_digit()) => {
                self.bump();
                s.parse().or_else(|_| self.error("number too large"))
            }
            t => self.error(format!("expected a number, found {t}")),
        }
    }

    // ---- λ-terms ----

    pub fn lambda_term(&mut self) -> Result<Term, ParseError> {
        if self.eat(&Tok::Lambda) {
            let mut binders = vec![self.lambda_var()?];
            while let Tok::Ident(_) = self.peek() {
                binders.push(self.lambda_var()?);
            }
            self.expect(&Tok::Dot)?;
            let body = self.lambda_term()?;
            return Ok(binders.iter().rev().fold(body, |b, x| Term::lam(x, b)));
        }
        let mut t = self.lambda_atom()?;
        loop {
            match self.peek() {
                Tok::Ident(_) | Tok::Open(_) => {
                    let a = self.lambda_atom()?;
                    t = Term::app(t, a);
                }
                Tok::Lambda => {
                    let a = self.lambda_term()?;
                    return Ok(Term::app(t, a));
                }
                _ => return Ok(t),
            }
        }
    }

    fn lambda_var(&mut self) -> Result<String, ParseError> {
        let (line, col) = self.here();
        let x = self.ident()?;
        if !is_lower(&x) {
            return Err(ParseError { line, col, msg: format!("λ-variable `{x}` must start with a lowercase letter") });
        }
        Ok(x)
    }

    fn lambda_atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Open(c) => {
                self.bump();
                let t = self.lambda_term()?;
                self.expect(&Tok::Close(closer(c)))?;
                Ok(t)
            }
            Tok::Ident(_) => Ok(Term::var(&self.lambda_var()?)),
            t => self.error(format!("expected a λ-term, found {t}")),
        }
    }

    // ---- first-order terms ----

    pub fn fo_term(&mut self) -> Result<FoTerm, ParseError> {
        let (line, col) = self.here();
        let name = self.ident()?;
        if is_upper(&name) {
            return Err(ParseError { line, col, msg: format!("`{name}` is a relation name, expected a first-order term") });
        }
        if let Tok::Open('(') = self.peek() {
            self.bump();
            let mut args = vec![self.fo_term()?];
            while self.eat(&Tok::Comma) {
                args.push(self.fo_term()?);
            }
            self.expect(&Tok::Close(')'))?;
            return Ok(FoTerm::App(name, args));
        }
        // `s x` for a declared unary symbol
        if self.sig.funs.get(&name) == Some(&1) && self.starts_fo_atom() {
            let arg = self.fo_atom()?;
            return Ok(FoTerm::App(name, vec![arg]));
        }
        Ok(self.bare(name))
    }

    fn starts_fo_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_upper(s) && s != "forall",
            Tok::Open(_) => true,
            _ => false,
        }
    }

    fn fo_atom(&mut self) -> Result<FoTerm, ParseError> {
        if let Tok::Open(c) = self.peek().clone() {
            self.bump();
            let t = self.fo_term()?;
            self.expect(&Tok::Close(closer(c)))?;
            return Ok(t);
        }
        self.fo_term()
    }

    fn bare(&self, name: String) -> FoTerm {
        if is_digit_ident(&name) || self.sig.is_constant(&name) {
            FoTerm::App(name, Vec::new())
        } else {
            FoTerm::Var(name)
        }
    }

    // ---- formulas ----

    pub fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.is_keyword("forall") {
            self.bump();
            let mut binders = Vec::new();
            loop {
                match self.peek().clone() {
                    Tok::Ident(x) if is_upper(&x) => {
                        self.bump();
                        let n = if self.eat(&Tok::Slash) { self.number()? } else { 0 };
                        binders.push((x, Some(n)));
                    }
                    Tok::Ident(x) if is_lower(&x) && x != "forall" => {
                        self.bump();
                        binders.push((x, None));
                    }
                    _ => break,
                }
            }
            if binders.is_empty() {
                return self.error("expected a variable after `forall`");
            }
            self.expect(&Tok::Dot)?;
            let body = self.formula()?;
            return Ok(binders.into_iter().rev().fold(body, |b, (x, n)| match n {
                Some(n) => Formula::ForallRel(x, n, Box::new(b)),
                None => Formula::ForallFo(x, Box::new(b)),
            }));
        }
        let left = self.formula_primary()?;
        if self.eat(&Tok::Arrow) {
            let right = self.formula()?;
            return Ok(Formula::arrow(left, right));
        }
        Ok(left)
    }

    fn formula_primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Open(c) => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::Close(closer(c)))?;
                Ok(f)
            }
            Tok::Ident(x) if is_upper(&x) => {
                self.bump();
                let mut args = Vec::new();
                if let Tok::Open('(') = self.peek() {
                    self.bump();
                    args.push(self.fo_term()?);
                    while self.eat(&Tok::Comma) {
                        args.push(self.fo_term()?);
                    }
                    self.expect(&Tok::Close(')'))?;
                }
                let head = if self.sig.rels.contains_key(&x) { Head::Sym(x) } else { Head::Var(x) };
                Ok(Formula::Atom(head, args))
            }
            t => self.error(format!("expected a formula, found {t}")),
        }
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let sig = Signature::default();
    let mut p = Parser::new(src, &sig)?;
    let t = p.lambda_term()?;
    p.expect_end()?;
    Ok(t)
}

pub fn parse_fo_term(src: &str, sig: &Signature) -> Result<FoTerm, ParseError> {
    let mut p = Parser::new(src, sig)?;
    let t = p.fo_term()?;
    p.expect_end()?;
    Ok(t)
}

pub fn parse_formula(src: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src, sig)?;
    let f = p.formula()?;
    p.expect_end()?;
    Ok(f)
}

/// Theory declarations until end of input or an unknown keyword.
pub fn parse_theory_items(p: &mut Parser<'_>, th: &mut Theory) -> Result<(), ParseError> {
    loop {
        if p.is_keyword("fun") || p.is_keyword("rel") {
            let is_fun = p.is_keyword("fun");
            p.bump();
            let (line, col) = p.here();
            let name = p.ident()?;
            p.expect(&Tok::Slash)?;
            let n = p.number()?;
            p.expect(&Tok::Dot)?;
            let bad = if is_fun { is_upper(&name) } else { !is_upper(&name) };
            if bad {
                let kind = if is_fun { "function symbols are lowercase or digits" } else { "relation symbols are uppercase" };
                return Err(ParseError { line, col, msg: format!("`{name}`: {kind}") });
            }
            let clash = if is_fun { th.sig.rels.contains_key(&name) } else { th.sig.funs.contains_key(&name) };
            if clash {
                return Err(ParseError { line, col, msg: format!("`{name}` is declared both as function and relation") });
            }
            if is_fun {
                th.sig.funs.insert(name, n);
            } else {
                th.sig.rels.insert(name, n);
            }
        } else if p.is_keyword("eq") {
            p.bump();
            let (line, col) = p.here();
            let sig = th.sig.clone();
            let mut q = Parser { toks: p.toks.clone(), pos: p.pos, sig: &sig };
            let lhs = q.fo_term()?;
            q.expect(&Tok::Eq)?;
            let rhs = q.fo_term()?;
            q.expect(&Tok::Dot)?;
            p.pos = q.pos;
            for t in [&lhs, &rhs] {
                if let Err(e) = th.sig.check_term(t) {
                    return Err(ParseError { line, col, msg: e.to_string() });
                }
            }
            th.equations.push(Equation { lhs, rhs });
        } else {
            return Ok(());
        }
    }
}

/// Theory file: `fun s/1.`, `rel P/1.`, `eq p(s x) = x.` lines.
pub fn parse_theory(src: &str) -> Result<Theory, ParseError> {
    let empty = Signature::default();
    let mut p = Parser::new(src, &empty)?;
    let mut th = Theory::default();
    parse_theory_items(&mut p, &mut th)?;
    p.expect_end()?;
    Ok(th)
}

pub fn print_theory(th: &Theory) -> String {
    let mut s = String::new();
    for (f, n) in &th.sig.funs {
        s.push_str(&format!("fun {f}/{n}.\n"));
    }
    for (r, n) in &th.sig.rels {
        s.push_str(&format!("rel {r}/{n}.\n"));
    }
    for e in &th.equations {
        s.push_str(&format!("eq {e}.\n"));
    }
    s
}
