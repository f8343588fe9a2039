//! Concrete syntax and command-line entry points.
//!
//! Terms: `x`, `'atom`, integer literals, `(M, N)`, `fun x -> M`, `M N`
//! (left-associative), `fix x -> M`, infix `+ - * = < <= > >=`,
//! `match M with | p -> N | ... end`, plus the sugar `let x = M in N`,
//! `if M then N else P`, `pi1 M`, `pi2 M` and `div`.
//!
//! Types: `Top Ok Atoms Int Bot Pair PairVal Fun Bool`, `'a`, `(A, B)`,
//! `A -> B`, `A \/ B`, `A /\ B`, `~A`, `A onlyto B`, `A coto B` with
//! precedence `~` > `/\` > `\/` > arrows (right-associative).  Abbreviations
//! expand at parse time; printing re-sugars greedily.
//!
//! Scripts are line-oriented headers (`system`, `expect`, `def`,
//! `conclusion`) followed by a `derivation` node in a parenthesised syntax:
//! `(Rule :principal M : A :via T :premises (...))`.

use crate::onesided::{self, OneRule, OneSidedDerivation, OneSidedSequent};
use crate::reduction::{self, EvalOutcome, NfClass, DEFAULT_FUEL};
use crate::subtyping::{
    self, legacy_premise_goals, LegacyRule, LegacyWitness, SubDerivation, SubGoal,
};
use crate::syntax::{free_vars, fresh_name, Ident, BinOp, Pattern, RelOp, Term};
use crate::types::{PatternTypeSubstitution, Type};
use crate::typing::{
    self, formula, CheckReport, Derivation, DynamicVerdict, RuleName, Sequent, TypingFormula,
    Witnesses,
};
use num_bigint::BigInt;
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

// -------------------------------------------------------------------------
// Printing.

fn print_term_prec(t: &Term, prec: u8, out: &mut String) {
    // sugar first
    if let Term::Fix(x, body) = t {
        if matches!(body.as_ref(), Term::Var(y) if y == x) {
            out.push_str("div");
            return;
        }
    }
    if let Some((x, m, n)) = as_let_parts(t) {
        wrap(prec > 0, out, |out| {
            out.push_str("let ");
            out.push_str(x);
            out.push_str(" = ");
            print_term_prec(m, 0, out);
            out.push_str(" in ");
            print_term_prec(n, 0, out);
        });
        return;
    }
    if let Some((c, th, el)) = as_if_parts(t) {
        wrap(prec > 0, out, |out| {
            out.push_str("if ");
            print_term_prec(c, 1, out);
            out.push_str(" then ");
            print_term_prec(th, 0, out);
            out.push_str(" else ");
            print_term_prec(el, 0, out);
        });
        return;
    }
    if let Some((i, m)) = as_proj_parts(t) {
        wrap(prec > 4, out, |out| {
            out.push_str(if i == 1 { "pi1 " } else { "pi2 " });
            print_term_prec(m, 5, out);
        });
        return;
    }
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Atom(a) => {
            out.push('\'');
            out.push_str(a);
        }
        Term::Num(n) => {
            if n.sign() == num_bigint::Sign::Minus {
                wrap(prec > 2, out, |out| out.push_str(&n.to_string()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Term::Pair(a, b) => {
            out.push('(');
            print_term_prec(a, 0, out);
            out.push_str(", ");
            print_term_prec(b, 0, out);
            out.push(')');
        }
        Term::Abs(x, body) => wrap(prec > 0, out, |out| {
            out.push_str("fun ");
            out.push_str(x);
            out.push_str(" -> ");
            print_term_prec(body, 0, out);
        }),
        Term::Fix(x, body) => wrap(prec > 0, out, |out| {
            out.push_str("fix ");
            out.push_str(x);
            out.push_str(" -> ");
            print_term_prec(body, 0, out);
        }),
        Term::App(f, a) => wrap(prec > 4, out, |out| {
            print_term_prec(f, 4, out);
            out.push(' ');
            print_term_prec(a, 5, out);
        }),
        Term::BinOp(op, a, b) => {
            let (lvl, l, r) = match op {
                BinOp::Mul => (3u8, 3u8, 4u8),
                _ => (2, 2, 3),
            };
            wrap(prec > lvl, out, |out| {
                print_term_prec(a, l, out);
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                print_term_prec(b, r, out);
            });
        }
        Term::RelOp(op, a, b) => wrap(prec > 1, out, |out| {
            print_term_prec(a, 2, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            print_term_prec(b, 2, out);
        }),
        Term::Match(scrut, branches) => {
            out.push_str("match ");
            print_term_prec(scrut, 1, out);
            out.push_str(" with");
            for (p, n) in branches {
                out.push_str(" | ");
                print_pattern(p, out);
                out.push_str(" -> ");
                print_term_prec(n, 0, out);
            }
            out.push_str(" end");
        }
    }
}

fn wrap(parens: bool, out: &mut String, f: impl FnOnce(&mut String)) {
    if parens {
        out.push('(');
        f(out);
        out.push(')');
    } else {
        f(out);
    }
}

fn as_let_parts(t: &Term) -> Option<(&Ident, &Term, &Term)> {
    if let Term::App(f, m) = t {
        if let Term::Abs(x, n) = f.as_ref() {
            return Some((x, m, n));
        }
    }
    None
}

fn as_if_parts(t: &Term) -> Option<(&Term, &Term, &Term)> {
    if let Term::Match(scrut, branches) = t {
        if branches.len() == 2 {
            if let (Pattern::Atom(a1), Pattern::Atom(a2)) = (&branches[0].0, &branches[1].0) {
                if a1 == "true" && a2 == "false" {
                    return Some((scrut, &branches[0].1, &branches[1].1));
                }
            }
        }
    }
    None
}

fn as_proj_parts(t: &Term) -> Option<(usize, &Term)> {
    if let Term::Match(scrut, branches) = t {
        if branches.len() == 1 {
            if let (Pattern::Pair(p1, p2), Term::Var(body)) = (&branches[0].0, &branches[0].1) {
                if let (Pattern::Var(x1), Pattern::Var(x2)) = (p1.as_ref(), p2.as_ref()) {
                    if x1 != x2 {
                        let i = if body == x1 {
                            1
                        } else if body == x2 {
                            2
                        } else {
                            return None;
                        };
                        // only sugar the exact form pi-desugaring produces,
                        // so printing round-trips structurally
                        if make_projection(i, (**scrut).clone()) == *t {
                            return Some((i, scrut));
                        }
                    }
                }
            }
        }
    }
    None
}

fn print_pattern(p: &Pattern, out: &mut String) {
    match p {
        Pattern::Var(x) => out.push_str(x),
        Pattern::Atom(a) => {
            out.push('\'');
            out.push_str(a);
        }
        Pattern::Pair(a, b) => {
            out.push('(');
            print_pattern(a, out);
            out.push_str(", ");
            print_pattern(b, out);
            out.push(')');
        }
    }
}

fn print_type_prec(t: &Type, prec: u8, out: &mut String) {
    // abbreviation re-sugaring, most specific first
    if *t == Type::bot() {
        out.push_str("Bot");
        return;
    }
    if *t == Type::pair_val() {
        out.push_str("PairVal");
        return;
    }
    if *t == Type::pair_any() {
        out.push_str("Pair");
        return;
    }
    if *t == Type::fun_any() {
        out.push_str("Fun");
        return;
    }
    if *t == Type::bool_ty() {
        out.push_str("Bool");
        return;
    }
    match t {
        Type::Top => out.push_str("Top"),
        Type::Ok => out.push_str("Ok"),
        Type::Atoms => out.push_str("Atoms"),
        Type::Int => out.push_str("Int"),
        Type::AtomLit(a) => {
            out.push('\'');
            out.push_str(a);
        }
        Type::Pair(a, b) => {
            out.push('(');
            print_type_prec(a, 0, out);
            out.push_str(", ");
            print_type_prec(b, 0, out);
            out.push(')');
        }
        Type::Arrow(a, b) => {
            if let (Type::Comp(ca), Type::Comp(cb)) = (a.as_ref(), b.as_ref()) {
                wrap(prec > 0, out, |out| {
                    print_type_prec(ca, 1, out);
                    out.push_str(" onlyto ");
                    print_type_prec(cb, 0, out);
                });
            } else {
                wrap(prec > 0, out, |out| {
                    print_type_prec(a, 1, out);
                    out.push_str(" -> ");
                    print_type_prec(b, 0, out);
                });
            }
        }
        Type::Union(ms) => wrap(prec > 1, out, |out| {
            for (i, m) in ms.iter().enumerate() {
                if i > 0 {
                    out.push_str(" \\/ ");
                }
                print_type_prec(m, 2, out);
            }
        }),
        Type::Comp(inner) => {
            // coto: ~(~B -> ~A)
            if let Type::Arrow(dom, cod) = inner.as_ref() {
                if let (Type::Comp(b), Type::Comp(a)) = (dom.as_ref(), cod.as_ref()) {
                    wrap(prec > 0, out, |out| {
                        print_type_prec(b, 1, out);
                        out.push_str(" coto ");
                        print_type_prec(a, 0, out);
                    });
                    return;
                }
            }
            // meet: ~(~A1 \/ ... \/ ~Ak)
            if let Type::Union(ms) = inner.as_ref() {
                if ms.len() >= 2 && ms.iter().all(|m| matches!(m, Type::Comp(_))) {
                    wrap(prec > 2, out, |out| {
                        for (i, m) in ms.iter().enumerate() {
                            if i > 0 {
                                out.push_str(" /\\ ");
                            }
                            match m {
                                Type::Comp(x) => print_type_prec(x, 3, out),
                                _ => unreachable!(),
                            }
                        }
                    });
                    return;
                }
            }
            wrap(prec > 3, out, |out| {
                out.push('~');
                print_type_prec(inner, 4, out);
            });
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        print_term_prec(self, 0, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        print_type_prec(self, 0, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for TypingFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.subject, self.ty)
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let left: Vec<String> = self.left.iter().map(|x| x.to_string()).collect();
        let right: Vec<String> = self.right.iter().map(|x| x.to_string()).collect();
        write!(f, "{} |- {}", left.join(" ; "), right.join(" ; "))
    }
}

impl fmt::Display for OneSidedSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let left: Vec<String> = self
            .left
            .iter()
            .map(|(x, t)| format!("{} : {}", x, t))
            .collect();
        let right: Vec<String> = self.right.iter().map(|x| x.to_string()).collect();
        write!(f, "{} |- {}", left.join(" ; "), right.join(" ; "))
    }
}

impl fmt::Display for SubGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <= {}", self.lhs, self.rhs)
    }
}

pub fn print_term(t: &Term) -> String {
    t.to_string()
}

pub fn print_type(t: &Type) -> String {
    t.to_string()
}

// -------------------------------------------------------------------------
// Lexing.

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    TickAtom(String),
    Int(BigInt),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Bar,
    Turnstile,
    Arrow,
    Plus,
    Minus,
    Star,
    EqOp,
    Lt,
    Le,
    Gt,
    Ge,
    UnionOp,
    IsectOp,
    Tilde,
}

#[derive(Clone, Debug)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}:{}: {}", self.line, self.col, self.msg)
    }
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        col,
        msg: msg.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
            for k in 0..n {
                if chars[*i + k] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
            }
            *i += n;
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => advance(&mut i, &mut line, &mut col, 1),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    advance(&mut i, &mut line, &mut col, 1);
                }
            }
            '(' => {
                out.push((Tok::LParen, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            ')' => {
                out.push((Tok::RParen, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '{' => {
                out.push((Tok::LBrace, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '}' => {
                out.push((Tok::RBrace, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            ',' => {
                out.push((Tok::Comma, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            ';' => {
                out.push((Tok::Semi, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            ':' => {
                out.push((Tok::Colon, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '|' => {
                if i + 1 < chars.len() && chars[i + 1] == '-' {
                    out.push((Tok::Turnstile, l0, c0));
                    advance(&mut i, &mut line, &mut col, 2);
                } else {
                    out.push((Tok::Bar, l0, c0));
                    advance(&mut i, &mut line, &mut col, 1);
                }
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1] == '>' {
                    out.push((Tok::Arrow, l0, c0));
                    advance(&mut i, &mut line, &mut col, 2);
                } else {
                    out.push((Tok::Minus, l0, c0));
                    advance(&mut i, &mut line, &mut col, 1);
                }
            }
            '+' => {
                out.push((Tok::Plus, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '*' => {
                out.push((Tok::Star, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '=' => {
                out.push((Tok::EqOp, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '<' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    out.push((Tok::Le, l0, c0));
                    advance(&mut i, &mut line, &mut col, 2);
                } else {
                    out.push((Tok::Lt, l0, c0));
                    advance(&mut i, &mut line, &mut col, 1);
                }
            }
            '>' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    out.push((Tok::Ge, l0, c0));
                    advance(&mut i, &mut line, &mut col, 2);
                } else {
                    out.push((Tok::Gt, l0, c0));
                    advance(&mut i, &mut line, &mut col, 1);
                }
            }
            '\\' => {
                if i + 1 < chars.len() && chars[i + 1] == '/' {
                    out.push((Tok::UnionOp, l0, c0));
                    advance(&mut i, &mut line, &mut col, 2);
                } else {
                    return Err(perr(l0, c0, "expected \\/"));
                }
            }
            '/' => {
                if i + 1 < chars.len() && chars[i + 1] == '\\' {
                    out.push((Tok::IsectOp, l0, c0));
                    advance(&mut i, &mut line, &mut col, 2);
                } else {
                    return Err(perr(l0, c0, "expected /\\"));
                }
            }
            '~' => {
                out.push((Tok::Tilde, l0, c0));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '\'' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(perr(l0, c0, "expected an atom name after '"));
                }
                let name: String = chars[i + 1..j].iter().collect();
                if !name.chars().next().unwrap().is_ascii_lowercase() {
                    return Err(perr(l0, c0, "atom names start with a lowercase letter"));
                }
                let n = j - i;
                out.push((Tok::TickAtom(name), l0, c0));
                advance(&mut i, &mut line, &mut col, n);
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let n = j - i;
                out.push((Tok::Int(s.parse().unwrap()), l0, c0));
                advance(&mut i, &mut line, &mut col, n);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let n = j - i;
                out.push((Tok::Ident(s), l0, c0));
                advance(&mut i, &mut line, &mut col, n);
            }
            other => return Err(perr(l0, c0, format!("unexpected character {:?}", other))),
        }
    }
    Ok(out)
}

// -------------------------------------------------------------------------
// Parsing.

const TERM_KEYWORDS: &[&str] = &[
    "fun", "fix", "match", "with", "end", "let", "in", "if", "then", "else", "div", "pi1", "pi2",
];

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    term_defs: BTreeMap<String, Term>,
    type_defs: BTreeMap<String, Type>,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            term_defs: BTreeMap::new(),
            type_defs: BTreeMap::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or_else(|| {
                self.toks
                    .last()
                    .map(|(_, l, c)| (*l, *c + 1))
                    .unwrap_or((1, 1))
            })
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        perr(l, c, msg)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(x) if x == t => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {}", what))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {}", what))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    // ---- terms ----

    fn parse_binder(&mut self) -> Result<String, ParseError> {
        let x = self.expect_ident("a binder")?;
        if TERM_KEYWORDS.contains(&x.as_str()) {
            return Err(self.err(format!("{} is a keyword", x)));
        }
        if self.term_defs.contains_key(&x) {
            return Err(self.err(format!("binder {} shadows a term definition", x)));
        }
        Ok(x)
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        let lhs = self.parse_additive()?;
        let op = match self.peek() {
            Some(Tok::EqOp) => Some(RelOp::Eq),
            Some(Tok::Lt) => Some(RelOp::Lt),
            Some(Tok::Le) => Some(RelOp::Le),
            Some(Tok::Gt) => Some(RelOp::Gt),
            Some(Tok::Ge) => Some(RelOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let rhs = self.parse_additive()?;
            Ok(Term::relop(op, lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_additive(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.parse_multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_multiplicative()?;
            acc = Term::binop(op, acc, rhs);
        }
        Ok(acc)
    }

    fn parse_multiplicative(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.parse_application()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.pos += 1;
            let rhs = self.parse_application()?;
            acc = Term::binop(BinOp::Mul, acc, rhs);
        }
        Ok(acc)
    }

    fn starts_atom_term(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::LParen) | Some(Tok::TickAtom(_)) | Some(Tok::Int(_))
        ) || matches!(self.peek(), Some(Tok::Ident(s))
            if !matches!(s.as_str(), "with" | "end" | "in" | "then" | "else"))
    }

    fn parse_application(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.parse_prefix()?;
        while self.starts_atom_term() {
            // undelimited low-level forms start a fresh term, not an
            // argument; match ... end is self-delimiting and allowed
            if let Some(Tok::Ident(s)) = self.peek() {
                if matches!(s.as_str(), "fun" | "fix" | "let" | "if") {
                    break;
                }
            }
            let arg = self.parse_atom_term()?;
            acc = Term::app(acc, arg);
        }
        Ok(acc)
    }

    fn parse_prefix(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => match s.as_str() {
                "fun" => {
                    self.pos += 1;
                    let x = self.parse_binder()?;
                    self.expect(&Tok::Arrow, "->")?;
                    let body = self.parse_term()?;
                    Ok(Term::abs(&x, body))
                }
                "fix" => {
                    self.pos += 1;
                    let x = self.parse_binder()?;
                    self.expect(&Tok::Arrow, "->")?;
                    let body = self.parse_term()?;
                    Ok(Term::fix(&x, body))
                }
                "let" => {
                    self.pos += 1;
                    let x = self.parse_binder()?;
                    self.expect(&Tok::EqOp, "=")?;
                    let m = self.parse_term()?;
                    match self.next() {
                        Some(Tok::Ident(k)) if k == "in" => {}
                        _ => return Err(self.err("expected in")),
                    }
                    let n = self.parse_term()?;
                    Ok(Term::let_in(&x, m, n))
                }
                "if" => {
                    self.pos += 1;
                    let c = self.parse_term()?;
                    match self.next() {
                        Some(Tok::Ident(k)) if k == "then" => {}
                        _ => return Err(self.err("expected then")),
                    }
                    let t = self.parse_term()?;
                    match self.next() {
                        Some(Tok::Ident(k)) if k == "else" => {}
                        _ => return Err(self.err("expected else")),
                    }
                    let e = self.parse_term()?;
                    Ok(Term::if_then_else(c, t, e))
                }
                "pi1" | "pi2" => {
                    self.pos += 1;
                    let m = self.parse_atom_term()?;
                    Ok(make_projection(if s == "pi1" { 1 } else { 2 }, m))
                }
                _ => self.parse_atom_term(),
            },
            _ => self.parse_atom_term(),
        }
    }

    fn parse_atom_term(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Minus) => {
                if let Some(Tok::Int(_)) = self.peek2() {
                    self.pos += 1;
                    match self.next() {
                        Some(Tok::Int(n)) => Ok(Term::Num(-n)),
                        _ => unreachable!(),
                    }
                } else {
                    Err(self.err("expected a term"))
                }
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Term::Num(n))
            }
            Some(Tok::TickAtom(a)) => {
                self.pos += 1;
                Ok(Term::Atom(a))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let first = self.parse_term()?;
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.pos += 1;
                        let second = self.parse_term()?;
                        self.expect(&Tok::RParen, ")")?;
                        Ok(Term::pair(first, second))
                    }
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(first)
                    }
                    _ => Err(self.err("expected , or )")),
                }
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "div" => {
                    self.pos += 1;
                    Ok(Term::div())
                }
                "match" => {
                    self.pos += 1;
                    let scrut = self.parse_term()?;
                    match self.next() {
                        Some(Tok::Ident(k)) if k == "with" => {}
                        _ => return Err(self.err("expected with")),
                    }
                    let mut branches = Vec::new();
                    if matches!(self.peek(), Some(Tok::Bar)) {
                        self.pos += 1;
                    }
                    loop {
                        let p = self.parse_pattern()?;
                        self.expect(&Tok::Arrow, "->")?;
                        let body = self.parse_term()?;
                        branches.push((p, body));
                        match self.peek() {
                            Some(Tok::Bar) => {
                                self.pos += 1;
                            }
                            Some(Tok::Ident(k)) if k == "end" => {
                                self.pos += 1;
                                break;
                            }
                            _ => return Err(self.err("expected | or end")),
                        }
                    }
                    let t = Term::Match(Box::new(scrut), branches);
                    t.validate().map_err(|e| self.err(e.to_string()))?;
                    Ok(t)
                }
                "fun" | "fix" | "let" | "if" | "pi1" | "pi2" => self.parse_prefix(),
                _ if TERM_KEYWORDS.contains(&s.as_str()) => {
                    Err(self.err(format!("unexpected keyword {}", s)))
                }
                _ => {
                    self.pos += 1;
                    if let Some(def) = self.term_defs.get(&s) {
                        Ok(def.clone())
                    } else {
                        Ok(Term::Var(s))
                    }
                }
            },
            _ => Err(self.err("expected a term")),
        }
    }

    fn parse_pattern(&mut self) -> Result<Pattern, ParseError> {
        match self.next() {
            Some(Tok::TickAtom(a)) => Ok(Pattern::Atom(a)),
            Some(Tok::Ident(x)) => {
                if TERM_KEYWORDS.contains(&x.as_str()) {
                    return Err(self.err(format!("{} is a keyword", x)));
                }
                Ok(Pattern::Var(x))
            }
            Some(Tok::LParen) => {
                let a = self.parse_pattern()?;
                self.expect(&Tok::Comma, ",")?;
                let b = self.parse_pattern()?;
                self.expect(&Tok::RParen, ")")?;
                Ok(Pattern::ppair(a, b))
            }
            _ => Err(self.err("expected a pattern")),
        }
    }

    // ---- types ----

    fn parse_type(&mut self) -> Result<Type, ParseError> {
        Ok(self.parse_arrow_type()?.canon())
    }

    fn parse_arrow_type(&mut self) -> Result<Type, ParseError> {
        let lhs = self.parse_union_type()?;
        match self.peek().cloned() {
            Some(Tok::Arrow) => {
                self.pos += 1;
                let rhs = self.parse_arrow_type()?;
                Ok(Type::arrow(lhs, rhs))
            }
            Some(Tok::Ident(s)) if s == "onlyto" => {
                self.pos += 1;
                let rhs = self.parse_arrow_type()?;
                Ok(Type::onlyto(lhs, rhs))
            }
            Some(Tok::Ident(s)) if s == "coto" => {
                self.pos += 1;
                let rhs = self.parse_arrow_type()?;
                Ok(Type::coto(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn parse_union_type(&mut self) -> Result<Type, ParseError> {
        let first = self.parse_isect_type()?;
        let mut members = vec![first];
        while matches!(self.peek(), Some(Tok::UnionOp)) {
            self.pos += 1;
            members.push(self.parse_isect_type()?);
        }
        if members.len() == 1 {
            Ok(members.pop().unwrap())
        } else {
            Ok(Type::union(members))
        }
    }

    fn parse_isect_type(&mut self) -> Result<Type, ParseError> {
        let first = self.parse_prefix_type()?;
        let mut members = vec![first];
        while matches!(self.peek(), Some(Tok::IsectOp)) {
            self.pos += 1;
            members.push(self.parse_prefix_type()?);
        }
        if members.len() == 1 {
            Ok(members.pop().unwrap())
        } else {
            Ok(Type::meet(members))
        }
    }

    fn parse_prefix_type(&mut self) -> Result<Type, ParseError> {
        if matches!(self.peek(), Some(Tok::Tilde)) {
            self.pos += 1;
            let inner = self.parse_prefix_type()?;
            Ok(Type::comp(inner))
        } else {
            self.parse_atom_type()
        }
    }

    fn parse_atom_type(&mut self) -> Result<Type, ParseError> {
        match self.next() {
            Some(Tok::TickAtom(a)) => Ok(Type::AtomLit(a)),
            Some(Tok::LParen) => {
                let a = self.parse_arrow_type()?;
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.pos += 1;
                        let b = self.parse_arrow_type()?;
                        self.expect(&Tok::RParen, ")")?;
                        Ok(Type::pair(a, b))
                    }
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(a)
                    }
                    _ => Err(self.err("expected , or )")),
                }
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "Top" => Ok(Type::Top),
                "Ok" => Ok(Type::Ok),
                "Atoms" => Ok(Type::Atoms),
                "Int" => Ok(Type::Int),
                "Bot" => Ok(Type::bot()),
                "Pair" => Ok(Type::pair_any()),
                "PairVal" => Ok(Type::pair_val()),
                "Fun" => Ok(Type::fun_any()),
                "Bool" => Ok(Type::bool_ty()),
                _ => self
                    .type_defs
                    .get(&s)
                    .cloned()
                    .ok_or_else(|| self.err(format!("unknown type name {}", s))),
            },
            _ => Err(self.err("expected a type")),
        }
    }

    // ---- formulas, sequents, nodes ----

    fn parse_formula(&mut self) -> Result<TypingFormula, ParseError> {
        let t = self.parse_term()?;
        self.expect(&Tok::Colon, ":")?;
        let ty = self.parse_type()?;
        Ok(formula(t, ty))
    }

    fn parse_formula_list(&mut self) -> Result<Vec<TypingFormula>, ParseError> {
        let mut out = Vec::new();
        if matches!(self.peek(), Some(Tok::Turnstile)) || self.at_end() {
            return Ok(out);
        }
        loop {
            out.push(self.parse_formula()?);
            if matches!(self.peek(), Some(Tok::Semi)) {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn parse_sequent(&mut self) -> Result<Sequent, ParseError> {
        let left = self.parse_formula_list()?;
        self.expect(&Tok::Turnstile, "|-")?;
        let right = self.parse_formula_list()?;
        Ok(Sequent::new(left, right))
    }

    fn parse_theta(&mut self) -> Result<PatternTypeSubstitution, ParseError> {
        self.expect(&Tok::LBrace, "{")?;
        let mut theta = PatternTypeSubstitution::new();
        if matches!(self.peek(), Some(Tok::RBrace)) {
            self.pos += 1;
            return Ok(theta);
        }
        loop {
            let x = self.expect_ident("a pattern variable")?;
            self.expect(&Tok::EqOp, "=")?;
            let ty = self.parse_type()?;
            theta.insert(&x, ty);
            match self.next() {
                Some(Tok::Semi) => {}
                Some(Tok::RBrace) => break,
                _ => return Err(self.err("expected ; or }")),
            }
        }
        Ok(theta)
    }

    fn parse_raw_node(&mut self) -> Result<RawNode, ParseError> {
        self.expect(&Tok::LParen, "(")?;
        let rule = self.expect_ident("a rule name")?;
        let mut node = RawNode {
            rule,
            principal: None,
            via: None,
            other: None,
            thetas: Vec::new(),
            formula: None,
            index: None,
            premises: Vec::new(),
        };
        loop {
            match self.peek() {
                Some(Tok::RParen) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Colon) => {
                    self.pos += 1;
                    let field = self.expect_ident("a field name")?;
                    match field.as_str() {
                        "principal" => node.principal = Some(self.parse_formula()?),
                        "via" => node.via = Some(self.parse_type()?),
                        "other" => node.other = Some(self.parse_type()?),
                        "formula" => node.formula = Some(self.parse_formula()?),
                        "index" => match self.next() {
                            Some(Tok::Int(n)) => {
                                node.index = Some(n.to_string().parse().map_err(|_| {
                                    self.err("index out of range")
                                })?)
                            }
                            _ => return Err(self.err("expected an index")),
                        },
                        "thetas" => {
                            self.expect(&Tok::LParen, "(")?;
                            while !matches!(self.peek(), Some(Tok::RParen)) {
                                node.thetas.push(self.parse_theta()?);
                            }
                            self.pos += 1;
                        }
                        "premises" => {
                            self.expect(&Tok::LParen, "(")?;
                            while !matches!(self.peek(), Some(Tok::RParen)) {
                                node.premises.push(self.parse_raw_node()?);
                            }
                            self.pos += 1;
                        }
                        other => return Err(self.err(format!("unknown field :{}", other))),
                    }
                }
                _ => return Err(self.err("expected :field or )")),
            }
        }
        Ok(node)
    }
}

/// `pi_i(M)`: a single-branch pair match, with pattern variables chosen
/// fresh for the scrutinee.
pub fn make_projection(i: usize, m: Term) -> Term {
    let fv = free_vars(&m);
    let x1 = if fv.contains("x1") {
        fresh_name("x1", &fv)
    } else {
        "x1".to_string()
    };
    let mut avoid = fv;
    avoid.insert(x1.clone());
    let x2 = if avoid.contains("x2") {
        fresh_name("x2", &avoid)
    } else {
        "x2".to_string()
    };
    let body = Term::Var(if i == 1 { x1.clone() } else { x2.clone() });
    Term::match_term(
        m,
        vec![(
            Pattern::ppair(Pattern::Var(x1), Pattern::Var(x2)),
            body,
        )],
    )
}

#[derive(Clone, Debug)]
struct RawNode {
    rule: String,
    principal: Option<TypingFormula>,
    via: Option<Type>,
    other: Option<Type>,
    thetas: Vec<PatternTypeSubstitution>,
    formula: Option<TypingFormula>,
    index: Option<usize>,
    premises: Vec<RawNode>,
}

/// Parses a term from source text.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.parse_term()?;
    if !p.at_end() {
        return Err(p.err("trailing input after term"));
    }
    t.validate().map_err(|e| p.err(e.to_string()))?;
    Ok(t)
}

/// Parses a type from source text; abbreviations are expanded and the result
/// is canonical.
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.parse_type()?;
    if !p.at_end() {
        return Err(p.err("trailing input after type"));
    }
    Ok(t)
}

// -------------------------------------------------------------------------
// Scripts.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScriptSystem {
    TwoSided,
    OneSided,
    LegacySubtyping,
}

impl ScriptSystem {
    pub fn name(self) -> &'static str {
        match self {
            ScriptSystem::TwoSided => "two-sided",
            ScriptSystem::OneSided => "one-sided",
            ScriptSystem::LegacySubtyping => "legacy-subtyping",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Accept,
    Reject(String),
}

#[derive(Clone, Debug)]
pub enum ScriptDerivation {
    Two(Sequent, Derivation),
    One(OneSidedSequent, OneSidedDerivation),
    Legacy(SubDerivation),
    /// The header parsed but the derivation is not a well-formed instance
    /// of its system (unknown rule, malformed node); always rejected.
    Invalid(String),
}

#[derive(Clone, Debug)]
pub struct Script {
    pub system: ScriptSystem,
    pub expect: Expectation,
    pub derivation: ScriptDerivation,
}

fn raw_to_two(raw: &RawNode) -> Result<Derivation, String> {
    let rule = RuleName::from_name(&raw.rule)
        .ok_or_else(|| format!("unknown two-sided rule {}", raw.rule))?;
    let mut witnesses = Witnesses::none();
    witnesses.via = raw.via.clone().map(|t| t.canon());
    witnesses.other = raw.other.clone().map(|t| t.canon());
    witnesses.thetas = raw.thetas.iter().map(|t| t.canon()).collect();
    witnesses.formula = raw.formula.clone();
    Ok(Derivation {
        rule,
        principal: raw.principal.clone(),
        witnesses,
        premises: raw
            .premises
            .iter()
            .map(raw_to_two)
            .collect::<Result<_, _>>()?,
    })
}

fn raw_to_one(raw: &RawNode) -> Result<OneSidedDerivation, String> {
    let rule = OneRule::from_name(&raw.rule)
        .ok_or_else(|| format!("unknown one-sided rule {}", raw.rule))?;
    let mut witnesses = Witnesses::none();
    witnesses.via = raw.via.clone().map(|t| t.canon());
    witnesses.other = raw.other.clone().map(|t| t.canon());
    witnesses.thetas = raw.thetas.iter().map(|t| t.canon()).collect();
    witnesses.formula = raw.formula.clone();
    Ok(OneSidedDerivation {
        rule,
        principal: raw.principal.clone(),
        witnesses,
        premises: raw
            .premises
            .iter()
            .map(raw_to_one)
            .collect::<Result<_, _>>()?,
    })
}

fn raw_to_legacy(raw: &RawNode, conclusion: &SubGoal) -> Result<SubDerivation, String> {
    let rule = LegacyRule::from_name(&raw.rule)
        .ok_or_else(|| format!("unknown subtyping rule {}", raw.rule))?;
    let witness = LegacyWitness {
        via: raw.via.clone().map(|t| t.canon()),
        index: raw.index,
    };
    let goals = legacy_premise_goals(rule, conclusion, &witness)?;
    if goals.len() != raw.premises.len() {
        return Err(format!(
            "{} requires {} premises, found {}",
            raw.rule,
            goals.len(),
            raw.premises.len()
        ));
    }
    let premises = goals
        .iter()
        .zip(raw.premises.iter())
        .map(|(g, r)| raw_to_legacy(r, g))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SubDerivation {
        rule,
        conclusion: conclusion.clone(),
        witness,
        premises,
    })
}

fn sequent_to_one_sided(s: &Sequent) -> Result<OneSidedSequent, String> {
    let mut left = Vec::new();
    for f in &s.left {
        match &f.subject {
            Term::Var(x) => left.push((x.clone(), f.ty.clone())),
            _ => return Err("one-sided left contexts hold variable typings only".into()),
        }
    }
    Ok(OneSidedSequent::new(
        left,
        s.right.iter().cloned().collect(),
    ))
}

/// Parses a derivation script.
pub fn parse_script(src: &str) -> Result<Script, ParseError> {
    let mut system: Option<ScriptSystem> = None;
    let mut expect = Expectation::Accept;
    let mut parser = Parser::new("")?;
    let mut conclusion_src: Option<(String, usize)> = None;
    let mut derivation_src: Option<(String, usize)> = None;

    let lines: Vec<&str> = src.lines().collect();
    let mut i = 0usize;
    while i < lines.len() {
        let lineno = i + 1;
        let line = lines[i].trim();
        i += 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("system ") {
            system = Some(match rest.trim() {
                "two-sided" => ScriptSystem::TwoSided,
                "one-sided" => ScriptSystem::OneSided,
                "legacy-subtyping" => ScriptSystem::LegacySubtyping,
                other => return Err(perr(lineno, 1, format!("unknown system {}", other))),
            });
        } else if let Some(rest) = line.strip_prefix("expect ") {
            let rest = rest.trim();
            expect = if rest == "accept" {
                Expectation::Accept
            } else if let Some(tag) = rest.strip_prefix("reject") {
                Expectation::Reject(tag.trim().to_string())
            } else {
                return Err(perr(lineno, 1, format!("unknown expectation {}", rest)));
            };
        } else if let Some(rest) = line.strip_prefix("def term ") {
            let (name, body) = rest
                .split_once('=')
                .ok_or_else(|| perr(lineno, 1, "def term needs ="))?;
            let name = name.trim().to_string();
            let mut sub = Parser::new(body)?;
            sub.term_defs = parser.term_defs.clone();
            sub.type_defs = parser.type_defs.clone();
            let t = sub
                .parse_term()
                .map_err(|e| perr(lineno, e.col, e.msg))?;
            if !sub.at_end() {
                return Err(perr(lineno, 1, "trailing input in def term"));
            }
            parser.term_defs.insert(name, t);
        } else if let Some(rest) = line.strip_prefix("def type ") {
            let (name, body) = rest
                .split_once('=')
                .ok_or_else(|| perr(lineno, 1, "def type needs ="))?;
            let name = name.trim().to_string();
            let mut sub = Parser::new(body)?;
            sub.term_defs = parser.term_defs.clone();
            sub.type_defs = parser.type_defs.clone();
            let t = sub.parse_type().map_err(|e| perr(lineno, e.col, e.msg))?;
            if !sub.at_end() {
                return Err(perr(lineno, 1, "trailing input in def type"));
            }
            parser.type_defs.insert(name, t);
        } else if let Some(rest) = line.strip_prefix("conclusion") {
            conclusion_src = Some((rest.trim().to_string(), lineno));
        } else if line == "derivation" {
            derivation_src = Some((lines[i..].join("\n"), lineno + 1));
            break;
        } else {
            return Err(perr(lineno, 1, format!("unexpected line: {}", line)));
        }
    }

    let system = system.ok_or_else(|| perr(1, 1, "missing system header"))?;
    let (concl_src, concl_line) =
        conclusion_src.ok_or_else(|| perr(1, 1, "missing conclusion"))?;
    let (deriv_src, _deriv_line) =
        derivation_src.ok_or_else(|| perr(1, 1, "missing derivation"))?;

    let mut node_parser = Parser::new(&deriv_src)?;
    node_parser.term_defs = parser.term_defs.clone();
    node_parser.type_defs = parser.type_defs.clone();
    let raw = node_parser.parse_raw_node()?;
    if !node_parser.at_end() {
        return Err(node_parser.err("trailing input after derivation"));
    }

    let mut concl_parser = Parser::new(&concl_src)?;
    concl_parser.term_defs = parser.term_defs;
    concl_parser.type_defs = parser.type_defs;

    let derivation = match system {
        ScriptSystem::TwoSided => {
            let root = concl_parser
                .parse_sequent()
                .map_err(|e| perr(concl_line, e.col, e.msg))?;
            match raw_to_two(&raw) {
                Ok(d) => ScriptDerivation::Two(root, d),
                Err(m) => ScriptDerivation::Invalid(m),
            }
        }
        ScriptSystem::OneSided => {
            let root = concl_parser
                .parse_sequent()
                .map_err(|e| perr(concl_line, e.col, e.msg))?;
            match sequent_to_one_sided(&root) {
                Err(m) => ScriptDerivation::Invalid(m),
                Ok(root) => match raw_to_one(&raw) {
                    Ok(d) => ScriptDerivation::One(root, d),
                    Err(m) => ScriptDerivation::Invalid(m),
                },
            }
        }
        ScriptSystem::LegacySubtyping => {
            let lhs = concl_parser
                .parse_arrow_type()
                .map_err(|e| perr(concl_line, e.col, e.msg))?;
            concl_parser
                .expect(&Tok::Le, "<=")
                .map_err(|e| perr(concl_line, e.col, e.msg))?;
            let rhs = concl_parser
                .parse_arrow_type()
                .map_err(|e| perr(concl_line, e.col, e.msg))?;
            let goal = SubGoal::new(lhs, rhs);
            match raw_to_legacy(&raw, &goal) {
                Ok(d) => ScriptDerivation::Legacy(d),
                Err(m) => ScriptDerivation::Invalid(m),
            }
        }
    };

    Ok(Script {
        system,
        expect,
        derivation,
    })
}

// ---- serialisation ----

fn fmt_theta(theta: &PatternTypeSubstitution) -> String {
    let inner: Vec<String> = theta
        .0
        .iter()
        .map(|(x, t)| format!("{} = {}", x, t))
        .collect();
    format!("{{{}}}", inner.join(" ; "))
}

fn serialize_two_node(d: &Derivation, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    out.push_str(&pad);
    out.push('(');
    out.push_str(d.rule.name());
    if let Some(p) = &d.principal {
        out.push_str(&format!(" :principal {}", p));
    }
    if let Some(v) = &d.witnesses.via {
        out.push_str(&format!(" :via {}", v));
    }
    if let Some(v) = &d.witnesses.other {
        out.push_str(&format!(" :other {}", v));
    }
    if let Some(f) = &d.witnesses.formula {
        out.push_str(&format!(" :formula {}", f));
    }
    if !d.witnesses.thetas.is_empty() {
        let ts: Vec<String> = d.witnesses.thetas.iter().map(fmt_theta).collect();
        out.push_str(&format!(" :thetas ({})", ts.join(" ")));
    }
    if !d.premises.is_empty() {
        out.push('\n');
        out.push_str(&pad);
        out.push_str("  :premises (\n");
        for p in &d.premises {
            serialize_two_node(p, indent + 2, out);
            out.push('\n');
        }
        out.push_str(&pad);
        out.push_str("  )");
    }
    out.push(')');
}

fn serialize_one_node(d: &OneSidedDerivation, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    out.push_str(&pad);
    out.push('(');
    out.push_str(d.rule.name());
    if let Some(p) = &d.principal {
        out.push_str(&format!(" :principal {}", p));
    }
    if let Some(v) = &d.witnesses.via {
        out.push_str(&format!(" :via {}", v));
    }
    if !d.witnesses.thetas.is_empty() {
        let ts: Vec<String> = d.witnesses.thetas.iter().map(fmt_theta).collect();
        out.push_str(&format!(" :thetas ({})", ts.join(" ")));
    }
    if !d.premises.is_empty() {
        out.push('\n');
        out.push_str(&pad);
        out.push_str("  :premises (\n");
        for p in &d.premises {
            serialize_one_node(p, indent + 2, out);
            out.push('\n');
        }
        out.push_str(&pad);
        out.push_str("  )");
    }
    out.push(')');
}

fn serialize_legacy_node(d: &SubDerivation, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    out.push_str(&pad);
    out.push('(');
    out.push_str(d.rule.name());
    if let Some(v) = &d.witness.via {
        out.push_str(&format!(" :via {}", v));
    }
    if let Some(i) = d.witness.index {
        out.push_str(&format!(" :index {}", i));
    }
    if !d.premises.is_empty() {
        out.push('\n');
        out.push_str(&pad);
        out.push_str("  :premises (\n");
        for p in &d.premises {
            serialize_legacy_node(p, indent + 2, out);
            out.push('\n');
        }
        out.push_str(&pad);
        out.push_str("  )");
    }
    out.push(')');
}

/// Serialises a script; `parse_script` recovers it up to canonical ordering.
pub fn serialize_script(s: &Script) -> String {
    let mut out = String::new();
    out.push_str(&format!("system {}\n", s.system.name()));
    match &s.expect {
        Expectation::Accept => out.push_str("expect accept\n"),
        Expectation::Reject(tag) => out.push_str(&format!("expect reject {}\n", tag)),
    }
    match &s.derivation {
        ScriptDerivation::Two(root, d) => {
            out.push_str(&format!("conclusion {}\n", root));
            out.push_str("derivation\n");
            serialize_two_node(d, 0, &mut out);
        }
        ScriptDerivation::One(root, d) => {
            out.push_str(&format!("conclusion {}\n", root));
            out.push_str("derivation\n");
            serialize_one_node(d, 0, &mut out);
        }
        ScriptDerivation::Legacy(d) => {
            out.push_str(&format!("conclusion {}\n", d.conclusion));
            out.push_str("derivation\n");
            serialize_legacy_node(d, 0, &mut out);
        }
        ScriptDerivation::Invalid(m) => {
            out.push_str(&format!("# unserialisable: {}\n", m));
        }
    }
    out.push('\n');
    out
}

// -------------------------------------------------------------------------
// Script execution and the corpus runner.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScriptStatus {
    Accepted,
    Rejected(String),
}

#[derive(Clone, Debug)]
pub struct ScriptOutcome {
    pub status: ScriptStatus,
    /// (nodes before, nodes after) for two-sided elaboration.
    pub elaboration: Option<(usize, usize)>,
    pub dynamic: Option<DynamicVerdict>,
}

/// Elaborates (for the two-sided system) and checks a script's derivation.
pub fn run_script(script: &Script) -> ScriptOutcome {
    match &script.derivation {
        ScriptDerivation::Two(root, d) => {
            let before = d.count_nodes();
            match typing::elaborate(root, d) {
                Err(e) => ScriptOutcome {
                    status: ScriptStatus::Rejected(format!("elaboration: {}", e)),
                    elaboration: None,
                    dynamic: None,
                },
                Ok(prim) => {
                    let after = prim.count_nodes();
                    match typing::check(root, &prim) {
                        CheckReport::Accepted => ScriptOutcome {
                            status: ScriptStatus::Accepted,
                            elaboration: Some((before, after)),
                            dynamic: Some(typing::dynamic_soundness_check(root, current_fuel())),
                        },
                        CheckReport::Rejected(f) => ScriptOutcome {
                            status: ScriptStatus::Rejected(f.to_string()),
                            elaboration: Some((before, after)),
                            dynamic: None,
                        },
                    }
                }
            }
        }
        ScriptDerivation::One(root, d) => match onesided::check_one_sided(root, d) {
            CheckReport::Accepted => {
                let embedded = onesided::embed_sequent(root);
                ScriptOutcome {
                    status: ScriptStatus::Accepted,
                    elaboration: None,
                    dynamic: Some(typing::dynamic_soundness_check(&embedded, current_fuel())),
                }
            }
            CheckReport::Rejected(f) => ScriptOutcome {
                status: ScriptStatus::Rejected(f.to_string()),
                elaboration: None,
                dynamic: None,
            },
        },
        ScriptDerivation::Invalid(m) => ScriptOutcome {
            status: ScriptStatus::Rejected(format!("malformed derivation: {}", m)),
            elaboration: None,
            dynamic: None,
        },
        ScriptDerivation::Legacy(d) => match subtyping::check_legacy_subderivation(d) {
            Ok(()) => {
                // an accepted legacy derivation must agree with the decider
                if subtyping::subtype(&d.conclusion.lhs, &d.conclusion.rhs) {
                    ScriptOutcome {
                        status: ScriptStatus::Accepted,
                        elaboration: None,
                        dynamic: None,
                    }
                } else {
                    ScriptOutcome {
                        status: ScriptStatus::Rejected(
                            "legacy derivation accepted but the decider disagrees".into(),
                        ),
                        elaboration: None,
                        dynamic: None,
                    }
                }
            }
            Err(e) => ScriptOutcome {
                status: ScriptStatus::Rejected(e.to_string()),
                elaboration: None,
                dynamic: None,
            },
        },
    }
}

#[derive(Clone, Debug)]
pub struct CorpusResult {
    pub name: String,
    pub verdict: &'static str,
    pub detail: String,
    pub elaboration: String,
    pub dynamic: String,
    pub millis: u128,
}

fn expectation_met(expect: &Expectation, status: &ScriptStatus) -> bool {
    matches!(
        (expect, status),
        (Expectation::Accept, ScriptStatus::Accepted)
            | (Expectation::Reject(_), ScriptStatus::Rejected(_))
    )
}

/// Runs one script file.
pub fn run_script_file(path: &Path) -> CorpusResult {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| path.display().to_string());
    let start = Instant::now();
    let src = match fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            return CorpusResult {
                name,
                verdict: "fail",
                detail: format!("io: {}", e),
                elaboration: "-".into(),
                dynamic: "-".into(),
                millis: start.elapsed().as_millis(),
            }
        }
    };
    let script = match parse_script(&src) {
        Ok(s) => s,
        Err(e) => {
            return CorpusResult {
                name,
                verdict: "fail",
                detail: format!("parse: {}", e),
                elaboration: "-".into(),
                dynamic: "-".into(),
                millis: start.elapsed().as_millis(),
            }
        }
    };
    let outcome = run_script(&script);
    let verdict = if expectation_met(&script.expect, &outcome.status) {
        "pass"
    } else {
        "fail"
    };
    let detail = match (&script.expect, &outcome.status) {
        (Expectation::Accept, ScriptStatus::Accepted) => "accepted".to_string(),
        (Expectation::Reject(tag), ScriptStatus::Rejected(r)) => {
            format!("rejected as expected ({}): {}", tag, r)
        }
        (Expectation::Accept, ScriptStatus::Rejected(r)) => format!("unexpected reject: {}", r),
        (Expectation::Reject(tag), ScriptStatus::Accepted) => {
            format!("unexpected accept (wanted reject {})", tag)
        }
    };
    let elaboration = match outcome.elaboration {
        Some((b, a)) => format!("{} -> {} nodes", b, a),
        None => "-".into(),
    };
    let dynamic = match outcome.dynamic {
        Some(DynamicVerdict::Consistent) => "consistent".into(),
        Some(DynamicVerdict::Violated) => "violated".into(),
        Some(DynamicVerdict::Inconclusive) => "inconclusive".into(),
        None => "-".into(),
    };
    CorpusResult {
        name,
        verdict: if dynamic == "violated" { "fail" } else { verdict },
        detail,
        elaboration,
        dynamic,
        millis: start.elapsed().as_millis(),
    }
}

fn collect_scripts(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_scripts(&path, out)?;
        } else if path.extension().map(|e| e == "script").unwrap_or(false) {
            out.push(path);
        }
    }
    Ok(())
}

/// Runs every `.script` under `dir` (recursively), optionally across
/// threads.  Results come back sorted by file name.
pub fn run_corpus(dir: &Path, jobs: usize) -> std::io::Result<Vec<CorpusResult>> {
    let mut files = Vec::new();
    collect_scripts(dir, &mut files)?;
    let mut results: Vec<CorpusResult> = if jobs <= 1 {
        files.iter().map(|p| run_script_file(p)).collect()
    } else {
        let chunk = files.len().div_ceil(jobs);
        let mut out: Vec<CorpusResult> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = files
                .chunks(chunk.max(1))
                .map(|chunk| scope.spawn(move || chunk.iter().map(|p| run_script_file(p)).collect::<Vec<_>>()))
                .collect();
            for h in handles {
                out.extend(h.join().expect("corpus worker panicked"));
            }
        });
        out
    };
    results.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(results)
}

/// Formats the corpus results as a table; timing is omitted when a
/// deterministic report is needed.
pub fn corpus_report(results: &[CorpusResult], with_timing: bool) -> String {
    let mut out = String::new();
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    for r in results {
        let timing = if with_timing {
            format!("  {:>5}ms", r.millis)
        } else {
            String::new()
        };
        out.push_str(&format!(
            "{:width$}  {:4}  elaboration: {:18}  dynamic: {:12}{}  {}\n",
            r.name,
            r.verdict,
            r.elaboration,
            r.dynamic,
            timing,
            r.detail,
            width = width
        ));
    }
    let passed = results.iter().filter(|r| r.verdict == "pass").count();
    out.push_str(&format!("{} / {} scripts pass\n", passed, results.len()));
    out
}

// -------------------------------------------------------------------------
// Command line.

fn current_fuel() -> usize {
    std::env::var("INCORTYPE_FUEL")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_FUEL)
}

fn read_file(path: &str) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {}", path, e))
}

const USAGE: &str = "usage: incortype <command>
  eval <file.term> [--fuel N]     evaluate a closed term
  classify <file.term>            value / stuck / reducible
  sub \"<A>\" \"<B>\"                 decide the subtype relation
  check <file.script>             elaborate and check a derivation script
  translate <file.script> --to one-sided|two-sided
  synth <file.term>               derive |- U : Ok or |- U : ~Ok for a normal form
  corpus <dir> [--jobs N]         run every script under a directory";

/// Runs one CLI invocation; returns the process exit code (0 success,
/// 1 check failure or false verdict, 2 parse/usage/IO errors).
pub fn run_command(args: &[String]) -> i32 {
    match args.first().map(|s| s.as_str()) {
        Some("eval") => cmd_eval(&args[1..]),
        Some("classify") => cmd_classify(&args[1..]),
        Some("sub") => cmd_sub(&args[1..]),
        Some("check") => cmd_check(&args[1..]),
        Some("translate") => cmd_translate(&args[1..]),
        Some("synth") => cmd_synth(&args[1..]),
        Some("corpus") => cmd_corpus(&args[1..]),
        _ => {
            println!("{}", USAGE);
            2
        }
    }
}

fn cmd_eval(args: &[String]) -> i32 {
    let (file, fuel) = match parse_file_and_flag(args, "--fuel") {
        Ok(x) => x,
        Err(m) => {
            println!("{}", m);
            return 2;
        }
    };
    let fuel = fuel.unwrap_or_else(current_fuel);
    let src = match read_file(&file) {
        Ok(s) => s,
        Err(m) => {
            println!("{}", m);
            return 2;
        }
    };
    let term = match parse_term(&src) {
        Ok(t) => t,
        Err(e) => {
            println!("{}", e);
            return 2;
        }
    };
    match reduction::eval(&term, fuel) {
        Ok(EvalOutcome::Converged { value, steps }) => {
            println!("Converged in {} steps: {}", steps, value);
            0
        }
        Ok(EvalOutcome::WentWrong { stuck, steps }) => {
            println!("WentWrong in {} steps: {}", steps, stuck);
            0
        }
        Ok(EvalOutcome::FuelExhausted { last, steps }) => {
            println!("FuelExhausted after {} steps: {}", steps, last);
            0
        }
        Err(e) => {
            println!("error: {}", e);
            2
        }
    }
}

fn cmd_classify(args: &[String]) -> i32 {
    let file = match args.first() {
        Some(f) => f.clone(),
        None => {
            println!("{}", USAGE);
            return 2;
        }
    };
    let src = match read_file(&file) {
        Ok(s) => s,
        Err(m) => {
            println!("{}", m);
            return 2;
        }
    };
    let term = match parse_term(&src) {
        Ok(t) => t,
        Err(e) => {
            println!("{}", e);
            return 2;
        }
    };
    match reduction::classify_nf(&term) {
        Ok(NfClass::Value) => println!("value"),
        Ok(NfClass::Stuck) => println!("stuck"),
        Ok(NfClass::Reducible) => println!("reducible"),
        Err(e) => {
            println!("error: {}", e);
            return 2;
        }
    }
    0
}

fn cmd_sub(args: &[String]) -> i32 {
    if args.len() != 2 {
        println!("{}", USAGE);
        return 2;
    }
    // arguments are inline types, or paths to .ty files
    let load = |arg: &str| -> Result<Type, String> {
        let src = if arg.ends_with(".ty") {
            read_file(arg)?
        } else {
            arg.to_string()
        };
        parse_type(src.trim()).map_err(|e| e.to_string())
    };
    let a = match load(&args[0]) {
        Ok(t) => t,
        Err(e) => {
            println!("{}", e);
            return 2;
        }
    };
    let b = match load(&args[1]) {
        Ok(t) => t,
        Err(e) => {
            println!("{}", e);
            return 2;
        }
    };
    if subtyping::subtype(&a, &b) {
        println!("true");
        0
    } else {
        println!("false");
        1
    }
}

fn cmd_check(args: &[String]) -> i32 {
    let file = match args.first() {
        Some(f) => f.clone(),
        None => {
            println!("{}", USAGE);
            return 2;
        }
    };
    let src = match read_file(&file) {
        Ok(s) => s,
        Err(m) => {
            println!("{}", m);
            return 2;
        }
    };
    let script = match parse_script(&src) {
        Ok(s) => s,
        Err(e) => {
            println!("{}", e);
            return 2;
        }
    };
    let outcome = run_script(&script);
    println!("system: {}", script.system.name());
    match &outcome.elaboration {
        Some((b, a)) => println!("elaboration: ok ({} -> {} nodes)", b, a),
        None => println!("elaboration: -"),
    }
    match &outcome.status {
        ScriptStatus::Accepted => println!("check: accepted"),
        ScriptStatus::Rejected(r) => println!("check: rejected at {}", r),
    }
    if let Some(dv) = &outcome.dynamic {
        let d = match dv {
            DynamicVerdict::Consistent => "consistent",
            DynamicVerdict::Violated => "violated",
            DynamicVerdict::Inconclusive => "inconclusive",
        };
        println!("dynamic: {}", d);
    }
    let ok = expectation_met(&script.expect, &outcome.status);
    let expect_str = match &script.expect {
        Expectation::Accept => "accept".to_string(),
        Expectation::Reject(tag) => format!("reject {}", tag),
    };
    println!(
        "expected: {} -> {}",
        expect_str,
        if ok { "match" } else { "MISMATCH" }
    );
    if ok {
        0
    } else {
        1
    }
}

fn cmd_translate(args: &[String]) -> i32 {
    let mut file = None;
    let mut to = None;
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--to" {
            if i + 1 >= args.len() {
                println!("{}", USAGE);
                return 2;
            }
            to = Some(args[i + 1].clone());
            i += 2;
        } else {
            file = Some(args[i].clone());
            i += 1;
        }
    }
    let (file, to) = match (file, to) {
        (Some(f), Some(t)) => (f, t),
        _ => {
            println!("{}", USAGE);
            return 2;
        }
    };
    let src = match read_file(&file) {
        Ok(s) => s,
        Err(m) => {
            println!("{}", m);
            return 2;
        }
    };
    let script = match parse_script(&src) {
        Ok(s) => s,
        Err(e) => {
            println!("{}", e);
            return 2;
        }
    };
    match (&script.derivation, to.as_str()) {
        (ScriptDerivation::Two(root, d), "one-sided") => {
            let prim = match typing::elaborate(root, d) {
                Ok(p) => p,
                Err(e) => {
                    println!("elaboration failed: {}", e);
                    return 1;
                }
            };
            if let CheckReport::Rejected(f) = typing::check(root, &prim) {
                println!("source script does not check: {}", f);
                return 1;
            }
            match onesided::translate_two_to_one(root, &prim) {
                Ok((root1, d1)) => {
                    let out = Script {
                        system: ScriptSystem::OneSided,
                        expect: Expectation::Accept,
                        derivation: ScriptDerivation::One(root1, d1),
                    };
                    print!("{}", serialize_script(&out));
                    0
                }
                Err(e) => {
                    println!("{}", e);
                    1
                }
            }
        }
        (ScriptDerivation::One(root, d), "two-sided") => {
            if let CheckReport::Rejected(f) = onesided::check_one_sided(root, d) {
                println!("source script does not check: {}", f);
                return 1;
            }
            match onesided::translate_one_to_two(root, d) {
                Ok((root2, d2)) => {
                    let out = Script {
                        system: ScriptSystem::TwoSided,
                        expect: Expectation::Accept,
                        derivation: ScriptDerivation::Two(root2, d2),
                    };
                    print!("{}", serialize_script(&out));
                    0
                }
                Err(e) => {
                    println!("{}", e);
                    1
                }
            }
        }
        _ => {
            println!("translate: system/direction mismatch (use --to one-sided for two-sided scripts and vice versa)");
            2
        }
    }
}

fn cmd_synth(args: &[String]) -> i32 {
    let file = match args.first() {
        Some(f) => f.clone(),
        None => {
            println!("{}", USAGE);
            return 2;
        }
    };
    let src = match read_file(&file) {
        Ok(s) => s,
        Err(m) => {
            println!("{}", m);
            return 2;
        }
    };
    let term = match parse_term(&src) {
        Ok(t) => t,
        Err(e) => {
            println!("{}", e);
            return 2;
        }
    };
    match typing::classify_and_derive(&term) {
        Ok((_, root, d)) => {
            let script = Script {
                system: ScriptSystem::TwoSided,
                expect: Expectation::Accept,
                derivation: ScriptDerivation::Two(root, d),
            };
            print!("{}", serialize_script(&script));
            0
        }
        Err(e) => {
            println!("{}", e);
            1
        }
    }
}

fn cmd_corpus(args: &[String]) -> i32 {
    let (dir, jobs) = match parse_file_and_flag(args, "--jobs") {
        Ok(x) => x,
        Err(m) => {
            println!("{}", m);
            return 2;
        }
    };
    let jobs = jobs.unwrap_or(1);
    match run_corpus(Path::new(&dir), jobs) {
        Ok(results) => {
            print!("{}", corpus_report(&results, true));
            if results.iter().all(|r| r.verdict == "pass") {
                0
            } else {
                1
            }
        }
        Err(e) => {
            println!("corpus error: {}", e);
            2
        }
    }
}

fn parse_file_and_flag(args: &[String], flag: &str) -> Result<(String, Option<usize>), String> {
    let mut file = None;
    let mut value = None;
    let mut i = 0;
    while i < args.len() {
        if args[i] == flag {
            if i + 1 >= args.len() {
                return Err(USAGE.to_string());
            }
            value = Some(
                args[i + 1]
                    .parse()
                    .map_err(|_| format!("{} expects a number", flag))?,
            );
            i += 2;
        } else {
            file = Some(args[i].clone());
            i += 1;
        }
    }
    file.map(|f| (f, value)).ok_or_else(|| USAGE.to_string())
}
