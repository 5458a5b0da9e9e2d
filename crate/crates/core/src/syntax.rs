//! Concrete syntax: terms and the parenthesized `.trs` format.
//!
//! ```text
//! (VAR x y)
//! (CONDITIONTYPE ORIENTED)
//! (RULES
//!   add(0,y) -> y
//!   add(s(x),y) -> s(z) | add(x,y) == z [step]
//! )
//! ```
//!
//! `[a,b]` is sugar for `cons(a,cons(b,nil))` and `h:t` for `cons(h,t)`.
//! Tuples print as `<a,b>`. Generated names (`f^i`, `f^-1`, `_w1`, tuples)
//! are only accepted when [`ParseOptions::allow_reserved`] is set.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::system::{Condition, RewriteSystem, Rule, SystemError};
use crate::term::{Name, Term, CONS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("reserved name `{name}` used at {line}:{col}")]
    ReservedPrefixUsed { name: String, line: usize, col: usize },
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept names produced by the transformations (`_w1`, `f^i`, `f^-1`,
    /// tuples).
    pub allow_reserved: bool,
}

impl ParseOptions {
    pub fn generated() -> ParseOptions {
        ParseOptions { allow_reserved: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LAngle,
    RAngle,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    Arrow,
    MapsTo,
    Pipe,
    EqEq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("{other:?}"),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub(crate) struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    opts: ParseOptions,
    peeked: Option<(Tok, usize, usize, usize)>,
    last: (usize, usize),
    _src: &'a str,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str, opts: ParseOptions) -> Parser<'a> {
        Parser { chars: src.chars().collect(), pos: 0, line: 1, col: 1, opts, peeked: None, last: (1, 1), _src: src }
    }

    fn bump(&mut self) -> Option<char> {
        let c = *self.chars.get(self.pos)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.get(self.pos) {
            if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    pub(crate) fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = match &self.peeked {
            Some((_, _, l, c)) => (*l, *c),
            None => self.last,
        };
        Err(ParseError::Syntax { line, col, message: message.into() })
    }

    fn lex(&mut self) -> Result<(Tok, usize, usize, usize), ParseError> {
        self.skip_ws();
        let (start, line, col) = (self.pos, self.line, self.col);
        let Some(c) = self.bump() else {
            return Ok((Tok::Eof, start, line, col));
        };
        let next = self.chars.get(self.pos).copied();
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '<' | '⟨' if !self.opts.allow_reserved => {
                return Err(ParseError::ReservedPrefixUsed { name: "<…>".into(), line, col });
            }
            '<' | '⟨' => Tok::LAngle,
            '>' | '⟩' => Tok::RAngle,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '|' => Tok::Pipe,
            '↦' => Tok::MapsTo,
            '→' => Tok::Arrow,
            '-' if next == Some('>') => {
                self.bump();
                Tok::Arrow
            }
            '=' if next == Some('=') => {
                self.bump();
                Tok::EqEq
            }
            c if is_ident_char(c) => {
                let mut name = String::from(c);
                while let Some(&d) = self.chars.get(self.pos) {
                    if is_ident_char(d) {
                        name.push(d);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if self.chars.get(self.pos) == Some(&'^') {
                    self.bump();
                    name.push('^');
                    match (self.chars.get(self.pos), self.chars.get(self.pos + 1)) {
                        (Some('i'), _) => {
                            self.bump();
                            name.push('i');
                        }
                        (Some('-'), Some('1')) => {
                            self.bump();
                            self.bump();
                            name.push_str("-1");
                        }
                        _ => {
                            return Err(ParseError::Syntax {
                                line,
                                col,
                                message: "expected `^i` or `^-1`".into(),
                            })
                        }
                    }
                }
                if !self.opts.allow_reserved && (name.starts_with('_') || name.contains('^')) {
                    return Err(ParseError::ReservedPrefixUsed { name, line, col });
                }
                Tok::Ident(name)
            }
            other => {
                return Err(ParseError::Syntax { line, col, message: format!("unexpected character `{other}`") })
            }
        };
        Ok((tok, start, line, col))
    }

    pub(crate) fn peek(&mut self) -> Result<&Tok, ParseError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex()?);
        }
        Ok(&self.peeked.as_ref().unwrap().0)
    }

    pub(crate) fn next(&mut self) -> Result<Tok, ParseError> {
        self.peek()?;
        let (tok, _, line, col) = self.peeked.take().unwrap();
        self.last = (line, col);
        Ok(tok)
    }

    pub(crate) fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let got = self.peek()?.clone();
        if got == want {
            self.next()?;
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", want.describe(), got.describe()))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek()?.clone() {
            Tok::Ident(s) => {
                self.next()?;
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {}", other.describe())),
        }
    }

    pub(crate) fn at_eof(&mut self) -> Result<bool, ParseError> {
        Ok(*self.peek()? == Tok::Eof)
    }

    /// Skips a balanced parenthesized body; the opening `(` and keyword are
    /// already consumed.
    fn skip_raw_section(&mut self) -> Result<(), ParseError> {
        debug_assert!(self.peeked.is_none());
        let mut depth = 1;
        while let Some(c) = self.bump() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                _ => {}
            }
        }
        self.error("unterminated section")
    }

    pub(crate) fn term(&mut self, vars: &BTreeSet<Name>) -> Result<Term, ParseError> {
        let head = self.primary(vars)?;
        if *self.peek()? == Tok::Colon {
            self.next()?;
            let tail = self.term(vars)?;
            return Ok(Term::app(CONS, vec![head, tail]));
        }
        Ok(head)
    }

    fn term_list(&mut self, vars: &BTreeSet<Name>, close: Tok) -> Result<Vec<Term>, ParseError> {
        let mut items = Vec::new();
        if *self.peek()? == close {
            self.next()?;
            return Ok(items);
        }
        loop {
            items.push(self.term(vars)?);
            match self.next()? {
                Tok::Comma => continue,
                t if t == close => return Ok(items),
                t => return self.error(format!("expected `,` or {}, found {}", close.describe(), t.describe())),
            }
        }
    }

    fn primary(&mut self, vars: &BTreeSet<Name>) -> Result<Term, ParseError> {
        match self.next()? {
            Tok::Ident(name) => {
                let is_var = vars.contains(name.as_str());
                if *self.peek()? == Tok::LParen {
                    if is_var {
                        return self.error(format!("variable `{name}` applied to arguments"));
                    }
                    self.next()?;
                    let args = self.term_list(vars, Tok::RParen)?;
                    Ok(Term::app(&name, args))
                } else if is_var {
                    Ok(Term::var(&name))
                } else {
                    Ok(Term::constant(&name))
                }
            }
            Tok::LBracket => Ok(Term::list(self.term_list(vars, Tok::RBracket)?)),
            Tok::LAngle => {
                Ok(Term::tuple(self.term_list(vars, Tok::RAngle)?))
            }
            Tok::LParen => {
                let t = self.term(vars)?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => self.error(format!("expected term, found {}", other.describe())),
        }
    }

    fn rule(&mut self, vars: &BTreeSet<Name>) -> Result<(Option<String>, Term, Term, Vec<Condition>), ParseError> {
        let lhs = self.term(vars)?;
        self.expect(Tok::Arrow)?;
        let rhs = self.term(vars)?;
        let mut conditions = Vec::new();
        if *self.peek()? == Tok::Pipe {
            self.next()?;
            loop {
                let s = self.term(vars)?;
                self.expect(Tok::EqEq)?;
                let t = self.term(vars)?;
                conditions.push(Condition { lhs: s, rhs: t });
                if *self.peek()? == Tok::Comma {
                    self.next()?;
                } else {
                    break;
                }
            }
        }
        let mut label = None;
        if *self.peek()? == Tok::LBracket {
            self.next()?;
            label = Some(self.ident()?);
            self.expect(Tok::RBracket)?;
        }
        Ok((label, lhs, rhs, conditions))
    }
}

/// Parses a `.trs` system, rejecting reserved names.
pub fn parse_system(text: &str) -> Result<RewriteSystem, ParseError> {
    parse_system_with(text, ParseOptions::default())
}

pub fn parse_system_with(text: &str, opts: ParseOptions) -> Result<RewriteSystem, ParseError> {
    let mut p = Parser::new(text, opts);
    let mut vars: BTreeSet<Name> = BTreeSet::new();
    let mut raw_rules = Vec::new();
    while !p.at_eof()? {
        p.expect(Tok::LParen)?;
        let keyword = p.ident()?;
        match keyword.as_str() {
            "VAR" => loop {
                match p.next()? {
                    Tok::Ident(x) => {
                        vars.insert(x.as_str().into());
                    }
                    Tok::RParen => break,
                    t => return p.error(format!("expected variable name, found {}", t.describe())),
                }
            },
            "CONDITIONTYPE" => {
                let kind = p.ident()?;
                if kind != "ORIENTED" {
                    return p.error(format!("unsupported condition type `{kind}`"));
                }
                p.expect(Tok::RParen)?;
            }
            "COMMENT" => p.skip_raw_section()?,
            "RULES" => {
                while *p.peek()? != Tok::RParen {
                    if p.at_eof()? {
                        return p.error("unterminated RULES section");
                    }
                    raw_rules.push(p.rule(&vars)?);
                }
                p.next()?;
            }
            other => return p.error(format!("unknown section `{other}`")),
        }
    }
    let rules = raw_rules
        .into_iter()
        .enumerate()
        .map(|(i, (label, lhs, rhs, conditions))| Rule {
            label: label.unwrap_or_else(|| format!("b{}", i + 1)).as_str().into(),
            lhs,
            rhs,
            conditions,
        })
        .collect();
    Ok(RewriteSystem::new(rules)?)
}

/// Parses a term; identifiers listed in `vars` are variables.
pub fn parse_term_with(text: &str, vars: &BTreeSet<Name>, opts: ParseOptions) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, opts);
    let t = p.term(vars)?;
    if !p.at_eof()? {
        return p.error("trailing input after term");
    }
    Ok(t)
}

/// Parses a ground term; every identifier is a symbol.
pub fn parse_ground_term(text: &str) -> Result<Term, ParseError> {
    parse_term_with(text, &BTreeSet::new(), ParseOptions::generated())
}

/// Parses a comma-separated sequence of ground terms (`a, [b,c], f(d)`).
pub fn parse_ground_terms(text: &str) -> Result<Vec<Term>, ParseError> {
    let mut p = Parser::new(text, ParseOptions::generated());
    let none = BTreeSet::new();
    let mut out = Vec::new();
    if p.at_eof()? {
        return Ok(out);
    }
    loop {
        out.push(p.term(&none)?);
        match p.next()? {
            Tok::Comma => continue,
            Tok::Eof => return Ok(out),
            t => return p.error(format!("expected `,`, found {}", t.describe())),
        }
    }
}

/// Prints a system so that [`parse_system_with`] reads it back unchanged.
pub fn format_system(system: &RewriteSystem) -> String {
    let mut vars: BTreeSet<Name> = BTreeSet::new();
    for rule in system.rules() {
        rule.add_vars_to(&mut vars);
    }
    let mut out = String::new();
    if !vars.is_empty() {
        let names: Vec<&str> = vars.iter().map(|v| &**v).collect();
        out.push_str(&format!("(VAR {})\n", names.join(" ")));
    }
    if system.rules().iter().any(|r| !r.conditions.is_empty()) {
        out.push_str("(CONDITIONTYPE ORIENTED)\n");
    }
    if system.rules().is_empty() {
        out.push_str("(RULES )\n");
        return out;
    }
    out.push_str("(RULES\n");
    for (i, rule) in system.rules().iter().enumerate() {
        out.push_str("  ");
        out.push_str(&format_rule(rule));
        if *rule.label != *format!("b{}", i + 1) {
            out.push_str(&format!(" [{}]", rule.label));
        }
        out.push('\n');
    }
    out.push_str(")\n");
    out
}

/// `l -> r | s1 == t1, s2 == t2` without the label.
pub fn format_rule(rule: &Rule) -> String {
    let mut s = format!("{} -> {}", rule.lhs, rule.rhs);
    if !rule.conditions.is_empty() {
        let conds: Vec<String> = rule.conditions.iter().map(|c| format!("{} == {}", c.lhs, c.rhs)).collect();
        s.push_str(" | ");
        s.push_str(&conds.join(", "));
    }
    s
}
