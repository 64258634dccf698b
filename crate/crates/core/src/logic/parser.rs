use std::fmt;

use thiserror::Error;

use super::ast::{Bound, Comparison, Interval, PathFormula, Query, StateFormula};
use crate::scm::Intervention;

/// Deeper nesting than this is rejected rather than risking the stack.
const MAX_DEPTH: usize = 200;

/// A syntax error at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        Self { offset, expected: Vec::new(), message: message.into() }
    }

    fn expected(offset: usize, expected: &[&str], found: &Tok) -> Self {
        Self {
            offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            message: format!("unexpected {found}"),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.offset, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    At,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Assign,
    Cmp(Comparison),
    QueryMark,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Str(s) => write!(f, "atom {s:?}"),
            Tok::Num(s) => write!(f, "number {s}"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBrack => f.write_str("'['"),
            Tok::RBrack => f.write_str("']'"),
            Tok::Comma => f.write_str("','"),
            Tok::Dot => f.write_str("'.'"),
            Tok::At => f.write_str("'@'"),
            Tok::Bang => f.write_str("'!'"),
            Tok::Amp => f.write_str("'&'"),
            Tok::Pipe => f.write_str("'|'"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::Assign => f.write_str("'<-'"),
            Tok::Cmp(c) => write!(f, "'{c}'"),
            Tok::QueryMark => f.write_str("'=?'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let starts_number = |j: usize| {
        bytes.get(j).is_some_and(|b| b.is_ascii_digit())
            || (bytes.get(j) == Some(&b'.') && bytes.get(j + 1).is_some_and(|b| b.is_ascii_digit()))
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBrack,
            b']' => Tok::RBrack,
            b',' => Tok::Comma,
            b'@' => Tok::At,
            b'!' => Tok::Bang,
            b'&' => Tok::Amp,
            b'|' => Tok::Pipe,
            b'.' if !starts_number(i) => Tok::Dot,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'<' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Cmp(Comparison::Le)
            }
            // `<-` followed by a number is a comparison with a negative value
            b'<' if bytes.get(i + 1) == Some(&b'-') && !starts_number(i + 2) => {
                i += 1;
                Tok::Assign
            }
            b'<' => Tok::Cmp(Comparison::Lt),
            b'>' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Cmp(Comparison::Ge)
            }
            b'>' => Tok::Cmp(Comparison::Gt),
            b'=' if bytes.get(i + 1) == Some(&b'?') => {
                i += 1;
                Tok::QueryMark
            }
            b'"' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match src[j..].chars().next() {
                        None => return Err(ParseError::new(start, "unterminated atom")),
                        Some('"') => break,
                        Some('\\') => match src[j + 1..].chars().next() {
                            Some(e @ ('"' | '\\')) => {
                                s.push(e);
                                j += 2;
                            }
                            _ => return Err(ParseError::new(j, "invalid escape in atom")),
                        },
                        Some(ch) => {
                            s.push(ch);
                            j += ch.len_utf8();
                        }
                    }
                }
                i = j;
                Tok::Str(s)
            }
            b'-' | b'0'..=b'9' | b'.' => {
                let mut j = i;
                if c == b'-' {
                    if !starts_number(i + 1) {
                        return Err(ParseError::new(start, "expected '->' or a number after '-'"));
                    }
                    j += 1;
                }
                while bytes.get(j).is_some_and(|b| b.is_ascii_digit()) {
                    j += 1;
                }
                if bytes.get(j) == Some(&b'.') && bytes.get(j + 1).is_some_and(|b| b.is_ascii_digit()) {
                    j += 1;
                    while bytes.get(j).is_some_and(|b| b.is_ascii_digit()) {
                        j += 1;
                    }
                }
                if matches!(bytes.get(j), Some(b'e' | b'E')) {
                    let mut k = j + 1;
                    if matches!(bytes.get(k), Some(b'+' | b'-')) {
                        k += 1;
                    }
                    if bytes.get(k).is_some_and(|b| b.is_ascii_digit()) {
                        while bytes.get(k).is_some_and(|b| b.is_ascii_digit()) {
                            k += 1;
                        }
                        j = k;
                    }
                }
                i = j - 1;
                Tok::Num(src[start..j].to_string())
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while bytes.get(j).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_') {
                    j += 1;
                }
                i = j - 1;
                Tok::Ident(src[start..j].to_string())
            }
            _ => {
                let ch = src[i..].chars().next().expect("in bounds");
                return Err(ParseError::new(start, format!("unexpected character {ch:?}")));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((src.len(), Tok::Eof));
    Ok(out)
}

const PRIMARY: &[&str] = &["true", "atom", "'('", "'!'", "'F'", "'G'", "'X'", "'P'", "'R'", "'['", "'D'"];

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::expected(self.offset(), expected, self.peek()))
    }

    fn expect(&mut self, tok: Tok, label: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(&[label])
        }
    }

    fn expect_ident(&mut self, name: &str) -> Result<(), ParseError> {
        if self.at_ident(name) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[&format!("'{name}'")])
        }
    }

    fn descend(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::new(self.offset(), "formula nested too deeply"));
        }
        Ok(())
    }

    /// expr := implies ( 'U' interval expr )?
    fn expr(&mut self) -> Result<PathFormula, ParseError> {
        self.descend()?;
        let lhs = self.implies()?;
        let out = if self.at_ident("U") {
            self.bump();
            let iv = self.interval()?;
            let rhs = self.expr()?;
            PathFormula::until(lhs, iv, rhs)
        } else {
            lhs
        };
        self.depth -= 1;
        Ok(out)
    }

    fn implies(&mut self) -> Result<PathFormula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            self.descend()?;
            let rhs = self.implies()?;
            self.depth -= 1;
            return Ok(PathFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<PathFormula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            lhs = PathFormula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<PathFormula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            lhs = PathFormula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<PathFormula, ParseError> {
        self.descend()?;
        let out = match self.peek() {
            Tok::Bang => {
                self.bump();
                PathFormula::not(self.unary()?)
            }
            Tok::Ident(s) if s == "F" || s == "G" => {
                let globally = s == "G";
                self.bump();
                let iv = self.interval()?;
                let body = self.unary()?;
                if globally {
                    PathFormula::globally(iv, body)
                } else {
                    PathFormula::eventually(iv, body)
                }
            }
            Tok::Ident(s) if s == "X" => {
                self.bump();
                PathFormula::next(self.unary()?)
            }
            _ => self.primary()?,
        };
        self.depth -= 1;
        Ok(out)
    }

    fn primary(&mut self) -> Result<PathFormula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(PathFormula::state(StateFormula::True))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(PathFormula::state(StateFormula::Atom(s)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(s) if s == "P" || s == "R" => {
                let q = self.query(false)?;
                Ok(PathFormula::state(StateFormula::Query(q)))
            }
            Tok::LBrack => {
                self.bump();
                let intervention = self.ilist()?;
                self.expect(Tok::RBrack, "']'")?;
                let offset = self.offset_spec()?;
                let query = self.query(false)?;
                Ok(PathFormula::state(StateFormula::Cf { intervention, offset, query }))
            }
            Tok::Ident(s) if s == "D" => {
                self.bump();
                self.expect(Tok::LBrack, "'['")?;
                let treated = self.delta_side()?;
                self.expect(Tok::Comma, "','")?;
                let control = self.delta_side()?;
                self.expect(Tok::RBrack, "']'")?;
                let offset = self.offset_spec()?;
                let query = self.query(true)?;
                Ok(PathFormula::state(StateFormula::Delta { treated, control, offset, query }))
            }
            _ => self.fail(PRIMARY),
        }
    }

    /// '@' int '.'
    fn offset_spec(&mut self) -> Result<i64, ParseError> {
        self.expect(Tok::At, "'@'")?;
        let at = self.offset();
        let offset = match self.bump() {
            Tok::Num(n) => n
                .parse::<i64>()
                .map_err(|_| ParseError::new(at, format!("offset must be an integer, got {n}")))?,
            t => return Err(ParseError::expected(at, &["integer offset"], &t)),
        };
        self.expect(Tok::Dot, "'.'")?;
        Ok(offset)
    }

    /// 'empty' | item { ',' item }
    fn ilist(&mut self) -> Result<Intervention, ParseError> {
        if self.at_ident("empty") {
            self.bump();
            return Ok(Intervention::empty());
        }
        let mut names = vec![self.replacement()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            names.push(self.replacement()?);
        }
        Ok(Intervention::new(names))
    }

    /// One side of `D[.., ..]`: `empty`, a single replacement, or a
    /// bracketed list.
    fn delta_side(&mut self) -> Result<Intervention, ParseError> {
        if *self.peek() == Tok::LBrack {
            self.bump();
            let out = self.ilist()?;
            self.expect(Tok::RBrack, "']'")?;
            return Ok(out);
        }
        if self.at_ident("empty") {
            self.bump();
            return Ok(Intervention::empty());
        }
        Ok(Intervention::new(vec![self.replacement()?]))
    }

    /// 'pi' '<-' ident
    fn replacement(&mut self) -> Result<String, ParseError> {
        if !self.at_ident("pi") {
            return self.fail(&["'pi'", "'empty'"]);
        }
        self.bump();
        self.expect(Tok::Assign, "'<-'")?;
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => self.fail(&["policy name"]),
        }
    }

    /// 'P' bound '[' expr ']' | 'R' bound '[' 'C' interval ']'
    fn query(&mut self, difference: bool) -> Result<Query, ParseError> {
        let reward = if self.at_ident("P") {
            false
        } else if self.at_ident("R") {
            true
        } else {
            return self.fail(&["'P'", "'R'"]);
        };
        self.bump();
        let at = self.offset();
        let bound = self.bound()?;
        if let Bound::Cmp(_, p) = bound {
            let (lo, hi) = if difference { (-1.0, 1.0) } else { (0.0, 1.0) };
            if !reward && !(lo..=hi).contains(&p) {
                return Err(ParseError::new(at, format!("probability threshold {p} outside [{lo}, {hi}]")));
            }
        }
        self.expect(Tok::LBrack, "'['")?;
        let q = if reward {
            self.expect_ident("C")?;
            let interval = self.interval()?;
            Query::Reward { bound, interval }
        } else {
            Query::Prob { bound, path: Box::new(self.expr()?) }
        };
        self.expect(Tok::RBrack, "']'")?;
        Ok(q)
    }

    fn bound(&mut self) -> Result<Bound, ParseError> {
        match self.peek().clone() {
            Tok::QueryMark => {
                self.bump();
                Ok(Bound::Query)
            }
            Tok::Cmp(c) => {
                self.bump();
                let at = self.offset();
                match self.bump() {
                    Tok::Num(n) => match n.parse::<f64>() {
                        Ok(v) if v.is_finite() => Ok(Bound::Cmp(c, v)),
                        _ => Err(ParseError::new(at, format!("invalid threshold {n}"))),
                    },
                    t => Err(ParseError::expected(at, &["threshold"], &t)),
                }
            }
            _ => self.fail(&["'<'", "'<='", "'>'", "'>='", "'=?'"]),
        }
    }

    /// '[' nat ',' nat ']' with lower <= upper
    fn interval(&mut self) -> Result<Interval, ParseError> {
        let start = self.offset();
        self.expect(Tok::LBrack, "'['")?;
        let lo = self.nat()?;
        self.expect(Tok::Comma, "','")?;
        let hi = self.nat()?;
        self.expect(Tok::RBrack, "']'")?;
        Interval::new(lo, hi).ok_or_else(|| {
            ParseError::new(start, format!("interval lower bound {lo} exceeds upper bound {hi}"))
        })
    }

    fn nat(&mut self) -> Result<u32, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(n) => n
                .parse::<u32>()
                .map_err(|_| ParseError::new(at, format!("expected a natural number, got {n}"))),
            t => Err(ParseError::expected(at, &["natural number"], &t)),
        }
    }
}

fn parse_expr(text: &str) -> Result<(usize, PathFormula), ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let start = p.offset();
    let f = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.fail(&["end of input", "'&'", "'|'", "'->'", "'U'"]);
    }
    Ok((start, f))
}

/// Parses a state formula. Temporal operators must sit inside `P[...]`.
pub fn parse_formula(text: &str) -> Result<StateFormula, ParseError> {
    let (start, f) = parse_expr(text)?;
    f.into_state()
        .map_err(|_| ParseError::new(start, "temporal operator outside of P[...]"))
}

/// Parses a path formula, as found between the brackets of `P[...]`.
pub fn parse_path_formula(text: &str) -> Result<PathFormula, ParseError> {
    parse_expr(text).map(|(_, f)| f)
}
