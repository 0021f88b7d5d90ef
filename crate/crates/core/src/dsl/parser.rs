//! Lexer and precedence-climbing parser for Lagrangian expressions.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^` (right
//! associative). `a^k` with an integer literal `k` becomes an integer power;
//! any other exponent is rewritten as `exp(b*log(a))`.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::expr::{Expr, Func, Var};

/// Syntax error with the byte offset where parsing stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParseDiagnostic {
    pub message: String,
    pub offset: usize,
    pub expected: Vec<String>,
}

impl std::fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} at byte {}", self.message, self.offset)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error: {0}")]
    Syntax(ParseDiagnostic),
    #[error("variable {name} at byte {offset} is out of range for dimension {n}")]
    IndexOutOfRange { name: String, offset: usize, n: usize },
    #[error("unknown identifier {name:?} at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax(d) => d.offset,
            ParseError::IndexOutOfRange { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

/// Which identifiers an expression may use.
#[derive(Debug, Clone)]
pub struct Scope {
    pub n: usize,
    pub s: bool,
    pub u: bool,
    pub p: bool,
    pub q: bool,
    /// `r`, `t<k>` and `w<k>` of the representation builders.
    pub r: bool,
    pub theta: bool,
    pub w: bool,
    pub params: BTreeMap<String, f64>,
}

impl Scope {
    /// Identifiers of a Lagrangian body: `s, u<k>, p<k>, q<k>` and parameters.
    pub fn lagrangian(n: usize, params: &BTreeMap<String, f64>) -> Scope {
        Scope {
            n,
            s: true,
            u: true,
            p: true,
            q: true,
            r: false,
            theta: false,
            w: false,
            params: params.clone(),
        }
    }

    fn resolve(&self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        if name == "pi" {
            return Ok(Expr::Pi);
        }
        if let Some(v) = self.params.get(name) {
            return Ok(Expr::Param(name.to_string(), *v));
        }
        if name == "s" && self.s {
            return Ok(Expr::Var(Var::S));
        }
        if name == "r" && self.r {
            return Ok(Expr::Var(Var::R));
        }
        let unknown = || ParseError::UnknownIdentifier {
            name: name.to_string(),
            offset,
        };
        let (head, digits) = name.split_at(1);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let (allowed, limit, make): (bool, usize, fn(usize) -> Var) = match head {
            "u" => (self.u, self.n, Var::U),
            "p" => (self.p, self.n, Var::P),
            "q" => (self.q, self.n, Var::Q),
            "t" => (self.theta, self.n.saturating_sub(1), Var::Theta),
            "w" => (self.w, self.n.saturating_sub(1), Var::W),
            _ => return Err(unknown()),
        };
        if !allowed {
            return Err(unknown());
        }
        let k: usize = digits.parse().map_err(|_| unknown())?;
        if k == 0 || k > limit {
            return Err(ParseError::IndexOutOfRange {
                name: name.to_string(),
                offset,
                n: self.n,
            });
        }
        Ok(Expr::Var(make(k - 1)))
    }
}

/// Reserved words that parameters may not shadow.
pub fn is_reserved(name: &str) -> bool {
    if matches!(name, "pi" | "s" | "r" | "L") || Func::from_name(name).is_some() {
        return true;
    }
    let (head, digits) = name.split_at(name.len().min(1));
    matches!(head, "u" | "p" | "q" | "t" | "w") && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn syntax(message: impl Into<String>, offset: usize, expected: &[&str]) -> ParseError {
    ParseError::Syntax(ParseDiagnostic {
        message: message.into(),
        offset,
        expected: expected.iter().map(|s| s.to_string()).collect(),
    })
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| syntax(format!("malformed number {text:?}"), start, &["number"]))?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(syntax(
                    format!("unexpected character {ch:?}"),
                    start,
                    &["number", "identifier", "operator", "'('", "')'"],
                ));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

const OPERAND: &[&str] = &["number", "identifier", "'('", "'-'"];
const BP_ADD: u8 = 1;
const BP_MUL: u8 = 3;
const BP_NEG: u8 = 5;
const BP_POW_RIGHT: u8 = 6;
const BP_POW_LEFT: u8 = 7;

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    scope: &'a Scope,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                format!("unexpected {}", self.peek().describe()),
                self.offset(),
                &[what],
            ))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let (lbp, rbp) = match self.peek() {
                Tok::Plus | Tok::Minus => (BP_ADD, BP_ADD + 1),
                Tok::Star | Tok::Slash => (BP_MUL, BP_MUL + 1),
                Tok::Caret => (BP_POW_LEFT, BP_POW_RIGHT),
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            let (op, _) = self.bump();
            let rhs = self.expr(rbp)?;
            lhs = match op {
                Tok::Plus => Expr::Add(Box::new(lhs), Box::new(rhs)),
                Tok::Minus => Expr::Sub(Box::new(lhs), Box::new(rhs)),
                Tok::Star => Expr::Mul(Box::new(lhs), Box::new(rhs)),
                Tok::Slash => Expr::Div(Box::new(lhs), Box::new(rhs)),
                Tok::Caret => power(lhs, rhs),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Minus => Ok(Expr::Neg(Box::new(self.expr(BP_NEG)?))),
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.call(func, offset)
                } else {
                    self.scope.resolve(&name, offset)
                }
            }
            other => Err(syntax(format!("unexpected {}", other.describe()), offset, OPERAND)),
        }
    }

    fn call(&mut self, func: Func, offset: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let mut args = vec![self.expr(0)?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr(0)?);
        }
        if args.len() != func.arity() {
            return Err(syntax(
                format!("{} takes {} argument(s), got {}", func.name(), func.arity(), args.len()),
                offset,
                &[],
            ));
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(Expr::Call(func, args))
    }
}

fn power(base: Expr, exponent: Expr) -> Expr {
    if let Some(k) = exponent.as_num() {
        if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 {
            return Expr::PowI(Box::new(base), k as i32);
        }
    }
    Expr::Call(
        Func::Exp,
        vec![Expr::Mul(
            Box::new(exponent),
            Box::new(Expr::Call(Func::Log, vec![base])),
        )],
    )
}

/// Parses an expression under the given identifier scope.
pub fn parse_expr(src: &str, scope: &Scope) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, scope };
    let e = p.expr(0)?;
    if *p.peek() != Tok::Eof {
        return Err(syntax(
            format!("unexpected {}", p.peek().describe()),
            p.offset(),
            &["operator", "end of input"],
        ));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scope(n: usize) -> Scope {
        Scope::lagrangian(n, &BTreeMap::new())
    }

    #[test]
    fn precedence_of_power_over_sum() {
        let e = parse_expr("p1^2+p2^2", &scope(2)).unwrap();
        match e {
            Expr::Add(a, b) => {
                assert!(matches!(*a, Expr::PowI(_, 2)));
                assert!(matches!(*b, Expr::PowI(_, 2)));
            }
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse_expr("-u1^2", &scope(1)).unwrap();
        assert!(matches!(e, Expr::Neg(ref inner) if matches!(**inner, Expr::PowI(_, 2))));
        let e = parse_expr("-u1*u1", &scope(1)).unwrap();
        assert!(matches!(e, Expr::Mul(..)));
    }

    #[test]
    fn power_is_right_associative() {
        // s^(2^3): the exponent is not a literal, so it goes through exp/log
        let e = parse_expr("s^2^3", &scope(1)).unwrap();
        assert_eq!(e.to_string(), "exp(2^3*log(s))");
    }

    #[test]
    fn negative_and_fractional_exponents() {
        assert!(matches!(parse_expr("u1^-2", &scope(1)).unwrap(), Expr::PowI(_, -2)));
        assert!(matches!(
            parse_expr("u1^1.5", &scope(1)).unwrap(),
            Expr::Call(Func::Exp, _)
        ));
    }

    #[test]
    fn syntax_error_reports_offset() {
        match parse_expr("p1 + * u2", &scope(2)) {
            Err(ParseError::Syntax(d)) => {
                assert_eq!(d.offset, 5);
                assert!(d.expected.iter().any(|e| e == "identifier"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn index_and_identifier_errors() {
        assert!(matches!(
            parse_expr("u7", &scope(2)),
            Err(ParseError::IndexOutOfRange { offset: 0, .. })
        ));
        assert!(matches!(
            parse_expr("u0", &scope(2)),
            Err(ParseError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            parse_expr("1 + kappa", &scope(2)),
            Err(ParseError::UnknownIdentifier { offset: 4, .. })
        ));
        assert!(matches!(
            parse_expr("r", &scope(2)),
            Err(ParseError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn calls_and_arity() {
        assert!(parse_expr("atan2(p2, p1)", &scope(2)).is_ok());
        assert!(matches!(parse_expr("atan2(p2)", &scope(2)), Err(ParseError::Syntax(_))));
        assert!(matches!(parse_expr("sin u1", &scope(2)), Err(ParseError::Syntax(_))));
    }

    #[test]
    fn parameters_resolve_to_values() {
        let mut params = BTreeMap::new();
        params.insert("kappa".to_string(), 2.5);
        let e = parse_expr("kappa*u1", &Scope::lagrangian(1, &params)).unwrap();
        assert_eq!(e.to_string(), "kappa*u1");
    }

    #[test]
    fn reserved_names() {
        assert!(is_reserved("u3"));
        assert!(is_reserved("sqrt"));
        assert!(!is_reserved("kappa"));
        assert!(!is_reserved("u"));
    }

    #[test]
    fn trailing_garbage_and_empty_input() {
        assert!(matches!(parse_expr("u1 u2", &scope(2)), Err(ParseError::Syntax(d)) if d.offset == 3));
        assert!(matches!(parse_expr("", &scope(2)), Err(ParseError::Syntax(d)) if d.offset == 0));
        assert!(matches!(parse_expr("(u1", &scope(2)), Err(ParseError::Syntax(d)) if d.offset == 3));
    }
}
