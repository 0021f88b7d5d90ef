use std::fmt;

use serde::{Deserialize, Serialize};

/// A variable of a Lagrangian expression. Indices are zero-based; the text
/// form is one-based (`u1` is `U(0)`).
///
/// `R`, `Theta` and `W` (text `r`, `t<k>`, `w<k>`) are only accepted by the
/// representation builders, which substitute them by expressions in `p`
/// and `q` before a Lagrangian is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    S,
    U(usize),
    P(usize),
    Q(usize),
    R,
    Theta(usize),
    W(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::S => write!(f, "s"),
            Var::U(i) => write!(f, "u{}", i + 1),
            Var::P(i) => write!(f, "p{}", i + 1),
            Var::Q(i) => write!(f, "q{}", i + 1),
            Var::R => write!(f, "r"),
            Var::Theta(i) => write!(f, "t{}", i + 1),
            Var::W(i) => write!(f, "w{}", i + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Sqrt,
    Exp,
    Log,
    Atan,
    Atan2,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
        Func::Exp,
        Func::Log,
        Func::Atan,
        Func::Atan2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Atan => "atan",
            Func::Atan2 => "atan2",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }
}

/// Expression tree over `(s, u, p, q)`, literals, `pi` and bound parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    /// Named parameter with its value bound at parse time.
    Param(String, f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power, evaluated by repeated multiplication.
    PowI(Box<Expr>, i32),
    Call(Func, Vec<Expr>),
}

// Smart constructors used when building expressions programmatically. They
// fold the trivial identities (x+0, 1*x, ...) so generated Lagrangians stay
// readable; the parser never calls them.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(v: f64) -> Expr {
        if v < 0.0 {
            Expr::Neg(Box::new(Expr::Num(-v)))
        } else {
            Expr::Num(v)
        }
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Neg(inner) => match **inner {
                Expr::Num(v) => Some(-v),
                _ => None,
            },
            _ => None,
        }
    }

    fn is_num(&self, v: f64) -> bool {
        self.as_num() == Some(v)
    }

    pub fn neg(self) -> Expr {
        if let Some(v) = self.as_num() {
            return Expr::num(-v);
        }
        match self {
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn add(self, rhs: Expr) -> Expr {
        match (self.as_num(), rhs.as_num()) {
            (Some(a), Some(b)) => Expr::num(a + b),
            (Some(0.0), _) => rhs,
            (_, Some(0.0)) => self,
            (_, Some(b)) if b < 0.0 => Expr::Sub(Box::new(self), Box::new(Expr::Num(-b))),
            _ => match rhs {
                Expr::Neg(inner) => Expr::Sub(Box::new(self), inner),
                rhs => Expr::Add(Box::new(self), Box::new(rhs)),
            },
        }
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        match (self.as_num(), rhs.as_num()) {
            (Some(a), Some(b)) => Expr::num(a - b),
            (Some(0.0), _) => rhs.neg(),
            (_, Some(0.0)) => self,
            _ => match rhs {
                Expr::Neg(inner) => Expr::Add(Box::new(self), inner),
                rhs => Expr::Sub(Box::new(self), Box::new(rhs)),
            },
        }
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        match (self.as_num(), rhs.as_num()) {
            (Some(a), Some(b)) => Expr::num(a * b),
            (Some(0.0), _) => Expr::Num(0.0),
            (_, Some(0.0)) => Expr::Num(0.0),
            (Some(1.0), _) => rhs,
            (_, Some(1.0)) => self,
            (Some(-1.0), _) => rhs.neg(),
            (_, Some(-1.0)) => self.neg(),
            _ => Expr::Mul(Box::new(self), Box::new(rhs)),
        }
    }

    pub fn div(self, rhs: Expr) -> Expr {
        if self.is_num(0.0) {
            return Expr::Num(0.0);
        }
        if rhs.is_num(1.0) {
            return self;
        }
        Expr::Div(Box::new(self), Box::new(rhs))
    }

    pub fn powi(self, k: i32) -> Expr {
        match k {
            0 => Expr::Num(1.0),
            1 => self,
            _ if self.is_num(0.0) && k > 0 => Expr::Num(0.0),
            _ => Expr::PowI(Box::new(self), k),
        }
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Expr {
        debug_assert_eq!(args.len(), f.arity());
        Expr::Call(f, args)
    }

    pub fn call1(f: Func, arg: Expr) -> Expr {
        Expr::call(f, vec![arg])
    }

    pub fn is_zero_literal(&self) -> bool {
        self.is_num(0.0)
    }

    /// Sum of the given terms, `0` when empty.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::Num(0.0), Expr::add)
    }

    /// Visits every variable occurrence.
    pub fn for_each_var(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Var(v) => f(*v),
            Expr::Num(_) | Expr::Pi | Expr::Param(..) => {}
            Expr::Neg(a) | Expr::PowI(a, _) => a.for_each_var(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
        }
    }

    pub fn mentions(&self, pred: impl Fn(Var) -> bool) -> bool {
        let mut hit = false;
        self.for_each_var(&mut |v| hit |= pred(v));
        hit
    }

    /// Replaces variables by expressions; `None` keeps the variable.
    pub fn substitute(&self, f: &impl Fn(Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Var(v) => f(*v).unwrap_or(Expr::Var(*v)),
            Expr::Num(_) | Expr::Pi | Expr::Param(..) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(f))),
            Expr::PowI(a, k) => Expr::PowI(Box::new(a.substitute(f)), *k),
            Expr::Add(a, b) => Expr::Add(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Call(func, args) => Expr::Call(*func, args.iter().map(|a| a.substitute(f)).collect()),
        }
    }

    /// Collects parameter bindings that appear in the tree.
    pub fn params(&self, out: &mut std::collections::BTreeMap<String, f64>) {
        match self {
            Expr::Param(name, v) => {
                out.insert(name.clone(), *v);
            }
            Expr::Num(_) | Expr::Pi | Expr::Var(_) => {}
            Expr::Neg(a) | Expr::PowI(a, _) => a.params(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.params(out);
                b.params(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.params(out)),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Pi | Expr::Param(..) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::PowI(a, _) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            Expr::Call(_, args) => 1 + args.iter().map(Expr::node_count).sum::<usize>(),
        }
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::Var(v)
    }
}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => PREC_ADD,
        Expr::Mul(..) | Expr::Div(..) => PREC_MUL,
        Expr::Neg(_) => PREC_NEG,
        Expr::Num(v) if *v < 0.0 => PREC_NEG,
        Expr::PowI(..) => PREC_POW,
        _ => PREC_ATOM,
    }
}

fn write_prec(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "(")?;
        write_expr(e, f)?;
        write!(f, ")")
    } else {
        write_expr(e, f)
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Num(v) => write!(f, "{v}"),
        Expr::Pi => write!(f, "pi"),
        Expr::Param(name, _) => write!(f, "{name}"),
        Expr::Var(v) => write!(f, "{v}"),
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_prec(a, PREC_NEG, f)
        }
        Expr::Add(a, b) => {
            write_prec(a, PREC_ADD, f)?;
            write!(f, " + ")?;
            write_prec(b, PREC_MUL, f)
        }
        Expr::Sub(a, b) => {
            write_prec(a, PREC_ADD, f)?;
            write!(f, " - ")?;
            write_prec(b, PREC_MUL, f)
        }
        Expr::Mul(a, b) => {
            write_prec(a, PREC_MUL, f)?;
            write!(f, "*")?;
            write_prec(b, PREC_NEG, f)
        }
        Expr::Div(a, b) => {
            write_prec(a, PREC_MUL, f)?;
            write!(f, "/")?;
            write_prec(b, PREC_NEG, f)
        }
        Expr::PowI(a, k) => {
            write_prec(a, PREC_ATOM, f)?;
            write!(f, "^{k}")
        }
        Expr::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_expr(a, f)?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: Var) -> Expr {
        Expr::Var(x)
    }

    #[test]
    fn printing_respects_precedence() {
        let e = v(Var::P(0)).powi(2).add(v(Var::P(1)).powi(2));
        assert_eq!(e.to_string(), "p1^2 + p2^2");
        let e = Expr::Neg(Box::new(Expr::Mul(Box::new(v(Var::U(0))), Box::new(v(Var::U(1))))));
        assert_eq!(e.to_string(), "-(u1*u2)");
        let e = Expr::PowI(Box::new(Expr::Neg(Box::new(v(Var::S)))), 2);
        assert_eq!(e.to_string(), "(-s)^2");
        let e = Expr::Sub(
            Box::new(v(Var::S)),
            Box::new(Expr::Sub(Box::new(v(Var::U(0))), Box::new(v(Var::U(1))))),
        );
        assert_eq!(e.to_string(), "s - (u1 - u2)");
    }

    #[test]
    fn smart_constructors_fold() {
        let x = v(Var::U(0));
        assert_eq!(x.clone().mul(Expr::num(1.0)), x);
        assert_eq!(x.clone().add(Expr::num(0.0)), x);
        assert!(x.clone().mul(Expr::num(0.0)).is_zero_literal());
        assert_eq!(Expr::num(-2.0).to_string(), "-2");
        assert_eq!(x.clone().add(Expr::num(-2.0)).to_string(), "u1 - 2");
        assert_eq!(x.clone().neg().neg(), x);
    }
}
