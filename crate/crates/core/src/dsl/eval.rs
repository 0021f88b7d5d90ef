use thiserror::Error;

use super::expr::{Expr, Func, Var};
use crate::jet::{Dual, JetError, Scalar, Taylor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable {0} is not bound")]
    UnboundVariable(Var),
    #[error("domain error in `{expr}`: {source}")]
    Domain {
        /// The sub-expression whose evaluation left its domain.
        expr: String,
        source: JetError,
    },
}

/// Values for the variables of an expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Bindings<S> {
    pub s: Option<S>,
    pub u: Vec<S>,
    pub p: Vec<S>,
    pub q: Vec<S>,
}

impl<S: Scalar> Bindings<S> {
    pub fn new(s: Option<S>, u: Vec<S>, p: Vec<S>, q: Vec<S>) -> Self {
        Bindings { s, u, p, q }
    }

    pub fn get(&self, v: Var) -> Option<S> {
        match v {
            Var::S => self.s,
            Var::U(i) => self.u.get(i).copied(),
            Var::P(i) => self.p.get(i).copied(),
            Var::Q(i) => self.q.get(i).copied(),
            Var::R | Var::Theta(_) | Var::W(_) => None,
        }
    }

    fn slot_mut(&mut self, v: Var) -> Option<&mut S> {
        match v {
            Var::S => self.s.as_mut(),
            Var::U(i) => self.u.get_mut(i),
            Var::P(i) => self.p.get_mut(i),
            Var::Q(i) => self.q.get_mut(i),
            Var::R | Var::Theta(_) | Var::W(_) => None,
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Bindings<T> {
        Bindings {
            s: self.s.map(&f),
            u: self.u.iter().map(|&x| f(x)).collect(),
            p: self.p.iter().map(|&x| f(x)).collect(),
            q: self.q.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Lifts to dual numbers with unit perturbation on `direction` only.
    pub fn seeded(&self, direction: Var) -> Result<Bindings<Dual<S>>, EvalError> {
        let mut out = self.map(Dual::constant);
        let slot = out.slot_mut(direction).ok_or(EvalError::UnboundVariable(direction))?;
        slot.perturbation = S::from_f64(1.0);
        Ok(out)
    }

    /// Every bound variable, in `s, u, p, q` order.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        if self.s.is_some() {
            out.push(Var::S);
        }
        out.extend((0..self.u.len()).map(Var::U));
        out.extend((0..self.p.len()).map(Var::P));
        out.extend((0..self.q.len()).map(Var::Q));
        out
    }
}

fn domain(e: &Expr) -> impl FnOnce(JetError) -> EvalError + '_ {
    move |source| EvalError::Domain {
        expr: e.to_string(),
        source,
    }
}

/// Evaluates an expression over any [`Scalar`].
pub fn eval<S: Scalar>(e: &Expr, b: &Bindings<S>) -> Result<S, EvalError> {
    Ok(match e {
        Expr::Num(v) => S::from_f64(*v),
        Expr::Pi => S::from_f64(std::f64::consts::PI),
        Expr::Param(_, v) => S::from_f64(*v),
        Expr::Var(v) => b.get(*v).ok_or(EvalError::UnboundVariable(*v))?,
        Expr::Neg(a) => -eval(a, b)?,
        Expr::Add(x, y) => eval(x, b)? + eval(y, b)?,
        Expr::Sub(x, y) => eval(x, b)? - eval(y, b)?,
        Expr::Mul(x, y) => eval(x, b)? * eval(y, b)?,
        Expr::Div(x, y) => {
            let num = eval(x, b)?;
            let den = eval(y, b)?;
            num.try_div(den).map_err(domain(e))?
        }
        Expr::PowI(x, k) => eval(x, b)?.powi(*k).map_err(domain(e))?,
        Expr::Call(f, args) => {
            let a = eval(&args[0], b)?;
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan().map_err(domain(e))?,
                Func::Sinh => a.sinh(),
                Func::Cosh => a.cosh(),
                Func::Sqrt => a.sqrt().map_err(domain(e))?,
                Func::Exp => a.exp(),
                Func::Log => a.ln().map_err(domain(e))?,
                Func::Atan => a.atan(),
                Func::Atan2 => {
                    let x = eval(&args[1], b)?;
                    a.atan2(x).map_err(domain(e))?
                }
            }
        }
    })
}

/// Taylor expansion of `expr` along the bound series.
pub fn taylor_eval(expr: &Expr, bindings: &Bindings<Taylor>) -> Result<Taylor, EvalError> {
    eval(expr, bindings)
}

/// `∂expr/∂direction` at the bindings, itself a Taylor series in `s`.
pub fn partial(expr: &Expr, bindings: &Bindings<Taylor>, direction: Var) -> Result<Taylor, EvalError> {
    partial_generic(expr, bindings, direction)
}

pub fn partial_generic<S: Scalar>(expr: &Expr, bindings: &Bindings<S>, direction: Var) -> Result<S, EvalError> {
    let seeded = bindings.seeded(direction)?;
    Ok(eval(expr, &seeded)?.perturbation)
}

/// Value and gradient with respect to `directions`, one dual pass each.
pub fn value_and_partials<S: Scalar>(
    expr: &Expr,
    bindings: &Bindings<S>,
    directions: &[Var],
) -> Result<(S, Vec<S>), EvalError> {
    let mut value = None;
    let mut grads = Vec::with_capacity(directions.len());
    for &d in directions {
        let r = eval(expr, &bindings.seeded(d)?)?;
        value.get_or_insert(r.base);
        grads.push(r.perturbation);
    }
    let value = match value {
        Some(v) => v,
        None => eval(expr, bindings)?,
    };
    Ok((value, grads))
}
