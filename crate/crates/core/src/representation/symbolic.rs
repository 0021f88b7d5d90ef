//! Symbolic partial and total derivatives of expression trees.

use crate::dsl::{Expr, Func, Var};

fn two() -> Expr {
    Expr::num(2.0)
}

/// `d e / d v`. Results are folded with the trivial identities only.
pub fn diff(e: &Expr, v: Var) -> Expr {
    match e {
        Expr::Num(_) | Expr::Pi | Expr::Param(..) => Expr::num(0.0),
        Expr::Var(x) => Expr::num(if *x == v { 1.0 } else { 0.0 }),
        Expr::Neg(a) => diff(a, v).neg(),
        Expr::Add(a, b) => diff(a, v).add(diff(b, v)),
        Expr::Sub(a, b) => diff(a, v).sub(diff(b, v)),
        Expr::Mul(a, b) => {
            let left = diff(a, v).mul((**b).clone());
            left.add((**a).clone().mul(diff(b, v)))
        }
        Expr::Div(a, b) => {
            let (da, db) = (diff(a, v), diff(b, v));
            let first = da.div((**b).clone());
            if db.is_zero_literal() {
                return first;
            }
            first.sub((**a).clone().mul(db).div((**b).clone().powi(2)))
        }
        Expr::PowI(a, k) => {
            let da = diff(a, v);
            if da.is_zero_literal() {
                return da;
            }
            Expr::num(*k as f64).mul((**a).clone().powi(k - 1)).mul(da)
        }
        Expr::Call(f, args) => {
            let a = &args[0];
            if *f == Func::Atan2 {
                let (y, x) = (a, &args[1]);
                let (dy, dx) = (diff(y, v), diff(x, v));
                if dy.is_zero_literal() && dx.is_zero_literal() {
                    return dy;
                }
                let num = x.clone().mul(dy).sub(y.clone().mul(dx));
                return num.div(x.clone().powi(2).add(y.clone().powi(2)));
            }
            let da = diff(a, v);
            if da.is_zero_literal() {
                return da;
            }
            let outer = match f {
                Func::Sin => Expr::call1(Func::Cos, a.clone()),
                Func::Cos => Expr::call1(Func::Sin, a.clone()).neg(),
                Func::Tan => Expr::num(1.0).add(Expr::call1(Func::Tan, a.clone()).powi(2)),
                Func::Sinh => Expr::call1(Func::Cosh, a.clone()),
                Func::Cosh => Expr::call1(Func::Sinh, a.clone()),
                Func::Sqrt => return da.div(two().mul(e.clone())),
                Func::Exp => e.clone(),
                Func::Log => return da.div(a.clone()),
                Func::Atan => return da.div(Expr::num(1.0).add(a.clone().powi(2))),
                Func::Atan2 => unreachable!(),
            };
            outer.mul(da)
        }
    }
}

/// Total derivative along a curve of dimension `n`:
/// `D_s = d/ds + p . d/du + q . d/dp`.
///
/// `e` may depend on `s`, `u` and `p`; a `q` dependence would need the
/// third derivative and is rejected by the caller.
pub fn total_derivative(e: &Expr, n: usize) -> Expr {
    let mut terms = vec![diff(e, Var::S)];
    for i in 0..n {
        terms.push(diff(e, Var::U(i)).mul(Expr::var(Var::P(i))));
        terms.push(diff(e, Var::P(i)).mul(Expr::var(Var::Q(i))));
    }
    Expr::sum(terms)
}
