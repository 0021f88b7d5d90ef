//! Lagrangian expressions: tree model, parser, evaluator and the `.lag`
//! file format.
//!
//! Variables are `s`, `u1..un`, `p1..pn` (first derivatives) and `q1..qn`
//! (second derivatives). For planar curves `u1 = x` and `u2 = y`.

mod eval;
mod expr;
mod lagfile;
mod lagrangian;
mod parser;

pub use eval::{eval, partial, partial_generic, taylor_eval, value_and_partials, Bindings, EvalError};
pub use expr::{Expr, Func, Var};
pub use lagfile::{read_lag, read_lag_with, write_lag, LagDocument};
pub use lagrangian::{Constraint, LagrangianDef, Point, UNIT_VECTOR_TOL};
pub use parser::{is_reserved, parse_expr, ParseDiagnostic, ParseError, Scope};
