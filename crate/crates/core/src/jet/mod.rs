//! Exact differentiation: truncated Taylor arithmetic in the curve parameter,
//! composed with dual numbers for partial derivatives.

mod dual;
mod scalar;
mod taylor;

pub use dual::{Dual, DualDirection};
pub use scalar::Scalar;
pub use taylor::{Taylor, TaylorScalar, MAX_ORDER};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("division by a value with zero constant term")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("square root is not differentiable at zero")]
    SqrtAtZero,
    #[error("logarithm of non-positive value {0}")]
    LogOfNonPositive(f64),
    #[error("atan2 evaluated on its branch cut with nonzero motion")]
    Atan2BranchCut,
    #[error("taylor order {0} is not supported (max {max})", max = MAX_ORDER)]
    UnsupportedOrder(usize),
}
