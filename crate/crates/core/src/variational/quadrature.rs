//! Adaptive composite Gauss-Legendre quadrature.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::Error;

/// Relative tolerance of every functional evaluation.
pub const QUAD_RTOL: f64 = 1e-10;
pub const MAX_DEPTH: usize = 20;
const DEGREE: usize = 10;
const INITIAL_PANELS: usize = 8;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(DEGREE).expect("degree >= 2"))
        .as_node_weight_pairs()
}

/// `(int f, int |f|)` over one panel.
fn panel<F>(f: &F, a: f64, b: f64) -> Result<(f64, f64), Error>
where
    F: Fn(f64) -> Result<f64, Error>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    let mut abs = 0.0;
    for &(x, w) in rule() {
        let v = f(mid + half * x)?;
        if !v.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                a,
                b,
                estimate: f64::INFINITY,
            });
        }
        sum += w * v;
        abs += w * v.abs();
    }
    Ok((half * sum, half * abs))
}

/// Integrates `f` over `[a, b]` to relative tolerance `rtol`.
///
/// Each panel is compared with the sum over its two halves and bisected
/// until the difference is within its share of `rtol * int |f|`, to depth
/// [`MAX_DEPTH`].
pub fn integrate<F>(f: F, a: f64, b: f64, rtol: f64) -> Result<f64, Error>
where
    F: Fn(f64) -> Result<f64, Error>,
{
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut stack = Vec::new();
    let mut abs_total = 0.0;
    for i in 0..INITIAL_PANELS {
        let (x0, x1) = (a + i as f64 * width, a + (i + 1) as f64 * width);
        let (v, m) = panel(&f, x0, x1)?;
        abs_total += m;
        stack.push((x0, x1, v, 0usize));
    }
    // absolute floor for integrands that vanish identically
    let budget = rtol * abs_total.max(f64::MIN_POSITIVE) + 1e-300;
    let mut total = 0.0;
    let mut worst: Option<(f64, f64, f64)> = None;
    while let Some((x0, x1, whole, depth)) = stack.pop() {
        let mid = 0.5 * (x0 + x1);
        let (left, _) = panel(&f, x0, mid)?;
        let (right, _) = panel(&f, mid, x1)?;
        let err = (left + right - whole).abs();
        let share = budget * (x1 - x0) / (b - a);
        if err <= share || err <= 1e-15 * (left.abs() + right.abs()) {
            total += left + right;
        } else if depth >= MAX_DEPTH {
            total += left + right;
            if worst.is_none_or(|w| err > w.2) {
                worst = Some((x0, x1, err));
            }
        } else {
            stack.push((mid, x1, right, depth + 1));
            stack.push((x0, mid, left, depth + 1));
        }
    }
    match worst {
        Some((a, b, estimate)) => Err(Error::QuadratureNonConvergence { a, b, estimate }),
        None => Ok(total),
    }
}
