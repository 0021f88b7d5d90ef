//! Pointwise invariance conditions evaluated at a single jet. Every
//! function returns a scale-normalised residual.

use serde::Serialize;

use crate::dsl::{eval, partial_generic, value_and_partials, Bindings, LagrangianDef, Point, Var};
use crate::error::Error;
use crate::jet::{Scalar, Taylor};
use crate::variational::CurveJet;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn bindings(def: &LagrangianDef, jet: &CurveJet) -> Result<Bindings<f64>, Error> {
    def.check_dims("u", jet.n())?;
    def.bindings(&jet.point())
}

/// `|L_s| / max(1, |L|)`.
pub fn s_dependence(def: &LagrangianDef, jet: &CurveJet) -> Result<f64, Error> {
    let b = bindings(def, jet)?;
    let (value, g) = value_and_partials(&def.body, &b, &[Var::S])?;
    Ok(g[0].abs() / value.abs().max(1.0))
}

/// `|L(u, lambda p) - lambda L(u, p)| / |lambda L|`, with a tiny floor
/// for vanishing values.
pub fn homogeneity_defect(def: &LagrangianDef, jet: &CurveJet, lambda: f64) -> Result<f64, Error> {
    let value = def.eval(&jet.point())?;
    let scaled = Point {
        p: jet.du.iter().map(|x| lambda * x).collect(),
        ..jet.point()
    };
    let stretched = def.eval(&scaled)?;
    Ok((stretched - lambda * value).abs() / (lambda * value).abs().max(1e-300))
}

/// `|p . L_p - L| / max(1, |L|, |p . L_p|)`.
pub fn euler_identity_defect(def: &LagrangianDef, jet: &CurveJet) -> Result<f64, Error> {
    let n = def.n;
    let b = bindings(def, jet)?;
    let dirs: Vec<Var> = (0..n).map(Var::P).collect();
    let (value, lp) = value_and_partials(&def.body, &b, &dirs)?;
    let pl = dot(&jet.du, &lp);
    Ok((pl - value).abs() / [1.0, value.abs(), pl.abs()].into_iter().fold(0.0, f64::max))
}

/// Residuals of the two second-order invariance conditions
/// `u' . L_q = 0` and `u' . (L_p - D_s L_q) + u'' . L_q - L = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondOrderResiduals {
    pub para2a: f64,
    pub para2b: f64,
    /// `max(1, |L|, |L_p|, |L_q|, |D_s L_q|)`
    pub scale: f64,
}

impl SecondOrderResiduals {
    pub fn scaled_a(&self) -> f64 {
        self.para2a.abs() / self.scale
    }

    pub fn scaled_b(&self) -> f64 {
        self.para2b.abs() / self.scale
    }
}

pub fn second_order_residuals(def: &LagrangianDef, jet: &CurveJet) -> Result<SecondOrderResiduals, Error> {
    let n = def.n;
    def.check_dims("u", jet.n())?;
    let series = |a: f64, b: f64| Taylor::new(&[a, b]).expect("order 1");
    let b = Bindings::new(
        Some(series(jet.s, 1.0)),
        (0..n).map(|i| series(jet.u[i], jet.du[i])).collect(),
        (0..n).map(|i| series(jet.du[i], jet.d2u[i])).collect(),
        (0..n).map(|i| series(jet.d2u[i], jet.d3u[i])).collect(),
    );
    let dirs: Vec<Var> = (0..n).map(Var::P).chain((0..n).map(Var::Q)).collect();
    let (value, g) = value_and_partials(&def.body, &b, &dirs)?;
    let lp: Vec<f64> = g[..n].iter().map(|t| t.coeff(0)).collect();
    let lq: Vec<f64> = g[n..].iter().map(|t| t.coeff(0)).collect();
    let dlq: Vec<f64> = g[n..].iter().map(|t| t.coeff(1)).collect();
    let l = value.coeff(0);
    let a = dot(&jet.du, &lq);
    let inner: Vec<f64> = lp.iter().zip(&dlq).map(|(x, y)| x - y).collect();
    let bres = dot(&jet.du, &inner) + dot(&jet.d2u, &lq) - l;
    let scale = [l.abs(), norm_inf(&lp), norm_inf(&lq), norm_inf(&dlq)]
        .into_iter()
        .fold(1.0, f64::max);
    Ok(SecondOrderResiduals {
        para2a: a,
        para2b: bres,
        scale,
    })
}

/// `max_j |d(p . L_q)/dq_j|`, scaled by `max(1, |L|, |p| |L_q|)`.
///
/// Each `q_j` is bound as a first-order series `q_j + h`; the gradient is
/// the `h` coefficient of `p . L_q`.
pub fn structure_defect(def: &LagrangianDef, jet: &CurveJet) -> Result<f64, Error> {
    let n = def.n;
    let base = bindings(def, jet)?;
    let lifted = base.map(|x| Taylor::constant(x, 1));
    let mut worst = 0.0f64;
    let mut lq_norm = 0.0f64;
    for j in 0..n {
        let mut b = lifted.clone();
        b.q[j] = Taylor::variable(jet.d2u[j], 1);
        let mut acc = Taylor::constant(0.0, 1);
        for i in 0..n {
            let lqi = partial_generic(&def.body, &b, Var::Q(i))?;
            lq_norm = lq_norm.max(lqi.coeff(0).abs());
            acc = acc + lqi.scale(jet.du[i]);
        }
        worst = worst.max(acc.coeff(1).abs());
    }
    let value: f64 = eval(&def.body, &base)?;
    let scale = [1.0, value.abs(), jet.speed() * lq_norm]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst / scale)
}
