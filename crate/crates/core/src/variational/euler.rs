//! The Euler-Lagrange operator `E = L_u - D_s L_p + D_ss L_q`.
//!
//! `s`, `u`, `p` and `q` are bound as Taylor series in the curve parameter,
//! the partials `L_u`, `L_p`, `L_q` are taken with dual numbers on top, and
//! the total derivatives are read off the coefficients: `D_s` is the first,
//! `D_ss` twice the second. No chain rule is assembled by hand.

use serde::Serialize;

use super::jet::{dot, norm_inf, CurveJet};
use crate::dsl::{value_and_partials, Bindings, LagrangianDef, Var};
use crate::error::Error;
use crate::jet::{Scalar, Taylor};

/// The pieces of the operator at one point, over any scalar type.
#[derive(Debug, Clone)]
pub struct ElTerms<S> {
    pub value: S,
    pub lu: Vec<S>,
    /// `D_s L_p`
    pub dlp: Vec<S>,
    /// `D_ss L_q`, zero for first-order Lagrangians.
    pub ddlq: Vec<S>,
}

impl<S: Scalar> ElTerms<S> {
    pub fn residual(&self) -> Vec<S> {
        self.lu
            .iter()
            .zip(&self.dlp)
            .zip(&self.ddlq)
            .map(|((&a, &b), &c)| a - b + c)
            .collect()
    }
}

/// Derivatives of a curve at one point, borrowed: `[u, u', u'', u''', u'''']`.
pub type JetSlices<'a, S> = [&'a [S]; 5];

/// Evaluates the operator terms. `jet[3]` and `jet[4]` are only read for
/// second-order Lagrangians.
pub fn el_terms<S: Scalar>(def: &LagrangianDef, s: S, jet: JetSlices<'_, S>) -> Result<ElTerms<S>, Error> {
    let n = def.n;
    let needed = if def.is_second_order() { 5 } else { 3 };
    for (k, v) in jet.iter().take(needed).enumerate() {
        def.check_dims(["u", "du", "d2u", "d3u", "d4u"][k], v.len())?;
    }
    let order = def.order as usize;
    let half = |x: S| x.scale(0.5);
    let series = |c: [S; 3]| Taylor::new(&c[..=order]).expect("order is 1 or 2");
    let one = S::from_f64(1.0);
    let zero = S::from_f64(0.0);
    let [u, du, d2u, d3u, d4u] = jet;
    let bind_u: Vec<_> = (0..n).map(|i| series([u[i], du[i], half(d2u[i])])).collect();
    let (bind_p, bind_q): (Vec<_>, Vec<_>) = if def.is_second_order() {
        (
            (0..n).map(|i| series([du[i], d2u[i], half(d3u[i])])).collect(),
            (0..n).map(|i| series([d2u[i], d3u[i], half(d4u[i])])).collect(),
        )
    } else {
        ((0..n).map(|i| series([du[i], d2u[i], zero])).collect(), Vec::new())
    };
    let bindings = Bindings::new(Some(series([s, one, zero])), bind_u, bind_p, bind_q);

    let mut dirs: Vec<Var> = (0..n).map(Var::U).chain((0..n).map(Var::P)).collect();
    if def.is_second_order() {
        dirs.extend((0..n).map(Var::Q));
    }
    let (value, grads) = value_and_partials(&def.body, &bindings, &dirs)?;
    let lu = grads[..n].iter().map(|g| g.coeff(0)).collect();
    let dlp = grads[n..2 * n].iter().map(|g| g.coeff(1)).collect();
    let ddlq = if def.is_second_order() {
        grads[2 * n..].iter().map(|g| g.coeff(2).scale(2.0)).collect()
    } else {
        vec![zero; n]
    };
    Ok(ElTerms {
        value: value.coeff(0),
        lu,
        dlp,
        ddlq,
    })
}

/// Euler-Lagrange residual at a jet with its tangential/normal split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElResult {
    pub residual: Vec<f64>,
    /// `u' . E`
    pub tangential: f64,
    /// `E - (u' . E / |u'|^2) u'`
    pub normal: Vec<f64>,
    /// `max(1, |L|, |L_u|, |D_s L_p|, |D_ss L_q|)` at the point.
    pub scale: f64,
    pub speed: f64,
}

impl ElResult {
    pub fn scaled_residual(&self) -> f64 {
        norm_inf(&self.residual) / self.scale
    }

    /// `|u' . E|` relative to the scale and to `max(1, |u'|)`.
    pub fn scaled_tangential(&self) -> f64 {
        self.tangential.abs() / (self.scale * self.speed.max(1.0))
    }

    pub fn scaled_normal(&self) -> f64 {
        norm_inf(&self.normal) / self.scale
    }
}

pub fn split(residual: Vec<f64>, du: &[f64], scale: f64) -> ElResult {
    let speed2 = dot(du, du);
    let tangential = dot(du, &residual);
    let normal = residual
        .iter()
        .zip(du)
        .map(|(e, p)| e - tangential / speed2 * p)
        .collect();
    ElResult {
        residual,
        tangential,
        normal,
        scale,
        speed: speed2.sqrt(),
    }
}

pub fn euler_lagrange(def: &LagrangianDef, jet: &CurveJet) -> Result<ElResult, Error> {
    jet.check_shape()?;
    def.check_dims("u", jet.n())?;
    jet.check_regular()?;
    let t = el_terms(def, jet.s, [&jet.u, &jet.du, &jet.d2u, &jet.d3u, &jet.d4u])?;
    let scale = [t.value.abs(), norm_inf(&t.lu), norm_inf(&t.dlp), norm_inf(&t.ddlq)]
        .into_iter()
        .fold(1.0, f64::max);
    Ok(split(t.residual(), &jet.du, scale))
}
