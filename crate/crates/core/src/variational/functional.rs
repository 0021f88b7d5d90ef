use super::curve::CurveSpec;
use super::euler::euler_lagrange;
use super::jet::dot;
use super::quadrature::{integrate, QUAD_RTOL};
use crate::dsl::{value_and_partials, LagrangianDef, Var};
use crate::error::Error;

/// Boundary tolerance for admissible variations.
pub const BOUNDARY_TOL: f64 = 1e-12;

fn check_dims(def: &LagrangianDef, curve: &CurveSpec) -> Result<(), Error> {
    def.check_dims("curve", curve.n())
}

/// `int_0^1 L(s, u, u', u'') ds`.
pub fn functional_value(def: &LagrangianDef, curve: &CurveSpec) -> Result<f64, Error> {
    check_dims(def, curve)?;
    let order = def.order as usize;
    integrate(
        |s| {
            let jet = curve.jet_to(s, order)?;
            jet.check_regular()?;
            def.eval(&jet.point())
        },
        0.0,
        1.0,
        QUAD_RTOL,
    )
}

fn check_variation(def: &LagrangianDef, variation: &CurveSpec) -> Result<(), Error> {
    check_dims(def, variation)?;
    for s in [0.0, 1.0] {
        let j = variation.jet_to(s, 1)?;
        let bad_value = j.u.iter().any(|x| x.abs() > BOUNDARY_TOL);
        let bad_slope = def.is_second_order() && j.du.iter().any(|x| x.abs() > BOUNDARY_TOL);
        if bad_value || bad_slope {
            return Err(Error::BoundaryViolation(format!(
                "at s = {s}: du = {:?}, du' = {:?}",
                j.u, j.du
            )));
        }
    }
    Ok(())
}

/// `dE[du] = int L_u . du + L_p . du' + L_q . du'' ds`.
pub fn first_variation(def: &LagrangianDef, curve: &CurveSpec, variation: &CurveSpec) -> Result<f64, Error> {
    check_dims(def, curve)?;
    check_variation(def, variation)?;
    let n = def.n;
    let order = def.order as usize;
    let dirs: Vec<Var> = (0..n)
        .map(Var::U)
        .chain((0..n).map(Var::P))
        .chain((0..if order == 2 { n } else { 0 }).map(Var::Q))
        .collect();
    integrate(
        |s| {
            let jet = curve.jet_to(s, order)?;
            jet.check_regular()?;
            let dv = variation.jet_to(s, order)?;
            let (_, g) = value_and_partials(&def.body, &def.bindings(&jet.point())?, &dirs)?;
            let mut v = dot(&g[..n], &dv.u) + dot(&g[n..2 * n], &dv.du);
            if order == 2 {
                v += dot(&g[2 * n..], &dv.d2u);
            }
            Ok(v)
        },
        0.0,
        1.0,
        QUAD_RTOL,
    )
}

/// `int E(u) . du ds`, equal to [`first_variation`] by integration by parts.
pub fn el_pairing(def: &LagrangianDef, curve: &CurveSpec, variation: &CurveSpec) -> Result<f64, Error> {
    check_dims(def, curve)?;
    check_variation(def, variation)?;
    integrate(
        |s| {
            let jet = curve.jet(s)?;
            let dv = variation.jet_to(s, 0)?;
            Ok(dot(&euler_lagrange(def, &jet)?.residual, &dv.u))
        },
        0.0,
        1.0,
        QUAD_RTOL,
    )
}
