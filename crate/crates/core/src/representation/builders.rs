//! Lagrangians assembled from a null part and a parametrization-invariant
//! part:
//!
//! * `L = D_s Psi(s, u)`
//! * `L = D_s Psi(s, u) + r f(u, theta)`
//! * `L = D_s Xi(s, u, r, theta) + r f(u, theta, eta/r)`
//!
//! where `r = |u'|`, `theta` are the spherical angles of `u'` and
//! `eta = theta'`. The pieces are parsed with `r`, `t<k>` and `w<k>`
//! (`w = eta/r`) and expanded into `(s, u, p, q)`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::symbolic::{diff, total_derivative};
use crate::classifier::sampling::{random_jet, rng, trial_seed};
use crate::classifier::{Verdict, TAU};
use crate::dsl::{eval, parse_expr, Bindings, Expr, Func, LagrangianDef, Scope, Var};
use crate::error::Error;
use crate::variational::{CurveJet, CurveSpec};

/// `sqrt(p1^2 + ... + pn^2)`.
pub fn speed_expr(n: usize) -> Expr {
    Expr::call1(Func::Sqrt, Expr::sum((0..n).map(|i| Expr::var(Var::P(i)).powi(2))))
}

/// Spherical angles of `p`: `t_k = atan2(|(p_{k+1}, ..., p_n)|, p_k)` for
/// `k < n - 1` and `t_{n-1} = atan2(p_n, p_{n-1})`.
pub fn angle_exprs(n: usize) -> Vec<Expr> {
    let p = |i| Expr::var(Var::P(i));
    let mut out: Vec<Expr> = (0..n.saturating_sub(2))
        .map(|k| {
            let tail = Expr::call1(Func::Sqrt, Expr::sum((k + 1..n).map(|j| p(j).powi(2))));
            Expr::call(Func::Atan2, vec![tail, p(k)])
        })
        .collect();
    if n >= 2 {
        out.push(Expr::call(Func::Atan2, vec![p(n - 1), p(n - 2)]));
    }
    out
}

/// `eta_k = d t_k / ds = sum_j (d t_k / d p_j) q_j`.
pub fn eta_exprs(n: usize) -> Vec<Expr> {
    angle_exprs(n)
        .iter()
        .map(|t| Expr::sum((0..n).map(|j| diff(t, Var::P(j)).mul(Expr::var(Var::Q(j))))))
        .collect()
}

fn expand_polar(e: &Expr, n: usize) -> Expr {
    let r = speed_expr(n);
    let theta = angle_exprs(n);
    let w: Vec<Expr> = if e.mentions(|v| matches!(v, Var::W(_))) {
        eta_exprs(n).into_iter().map(|eta| eta.div(r.clone())).collect()
    } else {
        Vec::new()
    };
    e.substitute(&|v| match v {
        Var::R => Some(r.clone()),
        Var::Theta(k) => Some(theta[k].clone()),
        Var::W(k) => Some(w[k].clone()),
        _ => None,
    })
}

fn require(e: &Expr, what: &str, allowed: impl Fn(Var) -> bool) -> Result<(), Error> {
    let mut bad = None;
    e.for_each_var(&mut |v| {
        if !allowed(v) && bad.is_none() {
            bad = Some(v);
        }
    });
    match bad {
        Some(v) => Err(Error::InvalidDefinition(format!("{what} may not depend on {v}"))),
        None => Ok(()),
    }
}

fn check_n(n: usize, polar: bool) -> Result<(), Error> {
    let min = if polar { 2 } else { 1 };
    if n < min {
        return Err(Error::InvalidDefinition(format!("dimension must be at least {min}")));
    }
    Ok(())
}

fn in_range(v: Var, n: usize) -> bool {
    match v {
        Var::S | Var::R => true,
        Var::U(i) | Var::P(i) | Var::Q(i) => i < n,
        Var::Theta(k) | Var::W(k) => k + 1 < n,
    }
}

/// `L = D_s Psi = Psi_s + p . Psi_u`.
pub fn build_null(psi: &Expr, n: usize) -> Result<LagrangianDef, Error> {
    check_n(n, false)?;
    require(psi, "Psi", |v| in_range(v, n) && matches!(v, Var::S | Var::U(_)))?;
    LagrangianDef::new("built-null", n, total_derivative(psi, n))
}

/// `L = D_s Psi(s, u) + r f(u, theta)`.
pub fn build_first_order_t(psi: &Expr, f: &Expr, n: usize) -> Result<LagrangianDef, Error> {
    check_n(n, true)?;
    require(psi, "Psi", |v| in_range(v, n) && matches!(v, Var::S | Var::U(_)))?;
    require(f, "f", |v| in_range(v, n) && matches!(v, Var::U(_) | Var::Theta(_)))?;
    let body = total_derivative(psi, n).add(speed_expr(n).mul(expand_polar(f, n)));
    LagrangianDef::new("built-first-order", n, body)
}

/// `L = D_s Xi(s, u, r, theta) + r f(u, theta, w)`, `w = eta / r`.
///
/// `D_s Xi` is expanded with `r' = xi r` and `theta' = eta`, which is the
/// total derivative of `Xi` once `r` and `theta` are written in `p`.
pub fn build_second_order_t(xi: &Expr, f: &Expr, n: usize) -> Result<LagrangianDef, Error> {
    check_n(n, true)?;
    require(xi, "Xi", |v| {
        in_range(v, n) && matches!(v, Var::S | Var::U(_) | Var::R | Var::Theta(_))
    })?;
    require(f, "f", |v| {
        in_range(v, n) && matches!(v, Var::U(_) | Var::Theta(_) | Var::W(_))
    })?;
    let null = total_derivative(&expand_polar(xi, n), n);
    let body = null.add(speed_expr(n).mul(expand_polar(f, n)));
    LagrangianDef::new("built-second-order", n, body)
}

/// The pieces of a representation, parsed and ready to build.
#[derive(Debug, Clone, PartialEq)]
pub enum Construction {
    Null { n: usize, psi: Expr },
    FirstOrder { n: usize, psi: Expr, f: Expr },
    SecondOrder { n: usize, xi: Expr, f: Expr },
}

fn scope(n: usize, params: &BTreeMap<String, f64>, vars: &str) -> Scope {
    Scope {
        n,
        s: vars.contains('s'),
        u: vars.contains('u'),
        p: false,
        q: false,
        r: vars.contains('r'),
        theta: vars.contains('t'),
        w: vars.contains('w'),
        params: params.clone(),
    }
}

impl Construction {
    /// `Psi` over `s, u`.
    pub fn null(psi: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Self, Error> {
        Ok(Construction::Null {
            n,
            psi: parse_expr(psi, &scope(n, params, "su"))?,
        })
    }

    /// `Psi` over `s, u`; `f` over `u, t`.
    pub fn first_order(psi: &str, f: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Self, Error> {
        Ok(Construction::FirstOrder {
            n,
            psi: parse_expr(psi, &scope(n, params, "su"))?,
            f: parse_expr(f, &scope(n, params, "ut"))?,
        })
    }

    /// `Xi` over `s, u, r, t`; `f` over `u, t, w`.
    pub fn second_order(xi: &str, f: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Self, Error> {
        Ok(Construction::SecondOrder {
            n,
            xi: parse_expr(xi, &scope(n, params, "surt"))?,
            f: parse_expr(f, &scope(n, params, "utw"))?,
        })
    }

    pub fn n(&self) -> usize {
        match self {
            Construction::Null { n, .. } | Construction::FirstOrder { n, .. } | Construction::SecondOrder { n, .. } => {
                *n
            }
        }
    }

    pub fn build(&self) -> Result<LagrangianDef, Error> {
        match self {
            Construction::Null { n, psi } => build_null(psi, *n),
            Construction::FirstOrder { n, psi, f } => build_first_order_t(psi, f, *n),
            Construction::SecondOrder { n, xi, f } => build_second_order_t(xi, f, *n),
        }
    }

    /// Whether the invariant part is absent, so the result is null.
    pub fn is_null(&self) -> bool {
        match self {
            Construction::Null { .. } => true,
            Construction::FirstOrder { f, .. } | Construction::SecondOrder { f, .. } => f.is_zero_literal(),
        }
    }

    /// Text of the pieces, as `(name, expression)` pairs.
    pub fn pieces(&self) -> Vec<(&'static str, String)> {
        match self {
            Construction::Null { psi, .. } => vec![("Psi", psi.to_string())],
            Construction::FirstOrder { psi, f, .. } => vec![("Psi", psi.to_string()), ("f", f.to_string())],
            Construction::SecondOrder { xi, f, .. } => vec![("Xi", xi.to_string()), ("f", f.to_string())],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationCheck {
    pub verdict: Verdict,
    /// `max |L - L'| / max(1, |L|)` over the sampled jets.
    pub max_gap: f64,
    pub tolerance: f64,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<CurveJet>,
}

/// Compares `def` with the Lagrangian built from `pieces` at random jets.
pub fn verify_representation(
    def: &LagrangianDef,
    pieces: &Construction,
    trials: usize,
    seed: u64,
) -> Result<RepresentationCheck, Error> {
    if pieces.n() != def.n {
        return Err(Error::Dimension {
            what: "construction".into(),
            expected: def.n,
            got: pieces.n(),
        });
    }
    let built = pieces.build()?;
    let mut worst: Option<(f64, CurveJet)> = None;
    for i in 0..trials as u64 {
        let jet = random_jet(def, &mut rng(trial_seed(seed, 7, i)));
        let point = jet.point();
        let a = def.eval(&point)?;
        let b = built.eval(&point)?;
        let gap = (a - b).abs() / a.abs().max(1.0);
        if worst.as_ref().is_none_or(|(g, _)| gap > *g) {
            worst = Some((gap, jet));
        }
    }
    let (max_gap, jet) = worst.map_or((0.0, None), |(g, j)| (g, Some(j)));
    let verdict = if max_gap <= TAU { Verdict::Pass } else { Verdict::Fail };
    Ok(RepresentationCheck {
        verdict,
        max_gap,
        tolerance: TAU,
        trials,
        witness: if verdict == Verdict::Fail { jet } else { None },
    })
}

/// `E_{u2} + F_{u1}`: the Euler-Lagrange operator of `L = p1 E(u) - p2 F(u)`
/// is this factor times `(-p2, p1)`, so nonconstant critical curves lie in
/// its zero set.
pub fn critical_condition_2d(e: &Expr, f: &Expr) -> Result<Expr, Error> {
    for (name, x) in [("E", e), ("F", f)] {
        require(x, name, |v| matches!(v, Var::U(0) | Var::U(1)))?;
    }
    Ok(diff(e, Var::U(1)).add(diff(f, Var::U(0))))
}

/// `p1 E - p2 F`.
pub fn critical_condition_lagrangian(e: &Expr, f: &Expr) -> Result<LagrangianDef, Error> {
    let body = Expr::var(Var::P(0))
        .mul(e.clone())
        .sub(Expr::var(Var::P(1)).mul(f.clone()));
    LagrangianDef::new("p1*E - p2*F", 2, body)
}

/// Values of a condition over `(u1, u2)` along `curve` at `samples`.
pub fn condition_along(condition: &Expr, curve: &CurveSpec, samples: &[f64]) -> Result<Vec<f64>, Error> {
    samples
        .iter()
        .map(|&s| {
            let u = curve.position(s)?;
            Ok(eval(condition, &Bindings::new(Some(s), u, Vec::new(), Vec::new()))?)
        })
        .collect()
}

// Random pieces: short sums of low-degree monomials times bounded factors,
// so every construction is smooth on the sampled jets.

fn monomial<R: Rng>(rng: &mut R, n: usize, with_s: bool) -> Expr {
    let c = rng.gen_range(-1.0..1.0);
    let mut e = Expr::num((c * 100.0f64).round() / 100.0);
    for _ in 0..rng.gen_range(1..=2) {
        let i = rng.gen_range(0..n);
        e = e.mul(Expr::var(Var::U(i)).powi(rng.gen_range(1..=2)));
    }
    if with_s && rng.gen_bool(0.5) {
        e = e.mul(Expr::var(Var::S).powi(rng.gen_range(1..=2)));
    }
    e
}

fn angle_factor<R: Rng>(rng: &mut R, n: usize) -> Expr {
    let k = rng.gen_range(0..n - 1);
    let m = Expr::num(rng.gen_range(1..=2) as f64);
    let func = if rng.gen_bool(0.5) { Func::Sin } else { Func::Cos };
    Expr::call1(func, m.mul(Expr::var(Var::Theta(k))))
}

fn random_psi<R: Rng>(rng: &mut R, n: usize) -> Expr {
    let mut terms: Vec<Expr> = (0..rng.gen_range(1..=3)).map(|_| monomial(rng, n, true)).collect();
    if rng.gen_bool(0.3) {
        terms.push(Expr::call1(Func::Sin, Expr::var(Var::U(rng.gen_range(0..n)))));
    }
    Expr::sum(terms)
}

/// `f(u, theta)` bounded below by a positive constant, e.g.
/// `1.3 + 0.4*u1^2*cos(2*t1)`.
fn random_angular<R: Rng>(rng: &mut R, n: usize) -> Expr {
    let base = Expr::num(((1.0 + rng.gen::<f64>()) * 100.0).round() / 100.0);
    let terms = (0..rng.gen_range(1..=2)).map(|_| monomial(rng, n, false).mul(angle_factor(rng, n)));
    Expr::sum(std::iter::once(base).chain(terms))
}

pub fn random_null(seed: u64, n: usize) -> Construction {
    let mut r = rng(seed);
    Construction::Null {
        n,
        psi: random_psi(&mut r, n),
    }
}

pub fn random_first_order(seed: u64, n: usize) -> Construction {
    let mut r = rng(seed);
    Construction::FirstOrder {
        n,
        psi: random_psi(&mut r, n),
        f: random_angular(&mut r, n),
    }
}

pub fn random_second_order(seed: u64, n: usize) -> Construction {
    let mut r = rng(seed);
    let xi = Expr::sum((0..r.gen_range(1..=2)).map(|_| {
        let m = monomial(&mut r, n, true);
        match r.gen_range(0..3) {
            0 => m.mul(Expr::var(Var::R)),
            1 => m.mul(angle_factor(&mut r, n)),
            _ => m,
        }
    }));
    let k = r.gen_range(0..n - 1);
    let c = ((0.2 + r.gen::<f64>()) * 100.0).round() / 100.0;
    let bend = Expr::num(c).mul(Expr::var(Var::W(k)).powi(2));
    let mix = monomial(&mut r, n, false).mul(Expr::var(Var::W(r.gen_range(0..n - 1))));
    let f = random_angular(&mut r, n).add(bend).add(mix);
    Construction::SecondOrder { n, xi, f }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::dsl::Point;
    use approx::assert_relative_eq;

    fn no_params() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    fn point() -> Point {
        Point {
            s: 0.3,
            u: vec![1.2, -0.4],
            p: vec![0.6, 0.8],
            q: vec![-0.5, 1.5],
        }
    }

    #[test]
    fn null_examples() {
        let c = Construction::null("u1*u2", 2, &no_params()).unwrap();
        assert_eq!(c.build().unwrap().body.to_string(), "u2*p1 + u1*p2");
        let c = Construction::null("s*u1^2", 2, &no_params()).unwrap();
        let d = c.build().unwrap();
        let want = LagrangianDef::parse("u1^2 + 2*s*u1*p1", 2, &no_params()).unwrap();
        assert_relative_eq!(d.eval(&point()).unwrap(), want.eval(&point()).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn first_order_examples() {
        let ms = Construction::first_order("0", "u1", 2, &no_params())
            .unwrap()
            .build()
            .unwrap();
        let want = catalog::minimal_surface_axi().eval(&point()).unwrap() / (2.0 * std::f64::consts::PI);
        assert_relative_eq!(ms.eval(&point()).unwrap(), want, max_relative = 1e-15);
        let p1 = Construction::first_order("0", "cos(t1)", 2, &no_params())
            .unwrap()
            .build()
            .unwrap();
        assert_relative_eq!(p1.eval(&point()).unwrap(), 0.6, epsilon = 1e-15);
        assert_eq!(p1.order, 1);
    }

    #[test]
    fn elastica_form() {
        let c = Construction::second_order("0", "w1^2", 2, &no_params()).unwrap();
        let built = c.build().unwrap();
        assert_eq!(built.order, 2);
        let e = catalog::euler_elastica();
        assert_relative_eq!(
            built.eval(&point()).unwrap(),
            e.eval(&point()).unwrap(),
            max_relative = 1e-14
        );
        let v = verify_representation(&e, &c, 100, 1).unwrap();
        assert_eq!(v.verdict, Verdict::Pass, "{v:?}");
    }

    #[test]
    fn verification_detects_wrong_null_part() {
        let ms = catalog::minimal_surface_axi();
        let good = Construction::first_order("0", "2*pi*u1", 2, &no_params()).unwrap();
        assert_eq!(verify_representation(&ms, &good, 50, 2).unwrap().verdict, Verdict::Pass);
        let bad = Construction::first_order("u1*u2", "2*pi*u1", 2, &no_params()).unwrap();
        let v = verify_representation(&ms, &bad, 50, 2).unwrap();
        assert_eq!(v.verdict, Verdict::Fail);
        assert!(v.max_gap > 1e-3 && v.witness.is_some());
    }

    #[test]
    fn pieces_are_scoped() {
        assert!(Construction::null("p1", 2, &no_params()).is_err());
        assert!(Construction::first_order("0", "s*u1", 2, &no_params()).is_err());
        assert!(Construction::first_order("0", "t2", 2, &no_params()).is_err());
        assert!(Construction::second_order("q1", "0", 2, &no_params()).is_err());
        let x = Expr::var(Var::P(0));
        assert!(matches!(build_null(&x, 2), Err(Error::InvalidDefinition(_))));
    }

    #[test]
    fn critical_condition_examples() {
        let sc = scope(2, &no_params(), "u");
        let cond = |e: &str, f: &str| {
            critical_condition_2d(&parse_expr(e, &sc).unwrap(), &parse_expr(f, &sc).unwrap()).unwrap()
        };
        assert_eq!(cond("u2", "u1").as_num(), Some(2.0));
        assert_eq!(cond("-u2", "u1").as_num(), Some(0.0));
        assert_eq!(cond("2*u1*u2", "0").to_string(), "2*u1");
    }

    #[test]
    fn eta_matches_plane_formula() {
        let eta = &eta_exprs(2)[0];
        let b = point();
        let v = eval(eta, &Bindings::new(None, vec![], b.p.clone(), b.q.clone())).unwrap();
        let (p, q) = (&b.p, &b.q);
        assert_relative_eq!(
            v,
            (p[0] * q[1] - p[1] * q[0]) / (p[0] * p[0] + p[1] * p[1]),
            epsilon = 1e-15
        );
    }
}
