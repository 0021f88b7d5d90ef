use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::eval::{eval, Bindings};
use super::expr::{Expr, Var};
use super::parser::{is_reserved, parse_expr, Scope};
use crate::error::Error;

/// Sampling-domain restriction attached to a Lagrangian.
///
/// These are preconditions on the curves a Lagrangian is evaluated on, not
/// terms of the energy: random curves and jets drawn for classification
/// respect them, and [`LagrangianDef::check_point`] rejects violations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// Component `k` (zero-based) stays positive, e.g. an axisymmetric radius.
    Positive(usize),
    /// The listed components form a unit vector, e.g. a director field.
    UnitVector(Vec<usize>),
    /// The listed components alone trace a regular curve (the profile
    /// curve of an axisymmetric surface carrying extra fields).
    Regular(Vec<usize>),
}

/// Tolerance of the unit-vector check.
pub const UNIT_VECTOR_TOL: f64 = 1e-8;

impl Constraint {
    pub fn components(&self) -> &[usize] {
        match self {
            Constraint::Positive(k) => std::slice::from_ref(k),
            Constraint::UnitVector(ks) | Constraint::Regular(ks) => ks,
        }
    }

    pub fn check(&self, u: &[f64]) -> Result<(), Error> {
        match self {
            Constraint::Positive(k) => {
                if u[*k] > 0.0 {
                    Ok(())
                } else {
                    Err(Error::ConstraintViolation(format!(
                        "u{} = {} is not positive",
                        k + 1,
                        u[*k]
                    )))
                }
            }
            Constraint::UnitVector(ks) => {
                let norm = ks.iter().map(|&k| u[k] * u[k]).sum::<f64>().sqrt();
                if (norm - 1.0).abs() <= UNIT_VECTOR_TOL {
                    Ok(())
                } else {
                    Err(Error::ConstraintViolation(format!(
                        "|({})| = {norm}, expected a unit vector",
                        ks.iter().map(|k| format!("u{}", k + 1)).collect::<Vec<_>>().join(", ")
                    )))
                }
            }
            // a statement about derivatives; nothing to check at a position
            Constraint::Regular(_) => Ok(()),
        }
    }
}

/// A point `(s, u, p, q)` of the jet space; `q` may be empty for first-order
/// Lagrangians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub s: f64,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    #[serde(default)]
    pub q: Vec<f64>,
}

/// A Lagrangian `L(s, u, p, q)` with `p = u'` and `q = u''`.
///
/// For `n = 2` the usual planar naming is `u1 = x`, `u2 = y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianDef {
    pub name: String,
    pub n: usize,
    /// 2 when some `q` variable appears in the body, 1 otherwise.
    pub order: u8,
    pub body: Expr,
    pub params: BTreeMap<String, f64>,
    pub constraints: Vec<Constraint>,
}

impl LagrangianDef {
    pub fn new(name: impl Into<String>, n: usize, body: Expr) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidDefinition("dimension must be at least 1".into()));
        }
        let mut bad = None;
        body.for_each_var(&mut |v| {
            let ok = match v {
                Var::S => true,
                Var::U(i) | Var::P(i) | Var::Q(i) => i < n,
                Var::R | Var::Theta(_) | Var::W(_) => false,
            };
            if !ok && bad.is_none() {
                bad = Some(v);
            }
        });
        if let Some(v) = bad {
            return Err(Error::InvalidDefinition(format!(
                "variable {v} is not allowed in a Lagrangian of dimension {n}"
            )));
        }
        let mut params = BTreeMap::new();
        body.params(&mut params);
        let order = if body.mentions(|v| matches!(v, Var::Q(_))) {
            2
        } else {
            1
        };
        Ok(LagrangianDef {
            name: name.into(),
            n,
            order,
            body,
            params,
            constraints: Vec::new(),
        })
    }

    /// Parses a body over `s, u1..un, p1..pn, q1..qn`, `pi` and `params`.
    pub fn parse(source: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidDefinition("dimension must be at least 1".into()));
        }
        if let Some(bad) = params.keys().find(|k| is_reserved(k)) {
            return Err(Error::InvalidDefinition(format!("parameter name {bad:?} is reserved")));
        }
        let body = parse_expr(source, &Scope::lagrangian(n, params))?;
        let mut def = LagrangianDef::new("L", n, body)?;
        // keep declared-but-unused parameters so they survive a round trip
        for (k, v) in params {
            def.params.entry(k.clone()).or_insert(*v);
        }
        Ok(def)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_constraints(mut self, constraints: Vec<Constraint>) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn is_second_order(&self) -> bool {
        self.order == 2
    }

    /// Checks the attached constraints at a position `u`.
    pub fn check_point(&self, u: &[f64]) -> Result<(), Error> {
        self.constraints.iter().try_for_each(|c| c.check(u))
    }

    /// Variables a Taylor/dual evaluation needs bound.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = vec![Var::S];
        out.extend((0..self.n).map(Var::U));
        out.extend((0..self.n).map(Var::P));
        if self.is_second_order() {
            out.extend((0..self.n).map(Var::Q));
        }
        out
    }

    pub(crate) fn check_dims(&self, what: &str, len: usize) -> Result<(), Error> {
        if len != self.n {
            return Err(Error::Dimension {
                what: what.to_string(),
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    pub fn bindings(&self, point: &Point) -> Result<Bindings<f64>, Error> {
        self.check_dims("u", point.u.len())?;
        self.check_dims("p", point.p.len())?;
        let q = if self.is_second_order() {
            self.check_dims("q", point.q.len())?;
            point.q.clone()
        } else {
            Vec::new()
        };
        Ok(Bindings::new(Some(point.s), point.u.clone(), point.p.clone(), q))
    }

    /// Value of the Lagrangian at a point.
    pub fn eval(&self, point: &Point) -> Result<f64, Error> {
        Ok(eval(&self.body, &self.bindings(point)?)?)
    }
}
