//! Built-in Lagrangians: axisymmetric surface energies, the planar elastica
//! and a set of positive and negative controls.
//!
//! Geometric quantities (turning rate, curvatures, director divergence) are
//! expanded into rational expressions of `(u, p, q)` here, so evaluation is
//! a single pass over one expression tree. Axisymmetric entries keep the
//! `2*pi` factor, so functional values are total surface energies.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dsl::{Constraint, LagrangianDef};
use crate::error::Error;

/// Classification an entry is expected to receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExpectedFlags {
    pub null: bool,
    #[serde(rename = "T")]
    pub t: bool,
    #[serde(rename = "N")]
    pub n: bool,
    /// Integral criterion: `E(u o w) = E(u)` for boundary-fixing `w`.
    pub param_invariant: bool,
    /// Pointwise criterion: s-independence plus degree-1 homogeneity (first
    /// order) or the two second-order conditions.
    pub param_invariant_differential: bool,
}

impl ExpectedFlags {
    const GEOMETRIC: ExpectedFlags = ExpectedFlags {
        null: false,
        t: true,
        n: false,
        param_invariant: true,
        param_invariant_differential: true,
    };
    const NULL: ExpectedFlags = ExpectedFlags {
        null: true,
        t: true,
        n: true,
        param_invariant: true,
        param_invariant_differential: true,
    };
    const NONE: ExpectedFlags = ExpectedFlags {
        null: false,
        t: false,
        n: false,
        param_invariant: false,
        param_invariant_differential: false,
    };

    /// `null => T and N`, `param-invariant => T`.
    pub fn is_consistent(&self) -> bool {
        (!self.null || (self.t && self.n))
            && (!self.param_invariant || self.t)
            && (!self.param_invariant_differential || self.t)
    }
}

type Factory = fn(&BTreeMap<String, f64>) -> Result<LagrangianDef, Error>;

pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub n: usize,
    pub order: u8,
    /// Parameters with their defaults.
    pub params: &'static [(&'static str, f64)],
    pub expected: ExpectedFlags,
    factory: Factory,
}

impl CatalogEntry {
    /// Builds the Lagrangian, overriding defaults with `overrides`.
    pub fn build(&self, overrides: &BTreeMap<String, f64>) -> Result<LagrangianDef, Error> {
        if let Some(k) = overrides.keys().find(|k| !self.params.iter().any(|(p, _)| p == k)) {
            return Err(Error::InvalidDefinition(format!("{} has no parameter {k:?}", self.id)));
        }
        let mut params: BTreeMap<String, f64> = self.params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        params.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
        Ok((self.factory)(&params)?.with_name(self.id))
    }

    pub fn default_def(&self) -> LagrangianDef {
        self.build(&BTreeMap::new())
            .unwrap_or_else(|e| panic!("built-in entry {} does not build: {e}", self.id))
    }
}

const SPEED: &str = "sqrt(p1^2 + p2^2)";
const TURNING: &str = "(p1*q2 - p2*q1)/(p1^2 + p2^2)";

fn parse(src: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<LagrangianDef, Error> {
    LagrangianDef::parse(src, n, params)
}

fn param(params: &BTreeMap<String, f64>, name: &str, value: f64) -> BTreeMap<String, f64> {
    let mut p = params.clone();
    p.insert(name.to_string(), value);
    p
}

/// Area of the surface of revolution of `(x, y) = (u1, u2)` about the y axis.
pub fn minimal_surface_axi() -> LagrangianDef {
    lookup("minimal-surface-axi").unwrap().default_def()
}

/// Axisymmetric bending energy `int kappa H^2 + kappa_g K da`.
pub fn helfrich_canham_axi(kappa: f64, kappa_g: f64) -> LagrangianDef {
    let p = param(&param(&BTreeMap::new(), "kappa", kappa), "kappa_g", kappa_g);
    lookup("helfrich-canham-axi").unwrap().build(&p).unwrap()
}

/// Squared curvature per unit deformed length of a planar curve.
pub fn euler_elastica() -> LagrangianDef {
    lookup("euler-elastica").unwrap().default_def()
}

/// Phase field `u1` on the surface of revolution of `(u2, u3)`.
pub fn cahn_hilliard_axi(epsilon: f64) -> LagrangianDef {
    let p = param(&BTreeMap::new(), "epsilon", epsilon);
    lookup("cahn-hilliard-axi").unwrap().build(&p).unwrap()
}

/// One-constant director energy with director `(u1, u2, u3)` in the
/// `(e_r, e_phi, k)` frame on the surface of revolution of `(u4, u5)`.
/// Samples must keep the director a unit vector.
pub fn frank_oseen_axi(k: f64) -> LagrangianDef {
    let p = param(&BTreeMap::new(), "K", k);
    lookup("frank-oseen-axi").unwrap().build(&p).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullControl {
    /// `D_s(u1*u2)`
    Product,
    /// `D_s(s*u1^2)`
    WeightedSquare,
    /// `D_s(u1^2/2)`
    HalfSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonInvariantControl {
    Dirichlet,
    /// `q1^2`, second order
    QSquare,
    /// `s*|p|`, homogeneous but s-dependent
    WeightedArcLength,
}

pub fn named_null(choice: NullControl) -> LagrangianDef {
    let id = match choice {
        NullControl::Product => "null-product",
        NullControl::WeightedSquare => "null-weighted-square",
        NullControl::HalfSquare => "null-half-square",
    };
    lookup(id).unwrap().default_def()
}

pub fn named_noninvariant(choice: NonInvariantControl) -> LagrangianDef {
    let id = match choice {
        NonInvariantControl::Dirichlet => "dirichlet",
        NonInvariantControl::QSquare => "q-square",
        NonInvariantControl::WeightedArcLength => "weighted-arclength",
    };
    lookup(id).unwrap().default_def()
}

fn build_minimal_surface(p: &BTreeMap<String, f64>) -> Result<LagrangianDef, Error> {
    Ok(parse(&format!("2*pi*u1*{SPEED}"), 2, p)?.with_constraints(vec![Constraint::Positive(0)]))
}

fn build_helfrich_canham(p: &BTreeMap<String, f64>) -> Result<LagrangianDef, Error> {
    // theta'/|p| and sin(theta)/x
    let meridian = format!("({TURNING})/{SPEED}");
    let parallel = format!("p2/({SPEED}*u1)");
    let src = format!("2*pi*(kappa/4*({meridian} + {parallel})^2 + kappa_g*{meridian}*{parallel})*u1*{SPEED}");
    Ok(parse(&src, 2, p)?.with_constraints(vec![Constraint::Positive(0)]))
}

fn build_elastica(p: &BTreeMap<String, f64>) -> Result<LagrangianDef, Error> {
    parse(&format!("((p1*q2 - p2*q1)/((p1^2 + p2^2)*{SPEED}))^2*{SPEED}"), 2, p)
}

fn build_cahn_hilliard(p: &BTreeMap<String, f64>) -> Result<LagrangianDef, Error> {
    let src = "2*pi*(epsilon/2*p1^2/(p2^2 + p3^2) + (u1^2 - 1)^2)*u2*sqrt(p2^2 + p3^2)";
    Ok(parse(src, 3, p)?.with_constraints(vec![Constraint::Positive(1), Constraint::Regular(vec![1, 2])]))
}

fn build_frank_oseen(p: &BTreeMap<String, f64>) -> Result<LagrangianDef, Error> {
    // u = (alpha, beta, gamma, x, y); m = x'alpha + y'gamma and its s-derivative
    let speed = "sqrt(p4^2 + p5^2)";
    let m = "(p4*u1 + p5*u3)";
    let dm = "(q4*u1 + p4*p1 + q5*u3 + p5*p3)";
    // div n = d/ds(x m/|p|)/(x |p|), expanded
    let div = format!("(((p4*{m} + u4*{dm})/{speed} - u4*{m}*(p4*q4 + p5*q5)/{speed}^3)/(u4*{speed}))");
    let rot = format!("((u4*p2 + u2*p4)/(u4*{speed}))");
    let src = format!("2*pi*K/2*({div}^2 + {rot}^2)*u4*{speed}");
    Ok(parse(&src, 5, p)?.with_constraints(vec![
        Constraint::UnitVector(vec![0, 1, 2]),
        Constraint::Positive(3),
        Constraint::Regular(vec![3, 4]),
    ]))
}

static ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        id: "minimal-surface-axi",
        description: "area of an axisymmetric surface, 2 pi x |u'|",
        n: 2,
        order: 1,
        params: &[],
        expected: ExpectedFlags::GEOMETRIC,
        factory: build_minimal_surface,
    },
    CatalogEntry {
        id: "helfrich-canham-axi",
        description: "axisymmetric bending energy kappa H^2 + kappa_g K",
        n: 2,
        order: 2,
        params: &[("kappa", 1.0), ("kappa_g", 0.5)],
        expected: ExpectedFlags::GEOMETRIC,
        factory: build_helfrich_canham,
    },
    CatalogEntry {
        id: "euler-elastica",
        description: "squared curvature times speed of a planar curve",
        n: 2,
        order: 2,
        params: &[],
        expected: ExpectedFlags::GEOMETRIC,
        factory: build_elastica,
    },
    CatalogEntry {
        id: "cahn-hilliard-axi",
        description: "two-well phase field on an axisymmetric surface, u = (psi, x, y)",
        n: 3,
        order: 1,
        params: &[("epsilon", 0.5)],
        expected: ExpectedFlags::GEOMETRIC,
        factory: build_cahn_hilliard,
    },
    CatalogEntry {
        id: "frank-oseen-axi",
        description: "one-constant director energy on an axisymmetric film, u = (alpha, beta, gamma, x, y)",
        n: 5,
        order: 2,
        params: &[("K", 1.0)],
        expected: ExpectedFlags::GEOMETRIC,
        factory: build_frank_oseen,
    },
    CatalogEntry {
        id: "null-product",
        description: "p1 u2 + u1 p2 = D_s(u1 u2)",
        n: 2,
        order: 1,
        params: &[],
        expected: ExpectedFlags::NULL,
        factory: |p| parse("p1*u2 + u1*p2", 2, p),
    },
    CatalogEntry {
        id: "null-weighted-square",
        description: "2 s u1 p1 + u1^2 = D_s(s u1^2); invariant as an integral but s-dependent",
        n: 2,
        order: 1,
        params: &[],
        expected: ExpectedFlags {
            param_invariant_differential: false,
            ..ExpectedFlags::NULL
        },
        factory: |p| parse("2*s*u1*p1 + u1^2", 2, p),
    },
    CatalogEntry {
        id: "null-half-square",
        description: "p1 u1 = D_s(u1^2/2)",
        n: 2,
        order: 1,
        params: &[],
        expected: ExpectedFlags::NULL,
        factory: |p| parse("p1*u1", 2, p),
    },
    CatalogEntry {
        id: "dirichlet",
        description: "(p1^2 + p2^2)/2",
        n: 2,
        order: 1,
        params: &[],
        expected: ExpectedFlags::NONE,
        factory: |p| parse("(p1^2 + p2^2)/2", 2, p),
    },
    CatalogEntry {
        id: "q-square",
        description: "q1^2",
        n: 2,
        order: 2,
        params: &[],
        expected: ExpectedFlags::NONE,
        factory: |p| parse("q1^2", 2, p),
    },
    CatalogEntry {
        id: "weighted-arclength",
        description: "s |u'|, homogeneous in u' but s-dependent",
        n: 2,
        order: 1,
        params: &[],
        expected: ExpectedFlags::NONE,
        factory: |p| parse("s*sqrt(p1^2 + p2^2)", 2, p),
    },
];

pub fn entries() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn lookup(id: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.id == id)
}
