//! Curves, jets, quadrature, the Euler-Lagrange operator and the first
//! variation.

pub mod csv;
pub mod curve;
mod euler;
mod functional;
mod jet;
pub mod quadrature;

pub use curve::{random_regular_curve, random_variation, CurveSampler, CurveSpec, Diffeo, FourierCurve, GridCurve};
pub use euler::{el_terms, euler_lagrange, split, ElResult, ElTerms, JetSlices};
pub use functional::{el_pairing, first_variation, functional_value, BOUNDARY_TOL};
pub use jet::{CurveJet, REGULARITY_FLOOR};
