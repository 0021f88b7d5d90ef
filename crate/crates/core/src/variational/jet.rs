use serde::{Deserialize, Serialize};

use crate::dsl::Point;
use crate::error::Error;

/// Speed below which a curve is treated as singular.
pub const REGULARITY_FLOOR: f64 = 1e-8;

/// A curve and its first four derivatives at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveJet {
    pub s: f64,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
    pub d3u: Vec<f64>,
    pub d4u: Vec<f64>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl CurveJet {
    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn speed(&self) -> f64 {
        dot(&self.du, &self.du).sqrt()
    }

    /// The `(s, u, p, q)` point this jet sits over.
    pub fn point(&self) -> Point {
        Point {
            s: self.s,
            u: self.u.clone(),
            p: self.du.clone(),
            q: self.d2u.clone(),
        }
    }

    pub fn check_regular(&self) -> Result<(), Error> {
        let speed = self.speed();
        // NaN fails the comparison too
        if speed >= REGULARITY_FLOOR {
            Ok(())
        } else {
            Err(Error::Regularity { s: self.s, speed })
        }
    }

    pub(crate) fn check_shape(&self) -> Result<(), Error> {
        let n = self.n();
        for (what, v) in [
            ("du", &self.du),
            ("d2u", &self.d2u),
            ("d3u", &self.d3u),
            ("d4u", &self.d4u),
        ] {
            if v.len() != n {
                return Err(Error::Dimension {
                    what: what.to_string(),
                    expected: n,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}
