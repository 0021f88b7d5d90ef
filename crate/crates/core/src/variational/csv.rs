//! CSV tables for offline plotting.

use serde::Serialize;

use super::curve::CurveSpec;
use super::euler::{euler_lagrange, ElResult};
use super::jet::norm_inf;
use crate::dsl::LagrangianDef;
use crate::error::Error;

/// One row of a residual profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub s: f64,
    pub residual: Vec<f64>,
    pub tangential: f64,
    pub normal: f64,
    pub scaled_residual: f64,
    pub scaled_tangential: f64,
    pub scaled_normal: f64,
}

impl ProfileRow {
    pub fn new(s: f64, r: &ElResult) -> Self {
        ProfileRow {
            s,
            residual: r.residual.clone(),
            tangential: r.tangential,
            normal: norm_inf(&r.normal),
            scaled_residual: r.scaled_residual(),
            scaled_tangential: r.scaled_tangential(),
            scaled_normal: r.scaled_normal(),
        }
    }
}

fn to_string(header: Vec<String>, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("writing to memory");
    for row in rows {
        w.write_record(row.iter().map(|x| format!("{x:e}")))
            .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("ascii output")
}

fn names(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

/// `s, u1.., du1.., d2u1..` at `m` uniform points.
pub fn curve_csv(curve: &CurveSpec, m: usize) -> Result<String, Error> {
    let n = curve.n();
    let header = std::iter::once("s".to_string())
        .chain(names("u", n))
        .chain(names("du", n))
        .chain(names("d2u", n))
        .collect();
    let rows = (0..m)
        .map(|j| {
            let s = j as f64 / (m.max(2) - 1) as f64;
            let jet = curve.jet_to(s, 2)?;
            Ok(std::iter::once(s).chain(jet.u).chain(jet.du).chain(jet.d2u).collect())
        })
        .collect::<Result<Vec<Vec<f64>>, Error>>()?;
    Ok(to_string(header, rows.into_iter()))
}

/// `s, E1.., tangential, normal` and the three scaled residuals.
pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let n = rows.first().map_or(0, |r| r.residual.len());
    let header = std::iter::once("s".to_string())
        .chain(names("E", n))
        .chain(
            [
                "tangential",
                "normal",
                "scaled_residual",
                "scaled_tangential",
                "scaled_normal",
            ]
            .map(String::from),
        )
        .collect();
    to_string(
        header,
        rows.iter().map(|r| {
            std::iter::once(r.s)
                .chain(r.residual.iter().copied())
                .chain([
                    r.tangential,
                    r.normal,
                    r.scaled_residual,
                    r.scaled_tangential,
                    r.scaled_normal,
                ])
                .collect()
        }),
    )
}

/// Residual profile of `def` along `curve` at `m` uniform interior points.
pub fn residual_profile_along(def: &LagrangianDef, curve: &CurveSpec, m: usize) -> Result<Vec<ProfileRow>, Error> {
    (1..=m)
        .map(|j| {
            let s = j as f64 / (m + 1) as f64;
            Ok(ProfileRow::new(s, &euler_lagrange(def, &curve.jet(s)?)?))
        })
        .collect()
}
