//! The `.lag` text format.
//!
//! ```text
//! # axisymmetric area
//! name: minimal-surface-axi
//! n: 2
//! order: 1
//! param kappa = 1.5
//! positive: 1
//! L = 2*pi*u1*sqrt(p1^2 + p2^2)
//! ```
//!
//! One item per line; `#` starts a comment. Header keys are `name`, `n`,
//! `order` (optional; checked against the order inferred from the body),
//! `positive` (one-based component indices that must stay positive),
//! `unit` (one-based indices forming a unit vector, may repeat) and
//! `regular` (one-based indices that alone trace a regular curve). Parameters
//! are `param <name> = <value>`. Equations `<lhs> = <expr>` come last; a
//! Lagrangian file has exactly one, `L = ...`. Builder inputs use the same
//! layout with `Psi`, `Xi` and `f` equations instead.

use std::collections::BTreeMap;

use super::lagrangian::{Constraint, LagrangianDef};
use crate::error::Error;

/// A `.lag` document before the equations are parsed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LagDocument {
    pub name: Option<String>,
    pub n: Option<usize>,
    pub order: Option<u8>,
    pub params: BTreeMap<String, f64>,
    pub constraints: Vec<Constraint>,
    /// `(lhs, rhs, line number)` in file order.
    pub equations: Vec<(String, String, usize)>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::LagFile {
        line,
        message: message.into(),
    }
}

fn indices(line: usize, v: &str) -> Result<Vec<usize>, Error> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k - 1),
            _ => Err(err(line, format!("bad component index {t:?}"))),
        })
        .collect()
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl LagDocument {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut doc = LagDocument::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix("param ") {
                if !doc.equations.is_empty() {
                    return Err(err(line, "parameters must precede equations"));
                }
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| err(line, "expected `param <name> = <value>`"))?;
                let k = k.trim();
                if !is_ident(k) {
                    return Err(err(line, format!("bad parameter name {k:?}")));
                }
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| err(line, format!("bad parameter value {:?}", v.trim())))?;
                if !v.is_finite() {
                    return Err(err(line, "parameter value must be finite"));
                }
                if doc.params.insert(k.to_string(), v).is_some() {
                    return Err(err(line, format!("parameter {k} declared twice")));
                }
                continue;
            }
            let colon = content.find(':');
            let equals = content.find('=');
            match (colon, equals) {
                (Some(c), e) if e.is_none_or(|e| c < e) => {
                    if !doc.equations.is_empty() {
                        return Err(err(line, "headers must precede equations"));
                    }
                    let (k, v) = (content[..c].trim(), content[c + 1..].trim());
                    match k {
                        "name" => doc.name = Some(v.to_string()),
                        "n" => {
                            let n: usize = v.parse().map_err(|_| err(line, format!("bad dimension {v:?}")))?;
                            if n == 0 {
                                return Err(err(line, "dimension must be at least 1"));
                            }
                            doc.n = Some(n);
                        }
                        "order" => match v {
                            "1" => doc.order = Some(1),
                            "2" => doc.order = Some(2),
                            _ => return Err(err(line, format!("order must be 1 or 2, got {v:?}"))),
                        },
                        "positive" => doc
                            .constraints
                            .extend(indices(line, v)?.into_iter().map(Constraint::Positive)),
                        "unit" => {
                            let ks = indices(line, v)?;
                            if ks.len() < 2 {
                                return Err(err(line, "a unit vector needs at least two components"));
                            }
                            doc.constraints.push(Constraint::UnitVector(ks));
                        }
                        "regular" => {
                            let ks = indices(line, v)?;
                            if ks.is_empty() {
                                return Err(err(line, "`regular:` needs at least one component"));
                            }
                            doc.constraints.push(Constraint::Regular(ks));
                        }
                        _ => return Err(err(line, format!("unknown header key {k:?}"))),
                    }
                }
                (_, Some(e)) => {
                    let lhs = content[..e].trim();
                    if !is_ident(lhs) {
                        return Err(err(line, format!("bad equation name {lhs:?}")));
                    }
                    if doc.equations.iter().any(|(l, _, _)| l == lhs) {
                        return Err(err(line, format!("{lhs} defined twice")));
                    }
                    doc.equations
                        .push((lhs.to_string(), content[e + 1..].trim().to_string(), line));
                }
                _ => return Err(err(line, format!("cannot read line {content:?}"))),
            }
        }
        Ok(doc)
    }

    pub fn equation(&self, lhs: &str) -> Option<(&str, usize)> {
        self.equations
            .iter()
            .find(|(l, _, _)| l == lhs)
            .map(|(_, r, line)| (r.as_str(), *line))
    }

    fn check_constraints(&self, n: usize) -> Result<(), Error> {
        for c in &self.constraints {
            if let Some(k) = c.components().iter().find(|&&k| k >= n) {
                return Err(err(0, format!("constraint component u{} exceeds dimension {n}", k + 1)));
            }
        }
        Ok(())
    }
}

/// Reads a Lagrangian file.
pub fn read_lag(text: &str) -> Result<LagrangianDef, Error> {
    read_lag_with(text, &BTreeMap::new())
}

/// Reads a Lagrangian file, replacing the values of declared parameters.
pub fn read_lag_with(text: &str, overrides: &BTreeMap<String, f64>) -> Result<LagrangianDef, Error> {
    let mut doc = LagDocument::parse(text)?;
    for (k, v) in overrides {
        match doc.params.get_mut(k) {
            Some(slot) => *slot = *v,
            None => {
                return Err(Error::InvalidDefinition(format!(
                    "the file declares no parameter {k:?}"
                )))
            }
        }
    }
    let n = doc.n.ok_or_else(|| err(0, "missing `n:` header"))?;
    doc.check_constraints(n)?;
    if let Some((lhs, _, line)) = doc.equations.iter().find(|(l, _, _)| l != "L") {
        return Err(err(
            *line,
            format!("unexpected equation {lhs:?}; a Lagrangian file defines only L"),
        ));
    }
    let (src, line) = doc.equation("L").ok_or_else(|| err(0, "missing `L = ...` line"))?;
    let def = LagrangianDef::parse(src, n, &doc.params).map_err(|e| match e {
        Error::Parse(p) => err(line, format!("{p}")),
        other => other,
    })?;
    if let Some(order) = doc.order {
        if order != def.order {
            return Err(err(
                0,
                format!("declared order {order} but the body is of order {}", def.order),
            ));
        }
    }
    Ok(def
        .with_name(doc.name.unwrap_or_else(|| "L".to_string()))
        .with_constraints(doc.constraints))
}

fn one_based(ks: &[usize]) -> String {
    ks.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(" ")
}

/// Writes a Lagrangian in `.lag` format; [`read_lag`] reads it back.
pub fn write_lag(def: &LagrangianDef) -> String {
    let mut out = format!("name: {}\nn: {}\norder: {}\n", def.name, def.n, def.order);
    for (k, v) in &def.params {
        out.push_str(&format!("param {k} = {v:?}\n"));
    }
    for c in &def.constraints {
        match c {
            Constraint::Positive(k) => out.push_str(&format!("positive: {}\n", k + 1)),
            Constraint::UnitVector(ks) => out.push_str(&format!("unit: {}\n", one_based(ks))),
            Constraint::Regular(ks) => out.push_str(&format!("regular: {}\n", one_based(ks))),
        }
    }
    out.push_str(&format!("L = {}\n", def.body));
    out
}
