//! Spherical angles of a direction and the polar jet `(r, theta, xi, eta)`
//! of a velocity/acceleration pair.
//!
//! The unit direction is
//! `(cos t1, sin t1 cos t2, ..., sin t1 ... sin t(n-2) cos t(n-1), sin t1 ... sin t(n-1))`
//! with `t1..t(n-2)` in `(0, pi)` and `t(n-1)` in `(-pi, pi]`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Largest accepted condition number of the angular Gram matrix.
pub const MAX_CONDITION: f64 = 1e12;
/// Random directions with some `|sin t_k|` below this are redrawn.
pub const POLE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalDirection {
    pub r: f64,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarJet {
    pub r: f64,
    pub theta: Vec<f64>,
    /// `p . q / r^2`
    pub xi: f64,
    /// `theta'`
    pub eta: Vec<f64>,
}

fn check_dim(n: usize) -> Result<(), Error> {
    if n < 2 {
        return Err(Error::Dimension {
            what: "direction".into(),
            expected: 2,
            got: n,
        });
    }
    Ok(())
}

/// Unit vector with angles `theta` (`n - 1` of them).
pub fn unit_direction(theta: &[f64]) -> Vec<f64> {
    let n = theta.len() + 1;
    let mut out = Vec::with_capacity(n);
    let mut prod = 1.0;
    for t in theta {
        out.push(prod * t.cos());
        prod *= t.sin();
    }
    out.push(prod);
    out
}

/// `d p_hat / d theta`, an `n x (n-1)` matrix.
pub fn direction_jacobian(theta: &[f64]) -> DMatrix<f64> {
    let m = theta.len();
    let n = m + 1;
    let (sin, cos): (Vec<f64>, Vec<f64>) = theta.iter().map(|t| t.sin_cos()).unzip();
    DMatrix::from_fn(n, m, |i, k| {
        if k > i {
            return 0.0;
        }
        let last = if i < m { cos[i] } else { 1.0 };
        if k == i {
            // only reachable for i < m
            let prod: f64 = sin[..i].iter().product();
            return -prod * sin[i];
        }
        let prod: f64 = (0..i).map(|j| if j == k { cos[j] } else { sin[j] }).product();
        prod * last
    })
}

pub fn from_spherical(d: &SphericalDirection) -> Vec<f64> {
    unit_direction(&d.theta).into_iter().map(|x| d.r * x).collect()
}

/// Angles by successive `atan2`; fails at `p = 0` and where the last two
/// components both vanish (`n >= 3`), since later angles are then undefined.
pub fn to_spherical(p: &[f64]) -> Result<SphericalDirection, Error> {
    let n = p.len();
    check_dim(n)?;
    // tail[k] = |(p_k, ..., p_{n-1})|
    let mut tail = vec![0.0f64; n + 1];
    for k in (0..n).rev() {
        tail[k] = tail[k + 1].hypot(p[k]);
    }
    if tail[0] == 0.0 || (n >= 3 && tail[n - 2] == 0.0) {
        return Err(Error::DegenerateDirection);
    }
    let mut theta: Vec<f64> = (0..n - 2).map(|k| tail[k + 1].atan2(p[k])).collect();
    theta.push(p[n - 1].atan2(p[n - 2]));
    Ok(SphericalDirection { r: tail[0], theta })
}

/// `(r, theta, xi, eta)` from `p = u'` and `q = u''`.
///
/// `eta` solves `r J eta = q - xi p` (`J` the direction jacobian) through
/// its Gram system.
pub fn to_polar_jet(p: &[f64], q: &[f64]) -> Result<PolarJet, Error> {
    let n = p.len();
    if q.len() != n {
        return Err(Error::Dimension {
            what: "q".into(),
            expected: n,
            got: q.len(),
        });
    }
    let SphericalDirection { r, theta } = to_spherical(p)?;
    let xi = p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() / (r * r);
    let j = direction_jacobian(&theta);
    let rhs = DVector::from_iterator(n, p.iter().zip(q).map(|(a, b)| (b - xi * a) / r));
    let gram = j.transpose() * &j;
    let eig = gram.clone().symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let cond = hi / lo;
    if !(lo > 0.0 && cond <= MAX_CONDITION) {
        return Err(Error::SingularJacobian(cond));
    }
    let eta = gram
        .lu()
        .solve(&(j.transpose() * rhs))
        .ok_or(Error::SingularJacobian(cond))?;
    Ok(PolarJet {
        r,
        theta,
        xi,
        eta: eta.iter().copied().collect(),
    })
}

/// `p = r p_hat`, `q = r xi p_hat + r J eta`.
pub fn from_polar_jet(pj: &PolarJet) -> (Vec<f64>, Vec<f64>) {
    let dir = unit_direction(&pj.theta);
    let j = direction_jacobian(&pj.theta);
    let turn = j * DVector::from_column_slice(&pj.eta);
    let p = dir.iter().map(|x| pj.r * x).collect();
    let q = dir
        .iter()
        .zip(turn.iter())
        .map(|(d, t)| pj.r * (pj.xi * d + t))
        .collect();
    (p, q)
}

/// Plane closed forms: `xi = p.q/|p|^2`, `eta = (p1 q2 - p2 q1)/|p|^2`.
pub fn polar_jet_2d(p: [f64; 2], q: [f64; 2]) -> Result<PolarJet, Error> {
    let r2 = p[0] * p[0] + p[1] * p[1];
    if r2 == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    Ok(PolarJet {
        r: r2.sqrt(),
        theta: vec![p[1].atan2(p[0])],
        xi: (p[0] * q[0] + p[1] * q[1]) / r2,
        eta: vec![(p[0] * q[1] - p[1] * q[0]) / r2],
    })
}

/// Uniformly random unit vector, redrawn while any of its angles lies
/// within [`POLE_MARGIN`] of a chart pole.
pub fn random_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(0.3..=1.0).contains(&norm) {
            continue;
        }
        let v: Vec<f64> = v.into_iter().map(|x| x / norm).collect();
        if let Ok(d) = to_spherical(&v) {
            if d.theta[..n - 2].iter().all(|t| t.sin().abs() >= POLE_MARGIN) {
                return v;
            }
        }
    }
}
