use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::jet::{dot, CurveJet};
use crate::dsl::{Constraint, LagrangianDef};
use crate::error::Error;
use crate::jet::{Scalar, Taylor};

/// A curve as a function of a Taylor series in the parameter; evaluating
/// at `s + h` yields all derivatives at `s` at once.
pub type CurveFn = Arc<dyn Fn(Taylor) -> Result<Vec<Taylor>, Error> + Send + Sync>;

/// A curve on `[0, 1]`.
#[derive(Clone)]
pub enum CurveSpec {
    Analytic {
        name: String,
        n: usize,
        f: CurveFn,
    },
    Fourier(FourierCurve),
    Grid(GridCurve),
    /// `base o w` for a boundary-fixing diffeomorphism `w`.
    Reparametrized {
        base: Box<CurveSpec>,
        diffeo: Diffeo,
    },
}

impl fmt::Debug for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSpec::Analytic { name, n, .. } => write!(f, "Analytic({name}, n={n})"),
            CurveSpec::Fourier(c) => f.debug_tuple("Fourier").field(c).finish(),
            CurveSpec::Grid(g) => write!(f, "Grid({} knots, n={})", g.knots.len(), g.values.len()),
            CurveSpec::Reparametrized { base, diffeo } => write!(f, "{base:?} o {diffeo:?}"),
        }
    }
}

impl CurveSpec {
    pub fn analytic(
        name: impl Into<String>,
        n: usize,
        f: impl Fn(Taylor) -> Result<Vec<Taylor>, Error> + Send + Sync + 'static,
    ) -> Self {
        CurveSpec::Analytic {
            name: name.into(),
            n,
            f: Arc::new(f),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            CurveSpec::Analytic { n, .. } => *n,
            CurveSpec::Fourier(c) => c.start.len(),
            CurveSpec::Grid(g) => g.values.len(),
            CurveSpec::Reparametrized { base, .. } => base.n(),
        }
    }

    pub fn eval(&self, t: Taylor) -> Result<Vec<Taylor>, Error> {
        let out = match self {
            CurveSpec::Analytic { f, .. } => f(t)?,
            CurveSpec::Fourier(c) => c.eval(t)?,
            CurveSpec::Grid(g) => g.eval(t),
            CurveSpec::Reparametrized { base, diffeo } => base.eval(diffeo.eval(t))?,
        };
        if out.len() != self.n() {
            return Err(Error::Dimension {
                what: "curve value".into(),
                expected: self.n(),
                got: out.len(),
            });
        }
        Ok(out)
    }

    /// Derivatives up to `order` (at most 4); higher ones are left zero.
    pub fn jet_to(&self, s: f64, order: usize) -> Result<CurveJet, Error> {
        let vals = self.eval(Taylor::variable(s, order))?;
        let d = |k: usize| -> Vec<f64> {
            if k <= order {
                vals.iter().map(|v| v.derivative(k)).collect()
            } else {
                vec![0.0; vals.len()]
            }
        };
        Ok(CurveJet {
            s,
            u: d(0),
            du: d(1),
            d2u: d(2),
            d3u: d(3),
            d4u: d(4),
        })
    }

    pub fn jet(&self, s: f64) -> Result<CurveJet, Error> {
        self.jet_to(s, 4)
    }

    pub fn position(&self, s: f64) -> Result<Vec<f64>, Error> {
        Ok(self.eval(Taylor::constant(s, 0))?.iter().map(|v| v.coeff(0)).collect())
    }

    pub fn reparametrize(&self, diffeo: Diffeo) -> CurveSpec {
        CurveSpec::Reparametrized {
            base: Box::new(self.clone()),
            diffeo,
        }
    }
}

/// `w(t) = t + a sin(pi k t)/(pi k)`; fixes 0 and 1, increasing for `|a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diffeo {
    pub a: f64,
    pub k: u32,
}

impl Diffeo {
    pub fn new(a: f64, k: u32) -> Result<Self, Error> {
        if a.is_nan() || a.abs() >= 1.0 || k == 0 {
            return Err(Error::Curve(format!(
                "w(t) = t + {a} sin({k} pi t)/({k} pi) is not a diffeomorphism"
            )));
        }
        Ok(Diffeo { a, k })
    }

    pub fn eval<T: Scalar>(&self, t: T) -> T {
        let w = PI * self.k as f64;
        t + t.scale(w).sin().scale(self.a / w)
    }
}

/// Affine part plus sine modes, optionally with groups of components
/// normalised to unit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCurve {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    /// `modes[i][k - 1]` multiplies `sin(k pi s)` in component `i`.
    pub modes: Vec<Vec<f64>>,
    #[serde(default)]
    pub unit_groups: Vec<Vec<usize>>,
}

impl FourierCurve {
    pub fn eval<T: Scalar>(&self, t: T) -> Result<Vec<T>, Error> {
        let mut out: Vec<T> = (0..self.start.len())
            .map(|i| {
                let mut v = T::from_f64(self.start[i]) + t.scale(self.end[i] - self.start[i]);
                for (k, c) in self.modes[i].iter().enumerate() {
                    v = v + t.scale(PI * (k + 1) as f64).sin().scale(*c);
                }
                v
            })
            .collect();
        for g in &self.unit_groups {
            let norm = g
                .iter()
                .fold(T::from_f64(0.0), |acc, &j| acc + out[j] * out[j])
                .sqrt()?;
            for &j in g {
                out[j] = out[j].try_div(norm)?;
            }
        }
        Ok(out)
    }
}

/// Natural cubic spline through samples, evaluated exactly on Taylor input.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCurve {
    pub knots: Vec<f64>,
    /// `values[i][j]`: component `i` at knot `j`.
    pub values: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl GridCurve {
    pub fn new(knots: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self, Error> {
        let m = knots.len();
        if m < 3 {
            return Err(Error::Curve("a grid curve needs at least three knots".into()));
        }
        if knots
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::Curve("grid knots must be strictly increasing".into()));
        }
        if values.is_empty() || values.iter().any(|v| v.len() != m) {
            return Err(Error::Curve("every component needs one value per knot".into()));
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = DMatrix::zeros(m, m);
        a[(0, 0)] = 1.0;
        a[(m - 1, m - 1)] = 1.0;
        for i in 1..m - 1 {
            a[(i, i - 1)] = h[i - 1] / 6.0;
            a[(i, i)] = (h[i - 1] + h[i]) / 3.0;
            a[(i, i + 1)] = h[i] / 6.0;
        }
        let lu = a.lu();
        let second = values
            .iter()
            .map(|y| {
                let mut rhs = DVector::zeros(m);
                for i in 1..m - 1 {
                    rhs[i] = (y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1];
                }
                lu.solve(&rhs)
                    .map(|v| v.iter().copied().collect())
                    .ok_or_else(|| Error::Curve("spline system is singular".into()))
            })
            .collect::<Result<_, _>>()?;
        Ok(GridCurve { knots, values, second })
    }

    /// Uniform knots `j/(m-1)`.
    pub fn uniform(values: Vec<Vec<f64>>) -> Result<Self, Error> {
        let m = values.first().map_or(0, Vec::len);
        let knots = (0..m).map(|j| j as f64 / (m.max(2) - 1) as f64).collect();
        GridCurve::new(knots, values)
    }

    pub fn eval<T: Scalar>(&self, t: T) -> Vec<T> {
        let x = t.re();
        let m = self.knots.len();
        let j = self.knots[1..m - 1].partition_point(|&k| k <= x);
        let (s0, s1) = (self.knots[j], self.knots[j + 1]);
        let h = s1 - s0;
        let a = (T::from_f64(s1) - t).scale(1.0 / h);
        let b = (t - T::from_f64(s0)).scale(1.0 / h);
        let cube = |z: T| z * z * z - z;
        self.values
            .iter()
            .zip(&self.second)
            .map(|(y, m2)| {
                a.scale(y[j]) + b.scale(y[j + 1]) + (cube(a).scale(m2[j]) + cube(b).scale(m2[j + 1])).scale(h * h / 6.0)
            })
            .collect()
    }
}

/// Draws random regular curves from a seed.
///
/// Each component is an affine part between random endpoints plus up to
/// six sine modes with amplitudes decaying like `1/k^2`. Draws are rejected
/// until the speed never drops below a tenth of its maximum (and the
/// per-group conditions below hold) on a fine grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSampler {
    pub n: usize,
    pub modes: usize,
    /// Components kept above [`CurveSampler::POSITIVE_MIN`].
    pub positive: Vec<usize>,
    /// Component groups normalised to unit vectors.
    pub unit_groups: Vec<Vec<usize>>,
    /// Component groups that must trace a regular curve on their own.
    pub regular_groups: Vec<Vec<usize>>,
}

impl CurveSampler {
    pub const MAX_MODES: usize = 6;
    pub const SPEED_RATIO: f64 = 0.1;
    pub const MAX_ATTEMPTS: usize = 100;
    pub const POSITIVE_MIN: f64 = 0.2;
    const GRID: usize = 200;

    pub fn new(n: usize, modes: usize) -> Self {
        CurveSampler {
            n,
            modes: modes.min(Self::MAX_MODES),
            positive: Vec::new(),
            unit_groups: Vec::new(),
            regular_groups: Vec::new(),
        }
    }

    /// Sampler honouring the constraints attached to `def`.
    pub fn for_def(def: &LagrangianDef, modes: usize) -> Self {
        let mut s = CurveSampler::new(def.n, modes);
        for c in &def.constraints {
            match c {
                Constraint::Positive(k) => s.positive.push(*k),
                Constraint::UnitVector(g) => s.unit_groups.push(g.clone()),
                Constraint::Regular(g) => s.regular_groups.push(g.clone()),
            }
        }
        s
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> FourierCurve {
        let mut start = Vec::with_capacity(self.n);
        let mut end = Vec::with_capacity(self.n);
        let mut modes = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let (lo, hi, amp) = if self.positive.contains(&i) {
                (0.6, 1.6, 0.15)
            } else {
                (-1.0, 1.0, 0.25)
            };
            start.push(rng.gen_range(lo..hi));
            end.push(rng.gen_range(lo..hi));
            modes.push(
                (1..=self.modes)
                    .map(|k| amp * rng.gen_range(-1.0..1.0) / (k * k) as f64)
                    .collect(),
            );
        }
        FourierCurve {
            start,
            end,
            modes,
            unit_groups: self.unit_groups.clone(),
        }
    }

    fn admissible(&self, c: &FourierCurve) -> Result<bool, Error> {
        let raw = FourierCurve {
            unit_groups: Vec::new(),
            ..c.clone()
        };
        let mut groups: Vec<Vec<usize>> = vec![(0..self.n).collect()];
        groups.extend(self.regular_groups.iter().cloned());
        let mut speeds = vec![(f64::INFINITY, 0.0f64); groups.len()];
        for j in 0..=Self::GRID {
            let s = j as f64 / Self::GRID as f64;
            let t = Taylor::variable(s, 1);
            for g in &self.unit_groups {
                let r = raw.eval(t)?;
                if g.iter().map(|&k| r[k].coeff(0).powi(2)).sum::<f64>().sqrt() < 0.3 {
                    return Ok(false);
                }
            }
            let v = match c.eval(t) {
                Ok(v) => v,
                Err(_) => return Ok(false),
            };
            if self.positive.iter().any(|&k| v[k].coeff(0) < Self::POSITIVE_MIN) {
                return Ok(false);
            }
            for (g, (lo, hi)) in groups.iter().zip(speeds.iter_mut()) {
                let sp = g.iter().map(|&k| v[k].coeff(1).powi(2)).sum::<f64>().sqrt();
                *lo = lo.min(sp);
                *hi = hi.max(sp);
            }
        }
        Ok(speeds.iter().all(|&(lo, hi)| hi > 1e-3 && lo >= Self::SPEED_RATIO * hi))
    }

    pub fn sample_fourier(&self, seed: u64) -> Result<FourierCurve, Error> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..Self::MAX_ATTEMPTS {
            let c = self.draw(&mut rng);
            if self.admissible(&c)? {
                return Ok(c);
            }
        }
        Err(Error::SamplerExhausted(Self::MAX_ATTEMPTS))
    }

    pub fn sample(&self, seed: u64) -> Result<CurveSpec, Error> {
        Ok(CurveSpec::Fourier(self.sample_fourier(seed)?))
    }
}

/// Random regular curve in `R^n` with `modes` sine modes per component.
pub fn random_regular_curve(seed: u64, n: usize, modes: usize) -> Result<CurveSpec, Error> {
    CurveSampler::new(n, modes).sample(seed)
}

/// Random variation `sin(pi s)^2 * sum_k c_k sin(k pi s)`; it vanishes at
/// both ends together with its first derivative.
pub fn random_variation(seed: u64, n: usize, modes: usize) -> CurveSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_7a41);
    let coeffs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (1..=modes.max(1))
                .map(|k| rng.gen_range(-1.0..1.0) / k as f64)
                .collect()
        })
        .collect();
    CurveSpec::analytic(format!("variation:{seed}"), n, move |t| {
        let bump = t.scale(PI).sin();
        let bump = bump * bump;
        Ok(coeffs
            .iter()
            .map(|cs| {
                let mut v = Taylor::constant(0.0, t.order());
                for (k, c) in cs.iter().enumerate() {
                    v = v + t.scale(PI * (k + 1) as f64).sin().scale(*c);
                }
                bump * v
            })
            .collect())
    })
}

/// Straight segment from `a` to `b`.
pub fn line(a: Vec<f64>, b: Vec<f64>) -> CurveSpec {
    let n = a.len();
    CurveSpec::analytic("line", n, move |t| {
        Ok(a.iter()
            .zip(&b)
            .map(|(x, y)| Taylor::constant(*x, t.order()) + t.scale(y - x))
            .collect())
    })
}

/// `(s, s^2)`
pub fn parabola() -> CurveSpec {
    CurveSpec::analytic("parabola", 2, |t| Ok(vec![t, t * t]))
}

/// `(cos 2 pi s, sin 2 pi s)`
pub fn unit_circle() -> CurveSpec {
    CurveSpec::analytic("unit-circle", 2, |t| {
        let w = t.scale(2.0 * PI);
        Ok(vec![w.cos(), w.sin()])
    })
}

/// Catenary profile `(cosh y, y)` with `y = 2s - 1`.
pub fn catenoid() -> CurveSpec {
    CurveSpec::analytic("catenoid", 2, |t| {
        let y = t.scale(2.0) - Taylor::constant(1.0, t.order());
        Ok(vec![y.cosh(), y])
    })
}

/// Meridian of the unit sphere, `(sin pi s, -cos pi s)`.
pub fn sphere() -> CurveSpec {
    CurveSpec::analytic("sphere", 2, |t| {
        let w = t.scale(PI);
        Ok(vec![w.sin(), -w.cos()])
    })
}

/// `(1, s)`
pub fn cylinder() -> CurveSpec {
    CurveSpec::analytic("cylinder", 2, |t| Ok(vec![Taylor::constant(1.0, t.order()), t]))
}

/// Looks up a named curve: `line`, `parabola`, `unit-circle`, `catenoid`,
/// `sphere`, `cylinder` or `random:<seed>`. `line` and `random` take the
/// dimension from `n`; the others are planar.
pub fn by_name(name: &str, n: usize) -> Result<CurveSpec, Error> {
    if let Some(seed) = name.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| Error::Curve(format!("bad seed in {name:?}")))?;
        return random_regular_curve(seed, n, 4);
    }
    if name == "line" {
        return Ok(line(vec![0.0; n], vec![1.0; n]));
    }
    let curve = match name {
        "parabola" => parabola(),
        "unit-circle" => unit_circle(),
        "catenoid" => catenoid(),
        "sphere" => sphere(),
        "cylinder" => cylinder(),
        _ => return Err(Error::Curve(format!("unknown curve {name:?}"))),
    };
    if n != 2 {
        return Err(Error::Curve(format!("curve {name} is planar, dimension {n} requested")));
    }
    Ok(curve)
}

/// Smallest and largest speed on a uniform grid of `m + 1` points.
pub fn speed_range(curve: &CurveSpec, m: usize) -> Result<(f64, f64), Error> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for j in 0..=m {
        let jet = curve.jet_to(j as f64 / m as f64, 1)?;
        let sp = dot(&jet.du, &jet.du).sqrt();
        lo = lo.min(sp);
        hi = hi.max(sp);
    }
    Ok((lo, hi))
}
