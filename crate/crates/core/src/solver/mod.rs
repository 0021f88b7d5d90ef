//! Boundary-value solver for Euler-Lagrange equations on a uniform grid.
//!
//! Derivatives are second-order central differences; clamped slopes enter
//! through ghost nodes `u(-h) = u(h) - 2h u'(0)` and
//! `u(1+h) = u(1-h) + 2h u'(1)`. The Jacobian is assembled column by column
//! by seeding one grid unknown with a dual perturbation.
//!
//! T-Lagrangians have an identically vanishing tangential equation, so the
//! full system is singular. The graph gauge ties component `k` to the
//! parameter and drops the `k`-th equation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::classifier::{test_t, Verdict};
use crate::dsl::LagrangianDef;
use crate::error::Error;
use crate::jet::{Dual, Scalar};
use crate::variational::csv::ProfileRow;
use crate::variational::{el_terms, euler_lagrange, CurveJet, CurveSpec, REGULARITY_FLOOR};

pub const MAX_ITERATIONS: usize = 50;
/// Scaled residual at which a solve counts as converged.
pub const SOLVE_TOL: f64 = 1e-8;
const STEP_TOL: f64 = 1e-10;
const MIN_DAMPING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// every component is unknown; all equations are imposed
    Full,
    /// `u_k(s) = a + (b - a) s` (zero-based `k`)
    Graph(usize),
}

/// End values, plus end slopes for second-order Lagrangians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    #[serde(default)]
    pub start_slope: Option<Vec<f64>>,
    #[serde(default)]
    pub end_slope: Option<Vec<f64>>,
}

impl Boundary {
    pub fn dirichlet(start: Vec<f64>, end: Vec<f64>) -> Self {
        Boundary {
            start,
            end,
            start_slope: None,
            end_slope: None,
        }
    }

    pub fn clamped(start: Vec<f64>, end: Vec<f64>, start_slope: Vec<f64>, end_slope: Vec<f64>) -> Self {
        Boundary {
            start,
            end,
            start_slope: Some(start_slope),
            end_slope: Some(end_slope),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BvpProblem {
    pub def: LagrangianDef,
    pub boundary: Boundary,
    /// Grid points including both ends.
    pub m: usize,
    pub gauge: Gauge,
    pub tol: f64,
}

/// `(slope at s = 0, slope at s = 1)`.
type EndSlopes = (Vec<f64>, Vec<f64>);

impl BvpProblem {
    pub fn new(def: LagrangianDef, boundary: Boundary, m: usize, gauge: Gauge) -> Self {
        BvpProblem {
            def,
            boundary,
            m,
            gauge,
            tol: SOLVE_TOL,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        let n = self.def.n;
        let b = &self.boundary;
        self.def.check_dims("boundary start", b.start.len())?;
        self.def.check_dims("boundary end", b.end.len())?;
        let min_m = if self.def.is_second_order() { 5 } else { 3 };
        if self.m < min_m {
            return Err(Error::InvalidDefinition(format!("grid needs at least {min_m} points")));
        }
        match (&b.start_slope, &b.end_slope, self.def.is_second_order()) {
            (Some(a), Some(e), true) => {
                self.def.check_dims("boundary start slope", a.len())?;
                self.def.check_dims("boundary end slope", e.len())?;
            }
            (_, _, true) => {
                return Err(Error::InvalidDefinition(
                    "second-order problems need slopes at both ends".into(),
                ))
            }
            (None, None, false) => {}
            (_, _, false) => {
                return Err(Error::InvalidDefinition(
                    "first-order problems take no end slopes".into(),
                ))
            }
        }
        if let Gauge::Graph(k) = self.gauge {
            if k >= n {
                return Err(Error::Gauge(format!("component {} does not exist", k + 1)));
            }
            if n < 2 {
                return Err(Error::Gauge("graph gauge needs at least two components".into()));
            }
            if b.start[k] == b.end[k] {
                return Err(Error::Gauge(format!(
                    "component {} has equal end values, so it cannot serve as the parameter",
                    k + 1
                )));
            }
        }
        if self.tol.is_nan() || self.tol < 1e-14 {
            return Err(Error::InvalidDefinition("tolerance must be at least 1e-14".into()));
        }
        Ok(())
    }

    /// End slopes with the gauge component's slope forced to `b - a`.
    fn slopes(&self) -> Result<Option<EndSlopes>, Error> {
        let b = &self.boundary;
        let (Some(s0), Some(s1)) = (&b.start_slope, &b.end_slope) else {
            return Ok(None);
        };
        let Gauge::Graph(k) = self.gauge else {
            return Ok(Some((s0.clone(), s1.clone())));
        };
        let rate = b.end[k] - b.start[k];
        let rescale = |v: &Vec<f64>, which: &str| {
            if v[k] * rate <= 0.0 {
                return Err(Error::Gauge(format!(
                    "{which} slope of component {} must be nonzero and point from start to end",
                    k + 1
                )));
            }
            Ok(v.iter().map(|x| x * rate / v[k]).collect::<Vec<f64>>())
        };
        Ok(Some((rescale(s0, "start")?, rescale(s1, "end")?)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BvpSolution {
    pub s: Vec<f64>,
    /// `u[i][j]`: component `j` at grid point `i`.
    pub u: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    /// Scaled residual at each iterate.
    pub residual_history: Vec<f64>,
    /// Scaled normal residual (graph gauge) or full residual (full gauge).
    pub max_residual: f64,
    pub max_normal: f64,
    pub max_tangential: f64,
    pub gauge: Gauge,
    /// Effective end slopes, for second-order problems.
    pub slopes: Option<(Vec<f64>, Vec<f64>)>,
}

impl BvpSolution {
    fn grid(&self) -> Grid<'_> {
        Grid {
            u: &self.u,
            h: 1.0 / (self.u.len() - 1) as f64,
            slopes: self.slopes.as_ref(),
        }
    }

    /// Finite-difference jets at the interior grid points.
    pub fn interior_jets(&self) -> Vec<CurveJet> {
        let g = self.grid();
        let order = if self.slopes.is_some() { 2 } else { 1 };
        (1..self.u.len() - 1).map(|i| g.jet(i, order)).collect()
    }

    pub fn to_csv(&self) -> String {
        let n = self.u.first().map_or(0, Vec::len);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["s".to_string()];
        header.extend((1..=n).map(|j| format!("u{j}")));
        w.write_record(&header).expect("in-memory write");
        for (s, row) in self.s.iter().zip(&self.u) {
            let rec = std::iter::once(s).chain(row).map(|x| format!("{x:e}"));
            w.write_record(rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Iterations, convergence flag and residual history as JSON.
    pub fn log_json(&self) -> String {
        let log = serde_json::json!({
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_history": self.residual_history,
            "max_residual": self.max_residual,
            "max_normal": self.max_normal,
            "max_tangential": self.max_tangential,
            "gauge": self.gauge,
            "grid_points": self.s.len(),
        });
        serde_json::to_string_pretty(&log).expect("log serialises")
    }
}

struct Grid<'a> {
    u: &'a [Vec<f64>],
    h: f64,
    slopes: Option<&'a (Vec<f64>, Vec<f64>)>,
}

impl Grid<'_> {
    fn m(&self) -> usize {
        self.u.len()
    }

    /// Value at node `l`, with ghost nodes at `-1` and `m`.
    fn at(&self, l: isize, j: usize) -> f64 {
        let m = self.m() as isize;
        match (l, self.slopes) {
            (-1, Some((s0, _))) => self.u[1][j] - 2.0 * self.h * s0[j],
            (l, Some((_, s1))) if l == m => self.u[m as usize - 2][j] + 2.0 * self.h * s1[j],
            (l, _) => self.u[l as usize][j],
        }
    }

    /// Whether node `l` moves with grid unknown `(a, j)`, with unit weight.
    fn depends(&self, l: isize, a: usize) -> bool {
        let m = self.m() as isize;
        l == a as isize || (l == -1 && a == 1) || (l == m && a as isize == m - 2)
    }

    fn stencil<S: Scalar + Perturb>(&self, i: usize, order: usize, seed: Option<(usize, usize)>) -> [Vec<S>; 5] {
        let n = self.u[0].len();
        let h = self.h;
        let width = if order == 2 { 2 } else { 1 };
        let val = |l: isize, j: usize| -> S {
            let x = S::from_f64(self.at(l, j));
            match seed {
                Some((a, sj)) if sj == j && self.depends(l, a) => x + S::unit_perturbation(),
                _ => x,
            }
        };
        let i = i as isize;
        let mut d: [Vec<S>; 5] = std::array::from_fn(|_| Vec::with_capacity(n));
        for j in 0..n {
            let w: Vec<S> = (-width..=width).map(|o| val(i + o, j)).collect();
            let c = width as usize;
            let (um, u0, up) = (w[c - 1], w[c], w[c + 1]);
            d[0].push(u0);
            d[1].push((up - um).scale(0.5 / h));
            d[2].push((up - u0.scale(2.0) + um).scale(1.0 / (h * h)));
            if order == 2 {
                let (umm, upp) = (w[0], w[4]);
                d[3].push((upp - up.scale(2.0) + um.scale(2.0) - umm).scale(0.5 / (h * h * h)));
                d[4].push((upp - up.scale(4.0) + u0.scale(6.0) - um.scale(4.0) + umm).scale(1.0 / (h * h * h * h)));
            } else {
                d[3].push(S::from_f64(0.0));
                d[4].push(S::from_f64(0.0));
            }
        }
        d
    }

    fn jet(&self, i: usize, order: usize) -> CurveJet {
        let [u, du, d2u, d3u, d4u] = self.stencil::<f64>(i, order, None);
        CurveJet {
            s: i as f64 * self.h,
            u,
            du,
            d2u,
            d3u,
            d4u,
        }
    }
}

/// Seeds a unit dual perturbation.
trait Perturb {
    fn unit_perturbation() -> Self;
}

impl Perturb for f64 {
    fn unit_perturbation() -> Self {
        0.0
    }
}

impl Perturb for Dual<f64> {
    fn unit_perturbation() -> Self {
        Dual::new(0.0, 1.0)
    }
}

struct Evaluation {
    /// imposed equations, node-major
    f: Vec<f64>,
    max_residual: f64,
    max_normal: f64,
    max_tangential: f64,
    min_speed: f64,
}

struct Assembler<'a> {
    problem: &'a BvpProblem,
    order: usize,
    free: Vec<usize>,
    slopes: Option<(Vec<f64>, Vec<f64>)>,
}

impl<'a> Assembler<'a> {
    fn grid<'g>(&'g self, u: &'g [Vec<f64>]) -> Grid<'g> {
        Grid {
            u,
            h: 1.0 / (u.len() - 1) as f64,
            slopes: self.slopes.as_ref(),
        }
    }

    fn evaluate(&self, u: &[Vec<f64>]) -> Result<Evaluation, Error> {
        let g = self.grid(u);
        let def = &self.problem.def;
        let mut ev = Evaluation {
            f: Vec::with_capacity((u.len() - 2) * self.free.len()),
            max_residual: 0.0,
            max_normal: 0.0,
            max_tangential: 0.0,
            min_speed: f64::INFINITY,
        };
        for i in 1..u.len() - 1 {
            let jet = g.jet(i, self.order);
            ev.min_speed = ev.min_speed.min(jet.speed());
            let r = euler_lagrange(def, &jet)?;
            ev.f.extend(self.free.iter().map(|&j| r.residual[j]));
            ev.max_normal = ev.max_normal.max(r.scaled_normal());
            ev.max_tangential = ev.max_tangential.max(r.scaled_tangential());
            let scaled = match self.problem.gauge {
                Gauge::Full => r.scaled_residual(),
                Gauge::Graph(_) => r.scaled_normal(),
            };
            ev.max_residual = ev.max_residual.max(scaled);
        }
        Ok(ev)
    }

    fn jacobian(&self, u: &[Vec<f64>]) -> Result<DMatrix<f64>, Error> {
        let g = self.grid(u);
        let m = u.len();
        let nf = self.free.len();
        let size = (m - 2) * nf;
        let width = if self.order == 2 { 2 } else { 1 };
        let def = &self.problem.def;
        let mut jac = DMatrix::zeros(size, size);
        for a in 1..m - 1 {
            for (cj, &j) in self.free.iter().enumerate() {
                let col = (a - 1) * nf + cj;
                let lo = a.saturating_sub(width).max(1);
                let hi = (a + width).min(m - 2);
                for i in lo..=hi {
                    let [u0, d1, d2, d3, d4] = g.stencil::<Dual<f64>>(i, self.order, Some((a, j)));
                    let s = Dual::constant(i as f64 * g.h);
                    let e = el_terms(def, s, [&u0, &d1, &d2, &d3, &d4])?.residual();
                    for (ri, &eq) in self.free.iter().enumerate() {
                        jac[((i - 1) * nf + ri, col)] = e[eq].perturbation;
                    }
                }
            }
        }
        Ok(jac)
    }

    fn apply(&self, u: &[Vec<f64>], step: &DVector<f64>, alpha: f64) -> Vec<Vec<f64>> {
        let nf = self.free.len();
        let mut out = u.to_vec();
        for i in 1..u.len() - 1 {
            for (cj, &j) in self.free.iter().enumerate() {
                out[i][j] += alpha * step[(i - 1) * nf + cj];
            }
        }
        out
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn initial_grid(problem: &BvpProblem, init: Option<&CurveSpec>) -> Result<Vec<Vec<f64>>, Error> {
    let m = problem.m;
    let b = &problem.boundary;
    let mut u: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let s = i as f64 / (m - 1) as f64;
            match init {
                Some(c) => c.position(s),
                None => Ok(b.start.iter().zip(&b.end).map(|(a, e)| a + (e - a) * s).collect()),
            }
        })
        .collect::<Result<_, Error>>()?;
    if let Some(c) = init {
        problem.def.check_dims("initial curve", c.n())?;
    }
    u[0] = b.start.clone();
    u[m - 1] = b.end.clone();
    if let Gauge::Graph(k) = problem.gauge {
        for (i, row) in u.iter_mut().enumerate() {
            let s = i as f64 / (m - 1) as f64;
            row[k] = b.start[k] + (b.end[k] - b.start[k]) * s;
        }
    }
    Ok(u)
}

/// Damped Newton on the collocation equations, from `init` or the linear
/// interpolant of the end values.
pub fn solve(problem: &BvpProblem, init: Option<&CurveSpec>) -> Result<BvpSolution, Error> {
    problem.validate()?;
    let def = &problem.def;
    let n = def.n;
    if let Gauge::Graph(_) = problem.gauge {
        let t = test_t(def, 3, 42)?;
        if t.verdict != Verdict::Pass {
            return Err(Error::Gauge(format!(
                "graph gauge needs a T-Lagrangian; tangential residual {:e} on a random curve",
                t.max_residual
            )));
        }
    }
    let free: Vec<usize> = match problem.gauge {
        Gauge::Full => (0..n).collect(),
        Gauge::Graph(k) => (0..n).filter(|&j| j != k).collect(),
    };
    let asm = Assembler {
        problem,
        order: def.order as usize,
        free,
        slopes: problem.slopes()?,
    };
    let mut u = initial_grid(problem, init)?;
    let mut ev = asm.evaluate(&u)?;
    let mut history = vec![ev.max_residual];
    let mut last_step = f64::INFINITY;
    let mut iterations = 0;

    let finish = |u: Vec<Vec<f64>>, ev: &Evaluation, history: Vec<f64>, iterations: usize, converged: bool| {
        let m = u.len();
        BvpSolution {
            s: (0..m).map(|i| i as f64 / (m - 1) as f64).collect(),
            u,
            iterations,
            converged,
            residual_history: history,
            max_residual: ev.max_residual,
            max_normal: ev.max_normal,
            max_tangential: ev.max_tangential,
            gauge: problem.gauge,
            slopes: asm.slopes.clone(),
        }
    };

    loop {
        let done = ev.max_residual <= problem.tol && (last_step <= STEP_TOL || ev.max_residual <= 1e-13);
        if done {
            return Ok(finish(u, &ev, history, iterations, true));
        }
        if iterations == MAX_ITERATIONS {
            let converged = ev.max_residual <= problem.tol;
            let sol = finish(u, &ev, history, iterations, converged);
            return if converged {
                Ok(sol)
            } else {
                Err(Error::NonConvergence(Box::new(sol)))
            };
        }
        iterations += 1;
        let jac = asm.jacobian(&u)?;
        let rhs = -DVector::from_column_slice(&ev.f);
        let Some(step) = jac.lu().solve(&rhs) else {
            let sol = finish(u, &ev, history, iterations, false);
            return Err(Error::NonConvergence(Box::new(sol)));
        };
        let merit = l2(&ev.f);
        let mut alpha = 1.0;
        let mut irregular = None;
        let accepted = loop {
            let trial = asm.apply(&u, &step, alpha);
            match asm.evaluate(&trial) {
                Ok(t) if l2(&t.f) < merit => break Some((trial, t)),
                Ok(t) if t.min_speed < REGULARITY_FLOOR => irregular = Some(t.min_speed),
                Err(Error::Regularity { speed, .. }) => irregular = Some(speed),
                Ok(_) | Err(_) => {}
            }
            alpha *= 0.5;
            if alpha < MIN_DAMPING {
                break None;
            }
        };
        match accepted {
            Some((trial, t)) => {
                last_step = alpha * step.amax();
                u = trial;
                ev = t;
                history.push(ev.max_residual);
            }
            // at the rounding floor no step can decrease the residual
            None if ev.max_residual <= problem.tol => {
                return Ok(finish(u, &ev, history, iterations, true));
            }
            None => {
                if let Some(speed) = irregular {
                    return Err(Error::RegularityLoss {
                        iteration: iterations,
                        speed,
                    });
                }
                let sol = finish(u, &ev, history, iterations, false);
                return Err(Error::NonConvergence(Box::new(sol)));
            }
        }
    }
}

/// Euler-Lagrange residual at every interior grid point of a solution.
pub fn residual_profile(def: &LagrangianDef, solution: &BvpSolution) -> Result<Vec<ProfileRow>, Error> {
    def.check_dims("solution", solution.u.first().map_or(0, Vec::len))?;
    solution
        .interior_jets()
        .iter()
        .map(|jet| Ok(ProfileRow::new(jet.s, &euler_lagrange(def, jet)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn dirichlet_line() {
        let def = catalog::lookup("dirichlet").unwrap().default_def();
        let p = BvpProblem::new(
            def,
            Boundary::dirichlet(vec![0.0, 0.0], vec![1.0, 1.0]),
            21,
            Gauge::Full,
        );
        let sol = solve(&p, None).unwrap();
        assert!(sol.converged);
        for (s, row) in sol.s.iter().zip(&sol.u) {
            assert!((row[0] - s).abs() <= 1e-10 && (row[1] - s).abs() <= 1e-10);
        }
    }

    #[test]
    fn dirichlet_from_a_bent_start() {
        let def = catalog::lookup("dirichlet").unwrap().default_def();
        let p = BvpProblem::new(
            def,
            Boundary::dirichlet(vec![0.0, 0.0], vec![1.0, 2.0]),
            31,
            Gauge::Full,
        );
        let bent = CurveSpec::analytic("bent", 2, |t| {
            let b = t.scale(std::f64::consts::PI).sin().scale(0.3);
            Ok(vec![t + b, t.scale(2.0) - b])
        });
        let sol = solve(&p, Some(&bent)).unwrap();
        for (s, row) in sol.s.iter().zip(&sol.u) {
            assert!((row[0] - s).abs() <= 1e-10 && (row[1] - 2.0 * s).abs() <= 1e-10);
        }
    }

    #[test]
    fn gauge_errors() {
        let ms = catalog::minimal_surface_axi();
        let flat = BvpProblem::new(
            ms.clone(),
            Boundary::dirichlet(vec![1.0, 0.0], vec![2.0, 0.0]),
            11,
            Gauge::Graph(1),
        );
        assert!(matches!(solve(&flat, None), Err(Error::Gauge(_))));
        let d = catalog::lookup("dirichlet").unwrap().default_def();
        let not_t = BvpProblem::new(
            d,
            Boundary::dirichlet(vec![1.0, 0.0], vec![2.0, 1.0]),
            11,
            Gauge::Graph(1),
        );
        assert!(matches!(solve(&not_t, None), Err(Error::Gauge(_))));
    }

    #[test]
    fn slopes_are_required_for_order_two() {
        let e = catalog::euler_elastica();
        let p = BvpProblem::new(
            e,
            Boundary::dirichlet(vec![0.0, 0.0], vec![1.0, 0.0]),
            11,
            Gauge::Graph(0),
        );
        assert!(matches!(solve(&p, None), Err(Error::InvalidDefinition(_))));
    }
}
