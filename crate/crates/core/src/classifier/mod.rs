//! Randomised tests for the null, T, N and parametrization-invariance
//! properties of a Lagrangian.
//!
//! A pass only means no counterexample was found among the sampled curves
//! and jets, and is reported as `pass (statistical)`. Failed tests carry a
//! witness that [`Witness::reevaluate`] reproduces in isolation.

pub mod conditions;
pub mod sampling;

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsl::LagrangianDef;
use crate::error::Error;
use crate::variational::quadrature::QUAD_RTOL;
use crate::variational::{euler_lagrange, functional_value, CurveJet, CurveSampler, CurveSpec, Diffeo};
use conditions::{euler_identity_defect, homogeneity_defect, s_dependence, second_order_residuals, structure_defect};
use sampling::{chebyshev_samples, random_jet, rng, trial_seed};

/// Scale-normalised threshold of the differential tests.
pub const TAU: f64 = 1e-8;
/// Threshold of the integral test, `10 x` the quadrature tolerance.
pub const INTEGRAL_TOL: f64 = 10.0 * QUAD_RTOL;
/// Stretch factors drawn per jet in the homogeneity check.
pub const LAMBDAS_PER_JET: usize = 20;

const STREAM_CURVES: u64 = 1;
const STREAM_INVARIANCE: u64 = 2;
const STREAM_DIFFEO: u64 = 3;
const STREAM_FIRST_ORDER: u64 = 4;
const STREAM_SECOND_ORDER: u64 = 5;
const STREAM_STRUCTURE: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "pass (statistical)")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "skipped")]
    Skipped,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Skipped, v) | (v, Verdict::Skipped) => v,
            (Verdict::Pass, Verdict::Pass) => Verdict::Pass,
            _ => Verdict::Fail,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass (statistical)",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveCheck {
    /// full residual
    Null,
    Tangential,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JetCheck {
    SIndependence,
    Homogeneity,
    EulerIdentity,
    Para2a,
    Para2b,
    StructureLemma,
}

/// Where a test found its largest residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    CurvePoint {
        check: CurveCheck,
        curve_seed: u64,
        modes: usize,
        s: f64,
        residual: f64,
    },
    Reparametrization {
        curve_seed: u64,
        modes: usize,
        a: f64,
        k: u32,
        residual: f64,
    },
    Jet {
        check: JetCheck,
        jet: CurveJet,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        lambda: Option<f64>,
        residual: f64,
    },
}

impl Witness {
    pub fn residual(&self) -> f64 {
        match self {
            Witness::CurvePoint { residual, .. }
            | Witness::Reparametrization { residual, .. }
            | Witness::Jet { residual, .. } => *residual,
        }
    }

    /// Recomputes the residual from the stored data alone.
    pub fn reevaluate(&self, def: &LagrangianDef) -> Result<f64, Error> {
        match self {
            Witness::CurvePoint {
                check,
                curve_seed,
                modes,
                s,
                ..
            } => {
                let curve = CurveSampler::for_def(def, *modes).sample(*curve_seed)?;
                curve_residuals(def, &curve, *s).map(|r| r[*check as usize])
            }
            Witness::Reparametrization {
                curve_seed,
                modes,
                a,
                k,
                ..
            } => {
                let curve = CurveSampler::for_def(def, *modes).sample(*curve_seed)?;
                let e0 = functional_value(def, &curve)?;
                let e1 = functional_value(def, &curve.reparametrize(Diffeo::new(*a, *k)?))?;
                Ok((e1 - e0).abs() / (1.0 + e0.abs()))
            }
            Witness::Jet { check, jet, lambda, .. } => match check {
                JetCheck::SIndependence => s_dependence(def, jet),
                JetCheck::Homogeneity => homogeneity_defect(def, jet, lambda.unwrap_or(2.0)),
                JetCheck::EulerIdentity => euler_identity_defect(def, jet),
                JetCheck::Para2a => Ok(second_order_residuals(def, jet)?.scaled_a()),
                JetCheck::Para2b => Ok(second_order_residuals(def, jet)?.scaled_b()),
                JetCheck::StructureLemma => structure_defect(def, jet),
            },
        }
    }
}

/// Result of one test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub verdict: Verdict,
    pub max_residual: f64,
    pub tolerance: f64,
    pub trials: usize,
    /// Worst point, kept for failed tests.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl TestOutcome {
    fn skipped() -> Self {
        TestOutcome {
            verdict: Verdict::Skipped,
            max_residual: 0.0,
            tolerance: 0.0,
            trials: 0,
            witness: None,
        }
    }

    fn from_worst(worst: Option<Witness>, tolerance: f64, trials: usize) -> Self {
        let max_residual = worst.as_ref().map_or(0.0, Witness::residual);
        let verdict = Verdict::from_pass(max_residual <= tolerance);
        TestOutcome {
            verdict,
            max_residual,
            tolerance,
            trials,
            witness: if verdict == Verdict::Fail { worst } else { None },
        }
    }
}

/// Keeps the larger residual; ties keep the earlier witness.
fn worse(a: Option<Witness>, b: Option<Witness>) -> Option<Witness> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.residual() > a.residual() { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Order-preserving parallel map, reduced sequentially so reports do not
/// depend on thread scheduling.
fn reduce_trials<const K: usize, F>(trials: usize, f: F) -> Result<[Option<Witness>; K], Error>
where
    F: Fn(u64) -> Result<[Option<Witness>; K], Error> + Sync + Send,
{
    let per_trial: Vec<Result<[Option<Witness>; K], Error>> = (0..trials as u64).into_par_iter().map(f).collect();
    let mut acc: [Option<Witness>; K] = std::array::from_fn(|_| None);
    for r in per_trial {
        for (slot, w) in acc.iter_mut().zip(r?) {
            *slot = worse(slot.take(), w);
        }
    }
    Ok(acc)
}

/// Curves sampled per trial; higher modes make curvature more varied.
pub const DEFAULT_MODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Random curves for the null/T/N tests.
    pub curves: usize,
    /// Random jets for each pointwise test.
    pub jets: usize,
    /// Curves and diffeomorphisms per curve for the integral test.
    pub invariance_curves: usize,
    pub diffeos: usize,
    pub modes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            curves: 50,
            jets: 200,
            invariance_curves: 10,
            diffeos: 3,
            modes: DEFAULT_MODES,
        }
    }
}

impl Budget {
    /// Same budget with every trial count set to `trials`.
    pub fn uniform(trials: usize) -> Self {
        Budget {
            curves: trials,
            jets: trials,
            invariance_curves: trials,
            ..Budget::default()
        }
    }
}

/// Scaled `[full, tangential, normal]` residuals at one curve point.
fn curve_residuals(def: &LagrangianDef, curve: &CurveSpec, s: f64) -> Result<[f64; 3], Error> {
    let jet = curve.jet(s)?;
    def.check_point(&jet.u)?;
    let r = euler_lagrange(def, &jet)?;
    Ok([r.scaled_residual(), r.scaled_tangential(), r.scaled_normal()])
}

fn curve_sweep(
    def: &LagrangianDef,
    trials: usize,
    seed: u64,
    modes: usize,
    tau: f64,
) -> Result<[TestOutcome; 3], Error> {
    let sampler = CurveSampler::for_def(def, modes);
    let nodes = chebyshev_samples();
    let worst = reduce_trials::<3, _>(trials, |i| {
        let curve_seed = trial_seed(seed, STREAM_CURVES, i);
        let curve = sampler.sample(curve_seed)?;
        let mut acc: [Option<Witness>; 3] = [None, None, None];
        for &s in &nodes {
            let r = curve_residuals(def, &curve, s).map_err(|e| e.at(format!("curve seed {curve_seed}, s = {s}")))?;
            for (k, check) in [CurveCheck::Null, CurveCheck::Tangential, CurveCheck::Normal]
                .into_iter()
                .enumerate()
            {
                let w = Witness::CurvePoint {
                    check,
                    curve_seed,
                    modes,
                    s,
                    residual: r[k],
                };
                acc[k] = worse(acc[k].take(), Some(w));
            }
        }
        Ok(acc)
    })?;
    let [a, b, c] = worst;
    Ok([
        TestOutcome::from_worst(a, tau, trials),
        TestOutcome::from_worst(b, tau, trials),
        TestOutcome::from_worst(c, tau, trials),
    ])
}

/// Passes iff `|E|` stays within `TAU` on random curves.
pub fn test_null(def: &LagrangianDef, trials: usize, seed: u64) -> Result<TestOutcome, Error> {
    let [null, _, _] = curve_sweep(def, trials, seed, DEFAULT_MODES, TAU)?;
    Ok(null)
}

/// Passes iff the tangential part `u' . E` vanishes on random curves.
pub fn test_t(def: &LagrangianDef, trials: usize, seed: u64) -> Result<TestOutcome, Error> {
    let [_, t, _] = curve_sweep(def, trials, seed, DEFAULT_MODES, TAU)?;
    Ok(t)
}

/// Passes iff the normal part of `E` vanishes on random curves.
pub fn test_n(def: &LagrangianDef, trials: usize, seed: u64) -> Result<TestOutcome, Error> {
    let [_, _, n] = curve_sweep(def, trials, seed, DEFAULT_MODES, TAU)?;
    Ok(n)
}

/// Compares `E(u o w)` with `E(u)` for random curves and diffeomorphisms
/// `w(t) = t + a sin(pi k t)/(pi k)`, `a` in `(-0.9, 0.9)`, `k` in `{1, 2, 3}`.
pub fn test_param_invariance_integral(
    def: &LagrangianDef,
    curves: usize,
    diffeos: usize,
    seed: u64,
) -> Result<TestOutcome, Error> {
    invariance_integral(def, curves, diffeos, seed, DEFAULT_MODES, INTEGRAL_TOL)
}

fn invariance_integral(
    def: &LagrangianDef,
    curves: usize,
    diffeos: usize,
    seed: u64,
    modes: usize,
    tol: f64,
) -> Result<TestOutcome, Error> {
    let sampler = CurveSampler::for_def(def, modes);
    let [worst] = reduce_trials::<1, _>(curves, |i| {
        let curve_seed = trial_seed(seed, STREAM_INVARIANCE, i);
        let curve = sampler.sample(curve_seed)?;
        let e0 = functional_value(def, &curve).map_err(|e| e.at(format!("curve seed {curve_seed}")))?;
        let mut r = rng(trial_seed(seed, STREAM_DIFFEO, i));
        let mut acc = None;
        for _ in 0..diffeos {
            let a = r.gen_range(-0.9..0.9);
            let k = r.gen_range(1..=3u32);
            let moved = curve.reparametrize(Diffeo::new(a, k)?);
            let e1 = functional_value(def, &moved)
                .map_err(|e| e.at(format!("curve seed {curve_seed} under a = {a}, k = {k}")))?;
            let w = Witness::Reparametrization {
                curve_seed,
                modes,
                a,
                k,
                residual: (e1 - e0).abs() / (1.0 + e0.abs()),
            };
            acc = worse(acc, Some(w));
        }
        Ok([acc])
    })?;
    Ok(TestOutcome::from_worst(worst, tol, curves * diffeos))
}

/// Outcome of a group of pointwise conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsOutcome {
    pub verdict: Verdict,
    pub parts: BTreeMap<String, TestOutcome>,
}

impl ConditionsOutcome {
    fn new(parts: Vec<(&str, TestOutcome)>) -> Self {
        let verdict = parts.iter().fold(Verdict::Skipped, |v, (_, o)| v.and(o.verdict));
        ConditionsOutcome {
            verdict,
            parts: parts.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

fn jet_witness(check: JetCheck, jet: &CurveJet, lambda: Option<f64>, residual: f64) -> Option<Witness> {
    Some(Witness::Jet {
        check,
        jet: jet.clone(),
        lambda,
        residual,
    })
}

fn s_independence_part(
    def: &LagrangianDef,
    trials: usize,
    seed: u64,
    stream: u64,
    tau: f64,
) -> Result<TestOutcome, Error> {
    let [w] = reduce_trials::<1, _>(trials, |i| {
        let jet = random_jet(def, &mut rng(trial_seed(seed, stream, i)));
        Ok([jet_witness(
            JetCheck::SIndependence,
            &jet,
            None,
            s_dependence(def, &jet)?,
        )])
    })?;
    Ok(TestOutcome::from_worst(w, tau, trials))
}

/// s-independence, degree-1 homogeneity in `p` (20 stretch factors in
/// `[0.1, 10]` per jet) and the Euler identity `p . L_p = L`.
pub fn check_first_order_conditions(def: &LagrangianDef, trials: usize, seed: u64) -> Result<ConditionsOutcome, Error> {
    first_order_conditions(def, trials, seed, TAU)
}

fn first_order_conditions(def: &LagrangianDef, trials: usize, seed: u64, tau: f64) -> Result<ConditionsOutcome, Error> {
    let [hom, euler] = reduce_trials::<2, _>(trials, |i| {
        let mut r = rng(trial_seed(seed, STREAM_FIRST_ORDER, i));
        let jet = random_jet(def, &mut r);
        let mut hom = None;
        for _ in 0..LAMBDAS_PER_JET {
            let lambda = r.gen_range(0.1..10.0);
            let d = homogeneity_defect(def, &jet, lambda)?;
            hom = worse(hom, jet_witness(JetCheck::Homogeneity, &jet, Some(lambda), d));
        }
        let e = euler_identity_defect(def, &jet)?;
        Ok([hom, jet_witness(JetCheck::EulerIdentity, &jet, None, e)])
    })?;
    Ok(ConditionsOutcome::new(vec![
        (
            "s_independence",
            s_independence_part(def, trials, seed, STREAM_FIRST_ORDER, tau)?,
        ),
        (
            "homogeneity",
            TestOutcome::from_worst(hom, tau, trials * LAMBDAS_PER_JET),
        ),
        ("euler_identity", TestOutcome::from_worst(euler, tau, trials)),
    ]))
}

/// `u' . L_q = 0` and `u' . (L_p - D_s L_q) + u'' . L_q - L = 0` at random
/// jets, together with s-independence, which the conditions presuppose.
pub fn check_second_order_conditions(
    def: &LagrangianDef,
    trials: usize,
    seed: u64,
) -> Result<ConditionsOutcome, Error> {
    second_order_conditions(def, trials, seed, TAU)
}

fn second_order_conditions(
    def: &LagrangianDef,
    trials: usize,
    seed: u64,
    tau: f64,
) -> Result<ConditionsOutcome, Error> {
    let [a, b] = reduce_trials::<2, _>(trials, |i| {
        let jet = random_jet(def, &mut rng(trial_seed(seed, STREAM_SECOND_ORDER, i)));
        let r = second_order_residuals(def, &jet)?;
        Ok([
            jet_witness(JetCheck::Para2a, &jet, None, r.scaled_a()),
            jet_witness(JetCheck::Para2b, &jet, None, r.scaled_b()),
        ])
    })?;
    Ok(ConditionsOutcome::new(vec![
        (
            "s_independence",
            s_independence_part(def, trials, seed, STREAM_SECOND_ORDER, tau)?,
        ),
        ("para2a", TestOutcome::from_worst(a, tau, trials)),
        ("para2b", TestOutcome::from_worst(b, tau, trials)),
    ]))
}

/// `d(p . L_q)/dq = 0` at random jets; skipped for first-order Lagrangians.
pub fn check_structure_lemmas(def: &LagrangianDef, trials: usize, seed: u64) -> Result<TestOutcome, Error> {
    structure_lemmas(def, trials, seed, TAU)
}

fn structure_lemmas(def: &LagrangianDef, trials: usize, seed: u64, tau: f64) -> Result<TestOutcome, Error> {
    if !def.is_second_order() {
        return Ok(TestOutcome::skipped());
    }
    let [w] = reduce_trials::<1, _>(trials, |i| {
        let jet = random_jet(def, &mut rng(trial_seed(seed, STREAM_STRUCTURE, i)));
        Ok([jet_witness(
            JetCheck::StructureLemma,
            &jet,
            None,
            structure_defect(def, &jet)?,
        )])
    })?;
    Ok(TestOutcome::from_worst(w, tau, trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub null: Verdict,
    #[serde(rename = "T")]
    pub t: Verdict,
    #[serde(rename = "N")]
    pub n: Verdict,
    pub param_invariant_integral: Verdict,
    pub param_invariant_differential: Verdict,
}

impl Verdicts {
    /// `null => T and N`; either invariance verdict `=> T`.
    pub fn lattice_violation(&self) -> Option<&'static str> {
        if self.null.passed() && !(self.t.passed() && self.n.passed()) {
            return Some("null passes but T or N fails");
        }
        if (self.param_invariant_integral.passed() || self.param_invariant_differential.passed()) && !self.t.passed() {
            return Some("parametrization invariance passes but T fails");
        }
        None
    }

    pub fn all(&self) -> [(&'static str, Verdict); 5] {
        [
            ("null", self.null),
            ("T", self.t),
            ("N", self.n),
            ("param_invariant_integral", self.param_invariant_integral),
            ("param_invariant_differential", self.param_invariant_differential),
        ]
    }
}

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub schema: u32,
    pub id: String,
    pub n: usize,
    pub order: u8,
    pub seed: u64,
    pub budget: Budget,
    pub tolerance: f64,
    pub integral_tolerance: f64,
    pub verdicts: Verdicts,
    /// Every individual test, keyed by name.
    pub tests: BTreeMap<String, TestOutcome>,
    pub note: String,
}

impl ClassificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub budget: Budget,
    pub seed: u64,
    /// Differential threshold; the integral one is separate.
    pub tau: f64,
    pub integral_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            budget: Budget::default(),
            seed: 42,
            tau: TAU,
            integral_tol: INTEGRAL_TOL,
        }
    }
}

/// Runs every applicable test and checks the verdict lattice.
pub fn classify(def: &LagrangianDef, budget: Budget, seed: u64) -> Result<ClassificationReport, Error> {
    classify_with(
        def,
        &ClassifyOptions {
            budget,
            seed,
            ..ClassifyOptions::default()
        },
    )
}

pub fn classify_with(def: &LagrangianDef, opts: &ClassifyOptions) -> Result<ClassificationReport, Error> {
    let b = opts.budget;
    let [null, t, n] = curve_sweep(def, b.curves, opts.seed, b.modes, opts.tau)?;
    let integral = invariance_integral(
        def,
        b.invariance_curves,
        b.diffeos,
        opts.seed,
        b.modes,
        opts.integral_tol,
    )?;
    let mut tests = BTreeMap::new();
    let differential = if def.is_second_order() {
        let c = second_order_conditions(def, b.jets, opts.seed, opts.tau)?;
        tests.insert(
            "structure_lemma".to_string(),
            structure_lemmas(def, b.jets, opts.seed, opts.tau)?,
        );
        c
    } else {
        first_order_conditions(def, b.jets, opts.seed, opts.tau)?
    };
    let verdicts = Verdicts {
        null: null.verdict,
        t: t.verdict,
        n: n.verdict,
        param_invariant_integral: integral.verdict,
        param_invariant_differential: differential.verdict,
    };
    tests.insert("null".into(), null);
    tests.insert("T".into(), t);
    tests.insert("N".into(), n);
    tests.insert("param_invariant_integral".into(), integral);
    tests.extend(differential.parts);
    let report = ClassificationReport {
        schema: REPORT_SCHEMA,
        id: def.name.clone(),
        n: def.n,
        order: def.order,
        seed: opts.seed,
        budget: b,
        tolerance: opts.tau,
        integral_tolerance: opts.integral_tol,
        verdicts,
        tests,
        note: "pass (statistical): no counterexample among the sampled curves and jets".into(),
    };
    if let Some(why) = verdicts.lattice_violation() {
        return Err(Error::InconsistentVerdicts(format!("{}: {why}", def.name)));
    }
    Ok(report)
}
