use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use varlag::catalog::{self, CatalogEntry};
use varlag::classifier::{
    classify_with, test_param_invariance_integral, Budget, ClassificationReport, ClassifyOptions, Verdict,
    DEFAULT_MODES, INTEGRAL_TOL, TAU,
};
use varlag::dsl::{read_lag_with, write_lag, LagDocument, LagrangianDef, Point};
use varlag::representation::Construction;
use varlag::solver::{residual_profile, solve, Boundary, BvpProblem, BvpSolution, Gauge};
use varlag::variational::csv::{profile_csv, residual_profile_along};
use varlag::variational::curve::by_name;
use varlag::variational::{functional_value, Diffeo};
use varlag::Error;

use crate::args::*;
use crate::output::Emitter;

/// Whether the tested property held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    PropertyFails,
}

const MIN_TOLERANCE: f64 = 1e-14;

fn tolerance(name: &str, v: Option<f64>, default: f64) -> Result<f64> {
    match v {
        None => Ok(default),
        Some(t) if t.is_finite() && t >= MIN_TOLERANCE => Ok(t),
        Some(t) => bail!("--{name} must be a finite number of at least {MIN_TOLERANCE:e}, got {t:e}"),
    }
}

fn overrides(params: &[(String, f64)]) -> BTreeMap<String, f64> {
    params.iter().cloned().collect()
}

fn load(input: &Input) -> Result<(LagrangianDef, Option<&'static CatalogEntry>)> {
    let params = overrides(&input.params);
    if let Some(id) = &input.catalog {
        let entry = catalog::lookup(id).ok_or_else(|| {
            let ids: Vec<&str> = catalog::entries().iter().map(|e| e.id).collect();
            anyhow!("unknown catalog id {id:?}; known ids: {}", ids.join(", "))
        })?;
        return Ok((entry.build(&params)?, Some(entry)));
    }
    let path = input.file.as_ref().expect("clap requires --catalog or --file");
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let def = read_lag_with(&text, &params).with_context(|| format!("in {}", path.display()))?;
    Ok((def, None))
}

fn flag(v: bool) -> &'static str {
    if v {
        "yes"
    } else {
        "no"
    }
}

pub fn catalog_cmd(args: &CatalogArgs) -> Result<Status> {
    let entries: Vec<&CatalogEntry> = match &args.id {
        Some(id) => vec![catalog::lookup(id).ok_or_else(|| anyhow!("unknown catalog id {id:?}"))?],
        None => catalog::entries().iter().collect(),
    };
    let out = Emitter::new(args.output.out.clone());
    match args.output.format.unwrap_or(Format::Text) {
        Format::Json => {
            let list: Vec<_> = entries
                .iter()
                .map(|e| {
                    let def = e.default_def();
                    json!({
                        "id": e.id,
                        "description": e.description,
                        "n": e.n,
                        "order": e.order,
                        "params": e.params.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
                        "expected": e.expected,
                        "L": def.body.to_string(),
                    })
                })
                .collect();
            out.emit("catalog.json", &serde_json::to_string_pretty(&list)?)?;
        }
        Format::Text => {
            let mut t = format!(
                "{:<22} {:>2} {:>5}  {:<4} {:<4} {:<4} {:<9} {:<12} {}\n",
                "id", "n", "order", "null", "T", "N", "param-inv", "differential", "params"
            );
            for e in &entries {
                let x = e.expected;
                let params: Vec<String> = e.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(
                    t,
                    "{:<22} {:>2} {:>5}  {:<4} {:<4} {:<4} {:<9} {:<12} {}",
                    e.id,
                    e.n,
                    e.order,
                    flag(x.null),
                    flag(x.t),
                    flag(x.n),
                    flag(x.param_invariant),
                    flag(x.param_invariant_differential),
                    params.join(" ")
                )?;
            }
            out.emit("catalog.txt", &t)?;
        }
        Format::Csv => bail!("catalog supports --format text or json"),
    }
    Ok(Status::Ok)
}

pub fn eval_cmd(args: &EvalArgs) -> Result<Status> {
    let (def, _) = load(&args.input)?;
    let point = Point {
        s: args.s,
        u: args.u.clone(),
        p: args.p.clone(),
        q: args.q.clone().unwrap_or_default(),
    };
    if def.is_second_order() && args.q.is_none() {
        bail!("{} is second order; pass --q", def.name);
    }
    let value = def.eval(&point)?;
    let out = Emitter::new(args.output.out.clone());
    match args.output.format.unwrap_or(Format::Text) {
        Format::Text => out.emit("eval.txt", &format!("{value:e}"))?,
        Format::Json => out.emit(
            "eval.json",
            &serde_json::to_string_pretty(&json!({ "id": def.name, "point": point, "value": value }))?,
        )?,
        Format::Csv => bail!("eval supports --format text or json"),
    }
    Ok(Status::Ok)
}

pub fn residual_cmd(args: &ResidualArgs) -> Result<Status> {
    let (def, _) = load(&args.input)?;
    if args.points == 0 {
        bail!("--points must be positive");
    }
    let curve = by_name(&args.curve, def.n)?;
    let rows = residual_profile_along(&def, &curve, args.points)?;
    let out = Emitter::new(args.output.out.clone());
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => out.emit("residual.csv", &profile_csv(&rows))?,
        Format::Json | Format::Text => {
            let max = |f: fn(&varlag::variational::csv::ProfileRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
            let summary = json!({
                "id": def.name,
                "curve": args.curve,
                "points": args.points,
                "max_scaled_residual": max(|r| r.scaled_residual),
                "max_scaled_tangential": max(|r| r.scaled_tangential),
                "max_scaled_normal": max(|r| r.scaled_normal),
                "rows": rows,
            });
            out.emit("residual.json", &serde_json::to_string_pretty(&summary)?)?;
        }
    }
    Ok(Status::Ok)
}

fn options(t: &TestArgs) -> Result<ClassifyOptions> {
    Ok(ClassifyOptions {
        budget: Budget {
            curves: t.trials,
            jets: t.jets,
            invariance_curves: t.invariance_curves,
            diffeos: t.diffeos,
            modes: DEFAULT_MODES,
        },
        seed: t.seed,
        tau: tolerance("tau", t.tau, TAU)?,
        integral_tol: tolerance("integral-tol", t.integral_tol, INTEGRAL_TOL)?,
    })
}

fn report_text(r: &ClassificationReport) -> String {
    let mut t = format!("{} (n = {}, order {}, seed {})\n", r.id, r.n, r.order, r.seed);
    for (name, v) in r.verdicts.all() {
        let _ = writeln!(t, "  {name:<30} {v}");
    }
    t.push_str("tests:\n");
    for (name, o) in &r.tests {
        let _ = writeln!(
            t,
            "  {name:<30} {:<20} max {:.3e}  tol {:.1e}  trials {}",
            o.verdict.to_string(),
            o.max_residual,
            o.tolerance,
            o.trials
        );
    }
    t
}

fn emit_report(out: &Emitter, format: Option<Format>, r: &ClassificationReport, stem: &str) -> Result<()> {
    match format.unwrap_or(Format::Json) {
        Format::Json => out.emit(&format!("{stem}.report.json"), &r.to_json()),
        Format::Text => out.emit(&format!("{stem}.report.txt"), &report_text(r)),
        Format::Csv => bail!("reports support --format json or text"),
    }
}

/// Verdicts that differ from what the entry expects, by name.
fn mismatches(entry: &CatalogEntry, r: &ClassificationReport) -> Vec<&'static str> {
    let e = entry.expected;
    let want = [e.null, e.t, e.n, e.param_invariant, e.param_invariant_differential];
    r.verdicts
        .all()
        .iter()
        .zip(want)
        .filter(|((_, got), want)| got.passed() != *want)
        .map(|((name, _), _)| *name)
        .collect()
}

pub fn classify_cmd(args: &ClassifyArgs) -> Result<Status> {
    let (def, entry) = load(&args.input)?;
    let report = classify_with(&def, &options(&args.tests)?)?;
    emit_report(
        &Emitter::new(args.output.out.clone()),
        args.output.format,
        &report,
        &def.name,
    )?;
    let status = match entry {
        Some(entry) => {
            let bad = mismatches(entry, &report);
            if !bad.is_empty() {
                eprintln!("{}: verdicts differ from the catalog for {}", entry.id, bad.join(", "));
            }
            bad.is_empty()
        }
        None => report.verdicts.all().iter().all(|(_, v)| *v != Verdict::Fail),
    };
    Ok(if status { Status::Ok } else { Status::PropertyFails })
}

pub fn invariance_cmd(args: &InvarianceArgs) -> Result<Status> {
    let (def, _) = load(&args.input)?;
    let out = Emitter::new(args.output.out.clone());
    let (doc, pass) = match &args.curve {
        Some(name) => {
            let curve = by_name(name, def.n)?;
            let before = functional_value(&def, &curve)?;
            let after = functional_value(&def, &curve.reparametrize(Diffeo::new(args.a, args.k)?))?;
            let relative = (after - before).abs() / (1.0 + before.abs());
            let pass = relative <= INTEGRAL_TOL;
            let doc = json!({
                "id": def.name,
                "curve": name,
                "a": args.a,
                "k": args.k,
                "value": before,
                "reparametrized": after,
                "shift": after - before,
                "relative_shift": relative,
                "tolerance": INTEGRAL_TOL,
                "verdict": if pass { Verdict::Pass } else { Verdict::Fail },
            });
            (doc, pass)
        }
        None => {
            let o = test_param_invariance_integral(&def, args.trials, args.diffeos, args.seed)?;
            let pass = o.verdict.passed();
            (json!({ "id": def.name, "seed": args.seed, "outcome": o }), pass)
        }
    };
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => out.emit("invariance.json", &serde_json::to_string_pretty(&doc)?)?,
        Format::Text => {
            let v = if pass { Verdict::Pass } else { Verdict::Fail };
            out.emit("invariance.txt", &format!("{}: {v}", def.name))?
        }
        Format::Csv => bail!("invariance supports --format json or text"),
    }
    Ok(if pass { Status::Ok } else { Status::PropertyFails })
}

fn construction(args: &BuildArgs) -> Result<Construction> {
    let mut params = BTreeMap::new();
    let (n, mut psi, mut xi, mut f) = match &args.from {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let doc = LagDocument::parse(&text).with_context(|| format!("in {}", path.display()))?;
            params.extend(doc.params.clone());
            for (lhs, _, line) in &doc.equations {
                if !matches!(lhs.as_str(), "Psi" | "Xi" | "f") {
                    bail!("{}:{line}: expected Psi, Xi or f, found {lhs:?}", path.display());
                }
            }
            let get = |k: &str| doc.equation(k).map(|(src, _)| src.to_string());
            (doc.n.or(args.n), get("Psi"), get("Xi"), get("f"))
        }
        None => (args.n, args.psi.clone(), args.xi.clone(), args.f.clone()),
    };
    params.extend(overrides(&args.params));
    let n = n.ok_or_else(|| anyhow!("the dimension is missing; pass --n"))?;
    let kind = match args.kind {
        Some(k) => k,
        None if xi.is_some() => Kind::SecondOrder,
        None if f.is_some() => Kind::FirstOrder,
        None => Kind::Null,
    };
    let zero = || Some("0".to_string());
    Ok(match kind {
        Kind::Null => {
            if f.is_some() || xi.is_some() {
                bail!("a null construction takes only Psi");
            }
            let psi = psi.take().ok_or_else(|| anyhow!("a null construction needs Psi"))?;
            Construction::null(&psi, n, &params)?
        }
        Kind::FirstOrder => {
            if xi.is_some() {
                bail!("a first-order construction takes Psi and f, not Xi");
            }
            let f = f.take().ok_or_else(|| anyhow!("a first-order construction needs f"))?;
            Construction::first_order(&psi.or_else(zero).unwrap(), &f, n, &params)?
        }
        Kind::SecondOrder => {
            if psi.is_some() {
                bail!("a second-order construction takes Xi and f, not Psi");
            }
            let f = f.take().ok_or_else(|| anyhow!("a second-order construction needs f"))?;
            Construction::second_order(&xi.take().or_else(zero).unwrap(), &f, n, &params)?
        }
    })
}

pub fn build_cmd(args: &BuildArgs) -> Result<Status> {
    let c = construction(args)?;
    let def = c.build()?.with_name(args.name.clone());
    let report = classify_with(&def, &options(&args.tests)?)?;
    let lag = write_lag(&def);
    let out = Emitter::new(args.output.out.clone());
    if args.output.out.is_some() {
        out.emit(&format!("{}.lag", def.name), &lag)?;
        emit_report(&out, args.output.format, &report, &def.name)?;
    } else {
        match args.output.format.unwrap_or(Format::Json) {
            Format::Json => {
                let pieces: BTreeMap<_, _> = c.pieces().into_iter().collect();
                let doc = json!({ "pieces": pieces, "lag": lag, "report": report });
                out.emit("build.json", &serde_json::to_string_pretty(&doc)?)?;
            }
            Format::Text => out.emit("build.txt", &format!("{lag}\n{}", report_text(&report)))?,
            Format::Csv => bail!("build supports --format json or text"),
        }
    }
    let v = report.verdicts;
    let holds = v.t.passed() && (!c.is_null() || v.null.passed());
    if !holds {
        eprintln!(
            "{}: the built Lagrangian does not have the property its construction guarantees",
            def.name
        );
    }
    Ok(if holds { Status::Ok } else { Status::PropertyFails })
}

fn gauge(s: &str, n: usize) -> Result<Gauge> {
    if s == "full" {
        return Ok(Gauge::Full);
    }
    let k = s
        .strip_prefix("graph:")
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| (1..=n).contains(&k))
        .ok_or_else(|| anyhow!("--gauge must be `full` or `graph:K` with K in 1..={n}, got {s:?}"))?;
    Ok(Gauge::Graph(k - 1))
}

fn emit_solution(out: &Emitter, def: &LagrangianDef, sol: &BvpSolution) -> Result<()> {
    out.emit("solution.csv", &sol.to_csv())?;
    if out.has_dir() {
        out.emit("profile.csv", &profile_csv(&residual_profile(def, sol)?))?;
    }
    out.emit_side("log.json", &sol.log_json())
}

pub fn solve_cmd(args: &SolveArgs) -> Result<Status> {
    let (def, _) = load(&args.input)?;
    let (start, end) = parse_pair(&args.bc).map_err(|e| anyhow!("--bc: {e}"))?;
    let boundary = match &args.slopes {
        Some(s) => {
            let (a, b) = parse_pair(s).map_err(|e| anyhow!("--slopes: {e}"))?;
            Boundary::clamped(start, end, a, b)
        }
        None => Boundary::dirichlet(start, end),
    };
    let mut problem = BvpProblem::new(def.clone(), boundary, args.m, gauge(&args.gauge, def.n)?);
    problem.tol = tolerance("tol", Some(args.tol), args.tol)?;
    let init = args.init.as_deref().map(|name| by_name(name, def.n)).transpose()?;
    if !matches!(args.output.format, None | Some(Format::Csv)) {
        bail!("solve writes CSV tables and a JSON log; --format csv is the only choice");
    }
    let out = Emitter::new(args.output.out.clone());
    match solve(&problem, init.as_ref()) {
        Ok(sol) => {
            emit_solution(&out, &def, &sol)?;
            Ok(Status::Ok)
        }
        Err(Error::NonConvergence(sol)) => {
            emit_solution(&out, &def, &sol)?;
            Err(anyhow!(
                "no convergence after {} iterations; best scaled residual {:e} (written above, flagged converged = false)",
                sol.iterations,
                sol.max_residual
            ))
        }
        Err(e) => Err(e.into()),
    }
}
