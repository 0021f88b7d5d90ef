use std::time::Instant;

use varlag::catalog;
use varlag::solver::{residual_profile, solve, Boundary, BvpProblem, Gauge};

/// `x(y) = cosh(y)` on `y in [-0.5, 0.5]`, with `y = s - 0.5` as parameter.
fn catenoid_error(m: usize) -> f64 {
    let c = 0.5f64.cosh();
    let p = BvpProblem::new(
        catalog::minimal_surface_axi(),
        Boundary::dirichlet(vec![c, -0.5], vec![c, 0.5]),
        m,
        Gauge::Graph(1),
    );
    let t = Instant::now();
    let sol = solve(&p, None).unwrap();
    assert!(t.elapsed().as_secs_f64() < 5.0);
    assert!(
        sol.converged && sol.max_normal <= 1e-8 && sol.max_tangential <= 1e-8,
        "{}",
        sol.log_json()
    );
    sol.u.iter().map(|r| (r[0] - r[1].cosh()).abs()).fold(0.0, f64::max)
}

#[test]
fn catenoid_recovery_and_mesh_convergence() {
    let e201 = catenoid_error(201);
    assert!(e201 <= 1e-6, "sup error {e201:e}");
    let errs: Vec<f64> = [51, 101, 201, 401].iter().map(|&m| catenoid_error(m)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn elastica_collinear_clamp_is_a_line() {
    let p = BvpProblem::new(
        catalog::euler_elastica(),
        Boundary::clamped(vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]),
        41,
        Gauge::Graph(0),
    );
    let sol = solve(&p, None).unwrap();
    assert!(sol.converged);
    for row in &sol.u {
        assert!(row[1].abs() <= 1e-12);
    }
    for r in residual_profile(&p.def, &sol).unwrap() {
        assert!(r.residual.iter().all(|x| x.abs() <= 1e-12));
    }
}

#[test]
fn dirichlet_energy_does_not_rise_above_the_initializer() {
    use varlag::variational::curve::{line, parabola};
    use varlag::variational::{functional_value, CurveSpec, GridCurve};
    let def = catalog::lookup("dirichlet").unwrap().default_def();
    let p = BvpProblem::new(
        def.clone(),
        Boundary::dirichlet(vec![0.0, 0.0], vec![1.0, 1.0]),
        41,
        Gauge::Full,
    );
    let sol = solve(&p, Some(&parabola())).unwrap();
    let columns: Vec<Vec<f64>> = (0..2).map(|k| sol.u.iter().map(|r| r[k]).collect()).collect();
    let solved = functional_value(&def, &CurveSpec::Grid(GridCurve::uniform(columns).unwrap())).unwrap();
    let linear = functional_value(&def, &line(vec![0.0, 0.0], vec![1.0, 1.0])).unwrap();
    let start = functional_value(&def, &parabola()).unwrap();
    assert!(solved <= linear + 1e-12, "{solved} {linear}");
    assert!(solved < start);
}

/// No catenoid joins two small rings far apart; the best iterate comes
/// back flagged as unconverged.
#[test]
fn unreachable_catenoid_is_reported() {
    let p = BvpProblem::new(
        catalog::minimal_surface_axi(),
        Boundary::dirichlet(vec![0.2, -1.0], vec![0.2, 1.0]),
        41,
        Gauge::Graph(1),
    );
    match solve(&p, None) {
        Err(varlag::Error::NonConvergence(sol)) => {
            assert!(!sol.converged);
            assert!(sol.max_residual > p.tol);
            assert!(sol.log_json().contains("\"converged\": false"));
        }
        Err(varlag::Error::RegularityLoss { .. }) => {}
        other => panic!("{:?}", other.map(|s| s.max_residual)),
    }
}
