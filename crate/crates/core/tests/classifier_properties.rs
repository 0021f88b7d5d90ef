use varlag::catalog;
use varlag::classifier::{classify, Budget, Verdict, TAU};
use varlag::dsl::Var;
use varlag::representation::{random_first_order, random_null, random_second_order};

fn small() -> Budget {
    Budget {
        curves: 8,
        jets: 40,
        invariance_curves: 4,
        diffeos: 2,
        ..Budget::default()
    }
}

/// `classify` refuses reports that break the verdict lattice, so an `Ok`
/// for every definition is the property.
#[test]
fn lattice_holds_on_catalog_and_random_builds() {
    for e in catalog::entries() {
        let r = classify(&e.default_def(), small(), 42).unwrap_or_else(|err| panic!("{}: {err}", e.id));
        assert!(r.verdicts.lattice_violation().is_none());
    }
    for i in 0..200u64 {
        let n = 2 + i as usize % 3;
        let c = match i % 3 {
            0 => random_null(i, n),
            1 => random_first_order(i, n),
            _ => random_second_order(i, n),
        };
        let def = c.build().unwrap();
        let r = classify(&def, small(), i).unwrap_or_else(|err| panic!("{:?}: {err}", c.pieces()));
        assert!(r.verdicts.lattice_violation().is_none());
        assert!(r.verdicts.t.passed(), "{:?}", c.pieces());
    }
}

#[test]
fn identical_seed_and_budget_give_identical_reports() {
    for id in ["helfrich-canham-axi", "dirichlet", "cahn-hilliard-axi"] {
        let def = catalog::lookup(id).unwrap().default_def();
        let a = classify(&def, small(), 9).unwrap().to_json();
        let b = classify(&def, small(), 9).unwrap().to_json();
        assert_eq!(a, b, "{id}");
    }
}

/// Each stored witness reproduces a residual above the threshold on its own.
#[test]
fn witnesses_reproduce_failures() {
    let mut checked = 0;
    for e in catalog::entries() {
        let def = e.default_def();
        let r = classify(&def, Budget::default(), 42).unwrap();
        for (name, o) in &r.tests {
            if o.verdict != Verdict::Fail {
                assert!(o.witness.is_none(), "{} {name}", e.id);
                continue;
            }
            let w = o
                .witness
                .as_ref()
                .unwrap_or_else(|| panic!("{} {name} has no witness", e.id));
            let again = w.reevaluate(&def).unwrap();
            assert!(again > o.tolerance, "{} {name}: {again:e}", e.id);
            assert!(
                (again - w.residual()).abs() <= 1e-9 * w.residual().max(1.0),
                "{} {name}",
                e.id
            );
            checked += 1;
        }
    }
    assert!(checked >= 10, "{checked}");
}

/// Integral and differential invariance agree on first-order entries whose
/// Lagrangian has no explicit `s` dependence.
#[test]
fn first_order_verdicts_agree() {
    for e in catalog::entries().iter().filter(|e| e.order == 1) {
        let def = e.default_def();
        if def.body.mentions(|v| v == Var::S) {
            continue;
        }
        let v = classify(&def, Budget::default(), 42).unwrap().verdicts;
        assert_eq!(v.param_invariant_integral, v.param_invariant_differential, "{}", e.id);
    }
}

#[test]
fn default_threshold() {
    assert_eq!(TAU, 1e-8);
}
