use varlag::catalog;
use varlag::classifier::{classify, Budget, Verdict};

fn flag(v: Verdict) -> bool {
    v == Verdict::Pass
}

#[test]
fn every_entry_matches_its_expected_flags() {
    for entry in catalog::entries() {
        let def = entry.default_def();
        let r = classify(&def, Budget::default(), 42).unwrap_or_else(|e| panic!("{}: {e}", entry.id));
        let v = r.verdicts;
        let got = [
            flag(v.null),
            flag(v.t),
            flag(v.n),
            flag(v.param_invariant_integral),
            flag(v.param_invariant_differential),
        ];
        let e = entry.expected;
        let want = [e.null, e.t, e.n, e.param_invariant, e.param_invariant_differential];
        let worst: Vec<String> = r
            .tests
            .iter()
            .map(|(k, o)| format!("{k}={:.2e}", o.max_residual))
            .collect();
        assert_eq!(got, want, "{}: {}", entry.id, worst.join(" "));
    }
}
