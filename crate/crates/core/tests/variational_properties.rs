use proptest::prelude::*;
use varlag::catalog;
use varlag::dsl::{value_and_partials, LagrangianDef, Var};
use varlag::variational::{euler_lagrange, random_regular_curve, split, CurveSampler, CurveSpec};

fn catalog_def(i: usize) -> LagrangianDef {
    let entries = catalog::entries();
    entries[i % entries.len()].default_def()
}

fn curve_for(def: &LagrangianDef, seed: u64) -> CurveSpec {
    CurveSampler::for_def(def, 3).sample(seed).unwrap()
}

/// `(L_u, L_p, L_q)` at parameter `s` along `curve`.
fn partials_along(def: &LagrangianDef, curve: &CurveSpec, s: f64) -> Vec<f64> {
    let n = def.n;
    let dirs: Vec<Var> = (0..n)
        .map(Var::U)
        .chain((0..n).map(Var::P))
        .chain((0..if def.is_second_order() { n } else { 0 }).map(Var::Q))
        .collect();
    let jet = curve.jet(s).unwrap();
    let (_, g) = value_and_partials(&def.body, &def.bindings(&jet.point()).unwrap(), &dirs).unwrap();
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decomposition_reconstructs_the_residual(
        e in prop::collection::vec(-10.0f64..10.0, 2..6),
        seed in any::<u64>(),
    ) {
        let n = e.len();
        let du: Vec<f64> = (0..n).map(|i| ((seed >> (8 * i)) as u8 as f64 - 127.5) / 64.0).collect();
        prop_assume!(du.iter().map(|x| x * x).sum::<f64>() > 0.01);
        let r = split(e.clone(), &du, 1.0);
        let speed2: f64 = du.iter().map(|x| x * x).sum();
        let norm = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            let back = r.tangential / speed2 * du[i] + r.normal[i];
            prop_assert!((back - e[i]).abs() <= 1e-13 * norm.max(f64::MIN_POSITIVE), "{back} vs {}", e[i]);
        }
        let along: f64 = r.normal.iter().zip(&du).map(|(a, b)| a * b).sum();
        prop_assert!(along.abs() <= 1e-13 * norm * speed2.sqrt());
    }

    #[test]
    fn euler_lagrange_matches_five_point_differences(i in 0usize..64, seed in any::<u64>(), s in 0.1f64..0.9) {
        let def = catalog_def(i);
        let n = def.n;
        let curve = curve_for(&def, seed);
        let el = euler_lagrange(&def, &curve.jet(s).unwrap()).unwrap();
        let h = 1e-4;
        let g: Vec<Vec<f64>> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|k| partials_along(&def, &curve, s + k * h)).collect();
        for c in 0..n {
            let lp = |j: usize| g[j][n + c];
            let lq = |j: usize| g[j].get(2 * n + c).copied().unwrap_or(0.0);
            let d_lp = (lp(0) - 8.0 * lp(1) + 8.0 * lp(3) - lp(4)) / (12.0 * h);
            let dd_lq = (-lq(0) + 16.0 * lq(1) - 30.0 * lq(2) + 16.0 * lq(3) - lq(4)) / (12.0 * h * h);
            let fd = g[2][c] - d_lp + dd_lq;
            let err = (fd - el.residual[c]).abs() / el.scale;
            prop_assert!(err <= 1e-5, "{} component {c}: {} vs {fd} (scale {})", def.name, el.residual[c], el.scale);
        }
    }

    #[test]
    fn sampled_curves_stay_regular(seed in any::<u64>(), n in 1usize..5, modes in 0usize..7) {
        let curve = random_regular_curve(seed, n, modes).unwrap();
        let again = random_regular_curve(seed, n, modes).unwrap();
        let speeds: Vec<f64> = (0..=100).map(|k| curve.jet_to(k as f64 / 100.0, 1).unwrap().speed()).collect();
        let (lo, hi) = speeds.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        prop_assert!(lo > 0.0 && lo >= 0.1 * hi * (1.0 - 1e-9), "{lo} {hi}");
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            prop_assert_eq!(curve.jet(s).unwrap(), again.jet(s).unwrap());
        }
    }
}

#[test]
fn thousand_samples_are_regular() {
    for seed in 0..1000u64 {
        let curve = random_regular_curve(seed, 2, 4).unwrap();
        for k in 0..=20 {
            assert!(curve.jet_to(k as f64 / 20.0, 1).unwrap().speed() > 0.0);
        }
    }
}
