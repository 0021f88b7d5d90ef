use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::{Constraint, LagrangianDef};
use crate::variational::CurveJet;

/// Interior sample points per curve.
pub const SAMPLES_PER_CURVE: usize = 17;
const SAMPLE_LO: f64 = 0.05;
const SAMPLE_HI: f64 = 0.95;

/// Chebyshev nodes on `(0.05, 0.95)`, ascending.
pub fn chebyshev_samples() -> [f64; SAMPLES_PER_CURVE] {
    let mid = 0.5 * (SAMPLE_LO + SAMPLE_HI);
    let half = 0.5 * (SAMPLE_HI - SAMPLE_LO);
    let n = SAMPLES_PER_CURVE as f64;
    std::array::from_fn(|j| mid - half * ((2 * j + 1) as f64 * PI / (2.0 * n)).cos())
}

/// Independent seed for trial `index` of test `stream` (splitmix64 finaliser).
pub fn trial_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(index.wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_vector(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (0.3..=1.0).contains(&norm) {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// A random jet honouring the constraints of `def`.
///
/// Positions are uniform in `[-1, 1]` (`[0.5, 1.5]` for positive
/// components, a random unit vector for unit groups); the velocity has a
/// uniformly random direction and length in `[0.5, 2]`, redrawn until every
/// regular group carries at least a fifth of it; higher derivatives are
/// uniform in `[-2, 2]`.
pub fn random_jet(def: &LagrangianDef, rng: &mut ChaCha8Rng) -> CurveJet {
    let n = def.n;
    let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut regular = Vec::new();
    for c in &def.constraints {
        match c {
            Constraint::Positive(k) => u[*k] = rng.gen_range(0.5..1.5),
            Constraint::UnitVector(g) => {
                for (&k, x) in g.iter().zip(unit_vector(rng, g.len())) {
                    u[k] = x;
                }
            }
            Constraint::Regular(g) => regular.push(g),
        }
    }
    let du = loop {
        let r = rng.gen_range(0.5..2.0);
        let d: Vec<f64> = unit_vector(rng, n).into_iter().map(|x| r * x).collect();
        let ok = regular
            .iter()
            .all(|g| g.iter().map(|&k| d[k] * d[k]).sum::<f64>().sqrt() >= 0.2 * r);
        if ok {
            break d;
        }
    };
    let mut higher = || -> Vec<f64> { (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect() };
    let (d2u, d3u, d4u) = (higher(), higher(), higher());
    CurveJet {
        s: rng.gen_range(0.0..1.0),
        u,
        du,
        d2u,
        d3u,
        d4u,
    }
}
