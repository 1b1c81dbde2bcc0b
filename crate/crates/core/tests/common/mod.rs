//! Shared helpers for the integration suites: seeded random structures,
//! weights and CSP instances at oracle scale.
#![allow(dead_code)] // each test binary uses a subset of the helpers

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wcsp_bound::{CspInstance, Scope, WcspStructure, WeightVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random structure with all unary scopes, random pair scopes and (optionally)
/// an occasional triple. At most `max_vars` variables, domains up to
/// `max_dom`.
pub fn random_structure(
    rng: &mut ChaCha8Rng,
    max_vars: usize,
    max_dom: usize,
    allow_triples: bool,
) -> WcspStructure {
    let n = rng.gen_range(2..=max_vars);
    let doms: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=max_dom)).collect();
    let mut scopes: Vec<Scope> = (0..n).map(|v| Scope::new(vec![v]).unwrap()).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.6) {
                pairs.push(vec![i, j]);
            }
        }
    }
    if pairs.is_empty() {
        pairs.push(vec![0, 1]);
    }
    for p in pairs {
        scopes.push(Scope::new(p).unwrap());
    }
    if allow_triples && n >= 3 && rng.gen_bool(0.3) {
        let mut vars: Vec<usize> = (0..n).collect();
        for k in 0..3 {
            let idx = rng.gen_range(k..vars.len());
            vars.swap(k, idx);
        }
        let triple = Scope::new(vars[..3].to_vec()).unwrap();
        if !scopes.contains(&triple) {
            scopes.push(triple);
        }
    }
    WcspStructure::new(doms, scopes).unwrap()
}

/// Integer weights drawn uniformly from `lo..=hi`.
pub fn random_weights(rng: &mut ChaCha8Rng, s: &WcspStructure, lo: i64, hi: i64) -> WeightVector {
    let weights = (0..s.tuple_count())
        .map(|_| rng.gen_range(lo..=hi) as f64)
        .collect();
    WeightVector::from_vec(s, weights).unwrap()
}

/// Random subset of the tuple set, each tuple allowed with probability `p`.
pub fn random_csp(rng: &mut ChaCha8Rng, s: &WcspStructure, p: f64) -> CspInstance {
    let mut a = CspInstance::empty(s);
    for t in 0..s.tuple_count() {
        if rng.gen_bool(p) {
            a.allow(t);
        }
    }
    a
}

/// Dense binary instance with spread-out pair weights: constraints pull hard
/// in conflicting directions, which is where the stronger consistencies pay
/// off.
pub fn tight_binary(rng: &mut ChaCha8Rng, max_vars: usize) -> (WcspStructure, WeightVector) {
    let n = rng.gen_range(3..=max_vars);
    let doms: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
    let mut scopes: Vec<Scope> = (0..n).map(|v| Scope::new(vec![v]).unwrap()).collect();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.85) {
                scopes.push(Scope::new(vec![i, j]).unwrap());
            }
        }
    }
    if scopes.len() == n {
        scopes.push(Scope::new(vec![0, 1]).unwrap());
    }
    let s = WcspStructure::new(doms, scopes).unwrap();
    let mut weights = vec![0.0; s.tuple_count()];
    for si in 0..s.scope_count() {
        if s.scope(si).arity() == 1 {
            for t in s.block(si) {
                weights[t] = rng.gen_range(0..=2) as f64;
            }
        } else {
            // most tuples cheap, a couple of strong preferences
            for t in s.block(si) {
                weights[t] = rng.gen_range(0..=1) as f64;
            }
            let block: Vec<usize> = s.block(si).collect();
            let hot = block[rng.gen_range(0..block.len())];
            weights[hot] = rng.gen_range(3..=5) as f64;
        }
    }
    let w = WeightVector::from_vec(&s, weights).unwrap();
    (s, w)
}

/// Weights with a sprinkling of hard tuples, keeping at least one finite
/// weight per scope.
pub fn random_hard_weights(rng: &mut ChaCha8Rng, s: &WcspStructure) -> WeightVector {
    let mut weights: Vec<f64> = (0..s.tuple_count())
        .map(|_| {
            if rng.gen_bool(0.25) {
                f64::NEG_INFINITY
            } else {
                rng.gen_range(-3..=5) as f64
            }
        })
        .collect();
    for si in 0..s.scope_count() {
        if s.block(si).all(|t| weights[t] == f64::NEG_INFINITY) {
            let block: Vec<usize> = s.block(si).collect();
            weights[block[rng.gen_range(0..block.len())]] = rng.gen_range(-3..=5) as f64;
        }
    }
    WeightVector::from_vec(s, weights).unwrap()
}
