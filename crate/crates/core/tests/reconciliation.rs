use std::collections::HashMap;

use proptest::prelude::*;
use qsdc_core::binlin::BitVector;
use qsdc_core::codes::CssCode;
use qsdc_core::reconcile::{
    bob_recover, collision_entropy, coset_key, leak_adjusted_bound, privacy_amplify, Distribution,
    HashSeed,
};
use qsdc_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn error_patterns(max_weight: usize) -> Vec<BitVector> {
    (0..128u64)
        .map(|e| BitVector::from_u64(e, 7))
        .filter(|e| e.weight() <= max_weight)
        .collect()
}

#[test]
fn keys_agree_for_all_correctable_errors() {
    let code = CssCode::steane();
    let c1: Vec<BitVector> = code.c1().codewords().collect();
    let mut cases = 0;
    for x in (0..128u64).map(|x| BitVector::from_u64(x, 7)) {
        for v in &c1 {
            let declared = x.xor(v).unwrap();
            let alice = coset_key(v, &code).unwrap();
            for eps in error_patterns(1) {
                let y = x.xor(&eps).unwrap();
                let recovered = bob_recover(&y, &declared, code.c1()).unwrap();
                assert_eq!(&recovered, v);
                assert_eq!(coset_key(&recovered, &code).unwrap(), alice);
                cases += 1;
            }
        }
    }
    assert_eq!(cases, 128 * 16 * 8);
}

#[test]
fn weight_two_errors_never_pass_as_clean_recoveries() {
    let code = CssCode::steane();
    let x = BitVector::from_u64(0b1011001, 7);
    for v in code.c1().codewords() {
        let declared = x.xor(&v).unwrap();
        for eps in error_patterns(2).into_iter().filter(|e| e.weight() == 2) {
            let y = x.xor(&eps).unwrap();
            match bob_recover(&y, &declared, code.c1()) {
                Ok(r) => assert_ne!(r, v, "ε = {eps} silently recovered"),
                Err(e) => assert!(matches!(e, Error::DecodeFailure(_))),
            }
        }
    }
}

#[test]
fn coset_key_is_constant_on_cosets() {
    let code = CssCode::steane();
    for v in code.c1().codewords() {
        let k = coset_key(&v, &code).unwrap();
        for c2 in code.c2().codewords() {
            assert_eq!(coset_key(&v.xor(&c2).unwrap(), &code).unwrap(), k);
        }
    }
}

/// With x uniform and v uniform over C1, the public value x ⊕ v is
/// independent of the coset key.
#[test]
fn declared_value_carries_no_key_information() {
    let code = CssCode::steane();
    let c1: Vec<BitVector> = code.c1().codewords().collect();
    let mut joint: HashMap<(BitVector, BitVector), f64> = HashMap::new();
    let mut by_decl: HashMap<BitVector, f64> = HashMap::new();
    let mut by_key: HashMap<BitVector, f64> = HashMap::new();
    let p = 1.0 / (128.0 * c1.len() as f64);
    for x in (0..128u64).map(|x| BitVector::from_u64(x, 7)) {
        for v in &c1 {
            let d = x.xor(v).unwrap();
            let k = coset_key(v, &code).unwrap();
            *joint.entry((d.clone(), k.clone())).or_default() += p;
            *by_decl.entry(d).or_default() += p;
            *by_key.entry(k).or_default() += p;
        }
    }
    let mi: f64 = joint
        .iter()
        .map(|((d, k), &pj)| pj * (pj / (by_decl[d] * by_key[k])).log2())
        .sum();
    assert_eq!(by_key.len(), 2);
    assert!(mi.abs() < 1e-12, "I(declared; key) = {mi}");
}

#[test]
fn toeplitz_universality() {
    let m = 4;
    let len = 24;
    let a = BitVector::from_u64(0x00ab_cdef, len);
    let b = BitVector::from_u64(0x0012_3456, len);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let seeds = 10_000;
    let collisions = (0..seeds)
        .filter(|_| {
            let s = HashSeed::random(len, m, &mut rng);
            privacy_amplify(&a, &s, m).unwrap() == privacy_amplify(&b, &s, m).unwrap()
        })
        .count();
    let p = 2f64.powi(-(m as i32));
    let mean = seeds as f64 * p;
    let sigma = (seeds as f64 * p * (1.0 - p)).sqrt();
    assert!(
        (collisions as f64 - mean).abs() <= 3.0 * sigma,
        "{collisions} collisions, expected {mean} ± {}",
        3.0 * sigma
    );
}

#[test]
fn parity_leak_toy_scenario() {
    // W uniform on 3 bits, Eve learns E = parity(W)
    let h_w = collision_entropy(&Distribution::uniform(8).unwrap());
    let h_e = Distribution::uniform(2).unwrap().shannon_entropy();
    let bound = leak_adjusted_bound(h_w, h_e).unwrap();
    for parity in [false, true] {
        let members: Vec<u64> = (0..8u64)
            .filter(|w| (w.count_ones() % 2 == 1) == parity)
            .collect();
        let cond = Distribution::new(vec![1.0 / members.len() as f64; members.len()]).unwrap();
        assert!(collision_entropy(&cond) >= bound - 1e-12);
    }
    assert_eq!(bound, 2.0);
}

proptest! {
    #[test]
    fn collision_entropy_never_exceeds_shannon(weights in proptest::collection::vec(0.0f64..1.0, 1..20)) {
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 1e-6);
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let fix: f64 = 1.0 - probs.iter().sum::<f64>();
        let mut probs = probs;
        probs[0] = (probs[0] + fix).max(0.0);
        let d = Distribution::new(probs).unwrap();
        prop_assert!(collision_entropy(&d) <= d.shannon_entropy() + 1e-12);
    }

    #[test]
    fn amplified_length_is_exact(w in proptest::collection::vec(any::<bool>(), 1..64), m in 0usize..16, seed in any::<u64>()) {
        let w = BitVector::from_bools(w);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = HashSeed::random(w.len(), m, &mut rng);
        prop_assert_eq!(privacy_amplify(&w, &s, m).unwrap().len(), m);
    }

    #[test]
    fn hashing_is_linear(a in any::<u32>(), b in any::<u32>(), seed in any::<u64>()) {
        let (a, b) = (BitVector::from_u64(a.into(), 32), BitVector::from_u64(b.into(), 32));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = HashSeed::random(32, 10, &mut rng);
        let lhs = privacy_amplify(&a.xor(&b).unwrap(), &s, 10).unwrap();
        let rhs = privacy_amplify(&a, &s, 10).unwrap().xor(&privacy_amplify(&b, &s, 10).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
