use proptest::prelude::*;
use qsdc_core::binlin::{coset_representatives, BitMatrix, BitVector};
use qsdc_core::codes::{gv_bound_k, t_error_probability, CssCode, LinearCode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bitvec(len: usize) -> impl Strategy<Value = BitVector> {
    proptest::collection::vec(any::<bool>(), len).prop_map(BitVector::from_bools)
}

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BitMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        proptest::collection::vec(bitvec(c), r)
            .prop_map(move |rows| BitMatrix::from_rows(c, rows).unwrap())
    })
}

/// Every vector in the row space of `m`, by brute force over combinations.
fn span(m: &BitMatrix) -> Vec<BitVector> {
    let mut out: Vec<BitVector> = (0..1u64 << m.num_rows())
        .map(|mask| {
            let mut v = BitVector::zeros(m.num_cols());
            for (i, r) in m.rows().iter().enumerate() {
                if (mask >> (m.num_rows() - 1 - i)) & 1 == 1 {
                    v.xor_assign(r).unwrap();
                }
            }
            v
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

proptest! {
    #[test]
    fn xor_is_an_involution((v, w) in (1usize..80).prop_flat_map(|n| (bitvec(n), bitvec(n)))) {
        prop_assert_eq!(v.xor(&w).unwrap().xor(&w).unwrap(), v.clone());
        prop_assert!(v.xor(&v).unwrap().is_zero());
    }

    #[test]
    fn null_space_rows_are_annihilated(m in matrix(8, 12)) {
        let ns = m.null_space();
        prop_assert_eq!(ns.num_rows(), m.num_cols() - m.rank());
        for r in ns.rows() {
            prop_assert!(m.mat_vec(r).unwrap().is_zero());
        }
        prop_assert_eq!(ns.rank(), ns.num_rows());
    }

    #[test]
    fn rank_matches_span_size(m in matrix(6, 8)) {
        prop_assert_eq!(1usize << m.rank(), span(&m).len());
        prop_assert!(m.rank() <= m.num_rows().min(m.num_cols()));
    }

    #[test]
    fn echelon_keeps_row_space(m in matrix(6, 8)) {
        prop_assert_eq!(span(&m), span(&m.echelon().to_matrix()));
    }

    #[test]
    fn double_dual_is_the_row_space(m in matrix(6, 9)) {
        prop_assert!(m.null_space().null_space().same_row_space(&m));
    }

    /// Nested pairs built as (inner rows ∪ extra rows, inner rows), n ≤ 10.
    #[test]
    fn cosets_partition_the_outer_code(inner in matrix(3, 10), extra in proptest::collection::vec(bitvec(10), 0..3)) {
        let n = inner.num_cols();
        let extra: Vec<BitVector> = extra.into_iter().map(|v| v.slice(0, n)).collect();
        let mut outer_rows = inner.rows().to_vec();
        outer_rows.extend(extra);
        let outer = BitMatrix::from_rows(n, outer_rows).unwrap();
        let reps = coset_representatives(&outer, &inner).unwrap();
        let outer_words = span(&outer);
        let inner_words = span(&inner);
        prop_assert_eq!(outer_words.len(), reps.len() * inner_words.len());
        for c in &outer_words {
            let hits = reps.iter().filter(|r| inner_words.contains(&c.xor(r).unwrap())).count();
            prop_assert_eq!(hits, 1);
        }
        for (i, a) in reps.iter().enumerate() {
            for b in &reps[i + 1..] {
                prop_assert!(!inner_words.contains(&a.xor(b).unwrap()));
            }
        }
    }

    #[test]
    fn t_error_probabilities_sum_to_one(n in 0usize..40, p in 0.0f64..=1.0) {
        let total: f64 = (0..=n).map(|t| t_error_probability(n, t, p).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "sum {}", total);
    }
}

#[test]
fn hamming_rank_and_codewords() {
    let h = LinearCode::hamming_7_4();
    assert_eq!(h.generator().rank(), 4);
    for c in h.codewords() {
        assert!(h.parity_check().mat_vec(&c).unwrap().is_zero());
    }
    assert_eq!(h.codewords().count(), 16);
}

#[test]
fn css_distance_matches_exhaustive_scan() {
    let code = CssCode::steane();
    let scan = |c: &LinearCode| c.codewords().skip(1).map(|w| w.weight()).min().unwrap();
    assert_eq!(code.d(), scan(code.c1()).min(scan(code.c2())));
    assert_eq!(code.d(), 3);
}

#[test]
fn gv_bound_holds_for_corpus() {
    let corpus = [
        LinearCode::hamming_7_4(),
        LinearCode::repetition(3),
        LinearCode::hamming_7_4().dual().unwrap(),
    ];
    for code in &corpus {
        assert!(
            code.k() as f64 >= gv_bound_k(code.n(), code.d()).unwrap(),
            "[{}, {}, {}]",
            code.n(),
            code.k(),
            code.d()
        );
    }
}

#[test]
fn rate_halves_when_length_doubles() {
    // two Steane blocks side by side: same k1 − k2 over twice the length
    let steane = CssCode::steane();
    let widen = |c: &LinearCode| {
        let rows = c
            .generator()
            .rows()
            .iter()
            .map(|r| BitVector::concat([r, &BitVector::zeros(7)]))
            .collect();
        LinearCode::from_generator(BitMatrix::from_rows(14, rows).unwrap()).unwrap()
    };
    let wide = CssCode::new(widen(steane.c1()), widen(steane.c2())).unwrap();
    assert_eq!(wide.k(), steane.k());
    assert_eq!(wide.code_rate() * 2.0, steane.code_rate());
}

#[test]
fn single_error_probability_matches_sampling() {
    let exact = t_error_probability(7, 1, 0.01).unwrap();
    assert!((exact - 7.0 * 0.01 * 0.99f64.powi(6)).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let trials = 200_000;
    let hits = (0..trials)
        .filter(|_| (0..7).filter(|_| rng.gen::<f64>() < 0.01).count() == 1)
        .count();
    let freq = hits as f64 / trials as f64;
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((freq - exact).abs() < 4.0 * sigma, "freq {freq} vs {exact}");
}
