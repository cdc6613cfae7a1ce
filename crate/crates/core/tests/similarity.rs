use proptest::prelude::*;
use sketchql_core::similarity::{edit_similarity, EmbeddingStore, SimilarityProvider};
use sketchql_core::sketch::Hint;

fn store(vectors: &[(String, Vec<f32>)]) -> EmbeddingStore {
    let mut s = EmbeddingStore::new(4);
    for (w, v) in vectors {
        s.insert(w, v.clone()).unwrap();
    }
    s
}

fn words() -> impl Strategy<Value = String> {
    "[a-z]{1,8}( [a-z]{1,8}){0,2}"
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, rng_seed: proptest::test_runner::RngSeed::Fixed(20170401), ..ProptestConfig::default() })]

    #[test]
    fn similarity_is_a_probability(a in words(), b in words(), entries in prop::collection::vec(("[a-z]{1,8}", prop::collection::vec(-1.0f32..1.0, 4)), 0..6)) {
        let lexical = SimilarityProvider::lexical();
        let embedded = SimilarityProvider::new(Some(store(&entries)));
        for p in [&lexical, &embedded] {
            let s = p.sim(&Hint::new(&a), &b);
            prop_assert!((0.0..=1.0).contains(&s), "{}", s);
            let c = p.column_score(&Hint::new(&a), &b, &a, Some(0.9));
            prop_assert!((0.0..=1.0).contains(&c));
        }
        prop_assert_eq!(lexical.sim(&Hint::none(), &b), lexical.neutral());
    }

    #[test]
    fn edit_similarity_is_symmetric_and_reflexive(a in "[a-z]{0,10}", b in "[a-z]{0,10}") {
        prop_assert_eq!(edit_similarity(&a, &b).to_bits(), edit_similarity(&b, &a).to_bits());
        prop_assert_eq!(edit_similarity(&a, &a), 1.0);
        prop_assert!((0.0..=1.0).contains(&edit_similarity(&a, &b)));
    }

    #[test]
    fn identical_text_scores_one(a in words()) {
        prop_assert!((SimilarityProvider::lexical().sim(&Hint::new(&a), &a) - 1.0).abs() < 1e-12);
    }
}
