//! Recommender scores against counts recomputed directly from raw corpora.

mod common;

use common::recommend::{context, oracle, pairs, raw_instance, to_instance};
use metaforge_core::model::*;
use metaforge_core::recommender::{index_corpus, CorpusIndex, Score};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn suggestions_match_oracle(
        corpus in prop::collection::vec(raw_instance(4, 4), 0..25),
        target in prop::sample::select(common::recommend::field_names(4)),
        ctx in context(4, 4),
        k in 1usize..6,
        min_support in 1u64..3,
    ) {
        common::recommend::check_suggest(&corpus, &target, &ctx, k, min_support)?;
    }

    #[test]
    fn counts_match_oracle(corpus in prop::collection::vec(raw_instance(4, 4), 0..25)) {
        let instances: Vec<MetadataInstance> = corpus.iter().map(to_instance).collect();
        let index = index_corpus(common::tid(), &instances).unwrap();
        let o = oracle(&corpus);
        prop_assert_eq!(index.n(), o.n);
        for ((f, v), u) in &o.unary {
            prop_assert_eq!(index.unary(f, v), *u);
        }
        for ((a, b), c) in &o.both {
            prop_assert_eq!(index.pairwise((&a.0, &a.1), (&b.0, &b.1)), *c);
            prop_assert!(*c <= o.unary[a].min(o.unary[b]));
        }
        prop_assert_eq!(index.counts().pairwise.len() * 2, o.both.len());
    }

    #[test]
    fn incremental_equals_batch(
        corpus in prop::collection::vec(raw_instance(4, 4), 0..25).prop_shuffle(),
        split in any::<prop::sample::Index>(),
    ) {
        let instances: Vec<MetadataInstance> = corpus.iter().map(to_instance).collect();
        let batch = index_corpus(common::tid(), &instances).unwrap();
        let cut = if instances.is_empty() { 0 } else { split.index(instances.len() + 1) };
        let mut incremental = index_corpus(common::tid(), &instances[..cut]).unwrap();
        for m in &instances[cut..] {
            incremental.add(m).unwrap();
        }
        prop_assert_eq!(incremental.counts(), batch.counts());

        let mut reversed = CorpusIndex::new(common::tid());
        for m in instances.iter().rev() {
            reversed.add(m).unwrap();
        }
        prop_assert_eq!(reversed.counts(), batch.counts());
    }

    #[test]
    fn scores_are_probabilities(
        corpus in prop::collection::vec(raw_instance(4, 4), 1..25),
        target in prop::sample::select(common::recommend::field_names(4)),
        ctx in context(4, 4),
    ) {
        let instances: Vec<MetadataInstance> = corpus.iter().map(to_instance).collect();
        let index = index_corpus(common::tid(), &instances).unwrap();
        let s = index.suggest(&target, &pairs(&ctx), usize::MAX, 1);
        for w in s.windows(2) {
            prop_assert!(w[0].score >= w[1].score);
        }
        for x in &s {
            prop_assert!(x.score <= Score::from_integer(1));
        }
    }
}
