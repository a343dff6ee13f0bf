//! Randomized properties of the knowledge-base store.

mod common;

use std::collections::BTreeSet;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{rand_kb, KbConfig};
use kbqa::kb::{KnowledgeBase, Object};

#[test]
fn indexes_agree_with_the_fact_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for round in 0..30 {
        let cfg = KbConfig {
            entities: 10 + round,
            fact_attempts: 20 * (round + 1).min(25),
            ..KbConfig::default()
        };
        let kb = rand_kb(&mut rng, &cfg);
        assert!(kb.fact_count() <= 500 + cfg.entities * 2);
        for fact in kb.facts() {
            assert!(
                kb.objects(&fact.subject, &fact.relation).contains(&fact.object),
                "forward index misses {fact:?}"
            );
            assert!(
                kb.subjects(&fact.relation, &fact.object).contains(&fact.subject),
                "backward index misses {fact:?}"
            );
        }
        // and nothing extra: index sizes sum to the fact count
        let forward_total: usize = kb
            .entities()
            .map(|e| {
                kb.facts()
                    .filter(|f| &f.subject == e)
                    .count()
            })
            .sum();
        assert_eq!(forward_total, kb.fact_count());
    }
}

#[test]
fn serialization_round_trips_random_kbs() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..10 {
        let kb = rand_kb(&mut rng, &KbConfig::default());
        let mut ontology = Vec::new();
        let mut facts = Vec::new();
        kb.write_ontology(&mut ontology).unwrap();
        kb.write_facts(&mut facts).unwrap();
        let reloaded = KnowledgeBase::load(ontology.as_slice(), facts.as_slice()).unwrap();
        assert_eq!(reloaded, kb);
    }
}

#[test]
fn schema_within_hops_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..15 {
        let kb = rand_kb(&mut rng, &KbConfig::default());
        let entities: Vec<_> = kb.entities().cloned().collect();
        if entities.is_empty() {
            continue;
        }
        let small: BTreeSet<_> = entities.iter().take(1).cloned().collect();
        let large: BTreeSet<_> = entities.iter().take(3).cloned().collect();
        for k in 0..3 {
            let by_k = kb.schema_within_hops(&small, k);
            let by_k1 = kb.schema_within_hops(&small, k + 1);
            assert!(by_k.is_subset(&by_k1), "k-monotonicity failed at k={k}");
            let more_anchors = kb.schema_within_hops(&large, k);
            assert!(
                kb.schema_within_hops(&small, k).is_subset(&more_anchors),
                "anchor-monotonicity failed at k={k}"
            );
        }
    }
}

#[test]
fn literal_objects_survive_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let kb = rand_kb(&mut rng, &KbConfig::default());
    for fact in kb.facts() {
        if let Object::Literal(l) = &fact.object {
            let reparsed = kbqa::Literal::parse(&l.lexical(), l.kind()).unwrap();
            assert_eq!(&reparsed, l);
        }
    }
}
