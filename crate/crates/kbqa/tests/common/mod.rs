//! Shared test support: randomized knowledge bases, well-typed random
//! logical forms, a naive full-scan oracle evaluator (independent of the
//! indexed evaluator under test), and a synthetic multi-domain corpus.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kbqa::dataset::DatasetRecord;
use kbqa::genpipe::{build_pools, generate_templates, sample_records, Paraphrase, SamplerState};
use kbqa::kb::{
    ClassId, EntityId, KnowledgeBase, Literal, LiteralKind, Object, RelationId, RelationRange,
    TYPE_RELATION,
};
use kbqa::sexpr::{evaluate, typecheck, CmpOp, Denotation, SExpr};

pub struct KbConfig {
    pub domains: usize,
    pub classes_per_domain: usize,
    pub relations_per_domain: usize,
    pub entities: usize,
    pub fact_attempts: usize,
    /// Give some entities a second class.
    pub multi_class: bool,
}

impl Default for KbConfig {
    fn default() -> Self {
        KbConfig {
            domains: 2,
            classes_per_domain: 3,
            relations_per_domain: 4,
            entities: 40,
            fact_attempts: 160,
            multi_class: true,
        }
    }
}

/// Builds a random knowledge base by writing TSV sources and loading them,
/// so every generated KB also exercises the loader.
pub fn rand_kb(rng: &mut ChaCha8Rng, cfg: &KbConfig) -> KnowledgeBase {
    let mut classes = Vec::new();
    for d in 0..cfg.domains {
        for c in 0..cfg.classes_per_domain {
            classes.push(format!("d{d}.c{c}"));
        }
    }

    let mut ontology = String::new();
    let mut relations: Vec<(String, RelationRange)> = Vec::new();
    for d in 0..cfg.domains {
        for r in 0..cfg.relations_per_domain {
            let domain_class = classes[rng.gen_range(0..classes.len())].clone();
            let id = format!("d{d}.{}.r{r}", domain_class.split('.').nth(1).unwrap());
            let range = match rng.gen_range(0..10) {
                0..=5 => RelationRange::Class(ClassId::new(
                    classes[rng.gen_range(0..classes.len())].clone(),
                )),
                6..=7 => RelationRange::Literal(LiteralKind::Integer),
                8 => RelationRange::Literal(LiteralKind::Float),
                _ => RelationRange::Literal(LiteralKind::DateTime),
            };
            let range_text = match &range {
                RelationRange::Class(c) => c.to_string(),
                RelationRange::Literal(k) => format!("#{}", k.token()),
            };
            let _ = writeln!(ontology, "{id}\t{domain_class}\t{range_text}");
            relations.push((id, range));
        }
    }

    let mut facts = String::new();
    let mut members: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for n in 0..cfg.entities {
        let entity = format!("m.x{n}");
        let class = classes[rng.gen_range(0..classes.len())].clone();
        let _ = writeln!(facts, "{entity}\t{TYPE_RELATION}\t{class}");
        members.entry(class).or_default().push(entity.clone());
        if cfg.multi_class && rng.gen_bool(0.15) {
            let second = classes[rng.gen_range(0..classes.len())].clone();
            let _ = writeln!(facts, "{entity}\t{TYPE_RELATION}\t{second}");
            members.entry(second).or_default().push(entity);
        }
    }
    let all_entities: Vec<String> = (0..cfg.entities).map(|n| format!("m.x{n}")).collect();
    if all_entities.is_empty() {
        return KnowledgeBase::load(ontology.as_bytes(), facts.as_bytes()).unwrap();
    }

    let date_pool = [
        "2001-03-04",
        "2005-11-30",
        "2010-01-01",
        "2012-09-15T08:30:00",
        "2015-06-21",
        "2019-12-31T23:00:00",
    ];
    for _ in 0..cfg.fact_attempts {
        let (relation, range) = &relations[rng.gen_range(0..relations.len())];
        // prefer subjects of the declared domain class when it has members
        let domain_class = relation.split('.').nth(1).map(|c| {
            format!("{}.{c}", relation.split('.').next().unwrap())
        });
        let subject = domain_class
            .as_ref()
            .and_then(|c| members.get(c.as_str()))
            .filter(|m| !m.is_empty() && rng.gen_bool(0.8))
            .map(|m| m[rng.gen_range(0..m.len())].clone())
            .unwrap_or_else(|| all_entities[rng.gen_range(0..all_entities.len())].clone());
        let object = match range {
            RelationRange::Class(c) => {
                let pool = members
                    .get(c.as_str())
                    .filter(|m| !m.is_empty() && rng.gen_bool(0.8))
                    .cloned()
                    .unwrap_or_else(|| all_entities.clone());
                pool[rng.gen_range(0..pool.len())].clone()
            }
            RelationRange::Literal(LiteralKind::Integer) => {
                format!("\"{}\"^^int", rng.gen_range(0..30))
            }
            RelationRange::Literal(LiteralKind::Float) => {
                format!("\"{}.5\"^^float", rng.gen_range(0..40))
            }
            RelationRange::Literal(LiteralKind::DateTime) => {
                format!("\"{}\"^^datetime", date_pool[rng.gen_range(0..date_pool.len())])
            }
            RelationRange::Literal(LiteralKind::Text) => "\"text\"^^string".to_string(),
        };
        let _ = writeln!(facts, "{subject}\t{relation}\t{object}");
    }
    KnowledgeBase::load(ontology.as_bytes(), facts.as_bytes()).unwrap()
}

fn rand_class(rng: &mut ChaCha8Rng, kb: &KnowledgeBase) -> Option<ClassId> {
    let classes: Vec<&ClassId> = kb.classes().collect();
    if classes.is_empty() {
        None
    } else {
        Some(classes[rng.gen_range(0..classes.len())].clone())
    }
}

fn rand_entity(rng: &mut ChaCha8Rng, kb: &KnowledgeBase) -> Option<EntityId> {
    let entities: Vec<&EntityId> = kb.entities().collect();
    if entities.is_empty() {
        None
    } else {
        Some(entities[rng.gen_range(0..entities.len())].clone())
    }
}

fn rand_relation(rng: &mut ChaCha8Rng, kb: &KnowledgeBase) -> Option<RelationId> {
    let relations: Vec<RelationId> =
        kb.signatures().map(|s| s.relation.clone()).collect();
    if relations.is_empty() {
        None
    } else {
        Some(relations[rng.gen_range(0..relations.len())].clone())
    }
}

fn rand_orderable_relation(
    rng: &mut ChaCha8Rng,
    kb: &KnowledgeBase,
) -> Option<(RelationId, LiteralKind)> {
    let ordered: Vec<(RelationId, LiteralKind)> = kb
        .signatures()
        .filter_map(|s| match &s.range {
            RelationRange::Literal(k) if k.is_orderable() => Some((s.relation.clone(), *k)),
            _ => None,
        })
        .collect();
    if ordered.is_empty() {
        None
    } else {
        Some(ordered[rng.gen_range(0..ordered.len())].clone())
    }
}

fn rand_bound(rng: &mut ChaCha8Rng, kind: LiteralKind) -> Literal {
    match kind {
        LiteralKind::Integer => Literal::integer(rng.gen_range(0..35)),
        LiteralKind::Float => Literal::float(rng.gen_range(0..70) as f64 / 2.0),
        LiteralKind::DateTime => {
            let dates = ["2003-01-01", "2011-07-15", "2016-02-29", "2019-12-31"];
            Literal::parse(dates[rng.gen_range(0..dates.len())], LiteralKind::DateTime).unwrap()
        }
        LiteralKind::Text => Literal::text("never"),
    }
}

fn rand_literal_leaf(rng: &mut ChaCha8Rng, kb: &KnowledgeBase) -> Option<Literal> {
    for kind in [LiteralKind::Integer, LiteralKind::Float, LiteralKind::DateTime] {
        if rng.gen_bool(0.5) {
            let values: Vec<Literal> = kb.literal_values(kind).into_iter().collect();
            if !values.is_empty() {
                return Some(values[rng.gen_range(0..values.len())].clone());
            }
        }
    }
    None
}

/// A random well-typed set expression over the KB's vocabulary.
pub fn rand_expr(rng: &mut ChaCha8Rng, kb: &KnowledgeBase, max_depth: usize) -> SExpr {
    let expr = if max_depth > 0 && rng.gen_bool(0.2) {
        SExpr::count(gen_set(rng, kb, max_depth - 1))
    } else {
        gen_set(rng, kb, max_depth)
    };
    debug_assert!(
        typecheck(&expr, kb).is_ok(),
        "generator produced ill-typed `{expr}`: {:?}",
        typecheck(&expr, kb)
    );
    expr
}

fn gen_leaf(rng: &mut ChaCha8Rng, kb: &KnowledgeBase) -> SExpr {
    match rng.gen_range(0..10) {
        0..=4 => rand_class(rng, kb)
            .map(SExpr::Class)
            .unwrap_or_else(|| SExpr::class("none.none")),
        5..=7 => rand_entity(rng, kb)
            .map(SExpr::Entity)
            .unwrap_or_else(|| SExpr::entity("m.none")),
        _ => rand_literal_leaf(rng, kb)
            .map(SExpr::Literal)
            .or_else(|| rand_entity(rng, kb).map(SExpr::Entity))
            .unwrap_or_else(|| SExpr::class("none.none")),
    }
}

fn gen_set(rng: &mut ChaCha8Rng, kb: &KnowledgeBase, depth: usize) -> SExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return gen_leaf(rng, kb);
    }
    match rng.gen_range(0..10) {
        0..=2 => SExpr::and(gen_set(rng, kb, depth - 1), gen_set(rng, kb, depth - 1)),
        3..=6 => SExpr::join(gen_binary(rng, kb, depth - 1), gen_set(rng, kb, depth - 1)),
        7 => match rand_orderable_relation(rng, kb) {
            Some((relation, kind)) => {
                let op = CmpOp::ALL[rng.gen_range(0..4)];
                let base = SExpr::Relation(relation);
                let b = if depth >= 2 && rng.gen_bool(0.3) {
                    SExpr::join(gen_binary(rng, kb, 1), base)
                } else {
                    base
                };
                SExpr::compare(op, b, SExpr::Literal(rand_bound(rng, kind)))
            }
            None => SExpr::and(gen_set(rng, kb, depth - 1), gen_set(rng, kb, depth - 1)),
        },
        8..=9 => match rand_orderable_relation(rng, kb) {
            Some((relation, _)) => {
                let u = gen_set(rng, kb, depth - 1);
                if rng.gen_bool(0.5) {
                    SExpr::arg_max(u, SExpr::Relation(relation))
                } else {
                    SExpr::arg_min(u, SExpr::Relation(relation))
                }
            }
            None => gen_leaf(rng, kb),
        },
        _ => unreachable!(),
    }
}

fn gen_binary(rng: &mut ChaCha8Rng, kb: &KnowledgeBase, depth: usize) -> SExpr {
    let fallback = || SExpr::relation("none.none.none");
    if depth == 0 || rng.gen_bool(0.4) {
        return rand_relation(rng, kb)
            .map(SExpr::Relation)
            .unwrap_or_else(fallback);
    }
    match rng.gen_range(0..10) {
        0..=4 => SExpr::reverse(gen_binary(rng, kb, depth - 1)),
        5..=7 => SExpr::join(
            gen_binary(rng, kb, depth - 1),
            gen_binary(rng, kb, depth - 1),
        ),
        _ => rand_relation(rng, kb)
            .map(SExpr::Relation)
            .unwrap_or_else(fallback),
    }
}

/// Recursively shuffles AND argument order; the result is semantically
/// identical and graph-isomorphic to the input.
pub fn shuffle_ands(rng: &mut ChaCha8Rng, e: &SExpr) -> SExpr {
    match e {
        SExpr::And(a, b) => {
            let a = shuffle_ands(rng, a);
            let b = shuffle_ands(rng, b);
            if rng.gen_bool(0.5) {
                SExpr::and(b, a)
            } else {
                SExpr::and(a, b)
            }
        }
        SExpr::Count(u) => SExpr::count(shuffle_ands(rng, u)),
        SExpr::Reverse(b) => SExpr::reverse(shuffle_ands(rng, b)),
        SExpr::Join(b, u) => SExpr::join(shuffle_ands(rng, b), shuffle_ands(rng, u)),
        SExpr::ArgMax(u, b) => SExpr::arg_max(shuffle_ands(rng, u), shuffle_ands(rng, b)),
        SExpr::ArgMin(u, b) => SExpr::arg_min(shuffle_ands(rng, u), shuffle_ands(rng, b)),
        SExpr::Compare(op, b, n) => {
            SExpr::compare(*op, shuffle_ands(rng, b), shuffle_ands(rng, n))
        }
        leaf => leaf.clone(),
    }
}

// ---------------------------------------------------------------------------
// naive oracle: evaluates by definition with full fact scans only
// ---------------------------------------------------------------------------

fn oracle_class_members(kb: &KnowledgeBase, class: &str) -> BTreeSet<Object> {
    kb.facts()
        .filter(|f| {
            f.relation.as_str() == TYPE_RELATION
                && matches!(&f.object, Object::Entity(e) if e.as_str() == class)
        })
        .map(|f| Object::Entity(f.subject.clone()))
        .collect()
}

fn oracle_pairs(kb: &KnowledgeBase, e: &SExpr) -> BTreeSet<(Object, Object)> {
    match e {
        SExpr::Relation(r) => kb
            .facts()
            .filter(|f| &f.relation == r)
            .map(|f| (Object::Entity(f.subject.clone()), f.object.clone()))
            .collect(),
        SExpr::Reverse(b) => oracle_pairs(kb, b)
            .into_iter()
            .map(|(x, y)| (y, x))
            .collect(),
        SExpr::Join(b1, b2) => {
            let left = oracle_pairs(kb, b1);
            let right = oracle_pairs(kb, b2);
            let mut out = BTreeSet::new();
            for (x, y) in &left {
                for (y2, z) in &right {
                    if y == y2 {
                        out.insert((x.clone(), z.clone()));
                    }
                }
            }
            out
        }
        other => panic!("oracle: `{other}` is not a binary expression"),
    }
}

/// Numeric and chronological comparison, written independently of
/// `Literal::compare`.
fn oracle_compare(a: &Literal, b: &Literal) -> Option<std::cmp::Ordering> {
    let as_f64 = |l: &Literal| -> Option<f64> {
        match l {
            Literal::Integer(v) => Some(*v as f64),
            Literal::Float(v) => Some(v.0),
            _ => None,
        }
    };
    match (a, b) {
        (Literal::DateTime(x), Literal::DateTime(y)) => x.partial_cmp(y),
        _ => match (as_f64(a), as_f64(b)) {
            (Some(x), Some(y)) => x.partial_cmp(&y),
            _ => None,
        },
    }
}

/// Evaluates by textbook definition, materializing every sub-denotation via
/// fact scans.
pub fn oracle_eval(e: &SExpr, kb: &KnowledgeBase) -> Denotation {
    match e {
        SExpr::Class(c) => Denotation::Set(oracle_class_members(kb, c.as_str())),
        SExpr::Entity(id) => {
            Denotation::Set([Object::Entity(id.clone())].into_iter().collect())
        }
        SExpr::Literal(l) => {
            Denotation::Set([Object::Literal(l.clone())].into_iter().collect())
        }
        SExpr::Relation(_) | SExpr::Reverse(_) => Denotation::Pairs(oracle_pairs(kb, e)),
        SExpr::And(a, b) => {
            let left = oracle_set(a, kb);
            let right = oracle_set(b, kb);
            Denotation::Set(left.intersection(&right).cloned().collect())
        }
        SExpr::Count(u) => Denotation::Integer(oracle_set(u, kb).len() as u64),
        SExpr::Join(b, u) => {
            if u.is_binary() {
                Denotation::Pairs(oracle_pairs(kb, e))
            } else {
                let values = oracle_set(u, kb);
                Denotation::Set(
                    oracle_pairs(kb, b)
                        .into_iter()
                        .filter(|(_, y)| values.contains(y))
                        .map(|(x, _)| x)
                        .collect(),
                )
            }
        }
        SExpr::ArgMax(u, b) => oracle_superlative(u, b, kb, std::cmp::Ordering::Greater),
        SExpr::ArgMin(u, b) => oracle_superlative(u, b, kb, std::cmp::Ordering::Less),
        SExpr::Compare(op, b, bound) => {
            let SExpr::Literal(bound) = bound.as_ref() else {
                panic!("oracle: ungrounded bound");
            };
            Denotation::Set(
                oracle_pairs(kb, b)
                    .into_iter()
                    .filter(|(_, y)| match y {
                        Object::Literal(v) => {
                            oracle_compare(v, bound).is_some_and(|o| op.accepts(o))
                        }
                        Object::Entity(_) => false,
                    })
                    .map(|(x, _)| x)
                    .collect(),
            )
        }
        SExpr::EntityHole(_) | SExpr::LiteralHole(_) => panic!("oracle: placeholder"),
    }
}

fn oracle_set(e: &SExpr, kb: &KnowledgeBase) -> BTreeSet<Object> {
    match oracle_eval(e, kb) {
        Denotation::Set(s) => s,
        other => panic!("oracle: expected a set, got {other:?}"),
    }
}

fn oracle_superlative(
    u: &SExpr,
    b: &SExpr,
    kb: &KnowledgeBase,
    keep: std::cmp::Ordering,
) -> Denotation {
    let members = oracle_set(u, kb);
    let witnesses: Vec<(Object, Literal)> = oracle_pairs(kb, b)
        .into_iter()
        .filter(|(x, _)| members.contains(x))
        .filter_map(|(x, y)| match y {
            Object::Literal(v) => Some((x, v)),
            Object::Entity(_) => None,
        })
        .collect();
    let mut best: Option<Literal> = None;
    for (_, v) in &witnesses {
        best = match best {
            None => Some(v.clone()),
            Some(current) => {
                if oracle_compare(v, &current) == Some(keep) {
                    Some(v.clone())
                } else {
                    Some(current)
                }
            }
        };
    }
    let Some(best) = best else {
        return Denotation::Set(BTreeSet::new());
    };
    Denotation::Set(
        witnesses
            .into_iter()
            .filter(|(_, v)| oracle_compare(v, &best) == Some(std::cmp::Ordering::Equal))
            .map(|(x, _)| x)
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// synthetic multi-domain corpus for the split and sampler tests
// ---------------------------------------------------------------------------

pub struct CorpusConfig {
    pub domains: usize,
    pub paraphrases_per_template: usize,
    pub records: usize,
    pub max_groundings: usize,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            domains: 8,
            paraphrases_per_template: 3,
            records: 400,
            max_groundings: 10,
            seed: 11,
        }
    }
}

/// A knowledge base whose domains are self-contained, so whole domains can
/// be held out cleanly, plus records sampled through the full pipeline.
pub fn synthetic_corpus(cfg: &CorpusConfig) -> (KnowledgeBase, Vec<DatasetRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ontology = String::new();
    let mut facts = String::new();
    for d in 0..cfg.domains {
        let c = |j: usize| format!("dom{d}.c{j}");
        let _ = writeln!(ontology, "dom{d}.c0.linked\t{}\t{}", c(0), c(1));
        let _ = writeln!(ontology, "dom{d}.c1.part\t{}\t{}", c(1), c(2));
        let _ = writeln!(ontology, "dom{d}.c0.size\t{}\t#int", c(0));
        let _ = writeln!(ontology, "dom{d}.c2.owner\t{}\t{}", c(2), c(0));
        let entity = |j: usize, n: usize| format!("m.d{d}c{j}e{n}");
        for j in 0..3 {
            for n in 0..4 {
                let _ = writeln!(facts, "{}\t{TYPE_RELATION}\t{}", entity(j, n), c(j));
            }
        }
        for n in 0..4 {
            let _ = writeln!(
                facts,
                "{}\tdom{d}.c0.linked\t{}",
                entity(0, n),
                entity(1, rng.gen_range(0..4))
            );
            let _ = writeln!(
                facts,
                "{}\tdom{d}.c1.part\t{}",
                entity(1, n),
                entity(2, rng.gen_range(0..4))
            );
            let _ = writeln!(
                facts,
                "{}\tdom{d}.c0.size\t\"{}\"^^int",
                entity(0, n),
                rng.gen_range(1..20)
            );
            let _ = writeln!(
                facts,
                "{}\tdom{d}.c2.owner\t{}",
                entity(2, n),
                entity(0, rng.gen_range(0..4))
            );
        }
    }
    let kb = KnowledgeBase::load(ontology.as_bytes(), facts.as_bytes()).unwrap();

    let templates = generate_templates(&kb, 2, usize::MAX);
    let mut paraphrases: BTreeMap<String, Vec<Paraphrase>> = BTreeMap::new();
    for t in &templates {
        let base = kbqa::genpipe::synth_question(&t.skeleton);
        let pool: Vec<Paraphrase> = (0..cfg.paraphrases_per_template)
            .map(|p| Paraphrase {
                id: format!("{}-p{p}", t.id),
                text: if p == 0 {
                    base.clone()
                } else {
                    format!("{base} (variant {p})")
                },
            })
            .collect();
        paraphrases.insert(t.id.clone(), pool);
    }
    let pools = build_pools(&kb, &templates, &paraphrases, cfg.max_groundings);
    assert!(!pools.is_empty(), "synthetic corpus has no pools");
    let mut state = SamplerState::new(
        &pools,
        kbqa::genpipe::DEFAULT_RHO_L,
        kbqa::genpipe::DEFAULT_RHO_P,
        cfg.seed,
    );
    let records = sample_records(&pools, &mut state, cfg.records).unwrap();
    (kb, records)
}

/// Convenience: evaluate and compare against the oracle, panicking with a
/// readable message on mismatch.
pub fn assert_matches_oracle(kb: &KnowledgeBase, e: &SExpr) {
    let expected = oracle_eval(e, kb);
    let actual = evaluate(e, kb).unwrap_or_else(|err| panic!("evaluate failed on `{e}`: {err}"));
    assert_eq!(actual, expected, "denotation mismatch for `{e}`");
}

/// Deterministically picks `n` distinct indices.
pub fn pick_indices(rng: &mut ChaCha8Rng, len: usize, n: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..len).collect();
    indices.shuffle(rng);
    indices.truncate(n);
    indices
}
