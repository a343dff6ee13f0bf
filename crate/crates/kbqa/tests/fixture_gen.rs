//! Regenerates the checked-in embedding fixture. Run explicitly:
//!
//! ```text
//! cargo test -p kbqa --test fixture_gen -- --ignored regenerate
//! ```
//!
//! The table is seeded pseudo-random; the seed below was picked (see
//! `find_working_seed`) so the fixture pipeline example ranks the two-hop
//! theater candidate first for the canonical question.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kbqa::rank::{answer, EmbeddingTable};
use kbqa::{fixtures, EntityId};

const SEED: u64 = 0;
const DIMENSION: usize = 50;
const VOCAB: &[&str] = &[
    "theater",
    "person",
    "production",
    "producer",
    "staged",
    "here",
    "capacity",
    "type",
    "and",
    "count",
    "r",
    "join",
    "argmax",
    "argmin",
    "lt",
    "le",
    "gt",
    "ge",
    "which",
    "what",
    "who",
    "where",
    "has",
    "have",
    "had",
    "was",
    "many",
    "how",
    "much",
    "seats",
    "seat",
    "least",
    "most",
    "large",
    "largest",
    "small",
    "smallest",
    "ten",
    "thousand",
    "hundred",
    "venue",
    "play",
    "show",
    "stage",
    "opera",
    "big",
    "than",
    "more",
    "less",
    "number",
];

fn render_table(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for token in VOCAB {
        let mut line = token.to_string();
        for _ in 0..DIMENSION {
            let v: f64 = rng.gen_range(-1.0..1.0);
            let _ = write!(line, " {v:.4}");
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// The behavior the shipped fixture must exhibit.
fn fixture_works(table: &EmbeddingTable) -> bool {
    let kb = fixtures::f1();
    let lex = fixtures::l1();
    let (expr, _) = answer(
        "which theater staged a production of bob boyett",
        &kb,
        &lex,
        table,
        2000,
        1,
    );
    let top_ok = expr
        .map(|e| e.to_string() == "(AND Theater (JOIN staged_here (JOIN producer m.boyett)))")
        .unwrap_or(false);
    let (lyric_expr, _) = answer("the lyric staged what", &kb, &lex, table, 2000, 1);
    let anchors_isolated = lyric_expr.is_none();
    // the gershwin question should also rank a staged_here form first
    let (gershwin_expr, gershwin_denotation) =
        answer("what production was staged at the gershwin", &kb, &lex, table, 2000, 1);
    let gershwin_ok = gershwin_expr
        .map(|e| e.to_string() == "(AND Production (JOIN (R staged_here) m.gershwin))")
        .unwrap_or(false)
        && gershwin_denotation
            .and_then(|d| d.as_set().cloned())
            .map(|s| {
                s == [kbqa::Object::Entity(EntityId::new("m.prodB"))]
                    .into_iter()
                    .collect::<BTreeSet<_>>()
            })
            .unwrap_or(false);
    top_ok && anchors_isolated && gershwin_ok
}

#[test]
#[ignore = "writes the checked-in fixture"]
fn regenerate_embedding_fixture() {
    let content = render_table(SEED);
    let table = EmbeddingTable::load(content.as_bytes()).unwrap();
    assert!(fixture_works(&table), "seed {SEED} no longer works");
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/embeddings_f1_50d.txt");
    std::fs::write(path, content).unwrap();
}

#[test]
#[ignore = "seed search utility"]
fn find_working_seed() {
    for seed in 0..200 {
        let content = render_table(seed);
        let table = EmbeddingTable::load(content.as_bytes()).unwrap();
        if fixture_works(&table) {
            println!("seed {seed} works");
            return;
        }
    }
    panic!("no working seed in 0..200");
}

#[test]
fn checked_in_fixture_matches_generator() {
    assert_eq!(fixtures::EMBEDDINGS_50D, render_table(SEED));
}
