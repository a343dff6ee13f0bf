//! Tiny theater knowledge base and lexicon shipped for tests, examples, and
//! documentation.

use crate::kb::KnowledgeBase;
use crate::linker::SurfaceLexicon;

pub const F1_ONTOLOGY: &str = include_str!("../fixtures/f1_ontology.tsv");
pub const F1_FACTS: &str = include_str!("../fixtures/f1_facts.tsv");
pub const L1_LEXICON: &str = include_str!("../fixtures/l1_lexicon.tsv");
pub const EMBEDDINGS_50D: &str = include_str!("../fixtures/embeddings_f1_50d.txt");

/// The F1 fixture knowledge base: three theaters, two productions, one
/// producer, and per-theater capacities.
pub fn f1() -> KnowledgeBase {
    KnowledgeBase::load(F1_ONTOLOGY.as_bytes(), F1_FACTS.as_bytes())
        .expect("fixture F1 loads")
}

/// The L1 fixture lexicon; `lyric` intentionally ranks `m.lyric_opera` above
/// `m.lyric` to exercise the popularity-disambiguation error mode.
pub fn l1() -> SurfaceLexicon {
    SurfaceLexicon::load(L1_LEXICON.as_bytes()).expect("fixture L1 loads")
}
