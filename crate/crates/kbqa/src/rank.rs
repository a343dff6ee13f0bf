//! Candidate scoring with averaged static word embeddings behind a pluggable
//! scorer interface, plus the end-to-end answer pipeline.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use thiserror::Error;

use crate::enumerate::{enumerate_candidates, CandidateSet};
use crate::kb::{EntityId, KnowledgeBase, SchemaItem};
use crate::linker::{detect_mentions, disambiguate, SurfaceLexicon};
use crate::sexpr::{evaluate, Denotation, SExpr};
use crate::stopwords::is_stopword;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("line {line}: malformed embedding line: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: expected {expected} components, got {got}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("empty embedding file")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Token -> vector table; lookups of unknown tokens yield the zero vector.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Loads the textual format `token v1 v2 ... vd`, one token per line;
    /// the dimension is inferred from the first line.
    pub fn load(source: impl BufRead) -> Result<Self, RankError> {
        let mut dimension = None;
        let mut vectors = HashMap::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("non-empty line").to_lowercase();
            let values: Result<Vec<f64>, _> = parts.map(str::parse).collect();
            let values = values.map_err(|e| RankError::Malformed {
                line: lineno,
                detail: format!("bad component: {e}"),
            })?;
            match dimension {
                None => dimension = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(RankError::DimensionMismatch {
                        line: lineno,
                        expected: d,
                        got: values.len(),
                    })
                }
                _ => {}
            }
            vectors.insert(token, values);
        }
        let dimension = dimension.ok_or(RankError::Empty)?;
        Ok(EmbeddingTable { dimension, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// The token's vector, or the zero vector when unknown.
    pub fn vector(&self, token: &str) -> Vec<f64> {
        self.vectors
            .get(&token.to_lowercase())
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.dimension])
    }

    /// Mean of the tokens' vectors; tokens are accumulated in sorted order
    /// so the result is exactly invariant to input order.
    fn mean(&self, tokens: impl Iterator<Item = String>) -> Vec<f64> {
        let mut sorted: Vec<String> = tokens.collect();
        sorted.sort();
        mean_vectors(sorted.iter().map(|t| self.vector(t)), self.dimension)
    }
}

/// Words of a schema item id: dot- and underscore-separated segments,
/// lower-cased.
pub fn item_words(item: &str) -> impl Iterator<Item = String> + '_ {
    item.split(['.', '_'])
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// Mean vector over the words of a schema item id.
pub fn embed_schema_item(item: &str, table: &EmbeddingTable) -> Vec<f64> {
    table.mean(item_words(item))
}

/// Mean vector over the lower-cased, stopword-filtered tokens of free text.
pub fn embed_text(text: &str, table: &EmbeddingTable) -> Vec<f64> {
    table.mean(
        text.split(|c: char| !c.is_alphanumeric() && c != '\'')
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .filter(|t| !is_stopword(t)),
    )
}

fn mean_vectors(vectors: impl Iterator<Item = Vec<f64>>, dimension: usize) -> Vec<f64> {
    let mut sum = vec![0.0; dimension];
    let mut count = 0usize;
    for vector in vectors {
        for (acc, v) in sum.iter_mut().zip(vector) {
            *acc += v;
        }
        count += 1;
    }
    if count > 0 {
        for v in &mut sum {
            *v /= count as f64;
        }
    }
    sum
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Scoring interface; the shipped implementation is the static-embedding
/// scorer, and a learned model can be plugged in behind the same trait.
pub trait Scorer {
    /// Question text is expected to have mention spans already removed.
    fn score(&self, question: &str, candidate: &SExpr) -> f64;
}

impl Scorer for EmbeddingTable {
    fn score(&self, question: &str, candidate: &SExpr) -> f64 {
        score(question, candidate, self)
    }
}

/// Cosine similarity between the question's bag-of-words vector and the mean
/// schema-item vector of the candidate. Always finite, in [-1, 1]; a zero
/// vector on either side scores 0.
pub fn score(question: &str, candidate: &SExpr, table: &EmbeddingTable) -> f64 {
    let question_vec = embed_text(question, table);
    let items = candidate.schema_items();
    let item_vec = mean_vectors(
        items
            .iter()
            .map(|item| embed_schema_item(&item_token(item), table)),
        table.dimension(),
    );
    cosine(&question_vec, &item_vec)
}

/// Schema items embed by their id; functions by their lower-cased name.
fn item_token(item: &SchemaItem) -> String {
    match item {
        SchemaItem::Class(c) => c.to_string(),
        SchemaItem::Relation(r) => r.to_string(),
        SchemaItem::Function(f) => f.name().to_lowercase(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: SExpr,
    pub score: f64,
}

/// Scores every candidate and sorts descending; ties break toward the
/// lexicographically smaller printed form.
pub fn rank_candidates(
    question: &str,
    candidates: &CandidateSet,
    table: &EmbeddingTable,
) -> Vec<ScoredCandidate> {
    rank_with_scorer(question, candidates, &|q, c| score(q, c, table))
}

pub fn rank_with_scorer(
    question: &str,
    candidates: &CandidateSet,
    scorer: &dyn Fn(&str, &SExpr) -> f64,
) -> Vec<ScoredCandidate> {
    let mut scored: Vec<ScoredCandidate> = candidates
        .candidates
        .iter()
        .map(|candidate| ScoredCandidate {
            candidate: candidate.clone(),
            score: scorer(question, candidate),
        })
        .collect();
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.candidate.to_string().cmp(&b.candidate.to_string()))
    });
    scored
}

/// Everything the pipeline derived for one question.
#[derive(Debug, Clone)]
pub struct AnswerTrace {
    pub anchors: BTreeSet<EntityId>,
    pub stripped_question: String,
    pub ranked: Vec<ScoredCandidate>,
    pub truncated: bool,
}

/// Full pipeline: detect mentions, disambiguate to anchors, enumerate
/// candidates, rank, and evaluate the top candidate. Returns `(None, None)`
/// when no mention is detected or no candidate survives.
pub fn answer(
    question: &str,
    kb: &KnowledgeBase,
    lexicon: &SurfaceLexicon,
    table: &EmbeddingTable,
    limit: usize,
    top_k: usize,
) -> (Option<SExpr>, Option<Denotation>) {
    let (expr, denotation, _) = answer_traced(question, kb, lexicon, table, limit, top_k);
    (expr, denotation)
}

pub fn answer_traced(
    question: &str,
    kb: &KnowledgeBase,
    lexicon: &SurfaceLexicon,
    table: &EmbeddingTable,
    limit: usize,
    top_k: usize,
) -> (Option<SExpr>, Option<Denotation>, AnswerTrace) {
    let mut trace = AnswerTrace {
        anchors: BTreeSet::new(),
        stripped_question: question.to_string(),
        ranked: Vec::new(),
        truncated: false,
    };
    let mentions = detect_mentions(question, lexicon);
    if mentions.is_empty() {
        return (None, None, trace);
    }
    for mention in &mentions {
        if let Ok(entities) = disambiguate(mention, lexicon, top_k) {
            trace.anchors.extend(entities.into_iter().map(|(e, _)| e));
        }
    }
    if trace.anchors.is_empty() {
        return (None, None, trace);
    }

    // drop mention spans so entity names do not dominate schema matching
    trace.stripped_question = strip_spans(question, mentions.iter().map(|m| (m.start, m.end)));

    let candidates = enumerate_candidates(kb, &trace.anchors, limit);
    trace.truncated = candidates.truncated;
    if candidates.candidates.is_empty() {
        return (None, None, trace);
    }
    trace.ranked = rank_candidates(&trace.stripped_question, &candidates, table);
    let top = trace.ranked[0].candidate.clone();
    let denotation = evaluate(&top, kb).ok();
    (Some(top), denotation, trace)
}

/// Removes [start, end) character spans, replacing each with a space.
fn strip_spans(text: &str, spans: impl Iterator<Item = (usize, usize)>) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut keep = vec![true; chars.len()];
    for (start, end) in spans {
        for flag in keep.iter_mut().take(end.min(chars.len())).skip(start) {
            *flag = false;
        }
    }
    chars
        .into_iter()
        .zip(keep)
        .map(|(c, k)| if k { c } else { ' ' })
        .collect()
}
