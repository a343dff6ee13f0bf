//! Dictionary-based entity linking: longest-match mention detection over a
//! surface-form lexicon and disambiguation by web-frequency popularity.
//!
//! The mention detector is pluggable via [`MentionDetector`] so a learned
//! tagger can replace the dictionary matcher without touching the rest of
//! the pipeline.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use thiserror::Error;

use crate::kb::EntityId;
use crate::stopwords::is_stopword;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("line {line}: malformed lexicon line: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("surface form `{0}` not in lexicon")]
    UnknownSurface(String),
    #[error("predicted and gold lists have different lengths ({pred} vs {gold})")]
    LengthMismatch { pred: usize, gold: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Surface form -> entities ranked by descending frequency (ties broken by
/// entity id).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceLexicon {
    entries: BTreeMap<String, Vec<(EntityId, u64)>>,
    max_words: usize,
}

impl SurfaceLexicon {
    /// Loads a lexicon from TSV lines `surface<TAB>entity_id<TAB>frequency`.
    /// Duplicate (surface, entity) rows sum their frequencies.
    pub fn load(source: impl BufRead) -> Result<Self, LinkError> {
        let mut merged: BTreeMap<String, BTreeMap<EntityId, u64>> = BTreeMap::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            let [surface, entity, freq] = cols.as_slice() else {
                return Err(LinkError::Malformed {
                    line: lineno,
                    detail: format!("expected 3 tab-separated columns, got {}", cols.len()),
                });
            };
            if surface.is_empty() {
                return Err(LinkError::Malformed {
                    line: lineno,
                    detail: "empty surface form".into(),
                });
            }
            let freq: u64 = freq.parse().map_err(|_| LinkError::Malformed {
                line: lineno,
                detail: format!("invalid frequency `{freq}` (must be a non-negative integer)"),
            })?;
            *merged
                .entry(surface.to_lowercase())
                .or_default()
                .entry(EntityId::new(*entity))
                .or_insert(0) += freq;
        }
        let mut lexicon = SurfaceLexicon::default();
        for (surface, by_entity) in merged {
            let mut ranked: Vec<(EntityId, u64)> = by_entity.into_iter().collect();
            ranked.sort_by(|(ea, fa), (eb, fb)| fb.cmp(fa).then_with(|| ea.cmp(eb)));
            lexicon.max_words = lexicon.max_words.max(surface.split(' ').count());
            lexicon.entries.insert(surface, ranked);
        }
        Ok(lexicon)
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.entries.contains_key(surface)
    }

    pub fn entries(&self, surface: &str) -> Option<&[(EntityId, u64)]> {
        self.entries.get(surface).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A detected mention: character span into the question plus the matched
/// lexicon surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    /// Character offset range [start, end) into the question.
    pub start: usize,
    pub end: usize,
    /// The lexicon surface that matched (lower-cased, single-spaced).
    pub surface: String,
}

/// Mentions plus the entities chosen for each.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinkResult {
    pub mentions: Vec<Mention>,
    /// Per mention, the chosen entities with their frequencies.
    pub bindings: Vec<Vec<(EntityId, u64)>>,
}

impl LinkResult {
    /// Union of all bound entities.
    pub fn entities(&self) -> BTreeSet<EntityId> {
        self.bindings
            .iter()
            .flatten()
            .map(|(e, _)| e.clone())
            .collect()
    }
}

/// Interface for mention detection, so a learned detector can be swapped in.
pub trait MentionDetector {
    fn detect(&self, question: &str) -> Vec<Mention>;
}

impl MentionDetector for SurfaceLexicon {
    fn detect(&self, question: &str) -> Vec<Mention> {
        detect_mentions(question, self)
    }
}

/// One word of the question with its character span.
struct Word {
    start: usize,
    end: usize,
    lower: String,
}

fn words_of(question: &str) -> Vec<Word> {
    let mut words = Vec::new();
    let mut current: Option<Word> = None;
    for (pos, ch) in question.chars().enumerate() {
        if ch.is_alphanumeric() || ch == '\'' || ch == '-' {
            match &mut current {
                Some(word) => {
                    word.end = pos + 1;
                    word.lower.extend(ch.to_lowercase());
                }
                None => {
                    current = Some(Word {
                        start: pos,
                        end: pos + 1,
                        lower: ch.to_lowercase().collect(),
                    })
                }
            }
        } else if let Some(word) = current.take() {
            words.push(word);
        }
    }
    if let Some(word) = current.take() {
        words.push(word);
    }
    words
}

/// Greedy left-to-right longest match of lexicon surfaces over word
/// boundaries. Matches that are a single stopword are skipped. Returned
/// mentions never overlap and appear in ascending start order.
pub fn detect_mentions(question: &str, lexicon: &SurfaceLexicon) -> Vec<Mention> {
    let words = words_of(question);
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let mut matched = None;
        let longest = lexicon.max_words.min(words.len() - i);
        for len in (1..=longest).rev() {
            let candidate = words[i..i + len]
                .iter()
                .map(|w| w.lower.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            if len == 1 && is_stopword(&candidate) {
                continue;
            }
            if lexicon.contains(&candidate) {
                matched = Some((len, candidate));
                break;
            }
        }
        match matched {
            Some((len, surface)) => {
                mentions.push(Mention {
                    start: words[i].start,
                    end: words[i + len - 1].end,
                    surface,
                });
                i += len;
            }
            None => i += 1,
        }
    }
    mentions
}

/// Top-k entities for a mention by descending frequency; ties break toward
/// the lexicographically smaller entity id.
pub fn disambiguate(
    mention: &Mention,
    lexicon: &SurfaceLexicon,
    top_k: usize,
) -> Result<Vec<(EntityId, u64)>, LinkError> {
    let ranked = lexicon
        .entries(&mention.surface)
        .ok_or_else(|| LinkError::UnknownSurface(mention.surface.clone()))?;
    Ok(ranked.iter().take(top_k).cloned().collect())
}

/// Detects mentions and binds each to its top-k entities.
pub fn link(question: &str, lexicon: &SurfaceLexicon, top_k: usize) -> LinkResult {
    let mentions = detect_mentions(question, lexicon);
    let bindings = mentions
        .iter()
        .map(|m| disambiguate(m, lexicon, top_k).unwrap_or_default())
        .collect();
    LinkResult { mentions, bindings }
}

/// Micro-averaged linking metrics over questions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkingScore {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

/// Micro-averaged precision/recall/F1 of predicted entity sets against gold
/// entity sets. Questions with no predictions contribute zero matches over
/// zero predictions.
pub fn linking_metrics(
    predicted: &[LinkResult],
    gold: &[BTreeSet<EntityId>],
) -> Result<LinkingScore, LinkError> {
    if predicted.len() != gold.len() {
        return Err(LinkError::LengthMismatch {
            pred: predicted.len(),
            gold: gold.len(),
        });
    }
    let mut matches = 0usize;
    let mut predicted_total = 0usize;
    let mut gold_total = 0usize;
    for (pred, gold_set) in predicted.iter().zip(gold) {
        let pred_set = pred.entities();
        matches += pred_set.intersection(gold_set).count();
        predicted_total += pred_set.len();
        gold_total += gold_set.len();
    }
    let precision = if predicted_total == 0 {
        0.0
    } else {
        matches as f64 / predicted_total as f64
    };
    let recall = if gold_total == 0 {
        0.0
    } else {
        matches as f64 / gold_total as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(LinkingScore {
        recall,
        precision,
        f1,
    })
}
