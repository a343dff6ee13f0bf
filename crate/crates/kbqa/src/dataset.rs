//! Dataset records: one JSON object per line with the question, its logical
//! form, gold answers, and provenance ids.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Generalization level of a record relative to a training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Iid,
    Compositional,
    ZeroShot,
    #[default]
    Unset,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Iid => "iid",
            Level::Compositional => "compositional",
            Level::ZeroShot => "zero_shot",
            Level::Unset => "unset",
        })
    }
}

/// One question with its gold logical form and answers. Answers are the
/// printed forms of the denotation's members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub qid: String,
    pub question: String,
    pub s_expression: String,
    pub answers: Vec<String>,
    pub template_id: String,
    pub paraphrase_id: String,
    pub domain: String,
    #[serde(default)]
    pub level: Level,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: malformed prediction line (expected `qid<TAB>s_expression`)")]
    MalformedPrediction { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads a JSON-lines record file.
pub fn read_records(source: impl BufRead) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut records = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).map_err(|source| DatasetError::Json {
                line: idx + 1,
                source,
            })?,
        );
    }
    Ok(records)
}

/// Writes records as JSON lines.
pub fn write_records(records: &[DatasetRecord], mut w: impl Write) -> Result<(), DatasetError> {
    for record in records {
        serde_json::to_writer(&mut w, record).map_err(|source| DatasetError::Json {
            line: 0,
            source,
        })?;
        writeln!(w)?;
    }
    Ok(())
}

/// Reads a predictions file: `qid<TAB>s_expression`, where the expression may
/// be empty. Returns pairs in file order.
pub fn read_predictions(source: impl BufRead) -> Result<Vec<(String, String)>, DatasetError> {
    let mut preds = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match trimmed.split_once('\t') {
            Some((qid, expr)) => preds.push((qid.trim().to_string(), expr.trim().to_string())),
            None => {
                // a bare qid means an empty prediction
                if trimmed.contains(char::is_whitespace) {
                    return Err(DatasetError::MalformedPrediction { line: idx + 1 });
                }
                preds.push((trimmed.to_string(), String::new()));
            }
        }
    }
    Ok(preds)
}
