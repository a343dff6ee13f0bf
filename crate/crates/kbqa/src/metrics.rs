//! Exact-match and answer-F1 evaluation, per-level aggregation, and
//! per-group robustness bounds.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::dataset::Level;
use crate::graph::{from_sexpr, is_isomorphic};
use crate::sexpr::SExpr;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("outcome {qid} is missing its {grouping} id")]
    MissingGroup { qid: String, grouping: Grouping },
}

/// Per-question evaluation result.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub qid: String,
    pub em: bool,
    pub f1: f64,
    pub level: Level,
    pub template_id: Option<String>,
    pub paraphrase_id: Option<String>,
}

/// Semantic exact match: graph isomorphism of the two logical forms.
/// Conversion failures score false.
pub fn exact_match(pred: &SExpr, gold: &SExpr) -> bool {
    exact_match_diagnostic(pred, gold).0
}

/// Exact match plus the conversion failure, if any.
pub fn exact_match_diagnostic(pred: &SExpr, gold: &SExpr) -> (bool, Option<String>) {
    let pred_graph = match from_sexpr(pred) {
        Ok(g) => g,
        Err(e) => return (false, Some(format!("prediction: {e}"))),
    };
    let gold_graph = match from_sexpr(gold) {
        Ok(g) => g,
        Err(e) => return (false, Some(format!("gold: {e}"))),
    };
    (is_isomorphic(&pred_graph, &gold_graph), None)
}

/// F1 over answer sets: both empty scores 1.0, exactly one empty scores 0.0,
/// otherwise the harmonic mean of precision and recall.
pub fn answer_f1<T: Ord>(pred: &BTreeSet<T>, gold: &BTreeSet<T>) -> f64 {
    match (pred.is_empty(), gold.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        (false, false) => {
            let matches = pred.intersection(gold).count() as f64;
            let precision = matches / pred.len() as f64;
            let recall = matches / gold.len() as f64;
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        }
    }
}

/// One aggregate row: EM as a percentage, F1 as a fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub split: String,
    pub count: usize,
    pub em_pct: f64,
    pub f1: f64,
}

/// Mean EM/F1 overall and per generalization level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn overall(&self) -> Option<&ReportRow> {
        self.rows.first()
    }

    /// Machine-readable lines `split<TAB>metric<TAB>value`.
    pub fn machine_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let _ = writeln!(out, "{}\tcount\t{}", row.split, row.count);
            let _ = writeln!(out, "{}\tem\t{:.4}", row.split, row.em_pct);
            let _ = writeln!(out, "{}\tf1\t{:.4}", row.split, row.f1);
        }
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14} {:>8} {:>8} {:>8}", "Split", "Count", "EM", "F1")?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<14} {:>8} {:>8.2} {:>8.4}",
                row.split, row.count, row.em_pct, row.f1
            )?;
        }
        Ok(())
    }
}

fn row(split: &str, outcomes: &[&EvalOutcome]) -> ReportRow {
    let count = outcomes.len();
    let (em_pct, f1) = if count == 0 {
        (0.0, 0.0)
    } else {
        let correct = outcomes.iter().filter(|o| o.em).count();
        let f1_sum: f64 = outcomes.iter().map(|o| o.f1).sum();
        (
            100.0 * correct as f64 / count as f64,
            f1_sum / count as f64,
        )
    };
    ReportRow {
        split: split.to_string(),
        count,
        em_pct,
        f1,
    }
}

/// Aggregates outcomes into Overall / I.I.D. / Compositional / Zero-shot
/// rows. Outcomes with an unset level count toward Overall only.
pub fn aggregate(outcomes: &[EvalOutcome]) -> Report {
    let all: Vec<&EvalOutcome> = outcomes.iter().collect();
    let per_level = |level: Level| -> Vec<&EvalOutcome> {
        outcomes.iter().filter(|o| o.level == level).collect()
    };
    Report {
        rows: vec![
            row("overall", &all),
            row("iid", &per_level(Level::Iid)),
            row("compositional", &per_level(Level::Compositional)),
            row("zero_shot", &per_level(Level::ZeroShot)),
        ],
    }
}

/// The grouping used for robustness bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    Template,
    Paraphrase,
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grouping::Template => "template",
            Grouping::Paraphrase => "paraphrase",
        })
    }
}

/// Robustness envelope as percentages: `lower <= accuracy <= upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessBounds {
    pub lower: f64,
    pub accuracy: f64,
    pub upper: f64,
}

/// Upper bound treats every question of a group as correct if any member is
/// correct; lower bound treats all as incorrect if any member is incorrect.
pub fn robustness_bounds(
    outcomes: &[EvalOutcome],
    grouping: Grouping,
) -> Result<RobustnessBounds, MetricsError> {
    if outcomes.is_empty() {
        return Ok(RobustnessBounds {
            lower: 0.0,
            accuracy: 0.0,
            upper: 0.0,
        });
    }
    let mut groups: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    for outcome in outcomes {
        let key = match grouping {
            Grouping::Template => outcome.template_id.as_deref(),
            Grouping::Paraphrase => outcome.paraphrase_id.as_deref(),
        }
        .ok_or_else(|| MetricsError::MissingGroup {
            qid: outcome.qid.clone(),
            grouping,
        })?;
        let entry = groups.entry(key).or_insert((false, true));
        entry.0 |= outcome.em;
        entry.1 &= outcome.em;
    }
    let total = outcomes.len() as f64;
    let mut any_correct = 0usize;
    let mut all_correct = 0usize;
    let mut correct = 0usize;
    for outcome in outcomes {
        let key = match grouping {
            Grouping::Template => outcome.template_id.as_deref(),
            Grouping::Paraphrase => outcome.paraphrase_id.as_deref(),
        }
        .expect("checked above");
        let (any, all) = groups[key];
        any_correct += any as usize;
        all_correct += all as usize;
        correct += outcome.em as usize;
    }
    Ok(RobustnessBounds {
        lower: 100.0 * all_correct as f64 / total,
        accuracy: 100.0 * correct as f64 / total,
        upper: 100.0 * any_correct as f64 / total,
    })
}
