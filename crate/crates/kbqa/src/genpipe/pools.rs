//! Assembly of sampling pools: grounding every template, computing answers,
//! and attaching paraphrases (from a pool file, or a mechanical canonical
//! question when none is supplied).

use std::collections::BTreeMap;
use std::io::BufRead;

use crate::graph::from_sexpr;
use crate::kb::{KnowledgeBase, Object};
use crate::sexpr::{evaluate, CmpOp, SExpr};

use super::{ground_template, GroundedForm, Paraphrase, Template, TemplatePool};

/// Reads a paraphrase pool file: `template_id<TAB>text` with `[bracketed]`
/// slots, one paraphrase per line. Paraphrase ids are `<template>-p<n>` in
/// file order.
pub fn read_paraphrases(
    source: impl BufRead,
) -> std::io::Result<BTreeMap<String, Vec<Paraphrase>>> {
    let mut pools: BTreeMap<String, Vec<Paraphrase>> = BTreeMap::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((template_id, text)) = line.split_once('\t') else {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("line {}: expected template_id<TAB>paraphrase", idx + 1),
            ));
        };
        let entry = pools.entry(template_id.trim().to_string()).or_default();
        entry.push(Paraphrase {
            id: format!("{}-p{}", template_id.trim(), entry.len()),
            text: text.to_string(),
        });
    }
    Ok(pools)
}

/// Grounds each template and pairs it with its paraphrases. Templates with
/// no compatible grounding are dropped; templates without supplied
/// paraphrases get one mechanical canonical question.
pub fn build_pools(
    kb: &KnowledgeBase,
    templates: &[Template],
    paraphrases: &BTreeMap<String, Vec<Paraphrase>>,
    max_groundings: usize,
) -> Vec<TemplatePool> {
    let mut pools = Vec::new();
    for template in templates {
        let groundings = ground_template(template, kb, max_groundings);
        if groundings.is_empty() {
            continue;
        }
        let forms: Vec<GroundedForm> = groundings
            .iter()
            .map(|grounding| {
                let expr = template.ground(grounding);
                let answers: Vec<String> = evaluate(&expr, kb)
                    .map(|d| d.into_answers().iter().map(Object::to_string).collect())
                    .unwrap_or_default();
                GroundedForm {
                    domain: answer_domain(&expr),
                    values: grounding.values.clone(),
                    answers,
                    expr,
                }
            })
            .collect();
        let pool_paraphrases = paraphrases.get(&template.id).cloned().unwrap_or_else(|| {
            vec![Paraphrase {
                id: format!("{}-p0", template.id),
                text: synth_question(&template.skeleton),
            }]
        });
        pools.push(TemplatePool {
            template_id: template.id.clone(),
            forms,
            paraphrases: pool_paraphrases,
        });
    }
    pools
}

/// Domain label of the answer class, used to bucket records for the
/// zero-shot split.
pub fn answer_domain(expr: &SExpr) -> String {
    from_sexpr(expr)
        .ok()
        .and_then(|g| {
            let answer = g.answer_node()?;
            g.nodes[answer]
                .classes
                .iter()
                .next()
                .map(|c| c.domain().to_string())
        })
        .unwrap_or_else(|| "unknown".to_string())
}

/// Mechanical canonical question for a template, with one bracketed slot per
/// placeholder in hole order.
pub fn synth_question(skeleton: &SExpr) -> String {
    fn words(id: &str) -> String {
        id.rsplit('.')
            .next()
            .unwrap_or(id)
            .replace('_', " ")
            .to_lowercase()
    }
    fn phrase(e: &SExpr) -> String {
        match e {
            SExpr::Class(c) => words(c.as_str()),
            SExpr::Entity(id) => format!("[{id}]"),
            SExpr::Literal(l) => format!("[{}]", l.lexical()),
            SExpr::EntityHole(Some(c)) => format!("[{}]", words(c.as_str())),
            SExpr::EntityHole(None) => "[thing]".to_string(),
            SExpr::LiteralHole(kind) => format!("[{}]", kind.token()),
            SExpr::And(a, b) => format!("{} {}", phrase(a), phrase(b)),
            SExpr::Join(b, u) => match b.as_ref() {
                SExpr::Reverse(inner) => {
                    format!("that is the {} of {}", binary_words(inner), phrase(u))
                }
                _ => format!("that has {} {}", binary_words(b), phrase(u)),
            },
            SExpr::Compare(op, b, bound) => {
                let op_words = match op {
                    CmpOp::Lt => "less than",
                    CmpOp::Le => "at most",
                    CmpOp::Gt => "more than",
                    CmpOp::Ge => "at least",
                };
                format!("whose {} is {op_words} {}", binary_words(b), phrase(bound))
            }
            SExpr::ArgMax(u, b) => format!("{} with the largest {}", phrase(u), binary_words(b)),
            SExpr::ArgMin(u, b) => format!("{} with the smallest {}", phrase(u), binary_words(b)),
            SExpr::Count(u) => phrase(u),
            SExpr::Relation(r) => words(r.as_str()),
            SExpr::Reverse(b) => binary_words(b),
        }
    }
    fn binary_words(e: &SExpr) -> String {
        match e {
            SExpr::Relation(r) => words(r.as_str()),
            SExpr::Reverse(b) => binary_words(b),
            SExpr::Join(a, b) => format!("{} {}", binary_words(a), binary_words(b)),
            other => phrase(other),
        }
    }
    let lead = if matches!(skeleton, SExpr::Count(_)) {
        "how many"
    } else {
        "which"
    };
    format!("{lead} {}", phrase(skeleton))
}
