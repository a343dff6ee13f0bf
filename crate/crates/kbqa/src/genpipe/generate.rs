//! Template generation by breadth-first composition over relation
//! signatures, and compatible grounding of templates against the facts.

use std::collections::BTreeSet;
use std::collections::VecDeque;

use crate::kb::{ClassId, KnowledgeBase, LiteralKind, Object, RelationRange};
use crate::sexpr::{CmpOp, SExpr};

use super::{Template, template_key};

/// A placeholder assignment for one template, in hole order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grounding {
    pub values: Vec<Object>,
}

/// Type of the open end of a partially built chain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum ChainType {
    Class(ClassId),
    Literal(LiteralKind),
}

/// One step of a chain, read from the answer outward.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Step {
    relation: crate::kb::RelationId,
    /// Forward steps wrap `(JOIN r inner)`, reversed steps `(JOIN (R r) inner)`.
    forward: bool,
}

#[derive(Debug, Clone)]
struct Chain {
    answer_class: ClassId,
    steps: Vec<Step>,
    tip: ChainType,
}

impl Chain {
    /// `(AND answer_class (JOIN ±r1 (JOIN ±r2 ... terminal)))`
    fn expr(&self, terminal: SExpr) -> SExpr {
        let mut inner = terminal;
        for step in self.steps.iter().rev() {
            let rel = SExpr::Relation(step.relation.clone());
            inner = if step.forward {
                SExpr::join(rel, inner)
            } else {
                SExpr::join(SExpr::reverse(rel), inner)
            };
        }
        SExpr::and(SExpr::Class(self.answer_class.clone()), inner)
    }

    fn terminal_hole(&self) -> SExpr {
        match &self.tip {
            ChainType::Class(c) => SExpr::EntityHole(Some(c.clone())),
            ChainType::Literal(k) => SExpr::LiteralHole(*k),
        }
    }
}

/// Generates templates by breadth-first composition: chains of up to
/// `max_relations` relations from each answer class, with optional
/// reversals, plus comparative, superlative, and COUNT variants — at most
/// one function per template. Duplicate-free under isomorphism, in
/// deterministic order, truncated at `limit`.
pub fn generate_templates(
    kb: &KnowledgeBase,
    max_relations: usize,
    limit: usize,
) -> Vec<Template> {
    assert!(
        (1..=4).contains(&max_relations),
        "max_relations must be in 1..=4"
    );
    assert!(limit > 0, "limit must be positive");

    let mut skeletons: Vec<SExpr> = Vec::new();

    // superlative templates: a literal-valued relation from the answer class
    let mut superlatives: Vec<(ClassId, crate::kb::RelationId)> = Vec::new();
    for sig in kb.signatures() {
        if let RelationRange::Literal(kind) = &sig.range {
            if kind.is_orderable() {
                superlatives.push((sig.domain.clone(), sig.relation.clone()));
            }
        }
    }
    superlatives.sort();

    let mut queue: VecDeque<Chain> = kb
        .classes()
        .map(|class| Chain {
            answer_class: class.clone(),
            steps: Vec::new(),
            tip: ChainType::Class(class.clone()),
        })
        .collect();

    while let Some(chain) = queue.pop_front() {
        if chain.steps.len() >= max_relations || skeletons.len() >= limit.saturating_mul(8) {
            continue;
        }
        let mut extensions: Vec<(Step, ChainType)> = Vec::new();
        for sig in kb.signatures() {
            match &chain.tip {
                ChainType::Class(current) => {
                    // forward: (JOIN r inner) produces domain(r), inner is range(r)
                    if &sig.domain == current {
                        let tip = match &sig.range {
                            RelationRange::Class(c) => ChainType::Class(c.clone()),
                            RelationRange::Literal(k) => ChainType::Literal(*k),
                        };
                        extensions.push((
                            Step {
                                relation: sig.relation.clone(),
                                forward: true,
                            },
                            tip,
                        ));
                    }
                    // reversed: (JOIN (R r) inner) produces range(r), inner is domain(r)
                    if sig.range == RelationRange::Class(current.clone()) {
                        extensions.push((
                            Step {
                                relation: sig.relation.clone(),
                                forward: false,
                            },
                            ChainType::Class(sig.domain.clone()),
                        ));
                    }
                }
                ChainType::Literal(kind) => {
                    // only a reversed literal-ranged relation continues from a value
                    if sig.range == RelationRange::Literal(*kind) {
                        extensions.push((
                            Step {
                                relation: sig.relation.clone(),
                                forward: false,
                            },
                            ChainType::Class(sig.domain.clone()),
                        ));
                    }
                }
            }
        }
        extensions.sort_by(|(a, ta), (b, tb)| {
            (&a.relation, !a.forward, ta).cmp(&(&b.relation, !b.forward, tb))
        });
        for (step, tip) in extensions {
            let mut steps = chain.steps.clone();
            steps.push(step);
            let extended = Chain {
                answer_class: chain.answer_class.clone(),
                steps,
                tip,
            };
            emit_chain_variants(&extended, &mut skeletons);
            queue.push_back(extended);
        }
    }

    for (class, relation) in superlatives {
        let base = SExpr::Class(class);
        skeletons.push(SExpr::arg_max(base.clone(), SExpr::Relation(relation.clone())));
        skeletons.push(SExpr::arg_min(base, SExpr::Relation(relation)));
    }

    let mut seen = BTreeSet::new();
    let mut templates = Vec::new();
    for skeleton in skeletons {
        let Ok(key) = template_key(&skeleton) else {
            continue;
        };
        if !seen.insert(key) {
            continue;
        }
        let template =
            Template::new(format!("t{}", templates.len()), skeleton).expect("key already built");
        templates.push(template);
        if templates.len() >= limit {
            break;
        }
    }
    templates
}

/// Plain chain, COUNT wrapper, and comparative variants for literal tips.
fn emit_chain_variants(chain: &Chain, skeletons: &mut Vec<SExpr>) {
    let plain = chain.expr(chain.terminal_hole());
    skeletons.push(plain.clone());
    skeletons.push(SExpr::count(plain));
    if let ChainType::Literal(kind) = &chain.tip {
        let last = chain.steps.last().expect("literal tip implies a step");
        if kind.is_orderable() && last.forward {
            // the comparative replaces the terminal literal join
            let prefix = Chain {
                answer_class: chain.answer_class.clone(),
                steps: chain.steps[..chain.steps.len() - 1].to_vec(),
                tip: ChainType::Class(chain.answer_class.clone()),
            };
            for op in CmpOp::ALL {
                let cmp = SExpr::compare(
                    op,
                    SExpr::Relation(last.relation.clone()),
                    SExpr::LiteralHole(*kind),
                );
                skeletons.push(prefix.expr(cmp));
            }
        }
    }
}

/// Enumerates compatible groundings of a template: placeholder values drawn
/// from the class members (or the fact literals of the right kind), kept
/// when the grounded form has a non-empty denotation. COUNT templates ground
/// against their inner set so zero-count groundings are dropped.
pub fn ground_template(
    template: &Template,
    kb: &KnowledgeBase,
    max_groundings: usize,
) -> Vec<Grounding> {
    assert!(max_groundings > 0, "max_groundings must be positive");
    let holes = template.holes();
    let domains: Vec<Vec<Object>> = holes
        .iter()
        .map(|hole| match hole {
            super::HoleSpec::Entity(Some(class)) => kb
                .class_members(class)
                .iter()
                .cloned()
                .map(Object::Entity)
                .collect(),
            super::HoleSpec::Entity(None) => {
                kb.entities().cloned().map(Object::Entity).collect()
            }
            super::HoleSpec::Literal(kind) => kb
                .literal_values(*kind)
                .into_iter()
                .map(Object::Literal)
                .collect(),
        })
        .collect();
    if domains.iter().any(Vec::is_empty) && !domains.is_empty() {
        return Vec::new();
    }

    let mut out = Vec::new();
    let mut odometer = vec![0usize; domains.len()];
    loop {
        let grounding = Grounding {
            values: odometer
                .iter()
                .zip(&domains)
                .map(|(&i, d)| d[i].clone())
                .collect(),
        };
        let grounded = template.ground(&grounding);
        if crate::enumerate::is_compatible(kb, &grounded) {
            out.push(grounding);
            if out.len() >= max_groundings {
                break;
            }
        }
        // advance the odometer; empty-hole templates test once
        let mut pos = domains.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < domains[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
    out
}
