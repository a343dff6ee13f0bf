//! Candidate logical-form generation within two hops of the anchor entities,
//! plus the pruned decoder vocabulary.

use std::collections::BTreeSet;

use crate::graph::{from_sexpr, to_sexpr};
use crate::kb::{EntityId, FunctionSym, KnowledgeBase, Object, RelationId, SchemaItem};
use crate::sexpr::{evaluate, Denotation, SExpr};

/// Candidates generated for one question's anchors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub anchors: BTreeSet<EntityId>,
    /// Sorted by printed form; no two candidates are graph-isomorphic and
    /// every candidate has a non-empty denotation.
    pub candidates: Vec<SExpr>,
    pub truncated: bool,
}

pub const DEFAULT_LIMIT: usize = 2000;

/// Schema items within 2 hops of the anchors, plus the function and syntax
/// symbols of the logical-form language.
pub fn prune_vocabulary(kb: &KnowledgeBase, anchors: &BTreeSet<EntityId>) -> BTreeSet<SchemaItem> {
    assert!(!anchors.is_empty(), "prune_vocabulary requires anchors");
    let mut items = kb.schema_within_hops(anchors, 2);
    items.extend(FunctionSym::ALL.into_iter().map(SchemaItem::Function));
    items
}

/// One directed traversal step used while building join arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Direction {
    /// `(JOIN r set)`: from objects to subjects.
    Forward,
    /// `(JOIN (R r) set)`: from subjects to objects.
    Reversed,
}

/// A partially built candidate: the join arm's expression builder plus its
/// denotation, kept alongside to avoid re-evaluating.
#[derive(Debug, Clone)]
struct Arm {
    expr: SExpr,
    values: BTreeSet<Object>,
}

fn join_step(kb: &KnowledgeBase, relation: &RelationId, dir: Direction, from: &BTreeSet<Object>) -> BTreeSet<Object> {
    let mut out = BTreeSet::new();
    match dir {
        Direction::Forward => {
            for value in from {
                out.extend(
                    kb.subjects(relation, value)
                        .iter()
                        .cloned()
                        .map(Object::Entity),
                );
            }
        }
        Direction::Reversed => {
            for value in from {
                if let Object::Entity(entity) = value {
                    out.extend(kb.objects(entity, relation).iter().cloned());
                }
            }
        }
    }
    out
}

fn step_expr(relation: &RelationId, dir: Direction, inner: SExpr) -> SExpr {
    let rel = SExpr::Relation(relation.clone());
    match dir {
        Direction::Forward => SExpr::join(rel, inner),
        Direction::Reversed => SExpr::join(SExpr::reverse(rel), inner),
    }
}

/// Relations adjacent to any member of the set, in either direction,
/// excluding the reserved `type` relation.
fn adjacent_relations(kb: &KnowledgeBase, values: &BTreeSet<Object>) -> BTreeSet<(RelationId, Direction)> {
    let mut rels = BTreeSet::new();
    for value in values {
        for r in kb.incoming_relations(value) {
            rels.insert((r.clone(), Direction::Forward));
        }
        if let Object::Entity(entity) = value {
            for r in kb.outgoing_relations(entity) {
                rels.insert((r.clone(), Direction::Reversed));
            }
        }
    }
    rels
}

/// Enumerates candidate logical forms around the anchors: one- and two-hop
/// join arms in every direction combination, pairwise intersections of
/// one-hop arms for distinct anchors, an answer-class conjunct on every
/// form, and a COUNT wrapper for each. Forms with empty denotations and
/// graph-isomorphic duplicates are dropped; survivors are sorted by printed
/// form and truncated at `limit`.
pub fn enumerate_candidates(
    kb: &KnowledgeBase,
    anchors: &BTreeSet<EntityId>,
    limit: usize,
) -> CandidateSet {
    assert!(!anchors.is_empty(), "enumerate_candidates requires anchors");
    assert!(limit > 0, "enumerate_candidates requires a positive limit");

    let mut one_hop_by_anchor: Vec<(EntityId, Vec<Arm>)> = Vec::new();
    let mut forms: Vec<SExpr> = Vec::new();

    for anchor in anchors {
        let start: BTreeSet<Object> = [Object::Entity(anchor.clone())].into();
        let mut one_hop = Vec::new();
        for (relation, dir) in adjacent_relations(kb, &start) {
            let values = join_step(kb, &relation, dir, &start);
            if values.is_empty() {
                continue;
            }
            one_hop.push(Arm {
                expr: step_expr(&relation, dir, SExpr::Entity(anchor.clone())),
                values,
            });
        }

        for arm in &one_hop {
            forms.extend(classed_forms(kb, arm));
            for (relation, dir) in adjacent_relations(kb, &arm.values) {
                let values = join_step(kb, &relation, dir, &arm.values);
                if values.is_empty() {
                    continue;
                }
                let two_hop = Arm {
                    expr: step_expr(&relation, dir, arm.expr.clone()),
                    values,
                };
                forms.extend(classed_forms(kb, &two_hop));
            }
        }
        one_hop_by_anchor.push((anchor.clone(), one_hop));
    }

    // pairwise intersections of one-hop arms from distinct anchors
    for (i, (_, arms_a)) in one_hop_by_anchor.iter().enumerate() {
        for (_, arms_b) in one_hop_by_anchor.iter().skip(i + 1) {
            for arm_a in arms_a {
                for arm_b in arms_b {
                    let values: BTreeSet<Object> =
                        arm_a.values.intersection(&arm_b.values).cloned().collect();
                    if values.is_empty() {
                        continue;
                    }
                    let joint = Arm {
                        expr: SExpr::and(arm_a.expr.clone(), arm_b.expr.clone()),
                        values,
                    };
                    forms.extend(classed_forms(kb, &joint));
                }
            }
        }
    }

    // COUNT wrapper of every surviving form
    forms.extend(forms.clone().into_iter().map(SExpr::count));

    // de-duplicate under graph isomorphism via the canonical reconstruction
    let mut seen_keys = BTreeSet::new();
    let mut unique: Vec<(String, SExpr)> = Vec::new();
    for form in forms {
        let key = canonical_key(&form);
        if seen_keys.insert(key) {
            unique.push((form.to_string(), form));
        }
    }
    unique.sort_by(|(a, _), (b, _)| a.cmp(b));

    let truncated = unique.len() > limit;
    unique.truncate(limit);
    CandidateSet {
        anchors: anchors.clone(),
        candidates: unique.into_iter().map(|(_, e)| e).collect(),
        truncated,
    }
}

/// `(AND class arm)` for every class of the arm's entity members. Arms whose
/// members are all literals produce nothing (literals have no class).
fn classed_forms(kb: &KnowledgeBase, arm: &Arm) -> Vec<SExpr> {
    let mut classes = BTreeSet::new();
    for value in &arm.values {
        if let Object::Entity(entity) = value {
            classes.extend(kb.classes_of(entity).iter().cloned());
        }
    }
    classes
        .into_iter()
        .map(|class| SExpr::and(SExpr::Class(class), arm.expr.clone()))
        .collect()
}

/// Isomorphism-invariant key: the printed form of the deterministic graph
/// reconstruction.
pub(crate) fn canonical_key(e: &SExpr) -> String {
    from_sexpr(e)
        .and_then(|g| to_sexpr(&g))
        .map(|canonical| canonical.to_string())
        .unwrap_or_else(|_| e.to_string())
}

/// True when the candidate's denotation is non-empty; COUNT forms ground to
/// their inner set.
pub fn is_compatible(kb: &KnowledgeBase, e: &SExpr) -> bool {
    let inner = match e {
        SExpr::Count(u) => u.as_ref(),
        other => other,
    };
    matches!(evaluate(inner, kb), Ok(d) if !d.is_empty())
}

#[allow(dead_code)]
fn denotation_of(kb: &KnowledgeBase, e: &SExpr) -> Option<Denotation> {
    evaluate(e, kb).ok()
}
