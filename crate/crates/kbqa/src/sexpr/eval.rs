//! Denotational evaluation of logical forms over a knowledge base.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::kb::{KnowledgeBase, Literal, Object};

use super::typecheck::TypeError;
use super::SExpr;

/// Result of evaluating a logical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Denotation {
    /// A (possibly empty) set of entities or literal values.
    Set(BTreeSet<Object>),
    /// The singleton integer produced by COUNT.
    Integer(u64),
    /// A set of binary tuples.
    Pairs(BTreeSet<(Object, Object)>),
}

impl Denotation {
    pub fn is_empty(&self) -> bool {
        match self {
            Denotation::Set(s) => s.is_empty(),
            Denotation::Integer(_) => false,
            Denotation::Pairs(p) => p.is_empty(),
        }
    }

    /// The denotation as a set of answer values; COUNT results become a
    /// singleton integer literal.
    pub fn into_answers(self) -> BTreeSet<Object> {
        match self {
            Denotation::Set(s) => s,
            Denotation::Integer(n) => [Object::Literal(Literal::integer(n as i64))].into(),
            Denotation::Pairs(p) => p.into_iter().map(|(x, _)| x).collect(),
        }
    }

    pub fn as_set(&self) -> Option<&BTreeSet<Object>> {
        match self {
            Denotation::Set(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Denotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Denotation::Set(s) => {
                write!(f, "{{")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
            Denotation::Integer(n) => write!(f, "{{{n}}}"),
            Denotation::Pairs(p) => {
                write!(f, "{{")?;
                for (i, (x, y)) in p.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "({x}, {y})")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Evaluates a well-typed logical form. Empty denotations are legal results;
/// only type errors (including placeholders) are reported.
pub fn evaluate(e: &SExpr, kb: &KnowledgeBase) -> Result<Denotation, TypeError> {
    match e {
        SExpr::Class(c) => Ok(Denotation::Set(
            kb.class_members(c)
                .iter()
                .cloned()
                .map(Object::Entity)
                .collect(),
        )),
        SExpr::Entity(id) => Ok(Denotation::Set(
            [Object::Entity(id.clone())].into_iter().collect(),
        )),
        SExpr::Literal(l) => Ok(Denotation::Set(
            [Object::Literal(l.clone())].into_iter().collect(),
        )),
        SExpr::EntityHole(_) | SExpr::LiteralHole(_) => {
            Err(TypeError::UngroundedPlaceholder(e.to_string()))
        }
        SExpr::Relation(_) | SExpr::Reverse(_) => Ok(Denotation::Pairs(eval_pairs(e, kb)?)),
        SExpr::And(a, b) => {
            let left = eval_set(a, kb)?;
            let right = eval_set(b, kb)?;
            Ok(Denotation::Set(left.intersection(&right).cloned().collect()))
        }
        SExpr::Count(u) => Ok(Denotation::Integer(eval_set(u, kb)?.len() as u64)),
        SExpr::Join(b, x) => {
            if x.is_binary() {
                Ok(Denotation::Pairs(eval_pairs(e, kb)?))
            } else {
                Ok(Denotation::Set(join_values(b, &eval_set(x, kb)?, kb)?))
            }
        }
        SExpr::ArgMax(u, b) => superlative(u, b, kb, Ordering::Greater),
        SExpr::ArgMin(u, b) => superlative(u, b, kb, Ordering::Less),
        SExpr::Compare(op, b, bound) => {
            let bound = match bound.as_ref() {
                SExpr::Literal(l) => l.clone(),
                other => return Err(TypeError::UngroundedPlaceholder(other.to_string())),
            };
            let mut result = BTreeSet::new();
            for (x, y) in eval_pairs(b, kb)? {
                let Object::Literal(value) = &y else { continue };
                if let Some(ordering) = value.compare(&bound) {
                    if op.accepts(ordering) {
                        result.insert(x);
                    }
                }
            }
            Ok(Denotation::Set(result))
        }
    }
}

fn eval_set(e: &SExpr, kb: &KnowledgeBase) -> Result<BTreeSet<Object>, TypeError> {
    match evaluate(e, kb)? {
        Denotation::Set(s) => Ok(s),
        found => Err(TypeError::Mismatch {
            expr: e.to_string(),
            expected: "a set of entities".into(),
            found: match found {
                Denotation::Integer(_) => "a singleton set of integer".into(),
                _ => "a set of binary tuples".into(),
            },
        }),
    }
}

/// Unary join `{x : (x, y) in b, y in values}`. Plain and reversed relations
/// run off the adjacency indexes instead of materializing the relation's
/// extension.
fn join_values(
    b: &SExpr,
    values: &BTreeSet<Object>,
    kb: &KnowledgeBase,
) -> Result<BTreeSet<Object>, TypeError> {
    match b {
        SExpr::Relation(r) => {
            kb.signature(r)
                .ok_or_else(|| TypeError::UnknownRelation(r.to_string()))?;
            let mut out = BTreeSet::new();
            for y in values {
                for subject in kb.subjects(r, y) {
                    out.insert(Object::Entity(subject.clone()));
                }
            }
            Ok(out)
        }
        SExpr::Reverse(inner) => match inner.as_ref() {
            SExpr::Relation(r) => {
                kb.signature(r)
                    .ok_or_else(|| TypeError::UnknownRelation(r.to_string()))?;
                let mut out = BTreeSet::new();
                for y in values {
                    if let Object::Entity(subject) = y {
                        out.extend(kb.objects(subject, r).iter().cloned());
                    }
                }
                Ok(out)
            }
            SExpr::Reverse(b2) => join_values(b2, values, kb),
            _ => join_values_materialized(b, values, kb),
        },
        _ => join_values_materialized(b, values, kb),
    }
}

fn join_values_materialized(
    b: &SExpr,
    values: &BTreeSet<Object>,
    kb: &KnowledgeBase,
) -> Result<BTreeSet<Object>, TypeError> {
    Ok(eval_pairs(b, kb)?
        .into_iter()
        .filter(|(_, y)| values.contains(y))
        .map(|(x, _)| x)
        .collect())
}

/// Materializes the extension of a binary expression.
fn eval_pairs(b: &SExpr, kb: &KnowledgeBase) -> Result<BTreeSet<(Object, Object)>, TypeError> {
    match b {
        SExpr::Relation(r) => {
            kb.signature(r)
                .ok_or_else(|| TypeError::UnknownRelation(r.to_string()))?;
            Ok(kb
                .facts()
                .filter(|f| &f.relation == r)
                .map(|f| (Object::Entity(f.subject.clone()), f.object.clone()))
                .collect())
        }
        SExpr::Reverse(inner) => Ok(eval_pairs(inner, kb)?
            .into_iter()
            .map(|(x, y)| (y, x))
            .collect()),
        SExpr::Join(b1, b2) if b2.is_binary() => {
            let left = eval_pairs(b1, kb)?;
            let right = eval_pairs(b2, kb)?;
            let mut out = BTreeSet::new();
            for (x, y) in &left {
                for (y2, z) in &right {
                    if y == y2 {
                        out.insert((x.clone(), z.clone()));
                    }
                }
            }
            Ok(out)
        }
        other => Err(TypeError::Mismatch {
            expr: other.to_string(),
            expected: "a set of binary tuples".into(),
            found: "a set of entities".into(),
        }),
    }
}

/// `{x in u : (x, y) in b and y extremal over pairs with x in u}`. Entities
/// without any pair cannot witness an extremum and are dropped; ties return
/// every extremal entity.
fn superlative(
    u: &SExpr,
    b: &SExpr,
    kb: &KnowledgeBase,
    keep: Ordering,
) -> Result<Denotation, TypeError> {
    let members = eval_set(u, kb)?;
    let mut best: Option<Literal> = None;
    let mut witnesses: Vec<(Object, Literal)> = Vec::new();
    for (x, y) in pairs_restricted(b, &members, kb)? {
        let Object::Literal(value) = y else { continue };
        witnesses.push((x, value.clone()));
        best = match best {
            None => Some(value),
            Some(current) => {
                if value.compare(&current) == Some(keep) {
                    Some(value)
                } else {
                    Some(current)
                }
            }
        };
    }
    let Some(best) = best else {
        return Ok(Denotation::Set(BTreeSet::new()));
    };
    Ok(Denotation::Set(
        witnesses
            .into_iter()
            .filter(|(_, v)| v.compare(&best) == Some(Ordering::Equal))
            .map(|(x, _)| x)
            .collect(),
    ))
}

/// Pairs of `b` whose first component lies in `xs`, off the forward index
/// when `b` is a plain relation.
fn pairs_restricted(
    b: &SExpr,
    xs: &BTreeSet<Object>,
    kb: &KnowledgeBase,
) -> Result<Vec<(Object, Object)>, TypeError> {
    if let SExpr::Relation(r) = b {
        kb.signature(r)
            .ok_or_else(|| TypeError::UnknownRelation(r.to_string()))?;
        let mut out = Vec::new();
        for x in xs {
            if let Object::Entity(subject) = x {
                for object in kb.objects(subject, r) {
                    out.push((x.clone(), object.clone()));
                }
            }
        }
        return Ok(out);
    }
    Ok(eval_pairs(b, kb)?
        .into_iter()
        .filter(|(x, _)| xs.contains(x))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sexpr::parse;

    fn eval(kb: &KnowledgeBase, text: &str) -> Denotation {
        evaluate(&parse(text).unwrap(), kb).unwrap()
    }

    fn entities(ids: &[&str]) -> Denotation {
        Denotation::Set(ids.iter().map(|id| Object::Entity((*id).into())).collect())
    }

    #[test]
    fn evaluates_the_running_example() {
        let kb = fixtures::f1();
        let d = eval(
            &kb,
            "(AND Theater (AND (GE capacity 10000) (JOIN staged_here (JOIN producer m.boyett))))",
        );
        assert_eq!(d, entities(&["m.lyric"]));
    }

    #[test]
    fn count_returns_cardinality() {
        let kb = fixtures::f1();
        assert_eq!(
            eval(&kb, "(COUNT (JOIN producer m.boyett))"),
            Denotation::Integer(2)
        );
    }

    #[test]
    fn disjoint_classes_intersect_to_empty() {
        let kb = fixtures::f1();
        assert_eq!(eval(&kb, "(AND Person Theater)"), entities(&[]));
    }

    #[test]
    fn argmax_ignores_entities_without_pairs() {
        let kb = fixtures::f1();
        // m.lyric_opera has no capacity fact and cannot witness the maximum
        assert_eq!(eval(&kb, "(ARGMAX Theater capacity)"), entities(&["m.lyric"]));
        assert_eq!(eval(&kb, "(ARGMIN Theater capacity)"), entities(&["m.gershwin"]));
    }

    #[test]
    fn reverse_swaps_pairs() {
        let kb = fixtures::f1();
        assert_eq!(
            eval(&kb, "(JOIN (R producer) m.prodA)"),
            entities(&["m.boyett"])
        );
    }

    #[test]
    fn comparatives_follow_the_bound() {
        let kb = fixtures::f1();
        assert_eq!(eval(&kb, "(GE capacity 10000)"), entities(&["m.lyric"]));
        assert_eq!(
            eval(&kb, "(LE capacity 10500)"),
            entities(&["m.gershwin", "m.lyric"])
        );
        assert_eq!(eval(&kb, "(LT capacity 1900)"), entities(&[]));
    }

    #[test]
    fn join_through_a_literal_value() {
        let kb = fixtures::f1();
        // theaters with the same capacity as m.lyric
        assert_eq!(
            eval(&kb, "(JOIN capacity (JOIN (R capacity) m.lyric))"),
            entities(&["m.lyric"])
        );
    }

    #[test]
    fn binary_join_composes() {
        let kb = fixtures::f1();
        // staged_here ∘ producer : theater -> person
        let d = eval(&kb, "(JOIN (JOIN staged_here producer) m.boyett)");
        assert_eq!(d, entities(&["m.gershwin", "m.lyric"]));
    }

    #[test]
    fn placeholders_do_not_evaluate() {
        let kb = fixtures::f1();
        let e = parse("(JOIN producer <e:Person>)").unwrap();
        assert!(matches!(
            evaluate(&e, &kb),
            Err(TypeError::UngroundedPlaceholder(_))
        ));
    }
}
