//! Static typing of logical forms against a knowledge base.

use std::fmt;

use thiserror::Error;

use crate::kb::{KnowledgeBase, LiteralKind, RelationRange, TYPE_RELATION};

use super::SExpr;

/// Kind of the second component of a binary tuple set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Entity,
    Literal(LiteralKind),
}

impl ValueKind {
    pub fn is_orderable(self) -> bool {
        matches!(self, ValueKind::Literal(k) if k.is_orderable())
    }

    fn numeric(self) -> bool {
        matches!(
            self,
            ValueKind::Literal(LiteralKind::Integer) | ValueKind::Literal(LiteralKind::Float)
        )
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueKind::Entity => f.write_str("entity"),
            ValueKind::Literal(k) => f.write_str(k.token()),
        }
    }
}

/// Semantic type of a logical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemType {
    /// A set of entities (or literal values used as a singleton set).
    EntitySet,
    /// A singleton set of one integer, produced by COUNT.
    IntegerSet,
    /// A set of binary tuples whose second component has the given kind.
    PairSet(ValueKind),
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::EntitySet => f.write_str("a set of entities"),
            SemType::IntegerSet => f.write_str("a singleton set of integer"),
            SemType::PairSet(kind) => write!(f, "a set of (entity, {kind}) tuples"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("in `{expr}`: expected {expected}, found {found}")]
    Mismatch {
        expr: String,
        expected: String,
        found: String,
    },
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("in `{expr}`: {op} requires an orderable value, found {found}")]
    NotOrderable {
        expr: String,
        op: String,
        found: String,
    },
    #[error("placeholder `{0}` in an executable expression")]
    UngroundedPlaceholder(String),
}

fn mismatch(expr: &SExpr, expected: impl Into<String>, found: SemType) -> TypeError {
    TypeError::Mismatch {
        expr: expr.to_string(),
        expected: expected.into(),
        found: found.to_string(),
    }
}

/// Infers the semantic type of `e` against `kb`, or reports the offending
/// subtree.
pub fn typecheck(e: &SExpr, kb: &KnowledgeBase) -> Result<SemType, TypeError> {
    match e {
        SExpr::Class(_) | SExpr::Entity(_) | SExpr::Literal(_) | SExpr::EntityHole(_) => {
            Ok(SemType::EntitySet)
        }
        SExpr::LiteralHole(_) => Ok(SemType::EntitySet),
        SExpr::Relation(r) => {
            if r.as_str() == TYPE_RELATION {
                return Err(TypeError::UnknownRelation(format!(
                    "{TYPE_RELATION} (reserved; use a class atom instead)"
                )));
            }
            let sig = kb
                .signature(r)
                .ok_or_else(|| TypeError::UnknownRelation(r.to_string()))?;
            Ok(SemType::PairSet(match &sig.range {
                RelationRange::Class(_) => ValueKind::Entity,
                RelationRange::Literal(kind) => ValueKind::Literal(*kind),
            }))
        }
        SExpr::And(a, b) => {
            for side in [a, b] {
                let t = typecheck(side, kb)?;
                if t != SemType::EntitySet {
                    return Err(mismatch(side, "a set of entities", t));
                }
            }
            Ok(SemType::EntitySet)
        }
        SExpr::Count(u) => {
            let t = typecheck(u, kb)?;
            if t != SemType::EntitySet {
                return Err(mismatch(u, "a set of entities", t));
            }
            Ok(SemType::IntegerSet)
        }
        SExpr::Reverse(b) => match typecheck(b, kb)? {
            // reversal puts the (entity-valued) subject side second
            SemType::PairSet(_) => Ok(SemType::PairSet(ValueKind::Entity)),
            t => Err(mismatch(b, "a set of binary tuples", t)),
        },
        SExpr::Join(b, x) => {
            let tb = typecheck(b, kb)?;
            let SemType::PairSet(_) = tb else {
                return Err(mismatch(b, "a set of binary tuples", tb));
            };
            match typecheck(x, kb)? {
                SemType::EntitySet => Ok(SemType::EntitySet),
                SemType::PairSet(kind) => Ok(SemType::PairSet(kind)),
                t @ SemType::IntegerSet => Err(mismatch(x, "a set of entities or tuples", t)),
            }
        }
        SExpr::ArgMax(u, b) | SExpr::ArgMin(u, b) => {
            let op = if matches!(e, SExpr::ArgMax(..)) {
                "ARGMAX"
            } else {
                "ARGMIN"
            };
            let tu = typecheck(u, kb)?;
            if tu != SemType::EntitySet {
                return Err(mismatch(u, "a set of entities", tu));
            }
            match typecheck(b, kb)? {
                SemType::PairSet(kind) if kind.is_orderable() => Ok(SemType::EntitySet),
                SemType::PairSet(kind) => Err(TypeError::NotOrderable {
                    expr: e.to_string(),
                    op: op.into(),
                    found: kind.to_string(),
                }),
                t => Err(mismatch(b, "a set of binary tuples", t)),
            }
        }
        SExpr::Compare(op, b, bound) => {
            let bound_kind = match bound.as_ref() {
                SExpr::Literal(l) => l.kind(),
                SExpr::LiteralHole(kind) => *kind,
                other => {
                    return Err(TypeError::Mismatch {
                        expr: e.to_string(),
                        expected: "a literal bound".into(),
                        found: other.to_string(),
                    })
                }
            };
            if !bound_kind.is_orderable() {
                return Err(TypeError::NotOrderable {
                    expr: e.to_string(),
                    op: op.to_string(),
                    found: bound_kind.to_string(),
                });
            }
            match typecheck(b, kb)? {
                SemType::PairSet(kind) if kind.is_orderable() => {
                    let compatible = match kind {
                        ValueKind::Literal(LiteralKind::DateTime) => {
                            bound_kind == LiteralKind::DateTime
                        }
                        _ => {
                            kind.numeric()
                                && matches!(
                                    bound_kind,
                                    LiteralKind::Integer | LiteralKind::Float
                                )
                        }
                    };
                    if compatible {
                        Ok(SemType::EntitySet)
                    } else {
                        Err(TypeError::Mismatch {
                            expr: e.to_string(),
                            expected: format!("a {kind} bound"),
                            found: bound_kind.to_string(),
                        })
                    }
                }
                SemType::PairSet(kind) => Err(TypeError::NotOrderable {
                    expr: e.to_string(),
                    op: op.to_string(),
                    found: kind.to_string(),
                }),
                t => Err(mismatch(b, "a set of binary tuples", t)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sexpr::parse;

    #[test]
    fn comparative_returns_entity_set() {
        let kb = fixtures::f1();
        let e = parse("(GE capacity 10000)").unwrap();
        assert_eq!(typecheck(&e, &kb).unwrap(), SemType::EntitySet);
    }

    #[test]
    fn count_returns_integer_set() {
        let kb = fixtures::f1();
        let e = parse("(COUNT Theater)").unwrap();
        assert_eq!(typecheck(&e, &kb).unwrap(), SemType::IntegerSet);
    }

    #[test]
    fn superlative_over_entity_range_is_a_type_error() {
        let kb = fixtures::f1();
        let e = parse("(ARGMAX Theater producer)").unwrap();
        assert!(matches!(
            typecheck(&e, &kb),
            Err(TypeError::NotOrderable { .. })
        ));
    }

    #[test]
    fn relation_types_follow_signatures() {
        let kb = fixtures::f1();
        let rev = parse("(R producer)").unwrap();
        assert_eq!(
            typecheck(&rev, &kb).unwrap(),
            SemType::PairSet(ValueKind::Entity)
        );
        let cap = parse("(R capacity)").unwrap();
        assert_eq!(
            typecheck(&cap, &kb).unwrap(),
            SemType::PairSet(ValueKind::Entity)
        );
    }

    #[test]
    fn join_composes_pair_types() {
        let kb = fixtures::f1();
        let binary = parse("(JOIN staged_here (R staged_here))").unwrap();
        assert_eq!(
            typecheck(&binary, &kb).unwrap(),
            SemType::PairSet(ValueKind::Entity)
        );
        let unary = parse("(JOIN producer m.boyett)").unwrap();
        assert_eq!(typecheck(&unary, &kb).unwrap(), SemType::EntitySet);
    }

    #[test]
    fn datetime_bound_must_match_range() {
        let kb = fixtures::f1();
        let e = parse("(GE capacity 2012-09-15)").unwrap();
        assert!(matches!(typecheck(&e, &kb), Err(TypeError::Mismatch { .. })));
    }

    #[test]
    fn unknown_relation_is_reported() {
        let kb = fixtures::f1();
        let e = parse("(JOIN director m.boyett)").unwrap();
        assert_eq!(
            typecheck(&e, &kb).unwrap_err(),
            TypeError::UnknownRelation("director".into())
        );
    }
}
