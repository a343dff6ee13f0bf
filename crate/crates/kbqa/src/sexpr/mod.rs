//! Lisp-style logical forms with set-based semantics.
//!
//! Ten functions operate on sets of entities and sets of binary tuples:
//! `AND`, `COUNT`, `R`, `JOIN`, `ARGMAX`, `ARGMIN`, and the comparatives
//! `LT`, `LE`, `GT`, `GE`. Bare atoms denote classes, entities, relations,
//! and literals; templates may additionally carry typed placeholders
//! (`<e:class>` / `<v:kind>`) in entity and literal positions.

mod eval;
mod parse;
mod typecheck;

pub use eval::{evaluate, Denotation};
pub use parse::{parse, ParseError};
pub use typecheck::{typecheck, SemType, TypeError, ValueKind};

use std::collections::BTreeSet;
use std::fmt;

use crate::kb::{ClassId, EntityId, FunctionSym, Literal, LiteralKind, RelationId, SchemaItem};

/// Comparative operators over literal-valued relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 4] = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

    pub fn function(self) -> FunctionSym {
        match self {
            CmpOp::Lt => FunctionSym::Lt,
            CmpOp::Le => FunctionSym::Le,
            CmpOp::Gt => FunctionSym::Gt,
            CmpOp::Ge => FunctionSym::Ge,
        }
    }

    pub fn accepts(self, ordering: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ordering == Less,
            CmpOp::Le => ordering != Greater,
            CmpOp::Gt => ordering == Greater,
            CmpOp::Ge => ordering != Less,
        }
    }

    /// SPARQL comparison operator.
    pub fn sparql(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.function().name())
    }
}

/// Abstract syntax of a logical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SExpr {
    /// A class, denoting its member entities.
    Class(ClassId),
    /// A single entity, denoting a singleton set.
    Entity(EntityId),
    /// A literal value, denoting a singleton set.
    Literal(Literal),
    /// A relation, denoting its set of (subject, object) pairs.
    Relation(RelationId),
    /// Typed entity placeholder of a template; `None` means any class.
    EntityHole(Option<ClassId>),
    /// Typed literal placeholder of a template.
    LiteralHole(LiteralKind),
    /// Intersection of two entity sets.
    And(Box<SExpr>, Box<SExpr>),
    /// Cardinality of an entity set, as a singleton integer.
    Count(Box<SExpr>),
    /// Tuple-wise reversal of a binary set.
    Reverse(Box<SExpr>),
    /// Join of a binary set with an entity set (unary) or another binary set
    /// (binary), keyed on the first set's second component.
    Join(Box<SExpr>, Box<SExpr>),
    /// Entities of the first argument whose paired value is maximal.
    ArgMax(Box<SExpr>, Box<SExpr>),
    /// Entities of the first argument whose paired value is minimal.
    ArgMin(Box<SExpr>, Box<SExpr>),
    /// Entities whose paired value satisfies the comparison against the
    /// bound, which must be a literal or literal-placeholder leaf.
    Compare(CmpOp, Box<SExpr>, Box<SExpr>),
}

impl SExpr {
    pub fn and(a: SExpr, b: SExpr) -> SExpr {
        SExpr::And(Box::new(a), Box::new(b))
    }

    pub fn count(u: SExpr) -> SExpr {
        SExpr::Count(Box::new(u))
    }

    pub fn reverse(b: SExpr) -> SExpr {
        SExpr::Reverse(Box::new(b))
    }

    pub fn join(b: SExpr, u: SExpr) -> SExpr {
        SExpr::Join(Box::new(b), Box::new(u))
    }

    pub fn arg_max(u: SExpr, b: SExpr) -> SExpr {
        SExpr::ArgMax(Box::new(u), Box::new(b))
    }

    pub fn arg_min(u: SExpr, b: SExpr) -> SExpr {
        SExpr::ArgMin(Box::new(u), Box::new(b))
    }

    pub fn compare(op: CmpOp, b: SExpr, bound: SExpr) -> SExpr {
        SExpr::Compare(op, Box::new(b), Box::new(bound))
    }

    pub fn relation(id: impl Into<String>) -> SExpr {
        SExpr::Relation(RelationId::new(id))
    }

    pub fn class(id: impl Into<String>) -> SExpr {
        SExpr::Class(ClassId::new(id))
    }

    pub fn entity(id: impl Into<String>) -> SExpr {
        SExpr::Entity(EntityId::new(id))
    }

    /// Canonical single-space-separated surface form; `parse` of the result
    /// reproduces the tree.
    pub fn print(&self) -> String {
        self.to_string()
    }

    /// Schema items used by this form: relations, classes, and function
    /// symbols. Entities, literals, and placeholders are not schema items.
    pub fn schema_items(&self) -> BTreeSet<SchemaItem> {
        let mut items = BTreeSet::new();
        self.collect_schema_items(&mut items);
        items
    }

    fn collect_schema_items(&self, items: &mut BTreeSet<SchemaItem>) {
        match self {
            SExpr::Class(c) => {
                items.insert(SchemaItem::Class(c.clone()));
            }
            SExpr::Relation(r) => {
                items.insert(SchemaItem::Relation(r.clone()));
            }
            SExpr::Entity(_) | SExpr::Literal(_) | SExpr::EntityHole(_) | SExpr::LiteralHole(_) => {}
            SExpr::And(a, b) => {
                items.insert(SchemaItem::Function(FunctionSym::And));
                a.collect_schema_items(items);
                b.collect_schema_items(items);
            }
            SExpr::Count(u) => {
                items.insert(SchemaItem::Function(FunctionSym::Count));
                u.collect_schema_items(items);
            }
            SExpr::Reverse(b) => {
                items.insert(SchemaItem::Function(FunctionSym::Reverse));
                b.collect_schema_items(items);
            }
            SExpr::Join(b, u) => {
                items.insert(SchemaItem::Function(FunctionSym::Join));
                b.collect_schema_items(items);
                u.collect_schema_items(items);
            }
            SExpr::ArgMax(u, b) => {
                items.insert(SchemaItem::Function(FunctionSym::ArgMax));
                u.collect_schema_items(items);
                b.collect_schema_items(items);
            }
            SExpr::ArgMin(u, b) => {
                items.insert(SchemaItem::Function(FunctionSym::ArgMin));
                u.collect_schema_items(items);
                b.collect_schema_items(items);
            }
            SExpr::Compare(op, b, bound) => {
                items.insert(SchemaItem::Function(op.function()));
                b.collect_schema_items(items);
                bound.collect_schema_items(items);
            }
        }
    }

    /// True for expressions that denote a set of binary tuples.
    pub fn is_binary(&self) -> bool {
        match self {
            SExpr::Relation(_) | SExpr::Reverse(_) => true,
            SExpr::Join(_, u) => u.is_binary(),
            _ => false,
        }
    }

    /// True if the tree contains a placeholder leaf.
    pub fn has_holes(&self) -> bool {
        match self {
            SExpr::EntityHole(_) | SExpr::LiteralHole(_) => true,
            SExpr::Class(_) | SExpr::Entity(_) | SExpr::Literal(_) | SExpr::Relation(_) => false,
            SExpr::Count(u) | SExpr::Reverse(u) => u.has_holes(),
            SExpr::And(a, b)
            | SExpr::Join(a, b)
            | SExpr::ArgMax(a, b)
            | SExpr::ArgMin(a, b) => a.has_holes() || b.has_holes(),
            SExpr::Compare(_, b, bound) => b.has_holes() || bound.has_holes(),
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Class(c) => c.fmt(f),
            SExpr::Entity(e) => e.fmt(f),
            SExpr::Literal(l) => l.fmt(f),
            SExpr::Relation(r) => r.fmt(f),
            SExpr::EntityHole(Some(c)) => write!(f, "<e:{c}>"),
            SExpr::EntityHole(None) => write!(f, "<e:any>"),
            SExpr::LiteralHole(kind) => write!(f, "<v:{}>", kind.token()),
            SExpr::And(a, b) => write!(f, "(AND {a} {b})"),
            SExpr::Count(u) => write!(f, "(COUNT {u})"),
            SExpr::Reverse(b) => write!(f, "(R {b})"),
            SExpr::Join(b, u) => write!(f, "(JOIN {b} {u})"),
            SExpr::ArgMax(u, b) => write!(f, "(ARGMAX {u} {b})"),
            SExpr::ArgMin(u, b) => write!(f, "(ARGMIN {u} {b})"),
            SExpr::Compare(op, b, bound) => write!(f, "({op} {b} {bound})"),
        }
    }
}
