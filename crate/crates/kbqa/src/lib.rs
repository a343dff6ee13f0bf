//! Question answering over knowledge bases.
//!
//! The pipeline: load a KB ([`kb`]), detect and disambiguate entity mentions
//! ([`linker`]), enumerate candidate logical forms around the anchor entities
//! ([`enumerate`]), score them against the question ([`rank`]), and execute
//! the winner under set-based semantics ([`sexpr`]). Logical forms convert to
//! graph queries for equivalence checking and SPARQL emission ([`graph`],
//! [`sparql`]). [`metrics`] scores predictions and [`genpipe`] generates,
//! samples, and splits synthetic datasets with three-level generalization
//! labels.

pub mod dataset;
pub mod enumerate;
pub mod fixtures;
pub mod genpipe;
pub mod graph;
pub mod kb;
pub mod linker;
pub mod metrics;
pub mod rank;
pub mod sexpr;
pub mod sparql;
pub mod stopwords;

pub use kb::{
    ClassId, EntityId, Fact, FunctionSym, KnowledgeBase, Literal, LiteralKind, Object,
    RelationId, RelationRange, RelationSignature, SchemaItem,
};
pub use sexpr::{CmpOp, Denotation, SExpr, SemType};
