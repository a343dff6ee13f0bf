//! In-memory knowledge base: ontology signatures plus fact sets indexed for
//! constant-time adjacency lookup in both directions.
//!
//! Class membership is stored as ordinary facts over the reserved relation
//! [`TYPE_RELATION`], so the fact set stays homogeneous and class lookups are
//! plain index reads.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};

use chrono::{NaiveDate, NaiveDateTime};
use ordered_float::OrderedFloat;
use thiserror::Error;

/// Reserved relation id connecting an entity to its class.
pub const TYPE_RELATION: &str = "type";

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }

            /// First dot-separated segment of the id, e.g. `theater` for
            /// `theater.theater.capacity`.
            pub fn domain(&self) -> &str {
                self.0.split('.').next().unwrap_or(&self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }
    };
}

id_type!(
    /// Machine id of an entity, e.g. `m.lyric`.
    EntityId
);
id_type!(
    /// Dotted-path id of a class, e.g. `theater.theater`.
    ClassId
);
id_type!(
    /// Dotted-path id of a binary relation.
    RelationId
);

/// The four literal payload kinds a relation range can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LiteralKind {
    Integer,
    Float,
    DateTime,
    Text,
}

impl LiteralKind {
    pub fn token(self) -> &'static str {
        match self {
            LiteralKind::Integer => "int",
            LiteralKind::Float => "float",
            LiteralKind::DateTime => "datetime",
            LiteralKind::Text => "string",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "int" => Some(LiteralKind::Integer),
            "float" => Some(LiteralKind::Float),
            "datetime" => Some(LiteralKind::DateTime),
            "string" => Some(LiteralKind::Text),
            _ => None,
        }
    }

    /// Kinds that admit the comparative/superlative order.
    pub fn is_orderable(self) -> bool {
        !matches!(self, LiteralKind::Text)
    }
}

impl fmt::Display for LiteralKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A typed literal value. The derived `Ord` is a storage order (kind, then
/// value); the semantic order used by comparatives is [`Literal::compare`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Integer(i64),
    Float(OrderedFloat<f64>),
    DateTime(NaiveDateTime),
    Text(String),
}

impl Literal {
    pub fn integer(v: i64) -> Self {
        Literal::Integer(v)
    }

    pub fn float(v: f64) -> Self {
        Literal::Float(OrderedFloat(v))
    }

    pub fn text(v: impl Into<String>) -> Self {
        Literal::Text(v.into())
    }

    pub fn kind(&self) -> LiteralKind {
        match self {
            Literal::Integer(_) => LiteralKind::Integer,
            Literal::Float(_) => LiteralKind::Float,
            Literal::DateTime(_) => LiteralKind::DateTime,
            Literal::Text(_) => LiteralKind::Text,
        }
    }

    /// Parses the lexical form of a literal of a known kind. Integers and
    /// floats must parse losslessly; datetimes accept an ISO-8601 date or
    /// date-time, with bare dates padded to midnight.
    pub fn parse(lexical: &str, kind: LiteralKind) -> Result<Self, String> {
        match kind {
            LiteralKind::Integer => lexical
                .parse::<i64>()
                .map(Literal::Integer)
                .map_err(|e| format!("invalid integer `{lexical}`: {e}")),
            LiteralKind::Float => {
                let v: f64 = lexical
                    .parse()
                    .map_err(|e| format!("invalid float `{lexical}`: {e}"))?;
                if !v.is_finite() {
                    return Err(format!("non-finite float `{lexical}`"));
                }
                Ok(Literal::float(v))
            }
            LiteralKind::DateTime => parse_datetime(lexical)
                .ok_or_else(|| format!("invalid ISO-8601 date or date-time `{lexical}`")),
            LiteralKind::Text => Ok(Literal::Text(lexical.to_string())),
        }
    }

    /// Recognizes an unquoted atom as an integer, float, or datetime literal.
    pub fn parse_numeric_atom(atom: &str) -> Option<Self> {
        if let Ok(v) = atom.parse::<i64>() {
            return Some(Literal::Integer(v));
        }
        if looks_like_datetime(atom) {
            return parse_datetime(atom);
        }
        if atom
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+' || c == '.')
        {
            if let Ok(v) = atom.parse::<f64>() {
                if v.is_finite() {
                    return Some(Literal::float(v));
                }
            }
        }
        None
    }

    /// Canonical unquoted lexical form; the inverse of [`Literal::parse`] for
    /// the literal's own kind.
    pub fn lexical(&self) -> String {
        match self {
            Literal::Integer(v) => v.to_string(),
            // {:?} keeps a trailing `.0` on integral floats so the form
            // reparses as a float, not an integer.
            Literal::Float(v) => format!("{:?}", v.0),
            Literal::DateTime(dt) => {
                if dt.time() == chrono::NaiveTime::MIN {
                    dt.format("%Y-%m-%d").to_string()
                } else {
                    dt.format("%Y-%m-%dT%H:%M:%S").to_string()
                }
            }
            Literal::Text(v) => v.clone(),
        }
    }

    /// Semantic comparison: integers and floats compare numerically across
    /// kinds, datetimes chronologically. Text has no order.
    pub fn compare(&self, other: &Literal) -> Option<Ordering> {
        match (self, other) {
            (Literal::Integer(a), Literal::Integer(b)) => Some(a.cmp(b)),
            (Literal::Integer(a), Literal::Float(b)) => (*a as f64).partial_cmp(&b.0),
            (Literal::Float(a), Literal::Integer(b)) => a.0.partial_cmp(&(*b as f64)),
            (Literal::Float(a), Literal::Float(b)) => a.0.partial_cmp(&b.0),
            (Literal::DateTime(a), Literal::DateTime(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Text(v) => write!(f, "\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\"")),
            _ => f.write_str(&self.lexical()),
        }
    }
}

fn looks_like_datetime(atom: &str) -> bool {
    let bytes = atom.as_bytes();
    bytes.len() >= 10
        && bytes[0..4].iter().all(u8::is_ascii_digit)
        && bytes[4] == b'-'
        && bytes[5..7].iter().all(u8::is_ascii_digit)
        && bytes[7] == b'-'
        && bytes[8..10].iter().all(u8::is_ascii_digit)
}

fn parse_datetime(lexical: &str) -> Option<Literal> {
    if let Ok(dt) = NaiveDateTime::parse_from_str(lexical, "%Y-%m-%dT%H:%M:%S") {
        return Some(Literal::DateTime(dt));
    }
    NaiveDate::parse_from_str(lexical, "%Y-%m-%d")
        .ok()
        .map(|d| Literal::DateTime(d.and_hms_opt(0, 0, 0).expect("midnight")))
}

/// Object position of a fact: an entity or a literal value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Object {
    Entity(EntityId),
    Literal(Literal),
}

impl Object {
    pub fn as_entity(&self) -> Option<&EntityId> {
        match self {
            Object::Entity(e) => Some(e),
            Object::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Object::Entity(_) => None,
            Object::Literal(l) => Some(l),
        }
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Entity(e) => e.fmt(f),
            Object::Literal(l) => l.fmt(f),
        }
    }
}

impl From<EntityId> for Object {
    fn from(e: EntityId) -> Self {
        Object::Entity(e)
    }
}

impl From<Literal> for Object {
    fn from(l: Literal) -> Self {
        Object::Literal(l)
    }
}

/// Range of a relation: a class of entities or a literal kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationRange {
    Class(ClassId),
    Literal(LiteralKind),
}

impl fmt::Display for RelationRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationRange::Class(c) => c.fmt(f),
            RelationRange::Literal(k) => write!(f, "#{}", k.token()),
        }
    }
}

/// Ontology entry for one relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSignature {
    pub relation: RelationId,
    pub domain: ClassId,
    pub range: RelationRange,
}

/// One relational fact. Class-membership facts use [`TYPE_RELATION`] with the
/// class id carried as an entity-shaped marker object.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub subject: EntityId,
    pub relation: RelationId,
    pub object: Object,
}

/// One of the Lisp function symbols of the logical-form language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FunctionSym {
    And,
    Count,
    Reverse,
    Join,
    ArgMax,
    ArgMin,
    Lt,
    Le,
    Gt,
    Ge,
}

impl FunctionSym {
    pub const ALL: [FunctionSym; 10] = [
        FunctionSym::And,
        FunctionSym::Count,
        FunctionSym::Reverse,
        FunctionSym::Join,
        FunctionSym::ArgMax,
        FunctionSym::ArgMin,
        FunctionSym::Lt,
        FunctionSym::Le,
        FunctionSym::Gt,
        FunctionSym::Ge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionSym::And => "AND",
            FunctionSym::Count => "COUNT",
            FunctionSym::Reverse => "R",
            FunctionSym::Join => "JOIN",
            FunctionSym::ArgMax => "ARGMAX",
            FunctionSym::ArgMin => "ARGMIN",
            FunctionSym::Lt => "LT",
            FunctionSym::Le => "LE",
            FunctionSym::Gt => "GT",
            FunctionSym::Ge => "GE",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }
}

impl fmt::Display for FunctionSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A schema item: relation, class, or function symbol. Entities and literals
/// are deliberately not schema items.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemaItem {
    Class(ClassId),
    Relation(RelationId),
    Function(FunctionSym),
}

impl SchemaItem {
    /// Domain label of the item; functions are domain-less.
    pub fn domain(&self) -> Option<&str> {
        match self {
            SchemaItem::Class(c) => Some(c.domain()),
            SchemaItem::Relation(r) => Some(r.domain()),
            SchemaItem::Function(_) => None,
        }
    }
}

impl fmt::Display for SchemaItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaItem::Class(c) => c.fmt(f),
            SchemaItem::Relation(r) => r.fmt(f),
            SchemaItem::Function(s) => s.fmt(f),
        }
    }
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("line {line}: malformed {what}: {detail}")]
    Malformed {
        line: usize,
        what: &'static str,
        detail: String,
    },
    #[error("line {line}: fact uses undeclared relation `{relation}`")]
    UndeclaredRelation { line: usize, relation: String },
    #[error("line {line}: object kind mismatch for `{relation}`: expected {expected}, got {got}")]
    RangeMismatch {
        line: usize,
        relation: String,
        expected: String,
        got: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

static EMPTY_OBJECTS: BTreeSet<Object> = BTreeSet::new();
static EMPTY_ENTITIES: BTreeSet<EntityId> = BTreeSet::new();
static EMPTY_CLASSES: BTreeSet<ClassId> = BTreeSet::new();

/// Immutable ontology + fact store with forward, backward, and class indexes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    signatures: BTreeMap<RelationId, RelationSignature>,
    facts: BTreeSet<Fact>,
    forward: BTreeMap<EntityId, BTreeMap<RelationId, BTreeSet<Object>>>,
    backward: BTreeMap<Object, BTreeMap<RelationId, BTreeSet<EntityId>>>,
    class_members: BTreeMap<ClassId, BTreeSet<EntityId>>,
    entity_classes: BTreeMap<EntityId, BTreeSet<ClassId>>,
    entities: BTreeSet<EntityId>,
}

impl KnowledgeBase {
    /// Loads a knowledge base from the ontology and facts TSV streams.
    /// Loading is order-independent: any permutation of input lines produces
    /// the same knowledge base.
    pub fn load(ontology: impl BufRead, facts: impl BufRead) -> Result<Self, KbError> {
        let mut kb = KnowledgeBase::default();
        for (idx, line) in ontology.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let Some(cols) = split_tsv(&line) else {
                continue;
            };
            let [relation, domain, range] = cols.as_slice() else {
                return Err(KbError::Malformed {
                    line: lineno,
                    what: "ontology line",
                    detail: format!("expected 3 tab-separated columns, got {}", cols.len()),
                });
            };
            if *relation == TYPE_RELATION {
                return Err(KbError::Malformed {
                    line: lineno,
                    what: "ontology line",
                    detail: "relation id `type` is reserved".into(),
                });
            }
            let range = if let Some(kind) = range.strip_prefix('#') {
                RelationRange::Literal(LiteralKind::from_token(kind).ok_or_else(|| {
                    KbError::Malformed {
                        line: lineno,
                        what: "ontology line",
                        detail: format!("unknown literal kind `#{kind}`"),
                    }
                })?)
            } else {
                RelationRange::Class(ClassId::new(*range))
            };
            kb.signatures.insert(
                RelationId::new(*relation),
                RelationSignature {
                    relation: RelationId::new(*relation),
                    domain: ClassId::new(*domain),
                    range,
                },
            );
        }

        for (idx, line) in facts.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let Some(cols) = split_tsv(&line) else {
                continue;
            };
            let [subject, relation, object] = cols.as_slice() else {
                return Err(KbError::Malformed {
                    line: lineno,
                    what: "fact line",
                    detail: format!("expected 3 tab-separated columns, got {}", cols.len()),
                });
            };
            let subject = EntityId::new(*subject);
            if *relation == TYPE_RELATION {
                kb.insert_type_fact(subject, ClassId::new(*object));
                continue;
            }
            let relation = RelationId::new(*relation);
            let Some(sig) = kb.signatures.get(&relation) else {
                return Err(KbError::UndeclaredRelation {
                    line: lineno,
                    relation: relation.to_string(),
                });
            };
            let object = match (parse_object_column(object, lineno)?, &sig.range) {
                (ObjectColumn::Entity(e), RelationRange::Class(_)) => Object::Entity(e),
                (ObjectColumn::Literal(lex, kind), RelationRange::Literal(expected)) => {
                    if kind != *expected {
                        return Err(KbError::RangeMismatch {
                            line: lineno,
                            relation: relation.to_string(),
                            expected: expected.to_string(),
                            got: kind.to_string(),
                        });
                    }
                    Object::Literal(Literal::parse(&lex, kind).map_err(|detail| {
                        KbError::Malformed {
                            line: lineno,
                            what: "literal object",
                            detail,
                        }
                    })?)
                }
                (ObjectColumn::Entity(e), RelationRange::Literal(expected)) => {
                    return Err(KbError::RangeMismatch {
                        line: lineno,
                        relation: relation.to_string(),
                        expected: expected.to_string(),
                        got: format!("entity `{e}`"),
                    });
                }
                (ObjectColumn::Literal(_, kind), RelationRange::Class(c)) => {
                    return Err(KbError::RangeMismatch {
                        line: lineno,
                        relation: relation.to_string(),
                        expected: format!("entity of class {c}"),
                        got: format!("{kind} literal"),
                    });
                }
            };
            kb.insert_fact(Fact {
                subject,
                relation,
                object,
            });
        }
        Ok(kb)
    }

    fn insert_type_fact(&mut self, subject: EntityId, class: ClassId) {
        self.class_members
            .entry(class.clone())
            .or_default()
            .insert(subject.clone());
        self.entity_classes
            .entry(subject.clone())
            .or_default()
            .insert(class.clone());
        self.insert_fact(Fact {
            subject,
            relation: RelationId::new(TYPE_RELATION),
            object: Object::Entity(EntityId::new(class.as_str())),
        });
    }

    fn insert_fact(&mut self, fact: Fact) {
        self.entities.insert(fact.subject.clone());
        if fact.relation.as_str() != TYPE_RELATION {
            if let Object::Entity(e) = &fact.object {
                self.entities.insert(e.clone());
            }
        }
        self.forward
            .entry(fact.subject.clone())
            .or_default()
            .entry(fact.relation.clone())
            .or_default()
            .insert(fact.object.clone());
        self.backward
            .entry(fact.object.clone())
            .or_default()
            .entry(fact.relation.clone())
            .or_default()
            .insert(fact.subject.clone());
        self.facts.insert(fact);
    }

    pub fn signature(&self, relation: &RelationId) -> Option<&RelationSignature> {
        self.signatures.get(relation)
    }

    pub fn signatures(&self) -> impl Iterator<Item = &RelationSignature> {
        self.signatures.values()
    }

    /// Objects `o` with a fact `(subject, relation, o)`.
    pub fn objects(&self, subject: &EntityId, relation: &RelationId) -> &BTreeSet<Object> {
        self.forward
            .get(subject)
            .and_then(|rels| rels.get(relation))
            .unwrap_or(&EMPTY_OBJECTS)
    }

    /// Subjects `s` with a fact `(s, relation, object)`.
    pub fn subjects(&self, relation: &RelationId, object: &Object) -> &BTreeSet<EntityId> {
        self.backward
            .get(object)
            .and_then(|rels| rels.get(relation))
            .unwrap_or(&EMPTY_ENTITIES)
    }

    pub fn class_members(&self, class: &ClassId) -> &BTreeSet<EntityId> {
        self.class_members.get(class).unwrap_or(&EMPTY_ENTITIES)
    }

    pub fn classes_of(&self, entity: &EntityId) -> &BTreeSet<ClassId> {
        self.entity_classes.get(entity).unwrap_or(&EMPTY_CLASSES)
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassId> {
        self.class_members.keys()
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityId> {
        self.entities.iter()
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    /// Declared relations, excluding the reserved `type` relation.
    pub fn relation_count(&self) -> usize {
        self.signatures.len()
    }

    /// Relations on facts with `entity` as subject (outgoing), excluding `type`.
    pub fn outgoing_relations(&self, entity: &EntityId) -> impl Iterator<Item = &RelationId> {
        self.forward
            .get(entity)
            .into_iter()
            .flat_map(|rels| rels.keys())
            .filter(|r| r.as_str() != TYPE_RELATION)
    }

    /// Relations on facts with `value` as object (incoming), excluding `type`.
    pub fn incoming_relations(&self, value: &Object) -> impl Iterator<Item = &RelationId> {
        self.backward
            .get(value)
            .into_iter()
            .flat_map(|rels| rels.keys())
            .filter(|r| r.as_str() != TYPE_RELATION)
    }

    /// All literal values of the given kind appearing as fact objects.
    pub fn literal_values(&self, kind: LiteralKind) -> BTreeSet<Literal> {
        self.facts
            .iter()
            .filter_map(|f| f.object.as_literal())
            .filter(|l| l.kind() == kind)
            .cloned()
            .collect()
    }

    /// Schema items reachable from the anchors within `k` hops: relations on
    /// any undirected fact path of length <= k starting at an anchor, plus
    /// the classes of all entities on such paths. Class-marker nodes are
    /// terminal, so reachability never leaks through shared classes, while
    /// paths may pass through shared literal values.
    pub fn schema_within_hops(
        &self,
        anchors: &BTreeSet<EntityId>,
        k: usize,
    ) -> BTreeSet<SchemaItem> {
        let mut items = BTreeSet::new();
        let mut dist: BTreeMap<Object, usize> = BTreeMap::new();
        let mut queue: VecDeque<Object> = VecDeque::new();
        for anchor in anchors {
            let node = Object::Entity(anchor.clone());
            dist.insert(node.clone(), 0);
            queue.push_back(node);
        }
        while let Some(node) = queue.pop_front() {
            let d = dist[&node];
            if d + 1 > k {
                continue;
            }
            let mut visit = |relation: &RelationId, neighbor: Object| {
                items.insert(SchemaItem::Relation(relation.clone()));
                let marker = relation.as_str() == TYPE_RELATION;
                if !marker && !dist.contains_key(&neighbor) {
                    dist.insert(neighbor.clone(), d + 1);
                    queue.push_back(neighbor);
                }
            };
            if let Object::Entity(entity) = &node {
                if let Some(rels) = self.forward.get(entity) {
                    for (relation, objects) in rels {
                        for object in objects {
                            visit(relation, object.clone());
                        }
                    }
                }
            }
            if let Some(rels) = self.backward.get(&node) {
                for (relation, subjects) in rels {
                    for subject in subjects {
                        visit(relation, Object::Entity(subject.clone()));
                    }
                }
            }
        }
        for node in dist.keys() {
            if let Object::Entity(entity) = node {
                for class in self.classes_of(entity) {
                    items.insert(SchemaItem::Class(class.clone()));
                }
            }
        }
        items
    }

    /// Writes the ontology back out in the load format, sorted by relation.
    pub fn write_ontology(&self, mut w: impl Write) -> std::io::Result<()> {
        for sig in self.signatures.values() {
            writeln!(w, "{}\t{}\t{}", sig.relation, sig.domain, sig.range)?;
        }
        Ok(())
    }

    /// Writes the facts back out in the load format, sorted.
    pub fn write_facts(&self, mut w: impl Write) -> std::io::Result<()> {
        for fact in &self.facts {
            let object = match (&fact.object, fact.relation.as_str()) {
                (Object::Entity(e), _) => e.to_string(),
                (Object::Literal(l), _) => format!("\"{}\"^^{}", l.lexical(), l.kind().token()),
            };
            writeln!(w, "{}\t{}\t{}", fact.subject, fact.relation, object)?;
        }
        Ok(())
    }
}

enum ObjectColumn {
    Entity(EntityId),
    Literal(String, LiteralKind),
}

fn parse_object_column(column: &str, lineno: usize) -> Result<ObjectColumn, KbError> {
    if let Some(rest) = column.strip_prefix('"') {
        let Some((lexical, kind)) = rest.rsplit_once("\"^^") else {
            return Err(KbError::Malformed {
                line: lineno,
                what: "literal object",
                detail: format!("expected `\"lexical\"^^kind`, got `{column}`"),
            });
        };
        let kind = LiteralKind::from_token(kind).ok_or_else(|| KbError::Malformed {
            line: lineno,
            what: "literal object",
            detail: format!("unknown literal kind `{kind}`"),
        })?;
        Ok(ObjectColumn::Literal(lexical.to_string(), kind))
    } else {
        Ok(ObjectColumn::Entity(EntityId::new(column)))
    }
}

/// Splits a TSV line into trimmed columns; returns `None` for blank lines and
/// `#` comments.
fn split_tsv(line: &str) -> Option<Vec<&str>> {
    let trimmed = line.trim_end_matches(['\r', '\n']);
    if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
        return None;
    }
    Some(trimmed.split('\t').map(str::trim).collect())
}
