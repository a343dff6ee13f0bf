//! Reference SPARQL execution: loads a knowledge base into an in-memory RDF
//! store and runs emitted queries against it, mapping results back to the
//! library's value types.

#![allow(dead_code)]

use std::collections::BTreeSet;

use oxigraph::model::{GraphNameRef, Literal as RdfLiteral, NamedNode, QuadRef, Term};
use oxigraph::sparql::QueryResults;
use oxigraph::store::Store;

use kbqa::kb::{KnowledgeBase, Literal, LiteralKind, Object, TYPE_RELATION};
use kbqa::sexpr::Denotation;

pub const BASE: &str = "http://example.org/ns/";

fn iri(local: &str) -> NamedNode {
    NamedNode::new(format!("{BASE}{local}")).expect("valid IRI")
}

fn rdf_literal(l: &Literal) -> RdfLiteral {
    use oxigraph::model::vocab::xsd;
    match l {
        Literal::Integer(v) => RdfLiteral::new_typed_literal(v.to_string(), xsd::INTEGER),
        Literal::Float(v) => RdfLiteral::new_typed_literal(format!("{:?}", v.0), xsd::DOUBLE),
        Literal::DateTime(dt) => RdfLiteral::new_typed_literal(
            dt.format("%Y-%m-%dT%H:%M:%S").to_string(),
            xsd::DATE_TIME,
        ),
        Literal::Text(s) => RdfLiteral::new_simple_literal(s),
    }
}

/// Loads every fact as one triple under the `ns:` namespace; type facts use
/// the reserved `type` predicate, matching the emitted queries.
pub fn kb_to_store(kb: &KnowledgeBase) -> Store {
    let store = Store::new().expect("in-memory store");
    for fact in kb.facts() {
        let subject = iri(fact.subject.as_str());
        let predicate = if fact.relation.as_str() == TYPE_RELATION {
            iri(TYPE_RELATION)
        } else {
            iri(fact.relation.as_str())
        };
        match &fact.object {
            Object::Entity(e) => {
                let object = iri(e.as_str());
                store
                    .insert(QuadRef::new(
                        &subject,
                        &predicate,
                        &object,
                        GraphNameRef::DefaultGraph,
                    ))
                    .expect("insert");
            }
            Object::Literal(l) => {
                let object = rdf_literal(l);
                store
                    .insert(QuadRef::new(
                        &subject,
                        &predicate,
                        &object,
                        GraphNameRef::DefaultGraph,
                    ))
                    .expect("insert");
            }
        }
    }
    store
}

fn term_to_object(term: &Term) -> Object {
    use oxigraph::model::vocab::xsd;
    match term {
        Term::NamedNode(node) => {
            let local = node
                .as_str()
                .strip_prefix(BASE)
                .unwrap_or_else(|| panic!("unexpected IRI {node}"));
            Object::Entity(local.into())
        }
        Term::Literal(l) => {
            let kind = match l.datatype() {
                d if d == xsd::INTEGER => LiteralKind::Integer,
                d if d == xsd::DOUBLE || d == xsd::DECIMAL => LiteralKind::Float,
                d if d == xsd::DATE_TIME => LiteralKind::DateTime,
                _ => LiteralKind::Text,
            };
            Object::Literal(Literal::parse(l.value(), kind).expect("well-formed literal"))
        }
        other => panic!("unexpected term {other}"),
    }
}

/// Runs an emitted query (without PREFIX headers) and returns the result as
/// a denotation: the integer for COUNT queries, the binding set otherwise.
pub fn run_query(store: &Store, query: &str) -> Denotation {
    let full = format!("PREFIX ns: <{BASE}>\n{query}");
    let results = store
        .query(&full)
        .unwrap_or_else(|e| panic!("query failed: {e}\n{full}"));
    let QueryResults::Solutions(solutions) = results else {
        panic!("expected a SELECT result");
    };
    let is_count = query.starts_with("SELECT (COUNT");
    let mut values: BTreeSet<Object> = BTreeSet::new();
    let mut count: Option<u64> = None;
    for solution in solutions {
        let solution = solution.expect("solution");
        let term = solution.iter().next().expect("one binding").1;
        if is_count {
            let Object::Literal(Literal::Integer(n)) = term_to_object(term) else {
                panic!("COUNT did not bind an integer");
            };
            count = Some(n as u64);
        } else {
            values.insert(term_to_object(term));
        }
    }
    match count {
        Some(n) => Denotation::Integer(n),
        None if is_count => Denotation::Integer(0),
        None => Denotation::Set(values),
    }
}
