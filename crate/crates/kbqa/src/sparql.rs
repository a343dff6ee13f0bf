//! SPARQL SELECT emission from logical forms.
//!
//! The query is built over the graph form: variables are numbered `?x0`,
//! `?x1`, ... breadth-first from the answer node, class constraints become
//! `type` triple patterns, comparatives become FILTERs, and superlatives an
//! ORDER BY + LIMIT 1 subquery. The caller supplies the namespace prefix
//! (default `ns:`) and is responsible for declaring it when executing.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use crate::graph::{from_sexpr, GraphError, GraphQuery, NodeTerm, QueryFunction, SuperlativeOp};
use crate::kb::{Literal, TYPE_RELATION};
use crate::sexpr::SExpr;

pub const DEFAULT_PREFIX: &str = "ns:";

/// Converts a well-typed logical form into a SPARQL SELECT query.
pub fn to_sparql(e: &SExpr, prefix: &str) -> Result<String, GraphError> {
    let g = from_sexpr(e)?;
    let answer = g.answer_node().expect("validated by from_sexpr");
    let (order, vars) = bfs_variables(&g, answer);

    let mut body = render_patterns(&g, &order, &vars, prefix, None)?;

    if let QueryFunction::Superlative { op, edge } = &g.function {
        let target = vars[&g.edges[*edge].target];
        // the subquery re-derives the extremal value over an independent
        // scope; the outer pattern keeps every entity attaining it
        let shadow = render_patterns(&g, &order, &vars, prefix, Some(target))?;
        let direction = match op {
            SuperlativeOp::Max => "DESC",
            SuperlativeOp::Min => "ASC",
        };
        body.push(format!(
            "{{ SELECT ?x{target} WHERE {{ {} }} ORDER BY {direction}(?x{target}) LIMIT 1 }}",
            shadow.join(" ")
        ));
    }

    let head = match g.function {
        QueryFunction::Count => format!("SELECT (COUNT(DISTINCT ?x{}) AS ?count)", vars[&answer]),
        _ => format!("SELECT DISTINCT ?x{}", vars[&answer]),
    };
    Ok(format!("{head} WHERE {{ {} }}", body.join(" ")))
}

/// Breadth-first node order from the answer node, with variable numbers
/// assigned in discovery order to the nodes that render as variables.
fn bfs_variables(g: &GraphQuery, answer: usize) -> (Vec<usize>, BTreeMap<usize, usize>) {
    let mut order = Vec::new();
    let mut vars = BTreeMap::new();
    let mut seen = vec![false; g.nodes.len()];
    let mut queue = VecDeque::from([answer]);
    seen[answer] = true;
    while let Some(node) = queue.pop_front() {
        order.push(node);
        if needs_variable(g, node) {
            vars.insert(node, vars.len());
        }
        for edge in &g.edges {
            for neighbor in [edge.target, edge.source] {
                let touches = edge.source == node || edge.target == node;
                if touches && !std::mem::replace(&mut seen[neighbor], true) {
                    queue.push_back(neighbor);
                }
            }
        }
    }
    (order, vars)
}

/// Comparative bound nodes render as variables (the FILTER constrains them);
/// entity and plain literal terms render as constants.
fn needs_variable(g: &GraphQuery, node: usize) -> bool {
    match &g.nodes[node].term {
        NodeTerm::Open => true,
        NodeTerm::Literal(_) => match g.function {
            QueryFunction::Comparative { edge, .. } => g.edges[edge].target == node,
            _ => false,
        },
        NodeTerm::Entity(_) | NodeTerm::EntityHole(_) | NodeTerm::LiteralHole(_) => false,
    }
}

/// Renders class and edge patterns in BFS node order; each edge is emitted
/// at the first endpoint reached. When `shadow_for` is set, every variable
/// except that one is renamed `?yN` for the superlative subquery.
fn render_patterns(
    g: &GraphQuery,
    order: &[usize],
    vars: &BTreeMap<usize, usize>,
    prefix: &str,
    shadow_for: Option<usize>,
) -> Result<Vec<String>, GraphError> {
    let render_node = |node: usize| -> Result<String, GraphError> {
        if let Some(&v) = vars.get(&node) {
            return Ok(match shadow_for {
                Some(keep) if v != keep => format!("?y{v}"),
                _ => format!("?x{v}"),
            });
        }
        match &g.nodes[node].term {
            NodeTerm::Entity(id) => Ok(format!("{prefix}{id}")),
            NodeTerm::Literal(l) => Ok(render_literal(l)),
            term => Err(GraphError::Unsupported(format!(
                "cannot render ungrounded term {term:?} in SPARQL"
            ))),
        }
    };

    let mut patterns = Vec::new();
    let mut filters = Vec::new();
    let mut emitted = vec![false; g.edges.len()];
    for &node in order {
        let subject_here = render_node(node)?;
        for class in &g.nodes[node].classes {
            patterns.push(format!(
                "{subject_here} {prefix}{TYPE_RELATION} {prefix}{class} ."
            ));
        }
        for (idx, edge) in g.edges.iter().enumerate() {
            if emitted[idx] || (edge.source != node && edge.target != node) {
                continue;
            }
            emitted[idx] = true;
            if let QueryFunction::Comparative { op, edge: fe } = &g.function {
                if *fe == idx {
                    let NodeTerm::Literal(bound) = &g.nodes[edge.target].term else {
                        return Err(GraphError::Unsupported(
                            "comparative bound is not a literal".into(),
                        ));
                    };
                    filters.push(format!(
                        "FILTER ({} {} {})",
                        render_node(edge.target)?,
                        op.sparql(),
                        render_literal(bound)
                    ));
                }
            }
            patterns.push(format!(
                "{} {prefix}{} {} .",
                render_node(edge.source)?,
                edge.relation,
                render_node(edge.target)?
            ));
        }
    }
    patterns.extend(filters);
    Ok(patterns)
}

/// SPARQL term for a literal, matching the datatypes used when loading a
/// knowledge base into an RDF store.
pub fn render_literal(l: &Literal) -> String {
    match l {
        Literal::Integer(v) => v.to_string(),
        Literal::Float(v) => format!("\"{:?}\"^^<http://www.w3.org/2001/XMLSchema#double>", v.0),
        Literal::DateTime(dt) => format!(
            "\"{}\"^^<http://www.w3.org/2001/XMLSchema#dateTime>",
            dt.format("%Y-%m-%dT%H:%M:%S")
        ),
        Literal::Text(s) => format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse;

    fn sparql(text: &str) -> String {
        to_sparql(&parse(text).unwrap(), DEFAULT_PREFIX).unwrap()
    }

    #[test]
    fn single_join() {
        assert_eq!(
            sparql("(JOIN producer m.boyett)"),
            "SELECT DISTINCT ?x0 WHERE { ?x0 ns:producer ns:m.boyett . }"
        );
    }

    #[test]
    fn count_emits_aggregate() {
        assert_eq!(
            sparql("(COUNT (JOIN producer m.boyett))"),
            "SELECT (COUNT(DISTINCT ?x0) AS ?count) WHERE { ?x0 ns:producer ns:m.boyett . }"
        );
    }

    #[test]
    fn comparative_emits_filter() {
        let q = sparql("(GE capacity 10000)");
        assert_eq!(
            q,
            "SELECT DISTINCT ?x0 WHERE { ?x0 ns:capacity ?x1 . FILTER (?x1 >= 10000) }"
        );
    }

    #[test]
    fn class_constraint_emits_type_pattern() {
        let q = sparql("(AND Theater (JOIN staged_here m.prodA))");
        assert_eq!(
            q,
            "SELECT DISTINCT ?x0 WHERE { ?x0 ns:type ns:Theater . ?x0 ns:staged_here ns:m.prodA . }"
        );
    }

    #[test]
    fn superlative_emits_limited_subquery() {
        let q = sparql("(ARGMAX Theater capacity)");
        assert_eq!(
            q,
            "SELECT DISTINCT ?x0 WHERE { ?x0 ns:type ns:Theater . ?x0 ns:capacity ?x1 . \
             { SELECT ?x1 WHERE { ?y0 ns:type ns:Theater . ?y0 ns:capacity ?x1 . } \
             ORDER BY DESC(?x1) LIMIT 1 } }"
        );
    }

    #[test]
    fn variables_number_breadth_first() {
        let q = sparql("(JOIN staged_here (JOIN producer m.boyett))");
        assert_eq!(
            q,
            "SELECT DISTINCT ?x0 WHERE { ?x0 ns:staged_here ?x1 . ?x1 ns:producer ns:m.boyett . }"
        );
    }

    #[test]
    fn ungrounded_templates_are_rejected() {
        let e = parse("(JOIN producer <e:Person>)").unwrap();
        assert!(matches!(
            to_sparql(&e, DEFAULT_PREFIX),
            Err(GraphError::Unsupported(_))
        ));
    }
}
