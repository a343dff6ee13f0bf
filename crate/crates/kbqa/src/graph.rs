//! Graph-shaped meaning representation: conversion to and from logical
//! forms, and graph-isomorphism equivalence (the semantic exact-match test).
//!
//! A graph query has one answer node, edges labelled with relations, and at
//! most one function. Count attaches to the answer node; comparatives and
//! superlatives annotate the edge that carries their value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::kb::{ClassId, EntityId, Literal, LiteralKind, RelationId};
use crate::sexpr::{CmpOp, SExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unsupported shape: {0}")]
    Unsupported(String),
    #[error("more than one function in `{0}`")]
    MultipleFunctions(String),
    #[error("a binary expression cannot be the root: `{0}`")]
    BinaryRoot(String),
    #[error("graph has no answer node")]
    NoAnswerNode,
    #[error("graph has {0} answer nodes")]
    MultipleAnswerNodes(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid graph: {0}")]
    Invalid(String),
}

/// Ground term of a node, if any.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum NodeTerm {
    /// Unconstrained variable node.
    #[default]
    Open,
    Entity(EntityId),
    Literal(Literal),
    EntityHole(Option<ClassId>),
    LiteralHole(LiteralKind),
}

/// One node: a set of class labels (compared as a set), an optional ground
/// term, and the answer flag.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Node {
    pub classes: BTreeSet<ClassId>,
    pub term: NodeTerm,
    pub answer: bool,
}

/// Directed edge `source --relation--> target` mirroring fact orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub relation: RelationId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuperlativeOp {
    Max,
    Min,
}

/// The at-most-one function of a graph query.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum QueryFunction {
    #[default]
    None,
    /// Count of the answer set.
    Count,
    /// Superlative over the annotated edge's values.
    Superlative { op: SuperlativeOp, edge: usize },
    /// Comparison of the annotated edge's values against the literal stored
    /// in the edge's target node.
    Comparative { op: CmpOp, edge: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphQuery {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub function: QueryFunction,
}

/// Annotation of one edge, used for matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum EdgeAnnotation {
    Plain,
    Superlative(SuperlativeOp),
    Comparative(CmpOp),
}

impl GraphQuery {
    pub fn answer_node(&self) -> Option<usize> {
        self.nodes.iter().position(|n| n.answer)
    }

    /// Checks the structural invariants: exactly one answer node, valid edge
    /// endpoints and function references, connectedness.
    pub fn validate(&self) -> Result<(), GraphError> {
        let answers = self.nodes.iter().filter(|n| n.answer).count();
        if answers == 0 {
            return Err(GraphError::NoAnswerNode);
        }
        if answers > 1 {
            return Err(GraphError::MultipleAnswerNodes(answers));
        }
        for edge in &self.edges {
            if edge.source >= self.nodes.len() || edge.target >= self.nodes.len() {
                return Err(GraphError::Invalid(format!(
                    "edge endpoint out of range ({} -> {})",
                    edge.source, edge.target
                )));
            }
        }
        match self.function {
            QueryFunction::Superlative { edge, .. } | QueryFunction::Comparative { edge, .. } => {
                if edge >= self.edges.len() {
                    return Err(GraphError::Invalid(format!(
                        "function references missing edge {edge}"
                    )));
                }
            }
            _ => {}
        }
        // connectedness over undirected edges
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.answer_node().expect("answer exists")];
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n], true) {
                continue;
            }
            for edge in &self.edges {
                if edge.source == n && !seen[edge.target] {
                    stack.push(edge.target);
                }
                if edge.target == n && !seen[edge.source] {
                    stack.push(edge.source);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(GraphError::Disconnected);
        }
        Ok(())
    }

    fn annotation(&self, edge: usize) -> EdgeAnnotation {
        match self.function {
            QueryFunction::Superlative { op, edge: e } if e == edge => {
                EdgeAnnotation::Superlative(op)
            }
            QueryFunction::Comparative { op, edge: e } if e == edge => {
                EdgeAnnotation::Comparative(op)
            }
            _ => EdgeAnnotation::Plain,
        }
    }

    fn node_label(&self, idx: usize) -> (&BTreeSet<ClassId>, &NodeTerm, bool) {
        let n = &self.nodes[idx];
        (&n.classes, &n.term, n.answer)
    }
}

impl fmt::Display for GraphQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "graph ({} nodes, {} edges)", self.nodes.len(), self.edges.len())?;
        for (i, n) in self.nodes.iter().enumerate() {
            let classes: Vec<String> = n.classes.iter().map(ClassId::to_string).collect();
            writeln!(
                f,
                "  n{i}{} classes=[{}] term={:?}",
                if n.answer { "*" } else { "" },
                classes.join(","),
                n.term
            )?;
        }
        for (i, e) in self.edges.iter().enumerate() {
            writeln!(
                f,
                "  e{i}: n{} --{}--> n{} {:?}",
                e.source,
                e.relation,
                e.target,
                self.annotation(i)
            )?;
        }
        write!(f, "  function: {:?}", self.function)
    }
}

struct Builder {
    graph: GraphQuery,
}

impl Builder {
    fn fresh_node(&mut self) -> usize {
        self.graph.nodes.push(Node::default());
        self.graph.nodes.len() - 1
    }

    fn add_edge(&mut self, source: usize, target: usize, relation: &RelationId) -> usize {
        self.graph.edges.push(Edge {
            source,
            target,
            relation: relation.clone(),
        });
        self.graph.edges.len() - 1
    }

    fn set_function(&mut self, function: QueryFunction, context: &SExpr) -> Result<(), GraphError> {
        if !matches!(self.graph.function, QueryFunction::None) {
            return Err(GraphError::MultipleFunctions(context.to_string()));
        }
        self.graph.function = function;
        Ok(())
    }

    fn set_term(&mut self, node: usize, term: NodeTerm, context: &SExpr) -> Result<(), GraphError> {
        match &self.graph.nodes[node].term {
            NodeTerm::Open => {
                self.graph.nodes[node].term = term;
                Ok(())
            }
            existing if *existing == term => Ok(()),
            existing => Err(GraphError::Unsupported(format!(
                "conflicting ground terms {existing:?} and {term:?} in `{context}`"
            ))),
        }
    }

    /// Expands a binary expression as a path starting at `from`; returns the
    /// far end node and the last edge on the path. `flipped` tracks R.
    fn expand_binary(
        &mut self,
        b: &SExpr,
        from: usize,
        flipped: bool,
    ) -> Result<(usize, usize), GraphError> {
        match b {
            SExpr::Relation(r) => {
                let far = self.fresh_node();
                let edge = if flipped {
                    self.add_edge(far, from, r)
                } else {
                    self.add_edge(from, far, r)
                };
                Ok((far, edge))
            }
            SExpr::Reverse(inner) => self.expand_binary(inner, from, !flipped),
            SExpr::Join(b1, b2) if b2.is_binary() => {
                // (x, z) pairs with (x, y) in b1 and (y, z) in b2; reversal
                // walks the composition in the opposite order
                let (first, second) = if flipped { (b2, b1) } else { (b1, b2) };
                let (mid, _) = self.expand_binary(first, from, flipped)?;
                self.expand_binary(second, mid, flipped)
            }
            other => Err(GraphError::Unsupported(format!(
                "`{other}` is not a relation path"
            ))),
        }
    }

    /// Adds the constraints of a set expression to `node`.
    fn build_set(&mut self, e: &SExpr, node: usize) -> Result<(), GraphError> {
        match e {
            SExpr::Class(c) => {
                self.graph.nodes[node].classes.insert(c.clone());
                Ok(())
            }
            SExpr::Entity(id) => self.set_term(node, NodeTerm::Entity(id.clone()), e),
            SExpr::Literal(l) => self.set_term(node, NodeTerm::Literal(l.clone()), e),
            SExpr::EntityHole(c) => self.set_term(node, NodeTerm::EntityHole(c.clone()), e),
            SExpr::LiteralHole(k) => self.set_term(node, NodeTerm::LiteralHole(*k), e),
            SExpr::And(a, b) => {
                self.build_set(a, node)?;
                self.build_set(b, node)
            }
            SExpr::Join(b, u) if !u.is_binary() => {
                let (far, _) = self.expand_binary(b, node, false)?;
                self.build_set(u, far)
            }
            SExpr::Compare(op, b, bound) => {
                let (far, edge) = self.expand_binary(b, node, false)?;
                let term = match bound.as_ref() {
                    SExpr::Literal(l) => NodeTerm::Literal(l.clone()),
                    SExpr::LiteralHole(k) => NodeTerm::LiteralHole(*k),
                    other => {
                        return Err(GraphError::Unsupported(format!(
                            "comparative bound `{other}`"
                        )))
                    }
                };
                self.set_term(far, term, e)?;
                self.set_function(QueryFunction::Comparative { op: *op, edge }, e)
            }
            SExpr::ArgMax(u, b) | SExpr::ArgMin(u, b) => {
                let op = if matches!(e, SExpr::ArgMax(..)) {
                    SuperlativeOp::Max
                } else {
                    SuperlativeOp::Min
                };
                // single-relation superlative paths keep the maximized set
                // recoverable from the edge's attachment node
                if !matches!(
                    b.as_ref(),
                    SExpr::Relation(_) | SExpr::Reverse(_)
                ) {
                    return Err(GraphError::Unsupported(format!(
                        "superlative over a composite path in `{e}`"
                    )));
                }
                self.build_set(u, node)?;
                let (_, edge) = self.expand_binary(b, node, false)?;
                self.set_function(QueryFunction::Superlative { op, edge }, e)
            }
            SExpr::Count(_) => Err(GraphError::Unsupported(format!(
                "nested COUNT in `{e}`"
            ))),
            SExpr::Join(_, _) | SExpr::Relation(_) | SExpr::Reverse(_) => Err(
                GraphError::Unsupported(format!("binary expression `{e}` in a set position")),
            ),
        }
    }
}

/// Converts a logical form into its graph query. The form must denote an
/// entity set (or a COUNT of one) and contain at most one function.
pub fn from_sexpr(e: &SExpr) -> Result<GraphQuery, GraphError> {
    let mut builder = Builder {
        graph: GraphQuery::default(),
    };
    let root = builder.fresh_node();
    builder.graph.nodes[root].answer = true;
    match e {
        _ if e.is_binary() => return Err(GraphError::BinaryRoot(e.to_string())),
        SExpr::Count(u) => {
            if u.is_binary() {
                return Err(GraphError::BinaryRoot(e.to_string()));
            }
            builder.build_set(u, root)?;
            builder.set_function(QueryFunction::Count, e)?;
        }
        _ => builder.build_set(e, root)?,
    }
    builder.graph.validate()?;
    Ok(builder.graph)
}

/// Reconstructs a logical form from a graph query: deterministic traversal
/// from the answer node outward, conjuncts ordered classes first, then the
/// ground term, then edges sorted by (relation, direction, subtree).
pub fn to_sexpr(g: &GraphQuery) -> Result<SExpr, GraphError> {
    g.validate()?;
    // connected with n-1 edges = tree; cycles have no S-expression form
    if g.edges.len() + 1 != g.nodes.len() {
        return Err(GraphError::Unsupported(
            "cyclic graph query has no logical form".into(),
        ));
    }
    let answer = g.answer_node().expect("validated");
    let mut visited = vec![false; g.edges.len()];
    let expr = reconstruct(g, answer, &mut visited)?;
    if visited.iter().any(|v| !v) {
        return Err(GraphError::Invalid(
            "traversal did not reach every edge".into(),
        ));
    }
    Ok(match g.function {
        QueryFunction::Count => SExpr::count(expr),
        _ => expr,
    })
}

fn term_to_expr(term: &NodeTerm) -> Option<SExpr> {
    match term {
        NodeTerm::Open => None,
        NodeTerm::Entity(id) => Some(SExpr::Entity(id.clone())),
        NodeTerm::Literal(l) => Some(SExpr::Literal(l.clone())),
        NodeTerm::EntityHole(c) => Some(SExpr::EntityHole(c.clone())),
        NodeTerm::LiteralHole(k) => Some(SExpr::LiteralHole(*k)),
    }
}

fn bound_expr(term: &NodeTerm) -> Result<SExpr, GraphError> {
    match term {
        NodeTerm::Literal(l) => Ok(SExpr::Literal(l.clone())),
        NodeTerm::LiteralHole(k) => Ok(SExpr::LiteralHole(*k)),
        other => Err(GraphError::Invalid(format!(
            "comparative edge must end in a literal node, found {other:?}"
        ))),
    }
}

fn reconstruct(g: &GraphQuery, node: usize, visited: &mut [bool]) -> Result<SExpr, GraphError> {
    let mut conjuncts: Vec<SExpr> = Vec::new();
    for class in &g.nodes[node].classes {
        conjuncts.push(SExpr::Class(class.clone()));
    }
    if let Some(term) = term_to_expr(&g.nodes[node].term) {
        conjuncts.push(term);
    }

    let mut superlative: Option<(SuperlativeOp, SExpr)> = None;
    let mut edge_conjuncts: Vec<(String, SExpr)> = Vec::new();
    for (idx, edge) in g.edges.iter().enumerate() {
        if visited[idx] || (edge.source != node && edge.target != node) {
            continue;
        }
        // self-loops and the far side of already-claimed function edges are
        // handled where first encountered
        visited[idx] = true;
        let outgoing = edge.source == node;
        let rel_expr = if outgoing {
            SExpr::Relation(edge.relation.clone())
        } else {
            SExpr::reverse(SExpr::Relation(edge.relation.clone()))
        };
        let far = if outgoing { edge.target } else { edge.source };
        match g.annotation(idx) {
            EdgeAnnotation::Comparative(op) => {
                let bound = bound_expr(&g.nodes[far].term)?;
                if !g.nodes[far].classes.is_empty() || degree(g, far) != 1 {
                    return Err(GraphError::Invalid(
                        "comparative literal node carries extra structure".into(),
                    ));
                }
                let expr = SExpr::compare(op, rel_expr, bound);
                edge_conjuncts.push((expr.to_string(), expr));
            }
            EdgeAnnotation::Superlative(op) => {
                if !matches!(g.nodes[far].term, NodeTerm::Open)
                    || !g.nodes[far].classes.is_empty()
                    || degree(g, far) != 1
                {
                    return Err(GraphError::Invalid(
                        "superlative edge must end in a bare node".into(),
                    ));
                }
                superlative = Some((op, rel_expr));
            }
            EdgeAnnotation::Plain => {
                let sub = reconstruct(g, far, visited)?;
                let expr = SExpr::join(rel_expr, sub);
                edge_conjuncts.push((expr.to_string(), expr));
            }
        }
    }
    edge_conjuncts.sort_by(|(a, _), (b, _)| a.cmp(b));
    conjuncts.extend(edge_conjuncts.into_iter().map(|(_, e)| e));

    let base = conjuncts
        .into_iter()
        .rev()
        .reduce(|acc, c| SExpr::and(c, acc))
        .ok_or_else(|| GraphError::Invalid("node with no constraints".into()))?;
    Ok(match superlative {
        Some((SuperlativeOp::Max, rel)) => SExpr::arg_max(base, rel),
        Some((SuperlativeOp::Min, rel)) => SExpr::arg_min(base, rel),
        None => base,
    })
}

fn degree(g: &GraphQuery, node: usize) -> usize {
    g.edges
        .iter()
        .filter(|e| e.source == node || e.target == node)
        .count()
}

/// Signature used to partition nodes before backtracking.
type NodeSig = (Vec<String>, String, bool, Vec<(RelationId, bool, EdgeAnnotation)>);

fn node_signature(g: &GraphQuery, idx: usize) -> NodeSig {
    let (classes, term, answer) = g.node_label(idx);
    let mut incident: Vec<(RelationId, bool, EdgeAnnotation)> = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.source == idx || e.target == idx)
        .map(|(i, e)| (e.relation.clone(), e.source == idx, g.annotation(i)))
        .collect();
    incident.sort();
    (
        classes.iter().map(ClassId::to_string).collect(),
        format!("{term:?}"),
        answer,
        incident,
    )
}

/// Multiset of (relation, annotation) labels on edges from `a` to `b`.
fn edge_labels(g: &GraphQuery, a: usize, b: usize) -> Vec<(RelationId, EdgeAnnotation)> {
    let mut labels: Vec<(RelationId, EdgeAnnotation)> = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.source == a && e.target == b)
        .map(|(i, e)| (e.relation.clone(), g.annotation(i)))
        .collect();
    labels.sort();
    labels
}

/// True iff a node bijection preserves class-label sets, ground terms, the
/// answer flag, directed edge relations, and the function annotation.
/// Label-partition refinement narrows candidates before backtracking.
pub fn is_isomorphic(a: &GraphQuery, b: &GraphQuery) -> bool {
    if a.nodes.len() != b.nodes.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let function_matches = match (&a.function, &b.function) {
        (QueryFunction::None, QueryFunction::None) => true,
        (QueryFunction::Count, QueryFunction::Count) => true,
        (
            QueryFunction::Superlative { op: oa, .. },
            QueryFunction::Superlative { op: ob, .. },
        ) => oa == ob,
        (
            QueryFunction::Comparative { op: oa, .. },
            QueryFunction::Comparative { op: ob, .. },
        ) => oa == ob,
        _ => false,
    };
    if !function_matches {
        return false;
    }

    let sigs_a: Vec<NodeSig> = (0..a.nodes.len()).map(|i| node_signature(a, i)).collect();
    let sigs_b: Vec<NodeSig> = (0..b.nodes.len()).map(|i| node_signature(b, i)).collect();
    let mut sorted_a = sigs_a.clone();
    let mut sorted_b = sigs_b.clone();
    sorted_a.sort();
    sorted_b.sort();
    if sorted_a != sorted_b {
        return false;
    }

    // candidate targets per source node, most constrained first
    let mut order: Vec<usize> = (0..a.nodes.len()).collect();
    let candidates: Vec<Vec<usize>> = (0..a.nodes.len())
        .map(|i| {
            (0..b.nodes.len())
                .filter(|&j| sigs_a[i] == sigs_b[j])
                .collect()
        })
        .collect();
    order.sort_by_key(|&i| candidates[i].len());

    let mut mapping: BTreeMap<usize, usize> = BTreeMap::new();
    let mut used = vec![false; b.nodes.len()];
    backtrack(a, b, &order, &candidates, 0, &mut mapping, &mut used)
}

fn backtrack(
    a: &GraphQuery,
    b: &GraphQuery,
    order: &[usize],
    candidates: &[Vec<usize>],
    depth: usize,
    mapping: &mut BTreeMap<usize, usize>,
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let source = order[depth];
    for &target in &candidates[source] {
        if used[target] {
            continue;
        }
        let consistent = mapping.iter().all(|(&s, &t)| {
            edge_labels(a, source, s) == edge_labels(b, target, t)
                && edge_labels(a, s, source) == edge_labels(b, t, target)
        }) && edge_labels(a, source, source) == edge_labels(b, target, target);
        if !consistent {
            continue;
        }
        mapping.insert(source, target);
        used[target] = true;
        if backtrack(a, b, order, candidates, depth + 1, mapping, used) {
            return true;
        }
        mapping.remove(&source);
        used[target] = false;
    }
    false
}
