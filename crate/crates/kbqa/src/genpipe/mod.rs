//! Dataset construction: template generation from the ontology, compatible
//! grounding, weight-decay sampling, generalization-level classification,
//! and train/dev/test split construction.

mod generate;
mod pools;
mod sample;
mod split;

pub use generate::{generate_templates, ground_template, Grounding};
pub use pools::{answer_domain, build_pools, read_paraphrases, synth_question};
pub use sample::{
    sample_records, GenError, GroundedForm, Paraphrase, SamplerState, TemplatePool,
    DEFAULT_RHO_L, DEFAULT_RHO_P,
};
pub use split::{split_dataset, SplitError, SplitOutput};

use std::collections::BTreeSet;

use crate::dataset::Level;
use crate::graph::{from_sexpr, to_sexpr, GraphError};
use crate::kb::{ClassId, KnowledgeBase, LiteralKind, Object, SchemaItem};
use crate::sexpr::SExpr;

/// A canonical logical form with typed placeholders in entity and literal
/// positions. Template identity is up to graph isomorphism, captured by the
/// canonical key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub skeleton: SExpr,
    key: String,
    pub relation_count: usize,
}

/// One placeholder of a template, in depth-first order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HoleSpec {
    Entity(Option<ClassId>),
    Literal(LiteralKind),
}

impl Template {
    pub fn new(id: impl Into<String>, skeleton: SExpr) -> Result<Self, GraphError> {
        let key = template_key(&skeleton)?;
        let relation_count = count_relations(&skeleton);
        Ok(Template {
            id: id.into(),
            skeleton,
            key,
            relation_count,
        })
    }

    /// Isomorphism-invariant identity of the skeleton.
    pub fn canonical_key(&self) -> &str {
        &self.key
    }

    /// Placeholders in depth-first order.
    pub fn holes(&self) -> Vec<HoleSpec> {
        let mut holes = Vec::new();
        collect_holes(&self.skeleton, &mut holes);
        holes
    }

    /// Substitutes the grounding's values for the placeholders, in order.
    pub fn ground(&self, grounding: &Grounding) -> SExpr {
        let mut cursor = 0usize;
        substitute(&self.skeleton, &grounding.values, &mut cursor)
    }

    pub fn has_untyped_holes(&self) -> bool {
        self.holes()
            .iter()
            .any(|h| matches!(h, HoleSpec::Entity(None)))
    }
}

/// Canonical printed form of the deterministic graph reconstruction; equal
/// keys mean isomorphic forms.
pub fn template_key(skeleton: &SExpr) -> Result<String, GraphError> {
    Ok(to_sexpr(&from_sexpr(skeleton)?)?.to_string())
}

fn count_relations(e: &SExpr) -> usize {
    match e {
        SExpr::Relation(_) => 1,
        SExpr::Class(_)
        | SExpr::Entity(_)
        | SExpr::Literal(_)
        | SExpr::EntityHole(_)
        | SExpr::LiteralHole(_) => 0,
        SExpr::Count(u) | SExpr::Reverse(u) => count_relations(u),
        SExpr::And(a, b) | SExpr::Join(a, b) | SExpr::ArgMax(a, b) | SExpr::ArgMin(a, b) => {
            count_relations(a) + count_relations(b)
        }
        SExpr::Compare(_, b, bound) => count_relations(b) + count_relations(bound),
    }
}

fn collect_holes(e: &SExpr, holes: &mut Vec<HoleSpec>) {
    match e {
        SExpr::EntityHole(c) => holes.push(HoleSpec::Entity(c.clone())),
        SExpr::LiteralHole(k) => holes.push(HoleSpec::Literal(*k)),
        SExpr::Class(_) | SExpr::Entity(_) | SExpr::Literal(_) | SExpr::Relation(_) => {}
        SExpr::Count(u) | SExpr::Reverse(u) => collect_holes(u, holes),
        SExpr::And(a, b) | SExpr::Join(a, b) | SExpr::ArgMax(a, b) | SExpr::ArgMin(a, b) => {
            collect_holes(a, holes);
            collect_holes(b, holes);
        }
        SExpr::Compare(_, b, bound) => {
            collect_holes(b, holes);
            collect_holes(bound, holes);
        }
    }
}

fn substitute(e: &SExpr, values: &[Object], cursor: &mut usize) -> SExpr {
    match e {
        SExpr::EntityHole(_) | SExpr::LiteralHole(_) => {
            let value = values
                .get(*cursor)
                .unwrap_or_else(|| panic!("grounding is missing value {cursor}"));
            *cursor += 1;
            match value {
                Object::Entity(id) => SExpr::Entity(id.clone()),
                Object::Literal(l) => SExpr::Literal(l.clone()),
            }
        }
        SExpr::Class(_) | SExpr::Entity(_) | SExpr::Literal(_) | SExpr::Relation(_) => e.clone(),
        SExpr::Count(u) => SExpr::count(substitute(u, values, cursor)),
        SExpr::Reverse(u) => SExpr::reverse(substitute(u, values, cursor)),
        SExpr::And(a, b) => {
            let a = substitute(a, values, cursor);
            let b = substitute(b, values, cursor);
            SExpr::and(a, b)
        }
        SExpr::Join(a, b) => {
            let a = substitute(a, values, cursor);
            let b = substitute(b, values, cursor);
            SExpr::join(a, b)
        }
        SExpr::ArgMax(a, b) => {
            let a = substitute(a, values, cursor);
            let b = substitute(b, values, cursor);
            SExpr::arg_max(a, b)
        }
        SExpr::ArgMin(a, b) => {
            let a = substitute(a, values, cursor);
            let b = substitute(b, values, cursor);
            SExpr::arg_min(a, b)
        }
        SExpr::Compare(op, b, bound) => {
            let b = substitute(b, values, cursor);
            let bound = substitute(bound, values, cursor);
            SExpr::compare(*op, b, bound)
        }
    }
}

/// The entity's most specific class: fewest members, ties broken by id.
/// Entities with no type fact abstract to an untyped placeholder.
fn most_specific_class(kb: &KnowledgeBase, entity: &crate::kb::EntityId) -> Option<ClassId> {
    kb.classes_of(entity)
        .iter()
        .min_by_key(|c| (kb.class_members(c).len(), (*c).clone()))
        .cloned()
}

/// Replaces every entity by a class-typed placeholder and every literal by a
/// kind-typed placeholder. Idempotent.
pub fn abstract_template(e: &SExpr, kb: &KnowledgeBase) -> Template {
    fn walk(e: &SExpr, kb: &KnowledgeBase) -> SExpr {
        match e {
            SExpr::Entity(id) => SExpr::EntityHole(most_specific_class(kb, id)),
            SExpr::Literal(l) => SExpr::LiteralHole(l.kind()),
            SExpr::Class(_) | SExpr::Relation(_) | SExpr::EntityHole(_) | SExpr::LiteralHole(_) => {
                e.clone()
            }
            SExpr::Count(u) => SExpr::count(walk(u, kb)),
            SExpr::Reverse(u) => SExpr::reverse(walk(u, kb)),
            SExpr::And(a, b) => SExpr::and(walk(a, kb), walk(b, kb)),
            SExpr::Join(a, b) => SExpr::join(walk(a, kb), walk(b, kb)),
            SExpr::ArgMax(a, b) => SExpr::arg_max(walk(a, kb), walk(b, kb)),
            SExpr::ArgMin(a, b) => SExpr::arg_min(walk(a, kb), walk(b, kb)),
            SExpr::Compare(op, b, bound) => SExpr::compare(*op, walk(b, kb), walk(bound, kb)),
        }
    }
    let skeleton = walk(e, kb);
    Template::new(String::new(), skeleton).expect("abstraction preserves graph convertibility")
}

/// Assigns the generalization level of a logical form relative to a training
/// set: zero-shot if any schema item is unseen, else compositional if the
/// abstracted template is unseen, else i.i.d.
pub fn classify_level(
    expr: &SExpr,
    kb: &KnowledgeBase,
    train_schema: &BTreeSet<SchemaItem>,
    train_template_keys: &BTreeSet<String>,
) -> Level {
    let items = expr.schema_items();
    if items.difference(train_schema).next().is_some() {
        return Level::ZeroShot;
    }
    let template = abstract_template(expr, kb);
    if !train_template_keys.contains(template.canonical_key()) {
        return Level::Compositional;
    }
    Level::Iid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kb::Literal;
    use crate::sexpr::parse;

    #[test]
    fn abstracts_the_running_example() {
        let kb = fixtures::f1();
        let e = parse(
            "(AND Theater (AND (GE capacity 10000) (JOIN staged_here (JOIN producer m.boyett))))",
        )
        .unwrap();
        let t = abstract_template(&e, &kb);
        assert_eq!(
            t.skeleton.to_string(),
            "(AND Theater (AND (GE capacity <v:int>) (JOIN staged_here (JOIN producer <e:Person>))))"
        );
        assert_eq!(t.relation_count, 3);
    }

    #[test]
    fn abstraction_is_idempotent() {
        let kb = fixtures::f1();
        let e = parse("(AND Production (JOIN producer m.boyett))").unwrap();
        let once = abstract_template(&e, &kb);
        let twice = abstract_template(&once.skeleton, &kb);
        assert_eq!(once.skeleton, twice.skeleton);
    }

    #[test]
    fn no_placeholder_forms_abstract_to_themselves() {
        let kb = fixtures::f1();
        let e = parse("(COUNT Theater)").unwrap();
        let t = abstract_template(&e, &kb);
        assert_eq!(t.skeleton, e);
    }

    #[test]
    fn untyped_entities_abstract_to_any() {
        let kb = fixtures::f1();
        let e = parse("(JOIN producer m.unknown)").unwrap();
        let t = abstract_template(&e, &kb);
        assert_eq!(t.skeleton.to_string(), "(JOIN producer <e:any>)");
        assert!(t.has_untyped_holes());
    }

    #[test]
    fn grounding_substitutes_in_order() {
        let kb = fixtures::f1();
        let t = Template::new(
            "t0",
            parse("(AND Theater (AND (GE capacity <v:int>) (JOIN staged_here (JOIN producer <e:Person>))))").unwrap(),
        )
        .unwrap();
        assert_eq!(t.holes().len(), 2);
        let grounded = t.ground(&Grounding {
            values: vec![
                Object::Literal(Literal::integer(10000)),
                Object::Entity("m.boyett".into()),
            ],
        });
        assert_eq!(
            grounded.to_string(),
            "(AND Theater (AND (GE capacity 10000) (JOIN staged_here (JOIN producer m.boyett))))"
        );
        let _ = kb;
    }

    #[test]
    fn template_keys_are_isomorphism_invariant() {
        let a = parse("(AND Theater (AND (GE capacity <v:int>) (JOIN staged_here <e:Production>)))")
            .unwrap();
        let b = parse("(AND (AND (JOIN staged_here <e:Production>) (GE capacity <v:int>)) Theater)")
            .unwrap();
        assert_eq!(template_key(&a).unwrap(), template_key(&b).unwrap());
        let c = parse("(AND Theater (JOIN staged_here <e:Production>))").unwrap();
        assert_ne!(template_key(&a).unwrap(), template_key(&c).unwrap());
    }

    #[test]
    fn classify_level_examples() {
        let kb = fixtures::f1();
        let train_exprs = [
            "(AND Production (JOIN producer m.boyett))",
            "(COUNT (AND Production (JOIN producer m.boyett)))",
            "(AND Theater (JOIN staged_here m.prodA))",
        ];
        let mut train_schema = BTreeSet::new();
        let mut train_keys = BTreeSet::new();
        for text in train_exprs {
            let e = parse(text).unwrap();
            train_schema.extend(e.schema_items());
            train_keys.insert(abstract_template(&e, &kb).canonical_key().to_string());
        }

        // seen template, seen items
        let iid = parse("(AND Production (JOIN producer m.boyett))").unwrap();
        assert_eq!(
            classify_level(&iid, &kb, &train_schema, &train_keys),
            Level::Iid
        );

        // novel composition of seen items
        let comp = parse("(AND Theater (JOIN staged_here (JOIN producer m.boyett)))").unwrap();
        assert_eq!(
            classify_level(&comp, &kb, &train_schema, &train_keys),
            Level::Compositional
        );

        // unseen relation, even though its classes are seen
        let zs = parse("(AND Theater (GE capacity 10000))").unwrap();
        assert_eq!(
            classify_level(&zs, &kb, &train_schema, &train_keys),
            Level::ZeroShot
        );
    }
}
