//! Train/dev/test split construction: whole domains are held out for the
//! zero-shot halves of dev and test, templates for the compositional
//! quarters, and the i.i.d. quarters are sampled from templates that stay in
//! training. Every assignment is verified against `classify_level` on the
//! resulting training set.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::{DatasetRecord, Level};
use crate::kb::{KnowledgeBase, SchemaItem};
use crate::sexpr::{parse, SExpr};

use super::{abstract_template, classify_level};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("record {qid}: {detail}")]
    BadRecord { qid: String, detail: String },
    #[error("cannot satisfy the split proportions: {detail}; achievable: {achievable}")]
    Unsatisfiable { detail: String, achievable: String },
    #[error("record {qid} classifies as {actual} but was assigned {assigned}")]
    Inconsistent {
        qid: String,
        assigned: Level,
        actual: Level,
    },
}

#[derive(Debug, Clone, Default)]
pub struct SplitOutput {
    pub train: Vec<DatasetRecord>,
    pub dev: Vec<DatasetRecord>,
    pub test: Vec<DatasetRecord>,
}

#[derive(Debug, Default)]
struct TemplateInfo {
    records: Vec<usize>,
    items: BTreeSet<SchemaItem>,
    domains: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bucket {
    TestZs,
    TestComp,
    TestIid,
    DevZs,
    DevComp,
    DevIid,
}

impl Bucket {
    fn level(self) -> Level {
        match self {
            Bucket::TestZs | Bucket::DevZs => Level::ZeroShot,
            Bucket::TestComp | Bucket::DevComp => Level::Compositional,
            Bucket::TestIid | Bucket::DevIid => Level::Iid,
        }
    }

    fn is_test(self) -> bool {
        matches!(self, Bucket::TestZs | Bucket::TestComp | Bucket::TestIid)
    }
}

struct SplitState {
    templates: BTreeMap<String, TemplateInfo>,
    domain_templates: BTreeMap<String, BTreeSet<String>>,
    assigned: BTreeMap<String, Bucket>,
    owned_domains: BTreeMap<String, Bucket>,
}

impl SplitState {
    /// Holds out whole domains for a zero-shot bucket until `target` records
    /// are collected. A held-out template drags all of its domains along, so
    /// no item of a held-out domain can remain visible from training.
    fn hold_out_domains(&mut self, order: &[String], bucket: Bucket, target: usize) -> usize {
        let mut count = 0usize;
        for domain in order {
            if count >= target {
                break;
            }
            if self.owned_domains.contains_key(domain) {
                continue;
            }
            let mut pending = vec![domain.clone()];
            while let Some(d) = pending.pop() {
                if self.owned_domains.contains_key(&d) {
                    continue;
                }
                self.owned_domains.insert(d.clone(), bucket);
                let Some(tids) = self.domain_templates.get(&d) else {
                    continue;
                };
                for tid in tids.clone() {
                    if self.assigned.contains_key(&tid) {
                        continue;
                    }
                    let info = &self.templates[&tid];
                    count += info.records.len();
                    pending.extend(
                        info.domains
                            .iter()
                            .filter(|td| !self.owned_domains.contains_key(*td))
                            .cloned(),
                    );
                    self.assigned.insert(tid, bucket);
                }
            }
        }
        count
    }

    /// Holds out templates for a compositional bucket; a template is
    /// eligible while every one of its schema items stays covered by at
    /// least one other remaining template.
    fn hold_out_templates(
        &mut self,
        order: &[String],
        coverage: &mut BTreeMap<SchemaItem, usize>,
        bucket: Bucket,
        target: usize,
    ) -> usize {
        let mut count = 0usize;
        for tid in order {
            if count >= target {
                break;
            }
            if self.assigned.contains_key(tid) {
                continue;
            }
            let info = &self.templates[tid];
            if info.items.iter().all(|item| coverage[item] >= 2) {
                count += info.records.len();
                for item in &info.items {
                    *coverage.get_mut(item).expect("counted") -= 1;
                }
                self.assigned.insert(tid.clone(), bucket);
            }
        }
        count
    }
}

/// Splits records roughly 70/10/20 into train/dev/test. Within dev and test,
/// about half the questions come from held-out domains (zero-shot), a
/// quarter from held-out templates (compositional), and a quarter is
/// sampled from training templates (i.i.d.). Deterministic from the seed.
pub fn split_dataset(
    records: &[DatasetRecord],
    kb: &KnowledgeBase,
    seed: u64,
) -> Result<SplitOutput, SplitError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut exprs: Vec<SExpr> = Vec::with_capacity(records.len());
    let mut templates: BTreeMap<String, TemplateInfo> = BTreeMap::new();
    for (idx, record) in records.iter().enumerate() {
        let expr = parse(&record.s_expression).map_err(|e| SplitError::BadRecord {
            qid: record.qid.clone(),
            detail: e.to_string(),
        })?;
        let items = expr.schema_items();
        let info = templates.entry(record.template_id.clone()).or_default();
        info.records.push(idx);
        info.domains.insert(record.domain.clone());
        for item in &items {
            if let Some(domain) = item.domain() {
                info.domains.insert(domain.to_string());
            }
        }
        info.items.extend(items);
        exprs.push(expr);
    }

    let total = records.len();
    let test_total = total / 5;
    let dev_total = total / 10;
    let test_zs = test_total / 2;
    let test_comp = test_total / 4;
    let test_iid = test_total - test_zs - test_comp;
    let dev_zs = dev_total / 2;
    let dev_comp = dev_total / 4;
    let dev_iid = dev_total - dev_zs - dev_comp;
    if test_zs == 0 || dev_zs == 0 || test_comp == 0 || dev_comp == 0 {
        return Err(SplitError::Unsatisfiable {
            detail: format!("{total} records are too few for held-out quarters"),
            achievable: "need at least 40 records".into(),
        });
    }

    let mut domain_templates: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (tid, info) in &templates {
        for domain in &info.domains {
            domain_templates
                .entry(domain.clone())
                .or_default()
                .insert(tid.clone());
        }
    }

    let mut domain_order: Vec<String> = domain_templates.keys().cloned().collect();
    domain_order.shuffle(&mut rng);

    let mut state = SplitState {
        templates,
        domain_templates,
        assigned: BTreeMap::new(),
        owned_domains: BTreeMap::new(),
    };

    let test_zs_got = state.hold_out_domains(&domain_order, Bucket::TestZs, test_zs);
    let dev_zs_got = state.hold_out_domains(&domain_order, Bucket::DevZs, dev_zs);
    if test_zs_got == 0 || dev_zs_got == 0 {
        return Err(SplitError::Unsatisfiable {
            detail: "not enough distinct domains to hold out for zero-shot".into(),
            achievable: format!("{} domains available", domain_order.len()),
        });
    }

    let mut coverage: BTreeMap<SchemaItem, usize> = BTreeMap::new();
    let mut template_order: Vec<String> = Vec::new();
    for (tid, info) in &state.templates {
        if state.assigned.contains_key(tid) {
            continue;
        }
        template_order.push(tid.clone());
        for item in &info.items {
            *coverage.entry(item.clone()).or_insert(0) += 1;
        }
    }
    template_order.shuffle(&mut rng);

    let test_comp_got =
        state.hold_out_templates(&template_order, &mut coverage, Bucket::TestComp, test_comp);
    let dev_comp_got =
        state.hold_out_templates(&template_order, &mut coverage, Bucket::DevComp, dev_comp);
    if test_comp_got == 0 || dev_comp_got == 0 {
        return Err(SplitError::Unsatisfiable {
            detail: "not enough templates with redundant schema coverage to hold out".into(),
            achievable: format!(
                "held out {test_comp_got} test / {dev_comp_got} dev compositional records"
            ),
        });
    }

    // i.i.d. quarters: sample records whose template keeps at least one
    // record in training
    let mut record_bucket: Vec<Option<Bucket>> = vec![None; records.len()];
    for (tid, bucket) in &state.assigned {
        for &idx in &state.templates[tid].records {
            record_bucket[idx] = Some(*bucket);
        }
    }
    let mut train_pool: Vec<usize> = (0..records.len())
        .filter(|&i| record_bucket[i].is_none())
        .collect();
    let mut per_template_left: BTreeMap<&str, usize> = BTreeMap::new();
    for &idx in &train_pool {
        *per_template_left
            .entry(records[idx].template_id.as_str())
            .or_insert(0) += 1;
    }
    train_pool.shuffle(&mut rng);
    for (bucket, target) in [(Bucket::TestIid, test_iid), (Bucket::DevIid, dev_iid)] {
        let mut count = 0usize;
        for &idx in &train_pool {
            if count >= target {
                break;
            }
            if record_bucket[idx].is_some() {
                continue;
            }
            let left = per_template_left
                .get_mut(records[idx].template_id.as_str())
                .expect("in pool");
            if *left >= 2 {
                *left -= 1;
                record_bucket[idx] = Some(bucket);
                count += 1;
            }
        }
    }

    // assemble, then verify every dev/test record against the actual train
    let mut train_schema: BTreeSet<SchemaItem> = BTreeSet::new();
    let mut train_keys: BTreeSet<String> = BTreeSet::new();
    for (idx, expr) in exprs.iter().enumerate() {
        if record_bucket[idx].is_none() {
            train_schema.extend(expr.schema_items());
            train_keys.insert(abstract_template(expr, kb).canonical_key().to_string());
        }
    }

    let mut output = SplitOutput::default();
    for (idx, record) in records.iter().enumerate() {
        let mut record = record.clone();
        match record_bucket[idx] {
            None => {
                record.level = Level::Unset;
                output.train.push(record);
            }
            Some(bucket) => {
                let actual = classify_level(&exprs[idx], kb, &train_schema, &train_keys);
                if actual != bucket.level() {
                    return Err(SplitError::Inconsistent {
                        qid: record.qid.clone(),
                        assigned: bucket.level(),
                        actual,
                    });
                }
                record.level = actual;
                if bucket.is_test() {
                    output.test.push(record);
                } else {
                    output.dev.push(record);
                }
            }
        }
    }

    // held-out domain disjointness over the records' own domains
    let train_domains: BTreeSet<&str> = output.train.iter().map(|r| r.domain.as_str()).collect();
    let test_zs_domains = level_domains(&output.test, Level::ZeroShot);
    let dev_zs_domains = level_domains(&output.dev, Level::ZeroShot);
    if !test_zs_domains.is_disjoint(&dev_zs_domains)
        || !test_zs_domains.is_disjoint(&train_domains)
        || !dev_zs_domains.is_disjoint(&train_domains)
    {
        return Err(SplitError::Unsatisfiable {
            detail: "held-out domains overlap between splits".into(),
            achievable: "corpus domains are too entangled".into(),
        });
    }

    output.train.sort_by(|a, b| a.qid.cmp(&b.qid));
    output.dev.sort_by(|a, b| a.qid.cmp(&b.qid));
    output.test.sort_by(|a, b| a.qid.cmp(&b.qid));
    Ok(output)
}

fn level_domains(records: &[DatasetRecord], level: Level) -> BTreeSet<&str> {
    records
        .iter()
        .filter(|r| r.level == level)
        .map(|r| r.domain.as_str())
        .collect()
}
