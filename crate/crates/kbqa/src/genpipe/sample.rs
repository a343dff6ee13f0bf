//! Controlled sampling of (logical form, paraphrase) combinations with
//! weight decay: each time an item is drawn its weight is divided by the
//! pool's decay divisor, pushing later draws toward unused items.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::{DatasetRecord, Level};
use crate::kb::Object;
use crate::sexpr::SExpr;

/// Default decay divisor for logical forms.
pub const DEFAULT_RHO_L: f64 = 2.0;
/// Default decay divisor for paraphrases.
pub const DEFAULT_RHO_P: f64 = 10.0;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("template {template_id}: empty {what} pool")]
    EmptyPool {
        template_id: String,
        what: &'static str,
    },
    #[error("template {template_id}: paraphrase `{paraphrase_id}` has {slots} slots but the grounding has {values} values")]
    SlotMismatch {
        template_id: String,
        paraphrase_id: String,
        slots: usize,
        values: usize,
    },
}

/// One grounded logical form ready for sampling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedForm {
    pub expr: SExpr,
    /// Placeholder values in hole order, used to fill paraphrase slots.
    pub values: Vec<Object>,
    /// Printed members of the form's denotation.
    pub answers: Vec<String>,
    pub domain: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paraphrase {
    pub id: String,
    /// Question text with `[bracketed]` placeholder slots.
    pub text: String,
}

/// The grounding and paraphrase pools of one template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplatePool {
    pub template_id: String,
    pub forms: Vec<GroundedForm>,
    pub paraphrases: Vec<Paraphrase>,
}

/// Mutable sampler state: per-pool weights plus the seeded generator.
/// Weights start at 1 and divide by rho on each draw.
#[derive(Debug, Clone)]
pub struct SamplerState {
    pub rho_l: f64,
    pub rho_p: f64,
    rng: ChaCha8Rng,
    form_weights: Vec<Vec<f64>>,
    paraphrase_weights: Vec<Vec<f64>>,
}

impl SamplerState {
    pub fn new(pools: &[TemplatePool], rho_l: f64, rho_p: f64, seed: u64) -> Self {
        assert!(rho_l >= 1.0 && rho_p >= 1.0, "decay divisors must be >= 1");
        SamplerState {
            rho_l,
            rho_p,
            rng: ChaCha8Rng::seed_from_u64(seed),
            form_weights: pools.iter().map(|p| vec![1.0; p.forms.len()]).collect(),
            paraphrase_weights: pools
                .iter()
                .map(|p| vec![1.0; p.paraphrases.len()])
                .collect(),
        }
    }

    pub fn form_weights(&self, pool: usize) -> &[f64] {
        &self.form_weights[pool]
    }

    pub fn paraphrase_weights(&self, pool: usize) -> &[f64] {
        &self.paraphrase_weights[pool]
    }
}

/// Draws `n` records: template uniformly, then grounding and paraphrase
/// proportionally to their decaying weights. Fully reproducible from the
/// seed in [`SamplerState`].
pub fn sample_records(
    pools: &[TemplatePool],
    state: &mut SamplerState,
    n: usize,
) -> Result<Vec<DatasetRecord>, GenError> {
    for pool in pools {
        if pool.forms.is_empty() {
            return Err(GenError::EmptyPool {
                template_id: pool.template_id.clone(),
                what: "grounding",
            });
        }
        if pool.paraphrases.is_empty() {
            return Err(GenError::EmptyPool {
                template_id: pool.template_id.clone(),
                what: "paraphrase",
            });
        }
    }
    assert!(!pools.is_empty() || n == 0, "cannot sample from zero pools");

    let mut records = Vec::with_capacity(n);
    for seq in 0..n {
        let t = state.rng.gen_range(0..pools.len());
        let pool = &pools[t];
        let form_idx = draw_decaying(&mut state.rng, &mut state.form_weights[t], state.rho_l);
        let para_idx = draw_decaying(
            &mut state.rng,
            &mut state.paraphrase_weights[t],
            state.rho_p,
        );
        let form = &pool.forms[form_idx];
        let paraphrase = &pool.paraphrases[para_idx];
        let question = fill_slots(paraphrase, form, &pool.template_id)?;
        records.push(DatasetRecord {
            qid: format!("q{seq}"),
            question,
            s_expression: form.expr.to_string(),
            answers: form.answers.clone(),
            template_id: pool.template_id.clone(),
            paraphrase_id: paraphrase.id.clone(),
            domain: form.domain.clone(),
            level: Level::Unset,
        });
    }
    Ok(records)
}

/// Weighted draw followed by dividing the winner's weight by rho.
fn draw_decaying(rng: &mut ChaCha8Rng, weights: &mut [f64], rho: f64) -> usize {
    let dist = WeightedIndex::new(weights.iter().copied()).expect("positive weights");
    let idx = dist.sample(rng);
    weights[idx] /= rho;
    idx
}

/// Replaces the i-th `[...]` slot with the i-th grounding value.
fn fill_slots(
    paraphrase: &Paraphrase,
    form: &GroundedForm,
    template_id: &str,
) -> Result<String, GenError> {
    let mut out = String::with_capacity(paraphrase.text.len());
    let mut slot = 0usize;
    let mut rest = paraphrase.text.as_str();
    while let Some(open) = rest.find('[') {
        let Some(close_rel) = rest[open..].find(']') else {
            break;
        };
        out.push_str(&rest[..open]);
        let value = form
            .values
            .get(slot)
            .ok_or_else(|| GenError::SlotMismatch {
                template_id: template_id.to_string(),
                paraphrase_id: paraphrase.id.clone(),
                slots: count_slots(&paraphrase.text),
                values: form.values.len(),
            })?;
        out.push_str(&display_value(value));
        slot += 1;
        rest = &rest[open + close_rel + 1..];
    }
    out.push_str(rest);
    if slot != form.values.len() {
        return Err(GenError::SlotMismatch {
            template_id: template_id.to_string(),
            paraphrase_id: paraphrase.id.clone(),
            slots: slot,
            values: form.values.len(),
        });
    }
    Ok(out)
}

fn count_slots(text: &str) -> usize {
    text.matches('[').count()
}

fn display_value(value: &Object) -> String {
    match value {
        Object::Entity(id) => id.to_string(),
        Object::Literal(l) => l.lexical(),
    }
}
