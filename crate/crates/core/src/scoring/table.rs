//! Table-driven model: an explicit map from target prefixes to
//! distributions, for exact test fixtures.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vocab::{TokenId, Vocabulary};

use super::{check_token, next_model_id, ScorerState, ScoringModel};

/// Sum tolerance when validating fixture distributions.
const NORMALIZATION_TOL: f64 = 1e-6;

/// Looks up the distribution for the full generated prefix; prefixes absent
/// from the table fall back to the uniform distribution.
pub struct TableModel {
    id: u64,
    vocab: Vocabulary,
    table: HashMap<Vec<TokenId>, Vec<f64>>,
    uniform: f64,
}

impl TableModel {
    /// Build from linear-probability rows keyed by target prefix. Each row
    /// must have one entry per vocabulary token, entries in `[0, 1]`, and sum
    /// to 1 within 1e-6; rows are stored as natural logs.
    pub fn from_probs(
        vocab: Vocabulary,
        rows: impl IntoIterator<Item = (Vec<TokenId>, Vec<f64>)>,
    ) -> Result<Self> {
        let mut table = HashMap::new();
        for (ctx, probs) in rows {
            for &tok in &ctx {
                check_token(&vocab, tok)?;
            }
            let key = vocab.format_tokens(&ctx);
            if probs.len() != vocab.size() {
                return Err(Error::InvalidModel(format!(
                    "row {key:?} has {} entries, vocabulary has {}",
                    probs.len(),
                    vocab.size()
                )));
            }
            let mut sum = 0.0;
            for &p in &probs {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidModel(format!(
                        "row {key:?} has probability {p} outside [0, 1]"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidModel(format!(
                    "row {key:?} sums to {sum}, expected 1"
                )));
            }
            table.insert(ctx, probs.iter().map(|&p| p.ln()).collect());
        }
        let uniform = -(vocab.size() as f64).ln();
        Ok(Self {
            id: next_model_id(),
            vocab,
            table,
            uniform,
        })
    }

    /// Parse the fixture format: a JSON object mapping space-joined prefix
    /// strings (`""` for the root) to arrays of linear probabilities.
    pub fn from_json_str(vocab: Vocabulary, json: &str) -> Result<Self> {
        let raw: serde_json::Map<String, serde_json::Value> = serde_json::from_str(json)?;
        let mut rows = Vec::with_capacity(raw.len());
        for (key, value) in raw {
            let ctx = if key.is_empty() {
                Vec::new()
            } else {
                vocab.parse_line(&key, 0).map_err(|e| match e {
                    Error::UnknownToken { token, .. } => Error::InvalidModel(format!(
                        "fixture context {key:?} uses unknown token {token:?}"
                    )),
                    other => other,
                })?
            };
            let probs: Vec<f64> = serde_json::from_value(value.clone()).map_err(|_| {
                Error::InvalidModel(format!("fixture row {key:?} is not an array of numbers"))
            })?;
            rows.push((ctx, probs));
        }
        Self::from_probs(vocab, rows)
    }

    /// Number of stored rows.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl ScoringModel for TableModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn init(&self, source: &[TokenId]) -> Result<ScorerState> {
        for &tok in source {
            check_token(&self.vocab, tok)?;
        }
        Ok(ScorerState::new(self.id, Arc::new(Vec::<TokenId>::new())))
    }

    fn step(
        &self,
        state: &ScorerState,
        last_token: Option<TokenId>,
    ) -> Result<(Vec<f64>, ScorerState)> {
        let prefix = state.downcast::<Vec<TokenId>>(self.id)?;
        let next_prefix = match last_token {
            Some(tok) => {
                check_token(&self.vocab, tok)?;
                let mut p = prefix.clone();
                p.push(tok);
                p
            }
            None => prefix.clone(),
        };
        let dist = match self.table.get(&next_prefix) {
            Some(logs) => logs.clone(),
            None => vec![self.uniform; self.vocab.size()],
        };
        Ok((dist, ScorerState::new(self.id, Arc::new(next_prefix))))
    }
}
