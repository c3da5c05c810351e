//! Pluggable scoring models.
//!
//! A `ScoringModel` turns decoder state into a log-probability distribution
//! over the vocabulary, one step at a time. Models are immutable after
//! construction and `step` is reentrant, so one model instance can serve many
//! concurrent decodes. Per-hypothesis state is opaque to the decoder and
//! cheap to duplicate.

use std::any::Any;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vocab::{TokenId, Vocabulary};

mod ngram;
mod planted;
mod table;

pub use ngram::NGramModel;
pub use planted::PlantedPathModel;
pub use table::TableModel;

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn next_model_id() -> u64 {
    NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed)
}

/// Opaque per-hypothesis scorer state. Owned by the model that created it;
/// passing it to a different model instance is an error.
#[derive(Clone)]
pub struct ScorerState {
    model_id: u64,
    data: Arc<dyn Any + Send + Sync>,
}

impl ScorerState {
    pub(crate) fn new(model_id: u64, data: Arc<dyn Any + Send + Sync>) -> Self {
        Self { model_id, data }
    }

    /// Recover the concrete state, verifying model ownership.
    pub(crate) fn downcast<T: 'static>(&self, model_id: u64) -> Result<&T> {
        if self.model_id != model_id {
            return Err(Error::StateMismatch);
        }
        self.data.downcast_ref::<T>().ok_or(Error::StateMismatch)
    }
}

impl std::fmt::Debug for ScorerState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ScorerState(model {})", self.model_id)
    }
}

/// Behavioral contract: `init` produces the state for an empty target prefix;
/// `step` consumes the last generated token (or none at the root) and returns
/// the log-probability vector for the next position plus the extended state.
///
/// Every returned vector has length equal to the vocabulary size and
/// log-sum-exps to zero within 1e-6, and identical `(source, prefix)` inputs
/// yield bit-identical vectors.
pub trait ScoringModel: Send + Sync {
    fn vocab(&self) -> &Vocabulary;

    fn init(&self, source: &[TokenId]) -> Result<ScorerState>;

    fn step(
        &self,
        state: &ScorerState,
        last_token: Option<TokenId>,
    ) -> Result<(Vec<f64>, ScorerState)>;
}

/// Query the model for one step. Thin free-function form of
/// [`ScoringModel::step`].
pub fn model_step(
    model: &dyn ScoringModel,
    state: &ScorerState,
    last_token: Option<TokenId>,
) -> Result<(Vec<f64>, ScorerState)> {
    model.step(state, last_token)
}

pub(crate) fn check_token(vocab: &Vocabulary, tok: TokenId) -> Result<()> {
    if !vocab.contains_id(tok) {
        return Err(Error::VocabMismatch(format!(
            "token id {tok} out of range for vocabulary of size {}",
            vocab.size()
        )));
    }
    Ok(())
}

/// Numerically stable log-sum-exp over a slice.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() && max < 0.0 {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

// ── Uniform model ─────────────────────────────────────────────────────────

/// Assigns every token probability `1/V` at every step.
pub struct UniformModel {
    id: u64,
    vocab: Vocabulary,
    log_prob: f64,
}

impl UniformModel {
    pub fn new(vocab: Vocabulary) -> Self {
        let log_prob = -(vocab.size() as f64).ln();
        Self {
            id: next_model_id(),
            vocab,
            log_prob,
        }
    }
}

impl ScoringModel for UniformModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn init(&self, source: &[TokenId]) -> Result<ScorerState> {
        for &tok in source {
            check_token(&self.vocab, tok)?;
        }
        Ok(ScorerState::new(self.id, Arc::new(())))
    }

    fn step(
        &self,
        state: &ScorerState,
        last_token: Option<TokenId>,
    ) -> Result<(Vec<f64>, ScorerState)> {
        state.downcast::<()>(self.id)?;
        if let Some(tok) = last_token {
            check_token(&self.vocab, tok)?;
        }
        Ok((vec![self.log_prob; self.vocab.size()], state.clone()))
    }
}
