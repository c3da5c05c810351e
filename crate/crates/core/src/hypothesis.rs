//! Partial and completed hypotheses, and the per-step extension candidates
//! that the pruning filters operate on.

use crate::scoring::ScorerState;
use crate::vocab::TokenId;

/// Identifier assigned to each hypothesis created during a decode, used to
/// reconstruct lineage.
pub type HypId = u64;

/// A partial target sequence with cumulative and per-step log-scores.
///
/// `scorer_state` is the state *before* consuming the hypothesis' own last
/// token; the scoring model consumes it on the next expansion. Scores are
/// natural-log probabilities.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub id: HypId,
    pub tokens: Vec<TokenId>,
    pub total_score: f64,
    pub word_scores: Vec<f64>,
    pub scorer_state: ScorerState,
    pub parent_id: Option<HypId>,
}

impl Hypothesis {
    /// The root: empty token list, score zero, the scorer's initial state.
    pub fn root(state: ScorerState) -> Self {
        Self {
            id: 0,
            tokens: Vec::new(),
            total_score: 0.0,
            word_scores: Vec::new(),
            scorer_state: state,
            parent_id: None,
        }
    }
}

/// A one-token extension of a hypothesis.
///
/// `parent` indexes the source hypothesis within the active set of the step
/// that generated the candidate; candidates are only meaningful relative to
/// that step's active list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub parent: usize,
    pub token: TokenId,
    /// Log-probability of `token` given the parent's state.
    pub word_score: f64,
    /// `parent.total_score + word_score`.
    pub total_score: f64,
}

/// A completed sequence ending in EOS.
#[derive(Clone, Debug, PartialEq)]
pub struct FinalHypothesis {
    pub tokens: Vec<TokenId>,
    pub total_score: f64,
    /// `total_score / tokens.len()`, the EOS token included in the count.
    pub normalized_score: f64,
}

impl FinalHypothesis {
    pub fn new(tokens: Vec<TokenId>, total_score: f64) -> Self {
        let normalized_score = total_score / tokens.len() as f64;
        Self {
            tokens,
            total_score,
            normalized_score,
        }
    }
}
