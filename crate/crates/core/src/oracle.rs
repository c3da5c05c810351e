//! Exhaustive reference search: enumerates every complete sequence up to a
//! length cap and returns the argmax. Ground truth for decoder tests; not
//! built for speed.

use crate::error::{Error, Result};
use crate::scoring::{ScorerState, ScoringModel};
use crate::vocab::{TokenId, Vocabulary};

/// Hard bound on `(|V|-1)^cap` to keep enumeration at test scale.
const ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub best_tokens: Vec<TokenId>,
    pub best_total: f64,
    pub best_normalized: f64,
    /// Count of complete sequences examined:
    /// `sum over l in 1..=cap of (|V|-1)^(l-1)`.
    pub n_enumerated: u64,
}

struct Search<'a> {
    model: &'a dyn ScoringModel,
    vocab: &'a Vocabulary,
    cap: usize,
    normalize: bool,
    best: Option<(Vec<TokenId>, f64, f64)>, // (tokens, total, normalized)
    n_enumerated: u64,
}

impl Search<'_> {
    /// Consider the completed sequence `prefix + EOS`.
    fn offer(&mut self, prefix: &[TokenId], total: f64) {
        self.n_enumerated += 1;
        let len = prefix.len() + 1;
        let normalized = total / len as f64;
        let score = if self.normalize { normalized } else { total };
        let better = match &self.best {
            None => true,
            Some((tokens, best_total, best_norm)) => {
                let best_score = if self.normalize {
                    *best_norm
                } else {
                    *best_total
                };
                score > best_score
                    || (score == best_score && {
                        let mut seq = prefix.to_vec();
                        seq.push(self.vocab.eos_id());
                        self.vocab.cmp_lex(&seq, tokens) == std::cmp::Ordering::Less
                    })
            }
        };
        if better {
            let mut tokens = prefix.to_vec();
            tokens.push(self.vocab.eos_id());
            self.best = Some((tokens, total, normalized));
        }
    }

    /// Expand the node for `prefix`; `state` has not yet consumed `last`.
    fn visit(
        &mut self,
        prefix: &mut Vec<TokenId>,
        state: &ScorerState,
        last: Option<TokenId>,
        total: f64,
    ) -> Result<()> {
        let (dist, next_state) = self.model.step(state, last)?;
        let eos = self.vocab.eos_id();
        self.offer(prefix, total + dist[eos as usize]);
        if prefix.len() + 2 <= self.cap {
            for tok in self.vocab.content_ids() {
                prefix.push(tok);
                self.visit(prefix, &next_state, Some(tok), total + dist[tok as usize])?;
                prefix.pop();
            }
        }
        Ok(())
    }
}

/// Enumerate every sequence of up to `cap` tokens whose final token is EOS
/// and whose earlier tokens are not, score each by summing model step
/// log-probabilities, and return the argmax of normalized (or total) score.
/// Exact ties resolve to the lexicographically smallest token sequence.
pub fn exhaustive_best(
    source: &[TokenId],
    model: &dyn ScoringModel,
    cap: usize,
    normalize: bool,
) -> Result<OracleResult> {
    let vocab = model.vocab();
    if cap < 1 {
        return Err(Error::InvalidConfig("oracle cap must be >= 1".into()));
    }
    let content = (vocab.size() - 1) as u64;
    let mut worst: u64 = 1;
    for _ in 0..cap {
        worst = worst.saturating_mul(content);
        if worst > ENUMERATION_LIMIT {
            return Err(Error::SearchTooLarge {
                vocab_size: vocab.size(),
                cap,
                limit: ENUMERATION_LIMIT,
            });
        }
    }

    let mut search = Search {
        model,
        vocab,
        cap,
        normalize,
        best: None,
        n_enumerated: 0,
    };
    let state = model.init(source)?;
    let mut prefix = Vec::new();
    search.visit(&mut prefix, &state, None, 0.0)?;

    let (best_tokens, best_total, best_normalized) = search
        .best
        .expect("cap >= 1 guarantees at least the bare EOS sequence");
    Ok(OracleResult {
        best_tokens,
        best_total,
        best_normalized,
        n_enumerated: search.n_enumerated,
    })
}
