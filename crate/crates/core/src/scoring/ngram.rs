//! Count-based n-gram language model with add-k smoothing.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vocab::{TokenId, Vocabulary};

use super::{check_token, next_model_id, ScorerState, ScoringModel};

/// Context window: the previous `n-1` tokens, left-padded with the reserved
/// begin marker (`vocab.size()`). Empty for unigram models.
type Context = Vec<u32>;

#[derive(Default)]
struct ContextCounts {
    total: u64,
    per_token: HashMap<TokenId, u64>,
}

/// Add-k smoothed n-gram model: `P(w | ctx) = (c(ctx, w) + k) / (c(ctx) + k*V)`.
/// Unseen contexts fall back to the uniform `k / (k*V)` case.
pub struct NGramModel {
    id: u64,
    vocab: Vocabulary,
    order: usize,
    k: f64,
    counts: HashMap<Context, ContextCounts>,
}

impl NGramModel {
    /// Train from id-mapped sentences. Every token must be in the vocabulary.
    pub fn train(vocab: Vocabulary, corpus: &[Vec<TokenId>], order: usize, k: f64) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidModel(format!(
                "n-gram order must be >= 1, got {order}"
            )));
        }
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::InvalidModel(format!(
                "smoothing constant must be > 0, got {k}"
            )));
        }
        if corpus.is_empty() {
            return Err(Error::InvalidModel("training corpus is empty".into()));
        }

        let bos = vocab.begin_marker();
        let mut counts: HashMap<Context, ContextCounts> = HashMap::new();
        for sentence in corpus {
            for (i, &tok) in sentence.iter().enumerate() {
                check_token(&vocab, tok)?;
                let ctx = window(sentence, i, order, bos);
                let entry = counts.entry(ctx).or_default();
                entry.total += 1;
                *entry.per_token.entry(tok).or_insert(0) += 1;
            }
        }

        Ok(Self {
            id: next_model_id(),
            vocab,
            order,
            k,
            counts,
        })
    }

    /// Train from whitespace-tokenized lines; blank lines are skipped. Tokens
    /// outside the vocabulary are reported with their 1-based line number.
    pub fn train_from_lines<'a>(
        vocab: Vocabulary,
        lines: impl IntoIterator<Item = &'a str>,
        order: usize,
        k: f64,
    ) -> Result<Self> {
        let mut corpus = Vec::new();
        for (i, line) in lines.into_iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            corpus.push(vocab.parse_line(line, i + 1)?);
        }
        Self::train(vocab, &corpus, order, k)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn distribution(&self, ctx: &Context) -> Vec<f64> {
        let v = self.vocab.size() as f64;
        match self.counts.get(ctx) {
            Some(c) => {
                let denom = c.total as f64 + self.k * v;
                (0..self.vocab.size() as TokenId)
                    .map(|w| {
                        let num = c.per_token.get(&w).copied().unwrap_or(0) as f64 + self.k;
                        (num / denom).ln()
                    })
                    .collect()
            }
            None => vec![-v.ln(); self.vocab.size()],
        }
    }
}

/// The `order-1` tokens preceding position `i`, BOS-padded on the left.
fn window(sentence: &[TokenId], i: usize, order: usize, bos: u32) -> Context {
    let len = order - 1;
    let mut ctx = Vec::with_capacity(len);
    for back in (1..=len).rev() {
        if i >= back {
            ctx.push(sentence[i - back]);
        } else {
            ctx.push(bos);
        }
    }
    ctx
}

impl ScoringModel for NGramModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn init(&self, source: &[TokenId]) -> Result<ScorerState> {
        for &tok in source {
            check_token(&self.vocab, tok)?;
        }
        let ctx: Context = vec![self.vocab.begin_marker(); self.order - 1];
        Ok(ScorerState::new(self.id, Arc::new(ctx)))
    }

    fn step(
        &self,
        state: &ScorerState,
        last_token: Option<TokenId>,
    ) -> Result<(Vec<f64>, ScorerState)> {
        let ctx = state.downcast::<Context>(self.id)?;
        let next_ctx = match last_token {
            Some(tok) => {
                check_token(&self.vocab, tok)?;
                let mut c = ctx.clone();
                if self.order > 1 {
                    c.remove(0);
                    c.push(tok);
                }
                c
            }
            None => ctx.clone(),
        };
        let dist = self.distribution(&next_ctx);
        Ok((dist, ScorerState::new(self.id, Arc::new(next_ctx))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::logsumexp;
    use crate::vocab::EOS_TOKEN;

    fn abc_vocab() -> Vocabulary {
        Vocabulary::with_eos(vec!["a".into(), "b".into(), EOS_TOKEN.into()], EOS_TOKEN).unwrap()
    }

    #[test]
    fn unigram_add_one_hand_count() {
        // corpus "a b </s>", n=1, k=1, V=3: P(a) = (1+1)/(3+3) = 1/3
        let vocab = abc_vocab();
        let model = NGramModel::train_from_lines(vocab, ["a b </s>"], 1, 1.0).unwrap();
        let state = model.init(&[]).unwrap();
        let (dist, _) = model.step(&state, None).unwrap();
        assert!((dist[0] - (1.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!(logsumexp(&dist).abs() < 1e-9);
    }

    #[test]
    fn unknown_corpus_token_names_token_and_line() {
        let vocab = abc_vocab();
        match NGramModel::train_from_lines(vocab, ["a b </s>", "a z </s>"], 1, 1.0) {
            Err(Error::UnknownToken { token, line }) => {
                assert_eq!(token, "z");
                assert_eq!(line, 2);
            }
            Ok(_) => panic!("training should fail"),
            Err(other) => panic!("expected UnknownToken, got {other:?}"),
        }
    }

    #[test]
    fn rejects_degenerate_parameters() {
        let vocab = abc_vocab();
        assert!(NGramModel::train_from_lines(vocab.clone(), ["a </s>"], 0, 1.0).is_err());
        assert!(NGramModel::train_from_lines(vocab.clone(), ["a </s>"], 1, 0.0).is_err());
        assert!(NGramModel::train_from_lines(vocab, Vec::<&str>::new(), 1, 1.0).is_err());
    }

    #[test]
    fn bigram_context_tracks_history() {
        // corpus: "a a a </s>" and "a b </s>"
        // context [a]: c(a)=2, c(b)=1, c(</s>)=1, total 4, V=3, k=0.5
        let vocab = abc_vocab();
        let model =
            NGramModel::train_from_lines(vocab, ["a a a </s>", "a b </s>"], 2, 0.5).unwrap();
        let state = model.init(&[]).unwrap();
        let (_, s1) = model.step(&state, None).unwrap();
        let (dist, _) = model.step(&s1, Some(0)).unwrap();
        let denom: f64 = 4.0 + 0.5 * 3.0;
        assert!((dist[0] - ((2.0 + 0.5) / denom).ln()).abs() < 1e-12);
        assert!((dist[1] - ((1.0 + 0.5) / denom).ln()).abs() < 1e-12);
        assert!((dist[2] - ((1.0 + 0.5) / denom).ln()).abs() < 1e-12);
        assert!(logsumexp(&dist).abs() < 1e-9);
    }

    #[test]
    fn every_context_normalizes() {
        let vocab = abc_vocab();
        let model =
            NGramModel::train_from_lines(vocab, ["a b a </s>", "b b </s>", "a </s>"], 3, 0.25)
                .unwrap();
        // walk a few prefixes and check normalization at each step
        let state = model.init(&[]).unwrap();
        let (d0, s1) = model.step(&state, None).unwrap();
        assert!(logsumexp(&d0).abs() < 1e-9);
        let (d1, s2) = model.step(&s1, Some(1)).unwrap();
        assert!(logsumexp(&d1).abs() < 1e-9);
        let (d2, _) = model.step(&s2, Some(0)).unwrap();
        assert!(logsumexp(&d2).abs() < 1e-9);
    }

    #[test]
    fn large_k_approaches_uniform_monotonically() {
        let vocab = abc_vocab();
        let uniform = -(3f64).ln();
        let mut prev_gap = f64::INFINITY;
        for k in [1.0, 10.0, 1000.0] {
            let model = NGramModel::train_from_lines(vocab.clone(), ["a a b </s>"], 1, k).unwrap();
            let state = model.init(&[]).unwrap();
            let (dist, _) = model.step(&state, None).unwrap();
            let gap = dist
                .iter()
                .map(|&p| (p - uniform).abs())
                .fold(0.0, f64::max);
            assert!(gap < prev_gap, "gap {gap} not below {prev_gap} at k={k}");
            prev_gap = gap;
        }
    }
}
