//! Planted-path model: a deterministic scorer with one high-probability
//! target sequence and a configurable decoy branch that outranks it for the
//! first `d` steps. Produces controllable search errors: with any deception
//! depth `d >= 1`, greedy (beam 1) search follows the decoy and misses the
//! planted sequence, while a wide enough unpruned beam recovers it.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vocab::{TokenId, Vocabulary};

use super::{check_token, next_model_id, ScorerState, ScoringModel};

enum Mode {
    /// One fixed planted sequence and explicit decoy tokens.
    Fixed {
        planted: Arc<Vec<TokenId>>,
        decoys: Arc<Vec<TokenId>>,
    },
    /// The source sentence itself is the planted sequence; decoys are derived
    /// from it. Gives every sentence of a corpus its own planted target.
    Echo { depth: usize },
}

struct PlantedState {
    prefix: Vec<TokenId>,
    planted: Arc<Vec<TokenId>>,
    decoys: Arc<Vec<TokenId>>,
}

pub struct PlantedPathModel {
    id: u64,
    vocab: Vocabulary,
    mode: Mode,
    /// Probability of the planted continuation at each on-path step.
    p_hi: f64,
    /// Probability of the decoy continuation for the first `d` steps.
    p_decoy: f64,
    /// EOS probability once off every special path.
    p_exit: f64,
}

impl PlantedPathModel {
    /// Fixed planted sequence `planted` (content tokens; EOS completes it)
    /// with decoy tokens for the first `decoys.len()` steps.
    pub fn fixed(
        vocab: Vocabulary,
        planted: Vec<TokenId>,
        decoys: Vec<TokenId>,
        p_hi: f64,
        p_decoy: f64,
        p_exit: f64,
    ) -> Result<Self> {
        validate_paths(&vocab, &planted, &decoys)?;
        let has_decoy = !decoys.is_empty();
        let model = Self {
            id: next_model_id(),
            vocab,
            mode: Mode::Fixed {
                planted: Arc::new(planted),
                decoys: Arc::new(decoys),
            },
            p_hi,
            p_decoy,
            p_exit,
        };
        model.validate_probs(has_decoy)?;
        Ok(model)
    }

    /// Echo mode: `init(source)` plants the source itself, with decoys
    /// derived as the cyclically-next content token at each of the first
    /// `depth` positions.
    pub fn echo(
        vocab: Vocabulary,
        depth: usize,
        p_hi: f64,
        p_decoy: f64,
        p_exit: f64,
    ) -> Result<Self> {
        if vocab.size() < 3 {
            return Err(Error::InvalidModel(
                "planted model needs at least two content tokens".into(),
            ));
        }
        let model = Self {
            id: next_model_id(),
            vocab,
            mode: Mode::Echo { depth },
            p_hi,
            p_decoy,
            p_exit,
        };
        model.validate_probs(depth > 0)?;
        Ok(model)
    }

    fn validate_probs(&self, has_decoy: bool) -> Result<()> {
        for (name, p) in [
            ("p_hi", self.p_hi),
            ("p_decoy", self.p_decoy),
            ("p_exit", self.p_exit),
        ] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidModel(format!(
                    "{name} out of range: {p} (must be in (0, 1))"
                )));
            }
        }
        if has_decoy {
            if self.p_decoy <= self.p_hi {
                return Err(Error::InvalidModel(format!(
                    "p_decoy ({}) must exceed p_hi ({}) when a decoy is planted",
                    self.p_decoy, self.p_hi
                )));
            }
            if self.p_hi + self.p_decoy >= 1.0 {
                return Err(Error::InvalidModel(format!(
                    "p_hi + p_decoy = {} must stay below 1",
                    self.p_hi + self.p_decoy
                )));
            }
        }
        // the planted continuation must dominate the spread-out remainder,
        // with the root step (both boosts active) as the binding case
        let boost = if has_decoy {
            self.p_hi + self.p_decoy
        } else {
            self.p_hi
        };
        let slots = self.vocab.size() as f64 - if has_decoy { 2.0 } else { 1.0 };
        let spread = (1.0 - boost) / slots;
        if spread >= self.p_hi {
            return Err(Error::InvalidModel(format!(
                "uniform remainder share {spread} would reach p_hi {}; raise p_hi or grow the vocabulary",
                self.p_hi
            )));
        }
        Ok(())
    }

    fn make_distribution(&self, state: &PlantedState) -> Vec<f64> {
        let v = self.vocab.size();
        let prefix = &state.prefix;
        let planted = &state.planted;
        let decoys = &state.decoys;

        // (token, probability) boosts active at this prefix
        let mut specials: Vec<(TokenId, f64)> = Vec::with_capacity(2);
        let m = prefix.len();
        let on_planted = m <= planted.len() && prefix[..] == planted[..m];
        let on_decoy = m < decoys.len() && prefix[..] == decoys[..m];
        if on_planted {
            if m < planted.len() {
                specials.push((planted[m], self.p_hi));
            } else {
                specials.push((self.vocab.eos_id(), self.p_hi));
            }
        }
        if on_decoy {
            specials.push((decoys[m], self.p_decoy));
        }
        if specials.is_empty() {
            specials.push((self.vocab.eos_id(), self.p_exit));
        }

        let special_mass: f64 = specials.iter().map(|&(_, p)| p).sum();
        let spread = (1.0 - special_mass) / (v - specials.len()) as f64;
        let mut dist = vec![spread.ln(); v];
        for (tok, p) in specials {
            dist[tok as usize] = p.ln();
        }
        dist
    }
}

fn validate_paths(vocab: &Vocabulary, planted: &[TokenId], decoys: &[TokenId]) -> Result<()> {
    if vocab.size() < 3 {
        return Err(Error::InvalidModel(
            "planted model needs at least two content tokens".into(),
        ));
    }
    if planted.is_empty() {
        return Err(Error::InvalidModel("planted sequence is empty".into()));
    }
    for &tok in planted.iter().chain(decoys.iter()) {
        check_token(vocab, tok)?;
        if !vocab.is_content(tok) {
            return Err(Error::InvalidModel(
                "planted and decoy sequences must use content tokens only".into(),
            ));
        }
    }
    if let (Some(&p0), Some(&q0)) = (planted.first(), decoys.first()) {
        if p0 == q0 {
            return Err(Error::InvalidModel(
                "decoy must diverge from the planted sequence at the first step".into(),
            ));
        }
    }
    Ok(())
}

/// Decoy for position `t`: the next content token after `planted[t]` in
/// cyclic content order. Always differs from `planted[t]`.
fn derive_decoys(vocab: &Vocabulary, planted: &[TokenId], depth: usize) -> Vec<TokenId> {
    let content: Vec<TokenId> = vocab.content_ids().collect();
    planted
        .iter()
        .take(depth)
        .map(|&p| {
            let pos = content.iter().position(|&c| c == p).expect("content token");
            content[(pos + 1) % content.len()]
        })
        .collect()
}

impl ScoringModel for PlantedPathModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn init(&self, source: &[TokenId]) -> Result<ScorerState> {
        for &tok in source {
            check_token(&self.vocab, tok)?;
        }
        let (planted, decoys) = match &self.mode {
            Mode::Fixed { planted, decoys } => (planted.clone(), decoys.clone()),
            Mode::Echo { depth } => {
                if source.is_empty() {
                    return Err(Error::VocabMismatch(
                        "echo planted model requires a non-empty source".into(),
                    ));
                }
                if source.iter().any(|&t| !self.vocab.is_content(t)) {
                    return Err(Error::VocabMismatch(
                        "echo planted model requires a content-only source".into(),
                    ));
                }
                let decoys = derive_decoys(&self.vocab, source, *depth);
                (Arc::new(source.to_vec()), Arc::new(decoys))
            }
        };
        Ok(ScorerState::new(
            self.id,
            Arc::new(PlantedState {
                prefix: Vec::new(),
                planted,
                decoys,
            }),
        ))
    }

    fn step(
        &self,
        state: &ScorerState,
        last_token: Option<TokenId>,
    ) -> Result<(Vec<f64>, ScorerState)> {
        let st = state.downcast::<PlantedState>(self.id)?;
        let next = match last_token {
            Some(tok) => {
                check_token(&self.vocab, tok)?;
                let mut prefix = st.prefix.clone();
                prefix.push(tok);
                PlantedState {
                    prefix,
                    planted: st.planted.clone(),
                    decoys: st.decoys.clone(),
                }
            }
            None => PlantedState {
                prefix: st.prefix.clone(),
                planted: st.planted.clone(),
                decoys: st.decoys.clone(),
            },
        };
        let dist = self.make_distribution(&next);
        Ok((dist, ScorerState::new(self.id, Arc::new(next))))
    }
}
