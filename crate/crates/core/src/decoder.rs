//! Beam-search decoding engine.
//!
//! Each step expands every active hypothesis into all single-token
//! extensions, reduces the pooled candidate list to the current beam size,
//! runs the pruning pipeline on top, then turns EOS survivors into final
//! hypotheses. Every selected EOS reduces the beam by one; the search stops
//! when the beam is exhausted, the active set empties, or the length cap
//! trips. The returned best is picked from the final candidate list by
//! length-normalized log-probability (or raw total when normalization is
//! off), with exact ties broken lexicographically.

use std::time::Instant;

use rayon::prelude::*;

use crate::config::{BeamSize, DecodeConfig};
use crate::error::{Error, Result};
use crate::hypothesis::{Candidate, FinalHypothesis, HypId, Hypothesis};
use crate::pruning::{
    prune_absolute, prune_max_candidates, prune_pipeline, prune_relative, prune_relative_local,
    sort_candidates, DropCounts, FilterKind,
};
use crate::scoring::{ScorerState, ScoringModel};
use crate::vocab::{TokenId, Vocabulary};

// ── Results and traces ────────────────────────────────────────────────────

/// Per-time-step instrumentation of one decode.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecodeTrace {
    /// Number of hypotheses expanded (model queries) at each step.
    pub fan_out_per_step: Vec<usize>,
    /// Pipeline drop counts at each step.
    pub dropped_per_step: Vec<DropCounts>,
    /// Beam value in effect while each step expanded.
    pub beam_per_step: Vec<BeamSize>,
}

impl DecodeTrace {
    pub fn tot_fan_out(&self) -> u64 {
        self.fan_out_per_step.iter().map(|&f| f as u64).sum()
    }

    pub fn avg_fan_out(&self) -> f64 {
        if self.fan_out_per_step.is_empty() {
            return 0.0;
        }
        self.tot_fan_out() as f64 / self.fan_out_per_step.len() as f64
    }
}

/// Outcome of decoding one source sentence.
#[derive(Clone, Debug)]
pub struct DecodeResult {
    pub best: FinalHypothesis,
    pub finals: Vec<FinalHypothesis>,
    pub trace: DecodeTrace,
    pub steps: usize,
}

/// A decode result plus the wall time of the `decode` call alone (model
/// construction and I/O excluded).
#[derive(Clone, Debug)]
pub struct DecodeRun {
    pub result: DecodeResult,
    pub wall_time_s: f64,
}

// ── Shared step machinery ─────────────────────────────────────────────────

fn check_source(vocab: &Vocabulary, source: &[TokenId]) -> Result<()> {
    for &tok in source {
        if !vocab.contains_id(tok) {
            return Err(Error::VocabMismatch(format!(
                "source token id {tok} out of range for vocabulary of size {}",
                vocab.size()
            )));
        }
    }
    Ok(())
}

/// Expand every active hypothesis into all |V| candidates. Returns the pooled
/// candidate list and, per parent, the scorer state that consumed the
/// parent's last token (shared by all its children).
fn expand(
    active: &[Hypothesis],
    model: &dyn ScoringModel,
) -> Result<(Vec<Candidate>, Vec<ScorerState>)> {
    let v = model.vocab().size();
    let mut pool = Vec::with_capacity(active.len() * v);
    let mut states = Vec::with_capacity(active.len());
    for (parent, hyp) in active.iter().enumerate() {
        let (dist, state) = model.step(&hyp.scorer_state, hyp.tokens.last().copied())?;
        if dist.len() != v {
            return Err(Error::ModelContract(format!(
                "distribution has {} entries, vocabulary has {v}",
                dist.len()
            )));
        }
        for (token, &word_score) in dist.iter().enumerate() {
            if word_score.is_nan() {
                return Err(Error::ModelContract(format!(
                    "NaN log-probability for token {token}"
                )));
            }
            pool.push(Candidate {
                parent,
                token: token as TokenId,
                word_score,
                total_score: hyp.total_score + word_score,
            });
        }
        states.push(state);
    }
    Ok((pool, states))
}

fn make_child(parent: &Hypothesis, cand: Candidate, state: ScorerState, id: HypId) -> Hypothesis {
    let mut tokens = parent.tokens.clone();
    tokens.push(cand.token);
    let mut word_scores = parent.word_scores.clone();
    word_scores.push(cand.word_score);
    Hypothesis {
        id,
        tokens,
        total_score: cand.total_score,
        word_scores,
        scorer_state: state,
        parent_id: Some(parent.id),
    }
}

fn final_from(parent: &Hypothesis, cand: Candidate, eos: TokenId) -> FinalHypothesis {
    let mut tokens = parent.tokens.clone();
    tokens.push(eos);
    FinalHypothesis::new(tokens, cand.total_score)
}

/// Best final by the configured score, lexicographically smallest on ties.
fn pick_best(finals: &[FinalHypothesis], normalize: bool, vocab: &Vocabulary) -> FinalHypothesis {
    let score = |f: &FinalHypothesis| {
        if normalize {
            f.normalized_score
        } else {
            f.total_score
        }
    };
    let mut best = &finals[0];
    for f in &finals[1..] {
        if score(f) > score(best)
            || (score(f) == score(best)
                && vocab.cmp_lex(&f.tokens, &best.tokens) == std::cmp::Ordering::Less)
        {
            best = f;
        }
    }
    best.clone()
}

/// Complete every active hypothesis by appending EOS at its model score.
/// Used when the length cap trips before any natural final exists.
fn force_complete(
    active: &[Hypothesis],
    model: &dyn ScoringModel,
    finals: &mut Vec<FinalHypothesis>,
) -> Result<()> {
    let eos = model.vocab().eos_id();
    for hyp in active {
        let (dist, _) = model.step(&hyp.scorer_state, hyp.tokens.last().copied())?;
        let mut tokens = hyp.tokens.clone();
        tokens.push(eos);
        finals.push(FinalHypothesis::new(
            tokens,
            hyp.total_score + dist[eos as usize],
        ));
    }
    Ok(())
}

// ── Main decode loop ──────────────────────────────────────────────────────

/// Decode one source sentence with the pruning pipeline.
pub fn decode(
    source: &[TokenId],
    model: &dyn ScoringModel,
    cfg: &DecodeConfig,
) -> Result<DecodeResult> {
    cfg.validate()?;
    check_source(model.vocab(), source)?;
    let cap = cfg.step_cap(source.len());
    if cap == 0 {
        return Err(Error::InvalidConfig(
            "length cap is zero for this source; raise max_len_factor or max_len_offset".into(),
        ));
    }

    let eos = model.vocab().eos_id();
    let mut beam = cfg.beam_size;
    let mut active = vec![Hypothesis::root(model.init(source)?)];
    let mut finals: Vec<FinalHypothesis> = Vec::new();
    let mut trace = DecodeTrace::default();
    let mut steps = 0;
    let mut next_id: HypId = 1;

    for _ in 0..cap {
        if active.is_empty() || beam.as_bounded() == Some(0) {
            break;
        }
        trace.beam_per_step.push(beam);
        trace.fan_out_per_step.push(active.len());

        let (mut pool, states) = expand(&active, model)?;
        sort_candidates(&mut pool);
        let limit = match beam {
            BeamSize::Bounded(b) => b,
            BeamSize::Unbounded => cfg.unbounded_cap,
        };
        pool.truncate(limit);

        let outcome = prune_pipeline(&pool, &cfg.prune)?;
        trace.dropped_per_step.push(outcome.dropped_by);
        steps += 1;

        let mut survivors: Vec<Candidate> = Vec::with_capacity(outcome.kept.len());
        for cand in outcome.kept {
            if cand.token == eos {
                finals.push(final_from(&active[cand.parent], cand, eos));
                if let BeamSize::Bounded(b) = beam {
                    beam = BeamSize::Bounded(b - 1);
                }
            } else {
                survivors.push(cand);
            }
        }
        if let BeamSize::Bounded(b) = beam {
            survivors.truncate(b);
        }

        active = survivors
            .into_iter()
            .map(|cand| {
                let child = make_child(
                    &active[cand.parent],
                    cand,
                    states[cand.parent].clone(),
                    next_id,
                );
                next_id += 1;
                child
            })
            .collect();
    }

    if finals.is_empty() {
        force_complete(&active, model, &mut finals)?;
    }
    if finals.is_empty() {
        return Err(Error::ModelContract(
            "search terminated with no completed hypothesis".into(),
        ));
    }

    let best = pick_best(&finals, cfg.normalize_by_length, model.vocab());
    Ok(DecodeResult {
        best,
        finals,
        trace,
        steps,
    })
}

/// Reference decode with the pruning pipeline bypassed entirely. Identical
/// loop otherwise: expand, sort, reduce to the current beam, extract EOS.
/// `decode` under the neutral pruning configuration must be token- and
/// trace-identical to this path.
pub fn decode_unpruned(
    source: &[TokenId],
    model: &dyn ScoringModel,
    cfg: &DecodeConfig,
) -> Result<DecodeResult> {
    cfg.validate()?;
    check_source(model.vocab(), source)?;
    let cap = cfg.step_cap(source.len());
    if cap == 0 {
        return Err(Error::InvalidConfig(
            "length cap is zero for this source; raise max_len_factor or max_len_offset".into(),
        ));
    }

    let eos = model.vocab().eos_id();
    let mut beam = cfg.beam_size;
    let mut active = vec![Hypothesis::root(model.init(source)?)];
    let mut finals: Vec<FinalHypothesis> = Vec::new();
    let mut trace = DecodeTrace::default();
    let mut steps = 0;
    let mut next_id: HypId = 1;

    for _ in 0..cap {
        if active.is_empty() || beam.as_bounded() == Some(0) {
            break;
        }
        trace.beam_per_step.push(beam);
        trace.fan_out_per_step.push(active.len());

        let (mut pool, states) = expand(&active, model)?;
        sort_candidates(&mut pool);
        let limit = match beam {
            BeamSize::Bounded(b) => b,
            BeamSize::Unbounded => cfg.unbounded_cap,
        };
        pool.truncate(limit);
        trace.dropped_per_step.push(DropCounts::default());
        steps += 1;

        let mut survivors: Vec<Candidate> = Vec::with_capacity(pool.len());
        for cand in pool {
            if cand.token == eos {
                finals.push(final_from(&active[cand.parent], cand, eos));
                if let BeamSize::Bounded(b) = beam {
                    beam = BeamSize::Bounded(b - 1);
                }
            } else {
                survivors.push(cand);
            }
        }
        if let BeamSize::Bounded(b) = beam {
            survivors.truncate(b);
        }

        active = survivors
            .into_iter()
            .map(|cand| {
                let child = make_child(
                    &active[cand.parent],
                    cand,
                    states[cand.parent].clone(),
                    next_id,
                );
                next_id += 1;
                child
            })
            .collect();
    }

    if finals.is_empty() {
        force_complete(&active, model, &mut finals)?;
    }
    if finals.is_empty() {
        return Err(Error::ModelContract(
            "search terminated with no completed hypothesis".into(),
        ));
    }

    let best = pick_best(&finals, cfg.normalize_by_length, model.vocab());
    Ok(DecodeResult {
        best,
        finals,
        trace,
        steps,
    })
}

// ── Corpus driver ─────────────────────────────────────────────────────────

/// Decode a corpus. Sentences are independent; results are identical for any
/// parallel schedule. The first failing sentence aborts with its index.
pub fn decode_corpus(
    sources: &[Vec<TokenId>],
    model: &dyn ScoringModel,
    cfg: &DecodeConfig,
) -> Result<Vec<DecodeResult>> {
    collect_indexed(
        sources
            .par_iter()
            .map(|source| decode(source, model, cfg))
            .collect(),
    )
}

/// Like [`decode_corpus`], with wall time measured around each `decode` call.
pub fn decode_corpus_timed(
    sources: &[Vec<TokenId>],
    model: &dyn ScoringModel,
    cfg: &DecodeConfig,
) -> Result<Vec<DecodeRun>> {
    collect_indexed(
        sources
            .par_iter()
            .map(|source| {
                let start = Instant::now();
                let result = decode(source, model, cfg)?;
                Ok(DecodeRun {
                    result,
                    wall_time_s: start.elapsed().as_secs_f64(),
                })
            })
            .collect(),
    )
}

fn collect_indexed<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Sentence {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

// ── Prune diagnostics ─────────────────────────────────────────────────────

/// What happened to a specific target sequence when replayed through a
/// pruned search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathFate {
    /// The target reached the final candidate list.
    Completed,
    /// A pruning filter removed the target's next extension at this step.
    DroppedByFilter { step: usize, filter: FilterKind },
    /// The beam-size reduction removed the target's extension at this step.
    DroppedByTruncation { step: usize },
    /// The beam was consumed by other finals before the target completed.
    BeamExhausted { step: usize },
    /// The length cap tripped before the target completed.
    CapExceeded,
}

/// Replay `target` (a completed sequence, EOS last) through the pruned
/// search for `source` and report the first step at which it is lost, or
/// that it survives. Used to attribute output changes to a specific filter.
pub fn replay_path_fate(
    source: &[TokenId],
    model: &dyn ScoringModel,
    cfg: &DecodeConfig,
    target: &[TokenId],
) -> Result<PathFate> {
    cfg.validate()?;
    check_source(model.vocab(), source)?;
    let vocab = model.vocab();
    let eos = vocab.eos_id();
    if target.last() != Some(&eos) {
        return Err(Error::InvalidConfig("replay target must end in EOS".into()));
    }
    if target[..target.len() - 1]
        .iter()
        .any(|&t| !vocab.is_content(t))
    {
        return Err(Error::InvalidConfig(
            "replay target must be content tokens followed by one EOS".into(),
        ));
    }
    let cap = cfg.step_cap(source.len());

    let mut beam = cfg.beam_size;
    let mut active = vec![Hypothesis::root(model.init(source)?)];
    // index of the hypothesis matching the target prefix within `active`
    let mut tracked: usize = 0;
    let mut next_id: HypId = 1;

    for (step, &want) in target.iter().enumerate() {
        if step == cap {
            return Ok(PathFate::CapExceeded);
        }
        if active.is_empty() || beam.as_bounded() == Some(0) {
            return Ok(PathFate::BeamExhausted { step });
        }

        let (mut pool, states) = expand(&active, model)?;
        sort_candidates(&mut pool);
        let limit = match beam {
            BeamSize::Bounded(b) => b,
            BeamSize::Unbounded => cfg.unbounded_cap,
        };
        pool.truncate(limit);

        let holds =
            |cands: &[Candidate]| cands.iter().any(|c| c.parent == tracked && c.token == want);
        if !holds(&pool) {
            return Ok(PathFate::DroppedByTruncation { step });
        }

        let after_rp = prune_relative(&pool, cfg.prune.rp)?;
        if !holds(&after_rp) {
            return Ok(PathFate::DroppedByFilter {
                step,
                filter: FilterKind::Rp,
            });
        }
        let after_ap = prune_absolute(&after_rp, cfg.prune.ap)?;
        if !holds(&after_ap) {
            return Ok(PathFate::DroppedByFilter {
                step,
                filter: FilterKind::Ap,
            });
        }
        let after_rpl = prune_relative_local(&after_ap, cfg.prune.rpl)?;
        if !holds(&after_rpl) {
            return Ok(PathFate::DroppedByFilter {
                step,
                filter: FilterKind::Rpl,
            });
        }
        let kept = prune_max_candidates(&after_rpl, cfg.prune.mc)?;
        if !holds(&kept) {
            return Ok(PathFate::DroppedByFilter {
                step,
                filter: FilterKind::Mc,
            });
        }

        if want == eos {
            return Ok(PathFate::Completed);
        }

        // EOS extraction and reduction, tracking the target's position
        let mut survivors: Vec<Candidate> = Vec::with_capacity(kept.len());
        for cand in kept {
            if cand.token == eos {
                if let BeamSize::Bounded(b) = beam {
                    beam = BeamSize::Bounded(b - 1);
                }
            } else {
                survivors.push(cand);
            }
        }
        if let BeamSize::Bounded(b) = beam {
            survivors.truncate(b);
        }
        let position = survivors
            .iter()
            .position(|c| c.parent == tracked && c.token == want);
        let Some(position) = position else {
            return Ok(PathFate::DroppedByTruncation { step });
        };

        active = survivors
            .into_iter()
            .map(|cand| {
                let child = make_child(
                    &active[cand.parent],
                    cand,
                    states[cand.parent].clone(),
                    next_id,
                );
                next_id += 1;
                child
            })
            .collect();
        tracked = position;
    }

    Ok(PathFate::CapExceeded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PruneConfig;
    use crate::scoring::{PlantedPathModel, TableModel, UniformModel};
    use crate::vocab::EOS_TOKEN;

    fn abc_vocab() -> Vocabulary {
        Vocabulary::with_eos(vec!["a".into(), "b".into(), EOS_TOKEN.into()], EOS_TOKEN).unwrap()
    }

    /// Greedy table model whose best path is "a b </s>".
    fn greedy_table() -> TableModel {
        TableModel::from_probs(
            abc_vocab(),
            [
                (vec![], vec![0.8, 0.15, 0.05]),
                (vec![0], vec![0.1, 0.7, 0.2]),
                (vec![0, 1], vec![0.05, 0.05, 0.9]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn greedy_beam_one_follows_the_table() {
        let model = greedy_table();
        let cfg = DecodeConfig::with_beam(BeamSize::Bounded(1));
        let out = decode(&[], &model, &cfg).unwrap();
        assert_eq!(out.best.tokens, vec![0, 1, 2]);
        let expected = 0.8f64.ln() + 0.7f64.ln() + 0.9f64.ln();
        assert!((out.best.total_score - expected).abs() < 1e-12);
        assert_eq!(out.trace.fan_out_per_step, vec![1, 1, 1]);
        // total equals the word-score sum on every final
        for f in &out.finals {
            assert!((f.normalized_score * f.tokens.len() as f64 - f.total_score).abs() < 1e-9);
        }
    }

    #[test]
    fn neutral_pruning_equals_bypassed_pipeline() {
        let model = greedy_table();
        for beam in [1, 2, 5] {
            let cfg = DecodeConfig::with_beam(BeamSize::Bounded(beam));
            let a = decode(&[], &model, &cfg).unwrap();
            let b = decode_unpruned(&[], &model, &cfg).unwrap();
            assert_eq!(a.best.tokens, b.best.tokens);
            assert_eq!(a.trace, b.trace);
            assert_eq!(a.steps, b.steps);
        }
    }

    #[test]
    fn fan_out_bounded_by_beam_and_shrinks_after_eos() {
        // beam 5 over a 3-token vocabulary: an EOS is selected early, so the
        // average fan-out stays strictly below the beam
        let model = greedy_table();
        let cfg = DecodeConfig::with_beam(BeamSize::Bounded(5));
        let out = decode(&[], &model, &cfg).unwrap();
        for (fan, beam) in out
            .trace
            .fan_out_per_step
            .iter()
            .zip(&out.trace.beam_per_step)
        {
            assert!(*fan <= beam.as_bounded().unwrap());
        }
        assert!(out.trace.avg_fan_out() < 5.0);
        assert!(out.finals.len() <= 5);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn beam_decrements_match_finals_per_step() {
        let model = greedy_table();
        let cfg = DecodeConfig::with_beam(BeamSize::Bounded(4));
        let out = decode(&[], &model, &cfg).unwrap();
        let mut finals_by_step = vec![0usize; out.steps];
        for f in &out.finals {
            // a final of length L was selected at step L-1
            finals_by_step[f.tokens.len() - 1] += 1;
        }
        for t in 0..out.steps.saturating_sub(1) {
            let b_now = out.trace.beam_per_step[t].as_bounded().unwrap();
            let b_next = out.trace.beam_per_step[t + 1].as_bounded().unwrap();
            assert_eq!(b_now - b_next, finals_by_step[t]);
        }
    }

    #[test]
    fn scores_are_non_increasing_along_lineages() {
        let model = greedy_table();
        let cfg = DecodeConfig::with_beam(BeamSize::Bounded(3));
        let out = decode(&[], &model, &cfg).unwrap();
        for f in &out.finals {
            assert!(f.total_score <= 0.0);
        }
    }

    #[test]
    fn force_completion_when_model_never_emits_eos() {
        // EOS has probability zero everywhere, so the cap trips and every
        // active hypothesis is completed by force
        let vocab = abc_vocab();
        let row = vec![0.6, 0.4, 0.0];
        let model = TableModel::from_probs(
            vocab,
            [
                (vec![], row.clone()),
                (vec![0], row.clone()),
                (vec![0, 0], row.clone()),
                (vec![0, 0, 0], row),
            ],
        )
        .unwrap();
        let cfg = DecodeConfig {
            max_len_factor: 0.0,
            max_len_offset: 3,
            ..DecodeConfig::with_beam(BeamSize::Bounded(1))
        };
        let out = decode(&[], &model, &cfg).unwrap();
        assert_eq!(out.steps, 3);
        assert_eq!(out.best.tokens.len(), 4); // 3 content tokens + EOS
        assert_eq!(out.best.tokens.last(), Some(&2));
        assert!(out.best.total_score.is_infinite() && out.best.total_score < 0.0);
    }

    #[test]
    fn unbounded_mode_terminates_by_pruning() {
        let vocab = Vocabulary::synthetic(9);
        let model =
            PlantedPathModel::fixed(vocab, vec![0, 0], vec![1, 2], 0.3, 0.42, 0.12).unwrap();
        let cfg = DecodeConfig {
            beam_size: BeamSize::Unbounded,
            prune: PruneConfig {
                ap: 1.0,
                ..PruneConfig::neutral()
            },
            ..DecodeConfig::default()
        };
        let out = decode(&[], &model, &cfg).unwrap();
        assert!(!out.finals.is_empty());
        assert!(out.trace.beam_per_step.iter().all(|b| b.is_unbounded()));
    }

    #[test]
    fn unbounded_cap_limits_active_set() {
        let model = UniformModel::new(Vocabulary::synthetic(9));
        let cfg = DecodeConfig {
            beam_size: BeamSize::Unbounded,
            unbounded_cap: 7,
            max_len_factor: 0.0,
            max_len_offset: 4,
            prune: PruneConfig {
                // weak enough that pruning alone would not contain growth
                ap: 100.0,
                ..PruneConfig::neutral()
            },
            ..DecodeConfig::default()
        };
        let out = decode(&[], &model, &cfg).unwrap();
        for &fan in &out.trace.fan_out_per_step {
            assert!(fan <= 7);
        }
    }

    #[test]
    fn malformed_model_distribution_is_rejected() {
        // a scorer that violates its contract: wrong vector length
        struct BrokenModel {
            vocab: Vocabulary,
        }
        impl ScoringModel for BrokenModel {
            fn vocab(&self) -> &Vocabulary {
                &self.vocab
            }
            fn init(&self, _source: &[TokenId]) -> crate::error::Result<ScorerState> {
                UniformModel::new(self.vocab.clone()).init(&[])
            }
            fn step(
                &self,
                _state: &ScorerState,
                _last: Option<TokenId>,
            ) -> crate::error::Result<(Vec<f64>, ScorerState)> {
                Ok((vec![-1.0; 2], self.init(&[]).unwrap()))
            }
        }
        let model = BrokenModel {
            vocab: Vocabulary::synthetic(4),
        };
        match decode(&[], &model, &DecodeConfig::default()) {
            Err(Error::ModelContract(_)) => {}
            other => panic!("expected ModelContract, got {other:?}"),
        }
    }

    #[test]
    fn rejects_source_outside_vocabulary() {
        let model = greedy_table();
        let cfg = DecodeConfig::default();
        match decode(&[9], &model, &cfg) {
            Err(Error::VocabMismatch(_)) => {}
            other => panic!("expected VocabMismatch, got {other:?}"),
        }
    }

    #[test]
    fn corpus_is_deterministic_and_indexed() {
        let model = greedy_table();
        let cfg = DecodeConfig::with_beam(BeamSize::Bounded(2));
        let sources: Vec<Vec<TokenId>> = vec![vec![], vec![0], vec![1, 1]];
        let results = decode_corpus(&sources, &model, &cfg).unwrap();
        assert_eq!(results.len(), 3);
        let single = decode(&sources[1], &model, &cfg).unwrap();
        assert_eq!(results[1].best.tokens, single.best.tokens);
        assert!(decode_corpus(&[], &model, &cfg).unwrap().is_empty());

        let bad: Vec<Vec<TokenId>> = vec![vec![], vec![42]];
        match decode_corpus(&bad, &model, &cfg) {
            Err(Error::Sentence { index: 1, .. }) => {}
            other => panic!("expected Sentence error at index 1, got {other:?}"),
        }
    }

    #[test]
    fn replay_reports_completion_for_the_unpruned_winner() {
        let model = greedy_table();
        let cfg = DecodeConfig::with_beam(BeamSize::Bounded(5));
        let base = decode(&[], &model, &cfg).unwrap();
        let fate = replay_path_fate(&[], &model, &cfg, &base.best.tokens).unwrap();
        assert_eq!(fate, PathFate::Completed);
    }

    #[test]
    fn replay_attributes_the_pruning_filter() {
        // planted path is ap-pruned at step 1 while the decoy survives
        let vocab = Vocabulary::synthetic(9);
        let model =
            PlantedPathModel::fixed(vocab, vec![0, 0], vec![1, 2], 0.3, 0.42, 0.12).unwrap();
        let neutral = DecodeConfig::with_beam(BeamSize::Bounded(5));
        let pruned_cfg = DecodeConfig {
            prune: PruneConfig {
                ap: 0.5,
                ..PruneConfig::neutral()
            },
            ..neutral
        };
        let base = decode(&[], &model, &neutral).unwrap();
        assert_eq!(base.best.tokens, vec![0, 0, 9]); // planted path + EOS
        let fate = replay_path_fate(&[], &model, &pruned_cfg, &base.best.tokens).unwrap();
        assert_eq!(
            fate,
            PathFate::DroppedByFilter {
                step: 1,
                filter: FilterKind::Ap
            }
        );
    }
}
