//! Beam-search decoding with candidate pruning.
//!
//! The decoder keeps a fixed number (beam) of partial hypotheses per time
//! step, reduces the beam as end-of-sequence tokens are selected, and picks
//! the final output by length-normalized log-probability. Four pruning
//! filters cut the candidate list below the beam bound: a relative and an
//! absolute threshold against the best total score, a relative threshold
//! against the best last-word score, and a per-parent candidate cap. An
//! exhaustive-search oracle, fan-out/search-error metrics, deterministic toy
//! scoring models and a benchmark CLI round out the library.

pub mod config;
pub mod corpus;
pub mod decoder;
pub mod error;
pub mod experiment;
pub mod hypothesis;
pub mod metrics;
pub mod model_spec;
pub mod oracle;
pub mod pruning;
pub mod scoring;
pub mod vocab;

pub use config::{
    neutral_prune_config, validate_config, BeamSize, DecodeConfig, MaxCandidates, PruneConfig,
};
pub use decoder::{
    decode, decode_corpus, decode_corpus_timed, decode_unpruned, replay_path_fate, DecodeResult,
    DecodeRun, DecodeTrace, PathFate,
};
pub use error::{Error, Result};
pub use hypothesis::{Candidate, FinalHypothesis, HypId, Hypothesis};
pub use metrics::{compare_runs, corpus_report, sentence_metrics, CorpusReport, SentenceMetrics};
pub use oracle::{exhaustive_best, OracleResult};
pub use pruning::{
    prune_absolute, prune_max_candidates, prune_pipeline, prune_relative, prune_relative_local,
    sort_candidates, DropCounts, FilterKind, PruneOutcome,
};
pub use scoring::{
    model_step, NGramModel, PlantedPathModel, ScorerState, ScoringModel, TableModel, UniformModel,
};
pub use vocab::{TokenId, Vocabulary, EOS_TOKEN};
