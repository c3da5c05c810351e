//! Corpus files and deterministic synthesis.
//!
//! A corpus is UTF-8 text with one whitespace-tokenized sentence per line;
//! sentence ids are 0-based line positions (blank lines are skipped). Every
//! randomized artifact derives from a single 64-bit experiment seed through
//! a splitmix-style per-sentence derivation, so growing a corpus never
//! reshuffles earlier sentences.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scoring::ScoringModel;
use crate::vocab::{TokenId, Vocabulary};

// ── Seed derivation ───────────────────────────────────────────────────────

/// The splitmix64 output function (Steele, Lea & Flood's generator): one
/// round of add-gamma plus two xor-shift multiplies.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sentence `index`: the `index`-th splitmix64 output of the
/// experiment seed stream. Independent of corpus size.
pub fn sentence_seed(experiment_seed: u64, index: u64) -> u64 {
    splitmix64(experiment_seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Deterministic, platform-stable RNG for one sentence.
pub fn sentence_rng(experiment_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sentence_seed(experiment_seed, index))
}

// ── Corpus files ──────────────────────────────────────────────────────────

/// Read non-blank lines from a corpus file. Errors if none remain.
pub fn read_corpus_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<String> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect();
    if lines.is_empty() {
        return Err(Error::InvalidExperiment(format!(
            "corpus {} is empty",
            path.display()
        )));
    }
    Ok(lines)
}

/// Map corpus lines to token ids; unknown tokens report the 1-based line.
pub fn tokenize_corpus(vocab: &Vocabulary, lines: &[String]) -> Result<Vec<Vec<TokenId>>> {
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| vocab.parse_line(line, i + 1))
        .collect()
}

/// Write sentences, one per line, space-joined.
pub fn write_corpus(
    path: impl AsRef<Path>,
    vocab: &Vocabulary,
    sentences: &[Vec<TokenId>],
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for sent in sentences {
        out.push_str(&vocab.format_tokens(sent));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

// ── Synthesis ─────────────────────────────────────────────────────────────

/// Ancestral sampling: draw tokens from the model's step distributions until
/// EOS (not emitted) or `max_len` tokens. Empty draws (EOS first) retry, so
/// the result is always a non-empty content sequence.
pub fn sample_sentence(
    model: &dyn ScoringModel,
    rng: &mut impl Rng,
    max_len: usize,
) -> Result<Vec<TokenId>> {
    let eos = model.vocab().eos_id();
    loop {
        let mut tokens: Vec<TokenId> = Vec::new();
        let mut state = model.init(&[])?;
        let mut last = None;
        while tokens.len() < max_len {
            let (dist, next_state) = model.step(&state, last)?;
            let tok = draw(&dist, rng);
            if tok == eos {
                break;
            }
            tokens.push(tok);
            state = next_state;
            last = Some(tok);
        }
        if !tokens.is_empty() {
            return Ok(tokens);
        }
    }
}

/// Uniform random content sequence with length drawn from `[min_len, max_len]`.
pub fn sample_uniform_content(
    vocab: &Vocabulary,
    rng: &mut impl Rng,
    min_len: usize,
    max_len: usize,
) -> Vec<TokenId> {
    let content: Vec<TokenId> = vocab.content_ids().collect();
    let len = rng.gen_range(min_len..=max_len);
    (0..len)
        .map(|_| content[rng.gen_range(0..content.len())])
        .collect()
}

/// Inverse-CDF draw from a log-probability vector.
fn draw(dist: &[f64], rng: &mut impl Rng) -> TokenId {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &lp) in dist.iter().enumerate() {
        acc += lp.exp();
        if u < acc {
            return i as TokenId;
        }
    }
    (dist.len() - 1) as TokenId
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::UniformModel;

    #[test]
    fn sentence_seeds_are_stable_and_prefix_independent() {
        let short: Vec<u64> = (0..5).map(|i| sentence_seed(42, i)).collect();
        let long: Vec<u64> = (0..50).map(|i| sentence_seed(42, i)).collect();
        assert_eq!(short, long[..5]);
        assert_ne!(sentence_seed(42, 0), sentence_seed(43, 0));
        // frozen value guards the derivation against accidental change
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn corpus_round_trip_and_blank_handling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.txt");
        let vocab = Vocabulary::synthetic(4);
        let sentences = vec![vec![0, 1], vec![3, 3, 2]];
        write_corpus(&path, &vocab, &sentences).unwrap();
        let lines = read_corpus_lines(&path).unwrap();
        assert_eq!(tokenize_corpus(&vocab, &lines).unwrap(), sentences);

        std::fs::write(&path, "\n\n").unwrap();
        assert!(read_corpus_lines(&path).is_err());
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let model = UniformModel::new(Vocabulary::synthetic(6));
        let a = sample_sentence(&model, &mut sentence_rng(7, 0), 20).unwrap();
        let b = sample_sentence(&model, &mut sentence_rng(7, 0), 20).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
        assert!(a.len() <= 20);
        assert!(a.iter().all(|&t| t != 6));
    }

    #[test]
    fn uniform_content_respects_length_bounds() {
        let vocab = Vocabulary::synthetic(10);
        let mut rng = sentence_rng(1, 3);
        for _ in 0..50 {
            let s = sample_uniform_content(&vocab, &mut rng, 4, 9);
            assert!((4..=9).contains(&s.len()));
            assert!(s.iter().all(|&t| vocab.is_content(t)));
        }
    }
}
