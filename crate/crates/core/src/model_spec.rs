//! Model specifier strings for the CLI and experiment files.
//!
//! Grammar (`key=value` parameters, comma-separated, all optional unless
//! noted):
//!
//! - `uniform[:v=20]` — uniform model over a synthetic vocabulary.
//! - `ngram:train=PATH[,n=2,k=1.0,vocab=PATH]` — add-k n-gram trained from a
//!   corpus file. Without `vocab=`, the vocabulary is the training corpus'
//!   tokens in first-appearance order plus `</s>` if absent.
//! - `planted[:v=30,phi=0.3,pdecoy=0.42,pexit=0.12,d=2,lmin=4,lmax=9]` —
//!   echo planted-path model over a synthetic vocabulary; each source
//!   sentence is its own planted target.
//! - `table:file=PATH,vocab=PATH` — table fixture (JSON map of space-joined
//!   prefixes to probability arrays) plus a vocabulary file. A bare path to
//!   an existing file is shorthand with `PATH.vocab` as the vocabulary.
//!
//! Vocabulary files list one token per line and must contain `</s>`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::corpus::{sample_sentence, sample_uniform_content, sentence_rng};
use crate::error::{Error, Result};
use crate::scoring::{NGramModel, PlantedPathModel, ScoringModel, TableModel, UniformModel};
use crate::vocab::{TokenId, Vocabulary, EOS_TOKEN};

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Uniform {
        vocab_size: usize,
    },
    NGram {
        order: usize,
        k: f64,
        /// Training corpus; without it the model trains on the corpus being
        /// decoded (the experiment runner supplies it).
        train: Option<PathBuf>,
        vocab: Option<PathBuf>,
    },
    Planted {
        vocab_size: usize,
        p_hi: f64,
        p_decoy: f64,
        p_exit: f64,
        depth: usize,
        len_min: usize,
        len_max: usize,
    },
    Table {
        file: PathBuf,
        vocab: PathBuf,
    },
}

/// A generated corpus: source sentences plus, for planted models, the
/// planted target of each source (the source echoed, EOS-terminated).
pub struct GeneratedCorpus {
    pub sources: Vec<Vec<TokenId>>,
    pub targets: Option<Vec<Vec<TokenId>>>,
}

fn parse_params(s: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    if s.is_empty() {
        return Ok(map);
    }
    for pair in s.split(',') {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::InvalidModel(format!("expected key=value, got {pair:?}")))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

struct Params {
    kind: &'static str,
    map: HashMap<String, String>,
}

impl Params {
    fn get<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                Error::InvalidModel(format!("{}: cannot parse {key}={raw:?}", self.kind))
            }),
        }
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.map
            .remove(key)
            .ok_or_else(|| Error::InvalidModel(format!("{}: missing required {key}=", self.kind)))
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.map.keys().next() {
            return Err(Error::InvalidModel(format!(
                "{}: unknown parameter {key:?}",
                self.kind
            )));
        }
        Ok(())
    }
}

impl ModelSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k, r),
            None => (s, ""),
        };
        match kind {
            "uniform" => {
                let mut p = Params { kind: "uniform", map: parse_params(rest)? };
                let vocab_size = p.get("v", 20usize)?;
                p.finish()?;
                Ok(ModelSpec::Uniform { vocab_size })
            }
            "ngram" => {
                let mut p = Params { kind: "ngram", map: parse_params(rest)? };
                let order = p.get("n", 2usize)?;
                let k = p.get("k", 1.0f64)?;
                let train = p.map.remove("train").map(PathBuf::from);
                let vocab = p.map.remove("vocab").map(PathBuf::from);
                p.finish()?;
                Ok(ModelSpec::NGram { order, k, train, vocab })
            }
            "planted" => {
                let mut p = Params { kind: "planted", map: parse_params(rest)? };
                let spec = ModelSpec::Planted {
                    vocab_size: p.get("v", 30usize)?,
                    p_hi: p.get("phi", 0.3f64)?,
                    p_decoy: p.get("pdecoy", 0.42f64)?,
                    p_exit: p.get("pexit", 0.12f64)?,
                    depth: p.get("d", 2usize)?,
                    len_min: p.get("lmin", 4usize)?,
                    len_max: p.get("lmax", 9usize)?,
                };
                p.finish()?;
                if let ModelSpec::Planted { len_min, len_max, .. } = &spec {
                    if *len_min < 1 || len_min > len_max {
                        return Err(Error::InvalidModel(format!(
                            "planted: bad length range lmin={len_min}, lmax={len_max}"
                        )));
                    }
                }
                Ok(spec)
            }
            "table" => {
                let mut p = Params { kind: "table", map: parse_params(rest)? };
                let file = PathBuf::from(p.require("file")?);
                let vocab = PathBuf::from(p.require("vocab")?);
                p.finish()?;
                Ok(ModelSpec::Table { file, vocab })
            }
            _ if Path::new(s).is_file() => Ok(ModelSpec::Table {
                file: PathBuf::from(s),
                vocab: PathBuf::from(format!("{s}.vocab")),
            }),
            _ => Err(Error::InvalidModel(format!(
                "unknown model spec {s:?} (expected uniform|ngram:...|planted:...|table:... or a fixture path)"
            ))),
        }
    }

    pub fn build(&self) -> Result<Box<dyn ScoringModel>> {
        self.build_with_corpus(None)
    }

    /// Build the model; `decode_corpus_lines` backs an n-gram spec without a
    /// `train=` path, in which case the scorer trains on the corpus it will
    /// decode. EOS is appended to each training sentence that lacks it.
    pub fn build_with_corpus(
        &self,
        decode_corpus_lines: Option<&[String]>,
    ) -> Result<Box<dyn ScoringModel>> {
        match self {
            ModelSpec::Uniform { vocab_size } => {
                let vocab = synthetic_vocab(*vocab_size)?;
                Ok(Box::new(UniformModel::new(vocab)))
            }
            ModelSpec::NGram {
                order,
                k,
                train,
                vocab,
            } => {
                let lines: Vec<String> = match (train, decode_corpus_lines) {
                    (Some(path), _) => crate::corpus::read_corpus_lines(path)?,
                    (None, Some(lines)) => lines
                        .iter()
                        .map(|l| {
                            if l.split_whitespace().last() == Some(EOS_TOKEN) {
                                l.clone()
                            } else {
                                format!("{l} {EOS_TOKEN}")
                            }
                        })
                        .collect(),
                    (None, None) => {
                        return Err(Error::InvalidModel(
                            "ngram: no train= corpus and no decode corpus to train on".into(),
                        ));
                    }
                };
                let vocab = match vocab {
                    Some(path) => load_vocab_file(path)?,
                    None => vocab_from_lines(&lines)?,
                };
                let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
                Ok(Box::new(NGramModel::train_from_lines(
                    vocab, refs, *order, *k,
                )?))
            }
            ModelSpec::Planted {
                vocab_size,
                p_hi,
                p_decoy,
                p_exit,
                depth,
                ..
            } => {
                let vocab = synthetic_vocab(*vocab_size)?;
                Ok(Box::new(PlantedPathModel::echo(
                    vocab, *depth, *p_hi, *p_decoy, *p_exit,
                )?))
            }
            ModelSpec::Table { file, vocab } => {
                let vocab = load_vocab_file(vocab)?;
                let json = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
                Ok(Box::new(TableModel::from_json_str(vocab, &json)?))
            }
        }
    }

    /// Seed-deterministic source sentences for this model. Planted models
    /// sample uniform content sequences (each its own planted target);
    /// everything else samples ancestrally from the model itself.
    pub fn generate_corpus(
        &self,
        model: &dyn ScoringModel,
        n: usize,
        seed: u64,
    ) -> Result<GeneratedCorpus> {
        if n < 1 {
            return Err(Error::InvalidExperiment(
                "corpus generation needs n >= 1".into(),
            ));
        }
        match self {
            ModelSpec::Planted {
                len_min, len_max, ..
            } => {
                let vocab = model.vocab();
                let eos = vocab.eos_id();
                let mut sources = Vec::with_capacity(n);
                let mut targets = Vec::with_capacity(n);
                for i in 0..n {
                    let mut rng = sentence_rng(seed, i as u64);
                    let src = sample_uniform_content(vocab, &mut rng, *len_min, *len_max);
                    let mut tgt = src.clone();
                    tgt.push(eos);
                    sources.push(src);
                    targets.push(tgt);
                }
                Ok(GeneratedCorpus {
                    sources,
                    targets: Some(targets),
                })
            }
            _ => {
                let mut sources = Vec::with_capacity(n);
                for i in 0..n {
                    let mut rng = sentence_rng(seed, i as u64);
                    sources.push(sample_sentence(model, &mut rng, 30)?);
                }
                Ok(GeneratedCorpus {
                    sources,
                    targets: None,
                })
            }
        }
    }
}

fn synthetic_vocab(size: usize) -> Result<Vocabulary> {
    if size < 2 {
        return Err(Error::InvalidModel(format!(
            "synthetic vocabulary size must be >= 2, got {size}"
        )));
    }
    Ok(Vocabulary::synthetic(size - 1))
}

/// One token per line; must contain `</s>`.
pub fn load_vocab_file(path: impl AsRef<Path>) -> Result<Vocabulary> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let tokens: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    Vocabulary::with_eos(tokens, EOS_TOKEN)
}

/// Vocabulary from corpus lines: first-appearance order, `</s>` appended if
/// the corpus never uses it.
pub fn vocab_from_lines(lines: &[String]) -> Result<Vocabulary> {
    let mut tokens: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for line in lines {
        for tok in line.split_whitespace() {
            if seen.insert(tok.to_string()) {
                tokens.push(tok.to_string());
            }
        }
    }
    if !seen.contains(EOS_TOKEN) {
        tokens.push(EOS_TOKEN.to_string());
    }
    Vocabulary::with_eos(tokens, EOS_TOKEN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        assert_eq!(
            ModelSpec::parse("uniform").unwrap(),
            ModelSpec::Uniform { vocab_size: 20 }
        );
        assert_eq!(
            ModelSpec::parse("uniform:v=7").unwrap(),
            ModelSpec::Uniform { vocab_size: 7 }
        );
        assert_eq!(
            ModelSpec::parse("ngram:train=c.txt,n=3,k=0.5").unwrap(),
            ModelSpec::NGram {
                order: 3,
                k: 0.5,
                train: Some(PathBuf::from("c.txt")),
                vocab: None
            }
        );
        match ModelSpec::parse("planted:v=12,d=1").unwrap() {
            ModelSpec::Planted {
                vocab_size: 12,
                depth: 1,
                ..
            } => {}
            other => panic!("unexpected {other:?}"),
        }
        // train= is optional: the experiment runner can train on the
        // decode corpus
        match ModelSpec::parse("ngram:n=2").unwrap() {
            ModelSpec::NGram {
                train: None,
                order: 2,
                ..
            } => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(ModelSpec::parse("ngram:n=2").unwrap().build().is_err());
        assert!(ModelSpec::parse("uniform:bogus=1").is_err());
        assert!(ModelSpec::parse("nonsense").is_err());
    }

    #[test]
    fn builds_uniform_and_planted() {
        let m = ModelSpec::parse("uniform:v=5").unwrap().build().unwrap();
        assert_eq!(m.vocab().size(), 5);
        let m = ModelSpec::parse("planted:v=10,d=1")
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(m.vocab().size(), 10);
    }

    #[test]
    fn ngram_spec_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let train = dir.path().join("train.txt");
        std::fs::write(&train, "a b </s>\nb a </s>\n").unwrap();
        let spec = ModelSpec::parse(&format!("ngram:train={},n=1,k=1", train.display())).unwrap();
        let model = spec.build().unwrap();
        assert_eq!(model.vocab().size(), 3);
        assert_eq!(model.vocab().id("</s>"), Some(2));
    }

    #[test]
    fn table_fixture_with_vocab_file() {
        let dir = tempfile::tempdir().unwrap();
        let fixture = dir.path().join("t.json");
        let vocab = dir.path().join("t.vocab");
        std::fs::write(&fixture, r#"{"": [0.5, 0.2, 0.3]}"#).unwrap();
        std::fs::write(&vocab, "a\nb\n</s>\n").unwrap();
        let spec = ModelSpec::parse(&format!(
            "table:file={},vocab={}",
            fixture.display(),
            vocab.display()
        ))
        .unwrap();
        let model = spec.build().unwrap();
        assert_eq!(model.vocab().size(), 3);
    }

    #[test]
    fn generated_corpora_are_seed_deterministic() {
        let spec = ModelSpec::parse("planted:v=10,lmin=3,lmax=6").unwrap();
        let model = spec.build().unwrap();
        let a = spec.generate_corpus(model.as_ref(), 5, 99).unwrap();
        let b = spec.generate_corpus(model.as_ref(), 5, 99).unwrap();
        assert_eq!(a.sources, b.sources);
        let c = spec.generate_corpus(model.as_ref(), 8, 99).unwrap();
        assert_eq!(a.sources, c.sources[..5]);
        // planted targets echo the source
        let targets = a.targets.unwrap();
        for (s, t) in a.sources.iter().zip(&targets) {
            assert_eq!(&t[..t.len() - 1], &s[..]);
            assert_eq!(t.last(), Some(&model.vocab().eos_id()));
        }
    }
}
