//! Token vocabulary: a bijection between token strings and dense indices,
//! with a designated end-of-sequence token.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Dense token index. The begin-of-sequence padding marker used by context
/// models lives at `vocab.size()`, outside the valid token range, and is
/// never emitted.
pub type TokenId = u32;

/// End-of-sequence token string used by synthetic vocabularies and corpus files.
pub const EOS_TOKEN: &str = "</s>";

#[derive(Clone, Debug)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    eos_id: TokenId,
}

impl Vocabulary {
    /// Build a vocabulary from distinct token strings and the index of EOS.
    pub fn new(tokens: Vec<String>, eos_id: TokenId) -> Result<Self> {
        if tokens.len() < 2 {
            return Err(Error::InvalidVocabulary(format!(
                "need at least 2 tokens (one content token plus EOS), got {}",
                tokens.len()
            )));
        }
        if (eos_id as usize) >= tokens.len() {
            return Err(Error::InvalidVocabulary(format!(
                "eos_id {} out of range for {} tokens",
                eos_id,
                tokens.len()
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                return Err(Error::InvalidVocabulary(format!(
                    "token {i} is empty or contains whitespace"
                )));
            }
            if index.insert(tok.clone(), i as TokenId).is_some() {
                return Err(Error::InvalidVocabulary(format!("duplicate token {tok:?}")));
            }
        }
        Ok(Self {
            tokens,
            index,
            eos_id,
        })
    }

    /// Build from token strings where EOS is identified by its string form.
    pub fn with_eos(tokens: Vec<String>, eos_token: &str) -> Result<Self> {
        let eos_id = tokens.iter().position(|t| t == eos_token).ok_or_else(|| {
            Error::InvalidVocabulary(format!("EOS token {eos_token:?} not in token list"))
        })? as TokenId;
        Self::new(tokens, eos_id)
    }

    /// Synthetic vocabulary `t0..t{n-1}` plus `</s>` at the last index.
    pub fn synthetic(n_content: usize) -> Self {
        let mut tokens: Vec<String> = (0..n_content).map(|i| format!("t{i}")).collect();
        tokens.push(EOS_TOKEN.to_string());
        Self::new(tokens, n_content as TokenId).expect("synthetic vocabulary is valid")
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn eos_id(&self) -> TokenId {
        self.eos_id
    }

    /// Reserved begin-of-sequence padding marker, outside the token range.
    pub fn begin_marker(&self) -> u32 {
        self.tokens.len() as u32
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id as usize]
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn contains_id(&self, id: TokenId) -> bool {
        (id as usize) < self.tokens.len()
    }

    pub fn is_content(&self, id: TokenId) -> bool {
        self.contains_id(id) && id != self.eos_id
    }

    /// Content token ids in ascending order.
    pub fn content_ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        (0..self.tokens.len() as TokenId).filter(move |&id| id != self.eos_id)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Tokenize one whitespace-separated line. `line_no` is 1-based and only
    /// used for error reporting.
    pub fn parse_line(&self, line: &str, line_no: usize) -> Result<Vec<TokenId>> {
        line.split_whitespace()
            .map(|tok| {
                self.id(tok).ok_or_else(|| Error::UnknownToken {
                    token: tok.to_string(),
                    line: line_no,
                })
            })
            .collect()
    }

    /// Space-join a token id sequence back into a line.
    pub fn format_tokens(&self, ids: &[TokenId]) -> String {
        ids.iter()
            .map(|&id| self.token(id))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Lexicographic order on token sequences, comparing token *strings*
    /// element-wise; a strict prefix sorts before its extensions. Used as the
    /// deterministic tie-break when final scores are exactly equal.
    pub fn cmp_lex(&self, a: &[TokenId], b: &[TokenId]) -> Ordering {
        for (x, y) in a.iter().zip(b.iter()) {
            match self.token(*x).cmp(self.token(*y)) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        a.len().cmp(&b.len())
    }
}
