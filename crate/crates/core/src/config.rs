//! Decoding and pruning configuration.
//!
//! `DecodeConfig` round-trips through a flat JSON document with field names
//! `rp`, `ap`, `rpl`, `mc`, `beam_size`, `max_len_factor`, `max_len_offset`,
//! `normalize_by_length`, `unbounded_cap`. The unbounded sentinels encode as
//! the JSON strings `"inf"` (ap), `"unlimited"` (mc) and `"unbounded"`
//! (beam_size).

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Unexpected};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ── Beam size ─────────────────────────────────────────────────────────────

/// Number of active hypotheses retained per time step, or unbounded mode
/// where pruning alone limits the active set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BeamSize {
    Bounded(usize),
    Unbounded,
}

impl BeamSize {
    pub fn as_bounded(self) -> Option<usize> {
        match self {
            BeamSize::Bounded(n) => Some(n),
            BeamSize::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, BeamSize::Unbounded)
    }
}

impl fmt::Display for BeamSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeamSize::Bounded(n) => write!(f, "{n}"),
            BeamSize::Unbounded => write!(f, "unbounded"),
        }
    }
}

impl FromStr for BeamSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "unbounded" {
            return Ok(BeamSize::Unbounded);
        }
        s.parse::<usize>().map(BeamSize::Bounded).map_err(|_| {
            Error::InvalidConfig(format!(
                "beam_size: expected integer or \"unbounded\", got {s:?}"
            ))
        })
    }
}

impl Serialize for BeamSize {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BeamSize::Bounded(n) => ser.serialize_u64(*n as u64),
            BeamSize::Unbounded => ser.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for BeamSize {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = BeamSize;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive integer or the string \"unbounded\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BeamSize, E> {
                Ok(BeamSize::Bounded(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BeamSize, E> {
                if v < 0 {
                    return Err(E::invalid_value(Unexpected::Signed(v), &self));
                }
                Ok(BeamSize::Bounded(v as usize))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BeamSize, E> {
                if v == "unbounded" {
                    Ok(BeamSize::Unbounded)
                } else {
                    Err(E::invalid_value(Unexpected::Str(v), &self))
                }
            }
        }
        de.deserialize_any(Visitor)
    }
}

// ── Per-parent candidate limit ────────────────────────────────────────────

/// Cap on surviving candidates sharing the same parent hypothesis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaxCandidates {
    Limited(usize),
    Unlimited,
}

impl MaxCandidates {
    pub fn is_unlimited(self) -> bool {
        matches!(self, MaxCandidates::Unlimited)
    }
}

impl fmt::Display for MaxCandidates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxCandidates::Limited(n) => write!(f, "{n}"),
            MaxCandidates::Unlimited => write!(f, "unlimited"),
        }
    }
}

impl FromStr for MaxCandidates {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "unlimited" {
            return Ok(MaxCandidates::Unlimited);
        }
        s.parse::<usize>().map(MaxCandidates::Limited).map_err(|_| {
            Error::InvalidConfig(format!("mc: expected integer or \"unlimited\", got {s:?}"))
        })
    }
}

impl Serialize for MaxCandidates {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MaxCandidates::Limited(n) => ser.serialize_u64(*n as u64),
            MaxCandidates::Unlimited => ser.serialize_str("unlimited"),
        }
    }
}

impl<'de> Deserialize<'de> for MaxCandidates {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = MaxCandidates;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive integer or the string \"unlimited\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<MaxCandidates, E> {
                Ok(MaxCandidates::Limited(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<MaxCandidates, E> {
                if v < 0 {
                    return Err(E::invalid_value(Unexpected::Signed(v), &self));
                }
                Ok(MaxCandidates::Limited(v as usize))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<MaxCandidates, E> {
                if v == "unlimited" {
                    Ok(MaxCandidates::Unlimited)
                } else {
                    Err(E::invalid_value(Unexpected::Str(v), &self))
                }
            }
        }
        de.deserialize_any(Visitor)
    }
}

// ── Absolute threshold encoding (+inf <-> "inf") ──────────────────────────

mod serde_ap {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            ser.serialize_str("inf")
        } else {
            ser.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = f64;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
                Ok(v)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
                if v == "inf" {
                    Ok(f64::INFINITY)
                } else {
                    Err(E::invalid_value(Unexpected::Str(v), &self))
                }
            }
        }
        de.deserialize_any(Visitor)
    }
}

// ── Pruning thresholds ────────────────────────────────────────────────────

/// The four pruning thresholds. The neutral configuration
/// `{rp: 0, ap: +inf, rpl: 0, mc: unlimited}` passes every candidate through.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    /// Relative threshold on total score, in `[0, 1)`; 0 disables.
    pub rp: f64,
    /// Absolute margin on total score, in `(0, +inf]`; `+inf` disables.
    #[serde(with = "serde_ap")]
    pub ap: f64,
    /// Relative threshold on the last word score, in `[0, 1)`; 0 disables.
    pub rpl: f64,
    /// Maximum surviving candidates per parent hypothesis.
    pub mc: MaxCandidates,
}

impl PruneConfig {
    /// The configuration under which every filter is the identity.
    pub fn neutral() -> Self {
        Self {
            rp: 0.0,
            ap: f64::INFINITY,
            rpl: 0.0,
            mc: MaxCandidates::Unlimited,
        }
    }

    pub fn is_neutral(&self) -> bool {
        self.rp == 0.0 && self.ap.is_infinite() && self.rpl == 0.0 && self.mc.is_unlimited()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.rp) {
            return Err(Error::InvalidConfig(format!(
                "rp out of range: {} (must be in [0, 1))",
                self.rp
            )));
        }
        if self.ap.is_nan() || self.ap <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "ap out of range: {} (must be in (0, +inf])",
                self.ap
            )));
        }
        if !(0.0..1.0).contains(&self.rpl) {
            return Err(Error::InvalidConfig(format!(
                "rpl out of range: {} (must be in [0, 1))",
                self.rpl
            )));
        }
        if let MaxCandidates::Limited(n) = self.mc {
            if n < 1 {
                return Err(Error::InvalidConfig(
                    "mc out of range: 0 (must be >= 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self::neutral()
    }
}

/// Returns the configuration under which every pruning filter is the identity.
pub fn neutral_prune_config() -> PruneConfig {
    PruneConfig::neutral()
}

// ── Full decode configuration ─────────────────────────────────────────────

/// Beam size, pruning thresholds, length cap and final-pick policy.
///
/// The step cap for a source of length `n` is
/// `floor(max_len_factor * n) + max_len_offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    #[serde(flatten)]
    pub prune: PruneConfig,
    pub beam_size: BeamSize,
    pub max_len_factor: f64,
    pub max_len_offset: usize,
    /// Pick the final hypothesis by score divided by token count (EOS
    /// included) rather than by raw total score.
    pub normalize_by_length: bool,
    /// Safety cap on the active candidate list in unbounded mode.
    pub unbounded_cap: usize,
}

impl DecodeConfig {
    /// Parse and validate the flat JSON document form.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let cfg: DecodeConfig = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// A configuration with the given beam, neutral pruning and defaults
    /// elsewhere (length cap `3n + 10`, length-normalized final pick).
    pub fn with_beam(beam_size: BeamSize) -> Self {
        Self {
            prune: PruneConfig::neutral(),
            beam_size,
            max_len_factor: 3.0,
            max_len_offset: 10,
            normalize_by_length: true,
            unbounded_cap: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.prune.validate()?;
        match self.beam_size {
            BeamSize::Bounded(n) if n < 1 => {
                return Err(Error::InvalidConfig(
                    "beam_size out of range: 0 (must be >= 1)".into(),
                ));
            }
            BeamSize::Unbounded if self.prune.is_neutral() => {
                return Err(Error::InvalidConfig(
                    "beam_size: unbounded beam requires at least one non-neutral pruning threshold"
                        .into(),
                ));
            }
            _ => {}
        }
        if self.max_len_factor.is_nan() || self.max_len_factor < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "max_len_factor out of range: {} (must be >= 0)",
                self.max_len_factor
            )));
        }
        if self.unbounded_cap < 1 {
            return Err(Error::InvalidConfig(
                "unbounded_cap out of range: 0 (must be >= 1)".into(),
            ));
        }
        Ok(())
    }

    /// Maximum number of decode steps for a source of the given length.
    pub fn step_cap(&self, source_len: usize) -> usize {
        (self.max_len_factor * source_len as f64).floor() as usize + self.max_len_offset
    }
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self::with_beam(BeamSize::Bounded(5))
    }
}

/// Accepts iff all range invariants hold; the error names the offending field.
pub fn validate_config(cfg: &DecodeConfig) -> Result<()> {
    cfg.validate()
}
