//! Experiment execution: corpus ingestion, per-config decode runs, threshold
//! sweeps, and report emission.
//!
//! An experiment is a JSON document (all fields overridable from CLI flags):
//!
//! ```json
//! {
//!   "model": "planted:v=30,d=2",
//!   "corpus": "corpus.txt",
//!   "out": "results",
//!   "seed": 7,
//!   "jobs": 4,
//!   "configs": [ { "rp": 0.0, "ap": "inf", ... }, ... ]
//! }
//! ```
//!
//! The first config is the baseline; when more than one config runs, the
//! baseline must use neutral pruning so that changed-sentence counts measure
//! search errors. Outputs: `config_XX/report.csv`, `config_XX/summary.json`,
//! `table.txt` (one aligned row per config), `sweep.csv` for sweeps. Partial
//! outputs are removed on failure.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{BeamSize, DecodeConfig, MaxCandidates};
use crate::corpus::{read_corpus_lines, tokenize_corpus, write_corpus};
use crate::decoder::{decode_corpus_timed, DecodeRun};
use crate::error::{Error, Result};
use crate::metrics::{compare_runs, corpus_report, CorpusReport};
use crate::model_spec::ModelSpec;
use crate::scoring::ScoringModel;

// ── Experiment definition ─────────────────────────────────────────────────

fn default_jobs() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Model specifier string (see `model_spec`).
    pub model: String,
    /// Corpus file: one whitespace-tokenized sentence per line.
    pub corpus: PathBuf,
    /// Configurations to run; the first is the baseline.
    pub configs: Vec<DecodeConfig>,
    /// Output directory.
    pub out: PathBuf,
    /// Experiment seed (drives corpus generation; decoding is deterministic).
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for sentence-parallel decoding.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

impl ExperimentSpec {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn validate(&self) -> Result<()> {
        if self.configs.is_empty() {
            return Err(Error::InvalidExperiment("no configs to run".into()));
        }
        for cfg in &self.configs {
            cfg.validate()?;
        }
        if self.configs.len() > 1 && !self.configs[0].prune.is_neutral() {
            return Err(Error::InvalidExperiment(
                "search-error comparison requires a neutral-pruning baseline as the first config"
                    .into(),
            ));
        }
        if self.jobs < 1 {
            return Err(Error::InvalidExperiment("jobs must be >= 1".into()));
        }
        Ok(())
    }
}

/// Human-readable row label in the style of the results tables.
pub fn config_label(cfg: &DecodeConfig) -> String {
    if cfg.prune.is_neutral() {
        return "no pruning".to_string();
    }
    let mut parts = Vec::new();
    if cfg.prune.rp > 0.0 {
        parts.push(format!("rp={}", cfg.prune.rp));
    }
    if cfg.prune.ap.is_finite() {
        parts.push(format!("ap={}", cfg.prune.ap));
    }
    if cfg.prune.rpl > 0.0 {
        parts.push(format!("rpl={}", cfg.prune.rpl));
    }
    if let MaxCandidates::Limited(n) = cfg.prune.mc {
        parts.push(format!("mc={n}"));
    }
    parts.join(",")
}

// ── Output directory bookkeeping ──────────────────────────────────────────

struct OutDir {
    root: PathBuf,
    created_root: bool,
    written: Vec<PathBuf>,
}

impl OutDir {
    fn prepare(root: &Path) -> Result<Self> {
        let created_root = !root.exists();
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            created_root,
            written: Vec::new(),
        })
    }

    fn write(&mut self, rel: impl AsRef<Path>, contents: &str) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Remove everything this run wrote (and the root, if this run made it).
    fn discard(self) {
        if self.created_root {
            let _ = std::fs::remove_dir_all(&self.root);
            return;
        }
        for path in &self.written {
            let _ = std::fs::remove_file(path);
            if let Some(parent) = path.parent() {
                let _ = std::fs::remove_dir(parent); // only removes empty dirs
            }
        }
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidExperiment(format!("thread pool: {e}")))
}

// ── decode command ────────────────────────────────────────────────────────

pub struct ConfigRunOutput {
    pub label: String,
    pub config: DecodeConfig,
    pub report: CorpusReport,
}

pub struct DecodeOutputs {
    pub configs: Vec<ConfigRunOutput>,
    pub table_path: PathBuf,
    pub table: String,
}

/// Run every config over the corpus, write per-config reports and the
/// combined table. The first config is the baseline for speedup and
/// changed-sentence measurement.
pub fn run_decode(spec: &ExperimentSpec) -> Result<DecodeOutputs> {
    spec.validate()?;
    let mut out = OutDir::prepare(&spec.out)?;
    match run_decode_inner(spec, &mut out) {
        Ok(v) => Ok(v),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn run_decode_inner(spec: &ExperimentSpec, out: &mut OutDir) -> Result<DecodeOutputs> {
    let lines = read_corpus_lines(&spec.corpus)?;
    let model = ModelSpec::parse(&spec.model)?.build_with_corpus(Some(&lines))?;
    let sources = tokenize_corpus(model.vocab(), &lines)?;
    let pool = thread_pool(spec.jobs)?;

    let mut all_runs: Vec<Vec<DecodeRun>> = Vec::with_capacity(spec.configs.len());
    for cfg in &spec.configs {
        let runs = pool.install(|| decode_corpus_timed(&sources, model.as_ref(), cfg))?;
        all_runs.push(runs);
    }

    let mut outputs = Vec::with_capacity(spec.configs.len());
    for (i, cfg) in spec.configs.iter().enumerate() {
        let report = if spec.configs.len() > 1 {
            compare_runs(&all_runs[0], &all_runs[i])?
        } else {
            corpus_report(&all_runs[0])?
        };
        let dir = format!("config_{i:02}");
        out.write(format!("{dir}/report.csv"), &report.to_csv())?;
        out.write(format!("{dir}/summary.json"), &report.summary_json())?;
        outputs.push(ConfigRunOutput {
            label: config_label(cfg),
            config: *cfg,
            report,
        });
    }

    let table = render_table(&outputs);
    let table_path = out.write("table.txt", &table)?;
    Ok(DecodeOutputs {
        configs: outputs,
        table_path,
        table,
    })
}

/// Aligned plain-text table: one row per config with speedup, fan-out and
/// changed-sentence columns.
fn render_table(outputs: &[ConfigRunOutput]) -> String {
    let header = [
        "pruning",
        "beam",
        "speed up",
        "avg fan out",
        "tot fan out",
        "changed",
    ];
    let mut rows: Vec<[String; 6]> = Vec::with_capacity(outputs.len());
    for (i, o) in outputs.iter().enumerate() {
        let beam = match o.config.beam_size {
            BeamSize::Bounded(n) => n.to_string(),
            BeamSize::Unbounded => "-".to_string(),
        };
        let speedup = match o.report.speedup_vs_baseline {
            Some(s) if i > 0 => format!("{:.1}%", s * 100.0),
            _ => "-".to_string(),
        };
        rows.push([
            o.label.clone(),
            beam,
            speedup,
            format!("{:.2}", o.report.mean_avg_fan_out),
            format!("{:.1}", o.report.mean_tot_fan_out),
            format!("{:.2}%", o.report.changed_fraction * 100.0),
        ]);
    }
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut text = String::new();
    let render_row = |cells: &[String]| -> String {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<width$}", width = widths[i])
                } else {
                    format!("{c:>width$}", width = widths[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let header_cells: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    text.push_str(render_row(&header_cells).trim_end());
    text.push('\n');
    for row in &rows {
        text.push_str(render_row(row.as_slice()).trim_end());
        text.push('\n');
    }
    text
}

// ── sweep command ─────────────────────────────────────────────────────────

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Rp,
    Ap,
    Rpl,
    Mc,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rp" => Ok(SweepParam::Rp),
            "ap" => Ok(SweepParam::Ap),
            "rpl" => Ok(SweepParam::Rpl),
            "mc" => Ok(SweepParam::Mc),
            _ => Err(Error::InvalidExperiment(format!(
                "unknown sweep parameter {s:?} (expected rp|ap|rpl|mc)"
            ))),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParam::Rp => write!(f, "rp"),
            SweepParam::Ap => write!(f, "ap"),
            SweepParam::Rpl => write!(f, "rpl"),
            SweepParam::Mc => write!(f, "mc"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepValue {
    Float(f64),
    Mc(MaxCandidates),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Float(v) => write!(f, "{v}"),
            SweepValue::Mc(m) => write!(f, "{m}"),
        }
    }
}

impl SweepValue {
    fn order_key(&self) -> f64 {
        match self {
            SweepValue::Float(v) => *v,
            SweepValue::Mc(MaxCandidates::Limited(n)) => *n as f64,
            SweepValue::Mc(MaxCandidates::Unlimited) => f64::INFINITY,
        }
    }
}

fn parse_sweep_value(param: SweepParam, raw: &str) -> Result<SweepValue> {
    match param {
        SweepParam::Rp | SweepParam::Rpl => raw
            .parse::<f64>()
            .map(SweepValue::Float)
            .map_err(|_| Error::InvalidExperiment(format!("{param}: bad value {raw:?}"))),
        SweepParam::Ap => {
            if raw == "inf" {
                Ok(SweepValue::Float(f64::INFINITY))
            } else {
                raw.parse::<f64>()
                    .map(SweepValue::Float)
                    .map_err(|_| Error::InvalidExperiment(format!("ap: bad value {raw:?}")))
            }
        }
        SweepParam::Mc => MaxCandidates::from_str(raw).map(SweepValue::Mc),
    }
}

fn apply_sweep_value(
    template: &DecodeConfig,
    param: SweepParam,
    value: SweepValue,
) -> DecodeConfig {
    let mut cfg = *template;
    match (param, value) {
        (SweepParam::Rp, SweepValue::Float(v)) => cfg.prune.rp = v,
        (SweepParam::Ap, SweepValue::Float(v)) => cfg.prune.ap = v,
        (SweepParam::Rpl, SweepValue::Float(v)) => cfg.prune.rpl = v,
        (SweepParam::Mc, SweepValue::Mc(m)) => cfg.prune.mc = m,
        _ => unreachable!("value parsed for a different parameter"),
    }
    cfg
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub value: SweepValue,
    pub changed_fraction: f64,
    pub mean_avg_fan_out: f64,
    pub mean_tot_fan_out: f64,
    pub speedup: Option<f64>,
    pub selected: bool,
}

pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Largest swept value whose run changed no sentences.
    pub selected: Option<SweepValue>,
    pub csv_path: PathBuf,
}

/// Sweep one threshold over `values`, holding everything else at the
/// baseline (the first config, which must be neutral). Emits `sweep.csv`
/// with one row per value and marks the largest value that changed nothing.
pub fn run_sweep(
    spec: &ExperimentSpec,
    param: SweepParam,
    values: &[String],
) -> Result<SweepOutcome> {
    spec.validate()?;
    let template = spec.configs[0];
    if !template.prune.is_neutral() {
        return Err(Error::InvalidExperiment(
            "sweep baseline (first config) must use neutral pruning".into(),
        ));
    }
    if values.is_empty() {
        return Err(Error::InvalidExperiment(
            "sweep needs at least one value".into(),
        ));
    }
    let parsed: Vec<SweepValue> = values
        .iter()
        .map(|raw| {
            let v = parse_sweep_value(param, raw)?;
            apply_sweep_value(&template, param, v).validate()?;
            Ok(v)
        })
        .collect::<Result<_>>()?;

    let mut out = OutDir::prepare(&spec.out)?;
    match run_sweep_inner(spec, param, &parsed, &mut out) {
        Ok(v) => Ok(v),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn run_sweep_inner(
    spec: &ExperimentSpec,
    param: SweepParam,
    values: &[SweepValue],
    out: &mut OutDir,
) -> Result<SweepOutcome> {
    let template = spec.configs[0];
    let lines = read_corpus_lines(&spec.corpus)?;
    let model = ModelSpec::parse(&spec.model)?.build_with_corpus(Some(&lines))?;
    let sources = tokenize_corpus(model.vocab(), &lines)?;
    let pool = thread_pool(spec.jobs)?;

    let baseline = pool.install(|| decode_corpus_timed(&sources, model.as_ref(), &template))?;

    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let cfg = apply_sweep_value(&template, param, value);
        let runs = pool.install(|| decode_corpus_timed(&sources, model.as_ref(), &cfg))?;
        let report = compare_runs(&baseline, &runs)?;
        rows.push(SweepRow {
            value,
            changed_fraction: report.changed_fraction,
            mean_avg_fan_out: report.mean_avg_fan_out,
            mean_tot_fan_out: report.mean_tot_fan_out,
            speedup: report.speedup_vs_baseline,
            selected: false,
        });
    }

    let selected = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.changed_fraction == 0.0)
        .max_by(|(_, a), (_, b)| a.value.order_key().total_cmp(&b.value.order_key()))
        .map(|(i, _)| i);
    if let Some(i) = selected {
        rows[i].selected = true;
    }

    let mut csv = String::from("value,changed_fraction,avg_fan_out,speedup,selected\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.value,
            row.changed_fraction,
            row.mean_avg_fan_out,
            row.speedup.unwrap_or(f64::NAN),
            u8::from(row.selected),
        ));
    }
    let csv_path = out.write("sweep.csv", &csv)?;

    Ok(SweepOutcome {
        selected: selected.map(|i| rows[i].value),
        rows,
        csv_path,
    })
}

// ── gen-corpus command ────────────────────────────────────────────────────

/// Generate a seed-deterministic synthetic corpus for a model spec. Planted
/// models also write `<out>.targets` with each sentence's planted target.
pub fn run_gen_corpus(model_spec: &str, n: usize, seed: u64, out_path: &Path) -> Result<()> {
    let spec = ModelSpec::parse(model_spec)?;
    let model = spec.build()?;
    let generated = spec.generate_corpus(model.as_ref(), n, seed)?;
    write_corpus(out_path, model.vocab(), &generated.sources)?;
    if let Some(targets) = &generated.targets {
        let mut target_path = out_path.as_os_str().to_owned();
        target_path.push(".targets");
        write_corpus(PathBuf::from(target_path), model.vocab(), targets)?;
    }
    Ok(())
}

/// Convenience wrapper used by tests: decode a corpus file against a model
/// built elsewhere, inside a fixed-size thread pool.
pub fn decode_file_with_pool(
    model: &dyn ScoringModel,
    corpus: &Path,
    cfg: &DecodeConfig,
    jobs: usize,
) -> Result<Vec<DecodeRun>> {
    let lines = read_corpus_lines(corpus)?;
    let sources = tokenize_corpus(model.vocab(), &lines)?;
    let pool = thread_pool(jobs)?;
    pool.install(|| decode_corpus_timed(&sources, model, cfg))
}
