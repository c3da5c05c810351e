//! Fan-out, speedup and search-error measurement over decode runs.
//!
//! Search errors are counted as output changes: a sentence whose best token
//! sequence differs from the baseline run's. Wall time covers the `decode`
//! calls only; speedup is `baseline_time / this_time - 1`.

use serde::Serialize;

use crate::decoder::{DecodeRun, DecodeTrace};
use crate::error::{Error, Result};

/// Per-sentence aggregates of one decode trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SentenceMetrics {
    pub avg_fan_out: f64,
    pub tot_fan_out: u64,
    pub steps: usize,
    pub wall_time_s: f64,
}

/// Means and sums over the fan-out trace; errors on an empty trace.
pub fn sentence_metrics(trace: &DecodeTrace, wall_time_s: f64) -> Result<SentenceMetrics> {
    if trace.fan_out_per_step.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(SentenceMetrics {
        avg_fan_out: trace.avg_fan_out(),
        tot_fan_out: trace.tot_fan_out(),
        steps: trace.fan_out_per_step.len(),
        wall_time_s,
    })
}

/// One row of the per-sentence report.
#[derive(Clone, Debug, Serialize)]
pub struct SentenceReport {
    pub sentence_id: usize,
    pub steps: usize,
    pub avg_fan_out: f64,
    pub tot_fan_out: u64,
    pub wall_time_s: f64,
    /// Whether the best token sequence differs from the baseline run's.
    pub changed: bool,
}

/// Corpus-level report for one run, optionally measured against a baseline.
#[derive(Clone, Debug)]
pub struct CorpusReport {
    pub sentences: Vec<SentenceReport>,
    pub mean_avg_fan_out: f64,
    pub mean_tot_fan_out: f64,
    pub total_wall_time_s: f64,
    /// `baseline_time / this_time - 1`; only present with a baseline attached.
    pub speedup_vs_baseline: Option<f64>,
    pub changed_count: usize,
    pub changed_fraction: f64,
}

#[derive(Serialize)]
struct Summary {
    sentences: usize,
    mean_avg_fan_out: f64,
    mean_tot_fan_out: f64,
    total_wall_time_s: f64,
    speedup_vs_baseline: Option<f64>,
    changed_count: usize,
    changed_fraction: f64,
}

impl CorpusReport {
    /// CSV with header `sentence_id,steps,avg_fan_out,tot_fan_out,wall_time_s,changed`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("sentence_id,steps,avg_fan_out,tot_fan_out,wall_time_s,changed\n");
        for s in &self.sentences {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.sentence_id,
                s.steps,
                s.avg_fan_out,
                s.tot_fan_out,
                s.wall_time_s,
                u8::from(s.changed),
            ));
        }
        out
    }

    /// JSON summary document with corpus means, speedup and changed fraction.
    pub fn summary_json(&self) -> String {
        let summary = Summary {
            sentences: self.sentences.len(),
            mean_avg_fan_out: self.mean_avg_fan_out,
            mean_tot_fan_out: self.mean_tot_fan_out,
            total_wall_time_s: self.total_wall_time_s,
            speedup_vs_baseline: self.speedup_vs_baseline,
            changed_count: self.changed_count,
            changed_fraction: self.changed_fraction,
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }
}

fn build_report(
    runs: &[DecodeRun],
    changed: Vec<bool>,
    baseline_time: Option<f64>,
) -> Result<CorpusReport> {
    let mut sentences = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        let m = sentence_metrics(&run.result.trace, run.wall_time_s)?;
        sentences.push(SentenceReport {
            sentence_id: i,
            steps: m.steps,
            avg_fan_out: m.avg_fan_out,
            tot_fan_out: m.tot_fan_out,
            wall_time_s: m.wall_time_s,
            changed: changed[i],
        });
    }
    let n = sentences.len();
    let total_wall_time_s: f64 = sentences.iter().map(|s| s.wall_time_s).sum();
    let (mean_avg, mean_tot) = if n == 0 {
        (0.0, 0.0)
    } else {
        (
            sentences.iter().map(|s| s.avg_fan_out).sum::<f64>() / n as f64,
            sentences.iter().map(|s| s.tot_fan_out as f64).sum::<f64>() / n as f64,
        )
    };
    let changed_count = sentences.iter().filter(|s| s.changed).count();
    let changed_fraction = if n == 0 {
        0.0
    } else {
        changed_count as f64 / n as f64
    };
    let speedup_vs_baseline = baseline_time
        .and_then(|base| (total_wall_time_s > 0.0).then(|| base / total_wall_time_s - 1.0));
    Ok(CorpusReport {
        sentences,
        mean_avg_fan_out: mean_avg,
        mean_tot_fan_out: mean_tot,
        total_wall_time_s,
        speedup_vs_baseline,
        changed_count,
        changed_fraction,
    })
}

/// Report for a run with no baseline attached: speedup absent, nothing changed.
pub fn corpus_report(runs: &[DecodeRun]) -> Result<CorpusReport> {
    build_report(runs, vec![false; runs.len()], None)
}

/// Report for `pruned` measured against `baseline`: counts sentences whose
/// best token sequence differs and derives speedup from summed wall times.
/// The lists must cover the same sources in the same order.
pub fn compare_runs(baseline: &[DecodeRun], pruned: &[DecodeRun]) -> Result<CorpusReport> {
    if baseline.len() != pruned.len() {
        return Err(Error::RunLengthMismatch {
            baseline: baseline.len(),
            other: pruned.len(),
        });
    }
    let changed: Vec<bool> = baseline
        .iter()
        .zip(pruned.iter())
        .map(|(b, p)| b.result.best.tokens != p.result.best.tokens)
        .collect();
    let baseline_time: f64 = baseline.iter().map(|r| r.wall_time_s).sum();
    build_report(pruned, changed, Some(baseline_time))
}
