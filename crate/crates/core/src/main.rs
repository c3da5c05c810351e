use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use beamprune::config::{BeamSize, DecodeConfig, MaxCandidates, PruneConfig};
use beamprune::error::{Error, Result};
use beamprune::experiment::{run_decode, run_gen_corpus, run_sweep, ExperimentSpec, SweepParam};

#[derive(Parser)]
#[command(
    name = "beamprune",
    version,
    about = "Beam-search decoding benchmarks with candidate pruning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode a corpus under one or more configurations and write reports.
    Decode(DecodeArgs),
    /// Sweep one pruning threshold and chart the fan-out/quality trade-off.
    Sweep(SweepArgs),
    /// Generate a seed-deterministic synthetic corpus from a model spec.
    GenCorpus(GenCorpusArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment file (JSON); explicit flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Corpus file: one whitespace-tokenized sentence per line.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Model spec: uniform | ngram:train=F,... | planted:... | table:file=F,vocab=F,
    /// or a path to a table fixture.
    #[arg(long)]
    model: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sentence-parallel decoding.
    #[arg(long)]
    jobs: Option<usize>,
    /// Experiment seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// Beam size: integer or "unbounded".
    #[arg(long)]
    beam: Option<String>,
    /// Relative threshold in [0, 1).
    #[arg(long)]
    rp: Option<f64>,
    /// Absolute margin: positive number or "inf".
    #[arg(long)]
    ap: Option<String>,
    /// Relative local threshold in [0, 1).
    #[arg(long)]
    rpl: Option<f64>,
    /// Max candidates per parent: integer or "unlimited".
    #[arg(long)]
    mc: Option<String>,
}

impl ConfigArgs {
    fn any_set(&self) -> bool {
        self.beam.is_some()
            || self.rp.is_some()
            || self.ap.is_some()
            || self.rpl.is_some()
            || self.mc.is_some()
    }

    fn build(&self) -> Result<DecodeConfig> {
        let beam = match &self.beam {
            Some(raw) => BeamSize::from_str(raw)?,
            None => BeamSize::Bounded(5),
        };
        let ap = match &self.ap {
            Some(raw) if raw == "inf" => f64::INFINITY,
            Some(raw) => raw.parse::<f64>().map_err(|_| {
                Error::InvalidConfig(format!("ap: expected number or \"inf\", got {raw:?}"))
            })?,
            None => f64::INFINITY,
        };
        let mc = match &self.mc {
            Some(raw) => MaxCandidates::from_str(raw)?,
            None => MaxCandidates::Unlimited,
        };
        Ok(DecodeConfig {
            prune: PruneConfig {
                rp: self.rp.unwrap_or(0.0),
                ap,
                rpl: self.rpl.unwrap_or(0.0),
                mc,
            },
            ..DecodeConfig::with_beam(beam)
        })
    }
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Prepend a neutral-pruning baseline at the same beam.
    #[arg(long)]
    baseline: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Threshold to sweep: rp | ap | rpl | mc.
    #[arg(long)]
    param: String,
    /// Comma-separated values, e.g. 0,0.2,0.4,0.6.
    #[arg(long)]
    values: String,
    /// Beam size for the sweep template: integer or "unbounded".
    #[arg(long)]
    beam: Option<String>,
}

#[derive(Args)]
struct GenCorpusArgs {
    /// Model spec to sample from.
    #[arg(long)]
    model: String,
    /// Number of sentences.
    #[arg(long)]
    n: usize,
    /// Experiment seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corpus file to write.
    #[arg(long)]
    out: PathBuf,
}

/// Merge an optional spec file with command-line flags; flags win.
fn build_experiment(common: &CommonArgs) -> Result<ExperimentSpec> {
    let mut spec = match &common.spec {
        Some(path) => ExperimentSpec::from_json_file(path)?,
        None => ExperimentSpec {
            model: String::new(),
            corpus: PathBuf::new(),
            configs: Vec::new(),
            out: PathBuf::new(),
            seed: 0,
            jobs: 1,
        },
    };
    if let Some(corpus) = &common.corpus {
        spec.corpus = corpus.clone();
    }
    if let Some(model) = &common.model {
        spec.model = model.clone();
    }
    if let Some(out) = &common.out {
        spec.out = out.clone();
    }
    if let Some(jobs) = common.jobs {
        spec.jobs = jobs;
    }
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if spec.model.is_empty() {
        return Err(Error::InvalidExperiment(
            "no model (use --model or --spec)".into(),
        ));
    }
    if spec.corpus.as_os_str().is_empty() {
        return Err(Error::InvalidExperiment(
            "no corpus (use --corpus or --spec)".into(),
        ));
    }
    if spec.out.as_os_str().is_empty() {
        return Err(Error::InvalidExperiment(
            "no output directory (use --out or --spec)".into(),
        ));
    }
    Ok(spec)
}

fn cmd_decode(args: &DecodeArgs) -> Result<()> {
    let mut spec = build_experiment(&args.common)?;
    if args.config.any_set() || spec.configs.is_empty() {
        spec.configs = vec![args.config.build()?];
    }
    if args.baseline {
        let first = spec.configs[0];
        spec.configs.insert(
            0,
            DecodeConfig {
                prune: PruneConfig::neutral(),
                ..first
            },
        );
    }
    let outputs = run_decode(&spec)?;
    print!("{}", outputs.table);
    println!("reports written to {}", spec.out.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut spec = build_experiment(&args.common)?;
    if spec.configs.is_empty() || args.beam.is_some() {
        let template = ConfigArgs {
            beam: args.beam.clone(),
            ..ConfigArgs::default()
        };
        spec.configs = vec![template.build()?];
    }
    let param = SweepParam::from_str(&args.param)?;
    let values: Vec<String> = args
        .values
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    let outcome = run_sweep(&spec, param, &values)?;
    for row in &outcome.rows {
        println!(
            "{param}={}\tchanged={:.4}\tavg_fan_out={:.2}{}",
            row.value,
            row.changed_fraction,
            row.mean_avg_fan_out,
            if row.selected { "\t<- selected" } else { "" },
        );
    }
    match outcome.selected {
        Some(v) => println!("largest non-degrading value: {param}={v}"),
        None => println!("every swept value changed at least one sentence"),
    }
    println!("sweep written to {}", outcome.csv_path.display());
    Ok(())
}

fn cmd_gen_corpus(args: &GenCorpusArgs) -> Result<()> {
    run_gen_corpus(&args.model, args.n, args.seed, &args.out)?;
    println!("wrote {} sentences to {}", args.n, args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decode(args) => cmd_decode(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::GenCorpus(args) => cmd_gen_corpus(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
