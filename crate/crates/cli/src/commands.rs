//! Implementations of the `ric` subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use ric_core::chain::{run_chain, ChainConfig, ChainError, ChainRecord};
use ric_core::corrupt::{self, CorruptionConfig};
use ric_core::datagen::{self, DatagenConfig};
use ric_core::graph::Graph;
use ric_core::model::{self, Hyper, ModelParams, TrainConfig, TrainError};
use ric_core::rigidity;
use ric_core::rng::derive_rng;
use ric_core::stats::{self, EvalConfig, StatsError};

use crate::formats::{
    self, ChainRecordDto, CorruptionTraceDto, DatagenTraceDto, FormatError, MoveDto, RawGraphDto,
};
use crate::manifest::{manifest_path_for, ManifestBuilder};
use crate::svg::{histogram_svg, HistSeries};
use crate::{domain, input, usage, CliError};

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        input(e)
    }
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Number of graphs to generate.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 30.0)]
    pub n_mean: f64,
    #[arg(long, default_value_t = 5.0)]
    pub n_std: f64,
    /// Upper clamp on the node count (unbounded when omitted).
    #[arg(long)]
    pub n_cap: Option<u32>,
    #[arg(long, default_value_t = 3)]
    pub n_floor: u32,
    /// Lower end of the uniform range for the type I move probability.
    #[arg(long, default_value_t = 0.0)]
    pub p_low: f64,
    #[arg(long, default_value_t = 0.1)]
    pub p_high: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output JSONL file; a construction-trace sidecar and a manifest are
    /// written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads (1 = sequential).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

pub fn run_gen_data(args: &GenDataArgs) -> Result<(), CliError> {
    let cfg = DatagenConfig {
        count: args.count,
        n_mean: args.n_mean,
        n_std: args.n_std,
        p_low: args.p_low,
        p_high: args.p_high,
        n_floor: args.n_floor,
        n_cap: args.n_cap,
    };
    cfg.validate().map_err(input)?;
    if args.count == 0 {
        return Err(usage("--count must be positive"));
    }

    let mut mf = ManifestBuilder::new("gen-data", Some(args.seed));
    mf.flag("count", args.count)
        .flag("n-mean", args.n_mean)
        .flag("n-std", args.n_std)
        .flag_opt("n-cap", args.n_cap)
        .flag("n-floor", args.n_floor)
        .flag("p-low", args.p_low)
        .flag("p-high", args.p_high)
        .flag("seed", args.seed)
        .flag("out", args.out.display())
        .flag("jobs", args.jobs);

    let items = map_indexed(args.jobs, args.count, |i| {
        datagen::generate_item(&cfg, args.seed, i as u64)
    });

    formats::write_graphs(
        &args.out,
        items
            .iter()
            .enumerate()
            .map(|(i, item)| (Some(format!("g{i:06}")), &item.graph)),
    )?;

    let trace_path = args.out.with_extension("trace.jsonl");
    let file = File::create(&trace_path).map_err(|e| input(FormatError::Io { path: trace_path.clone(), source: e }))?;
    let mut w = BufWriter::new(file);
    for (i, item) in items.iter().enumerate() {
        let dto = DatagenTraceDto {
            id: format!("g{i:06}"),
            n: item.n,
            p: item.p,
            moves: item.moves.iter().map(MoveDto::from).collect(),
        };
        formats::write_json_line(&mut w, &trace_path, &dto)?;
    }
    w.flush().map_err(|e| input(FormatError::Io { path: trace_path.clone(), source: e }))?;

    log::info!("generated {} graphs into {}", items.len(), args.out.display());
    mf.output(&args.out)?;
    mf.output(&trace_path)?;
    mf.write(&manifest_path_for(&args.out))?;
    Ok(())
}

/// Index-addressed map that keeps output order regardless of thread count.
fn map_indexed<T: Send>(jobs: usize, count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if jobs <= 1 {
        (0..count).map(f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool construction");
        pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training dataset (graph JSONL).
    #[arg(long)]
    pub data: PathBuf,
    /// Checkpoint output path; the training-log CSV and manifest are
    /// written next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 2e-3)]
    pub base_lr: f64,
    #[arg(long, default_value_t = 5)]
    pub warmup_epochs: usize,
    /// Comma-separated zero-based epochs at which the rate divides by 10;
    /// pass "none" (or an empty string) to disable decay.
    #[arg(long, default_value = "12,24")]
    pub decay_epochs: String,
    #[arg(long, default_value_t = 64)]
    pub hidden: usize,
    #[arg(long, default_value_t = 5)]
    pub rounds: usize,
    /// Expected corruption length used for training traces.
    #[arg(long, default_value_t = 5.0)]
    pub mean_steps: f64,
    #[arg(long, default_value_t = 3)]
    pub size_min: u32,
    #[arg(long, default_value_t = 100)]
    pub size_max: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run_train(args: &TrainArgs) -> Result<(), CliError> {
    let decay_epochs = parse_decay_epochs(&args.decay_epochs)?;
    let cfg = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        base_lr: args.base_lr,
        warmup_epochs: args.warmup_epochs,
        decay_epochs,
        corruption: CorruptionConfig {
            mean_steps: args.mean_steps,
            size_min: args.size_min,
            size_max: args.size_max,
        },
        seed: args.seed,
    };
    cfg.validate().map_err(input)?;
    let hyper = Hyper { hidden: args.hidden, rounds: args.rounds, ..Hyper::default() };
    hyper.validate().map_err(input)?;

    let mut mf = ManifestBuilder::new("train", Some(args.seed));
    mf.flag("data", args.data.display())
        .flag("out", args.out.display())
        .flag("epochs", args.epochs)
        .flag("batch-size", args.batch_size)
        .flag("base-lr", args.base_lr)
        .flag("warmup-epochs", args.warmup_epochs)
        .flag("decay-epochs", &args.decay_epochs)
        .flag("hidden", args.hidden)
        .flag("rounds", args.rounds)
        .flag("mean-steps", args.mean_steps)
        .flag("size-min", args.size_min)
        .flag("size-max", args.size_max)
        .flag("seed", args.seed);
    mf.input(&args.data)?;

    let data: Vec<Graph> = formats::read_graphs(&args.data)?
        .into_iter()
        .map(|(_, g)| g)
        .collect();
    let out = model::train(&data, hyper, &cfg).map_err(|e| match e {
        TrainError::InvalidConfig(_) | TrainError::EmptyDataset => input(e),
        other => domain(other),
    })?;
    for e in &out.log {
        log::info!("epoch {}: loss {:.6}, step size {:.6}", e.epoch, e.mean_loss, e.step_size);
    }

    formats::save_model(&args.out, &out.params)?;
    let log_path = args.out.with_extension("train_log.csv");
    formats::write_train_log(&log_path, &out.log)?;

    mf.output(&args.out)?;
    mf.output(&log_path)?;
    mf.write(&manifest_path_for(&args.out))?;
    Ok(())
}

fn parse_decay_epochs(spec: &str) -> Result<Vec<usize>, CliError> {
    let trimmed = spec.trim();
    if trimmed.is_empty() || trimmed == "none" {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Input(anyhow::anyhow!("bad --decay-epochs entry {s:?}: {e}")))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Model checkpoint from `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Seed pool: chains start from graphs drawn from this JSONL file.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub transitions: usize,
    #[arg(long, default_value_t = 20)]
    pub chains: usize,
    #[arg(long, default_value_t = 5.0)]
    pub mean_steps: f64,
    #[arg(long, default_value_t = 3)]
    pub size_min: u32,
    #[arg(long, default_value_t = 100)]
    pub size_max: u32,
    /// Reconstruction step cap before the whole transition is resampled.
    #[arg(long, default_value_t = 30)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 5)]
    pub retries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-chain records to drop from the front of the stream.
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    /// Keep every thin-th record after burn-in (1 = keep everything).
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads across chains (1 = sequential).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// Runs `chains` independent chains with streams derived from `(seed,
/// chain index)`; output order is by chain index regardless of `jobs`.
pub fn run_chains(
    params: &ModelParams,
    pool: &[Graph],
    chains: usize,
    cfg: &ChainConfig,
    seed: u64,
    jobs: usize,
) -> Result<Vec<Vec<ChainRecord>>, ChainError> {
    let one = |c: usize| -> Result<Vec<ChainRecord>, ChainError> {
        let mut rng = derive_rng(seed, "chain", c as u64);
        let init = pool[rng.gen_range(0..pool.len())].clone();
        run_chain(init, params, cfg, rng)
    };
    if jobs <= 1 {
        (0..chains).map(one).collect()
    } else {
        let tp = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool construction");
        tp.install(|| (0..chains).into_par_iter().map(one).collect())
    }
}

pub fn run_sample(args: &SampleArgs) -> Result<(), CliError> {
    if args.thin == 0 {
        return Err(usage("--thin must be at least 1"));
    }
    if args.chains == 0 || args.transitions == 0 {
        return Err(usage("--chains and --transitions must be positive"));
    }
    let cfg = ChainConfig {
        transitions: args.transitions,
        corruption: CorruptionConfig {
            mean_steps: args.mean_steps,
            size_min: args.size_min,
            size_max: args.size_max,
        },
        max_reconstruction_steps: args.max_steps,
        resample_transition_retries: args.retries,
    };
    cfg.validate().map_err(input)?;

    let mut mf = ManifestBuilder::new("sample", Some(args.seed));
    mf.flag("model", args.model.display())
        .flag("data", args.data.display())
        .flag("transitions", args.transitions)
        .flag("chains", args.chains)
        .flag("mean-steps", args.mean_steps)
        .flag("size-min", args.size_min)
        .flag("size-max", args.size_max)
        .flag("max-steps", args.max_steps)
        .flag("retries", args.retries)
        .flag("seed", args.seed)
        .flag("burn-in", args.burn_in)
        .flag("thin", args.thin)
        .flag("out", args.out.display())
        .flag("jobs", args.jobs);
    mf.input(&args.model)?;
    mf.input(&args.data)?;

    let params = formats::load_model(&args.model)?;
    let pool: Vec<Graph> = formats::read_graphs(&args.data)?
        .into_iter()
        .map(|(_, g)| g)
        .collect();

    let all = run_chains(&params, &pool, args.chains, &cfg, args.seed, args.jobs).map_err(domain)?;

    // Samples honor burn-in and thinning; the trace sidecar keeps the full
    // record stream.
    let mut kept: Vec<(String, &Graph)> = Vec::new();
    for (c, records) in all.iter().enumerate() {
        for r in records.iter().skip(args.burn_in).step_by(args.thin) {
            kept.push((format!("c{c:03}-t{:05}", r.index), &r.reconstructed));
        }
    }
    formats::write_graphs(&args.out, kept.into_iter().map(|(id, g)| (Some(id), g)))?;

    let trace_path = args.out.with_extension("trace.jsonl");
    let file = File::create(&trace_path)
        .map_err(|e| input(FormatError::Io { path: trace_path.clone(), source: e }))?;
    let mut w = BufWriter::new(file);
    for (c, records) in all.iter().enumerate() {
        for r in records {
            let dto = ChainRecordDto {
                chain: c,
                index: r.index,
                corruption_len: r.corruption_len,
                corrupted: RawGraphDto::from_graph(&r.corrupted),
                reconstructed: RawGraphDto::from_graph(&r.reconstructed),
                reconstruction_len: r.reconstruction_len,
                resampled: r.resampled,
                hit_max_steps: r.hit_max_steps,
            };
            formats::write_json_line(&mut w, &trace_path, &dto)?;
        }
    }
    w.flush().map_err(|e| input(FormatError::Io { path: trace_path.clone(), source: e }))?;

    mf.output(&args.out)?;
    mf.output(&trace_path)?;
    mf.write(&manifest_path_for(&args.out))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Sampled graphs to score.
    #[arg(long)]
    pub samples: PathBuf,
    /// Reference dataset the samples are compared against.
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving report.json, report.csv, dod_hist.svg, and the
    /// manifest.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub dod_min_size: usize,
    #[arg(long, default_value_t = 16)]
    pub dod_max_n: usize,
    /// Drop graphs above --dod-max-n instead of failing.
    #[arg(long)]
    pub skip_oversize: bool,
}

#[derive(Serialize)]
struct KsDto {
    statistic: f64,
    bootstrap_mean: f64,
    bootstrap_se: f64,
    reps: usize,
}

#[derive(Serialize)]
struct ValidityDto {
    percent: f64,
    bootstrap_sd: f64,
    valid: usize,
    total: usize,
}

#[derive(Serialize)]
struct ReportDto {
    config: ReportConfigDto,
    counts: ReportCountsDto,
    validity: ReportValidityDto,
    dod_ks: ReportKsDto,
}

#[derive(Serialize)]
struct ReportConfigDto {
    samples: String,
    reference: String,
    reps: usize,
    seed: u64,
    dod_min_size: usize,
    dod_max_n: usize,
    skip_oversize: bool,
    dod_convention: String,
}

#[derive(Serialize)]
struct ReportCountsDto {
    samples: usize,
    reference: usize,
    er_baseline: usize,
    samples_skipped_dod: usize,
    reference_skipped_dod: usize,
    er_skipped_dod: usize,
}

#[derive(Serialize)]
struct ReportValidityDto {
    samples: ValidityDto,
    er_baseline: ValidityDto,
}

#[derive(Serialize)]
struct ReportKsDto {
    samples_vs_reference: KsDto,
    er_vs_reference: KsDto,
}

pub fn run_eval(args: &EvalArgs) -> Result<(), CliError> {
    if args.reps < 100 {
        return Err(usage("--reps must be at least 100"));
    }
    let mut mf = ManifestBuilder::new("eval", Some(args.seed));
    mf.flag("samples", args.samples.display())
        .flag("reference", args.reference.display())
        .flag("reps", args.reps)
        .flag("seed", args.seed)
        .flag("out-dir", args.out_dir.display())
        .flag("dod-min-size", args.dod_min_size)
        .flag("dod-max-n", args.dod_max_n)
        .flag("skip-oversize", args.skip_oversize);
    mf.input(&args.samples)?;
    mf.input(&args.reference)?;

    let samples: Vec<Graph> = formats::read_graphs(&args.samples)?
        .into_iter()
        .map(|(_, g)| g)
        .collect();
    let reference: Vec<Graph> = formats::read_graphs(&args.reference)?
        .into_iter()
        .map(|(_, g)| g)
        .collect();

    let cfg = EvalConfig {
        reps: args.reps,
        dod_min_size: args.dod_min_size,
        dod_max_n: args.dod_max_n,
        skip_oversize: args.skip_oversize,
    };
    let summary = stats::evaluate(&samples, &reference, &cfg, args.seed).map_err(|e| match e {
        StatsError::DodIntractable { .. } => domain(e),
        other => input(other),
    })?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| input(FormatError::Io { path: args.out_dir.clone(), source: e }))?;

    let report = ReportDto {
        config: ReportConfigDto {
            samples: args.samples.display().to_string(),
            reference: args.reference.display().to_string(),
            reps: args.reps,
            seed: args.seed,
            dod_min_size: args.dod_min_size,
            dod_max_n: args.dod_max_n,
            skip_oversize: args.skip_oversize,
            dod_convention: format!(
                "count all well-constrained node-induced subgraphs with at least {} nodes, normalized by node count",
                args.dod_min_size
            ),
        },
        counts: ReportCountsDto {
            samples: summary.sample_count,
            reference: summary.reference_count,
            er_baseline: summary.baseline_count,
            samples_skipped_dod: summary.samples_skipped,
            reference_skipped_dod: summary.reference_skipped,
            er_skipped_dod: summary.baseline_skipped,
        },
        validity: ReportValidityDto {
            samples: ValidityDto {
                percent: summary.validity_samples.percent,
                bootstrap_sd: summary.validity_samples.bootstrap_sd,
                valid: summary.validity_samples.valid,
                total: summary.validity_samples.total,
            },
            er_baseline: ValidityDto {
                percent: summary.validity_baseline.percent,
                bootstrap_sd: summary.validity_baseline.bootstrap_sd,
                valid: summary.validity_baseline.valid,
                total: summary.validity_baseline.total,
            },
        },
        dod_ks: ReportKsDto {
            samples_vs_reference: KsDto {
                statistic: summary.ks_samples_vs_reference.statistic,
                bootstrap_mean: summary.ks_samples_vs_reference.bootstrap_mean,
                bootstrap_se: summary.ks_samples_vs_reference.bootstrap_se,
                reps: summary.ks_samples_vs_reference.reps,
            },
            er_vs_reference: KsDto {
                statistic: summary.ks_baseline_vs_reference.statistic,
                bootstrap_mean: summary.ks_baseline_vs_reference.bootstrap_mean,
                bootstrap_se: summary.ks_baseline_vs_reference.bootstrap_se,
                reps: summary.ks_baseline_vs_reference.reps,
            },
        },
    };

    let json_path = args.out_dir.join("report.json");
    write_pretty_json(&json_path, &report)?;

    let csv_path = args.out_dir.join("report.csv");
    write_report_csv(&csv_path, &report)?;

    let svg_path = args.out_dir.join("dod_hist.svg");
    let svg = histogram_svg(
        "decomposability distribution",
        &[
            HistSeries { label: "samples", color: "#1f77b4", values: &summary.dod_samples },
            HistSeries { label: "reference", color: "#ff7f0e", values: &summary.dod_reference },
            HistSeries { label: "random baseline", color: "#2ca02c", values: &summary.dod_baseline },
        ],
    );
    std::fs::write(&svg_path, svg)
        .map_err(|e| input(FormatError::Io { path: svg_path.clone(), source: e }))?;

    mf.output(&json_path)?;
    mf.output(&csv_path)?;
    mf.output(&svg_path)?;
    mf.write(&args.out_dir.join("manifest.json"))?;
    Ok(())
}

fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| input(FormatError::Io { path: path.to_path_buf(), source: e }))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| input(FormatError::Invalid { path: path.to_path_buf(), message: e.to_string() }))?;
    w.write_all(b"\n").map_err(|e| input(FormatError::Io { path: path.to_path_buf(), source: e }))?;
    w.flush().map_err(|e| input(FormatError::Io { path: path.to_path_buf(), source: e }))
}

fn write_report_csv(path: &Path, r: &ReportDto) -> Result<(), CliError> {
    let mut rows: Vec<(String, String)> = Vec::new();
    rows.push(("samples_count".into(), r.counts.samples.to_string()));
    rows.push(("reference_count".into(), r.counts.reference.to_string()));
    rows.push(("er_baseline_count".into(), r.counts.er_baseline.to_string()));
    rows.push(("samples_skipped_dod".into(), r.counts.samples_skipped_dod.to_string()));
    rows.push(("reference_skipped_dod".into(), r.counts.reference_skipped_dod.to_string()));
    rows.push(("er_skipped_dod".into(), r.counts.er_skipped_dod.to_string()));
    rows.push(("validity_samples_percent".into(), r.validity.samples.percent.to_string()));
    rows.push(("validity_samples_sd".into(), r.validity.samples.bootstrap_sd.to_string()));
    rows.push(("validity_er_percent".into(), r.validity.er_baseline.percent.to_string()));
    rows.push(("validity_er_sd".into(), r.validity.er_baseline.bootstrap_sd.to_string()));
    rows.push(("dod_ks_samples_statistic".into(), r.dod_ks.samples_vs_reference.statistic.to_string()));
    rows.push(("dod_ks_samples_bootstrap_mean".into(), r.dod_ks.samples_vs_reference.bootstrap_mean.to_string()));
    rows.push(("dod_ks_samples_bootstrap_se".into(), r.dod_ks.samples_vs_reference.bootstrap_se.to_string()));
    rows.push(("dod_ks_er_statistic".into(), r.dod_ks.er_vs_reference.statistic.to_string()));
    rows.push(("dod_ks_er_bootstrap_mean".into(), r.dod_ks.er_vs_reference.bootstrap_mean.to_string()));
    rows.push(("dod_ks_er_bootstrap_se".into(), r.dod_ks.er_vs_reference.bootstrap_se.to_string()));

    let file = File::create(path).map_err(|e| input(FormatError::Io { path: path.to_path_buf(), source: e }))?;
    let mut w = BufWriter::new(file);
    let mut emit = |s: String| {
        w.write_all(s.as_bytes())
            .map_err(|e| input(FormatError::Io { path: path.to_path_buf(), source: e }))
    };
    emit("metric,value\n".to_string())?;
    for (k, v) in rows {
        emit(format!("{k},{v}\n"))?;
    }
    w.flush().map_err(|e| input(FormatError::Io { path: path.to_path_buf(), source: e }))
}

// ---------------------------------------------------------------------------
// check / dod
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Graph JSONL file to check.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Write verdicts here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_check(args: &CheckArgs) -> Result<(), CliError> {
    let graphs = formats::read_graphs(&args.input)?;
    let mut lines = Vec::with_capacity(graphs.len());
    for (_, g) in &graphs {
        let verdict = rigidity::is_laman(g).map_err(domain)?;
        lines.push(if verdict { "true" } else { "false" });
    }
    emit_lines(args.out.as_deref(), &lines, "check", &args.input, None)
}

#[derive(Debug, Args)]
pub struct DodArgs {
    /// Graph JSONL file to score.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Smallest subgraph size counted as well-constrained.
    #[arg(long, default_value_t = 3)]
    pub min_size: usize,
    /// Exact counting limit; larger graphs are a domain error.
    #[arg(long, default_value_t = 16)]
    pub max_n: usize,
    /// Write values here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_dod(args: &DodArgs) -> Result<(), CliError> {
    let graphs = formats::read_graphs(&args.input)?;
    let mut lines = Vec::with_capacity(graphs.len());
    for (_, g) in &graphs {
        let r = rigidity::count_well_constrained_subgraphs(g, args.min_size, args.max_n)
            .map_err(domain)?;
        lines.push(r.dod.to_string());
    }
    let line_refs: Vec<&str> = lines.iter().map(|s| s.as_str()).collect();
    emit_lines(args.out.as_deref(), &line_refs, "dod", &args.input, None)
}

fn emit_lines(
    out: Option<&Path>,
    lines: &[&str],
    subcommand: &str,
    input_path: &Path,
    seed: Option<u64>,
) -> Result<(), CliError> {
    match out {
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            for l in lines {
                writeln!(w, "{l}").map_err(|e| input(FormatError::Io { path: PathBuf::from("<stdout>"), source: e }))?;
            }
            Ok(())
        }
        Some(path) => {
            let mut mf = ManifestBuilder::new(subcommand, seed);
            mf.flag("in", input_path.display()).flag("out", path.display());
            mf.input(input_path)?;
            let file = File::create(path).map_err(|e| input(FormatError::Io { path: path.to_path_buf(), source: e }))?;
            let mut w = BufWriter::new(file);
            for l in lines {
                writeln!(w, "{l}").map_err(|e| input(FormatError::Io { path: path.to_path_buf(), source: e }))?;
            }
            w.flush().map_err(|e| input(FormatError::Io { path: path.to_path_buf(), source: e }))?;
            mf.output(path)?;
            mf.write(&manifest_path_for(path))?;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// corrupt
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct CorruptArgs {
    /// Graph JSONL file to corrupt (one trace per graph).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 5.0)]
    pub mean_steps: f64,
    #[arg(long, default_value_t = 3)]
    pub size_min: u32,
    #[arg(long, default_value_t = 100)]
    pub size_max: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output JSONL file of corruption traces.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_corrupt(args: &CorruptArgs) -> Result<(), CliError> {
    let cfg = CorruptionConfig {
        mean_steps: args.mean_steps,
        size_min: args.size_min,
        size_max: args.size_max,
    };
    cfg.validate().map_err(input)?;

    let mut mf = ManifestBuilder::new("corrupt", Some(args.seed));
    mf.flag("in", args.input.display())
        .flag("mean-steps", args.mean_steps)
        .flag("size-min", args.size_min)
        .flag("size-max", args.size_max)
        .flag("seed", args.seed)
        .flag("out", args.out.display());
    mf.input(&args.input)?;

    let graphs = formats::read_graphs(&args.input)?;
    let file = File::create(&args.out)
        .map_err(|e| input(FormatError::Io { path: args.out.clone(), source: e }))?;
    let mut w = BufWriter::new(file);
    for (i, (id, g)) in graphs.iter().enumerate() {
        let mut rng = derive_rng(args.seed, "corrupt-cli", i as u64);
        let trace = corrupt::corrupt(g, &cfg, &mut rng).map_err(domain)?;
        let dto = CorruptionTraceDto {
            id: id.clone(),
            k: trace.len(),
            start: RawGraphDto::from_graph(&trace.start),
            moves: trace.steps.iter().map(|s| MoveDto::from(&s.mv)).collect(),
            states: trace.steps.iter().map(|s| RawGraphDto::from_graph(&s.state)).collect(),
        };
        formats::write_json_line(&mut w, &args.out, &dto)?;
    }
    w.flush().map_err(|e| input(FormatError::Io { path: args.out.clone(), source: e }))?;

    mf.output(&args.out)?;
    mf.write(&manifest_path_for(&args.out))?;
    Ok(())
}
