use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use avel::avedata::{
    load_dataset, save_dataset, split_dataset, synth_dataset, validate_record, Dataset, SplitFractions, SynthConfig,
    MANIFEST_FILE,
};
use avel::b2ilc::{correct, PredictionSequence};
use avel::edrnet::CamSource;
use avel::harness::{
    checkpoint_load, checkpoint_save, evaluate, export_cams, read_checkpoint_config, run_ablation, train_with_observer,
    AblationSuite, HarnessError, RunConfig,
};
use avel::smbfuse::augment_dataset;

#[derive(Parser)]
#[command(name = "avel", version, about = "Audio-visual event localization toolkit")]
struct Cli {
    /// Flat JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Data(DataCommand),
    /// Train a model and write a checkpoint plus an NDJSON epoch log.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: Option<PathBuf>,
    },
    /// Segment accuracy of a checkpoint.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Apply label correction with this witness-rate threshold.
        #[arg(long)]
        b2ilc: Option<f64>,
    },
    /// Run an ablation suite: components, branches, k, L, d[:list], augment[:list], pe.
    Ablate {
        #[arg(long)]
        suite: AblationSuite,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Generate fused videos per foreground class.
    Augment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 250)]
        per_class: usize,
        /// Keep the original records in the output dataset.
        #[arg(long)]
        append: bool,
    },
    /// Label-correct predictions in a JSON file.
    Correct {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        wr: f64,
        #[arg(long, default_value_t = avel::avedata::BACKGROUND)]
        background: usize,
    },
    /// Export class activation maps as PGM files.
    Cam {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Comma-separated record ids; all records when omitted.
        #[arg(long, value_delimiter = ',')]
        ids: Vec<String>,
    },
}

#[derive(Subcommand)]
enum DataCommand {
    /// Write a synthetic dataset.
    Synth(SynthArgs),
    /// Check every record of a dataset.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Stratified train/val/test split into `<out>/{train,val,test}`.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.1, 0.1])]
        fractions: Vec<f64>,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 5)]
    classes: usize,
    #[arg(long, default_value_t = 40)]
    videos_per_class: usize,
    #[arg(long, default_value_t = 40)]
    background_videos: usize,
    #[arg(long, default_value_t = 8)]
    d_a: usize,
    #[arg(long, default_value_t = 16)]
    d_v: usize,
    #[arg(long, default_value_t = 4)]
    spatial: usize,
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
}

fn manifest(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}

fn load(path: &Path) -> Result<Dataset> {
    load_dataset(&manifest(path)).with_context(|| format!("loading {}", path.display()))
}

fn require_out(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref().context("--out is required for this command")
}

fn run_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

/// Adopts the dataset's feature sizes when the config leaves them at their
/// defaults.
fn fit_dims(cfg: &mut RunConfig, data: &Dataset, explicit: bool) -> Result<()> {
    let Some(d) = data.dims() else { return Ok(()) };
    let m = &mut cfg.model;
    if !explicit {
        (m.audio_dim, m.visual_dim, m.spatial, m.segments) = (d.audio, d.visual, d.spatial, d.segments);
    } else if (m.audio_dim, m.visual_dim, m.spatial, m.segments) != (d.audio, d.visual, d.spatial, d.segments) {
        bail!(
            "config expects d_a={} d_v={} S={} N={}, data has d_a={} d_v={} S={} N={}",
            m.audio_dim,
            m.visual_dim,
            m.spatial,
            m.segments,
            d.audio,
            d.visual,
            d.spatial,
            d.segments
        );
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PredictionEntry {
    Hard(Vec<usize>),
    Full {
        hard: Option<Vec<usize>>,
        probs: Option<Vec<Vec<f64>>>,
    },
}

fn to_sequence(id: &str, entry: PredictionEntry) -> Result<PredictionSequence> {
    match entry {
        PredictionEntry::Hard(hard) => Ok(PredictionSequence::from_hard(hard)),
        PredictionEntry::Full { hard, probs } => {
            let probs = probs
                .map(|rows| {
                    let cols = rows.first().map_or(0, Vec::len);
                    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                    Array2::from_shape_vec((rows.len(), cols), flat)
                        .with_context(|| format!("{id}: ragged probability rows"))
                })
                .transpose()?;
            match (hard, probs) {
                (Some(hard), probs) => Ok(PredictionSequence { probs, hard }),
                (None, Some(p)) => Ok(PredictionSequence::from_probs(p)),
                (None, None) => bail!("{id}: entry needs `hard` or `probs`"),
            }
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Data(DataCommand::Synth(a)) => {
            let out = require_out(&cli.out)?;
            let data = synth_dataset(&SynthConfig {
                classes: a.classes,
                videos_per_class: a.videos_per_class,
                background_videos: a.background_videos,
                audio_dim: a.d_a,
                visual_dim: a.d_v,
                spatial: a.spatial,
                separation: a.separation,
                seed: cli.seed.unwrap_or(0),
            })?;
            let path = save_dataset(&data, out)?;
            println!("{} records -> {}", data.len(), path.display());
        }
        Command::Data(DataCommand::Validate { input }) => {
            // load_dataset already rejects invalid records; report all of them.
            let data = load(input)?;
            let mut bad = 0;
            for r in &data.records {
                for v in validate_record(r) {
                    println!("{}: {v}", r.id);
                    bad += 1;
                }
            }
            println!("{} records, {bad} violations", data.len());
        }
        Command::Data(DataCommand::Split { input, fractions }) => {
            let out = require_out(&cli.out)?;
            if fractions.len() != 3 {
                bail!(
                    "--fractions takes three comma separated values, got {}",
                    fractions.len()
                );
            }
            let data = load(input)?;
            let f = SplitFractions::new(fractions[0], fractions[1], fractions[2]);
            let (tr, va, te) = split_dataset(&data, f, cli.seed.unwrap_or(0))?;
            for (name, d) in [("train", &tr), ("val", &va), ("test", &te)] {
                save_dataset(d, &out.join(name))?;
                println!("{name}: {} records", d.len());
            }
        }
        Command::Train { train, val } => {
            let out = require_out(&cli.out)?;
            let mut cfg = run_config(&cli)?;
            let train_set = load(train)?;
            let val_set = match val {
                Some(v) => load(v)?,
                None => Dataset::empty(avel::Split::Val),
            };
            fit_dims(&mut cfg, &train_set, cli.config.is_some())?;
            fs::create_dir_all(out)?;
            write_json(&out.join("config.json"), &cfg.to_value())?;
            let log_path = out.join("train_log.ndjson");
            let mut log = fs::File::create(&log_path).with_context(|| log_path.display().to_string())?;
            let outcome = train_with_observer(&train_set, &val_set, &cfg.model, &cfg.train, |e| {
                let line = serde_json::to_string(e).expect("serializable");
                writeln!(log, "{line}").map_err(|err| HarnessError::Config(format!("log write failed: {err}")))
            })?;
            checkpoint_save(&outcome.params, &cfg.model, &out.join("checkpoint"))?;
            println!(
                "trained {} epochs, best epoch {}, checkpoint in {}",
                outcome.log.len(),
                outcome.best_epoch,
                out.join("checkpoint").display()
            );
        }
        Command::Eval {
            data,
            checkpoint,
            b2ilc,
        } => {
            let data = load(data)?;
            let cfg = read_checkpoint_config(checkpoint)?;
            let params = checkpoint_load(checkpoint, &cfg)?;
            let report = evaluate(&data, &params, &cfg, *b2ilc)?;
            println!(
                "segment accuracy {:.4} over {} segments",
                report.segment_accuracy, report.n_segments
            );
            if let Some(out) = &cli.out {
                write_json(out, &report)?;
            }
        }
        Command::Ablate {
            suite,
            train,
            val,
            test,
        } => {
            let mut cfg = run_config(&cli)?;
            let (tr, va, te) = (load(train)?, load(val)?, load(test)?);
            fit_dims(&mut cfg, &tr, cli.config.is_some())?;
            let table = run_ablation(suite, &cfg, &tr, &va, &te)?;
            print!("{}", table.render());
            if let Some(out) = &cli.out {
                write_json(out, &table)?;
            }
        }
        Command::Augment {
            input,
            per_class,
            append,
        } => {
            let out = require_out(&cli.out)?;
            let data = load(input)?;
            let aug = augment_dataset(&data, *per_class, cli.seed.unwrap_or(0));
            for s in &aug.skipped {
                eprintln!("skipped class {}: {}", s.class, s.reason);
            }
            let sidecars = out.join("provenance");
            fs::create_dir_all(&sidecars)?;
            for (r, p) in aug.dataset.records.iter().zip(&aug.provenance) {
                write_json(&sidecars.join(format!("{}.json", r.id)), p)?;
            }
            let mut records = if *append { data.records } else { Vec::new() };
            records.extend(aug.dataset.records);
            let result = Dataset::new(records, data.class_names, data.split);
            save_dataset(&result, out)?;
            println!(
                "{} fused videos, {} records written",
                aug.provenance.len(),
                result.len()
            );
        }
        Command::Correct { input, wr, background } => {
            let out = require_out(&cli.out)?;
            let text = fs::read_to_string(input).with_context(|| input.display().to_string())?;
            let entries: BTreeMap<String, PredictionEntry> = serde_json::from_str(&text)?;
            let mut corrected = BTreeMap::new();
            for (id, entry) in entries {
                let seq = to_sequence(&id, entry)?;
                corrected.insert(id, Value::from(correct(&seq, *wr, *background).hard));
            }
            write_json(out, &corrected)?;
            println!("{} sequences corrected", corrected.len());
        }
        Command::Cam { data, checkpoint, ids } => {
            let out = require_out(&cli.out)?;
            let data = load(data)?;
            let cfg = read_checkpoint_config(checkpoint)?;
            let params = checkpoint_load(checkpoint, &cfg)?;
            let records: Vec<_> = data
                .records
                .into_iter()
                .filter(|r| ids.is_empty() || ids.contains(&r.id))
                .collect();
            let files = export_cams(&records, &params, &cfg, &[CamSource::V, CamSource::AV], out)?;
            println!("{} maps written to {}", files.len(), out.display());
        }
    }
    Ok(())
}
