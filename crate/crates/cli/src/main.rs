//! `adjscale`: validate scale files, generate shared-context sentence sets,
//! rank adjectives by intensity and classify scalar vs relational
//! adjectives.
//!
//! Exit codes: 0 success, 1 validation or configuration failure, 2 missing
//! data (absent input files, embeddings or table entries).

mod classify;
mod config;
mod io;
mod rank;

use std::path::PathBuf;
use std::process::ExitCode;

use adjscale::datagen::{self, SamplingConstraints};
use adjscale::scale::{dataset_stats, Language};
use adjscale::scalrel::{self, SplitFractions};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_override, path_value, ConfigError};

#[derive(Parser)]
#[command(name = "adjscale", version, about = "Scalar adjective intensity ranking and classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse scale files and print pair and adjective counts.
    Validate {
        #[arg(required = true)]
        scales: Vec<PathBuf>,
        /// Language for files without a `.toml` sidecar.
        #[arg(long, default_value = "en")]
        language: String,
    },
    /// Sample corpus sentences per scale and substitute every adjective.
    GenContexts {
        /// One sentence per line.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        scales: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Sentences sampled per scale.
        #[arg(long, default_value_t = datagen::DEFAULT_CONTEXTS)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SamplingConstraints::default().min_tokens)]
        min_tokens: usize,
        #[arg(long, default_value_t = SamplingConstraints::default().max_tokens)]
        max_tokens: usize,
        /// Keep exact duplicate sentences.
        #[arg(long)]
        no_dedup: bool,
        /// Output JSONL; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank every scale of a dataset and write ranking reports.
    Rank(RunArgs),
    /// Train and evaluate scalar/relational classifiers.
    Classify(RunArgs),
    /// Build a labeled scalar/relational TSV from word lists.
    ScalrelBuild {
        /// Scale files whose adjectives are the scalar class.
        #[arg(long, required = true)]
        scalar: Vec<PathBuf>,
        /// Relational candidates, one per line.
        #[arg(long)]
        relational: PathBuf,
        /// Frequency table used for the frequent/rare split.
        #[arg(long)]
        freq_table: PathBuf,
        #[arg(long, default_value_t = 222)]
        n_frequent: usize,
        #[arg(long, default_value_t = 221)]
        n_rare: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "en")]
        language: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set layers=8` or `--set pooling=WP`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Result<Vec<(String, toml::Value)>> {
        let mut out = self.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>>>()?;
        if let Some(p) = &self.dump {
            out.push(("dump".into(), path_value(p)));
        }
        if let Some(p) = &self.output_dir {
            out.push(("output_dir".into(), path_value(p)));
        }
        Ok(out)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for missing data, 1 for everything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<adjscale::Error>() {
            return match err {
                adjscale::Error::Io(io) => io_code(io),
                adjscale::Error::InsufficientCorpus { .. } => 2,
                other if other.is_missing_data() => 2,
                _ => 1,
            };
        }
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            return io_code(io);
        }
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 1;
        }
    }
    1
}

fn io_code(e: &std::io::Error) -> u8 {
    if e.kind() == std::io::ErrorKind::NotFound {
        2
    } else {
        1
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Validate { scales, language } => validate(&scales, &language),
        Command::GenContexts {
            corpus,
            scales,
            manifest,
            n,
            seed,
            min_tokens,
            max_tokens,
            no_dedup,
            out,
        } => {
            let constraints = SamplingConstraints {
                min_tokens,
                max_tokens,
                dedup: !no_dedup,
            };
            gen_contexts(&corpus, &scales, manifest.as_deref(), n, seed, &constraints, out.as_deref())
        }
        Command::Rank(args) => {
            let cfg = config::load(args.config.as_deref(), config::RankConfig::PATH_KEYS, &args.overrides()?)?;
            rank::run(&cfg)
        }
        Command::Classify(args) => {
            let cfg = config::load(args.config.as_deref(), config::ClassifyConfig::PATH_KEYS, &args.overrides()?)?;
            classify::run(&cfg)
        }
        Command::ScalrelBuild {
            scalar,
            relational,
            freq_table,
            n_frequent,
            n_rare,
            seed,
            language,
            out,
        } => scalrel_build(&scalar, &relational, &freq_table, n_frequent, n_rare, seed, &language, &out),
    }
}

fn validate(paths: &[PathBuf], language: &str) -> Result<()> {
    let mut failed = false;
    for path in paths {
        match io::load_dataset_or_default(path, language) {
            Ok(ds) if ds.scales().is_empty() => {
                eprintln!("{}: no scales", path.display());
                failed = true;
            }
            Ok(ds) => println!(
                "{}: {} [{}, {}] {} scales, {}",
                path.display(),
                ds.name,
                ds.tag,
                ds.language,
                ds.scales().len(),
                dataset_stats(&ds)
            ),
            Err(e) => {
                if exit_code(&e) == 2 {
                    return Err(e);
                }
                eprintln!("{}: {e:#}", path.display());
                failed = true;
            }
        }
    }
    if failed {
        bail!(ConfigError("validation failed".into()));
    }
    Ok(())
}

fn gen_contexts(
    corpus: &std::path::Path,
    scales: &std::path::Path,
    manifest: Option<&std::path::Path>,
    n: usize,
    seed: u64,
    constraints: &SamplingConstraints,
    out: Option<&std::path::Path>,
) -> Result<()> {
    if n == 0 {
        bail!(config::invalid("n must be at least 1"));
    }
    let ds = io::load_dataset(scales, manifest)?;
    let sentences = datagen::read_corpus(io::open(corpus)?)?;
    let records = datagen::generate(&sentences, &ds, n, seed, constraints)?;
    match out {
        Some(path) => io::write_file(path, |w| datagen::write_jsonl(w, &records).map_err(Into::into))?,
        None => datagen::write_jsonl(std::io::stdout().lock(), &records)?,
    }
    eprintln!("{} records for {} scales", records.len(), ds.scales().len());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn scalrel_build(
    scalar: &[PathBuf],
    relational: &std::path::Path,
    freq_table: &std::path::Path,
    n_frequent: usize,
    n_rare: usize,
    seed: u64,
    language: &str,
    out: &std::path::Path,
) -> Result<()> {
    let lang = Language::new(language)?;
    let mut scalars = Vec::new();
    for path in scalar {
        let ds = io::load_dataset_or_default(path, language)?;
        if ds.language != lang {
            bail!(config::invalid(format!(
                "{} is `{}`, expected `{lang}`",
                path.display(),
                ds.language
            )));
        }
        scalars.extend(ds.scales().iter().flat_map(|s| s.adjectives().cloned()));
    }
    let candidates = datagen::read_corpus(io::open(relational)?)?
        .iter()
        .map(|l| adjscale::scale::Adjective::new(l.trim(), lang.clone()))
        .collect::<adjscale::Result<Vec<_>>>()?;
    let freq = adjscale::baselines::FrequencyTable::load(freq_table)?;
    let picked = scalrel::subsample_relational(&candidates, &freq, n_frequent, n_rare, seed)?;
    let items = scalrel::assemble(&scalars, &picked, SplitFractions::default(), seed)?;
    io::write_file(out, |w| scalrel::write_scalrel(w, &items).map_err(Into::into))
        .with_context(|| format!("writing {}", out.display()))?;
    let scalar_n = items.iter().filter(|i| i.label == scalrel::Label::Scalar).count();
    eprintln!("{} items ({scalar_n} scalar, {} relational)", items.len(), items.len() - scalar_n);
    Ok(())
}
