use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use avkit::corpus::{load_manifest, Corpus, TokenizerConfig, TokenizerMode, TruncationConfig};
use avkit::eval::{self, McNemarMethod, ReportOptions, TestSetEval};
use avkit::features::{FeatureConfig, FeatureModel};
use avkit::impostors::{self, ImpostorParams, ImpostorPool};
use avkit::pairgen::{self, PairDataset, PermutationConfig, QuotaSpec};
use avkit::pipeline::{self, PipelineConfig};
use avkit::protocol::{self, Endpoint, ExternalOptions};
use avkit::results::{read_results, write_results};
use avkit::synth::{self, SynthConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing::info;

/// Authorship verification over temporally stratified paragraph pairs.
#[derive(Parser)]
#[command(name = "avkit", version)]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "AVKIT_THREADS")]
    threads: Option<usize>,
    /// Repeat for more log output (info, debug, trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment documents from a JSONL manifest into paragraphs.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 200)]
        min_tokens: usize,
        #[arg(long, value_enum, default_value_t = Tokenizer::UnicodeChar)]
        tokenizer: Tokenizer,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split authors and generate train/dev/test pair datasets.
    Pairgen(PairgenArgs),
    /// Build character n-gram tf-idf models.
    #[command(subcommand)]
    Features(FeaturesCommand),
    /// Run the Impostors verifier.
    #[command(subcommand)]
    Impostors(ImpostorsCommand),
    /// Send a dataset to an external classifier endpoint.
    External {
        #[arg(long)]
        test: PathBuf,
        /// Command line of a subprocess, or an http(s) URL.
        #[arg(long)]
        endpoint: String,
        /// Seconds to wait for each response.
        #[arg(long, default_value_t = 300)]
        timeout: u64,
        /// Maximum unanswered requests.
        #[arg(long, default_value_t = 64)]
        window: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score results against their datasets and write report tables.
    Eval(EvalArgs),
    /// Run every stage from a TOML config, skipping up-to-date stages.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out_dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Overrides `seeds`.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Generate the synthetic corpus and run the pipeline on it.
    Demo {
        #[arg(long, default_value = "demo")]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        authors: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct PairgenArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// JSON quota file; overrides `--preset`.
    #[arg(long)]
    quotas: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Preset::FiveCategory)]
    preset: Preset,
    /// Divides every preset count.
    #[arg(long, default_value_t = 1)]
    scale: usize,
    /// Train, dev and test author shares.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.8, 0.1, 0.1])]
    ratios: Vec<f64>,
    /// Hold out an author and build a test set pinned to them; repeatable.
    #[arg(long)]
    focus_author: Vec<String>,
    #[arg(long, default_value_t = 512)]
    max_combined: usize,
    #[arg(long, default_value_t = 3)]
    reserve: usize,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum FeaturesCommand {
    Build {
        /// Pair dataset whose paragraphs train the model.
        #[arg(long)]
        train: PathBuf,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 50_000)]
        size: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ImpostorsCommand {
    Run {
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Pair dataset whose paragraphs form the candidate pool.
        #[arg(long)]
        pool: PathBuf,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[arg(long, default_value_t = 0.9)]
        feature_fraction: f64,
        #[arg(long, default_value_t = 100)]
        pool_size: usize,
        #[arg(long, default_value_t = 5)]
        per_iter: usize,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value_t = 17)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EvalArgs {
    /// Test dataset; repeat once per test set.
    #[arg(long, required = true)]
    dataset: Vec<PathBuf>,
    /// Results for the dataset at the same position.
    #[arg(long, required = true)]
    results: Vec<PathBuf>,
    /// Second classifier's results, same order, for McNemar's test.
    #[arg(long)]
    compare: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mcnemar::Auto)]
    mcnemar: Mcnemar,
    /// Year-distance bucket width.
    #[arg(long, default_value_t = 1)]
    distance_width: i32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tokenizer {
    UnicodeChar,
    Whitespace,
}

impl From<Tokenizer> for TokenizerMode {
    fn from(t: Tokenizer) -> Self {
        match t {
            Tokenizer::UnicodeChar => TokenizerMode::UnicodeChar,
            Tokenizer::Whitespace => TokenizerMode::Whitespace,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    FiveCategory,
    FourCategory,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mcnemar {
    Auto,
    ChiSquareCorrected,
    ChiSquare,
    Exact,
}

impl From<Mcnemar> for McNemarMethod {
    fn from(m: Mcnemar) -> Self {
        match m {
            Mcnemar::Auto => McNemarMethod::Auto,
            Mcnemar::ChiSquareCorrected => McNemarMethod::ChiSquareCorrected,
            Mcnemar::ChiSquare => McNemarMethod::ChiSquare,
            Mcnemar::Exact => McNemarMethod::Exact,
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(level)),
        )
        .with_writer(std::io::stderr)
        .init();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }

    match cli.command {
        Command::Ingest {
            manifest,
            min_tokens,
            tokenizer,
            out,
        } => {
            let docs = load_manifest(&manifest)?;
            let corpus = Corpus::ingest(&docs, TokenizerConfig::new(tokenizer.into()), min_tokens);
            corpus.save(&out)?;
            println!("{}", corpus.summary());
        }
        Command::Pairgen(a) => pairgen_cmd(a)?,
        Command::Features(FeaturesCommand::Build { train, n, size, out }) => {
            let ds = PairDataset::read_jsonl(&train)?;
            let texts: Vec<String> = ds.paragraphs().into_iter().map(|p| p.text).collect();
            let model = FeatureModel::fit(&texts, FeatureConfig { n, max_size: size })?;
            model.save(&out)?;
            println!("{} features from {} paragraphs", model.dim(), texts.len());
        }
        Command::Impostors(ImpostorsCommand::Run {
            test,
            model,
            pool,
            iterations,
            feature_fraction,
            pool_size,
            per_iter,
            threshold,
            seed,
            out,
        }) => {
            let params = ImpostorParams {
                iterations,
                feature_fraction,
                pool_size,
                impostors_per_iter: per_iter,
                threshold,
            };
            params.validate()?;
            let test = PairDataset::read_jsonl(&test)?;
            let model = FeatureModel::load(&model)?;
            let pool = ImpostorPool::from_dataset(&PairDataset::read_jsonl(&pool)?, &model);
            info!("{} samples, {} pool candidates", test.samples.len(), pool.len());
            let results = impostors::run_testset(&test, &model, &pool, &params, seed)?;
            write_results(&out, &results)?;
            print_accuracy(&results);
        }
        Command::External {
            test,
            endpoint,
            timeout,
            window,
            out,
        } => {
            let test = PairDataset::read_jsonl(&test)?;
            let opts = ExternalOptions {
                timeout: Duration::from_secs(timeout),
                window,
            };
            let results = protocol::run_external(&test, &Endpoint::parse(&endpoint)?, &opts)?;
            write_results(&out, &results)?;
            print_accuracy(&results);
        }
        Command::Eval(a) => eval_cmd(a)?,
        Command::Pipeline { config, out_dir, seeds } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(o) = out_dir {
                cfg.out_dir = o;
            }
            if let Some(s) = seeds {
                cfg.seeds = s;
            }
            run_pipeline(&cfg)?;
        }
        Command::Demo { out, authors, seed } => {
            let corpus_dir = out.join("corpus");
            let manifest = synth::generate(&SynthConfig {
                authors,
                seed,
                ..Default::default()
            })
            .write(&corpus_dir)?;
            info!("synthetic corpus in {}", corpus_dir.display());
            run_pipeline(&pipeline::demo_config(&manifest, &out.join("run")))?;
        }
    }
    Ok(())
}

fn print_accuracy(results: &[avkit::results::VerificationResult]) {
    let correct = results.iter().filter(|r| r.correct()).count();
    println!(
        "{} results, accuracy {:.4}",
        results.len(),
        correct as f64 / results.len().max(1) as f64
    );
}

fn pairgen_cmd(a: PairgenArgs) -> Result<()> {
    let corpus = Corpus::load(&a.corpus)?;
    let quotas = match &a.quotas {
        Some(p) => QuotaSpec::load(p)?,
        None => {
            if a.scale == 0 {
                bail!("--scale must be positive");
            }
            match a.preset {
                Preset::FiveCategory => QuotaSpec::five_category(),
                Preset::FourCategory => QuotaSpec::four_category(),
            }
            .scaled(a.scale)
        }
    };
    let cfg = PermutationConfig {
        quotas,
        ratios: [a.ratios[0], a.ratios[1], a.ratios[2]],
        truncation: TruncationConfig {
            max_combined: a.max_combined,
            reserve: a.reserve,
        },
        focus_authors: a.focus_author,
    };
    let perm = pairgen::build_permutation(&corpus, &cfg, a.seed)?;
    for w in &perm.warnings {
        tracing::warn!("{w}");
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let split = a.out.join("split.json");
    fs::write(&split, serde_json::to_vec_pretty(&perm.split)?).with_context(|| format!("writing {}", split.display()))?;
    for ds in [&perm.train, &perm.dev, &perm.test].into_iter().chain(&perm.focus) {
        let p = a.out.join(format!("{}.jsonl", ds.header.name));
        ds.write_jsonl(&p)?;
        println!("{}: {} samples", p.display(), ds.samples.len());
    }
    Ok(())
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    if a.dataset.len() != a.results.len() {
        bail!(
            "{} --dataset but {} --results; give one results file per dataset",
            a.dataset.len(),
            a.results.len()
        );
    }
    if !a.compare.is_empty() && a.compare.len() != a.results.len() {
        bail!("--compare needs one file per --results");
    }
    let mut sets = Vec::new();
    let (mut all_a, mut all_b) = (Vec::new(), Vec::new());
    for (i, (d, r)) in a.dataset.iter().zip(&a.results).enumerate() {
        let ds = PairDataset::read_jsonl(d)?;
        let results = read_results(r)?;
        sets.push(TestSetEval {
            name: set_name(d),
            evals: eval::join(&ds, &results)?,
        });
        if let Some(c) = a.compare.get(i) {
            all_a.extend(results);
            all_b.extend(read_results(c)?);
        }
    }
    let mcnemar = if a.compare.is_empty() {
        None
    } else {
        Some(eval::mcnemar(&all_a, &all_b, a.mcnemar.into())?)
    };
    let report = eval::build_report(
        &sets,
        mcnemar,
        &ReportOptions {
            distance_width: a.distance_width,
        },
    );
    report.write(&a.out)?;
    print!("{}", report.summary());
    Ok(())
}

fn set_name(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn run_pipeline(cfg: &PipelineConfig) -> Result<()> {
    let outcome = pipeline::run(cfg)?;
    for s in &outcome.manifest.stages {
        info!("{}: {:?}", s.stage, s.status);
    }
    let summary = pipeline::report_dir(&outcome.out_dir, pipeline::IMPOSTORS).join("summary.txt");
    if let Ok(text) = fs::read_to_string(&summary) {
        print!("{text}");
    }
    println!("outputs in {}", outcome.out_dir.display());
    Ok(())
}
