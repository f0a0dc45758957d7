//! Command-line pipeline: every stage of the library behind one binary.
//!
//! Subcommands compose the library modules: `hash-train` and `encode`
//! drive [`crate::hashing`], `sample` the [`crate::sampler`], `train` and
//! `train-online` the [`crate::learner`], `search` the [`crate::ranking`]
//! two-stage scan, `eval` the [`crate::eval`] harness, and `pipeline`
//! chains all of them over one dataset and reports unweighted vs weighted
//! MAP.
//!
//! Every run prints its fully resolved configuration (defaults and seed
//! included) to standard error, so any result can be reproduced from the
//! log alone. Data goes to files or standard output; diagnostics go to
//! standard error. Exit codes: 0 on success, 2 on usage errors, 1 on
//! runtime errors.
//!
//! A `--config key=value` file can pre-seed any long flag of the chosen
//! subcommand; flags given on the command line win.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::code::{BinaryCode, CodeDatabase};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_with, sample_queries, write_pr_csv, write_summary_csv, ApVariant, SummaryRow,
};
use crate::hashing::{encode, train_itq, train_lsh, FeatureMatrix, HashKind};
use crate::io;
use crate::learner::{train_offline, train_online, BitWeights, LearnerConfig, Optimizer};
use crate::ranking::{scan_hamming, search, RankedList};
use crate::sampler::sample_triplets;

/// Parsed invocation: one subcommand plus the global flags.
#[derive(Debug, Parser)]
#[command(
    name = "bitrank",
    version,
    about = "Learn per-bit weights for binary codes and re-rank with weighted Hamming distance"
)]
pub struct RunConfig {
    /// Key=value file whose entries pre-seed the subcommand's flags
    /// (command-line flags win).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Print extra progress diagnostics to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train an LSH or ITQ hash model on features.
    HashTrain(HashTrainArgs),
    /// Encode features into a binary code database with a trained model.
    Encode(EncodeArgs),
    /// Sample ACDV training triplets from a labeled code database.
    Sample(SampleArgs),
    /// Learn bit weights offline over a triplet batch.
    Train(TrainArgs),
    /// Learn bit weights online over mini-batches of a triplet batch.
    TrainOnline(TrainOnlineArgs),
    /// Rank database codes for query codes (two-stage when weighted).
    Search(SearchArgs),
    /// Evaluate retrieval quality (PR curves, AP, MAP) over a query set.
    Eval(EvalArgs),
    /// Run the whole pipeline on one dataset and compare unweighted vs
    /// weighted MAP.
    Pipeline(PipelineArgs),
}

/// Feature sources shared by the stages that read real-valued data.
#[derive(Debug, Args)]
struct FeatureArgs {
    /// Numeric CSV file of features (one row per sample).
    #[arg(long, value_name = "PATH")]
    features: Option<PathBuf>,

    /// Header name of the CSV class-label column.
    #[arg(long, value_name = "NAME")]
    label_column: Option<String>,

    /// IDX image file (MNIST layout); requires --idx-labels.
    #[arg(long, value_name = "PATH")]
    idx_images: Option<PathBuf>,

    /// IDX label file paired with --idx-images.
    #[arg(long, value_name = "PATH")]
    idx_labels: Option<PathBuf>,

    /// Scale each feature column to unit variance before use.
    #[arg(long)]
    scale: bool,
}

impl FeatureArgs {
    fn load(&self) -> std::result::Result<FeatureMatrix, CliError> {
        let features = match (&self.features, &self.idx_images, &self.idx_labels) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(CliError::Usage(
                    "--features and --idx-images/--idx-labels are mutually exclusive".into(),
                ))
            }
            (Some(csv), None, None) => io::load_features_csv(csv, self.label_column.as_deref())?,
            (None, Some(images), Some(labels)) => io::load_idx(images, labels)?,
            (None, Some(_), None) | (None, None, Some(_)) => {
                return Err(CliError::Usage(
                    "--idx-images and --idx-labels must be given together".into(),
                ))
            }
            (None, None, None) => {
                return Err(CliError::Usage(
                    "either --features or --idx-images/--idx-labels is required".into(),
                ))
            }
        };
        Ok(if self.scale {
            features.standardized()
        } else {
            features
        })
    }

    fn describe(&self) -> String {
        let source = match (&self.features, &self.idx_images) {
            (Some(csv), _) => csv.display().to_string(),
            (None, Some(images)) => format!("{} (idx)", images.display()),
            _ => "<missing>".into(),
        };
        format!("features={source} scale={}", self.scale)
    }
}

#[derive(Debug, Args)]
struct HashTrainArgs {
    #[command(flatten)]
    input: FeatureArgs,

    /// Hashing method: lsh or itq.
    #[arg(long, default_value = "lsh")]
    method: HashKind,

    /// Code length K in bits.
    #[arg(long)]
    bits: usize,

    /// ITQ rotation-refinement iterations.
    #[arg(long, default_value_t = 50)]
    iters: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output model file (BMDL).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    /// Trained model file (BMDL).
    #[arg(long, value_name = "PATH")]
    model: PathBuf,

    #[command(flatten)]
    input: FeatureArgs,

    /// Output code database (BCOD).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Labeled code database (BCOD).
    #[arg(long, value_name = "PATH")]
    codes: PathBuf,

    /// Number of quadruplets to draw.
    #[arg(long)]
    count: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output triplet batch (BTRP).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

/// Learner hyperparameters shared by both training subcommands.
#[derive(Debug, Args)]
struct LearnerArgs {
    /// Margin-violation trade-off C_xi.
    #[arg(long, default_value_t = 1.0)]
    c_xi: f64,

    /// Intra-class deviation trade-off C_gamma.
    #[arg(long, default_value_t = 0.1)]
    c_gamma: f64,

    /// Learning rate eta.
    #[arg(long, default_value_t = 1e-3)]
    eta: f64,

    /// Starting weights (BWGT); all-ones when absent.
    #[arg(long, value_name = "PATH")]
    init_weights: Option<PathBuf>,

    /// Also dump the learned weights as plain text.
    #[arg(long, value_name = "PATH")]
    text_out: Option<PathBuf>,
}

impl LearnerArgs {
    fn config(&self) -> LearnerConfig {
        LearnerConfig {
            c_xi: self.c_xi,
            c_gamma: self.c_gamma,
            eta: self.eta,
            ..Default::default()
        }
    }

    fn initial_weights(&self) -> Result<Option<BitWeights>> {
        self.init_weights.as_ref().map(io::load_weights).transpose()
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Training triplet batch (BTRP).
    #[arg(long, value_name = "PATH")]
    triplets: PathBuf,

    #[arg(long, default_value = "egd")]
    optimizer: Optimizer,

    #[arg(long, default_value_t = 500)]
    max_iters: usize,

    /// Relative objective-decrease stopping threshold.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    #[command(flatten)]
    learner: LearnerArgs,

    /// Seed echoed for reproducibility (offline training is
    /// deterministic in its inputs).
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output weights (BWGT).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainOnlineArgs {
    /// Training triplet batch (BTRP), consumed in file order.
    #[arg(long, value_name = "PATH")]
    triplets: PathBuf,

    /// Mini-batch size for each passive-aggressive update.
    #[arg(long, default_value_t = 10)]
    minibatch_size: usize,

    /// EGD steps per update.
    #[arg(long, default_value_t = 3)]
    inner_iters: usize,

    #[command(flatten)]
    learner: LearnerArgs,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output weights (BWGT).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Code database to search (BCOD).
    #[arg(long, value_name = "PATH")]
    codes: PathBuf,

    /// Query codes (BCOD); every entry is used as a query.
    #[arg(long, value_name = "PATH")]
    queries: PathBuf,

    /// Learned weights (BWGT); plain Hamming ranking when absent.
    #[arg(long, value_name = "PATH")]
    weights: Option<PathBuf>,

    /// Hamming filter radius for the first stage; defaults to K
    /// (exhaustive).
    #[arg(long)]
    radius: Option<u32>,

    /// Keep at most this many results per query.
    #[arg(long, default_value_t = 10)]
    limit: usize,

    /// Output CSV (query_id,rank,db_index,score); standard output when
    /// absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Code database to rank (BCOD).
    #[arg(long, value_name = "PATH")]
    codes: PathBuf,

    /// Labeled query codes (BCOD).
    #[arg(long, value_name = "PATH")]
    queries: PathBuf,

    /// Learned weights (BWGT); standard Hamming evaluation when absent.
    #[arg(long, value_name = "PATH")]
    weights: Option<PathBuf>,

    /// AP interpolation: all-point or eleven-point.
    #[arg(long, default_value = "all-point")]
    ap: ApVariant,

    /// Code type recorded in the summary CSV.
    #[arg(long, default_value = "unknown")]
    code_type: String,

    /// Summary CSV (code_type,bits,mode,map).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    /// Averaged PR curve CSV (rank,precision,recall).
    #[arg(long, value_name = "PATH")]
    pr_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[command(flatten)]
    input: FeatureArgs,

    /// Hashing method: lsh or itq.
    #[arg(long, default_value = "lsh")]
    hash: HashKind,

    /// Code length K in bits.
    #[arg(long)]
    bits: usize,

    /// ITQ rotation-refinement iterations.
    #[arg(long, default_value_t = 50)]
    iters: usize,

    /// Number of training triplets to sample.
    #[arg(long, default_value_t = 5000)]
    triplet_count: usize,

    /// Per-class fraction of the test half used as queries.
    #[arg(long, default_value_t = 0.1)]
    query_fraction: f64,

    #[arg(long, default_value = "egd")]
    optimizer: Optimizer,

    #[arg(long, default_value_t = 500)]
    max_iters: usize,

    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    #[command(flatten)]
    learner: LearnerArgs,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Directory for all produced artifacts.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Runtime(err)
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(Error::Io(err))
    }
}

/// Parses `argv` and runs the selected subcommand, returning the process
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match apply_config_file(argv) {
        Ok(argv) => argv,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err}");
            return 1;
        }
    };

    let config = match RunConfig::try_parse_from(argv) {
        Ok(config) => config,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };

    match dispatch(config) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err}");
            1
        }
    }
}

/// Merges `--config` file entries into `argv` as flags, skipping any key
/// the user already passed so command-line flags win.
fn apply_config_file(argv: Vec<OsString>) -> std::result::Result<Vec<OsString>, CliError> {
    let mut path: Option<PathBuf> = None;
    for (i, arg) in argv.iter().enumerate() {
        let Some(text) = arg.to_str() else { continue };
        if text == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
            if path.is_none() {
                return Err(CliError::Usage("--config requires a path".into()));
            }
        } else if let Some(rest) = text.strip_prefix("--config=") {
            path = Some(PathBuf::from(rest));
        }
    }
    let Some(path) = path else { return Ok(argv) };

    let text = fs::read_to_string(&path).map_err(Error::Io)?;
    let mut merged = argv.clone();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Runtime(Error::Parse {
                line: idx + 1,
                msg: format!("config line {line:?} is not key=value"),
            })
        })?;
        let key = key.trim();
        let value = value.trim();
        let flag = format!("--{key}");
        let given = argv.iter().any(|a| {
            a.to_str()
                .is_some_and(|t| t == flag || t.starts_with(&format!("{flag}=")))
        });
        if given {
            continue;
        }
        match value {
            "true" => merged.push(flag.into()),
            "false" => {}
            _ => {
                merged.push(flag.into());
                merged.push(value.into());
            }
        }
    }
    Ok(merged)
}

fn log_config(stage: &str, fields: &[(&str, String)]) {
    let mut line = format!("bitrank {stage}:");
    for (key, value) in fields {
        line.push_str(&format!(" {key}={value}"));
    }
    eprintln!("{line}");
}

fn dispatch(config: RunConfig) -> std::result::Result<(), CliError> {
    match config.command {
        Command::HashTrain(args) => run_hash_train(args, config.verbose),
        Command::Encode(args) => run_encode(args, config.verbose),
        Command::Sample(args) => run_sample(args),
        Command::Train(args) => run_train(args, config.verbose),
        Command::TrainOnline(args) => run_train_online(args, config.verbose),
        Command::Search(args) => run_search(args),
        Command::Eval(args) => run_eval(args),
        Command::Pipeline(args) => run_pipeline(args, config.verbose),
    }
}

fn run_hash_train(args: HashTrainArgs, verbose: bool) -> std::result::Result<(), CliError> {
    log_config(
        "hash-train",
        &[
            ("input", args.input.describe()),
            ("method", args.method.to_string()),
            ("bits", args.bits.to_string()),
            ("iters", args.iters.to_string()),
            ("seed", args.seed.to_string()),
            ("out", args.out.display().to_string()),
        ],
    );
    let features = args.input.load()?;
    let model = match args.method {
        HashKind::Lsh => train_lsh(&features, args.bits, args.seed)?,
        HashKind::Itq => {
            let (model, losses) = train_itq(&features, args.bits, args.iters, args.seed)?;
            if verbose {
                eprintln!(
                    "bitrank hash-train: quantization loss {} -> {}",
                    losses.first().unwrap_or(&f64::NAN),
                    losses.last().unwrap_or(&f64::NAN)
                );
            }
            model
        }
    };
    io::save_model(&args.out, &model)?;
    Ok(())
}

fn run_encode(args: EncodeArgs, verbose: bool) -> std::result::Result<(), CliError> {
    log_config(
        "encode",
        &[
            ("model", args.model.display().to_string()),
            ("input", args.input.describe()),
            ("out", args.out.display().to_string()),
        ],
    );
    let model = io::load_model(&args.model)?;
    let features = args.input.load()?;
    let codes = encode(&model, &features)?;
    let labels = match features.labels() {
        Some(labels) => labels.to_vec(),
        None => {
            eprintln!("bitrank encode: input has no labels, storing class 0 for every code");
            vec![0; codes.len()]
        }
    };
    let db = CodeDatabase::new(codes, labels)?;
    io::save_codes(&args.out, &db)?;
    if verbose {
        eprintln!("bitrank encode: wrote {} codes of {} bits", db.len(), db.bits());
    }
    Ok(())
}

fn run_sample(args: SampleArgs) -> std::result::Result<(), CliError> {
    log_config(
        "sample",
        &[
            ("codes", args.codes.display().to_string()),
            ("count", args.count.to_string()),
            ("seed", args.seed.to_string()),
            ("out", args.out.display().to_string()),
        ],
    );
    let db = io::load_codes(&args.codes)?;
    let batch = sample_triplets(&db, args.count, args.seed)?;
    io::save_triplets(&args.out, &batch)?;
    Ok(())
}

fn run_train(args: TrainArgs, verbose: bool) -> std::result::Result<(), CliError> {
    let cfg = LearnerConfig {
        optimizer: args.optimizer,
        max_iters: args.max_iters,
        tol: args.tol,
        ..args.learner.config()
    };
    log_config(
        "train",
        &[
            ("triplets", args.triplets.display().to_string()),
            ("optimizer", cfg.optimizer.to_string()),
            ("c_xi", cfg.c_xi.to_string()),
            ("c_gamma", cfg.c_gamma.to_string()),
            ("eta", cfg.eta.to_string()),
            ("max_iters", cfg.max_iters.to_string()),
            ("tol", cfg.tol.to_string()),
            ("seed", args.seed.to_string()),
            ("out", args.out.display().to_string()),
        ],
    );
    let batch = io::load_triplets(&args.triplets)?;
    let w0 = args.learner.initial_weights()?;
    let (weights, trace) = train_offline(&batch, &cfg, w0)?;
    io::save_weights(&args.out, &weights)?;
    if let Some(text) = &args.learner.text_out {
        io::save_weights_text(text, &weights)?;
    }
    if verbose {
        eprintln!(
            "bitrank train: objective {} -> {} over {} iterations",
            trace.first().unwrap_or(&f64::NAN),
            trace.last().unwrap_or(&f64::NAN),
            trace.len().saturating_sub(1)
        );
    }
    Ok(())
}

fn run_train_online(args: TrainOnlineArgs, verbose: bool) -> std::result::Result<(), CliError> {
    let cfg = LearnerConfig {
        minibatch_size: args.minibatch_size,
        inner_iters: args.inner_iters,
        ..args.learner.config()
    };
    log_config(
        "train-online",
        &[
            ("triplets", args.triplets.display().to_string()),
            ("minibatch_size", cfg.minibatch_size.to_string()),
            ("inner_iters", cfg.inner_iters.to_string()),
            ("c_xi", cfg.c_xi.to_string()),
            ("c_gamma", cfg.c_gamma.to_string()),
            ("eta", cfg.eta.to_string()),
            ("seed", args.seed.to_string()),
            ("out", args.out.display().to_string()),
        ],
    );
    let batch = io::load_triplets(&args.triplets)?;
    let w0 = args.learner.initial_weights()?;
    let (weights, trace) = train_online(batch.chunked(cfg.minibatch_size), &cfg, w0)?;
    io::save_weights(&args.out, &weights)?;
    if let Some(text) = &args.learner.text_out {
        io::save_weights_text(text, &weights)?;
    }
    if verbose {
        eprintln!("bitrank train-online: {} updates", trace.len());
    }
    Ok(())
}

fn write_results_csv(out: &mut dyn std::io::Write, results: &[(usize, RankedList)]) -> Result<()> {
    writeln!(out, "query_id,rank,db_index,score")?;
    for (query_id, list) in results {
        for (rank, (index, score)) in list.entries().iter().enumerate() {
            writeln!(out, "{query_id},{},{index},{score}", rank + 1)?;
        }
    }
    Ok(())
}

fn run_search(args: SearchArgs) -> std::result::Result<(), CliError> {
    log_config(
        "search",
        &[
            ("codes", args.codes.display().to_string()),
            ("queries", args.queries.display().to_string()),
            (
                "weights",
                args.weights
                    .as_ref()
                    .map_or("<none>".into(), |p| p.display().to_string()),
            ),
            ("radius", args.radius.map_or("K".into(), |r| r.to_string())),
            ("limit", args.limit.to_string()),
        ],
    );
    let db = io::load_codes(&args.codes)?;
    let queries = io::load_codes(&args.queries)?;
    let weights = args.weights.as_ref().map(io::load_weights).transpose()?;
    let radius = args.radius.unwrap_or(db.bits() as u32);

    let mut results = Vec::with_capacity(queries.len());
    for (qid, query) in queries.codes().iter().enumerate() {
        let list = match &weights {
            Some(w) => search(query, &db, w, radius, args.limit)?,
            None => scan_hamming(query, &db, Some(args.limit), Some(radius))?,
        };
        results.push((qid, list));
    }

    match &args.out {
        Some(path) => {
            let mut file = std::io::BufWriter::new(fs::File::create(path)?);
            write_results_csv(&mut file, &results)?;
            file.flush().map_err(Error::Io)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_results_csv(&mut lock, &results)?;
        }
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> std::result::Result<(), CliError> {
    log_config(
        "eval",
        &[
            ("codes", args.codes.display().to_string()),
            ("queries", args.queries.display().to_string()),
            (
                "weights",
                args.weights
                    .as_ref()
                    .map_or("<none>".into(), |p| p.display().to_string()),
            ),
            ("code_type", args.code_type.clone()),
            ("out", args.out.display().to_string()),
        ],
    );
    let db = io::load_codes(&args.codes)?;
    let query_db = io::load_codes(&args.queries)?;
    let weights = args.weights.as_ref().map(io::load_weights).transpose()?;
    let queries: Vec<(BinaryCode, u32)> = query_db
        .codes()
        .iter()
        .cloned()
        .zip(query_db.labels().iter().copied())
        .collect();

    let report = evaluate_with(args.ap, &queries, &db, weights.as_ref())?
        .with_code_kind(args.code_type.clone());
    if report.skipped_queries > 0 {
        eprintln!(
            "bitrank eval: skipped {} queries with no matching database label",
            report.skipped_queries
        );
    }
    write_summary_csv(&args.out, &[SummaryRow::from_report(&report)])?;
    if let Some(pr) = &args.pr_out {
        write_pr_csv(pr, &report.avg_pr)?;
    }
    eprintln!("bitrank eval: mode={} MAP={}", report.meta.mode, report.map);
    Ok(())
}

fn run_pipeline(args: PipelineArgs, verbose: bool) -> std::result::Result<(), CliError> {
    let cfg = LearnerConfig {
        optimizer: args.optimizer,
        max_iters: args.max_iters,
        tol: args.tol,
        ..args.learner.config()
    };
    log_config(
        "pipeline",
        &[
            ("input", args.input.describe()),
            ("hash", args.hash.to_string()),
            ("bits", args.bits.to_string()),
            ("triplet_count", args.triplet_count.to_string()),
            ("query_fraction", args.query_fraction.to_string()),
            ("optimizer", cfg.optimizer.to_string()),
            ("c_xi", cfg.c_xi.to_string()),
            ("c_gamma", cfg.c_gamma.to_string()),
            ("eta", cfg.eta.to_string()),
            ("max_iters", cfg.max_iters.to_string()),
            ("tol", cfg.tol.to_string()),
            ("seed", args.seed.to_string()),
            ("out_dir", args.out_dir.display().to_string()),
        ],
    );
    let features = args.input.load()?;
    if features.labels().is_none() {
        return Err(CliError::Usage(
            "the pipeline needs labeled features (use --label-column or IDX input)".into(),
        ));
    }
    fs::create_dir_all(&args.out_dir).map_err(Error::Io)?;
    let out = |name: &str| args.out_dir.join(name);

    // stage seeds derived from the master seed so every stage is
    // independently reproducible
    let split_seed = args.seed;
    let hash_seed = args.seed.wrapping_add(1);
    let sample_seed = args.seed.wrapping_add(2);
    let query_seed = args.seed.wrapping_add(3);

    let (train_half, test_half) = features.split_even(split_seed);
    let model = match args.hash {
        HashKind::Lsh => train_lsh(&train_half, args.bits, hash_seed)?,
        HashKind::Itq => train_itq(&train_half, args.bits, args.iters, hash_seed)?.0,
    };
    io::save_model(out("model.bmdl"), &model)?;

    let train_db = crate::hashing::encode_database(&model, &train_half)?;
    let test_db = crate::hashing::encode_database(&model, &test_half)?;
    io::save_codes(out("train.bcod"), &train_db)?;
    io::save_codes(out("test.bcod"), &test_db)?;

    let batch = sample_triplets(&train_db, args.triplet_count, sample_seed)?;
    io::save_triplets(out("triplets.btrp"), &batch)?;

    let w0 = args.learner.initial_weights()?;
    let (weights, trace) = train_offline(&batch, &cfg, w0)?;
    io::save_weights(out("weights.bwgt"), &weights)?;
    if let Some(text) = &args.learner.text_out {
        io::save_weights_text(text, &weights)?;
    }
    if verbose {
        eprintln!(
            "bitrank pipeline: objective {} -> {} over {} iterations",
            trace.first().unwrap_or(&f64::NAN),
            trace.last().unwrap_or(&f64::NAN),
            trace.len().saturating_sub(1)
        );
    }

    let queries = sample_queries(&test_db, args.query_fraction, query_seed)?;
    let kind = args.hash.to_string();
    let plain = evaluate_with(ApVariant::AllPoint, &queries, &test_db, None)?
        .with_code_kind(kind.clone());
    let weighted = evaluate_with(ApVariant::AllPoint, &queries, &test_db, Some(&weights))?
        .with_code_kind(kind);
    write_pr_csv(out("pr_hamming.csv"), &plain.avg_pr)?;
    write_pr_csv(out("pr_weighted.csv"), &weighted.avg_pr)?;
    write_summary_csv(
        out("summary.csv"),
        &[
            SummaryRow::from_report(&plain),
            SummaryRow::from_report(&weighted),
        ],
    )?;
    eprintln!(
        "bitrank pipeline: MAP hamming={} weighted={} ({} queries, {} skipped)",
        plain.map,
        weighted.map,
        queries.len(),
        plain.skipped_queries
    );
    Ok(())
}
