use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use closek_core::data::{
    gen_example1, gen_example2, gen_figure1, load_table, sample_split, write_table, Scenario,
    SplitSpec, Standardizer, DEFAULT_LABEL_COLUMN,
};
use closek_core::harness::{
    build_matrix, k_star_summary, parse_methods, run_protocol_with, simulate_sweep,
    write_bench_outputs, write_sweep_outputs, Corruption, Ledger, Method, ResultBlock, RunConfig,
    SWEEP_SPLITS,
};
use closek_core::optim::{write_trace_csv, zero_one_errors, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE};
use closek_core::{
    DatasetError, Error, IndividualLoss, LabeledDataset, Model, ModelFamily, Result,
};

const PRECEDENCE: &str =
    "Settings precedence: values in a --config file override command-line flags, \
which override built-in defaults. All randomness comes from the --seed* flags.";

#[derive(Parser, Debug)]
#[command(name = "closek", version, about = "Close-k aggregate loss experiments", after_help = PRECEDENCE)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset as CSV.
    Generate(GenerateArgs),
    /// Train one model on a dataset file, writing the model JSON and a per-epoch trace.
    Train(TrainArgs),
    /// Run the repeated-split benchmark over every dataset in a manifest directory.
    #[command(after_help = PRECEDENCE)]
    Bench(BenchArgs),
    /// Sweep a corruption level and report accuracy per method.
    #[command(after_help = PRECEDENCE)]
    Simulate(SimulateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Generator {
    Example1,
    Example2,
    Figure1,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Which construction to generate.
    #[arg(value_enum)]
    kind: Generator,
    /// Size parameter [default: 50 for example1, 1000 for example2, 2000 for figure1].
    #[arg(long)]
    n: Option<usize>,
    /// RNG seed (example1 is deterministic and ignores it).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Figure-1 scenario: easy, imbalance, imbalance_outlier or ambiguous.
    #[arg(long, default_value = "easy", value_parser = parse_via::<Scenario>)]
    scenario: Scenario,
    /// Position of the two example1 outliers; must exceed n.
    #[arg(long, default_value_t = 1000.0)]
    magnitude: f64,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Delimited dataset file with a label column.
    data: PathBuf,
    /// Aggregate: close, close_decay, atk, average or top.
    #[arg(long, default_value = "close_decay", value_parser = parse_via::<Method>)]
    method: Method,
    /// Individual loss: logistic or hinge.
    #[arg(long, default_value = "logistic", value_parser = parse_via::<IndividualLoss>)]
    loss: IndividualLoss,
    /// Model family: linear or residual_mlp.
    #[arg(long, default_value = "linear", value_parser = parse_via::<ModelFamily>)]
    model: ModelFamily,
    /// k for close/atk/top, or the final k* for close_decay.
    #[arg(long, visible_alias = "k-star", default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_LEARNING_RATE)]
    lr: f64,
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    epochs: usize,
    /// L2 penalty on non-bias parameters.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Model initialization seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train on a 50% split drawn with this seed and report test error on
    /// the 25% test part. Without it the whole file is used for training.
    #[arg(long)]
    split_seed: Option<u64>,
    /// Standardize features with training-part statistics.
    #[arg(long)]
    standardize: bool,
    #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
    label_column: String,
    #[arg(long, default_value = "model.json")]
    model_out: PathBuf,
    #[arg(long, default_value = "trace.csv")]
    trace_out: PathBuf,
}

/// Protocol settings shared by `bench` and `simulate`.
#[derive(Args, Debug)]
struct ProtocolArgs {
    /// Run-config file of `key = value` lines; overrides these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "linear", value_parser = parse_via::<ModelFamily>)]
    model: ModelFamily,
    #[arg(long, default_value = "logistic", value_parser = parse_via::<IndividualLoss>)]
    loss: IndividualLoss,
    /// Comma-separated methods.
    #[arg(long, default_value = "close,close_decay,atk,average,top")]
    methods: String,
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    epochs: usize,
    #[arg(long, default_value_t = DEFAULT_LEARNING_RATE)]
    lr: f64,
    /// Split i uses seed seed_base + i.
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Comma-separated λ grid [default: 1e-5,1e-4,...,1e5].
    #[arg(long)]
    lambdas: Option<String>,
    /// Comma-separated k grid [default: 10,100,... below n_train, plus n_train].
    #[arg(long)]
    ks: Option<String>,
    #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
    label_column: String,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Directory of .csv/.tsv/.txt dataset files. A `run.conf` file inside it
    /// is used as the run config when --config is not given.
    manifest: PathBuf,
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, default_value_t = closek_core::harness::DEFAULT_SPLITS)]
    splits: usize,
    #[arg(long, default_value = "bench_out")]
    out: PathBuf,
    /// Reuse completed (dataset, split, method) results from the ledger in --out.
    #[arg(long)]
    resume: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Base dataset file.
    base: PathBuf,
    /// outliers, imbalance or ambiguous.
    #[arg(long, value_parser = parse_via::<Corruption>)]
    corruption: Corruption,
    /// Comma-separated corruption levels.
    #[arg(long, default_value = "0,0.01,0.05,0.1")]
    levels: String,
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, default_value_t = SWEEP_SPLITS)]
    splits: usize,
    #[arg(long, default_value = "sweep_out")]
    out: PathBuf,
}

fn parse_via<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) => 2,
        Error::Io { .. } | Error::Serde(_) => 3,
        Error::NonFiniteScore(_) | Error::NonFiniteUpdate | Error::Divergence { .. } => 4,
        Error::Dataset(_) | Error::DimensionMismatch { .. } => 5,
    }
}

fn parse_list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Config(format!("{what}: cannot parse `{t}`")))
        })
        .collect()
}

fn describe(d: &LabeledDataset) -> String {
    format!(
        "n={} d={} positives={} negatives={}",
        d.len(),
        d.dim(),
        d.count_positive(),
        d.count_negative()
    )
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let data = match args.kind {
        Generator::Example1 => gen_example1(args.n.unwrap_or(50), args.magnitude)?,
        Generator::Example2 => gen_example2(args.n.unwrap_or(1000), args.seed)?,
        Generator::Figure1 => gen_figure1(args.scenario, args.n.unwrap_or(2000), args.seed)?,
    };
    write_table(&data, &args.out)?;
    println!("{}: {}", args.out.display(), describe(&data));
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let data = load_table(&args.data, &args.label_column)?;
    let (train_raw, test_raw) = match args.split_seed {
        Some(seed) => {
            let split = sample_split(data.len(), &SplitSpec::new(seed))?;
            (data.subset(&split.train)?, Some(data.subset(&split.test)?))
        }
        None => (data, None),
    };
    let (train_set, test_set) = if args.standardize {
        let scaler = Standardizer::fit(&train_raw);
        (
            scaler.apply(&train_raw)?,
            test_raw.map(|t| scaler.apply(&t)).transpose()?,
        )
    } else {
        (train_raw, test_raw)
    };

    let config = closek_core::TrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        lambda: args.lambda,
        seed: args.seed,
    };
    let objective = args.method.objective(args.k);
    let init = Model::init(args.model, train_set.dim(), args.seed);
    let outcome = closek_core::train(init, &train_set, args.loss, objective, &config)?;

    outcome.model.save_json(&args.model_out)?;
    write_trace_csv(&outcome.trace, &args.trace_out)?;

    let train_errors = zero_one_errors(&outcome.model, &train_set)?;
    println!("objective: {objective}");
    if let Some(m) = outcome.trace.last().and_then(|r| r.big_m) {
        println!("final M: {m}");
    }
    println!(
        "train 0-1 loss: {train_errors} of {} ({:.4})",
        train_set.len(),
        train_errors as f64 / train_set.len() as f64
    );
    if let Some(test) = &test_set {
        let test_errors = zero_one_errors(&outcome.model, test)?;
        println!(
            "test 0-1 loss: {test_errors} of {} ({:.4})",
            test.len(),
            test_errors as f64 / test.len() as f64
        );
    }
    Ok(())
}

fn run_config(
    p: &ProtocolArgs,
    splits: usize,
    fallback_config: Option<PathBuf>,
) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    c.protocol.model_family = p.model;
    c.protocol.loss = p.loss;
    c.protocol.methods = parse_methods(&p.methods).map_err(|e| Error::Config(e.to_string()))?;
    c.protocol.epochs = p.epochs;
    c.protocol.learning_rate = p.lr;
    c.protocol.seed_base = p.seed_base;
    c.protocol.splits = splits;
    if let Some(l) = &p.lambdas {
        c.protocol.lambdas = parse_list("--lambdas", l)?;
    }
    if let Some(k) = &p.ks {
        c.protocol.ks = Some(parse_list("--ks", k)?);
    }
    c.label_column = p.label_column.clone();
    match p.config.clone().or(fallback_config) {
        Some(path) => c.load(path),
        None => {
            c.protocol.validate()?;
            Ok(c)
        }
    }
}

fn set_jobs(jobs: usize) {
    if jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            log::warn!("could not size the worker pool: {e}");
        }
    }
}

const RUN_CONF: &str = "run.conf";

fn manifest_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Error::Io {
                path: dir.to_path_buf(),
                source: e,
            })?
            .path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if path.is_file() && matches!(ext, "csv" | "tsv" | "txt") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let fallback = Some(args.manifest.join(RUN_CONF)).filter(|p| p.is_file());
    let config = run_config(&args.protocol, args.splits, fallback)?;
    set_jobs(args.protocol.jobs);

    let files = manifest_files(&args.manifest)?;
    if files.is_empty() {
        return Err(Error::Config(format!(
            "manifest {} contains no dataset files",
            args.manifest.display()
        )));
    }
    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io {
        path: args.out.clone(),
        source: e,
    })?;
    let ledger = Ledger::open(
        args.out.join("ledger.jsonl"),
        &config.fingerprint(),
        args.resume,
    )?;
    if !ledger.is_empty() {
        log::info!("resuming with {} completed work items", ledger.len());
    }

    let mut results = Vec::new();
    let mut failures = 0usize;
    for path in &files {
        let outcome = load_table(path, &config.label_column).and_then(|mut d| {
            d.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| d.name.clone());
            log::info!("{}: {}", d.name, describe(&d));
            run_protocol_with(
                &d,
                &config.protocol,
                &closek_core::harness::identity,
                Some(&ledger),
            )
        });
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => {
                failures += 1;
                log::warn!("skipping {}: {e}", path.display());
            }
        }
    }
    if results.is_empty() {
        return Err(Error::Dataset(DatasetError::Empty));
    }

    let block = ResultBlock {
        model_family: config.protocol.model_family,
        loss: config.protocol.loss,
        matrix: build_matrix(&results)?,
        kstar: k_star_summary(&results),
        datasets: results,
    };
    write_bench_outputs(&args.out, std::slice::from_ref(&block))?;
    println!(
        "datasets: {} completed, {} failed; warnings: {failures}; output: {}",
        block.datasets.len(),
        failures,
        args.out.display()
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let config = run_config(&args.protocol, args.splits, None)?;
    set_jobs(args.protocol.jobs);
    let levels: Vec<f64> = parse_list("--levels", &args.levels)?;
    if levels.is_empty() {
        return Err(Error::Config("--levels is empty".into()));
    }
    let base = load_table(&args.base, &config.label_column)?;
    let rows = simulate_sweep(&base, args.corruption, &levels, &config.protocol)?;
    let path = write_sweep_outputs(&args.out, &rows)?;
    println!("{} rows written to {}", rows.len(), path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
