//! Command implementations behind the `rebalance` binary: dataset
//! generation, resampling, training, benchmarking and figure emission.

pub mod svg;

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use rebalance::datagen::{generate, pca_project, GenParams};
use rebalance::eval::{format_table, rows_to_csv, run_benchmark, Method, SplitSpec};
use rebalance::io;
use rebalance::learn::{balanced_weights, fit_logistic, ClassWeights, FitOptions, Penalty};
use rebalance::resample::{
    borderline_smote, cnn_undersample, enn_undersample, nearmiss, random_oversample,
    random_undersample, renn_undersample, smote, smote_enn, smote_tomek, tomek_removal,
    BorderlineVariant, NearMissVariant, RatioTarget, TomekMode,
};
use rebalance::{Dataset, ResampleReport};

#[derive(Debug, Parser)]
#[command(
    name = "rebalance",
    version,
    about = "Resampling techniques and benchmarks for imbalanced binary classification"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV
    Gen(GenArgs),
    /// Resample a dataset CSV with a named method
    Resample(ResampleArgs),
    /// Fit a logistic regression model on a dataset CSV
    Train(TrainArgs),
    /// Run the method benchmark on a freshly generated dataset
    Bench(BenchArgs),
    /// Render a 2-D dataset (and optionally a model's decision regions) as SVG
    Plot(PlotArgs),
}

/// `minority,majority` class-fraction pair as a single flag value.
#[derive(Debug, Clone)]
struct WeightPair([f64; 2]);

fn parse_weights(s: &str) -> Result<WeightPair, String> {
    let parts: Result<Vec<f64>, _> = s.split(',').map(str::trim).map(str::parse).collect();
    match parts {
        Ok(v) if v.len() == 2 => Ok(WeightPair([v[0], v[1]])),
        Ok(v) => Err(format!("expected 2 comma-separated fractions, got {}", v.len())),
        Err(e) => Err(format!("bad weights {s:?}: {e}")),
    }
}

#[derive(Debug, Args, Clone)]
struct GenFlags {
    /// Number of points to generate
    #[arg(long, default_value_t = 10_000)]
    n_samples: usize,
    /// Class fractions as `minority,majority`
    #[arg(long, value_parser = parse_weights, default_value = "0.1,0.9")]
    weights: WeightPair,
    /// Half-side of the centroid hypercube
    #[arg(long, default_value_t = 1.2)]
    class_sep: f64,
    #[arg(long, default_value_t = 5)]
    n_features: usize,
    #[arg(long, default_value_t = 3)]
    n_informative: usize,
    #[arg(long, default_value_t = 1)]
    n_redundant: usize,
    #[arg(long, default_value_t = 1)]
    n_clusters_per_class: usize,
    /// Fraction of labels flipped uniformly at random
    #[arg(long, default_value_t = 0.01)]
    label_noise: f64,
}

impl GenFlags {
    fn to_params(&self, seed: u64) -> GenParams {
        GenParams {
            n_samples: self.n_samples,
            weights: self.weights.0,
            class_sep: self.class_sep,
            n_features: self.n_features,
            n_informative: self.n_informative,
            n_redundant: self.n_redundant,
            n_clusters_per_class: self.n_clusters_per_class,
            label_noise: self.label_noise,
            seed,
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    flags: GenFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Project onto this many principal components before writing
    #[arg(long)]
    pca: Option<usize>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ResampleArgs {
    /// Input dataset CSV
    #[arg(long = "in")]
    input: PathBuf,
    /// One of: random-under, nearmiss1, nearmiss2, nearmiss3, cnn, enn,
    /// renn, tomek, random-over, smote, bsmote1, bsmote2, smote-tomek,
    /// smote-enn
    #[arg(long)]
    method: String,
    /// Target minority/majority ratio for ratio-controlled methods
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    /// Neighbor count (NearMiss, ENN, SMOTE family)
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// ENN neighbor count in smote-enn
    #[arg(long, default_value_t = 5)]
    k_enn: usize,
    /// Neighborhood size for borderline danger detection
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration budget for renn
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Which side of each Tomek link to drop: majority or both
    #[arg(long, default_value = "majority")]
    tomek_mode: String,
    /// Output dataset CSV
    #[arg(long)]
    out: PathBuf,
    /// Optional path for the before/after count record
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Input dataset CSV
    #[arg(long = "in")]
    input: PathBuf,
    /// Penalty: l1 or l2
    #[arg(long, default_value = "l2")]
    penalty: String,
    /// Inverse-regularization constant C
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    /// Weight classes inversely to their sizes
    #[arg(long, default_value_t = false)]
    balanced: bool,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Output model path
    #[arg(long)]
    out_model: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// `all` or a comma-separated method list
    #[arg(long, default_value = "all")]
    methods: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run this many consecutive seeds and append all rows
    #[arg(long, default_value_t = 1)]
    sweep_seeds: u64,
    /// Optional CSV output path (full precision)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[command(flatten)]
    gen: GenFlags,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Input dataset CSV (must have exactly 2 features)
    #[arg(long)]
    data: PathBuf,
    /// Optional model file whose decision regions are shaded
    #[arg(long)]
    model: Option<PathBuf>,
    /// Prediction lattice resolution per axis
    #[arg(long, default_value_t = 200)]
    grid_res: usize,
    /// Output SVG path
    #[arg(long)]
    out: PathBuf,
}

/// Failures split by exit code: usage errors exit 1, runtime errors 2.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<rebalance::Error> for CliError {
    fn from(e: rebalance::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Writes via a temp file in the target directory plus an atomic rename.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut file = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| CliError::Runtime(format!("cannot create temp file: {e}")))?;
    std::io::Write::write_all(&mut file, contents.as_bytes())
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    file.persist(path)
        .map_err(|e| CliError::Runtime(format!("cannot persist {}: {e}", path.display())))?;
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let params = args.flags.to_params(args.seed);
    let mut dataset = generate(&params)?;
    if let Some(k) = args.pca {
        dataset = pca_project(&dataset, k)?;
    }
    write_atomic(&args.out, &io::dataset_to_csv(&dataset))?;
    let (majority, minority) = dataset.label_counts();
    println!(
        "wrote {} ({} points, {} majority / {} minority)",
        args.out.display(),
        dataset.n(),
        majority,
        minority
    );
    Ok(())
}

fn run_sampler(args: &ResampleArgs, dataset: &Dataset) -> Result<(Dataset, ResampleReport), CliError> {
    let ratio = || RatioTarget::new(args.ratio).map_err(|e| CliError::Usage(e.to_string()));
    let out = match args.method.as_str() {
        "random-under" => random_undersample(dataset, ratio()?, args.seed)?,
        "nearmiss1" => nearmiss(dataset, NearMissVariant::One, args.k, ratio()?, args.seed)?,
        "nearmiss2" => nearmiss(dataset, NearMissVariant::Two, args.k, ratio()?, args.seed)?,
        "nearmiss3" => nearmiss(dataset, NearMissVariant::Three, args.k, ratio()?, args.seed)?,
        "cnn" => cnn_undersample(dataset, args.seed)?,
        "enn" => enn_undersample(dataset, args.k)?,
        "renn" => renn_undersample(dataset, args.k, args.max_iters)?,
        "tomek" => {
            let mode = match args.tomek_mode.as_str() {
                "majority" => TomekMode::MajorityOnly,
                "both" => TomekMode::Both,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown --tomek-mode {other:?}; valid values: majority, both"
                    )))
                }
            };
            tomek_removal(dataset, mode)?
        }
        "random-over" => random_oversample(dataset, ratio()?, args.seed)?,
        "smote" => smote(dataset, args.k, ratio()?, args.seed)?,
        "bsmote1" => {
            borderline_smote(dataset, BorderlineVariant::One, args.m, args.k, ratio()?, args.seed)?
        }
        "bsmote2" => {
            borderline_smote(dataset, BorderlineVariant::Two, args.m, args.k, ratio()?, args.seed)?
        }
        "smote-tomek" => smote_tomek(dataset, args.k, ratio()?, args.seed)?,
        "smote-enn" => smote_enn(dataset, args.k, args.k_enn, ratio()?, args.seed)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown --method {other:?}; valid values: random-under, nearmiss1, nearmiss2, \
                 nearmiss3, cnn, enn, renn, tomek, random-over, smote, bsmote1, bsmote2, \
                 smote-tomek, smote-enn"
            )))
        }
    };
    Ok(out)
}

fn cmd_resample(args: &ResampleArgs) -> Result<(), CliError> {
    let dataset = io::read_dataset(&args.input)?;
    let (resampled, report) = run_sampler(args, &dataset)?;
    write_atomic(&args.out, &io::dataset_to_csv(&resampled))?;
    let record = io::report_to_string(&report);
    if let Some(path) = &args.report {
        write_atomic(path, &record)?;
    }
    print!("{record}");
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<(), CliError> {
    let dataset = io::read_dataset(&args.input)?;
    let penalty = Penalty::parse(&args.penalty).map_err(|e| CliError::Usage(e.to_string()))?;
    let class_weights = if args.balanced {
        balanced_weights(&dataset)?
    } else {
        ClassWeights::unit()
    };
    let options = FitOptions {
        penalty,
        strength: args.strength,
        class_weights,
        tol: args.tol,
        max_iters: args.max_iters,
    };
    let model = fit_logistic(&dataset, &options)?;
    write_atomic(&args.out_model, &io::model_to_string(&io::Model::Logistic(model)))?;
    println!("wrote {}", args.out_model.display());
    Ok(())
}

fn parse_methods(spec: &str) -> Result<Vec<Method>, CliError> {
    if spec == "all" {
        return Ok(Method::all());
    }
    spec.split(',')
        .map(|name| Method::parse(name.trim()).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let methods = parse_methods(&args.methods)?;
    let gen = args.gen.to_params(0);
    let spec = SplitSpec {
        train_fraction: args.train_fraction,
        folds: args.folds,
        seed: 0,
    };
    let mut rows = Vec::new();
    for offset in 0..args.sweep_seeds.max(1) {
        rows.extend(run_benchmark(&gen, &spec, &methods, args.seed + offset)?);
    }
    print!("{}", format_table(&rows));
    if let Some(path) = &args.out {
        write_atomic(path, &rows_to_csv(&rows))?;
    }
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<(), CliError> {
    let dataset = io::read_dataset(&args.data)?;
    let model = args.model.as_deref().map(io::read_model).transpose()?;
    let document = svg::render_plot(&dataset, model.as_ref(), args.grid_res)?;
    write_atomic(&args.out, &document)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Resample(args) => cmd_resample(args),
        Command::Train(args) => cmd_train(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

/// Parses and runs a full invocation; returns the process exit code
/// (0 success, 1 usage error, 2 runtime failure).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    match Cli::try_parse_from(args) {
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            0
        }
        Err(e) => {
            eprint!("{e}");
            1
        }
        Ok(cli) => match execute(cli) {
            Ok(()) => 0,
            Err(CliError::Usage(msg)) => {
                eprintln!("error: {msg}");
                1
            }
            Err(CliError::Runtime(msg)) => {
                eprintln!("error: {msg}");
                2
            }
        },
    }
}
