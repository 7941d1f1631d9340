//! `evida`: fit, predict and benchmark evidence-maximized Bayesian discriminant
//! classifiers.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use evida_core::datagen::{
    landscape_params, load_csv, read_features, sample_dataset, write_csv, CsvOptions, LabelColumn,
    SyntheticCaseSpec,
};
use evida_core::evidence::Variant;
use evida_core::harness::{
    loocv_grid, overfit_curve, run_real_benchmark, run_synthetic_benchmark, LoocvMode,
    OverfitConfig, RealBenchConfig, SyntheticBenchConfig,
};
use evida_core::model_io::{load_model, save_model};
use evida_core::numerics::{stream_id, RngStream};
use evida_core::predictor::{fit, FittedModel};
use evida_core::Error;
use nalgebra::DVector;
use serde::Serialize;
use serde_json::json;

use report::{emit, render, CsvRows, Format, Meta, Report};

const DEFAULT_SEED: u64 = 20_170_605;

#[derive(Parser, Debug)]
#[command(
    name = "evida",
    version,
    about = "Bayesian Gaussian discriminant classifiers with evidence-maximized hyperparameters"
)]
struct Cli {
    /// Maximum number of worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model to a labeled CSV file and save it.
    Fit(FitArgs),
    /// Predict class probabilities for the rows of a CSV file.
    Predict(PredictArgs),
    /// Error rates on the synthetic benchmark cases.
    BenchSynthetic(BenchSyntheticArgs),
    /// Error rates over repeated stratified splits of a labeled CSV file.
    BenchReal(BenchRealArgs),
    /// LOOCV accuracy over a grid of (k1, k2) for a two-class dataset.
    LoocvGrid(LoocvGridArgs),
    /// Training and LOOCV accuracy versus dimension.
    OverfitCurve(OverfitArgs),
    /// Write one synthetic training set as CSV.
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Serialize)]
struct CsvArgs {
    /// Input CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Label column: 0-based index or header name.
    #[arg(long, default_value = "0")]
    label_column: String,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// The first row is a header.
    #[arg(long)]
    header: bool,
}

impl CsvArgs {
    fn options(&self) -> anyhow::Result<CsvOptions> {
        Ok(CsvOptions {
            label_column: parse_label_column(&self.label_column),
            delimiter: delimiter_byte(self.delimiter)?,
            header: self.header,
        })
    }

    fn load(&self) -> anyhow::Result<evida_core::stats::LabeledDataset> {
        Ok(load_csv(&self.data, &self.options()?)?)
    }
}

fn parse_label_column(s: &str) -> LabelColumn {
    match s.parse::<usize>() {
        Ok(i) => LabelColumn::Index(i),
        Err(_) => LabelColumn::Name(s.to_string()),
    }
}

fn delimiter_byte(c: char) -> anyhow::Result<u8> {
    u8::try_from(c).map_err(|_| {
        anyhow::Error::new(Error::InvalidArgument(format!(
            "delimiter {c:?} is not ASCII"
        )))
    })
}

#[derive(Args, Debug, Serialize)]
struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    /// Hyperparameters from the full data, fixed across folds.
    FixedHyper,
    /// Re-solve the held-out sample's class in every fold.
    Refit,
}

impl From<ModeArg> for LoocvMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FixedHyper => LoocvMode::FixedHyper,
            ModeArg::Refit => LoocvMode::Refit,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    #[command(flatten)]
    csv: CsvArgs,
    #[arg(long, value_parser = parse_variant, default_value = "B")]
    variant: Variant,
    /// Where to save the fitted model.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// CSV file of query rows.
    #[arg(long)]
    data: PathBuf,
    /// Label column to skip (and score against), as 0-based index or header
    /// name. Without it every column is a feature.
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    #[arg(long)]
    header: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct BenchSyntheticArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,7,8")]
    cases: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "10,50")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 13)]
    n_train: usize,
    #[arg(long, default_value_t = 33)]
    n_valid: usize,
    #[arg(long, default_value_t = 100)]
    realizations: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_variant, default_value = "A,B")]
    variant: Vec<Variant>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Record wall-clock seconds (makes reports run-dependent).
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct BenchRealArgs {
    #[command(flatten)]
    csv: CsvArgs,
    /// Dataset name for the report (default: file stem).
    #[arg(long)]
    name: Option<String>,
    /// Fraction of each class used for training.
    #[arg(long, default_value_t = 0.1)]
    fraction: f64,
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_variant, default_value = "A,B")]
    variant: Vec<Variant>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Setup {
    /// Shared identity covariance.
    Uncorrelated,
    /// Shared Toeplitz covariance with first row (d, d-1, ..., 1).
    Correlated,
}

#[derive(Args, Debug, Serialize)]
struct LoocvGridArgs {
    /// Labeled two-class CSV file; omit to sample a synthetic setup.
    #[arg(long, conflicts_with = "setup")]
    data: Option<PathBuf>,
    #[arg(long, default_value = "0")]
    label_column: String,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    #[arg(long)]
    header: bool,
    /// Synthetic two-class setup (means 0 and (2.5, 0, ..., 0)).
    #[arg(long, value_enum)]
    setup: Option<Setup>,
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 50)]
    n_per_class: usize,
    /// Grid points per axis.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    #[arg(long, value_parser = parse_variant, default_value = "A")]
    variant: Variant,
    #[arg(long, value_enum, default_value_t = ModeArg::FixedHyper)]
    loocv_mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct OverfitArgs {
    #[arg(long, default_value_t = 1)]
    case: u32,
    #[arg(long, value_delimiter = ',', default_value = "10,25,50,75,100,150")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 13)]
    n_per_class: usize,
    #[arg(long, default_value_t = 250)]
    realizations: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_variant, default_value = "A,B")]
    variant: Vec<Variant>,
    #[arg(long, value_enum, default_value_t = ModeArg::FixedHyper)]
    loocv_mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    case: u32,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 13)]
    n_per_class: usize,
    /// Realization index; the same index reproduces the benchmark's training set.
    #[arg(long, default_value_t = 0)]
    realization: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_report<T: Serialize + CsvRows>(
    command: &'static str,
    seed: Option<u64>,
    flags: impl Serialize,
    experiments: Vec<T>,
    output: &OutputArgs,
) -> anyhow::Result<()> {
    let report = Report {
        meta: Meta::new(command, seed, flags),
        experiments,
    };
    emit(&render(&report, output.format)?, output.out.as_deref())
}

#[derive(Debug, Serialize)]
struct ClassSummary {
    class: usize,
    label: Option<String>,
    n: usize,
    p: f64,
    k: f64,
    r: f64,
    gamma0: f64,
    solution: evida_core::evidence::ClassDiagnostics,
}

#[derive(Debug, Serialize)]
struct FitSummary {
    variant: Variant,
    d: usize,
    n: usize,
    model: PathBuf,
    classes: Vec<ClassSummary>,
}

impl CsvRows for FitSummary {
    fn header() -> Vec<&'static str> {
        vec![
            "class",
            "label",
            "n",
            "p",
            "k",
            "r",
            "gamma0",
            "solution",
            "objective",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.classes
            .iter()
            .map(|c| {
                vec![
                    c.class.to_string(),
                    c.label.clone().unwrap_or_default(),
                    c.n.to_string(),
                    c.p.to_string(),
                    c.k.to_string(),
                    c.r.to_string(),
                    c.gamma0.to_string(),
                    format!("{:?}", c.solution.kind).to_lowercase(),
                    c.solution.objective.to_string(),
                ]
            })
            .collect()
    }
}

fn cmd_fit(args: &FitArgs) -> anyhow::Result<()> {
    let data = args.csv.load()?;
    let model = fit(&data, args.variant)?;
    save_model(&model, &args.model).with_context(|| format!("saving {}", args.model.display()))?;
    let h = &model.hyper;
    let classes = (0..model.n_classes())
        .map(|z| ClassSummary {
            class: z + 1,
            label: model.label_names.as_ref().map(|l| l[z].clone()),
            n: model.stats[z].n,
            p: h.p[z],
            k: h.k[z],
            r: h.r[z],
            gamma0: h.gamma0[z],
            solution: h.diagnostics[z].clone(),
        })
        .collect();
    let summary = FitSummary {
        variant: args.variant,
        d: model.dim(),
        n: data.len(),
        model: args.model.clone(),
        classes,
    };
    write_report("fit", None, args, vec![summary], &args.output)
}

#[derive(Debug, Serialize)]
struct Prediction {
    row: usize,
    predicted: String,
    actual: Option<String>,
    probabilities: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct PredictionSet {
    classes: Vec<String>,
    accuracy: Option<f64>,
    predictions: Vec<Prediction>,
}

impl CsvRows for PredictionSet {
    fn header() -> Vec<&'static str> {
        vec!["row", "predicted", "actual", "probabilities"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.predictions
            .iter()
            .map(|p| {
                vec![
                    p.row.to_string(),
                    p.predicted.clone(),
                    p.actual.clone().unwrap_or_default(),
                    p.probabilities
                        .iter()
                        .map(f64::to_string)
                        .collect::<Vec<_>>()
                        .join(";"),
                ]
            })
            .collect()
    }
}

fn class_names(model: &FittedModel) -> Vec<String> {
    match &model.label_names {
        Some(names) => names.clone(),
        None => (1..=model.n_classes()).map(|z| z.to_string()).collect(),
    }
}

fn cmd_predict(args: &PredictArgs) -> anyhow::Result<()> {
    let model =
        load_model(&args.model).with_context(|| format!("loading {}", args.model.display()))?;
    let delimiter = delimiter_byte(args.delimiter)?;
    let (x, actual): (nalgebra::DMatrix<f64>, Option<Vec<String>>) = match &args.label_column {
        Some(col) => {
            let opts = CsvOptions {
                label_column: parse_label_column(col),
                delimiter,
                header: args.header,
            };
            let data = load_csv(&args.data, &opts)?;
            let names = data.label_names.clone().unwrap_or_default();
            let actual = data.y.iter().map(|&z| names[z - 1].clone()).collect();
            (data.x, Some(actual))
        }
        None => {
            let file = std::fs::File::open(&args.data)
                .map_err(|e| Error::Io(format!("{}: {e}", args.data.display())))?;
            (read_features(file, delimiter, args.header, None)?, None)
        }
    };
    let classes = class_names(&model);
    let mut predictions = Vec::with_capacity(x.nrows());
    for i in 0..x.nrows() {
        let row = DVector::from_iterator(x.ncols(), x.row(i).iter().cloned());
        let dist = model.predict(&row)?;
        predictions.push(Prediction {
            row: i + 1,
            predicted: classes[dist.argmax() - 1].clone(),
            actual: actual.as_ref().map(|a| a[i].clone()),
            probabilities: dist.probabilities,
        });
    }
    let accuracy = actual.as_ref().map(|_| {
        let hits = predictions
            .iter()
            .filter(|p| p.actual.as_deref() == Some(p.predicted.as_str()))
            .count();
        hits as f64 / predictions.len() as f64
    });
    let set = PredictionSet {
        classes,
        accuracy,
        predictions,
    };
    write_report("predict", None, args, vec![set], &args.output)
}

fn cmd_bench_synthetic(args: &BenchSyntheticArgs) -> anyhow::Result<()> {
    let cfg = SyntheticBenchConfig {
        cases: args.cases.clone(),
        dims: args.dims.clone(),
        n_train_per_class: args.n_train,
        n_valid_per_class: args.n_valid,
        realizations: args.realizations,
        variants: args.variant.clone(),
        seed: args.seed,
        timings: args.timings,
    };
    let results = run_synthetic_benchmark(&cfg)?;
    write_report(
        "bench-synthetic",
        Some(args.seed),
        args,
        results,
        &args.output,
    )
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into())
}

fn cmd_bench_real(args: &BenchRealArgs) -> anyhow::Result<()> {
    let data = args.csv.load()?;
    let cfg = RealBenchConfig {
        dataset: args
            .name
            .clone()
            .unwrap_or_else(|| file_stem(&args.csv.data)),
        train_fraction: args.fraction,
        repeats: args.repeats,
        variants: args.variant.clone(),
        seed: args.seed,
        timings: args.timings,
    };
    let results = run_real_benchmark(&data, &cfg)?;
    write_report("bench-real", Some(args.seed), args, results, &args.output)
}

fn cmd_loocv_grid(args: &LoocvGridArgs) -> anyhow::Result<()> {
    let data = match (&args.data, args.setup) {
        (Some(path), _) => {
            let opts = CsvOptions {
                label_column: parse_label_column(&args.label_column),
                delimiter: delimiter_byte(args.delimiter)?,
                header: args.header,
            };
            load_csv(path, &opts)?
        }
        (None, Some(setup)) => {
            let params = landscape_params(args.d, matches!(setup, Setup::Correlated))?;
            let mut rng = RngStream::new(args.seed, stream_id(&[args.d as u64, setup as u64]));
            sample_dataset(&params, &[args.n_per_class; 2], &mut rng)?
        }
        (None, None) => {
            return Err(Error::InvalidArgument("give either --data or --setup".into()).into());
        }
    };
    let surface = loocv_grid(&data, args.grid, args.variant, args.loocv_mode.into())?;
    write_report(
        "loocv-grid",
        Some(args.seed),
        args,
        vec![surface],
        &args.output,
    )
}

fn cmd_overfit(args: &OverfitArgs) -> anyhow::Result<()> {
    let cfg = OverfitConfig {
        case_id: args.case,
        dims: args.dims.clone(),
        n_per_class: args.n_per_class,
        realizations: args.realizations,
        variants: args.variant.clone(),
        seed: args.seed,
        mode: args.loocv_mode.into(),
    };
    let points = overfit_curve(&cfg)?;
    write_report("overfit-curve", Some(args.seed), args, points, &args.output)
}

fn cmd_generate(args: &GenerateArgs) -> anyhow::Result<()> {
    let spec = SyntheticCaseSpec {
        case_id: args.case,
        d: args.d,
        n_train_per_class: args.n_per_class,
        n_valid_per_class: 1,
        seed: args.seed,
    };
    let (train, _) = spec.realize(args.realization)?;
    let mut buf = Vec::new();
    write_csv(&train, &mut buf)?;
    emit(&buf, args.out.as_deref())
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    match err.downcast_ref::<Error>() {
        Some(Error::Domain { .. }) => "domain",
        Some(Error::NoConvergence { .. }) => "no_convergence",
        Some(Error::NotPsd { .. }) => "not_psd",
        Some(Error::DimensionMismatch { .. }) => "dimension_mismatch",
        Some(Error::EmptyClass { .. }) => "empty_class",
        Some(Error::DowndateEmptiesClass) => "downdate_empties_class",
        Some(Error::SolverFailed { .. }) => "solver_failed",
        Some(Error::InvalidCase(_)) => "invalid_case",
        Some(Error::InvalidArgument(_)) => "invalid_argument",
        Some(Error::Parse { .. }) => "parse",
        Some(Error::Io(_)) => "io",
        None => "other",
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()).into());
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build()?;
    pool.install(|| match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::BenchSynthetic(a) => cmd_bench_synthetic(a),
        Command::BenchReal(a) => cmd_bench_real(a),
        Command::LoocvGrid(a) => cmd_loocv_grid(a),
        Command::OverfitCurve(a) => cmd_overfit(a),
        Command::Generate(a) => cmd_generate(a),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let body = json!({
                "error": {
                    "kind": error_kind(&err),
                    "message": format!("{err:#}"),
                }
            });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
