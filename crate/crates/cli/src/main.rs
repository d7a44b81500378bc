//! `trkm`: train, apply, tune and compare twin restricted kernel machines.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error
//! (unreadable or malformed input, incompatible model), 4 numerical failure
//! (singular system, undefined statistic).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trkm::benchmark::{self, analyze, BenchmarkConfig, ScoreTable};
use trkm::data::{load_csv, read_table, ColumnRef, CsvSchema};
use trkm::metrics::{accuracy, regression_errors};
use trkm::model::{Prediction, TrainedModel};
use trkm::model_file::{load_model, save_model, write_atomic};
use trkm::selection::{grid_search, paper_penalty_values, paper_sigma_values, split, GridSpec, KernelFamily, SplitSpec};
use trkm::stats::Better;
use trkm::{Error, Hyperparams, KernelSpec, ModelKind, Task};

#[derive(Parser)]
#[command(name = "trkm", version, about = "Twin restricted kernel machines")]
struct Cli {
    /// Seed for splits and folds (overrides a benchmark config's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on a whole CSV file and save it.
    Train(TrainArgs),
    /// Apply a saved model to a CSV file.
    Predict(PredictArgs),
    /// Cross-validated grid search, then refit the best cell.
    Gridsearch(GridArgs),
    /// Run every configured model on every configured dataset and compare them.
    Benchmark(BenchArgs),
    /// Ranks, Friedman test, critical difference and win-tie-loss for a score table.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Classify,
    Regress,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Classify => Task::Classify,
            TaskArg::Regress => Task::Regress,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Trkm,
    Rkm,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Gaussian,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum BetterArg {
    Higher,
    Lower,
}

impl From<BetterArg> for Better {
    fn from(b: BetterArg) -> Better {
        match b {
            BetterArg::Higher => Better::Higher,
            BetterArg::Lower => Better::Lower,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Label (classification) or target (regression) column: header name or
    /// zero-based index, negative counting from the end.
    #[arg(long = "label-col", visible_alias = "target-col", default_value = "-1", allow_hyphen_values = true)]
    label_col: String,
    /// The first line is a header.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

impl DataArgs {
    fn delimiter(&self) -> Result<u8, CliError> {
        u8::try_from(self.delimiter)
            .map_err(|_| CliError::usage(format!("delimiter {:?} is not a single byte", self.delimiter)))
    }

    fn schema(&self, task: Task) -> Result<CsvSchema, CliError> {
        Ok(CsvSchema {
            target: ColumnRef::parse(&self.label_col),
            task,
            delimiter: self.delimiter()?,
            header: self.header,
        })
    }
}

#[derive(Args)]
struct ModelSelect {
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Model family; the RKM baseline is classification only.
    #[arg(long, value_enum, default_value = "trkm")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "gaussian")]
    kernel: KernelArg,
    /// Fit on raw features instead of min-max scaled ones.
    #[arg(long)]
    no_normalize: bool,
}

impl ModelSelect {
    fn kind(&self) -> Result<ModelKind, CliError> {
        match (self.model, self.task) {
            (ModelArg::Trkm, t) => Ok(ModelKind::trkm(t.into())),
            (ModelArg::Rkm, TaskArg::Classify) => Ok(ModelKind::Rkm),
            (ModelArg::Rkm, TaskArg::Regress) => Err(CliError::usage("the RKM baseline supports classification only")),
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    select: ModelSelect,
    /// Penalty γ₁ (and γ₂ unless --gamma2 is given).
    #[arg(long)]
    gamma: f64,
    /// Regularization η₁ (and η₂ unless --eta2 is given).
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long)]
    eta2: Option<f64>,
    /// Gaussian kernel bandwidth.
    #[arg(long)]
    sigma: Option<f64>,
    /// Model file; defaults to model.trkm in the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by train or gridsearch.
    #[arg(long)]
    model: PathBuf,
    /// CSV file with the same feature columns as the training data.
    #[arg(long)]
    data: PathBuf,
    /// Column holding true labels or targets; when given, metrics are reported.
    #[arg(long = "label-col", visible_alias = "target-col", allow_hyphen_values = true)]
    label_col: Option<String>,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Predictions CSV; defaults to predictions.csv in the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    select: ModelSelect,
    /// γ values (comma separated); default 10^-5 … 10^5.
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    /// η values; default 10^-5 … 10^5.
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<f64>>,
    /// σ values; default 2^-5 … 2^5.
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Search γ₁, γ₂, η₁, η₂ independently.
    #[arg(long)]
    unequal_penalties: bool,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    /// Do not stratify the split by class.
    #[arg(long)]
    no_stratify: bool,
    /// Search and refit on the whole file; no held-out test part.
    #[arg(long)]
    no_split: bool,
}

#[derive(Args)]
struct StatsOptions {
    /// Nemenyi q_α; looked up for α = 0.05 when absent.
    #[arg(long)]
    q_alpha: Option<f64>,
    /// Critical value of F(p−1, (N−1)(p−1)) for the Friedman test.
    #[arg(long)]
    f_critical: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML file listing datasets and models.
    #[arg(long, required_unless_present = "scores_file", conflicts_with = "scores_file")]
    config: Option<PathBuf>,
    /// Skip training and analyse a score table (dataset,Model1,Model2,…).
    #[arg(long)]
    scores_file: Option<PathBuf>,
    /// Score direction for --scores-file.
    #[arg(long, value_enum, default_value = "higher")]
    better: BetterArg,
    #[command(flatten)]
    stats: StatsOptions,
}

#[derive(Args)]
struct StatsArgs {
    /// Score table: header dataset,Model1,Model2,… and one row per dataset.
    #[arg(long)]
    scores_file: PathBuf,
    #[arg(long, value_enum, default_value = "higher")]
    better: BetterArg,
    #[command(flatten)]
    stats: StatsOptions,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numeric() {
            4
        } else {
            match e {
                Error::Config(_) | Error::InvalidHyperparameter(_) => 2,
                _ => 3,
            }
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Train(a) => cmd_train(&cli, a),
        Command::Predict(a) => cmd_predict(&cli, a),
        Command::Gridsearch(a) => cmd_gridsearch(&cli, a),
        Command::Benchmark(a) => cmd_benchmark(&cli, a),
        Command::Stats(a) => cmd_stats(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn output_path(cli: &Cli, explicit: &Option<PathBuf>, default: &str) -> Result<PathBuf, CliError> {
    match explicit {
        Some(p) => Ok(p.clone()),
        None => {
            std::fs::create_dir_all(&cli.output_dir)
                .map_err(|e| CliError::from(Error::Io {
                    path: cli.output_dir.clone(),
                    source: e,
                }))?;
            Ok(cli.output_dir.join(default))
        }
    }
}

fn kernel(arg: KernelArg, sigma: Option<f64>) -> Result<KernelSpec, CliError> {
    match arg {
        KernelArg::Gaussian => {
            let s = sigma.ok_or_else(|| CliError::usage("--sigma is required for the Gaussian kernel"))?;
            Ok(KernelSpec::gaussian(s)?)
        }
        KernelArg::Linear => Ok(KernelSpec::Linear),
    }
}

fn fit_report(model: &TrainedModel) -> Result<String, CliError> {
    let mut out = String::new();
    writeln!(out, "model: {} ({})", model.kind(), model.model.hyperparams()).unwrap();
    for d in model.model.diagnostics()? {
        writeln!(out, "  {d}").unwrap();
    }
    Ok(out)
}

fn cmd_train(cli: &Cli, a: &TrainArgs) -> CliResult {
    let kind = a.select.kind()?;
    let hp = Hyperparams {
        gamma1: a.gamma,
        gamma2: a.gamma2.unwrap_or(a.gamma),
        eta1: a.eta,
        eta2: a.eta2.unwrap_or(a.eta),
        kernel: kernel(a.select.kernel, a.sigma)?,
    };
    let data = load_csv(&a.data.data, &a.data.schema(kind.task())?)?;
    let model = TrainedModel::fit(kind, &data, &hp, !a.select.no_normalize)?;
    let path = output_path(cli, &a.out, "model.trkm")?;
    save_model(&model, &path)?;
    print!("{}", fit_report(&model)?);
    let score = model.evaluate(&data)?;
    match kind.task() {
        Task::Classify => println!("training accuracy: {score:.4}%"),
        Task::Regress => println!("training RMSE: {score:.6}"),
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_predict(cli: &Cli, a: &PredictArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let delimiter = u8::try_from(a.delimiter)
        .map_err(|_| CliError::usage(format!("delimiter {:?} is not a single byte", a.delimiter)))?;
    let target = a.label_col.as_deref().map(ColumnRef::parse);
    let file = std::fs::File::open(&a.data).map_err(|e| {
        CliError::from(Error::Io {
            path: a.data.clone(),
            source: e,
        })
    })?;
    let table = read_table(file, target.as_ref(), delimiter, a.header)?;
    let prediction = model.predict(table.x.view())?;

    let mut csv = String::from("prediction\n");
    match &prediction {
        Prediction::Labels(l) => {
            for name in model.decode_labels(l) {
                csv.push_str(&name);
                csv.push('\n');
            }
        }
        Prediction::Values(v) => {
            for x in v {
                writeln!(csv, "{x}").unwrap();
            }
        }
    }
    let path = output_path(cli, &a.out, "predictions.csv")?;
    write_atomic(&path, csv.as_bytes())?;
    println!("wrote {} predictions to {}", prediction.len(), path.display());

    if let Some(raw) = &table.target {
        match &prediction {
            Prediction::Labels(l) => {
                let map = model.label_map.clone().unwrap_or_default();
                let truth = raw.labels(&map)?;
                println!("accuracy: {:.4}%", accuracy(&truth, l)?);
            }
            Prediction::Values(v) => {
                let truth = raw.numbers()?;
                let e = regression_errors(truth.as_slice().unwrap(), v.as_slice().unwrap())?;
                println!("RMSE: {:.6}", e.rmse);
                println!("MAE: {:.6}", e.mae);
                println!("Pos error: {:.6}", e.pos_error);
                println!("Neg error: {:.6}", e.neg_error);
            }
        }
    }
    Ok(())
}

fn grid_csv(result: &trkm::selection::GridResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["gamma1", "gamma2", "eta1", "eta2", "kernel", "sigma", "mean_score", "fold_scores", "error"])
        .expect("in-memory write");
    for c in &result.table {
        let p = &c.params;
        let (name, sigma) = match p.kernel {
            KernelSpec::Gaussian { sigma } => ("gaussian", sigma.to_string()),
            KernelSpec::Linear => ("linear", String::new()),
        };
        let folds: Vec<String> = c.fold_scores.iter().map(f64::to_string).collect();
        w.write_record([
            p.gamma1.to_string(),
            p.gamma2.to_string(),
            p.eta1.to_string(),
            p.eta2.to_string(),
            name.to_string(),
            sigma,
            c.mean_score.to_string(),
            folds.join(";"),
            c.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 fields")
}

fn cmd_gridsearch(cli: &Cli, a: &GridArgs) -> CliResult {
    let kind = a.select.kind()?;
    let normalize = !a.select.no_normalize;
    let seed = cli.seed.unwrap_or(0);
    let grid = GridSpec {
        gamma_values: a.gammas.clone().unwrap_or_else(paper_penalty_values),
        eta_values: a.etas.clone().unwrap_or_else(paper_penalty_values),
        sigma_values: a.sigmas.clone().unwrap_or_else(paper_sigma_values),
        equal_penalties: !a.unequal_penalties,
        folds: a.folds,
        kernel: match a.select.kernel {
            KernelArg::Gaussian => KernelFamily::Gaussian,
            KernelArg::Linear => KernelFamily::Linear,
        },
    };
    let data = load_csv(&a.data.data, &a.data.schema(kind.task())?)?;
    let (train, test) = if a.no_split {
        (data, None)
    } else {
        let spec = SplitSpec {
            train_fraction: a.train_fraction,
            seed,
            stratified: !a.no_stratify,
        };
        let (tr, te) = split(&data, &spec)?;
        (tr, Some(te))
    };
    let prepared = if normalize { train.normalize_minmax()? } else { train.clone() };
    let result = grid_search(&prepared, &grid, kind, seed)?;
    let model = TrainedModel::fit(kind, &train, &result.best_params, normalize)?;

    std::fs::create_dir_all(&cli.output_dir).map_err(|e| {
        CliError::from(Error::Io {
            path: cli.output_dir.clone(),
            source: e,
        })
    })?;
    write_atomic(&cli.output_dir.join("grid.csv"), grid_csv(&result).as_bytes())?;
    let model_path = cli.output_dir.join("model.trkm");
    save_model(&model, &model_path)?;

    let metric = match kind.task() {
        Task::Classify => "accuracy (%)",
        Task::Regress => "RMSE",
    };
    println!("cells: {} ({} failed)", result.table.len(), result.failed_cells());
    println!("best: {}", result.best_params);
    println!("best mean CV {metric}: {:.6}", result.best_cv_score);
    let test_score = test.as_ref().map(|t| model.evaluate(t)).transpose()?;
    if let Some(score) = test_score {
        println!("test {metric}: {score:.6}");
    }
    print!("{}", fit_report(&model)?);
    let summary = serde_json::json!({
        "kind": kind,
        "cells": result.table.len(),
        "failed_cells": result.failed_cells(),
        "best_index": result.best_index,
        "best_params": result.best_params,
        "best_cv_score": result.best_cv_score,
        "test_score": test_score,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("serializable");
    text.push('\n');
    write_atomic(&cli.output_dir.join("grid-summary.json"), text.as_bytes())?;
    println!("wrote grid.csv, grid-summary.json and model.trkm to {}", cli.output_dir.display());
    Ok(())
}

fn analyse_scores(cli: &Cli, path: &Path, better: Better, opts: &StatsOptions) -> CliResult {
    let table = ScoreTable::load(path)?;
    let analysis = analyze(&table, better, opts.q_alpha, opts.f_critical)?;
    benchmark::write_outputs(&cli.output_dir, &analysis, None)?;
    print!("{}", benchmark::report_text(&analysis, None));
    Ok(())
}

fn cmd_benchmark(cli: &Cli, a: &BenchArgs) -> CliResult {
    if let Some(scores) = &a.scores_file {
        return analyse_scores(cli, scores, a.better.into(), &a.stats);
    }
    let path = a.config.as_ref().expect("clap enforces --config or --scores-file");
    let mut cfg = BenchmarkConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if a.stats.q_alpha.is_some() {
        cfg.q_alpha = a.stats.q_alpha;
    }
    if a.stats.f_critical.is_some() {
        cfg.f_critical = a.stats.f_critical;
    }
    let result = benchmark::run(&cfg)?;
    for name in result.failed_datasets() {
        eprintln!("warning: dataset {name} failed and is excluded from the comparison");
    }
    let table = result.score_table();
    if table.datasets.is_empty() {
        benchmark::write_scores(&cli.output_dir, &result)?;
        eprintln!("warning: no dataset completed; only scores.csv was written");
        return Ok(());
    }
    let analysis = analyze(&table, result.better(), cfg.q_alpha, cfg.f_critical)?;
    benchmark::write_outputs(&cli.output_dir, &analysis, Some(&result))?;
    print!("{}", benchmark::report_text(&analysis, Some(&result)));
    Ok(())
}

fn cmd_stats(cli: &Cli, a: &StatsArgs) -> CliResult {
    analyse_scores(cli, &a.scores_file, a.better.into(), &a.stats)
}
