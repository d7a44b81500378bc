//! Dataset × model benchmark runs and their statistical reports.
//!
//! A run splits each dataset, tunes each model on the training part (or uses
//! fixed hyperparameters), scores it once on the test part, and then compares
//! the models over all datasets with average ranks, the Friedman test, the
//! Nemenyi critical difference and pairwise win-tie-loss counts. The analysis
//! can also be run on a score table read from CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::{load_csv, ColumnRef, CsvSchema, Dataset};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::model::{Hyperparams, ModelKind, TrainedModel};
use crate::model_file::write_atomic;
use crate::selection::{grid_search, paper_penalty_values, paper_sigma_values, split, GridSpec, KernelFamily, SplitSpec};
use crate::stats::{
    friedman_test, nemenyi_cd, pairwise_win_tie_loss, q_alpha_005, rank_models, sign_test_threshold, Better,
    FriedmanReport, RankTable,
};
use crate::Task;

pub enum ModelParams {
    Fixed(Hyperparams),
    Grid(GridSpec),
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub params: Hyperparams,
    /// Best mean cross-validation score, when a grid was searched.
    pub cv_score: Option<f64>,
    /// Accuracy (%) or RMSE on the held-out split.
    pub test_score: f64,
    pub model: TrainedModel,
}

/// Split, tune on the training part, refit on all of it, score on the test part.
/// Scaling is fitted on the training part only.
pub fn evaluate(
    data: &Dataset,
    kind: ModelKind,
    params: &ModelParams,
    split_spec: &SplitSpec,
    normalize: bool,
) -> Result<Evaluation> {
    let (train, test) = split(data, split_spec)?;
    let (params, cv_score) = match params {
        ModelParams::Fixed(hp) => (*hp, None),
        ModelParams::Grid(grid) => {
            let prepared = if normalize { train.normalize_minmax()? } else { train.clone() };
            let result = grid_search(&prepared, grid, kind, split_spec.seed)?;
            (result.best_params, Some(result.best_cv_score))
        }
    };
    let model = TrainedModel::fit(kind, &train, &params, normalize)?;
    let test_score = model.evaluate(&test)?;
    Ok(Evaluation {
        params,
        cv_score,
        test_score,
        model,
    })
}

fn default_true() -> bool {
    true
}

fn default_delimiter() -> String {
    ",".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub path: PathBuf,
    pub task: Task,
    /// Label or target column, by header name or zero-based index.
    pub target: ColumnRef,
    #[serde(default)]
    pub header: bool,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
}

impl DatasetConfig {
    pub fn schema(&self) -> Result<CsvSchema> {
        let delimiter = match self.delimiter.as_bytes() {
            [b] => *b,
            _ => {
                return Err(Error::Config(format!(
                    "dataset {}: delimiter must be one byte, got {:?}",
                    self.name, self.delimiter
                )))
            }
        };
        Ok(CsvSchema {
            target: self.target.clone(),
            task: self.task,
            delimiter,
            header: self.header,
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub gamma: Option<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    pub kernel: Option<KernelFamily>,
    #[serde(default = "default_true")]
    pub equal_penalties: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub kind: ModelKind,
    pub gamma: Option<f64>,
    pub gamma2: Option<f64>,
    pub eta: Option<f64>,
    pub eta2: Option<f64>,
    pub sigma: Option<f64>,
    pub kernel: Option<KernelFamily>,
    pub grid: Option<GridConfig>,
}

impl ModelConfig {
    pub fn params(&self, folds: usize) -> Result<ModelParams> {
        let fixed = [self.gamma, self.gamma2, self.eta, self.eta2, self.sigma];
        if let Some(g) = &self.grid {
            if fixed.iter().any(Option::is_some) || self.kernel.is_some() {
                return Err(Error::Config(format!(
                    "model {}: give either fixed hyperparameters or a grid, not both",
                    self.name
                )));
            }
            let grid = GridSpec {
                gamma_values: g.gamma.clone().unwrap_or_else(paper_penalty_values),
                eta_values: g.eta.clone().unwrap_or_else(paper_penalty_values),
                sigma_values: g.sigma.clone().unwrap_or_else(paper_sigma_values),
                equal_penalties: g.equal_penalties,
                folds,
                kernel: g.kernel.unwrap_or(KernelFamily::Gaussian),
            };
            grid.validate()?;
            return Ok(ModelParams::Grid(grid));
        }
        let missing = |what: &str| Error::Config(format!("model {}: missing {what}", self.name));
        let gamma = self.gamma.ok_or_else(|| missing("gamma"))?;
        let eta = self.eta.ok_or_else(|| missing("eta"))?;
        let kernel = match self.kernel.unwrap_or(KernelFamily::Gaussian) {
            KernelFamily::Gaussian => KernelSpec::gaussian(self.sigma.ok_or_else(|| missing("sigma"))?)?,
            KernelFamily::Linear => KernelSpec::Linear,
        };
        Ok(ModelParams::Fixed(Hyperparams {
            gamma1: gamma,
            gamma2: self.gamma2.unwrap_or(gamma),
            eta1: eta,
            eta2: self.eta2.unwrap_or(eta),
            kernel,
        }))
    }
}

fn default_folds() -> usize {
    5
}

fn default_fraction() -> f64 {
    0.7
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_true")]
    pub stratified: bool,
    #[serde(default = "default_true")]
    pub normalize: bool,
    /// Nemenyi q_α; looked up for α = 0.05 when absent.
    pub q_alpha: Option<f64>,
    /// Critical value of the F distribution for the Friedman test.
    pub f_critical: Option<f64>,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetConfig>,
    #[serde(rename = "model")]
    pub models: Vec<ModelConfig>,
}

impl BenchmarkConfig {
    /// Parse TOML; relative dataset paths are taken relative to `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: BenchmarkConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for d in &mut cfg.datasets {
            if d.path.is_relative() {
                d.path = base_dir.join(&d.path);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn task(&self) -> Task {
        self.datasets[0].task
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() || self.models.is_empty() {
            return Err(Error::Config("need at least one dataset and one model".into()));
        }
        let task = self.task();
        if let Some(d) = self.datasets.iter().find(|d| d.task != task) {
            return Err(Error::Config(format!("dataset {} is a {} task, expected {task}", d.name, d.task)));
        }
        if let Some(m) = self.models.iter().find(|m| m.kind.task() != task) {
            return Err(Error::Config(format!("model {} ({}) cannot run on {task} datasets", m.name, m.kind)));
        }
        for d in &self.datasets {
            d.schema()?;
        }
        for m in &self.models {
            m.params(self.folds)?;
        }
        SplitSpec {
            train_fraction: self.train_fraction,
            seed: self.seed,
            stratified: self.stratified,
        }
        .validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub score: Option<f64>,
    pub params: Option<Hyperparams>,
    pub cv_score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub name: String,
    /// Set when the dataset could not be loaded or split, or a model failed on it.
    pub failure: Option<String>,
    pub cells: Vec<CellOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub task: Task,
    pub models: Vec<String>,
    pub rows: Vec<DatasetRow>,
}

impl BenchmarkResult {
    pub fn better(&self) -> Better {
        match self.task {
            Task::Classify => Better::Higher,
            Task::Regress => Better::Lower,
        }
    }

    /// Complete rows only.
    pub fn score_table(&self) -> ScoreTable {
        let ok: Vec<&DatasetRow> = self.rows.iter().filter(|r| r.failure.is_none()).collect();
        let mut scores = Array2::zeros((ok.len(), self.models.len()));
        for (i, r) in ok.iter().enumerate() {
            for (j, c) in r.cells.iter().enumerate() {
                scores[[i, j]] = c.score.expect("complete row");
            }
        }
        ScoreTable {
            datasets: ok.iter().map(|r| r.name.clone()).collect(),
            models: self.models.clone(),
            scores,
        }
    }

    pub fn failed_datasets(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.failure.is_some())
            .map(|r| r.name.as_str())
            .collect()
    }
}

/// Run every model on every dataset. Failures are recorded in the row and
/// the run continues.
pub fn run(cfg: &BenchmarkConfig) -> Result<BenchmarkResult> {
    cfg.validate()?;
    let split_spec = SplitSpec {
        train_fraction: cfg.train_fraction,
        seed: cfg.seed,
        stratified: cfg.stratified,
    };
    let params: Vec<ModelParams> = cfg.models.iter().map(|m| m.params(cfg.folds)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(cfg.datasets.len());
    for d in &cfg.datasets {
        let loaded = d.schema().and_then(|s| load_csv(&d.path, &s));
        let data = match loaded {
            Ok(data) => data,
            Err(e) => {
                rows.push(DatasetRow {
                    name: d.name.clone(),
                    failure: Some(e.to_string()),
                    cells: Vec::new(),
                });
                continue;
            }
        };
        let mut cells = Vec::with_capacity(cfg.models.len());
        let mut failure = None;
        for (m, p) in cfg.models.iter().zip(&params) {
            match evaluate(&data, m.kind, p, &split_spec, cfg.normalize) {
                Ok(ev) => cells.push(CellOutcome {
                    score: Some(ev.test_score),
                    params: Some(ev.params),
                    cv_score: ev.cv_score,
                    error: None,
                }),
                Err(e) => {
                    failure.get_or_insert_with(|| format!("model {}: {e}", m.name));
                    cells.push(CellOutcome {
                        score: None,
                        params: None,
                        cv_score: None,
                        error: Some(e.to_string()),
                    });
                }
            }
        }
        rows.push(DatasetRow {
            name: d.name.clone(),
            failure,
            cells,
        });
    }
    Ok(BenchmarkResult {
        task: cfg.task(),
        models: cfg.models.iter().map(|m| m.name.clone()).collect(),
        rows,
    })
}

/// Scores of p models (columns) on N datasets (rows).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub datasets: Vec<String>,
    pub models: Vec<String>,
    pub scores: Array2<f64>,
}

impl ScoreTable {
    /// CSV with a header `dataset,Model1,Model2,…` and one row per dataset.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Parse {
            row: 1,
            column: 0,
            message: e.to_string(),
        })?;
        if header.len() < 3 {
            return Err(Error::Config("score table needs a dataset column and at least two models".into()));
        }
        let models: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut datasets = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                row,
                column: 0,
                message: e.to_string(),
            })?;
            datasets.push(rec[0].to_string());
            for (j, field) in rec.iter().enumerate().skip(1) {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    row,
                    column: j + 1,
                    message: format!("non-numeric score {field:?}"),
                })?;
                values.push(v);
            }
        }
        if datasets.is_empty() {
            return Err(Error::EmptyInput("score table has no rows".into()));
        }
        let scores = Array2::from_shape_vec((datasets.len(), models.len()), values)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Ok(ScoreTable {
            datasets,
            models,
            scores,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseEntry {
    pub model: String,
    pub against: String,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub better: Better,
    pub datasets: Vec<String>,
    pub models: Vec<String>,
    pub ranks: RankTable,
    pub friedman: Option<FriedmanReport>,
    pub friedman_error: Option<String>,
    pub q_alpha: Option<f64>,
    pub critical_difference: Option<f64>,
    pub sign_test_threshold: f64,
    pub win_tie_loss: Vec<PairwiseEntry>,
}

pub fn analyze(table: &ScoreTable, better: Better, q_alpha: Option<f64>, f_critical: Option<f64>) -> Result<Analysis> {
    let ranks = rank_models(table.scores.view(), better)?;
    let (n, p) = (ranks.n_datasets(), ranks.n_models());
    let (friedman, friedman_error) = match friedman_test(&ranks, f_critical) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let q_alpha = q_alpha.or_else(|| q_alpha_005(p));
    let critical_difference = q_alpha.map(|q| nemenyi_cd(p, n, q)).transpose()?;
    let matrix = pairwise_win_tie_loss(table.scores.view(), better)?;
    let mut win_tie_loss = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Some(w) = cell {
                win_tie_loss.push(PairwiseEntry {
                    model: table.models[i].clone(),
                    against: table.models[j].clone(),
                    wins: w.wins,
                    ties: w.ties,
                    losses: w.losses,
                    significant: w.significant(),
                });
            }
        }
    }
    Ok(Analysis {
        better,
        datasets: table.datasets.clone(),
        models: table.models.clone(),
        ranks,
        friedman,
        friedman_error,
        q_alpha,
        critical_difference,
        sign_test_threshold: sign_test_threshold(n),
        win_tie_loss,
    })
}

fn csv_line(fields: impl IntoIterator<Item = String>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 fields")
}

pub fn scores_csv(result: &BenchmarkResult) -> String {
    let mut out = csv_line(
        ["dataset".to_string(), "status".to_string()]
            .into_iter()
            .chain(result.models.iter().cloned()),
    );
    for r in &result.rows {
        let status = match &r.failure {
            None => "ok".to_string(),
            Some(msg) => format!("failed: {msg}"),
        };
        let scores = (0..result.models.len()).map(|j| {
            r.cells
                .get(j)
                .and_then(|c| c.score)
                .map(|s| s.to_string())
                .unwrap_or_default()
        });
        out.push_str(&csv_line([r.name.clone(), status].into_iter().chain(scores)));
    }
    out
}

pub fn ranks_csv(a: &Analysis) -> String {
    let mut out = csv_line(std::iter::once("dataset".to_string()).chain(a.models.iter().cloned()));
    for (name, row) in a.datasets.iter().zip(a.ranks.ranks.rows()) {
        out.push_str(&csv_line(std::iter::once(name.clone()).chain(row.iter().map(f64::to_string))));
    }
    out.push_str(&csv_line(
        std::iter::once("average".to_string()).chain(a.ranks.average_ranks.iter().map(f64::to_string)),
    ));
    out
}

#[derive(Serialize)]
struct StatsJson<'a> {
    task: Option<Task>,
    better: Better,
    n_datasets: usize,
    n_models: usize,
    models: &'a [String],
    average_ranks: Vec<f64>,
    friedman: &'a Option<FriedmanReport>,
    friedman_error: &'a Option<String>,
    q_alpha: Option<f64>,
    critical_difference: Option<f64>,
    sign_test_threshold: f64,
    win_tie_loss: &'a [PairwiseEntry],
    failed_datasets: Vec<&'a str>,
    selected_params: Option<Vec<SelectedParams<'a>>>,
}

#[derive(Serialize)]
struct SelectedParams<'a> {
    dataset: &'a str,
    model: &'a str,
    params: Option<Hyperparams>,
    cv_score: Option<f64>,
    test_score: Option<f64>,
    error: Option<&'a str>,
}

pub fn stats_json(a: &Analysis, result: Option<&BenchmarkResult>) -> String {
    let selected = result.map(|r| {
        r.rows
            .iter()
            .flat_map(|row| {
                row.cells.iter().zip(&r.models).map(move |(c, m)| SelectedParams {
                    dataset: &row.name,
                    model: m,
                    params: c.params,
                    cv_score: c.cv_score,
                    test_score: c.score,
                    error: c.error.as_deref(),
                })
            })
            .collect()
    });
    let doc = StatsJson {
        task: result.map(|r| r.task),
        better: a.better,
        n_datasets: a.datasets.len(),
        n_models: a.models.len(),
        models: &a.models,
        average_ranks: a.ranks.average_ranks.to_vec(),
        friedman: &a.friedman,
        friedman_error: &a.friedman_error,
        q_alpha: a.q_alpha,
        critical_difference: a.critical_difference,
        sign_test_threshold: a.sign_test_threshold,
        win_tie_loss: &a.win_tie_loss,
        failed_datasets: result.map(|r| r.failed_datasets()).unwrap_or_default(),
        selected_params: selected,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (j, c) in r.iter().enumerate().take(cols) {
            width[j] = width[j].max(c.chars().count());
        }
    }
    let fmt_row = |r: &[String]| -> String {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(j, c)| format!("{c:<w$}", w = width[j]))
            .collect();
        cells.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = fmt_row(header);
    out.push_str(&fmt_row(&width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>()));
    for r in rows {
        out.push_str(&fmt_row(r));
    }
    out
}

/// Human-readable summary: scores, average ranks, Friedman and Nemenyi, and
/// the win-tie-loss matrix (row model against column model).
pub fn report_text(a: &Analysis, result: Option<&BenchmarkResult>) -> String {
    let mut out = String::new();
    let metric = match a.better {
        Better::Higher => "higher is better",
        Better::Lower => "lower is better",
    };
    let mut header = vec!["dataset".to_string()];
    header.extend(a.models.iter().cloned());

    writeln!(out, "Scores ({metric})\n").unwrap();
    let mut rows: Vec<Vec<String>> = Vec::new();
    match result {
        Some(r) => {
            for row in &r.rows {
                let mut cells = vec![row.name.clone()];
                if row.failure.is_some() && row.cells.is_empty() {
                    cells.extend(std::iter::repeat_n("failed".to_string(), a.models.len()));
                } else {
                    cells.extend(row.cells.iter().map(|c| match c.score {
                        Some(s) => format!("{s:.4}"),
                        None => "failed".into(),
                    }));
                }
                rows.push(cells);
            }
        }
        None => {
            for (name, s) in a.datasets.iter().zip(a.ranks.scores.rows()) {
                let mut cells = vec![name.clone()];
                cells.extend(s.iter().map(|v| format!("{v:.4}")));
                rows.push(cells);
            }
        }
    }
    let mut avg = vec!["average rank".to_string()];
    avg.extend(a.ranks.average_ranks.iter().map(|r| format!("{r:.4}")));
    rows.push(avg);
    out.push_str(&table(&header, &rows));

    if let Some(r) = result {
        for row in r.rows.iter().filter(|r| r.failure.is_some()) {
            writeln!(out, "\nwarning: {} excluded from ranking: {}", row.name, row.failure.as_deref().unwrap_or("")).unwrap();
        }
    }

    writeln!(out, "\nFriedman test over {} datasets and {} models", a.datasets.len(), a.models.len()).unwrap();
    match (&a.friedman, &a.friedman_error) {
        (Some(f), _) => {
            writeln!(out, "  chi2_F = {:.4}", f.chi2).unwrap();
            writeln!(out, "  F_F = {:.4} with ({}, {}) degrees of freedom", f.ff, f.df1, f.df2).unwrap();
            match (f.critical_value, f.reject_null) {
                (Some(c), Some(rej)) => writeln!(
                    out,
                    "  critical value {c}: {}",
                    if rej { "null hypothesis rejected" } else { "null hypothesis not rejected" }
                )
                .unwrap(),
                _ => writeln!(out, "  no critical value supplied").unwrap(),
            }
        }
        (None, Some(e)) => writeln!(out, "  not available: {e}").unwrap(),
        (None, None) => {}
    }
    match (a.q_alpha, a.critical_difference) {
        (Some(q), Some(cd)) => writeln!(out, "Nemenyi critical difference (q_alpha = {q}): {cd:.4}").unwrap(),
        _ => writeln!(out, "Nemenyi critical difference: no q_alpha for {} models", a.models.len()).unwrap(),
    }

    writeln!(
        out,
        "\nWin-tie-loss (row against column); significant at {:.2} wins\n",
        a.sign_test_threshold
    )
    .unwrap();
    let mut header = vec!["model".to_string()];
    header.extend(a.models.iter().cloned());
    let rows: Vec<Vec<String>> = a
        .models
        .iter()
        .map(|m| {
            let mut cells = vec![m.clone()];
            for other in &a.models {
                let cell = a
                    .win_tie_loss
                    .iter()
                    .find(|e| &e.model == m && &e.against == other)
                    .map(|e| format!("{}-{}-{}{}", e.wins, e.ties, e.losses, if e.significant { "*" } else { "" }))
                    .unwrap_or_else(|| "-".into());
                cells.push(cell);
            }
            cells
        })
        .collect();
    out.push_str(&table(&header, &rows));
    out
}

/// Write `scores.csv` (benchmark runs only), `ranks.csv`, `stats.json` and
/// `report.txt` into `dir`. Returns the paths written.
pub fn write_outputs(dir: &Path, analysis: &Analysis, result: Option<&BenchmarkResult>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    if let Some(r) = result {
        files.push(("scores.csv", scores_csv(r)));
    }
    files.push(("ranks.csv", ranks_csv(analysis)));
    files.push(("stats.json", stats_json(analysis, result)));
    files.push(("report.txt", report_text(analysis, result)));
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// Write only `scores.csv`, for runs where no dataset completed.
pub fn write_scores(dir: &Path, result: &BenchmarkResult) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("scores.csv");
    write_atomic(&path, scores_csv(result).as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn score_table_csv() {
        let t = ScoreTable::from_csv_reader("dataset,A,B\nd1,90,80\nd2,70,75\n".as_bytes()).unwrap();
        assert_eq!(t.models, vec!["A", "B"]);
        assert_eq!(t.scores, array![[90.0, 80.0], [70.0, 75.0]]);
        let a = analyze(&t, Better::Higher, None, None).unwrap();
        assert_eq!(a.ranks.ranks, array![[1.0, 2.0], [2.0, 1.0]]);
        assert_eq!(a.q_alpha, Some(1.960));
        let err = ScoreTable::from_csv_reader("dataset,A,B\nd1,x,80\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, column: 2, .. }));
    }

    #[test]
    fn config_parsing() {
        let text = r#"
            seed = 3
            [[dataset]]
            name = "a"
            path = "a.csv"
            task = "classify"
            target = "class"
            header = true
            [[model]]
            name = "TRKM"
            kind = "trkm-c"
            [model.grid]
            gamma = [0.1, 1.0]
            [[model]]
            name = "RKM"
            kind = "rkm"
            gamma = 1.0
            eta = 0.1
            sigma = 2.0
        "#;
        let cfg = BenchmarkConfig::from_toml(text, Path::new("/base")).unwrap();
        assert_eq!(cfg.datasets[0].path, PathBuf::from("/base/a.csv"));
        assert_eq!(cfg.datasets[0].target, ColumnRef::Name("class".into()));
        match cfg.models[0].params(5).unwrap() {
            ModelParams::Grid(g) => {
                assert_eq!(g.gamma_values, vec![0.1, 1.0]);
                assert_eq!(g.eta_values.len(), 11);
            }
            ModelParams::Fixed(_) => panic!("expected a grid"),
        }
        let bad = text.replace("kind = \"rkm\"", "kind = \"trkm-r\"");
        assert!(matches!(BenchmarkConfig::from_toml(&bad, Path::new(".")), Err(Error::Config(_))));
    }
}
