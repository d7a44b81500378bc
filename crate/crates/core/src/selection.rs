//! Train/test splits, k-fold indices and exhaustive grid search.
//!
//! Randomness comes from ChaCha8 seeded with the caller's seed; the split uses
//! stream 0 and the folds stream 1, so the two are independent but both fixed
//! by one seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Target};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::model::{fit_model, score, Hyperparams, ModelKind};
use crate::Task;

const SPLIT_STREAM: u64 = 0;
const FOLD_STREAM: u64 = 1;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    /// Keep class proportions; ignored for regression.
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidHyperparameter(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Sorted train and test indices. The training side has `floor(f·n)` rows.
///
/// In stratified mode each class gets `floor(f·n_c)` training rows and the
/// remaining rows go, one each, to the classes with the largest fractional
/// parts (ties to the −1 class), so every class is within one row of its
/// exact share.
pub fn split_indices(n: usize, labels: Option<&[i8]>, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyInput("cannot split zero samples".into()));
    }
    let n_train = (spec.train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::DegenerateSplit(format!(
            "fraction {} of {n} samples leaves one side empty",
            spec.train_fraction
        )));
    }
    let mut rng = rng(spec.seed, SPLIT_STREAM);
    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n - n_train);

    match labels.filter(|_| spec.stratified) {
        None => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            train.extend_from_slice(&perm[..n_train]);
            test.extend_from_slice(&perm[n_train..]);
        }
        Some(labels) => {
            if labels.len() != n {
                return Err(Error::DimensionMismatch(format!("{} labels for {n} samples", labels.len())));
            }
            let classes: Vec<Vec<usize>> = [-1i8, 1]
                .iter()
                .map(|&c| (0..n).filter(|&i| labels[i] == c).collect())
                .collect();
            let exact: Vec<f64> = classes.iter().map(|c| spec.train_fraction * c.len() as f64).collect();
            let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
            let mut order: Vec<usize> = (0..classes.len()).collect();
            order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
            let mut left = n_train - quota.iter().sum::<usize>();
            for &c in order.iter().cycle() {
                if left == 0 {
                    break;
                }
                if quota[c] < classes[c].len() {
                    quota[c] += 1;
                    left -= 1;
                }
            }
            for (c, mut members) in classes.into_iter().enumerate() {
                if members.is_empty() {
                    continue;
                }
                if quota[c] == 0 {
                    let name = if c == 0 { "-1" } else { "+1" };
                    return Err(Error::DegenerateSplit(format!(
                        "class {name} has {} samples and gets none in the training split",
                        members.len()
                    )));
                }
                members.shuffle(&mut rng);
                train.extend_from_slice(&members[..quota[c]]);
                test.extend_from_slice(&members[quota[c]..]);
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Split a dataset into (train, test).
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(dataset.n_samples(), dataset.labels(), spec)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

/// `k` folds as (training indices, validation indices), both sorted.
/// Validation sets partition `0..n` and their sizes differ by at most one.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::InvalidHyperparameter(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::TooFewSamples { n, folds: k });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng(seed, FOLD_STREAM));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut valid = perm[start..start + len].to_vec();
        valid.sort_unstable();
        let mut in_valid = vec![false; n];
        for &i in &valid {
            in_valid[i] = true;
        }
        let train = (0..n).filter(|&i| !in_valid[i]).collect();
        folds.push((train, valid));
        start += len;
    }
    Ok(folds)
}

/// `10^-5, 10^-4, …, 10^5`
pub fn paper_penalty_values() -> Vec<f64> {
    (-5..=5).map(|e| 10f64.powi(e)).collect()
}

/// `2^-5, 2^-4, …, 2^5`
pub fn paper_sigma_values() -> Vec<f64> {
    (-5..=5).map(|e| 2f64.powi(e)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub gamma_values: Vec<f64>,
    pub eta_values: Vec<f64>,
    /// Ignored for the linear kernel.
    pub sigma_values: Vec<f64>,
    /// Tie `γ₁ = γ₂` and `η₁ = η₂`.
    pub equal_penalties: bool,
    pub folds: usize,
    pub kernel: KernelFamily,
}

impl Default for GridSpec {
    /// Eleven values per axis, five folds, equal penalties, Gaussian kernel.
    fn default() -> Self {
        GridSpec {
            gamma_values: paper_penalty_values(),
            eta_values: paper_penalty_values(),
            sigma_values: paper_sigma_values(),
            equal_penalties: true,
            folds: 5,
            kernel: KernelFamily::Gaussian,
        }
    }
}

impl GridSpec {
    pub fn single(hp: &Hyperparams, folds: usize) -> Self {
        let (kernel, sigma_values) = match hp.kernel {
            KernelSpec::Gaussian { sigma } => (KernelFamily::Gaussian, vec![sigma]),
            KernelSpec::Linear => (KernelFamily::Linear, vec![]),
        };
        let equal = hp.gamma1 == hp.gamma2 && hp.eta1 == hp.eta2;
        GridSpec {
            gamma_values: if equal { vec![hp.gamma1] } else { vec![hp.gamma1, hp.gamma2] },
            eta_values: if equal { vec![hp.eta1] } else { vec![hp.eta1, hp.eta2] },
            sigma_values,
            equal_penalties: equal,
            folds,
            kernel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: &[f64]| -> Result<()> {
            if v.is_empty() {
                return Err(Error::InvalidHyperparameter(format!("{name} grid is empty")));
            }
            if let Some(bad) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(Error::InvalidHyperparameter(format!("{name} grid value {bad} is not positive")));
            }
            Ok(())
        };
        check("gamma", &self.gamma_values)?;
        check("eta", &self.eta_values)?;
        if self.kernel == KernelFamily::Gaussian {
            check("sigma", &self.sigma_values)?;
        }
        if self.folds < 2 {
            return Err(Error::InvalidHyperparameter(format!("need at least 2 folds, got {}", self.folds)));
        }
        Ok(())
    }

    fn kernels(&self) -> Vec<KernelSpec> {
        match self.kernel {
            KernelFamily::Gaussian => self.sigma_values.iter().map(|&sigma| KernelSpec::Gaussian { sigma }).collect(),
            KernelFamily::Linear => vec![KernelSpec::Linear],
        }
    }

    /// Cells in search order: γ outermost, then η, then σ, each ascending as
    /// listed. With unequal penalties the order is γ₁, γ₂, η₁, η₂, σ. RKM has a
    /// single penalty pair, so it always uses the equal-penalty cells.
    pub fn cells(&self, kind: ModelKind) -> Vec<Hyperparams> {
        let kernels = self.kernels();
        let mut out = Vec::new();
        if self.equal_penalties || kind == ModelKind::Rkm {
            for &g in &self.gamma_values {
                for &e in &self.eta_values {
                    for &k in &kernels {
                        out.push(Hyperparams::equal(g, e, k));
                    }
                }
            }
        } else {
            for &g1 in &self.gamma_values {
                for &g2 in &self.gamma_values {
                    for &e1 in &self.eta_values {
                        for &e2 in &self.eta_values {
                            for &k in &kernels {
                                out.push(Hyperparams {
                                    gamma1: g1,
                                    gamma2: g2,
                                    eta1: e1,
                                    eta2: e2,
                                    kernel: k,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub params: Hyperparams,
    /// Mean fold accuracy (%) or mean fold RMSE; worst possible if any fold failed.
    pub mean_score: f64,
    pub fold_scores: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub kind: ModelKind,
    pub best_index: usize,
    pub best_params: Hyperparams,
    pub best_cv_score: f64,
    pub table: Vec<GridCell>,
}

impl GridResult {
    pub fn failed_cells(&self) -> usize {
        self.table.iter().filter(|c| c.error.is_some()).count()
    }
}

fn worst(task: Task) -> f64 {
    match task {
        Task::Classify => f64::NEG_INFINITY,
        Task::Regress => f64::INFINITY,
    }
}

fn better(task: Task, a: f64, b: f64) -> bool {
    match task {
        Task::Classify => a > b,
        Task::Regress => a < b,
    }
}

fn evaluate_cell(
    kind: ModelKind,
    data: &Dataset,
    folds: &[(Vec<usize>, Vec<usize>)],
    hp: &Hyperparams,
) -> GridCell {
    let task = kind.task();
    let mut fold_scores = Vec::with_capacity(folds.len());
    for (train_idx, valid_idx) in folds {
        let train = data.subset(train_idx);
        let valid = data.subset(valid_idx);
        let result = fit_model(kind, train.x().view(), train.target(), hp)
            .and_then(|m| m.predict(valid.x().view()))
            .and_then(|p| score(valid.target(), &p));
        match result {
            Ok(s) if s.is_finite() => fold_scores.push(s),
            Ok(s) => {
                return GridCell {
                    params: *hp,
                    mean_score: worst(task),
                    fold_scores,
                    error: Some(format!("non-finite fold score {s}")),
                }
            }
            Err(e) => {
                return GridCell {
                    params: *hp,
                    mean_score: worst(task),
                    fold_scores,
                    error: Some(e.to_string()),
                }
            }
        }
    }
    let mean = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
    GridCell {
        params: *hp,
        mean_score: mean,
        fold_scores,
        error: None,
    }
}

/// Score every grid cell by k-fold cross-validation on `data`.
///
/// Cells run in parallel; the table is always in search order and the best
/// cell is the first one reaching the best mean score. A cell whose fit fails
/// on any fold (for example a singular system) scores as the worst value and
/// records the error. Fails only if every cell failed.
pub fn grid_search(data: &Dataset, grid: &GridSpec, kind: ModelKind, seed: u64) -> Result<GridResult> {
    grid.validate()?;
    let task = kind.task();
    if data.task() != task {
        return Err(Error::TaskMismatch(format!("{kind} cannot be fitted to {} data", data.task())));
    }
    let folds = kfold_indices(data.n_samples(), grid.folds, seed)?;
    let cells = grid.cells(kind);
    let table: Vec<GridCell> = cells
        .par_iter()
        .map(|hp| evaluate_cell(kind, data, &folds, hp))
        .collect();

    let mut best: Option<usize> = None;
    for (i, cell) in table.iter().enumerate() {
        if cell.error.is_some() {
            continue;
        }
        if best.is_none_or(|b| better(task, cell.mean_score, table[b].mean_score)) {
            best = Some(i);
        }
    }
    let Some(best_index) = best else {
        return Err(Error::GridFailed(format!(
            "all {} cells failed; first error: {}",
            table.len(),
            table[0].error.as_deref().unwrap_or("unknown")
        )));
    };
    Ok(GridResult {
        kind,
        best_index,
        best_params: table[best_index].params,
        best_cv_score: table[best_index].mean_score,
        table,
    })
}

/// Number of each class in a label target, (−1 count, +1 count).
pub fn class_counts(target: &Target) -> Option<(usize, usize)> {
    match target {
        Target::Labels { values, .. } => {
            let pos = values.iter().filter(|&&l| l == 1).count();
            Some((values.len() - pos, pos))
        }
        Target::Values(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sizes() {
        let spec = SplitSpec {
            stratified: false,
            ..SplitSpec::default()
        };
        let (tr, te) = split_indices(10, None, &spec).unwrap();
        assert_eq!((tr.len(), te.len()), (7, 3));
        assert_eq!(split_indices(10, None, &spec).unwrap(), (tr, te));
        assert!(matches!(split_indices(1, None, &spec), Err(Error::DegenerateSplit(_))));
    }

    #[test]
    fn stratified_ratio() {
        let labels = [1, 1, 1, 1, 1, 1, -1, -1, -1, -1];
        let spec = SplitSpec {
            train_fraction: 0.5,
            seed: 3,
            stratified: true,
        };
        let (tr, _) = split_indices(10, Some(&labels), &spec).unwrap();
        let pos = tr.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!((pos, tr.len() - pos), (3, 2));
    }

    #[test]
    fn stratified_rare_class_needs_a_training_row() {
        let mut labels = vec![1i8; 9];
        labels.push(-1);
        let spec = SplitSpec {
            train_fraction: 0.5,
            seed: 0,
            stratified: true,
        };
        // 0.5 of one sample rounds up only if the remainder lands on it.
        let (tr, _) = split_indices(10, Some(&labels), &spec).unwrap();
        assert_eq!(tr.len(), 5);
        let spec = SplitSpec {
            train_fraction: 0.2,
            ..spec
        };
        assert!(matches!(split_indices(10, Some(&labels), &spec), Err(Error::DegenerateSplit(_))));
    }

    #[test]
    fn folds_partition() {
        let folds = kfold_indices(7, 5, 11).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(|(_, v)| v.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 1, 2, 2]);
        let mut all: Vec<usize> = folds.iter().flat_map(|(_, v)| v.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
        assert!(matches!(kfold_indices(3, 5, 0), Err(Error::TooFewSamples { n: 3, folds: 5 })));
    }

    #[test]
    fn grid_cardinality_and_order() {
        let g = GridSpec::default();
        let cells = g.cells(ModelKind::TrkmC);
        assert_eq!(cells.len(), 1331);
        assert_eq!(cells[0], Hyperparams::equal(1e-5, 1e-5, KernelSpec::Gaussian { sigma: 1.0 / 32.0 }));
        assert_eq!(cells[1].kernel, KernelSpec::Gaussian { sigma: 1.0 / 16.0 });
        assert_eq!(cells[11].eta1, 1e-4);
        assert_eq!(cells[121].gamma1, 1e-4);
    }
}
