//! Rank-based comparison of several models over several datasets: average
//! ranks, the Friedman test with its F-distributed variant, the Nemenyi
//! critical difference and the pairwise win-tie-loss sign test.
//!
//! Critical values are inputs. [`q_alpha_005`] holds the two-tailed Nemenyi
//! values for α = 0.05 (studentized range statistic divided by √2), as
//! tabulated by Demšar (2006).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Better {
    Higher,
    Lower,
}

impl Better {
    /// True when `a` is strictly better than `b`.
    pub fn beats(self, a: f64, b: f64) -> bool {
        match self {
            Better::Higher => a > b,
            Better::Lower => a < b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    /// N datasets × p models.
    pub scores: Array2<f64>,
    /// Same shape; 1 is best, ties share their midrank.
    pub ranks: Array2<f64>,
    pub average_ranks: Array1<f64>,
}

impl RankTable {
    pub fn n_datasets(&self) -> usize {
        self.scores.nrows()
    }

    pub fn n_models(&self) -> usize {
        self.scores.ncols()
    }
}

pub fn rank_models(scores: ArrayView2<'_, f64>, better: Better) -> Result<RankTable> {
    let (n, p) = scores.dim();
    if n == 0 || p < 2 {
        return Err(Error::DimensionMismatch(format!(
            "ranking needs at least 1 dataset and 2 models, got {n}x{p}"
        )));
    }
    if !scores.iter().all(|v| v.is_finite()) {
        return Err(Error::DegenerateStatistic("scores contain non-finite values".into()));
    }
    let mut ranks = Array2::zeros((n, p));
    for (row, mut out) in scores.axis_iter(Axis(0)).zip(ranks.axis_iter_mut(Axis(0))) {
        out.assign(&midranks(row, better));
    }
    let average_ranks = ranks.mean_axis(Axis(0)).expect("n >= 1");
    Ok(RankTable {
        scores: scores.to_owned(),
        ranks,
        average_ranks,
    })
}

fn midranks(row: ArrayView1<'_, f64>, better: Better) -> Array1<f64> {
    let p = row.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| match better {
        Better::Higher => row[b].total_cmp(&row[a]),
        Better::Lower => row[a].total_cmp(&row[b]),
    });
    let mut ranks = Array1::zeros(p);
    let mut start = 0;
    while start < p {
        let mut end = start + 1;
        while end < p && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let mid = (start + 1 + end) as f64 / 2.0;
        for &j in &order[start..end] {
            ranks[j] = mid;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanReport {
    pub n_datasets: usize,
    pub n_models: usize,
    pub chi2: f64,
    pub ff: f64,
    pub df1: usize,
    pub df2: usize,
    /// Critical value of F(df1, df2), supplied by the caller.
    pub critical_value: Option<f64>,
    pub reject_null: Option<bool>,
}

/// `χ²_F = 12N/(p(p+1)) [Σ R̄ⱼ² − p(p+1)²/4]`,
/// `F_F = (N−1)χ²_F / (N(p−1) − χ²_F)`.
pub fn friedman_test(table: &RankTable, critical_value: Option<f64>) -> Result<FriedmanReport> {
    let n = table.n_datasets();
    let p = table.n_models();
    if n < 2 || p < 2 {
        return Err(Error::DegenerateStatistic(format!(
            "the Friedman test needs at least 2 datasets and 2 models, got {n} and {p}"
        )));
    }
    let (nf, pf) = (n as f64, p as f64);
    let sum_sq: f64 = table.average_ranks.iter().map(|r| r * r).sum();
    let chi2 = 12.0 * nf / (pf * (pf + 1.0)) * (sum_sq - pf * (pf + 1.0).powi(2) / 4.0);
    let denom = nf * (pf - 1.0) - chi2;
    if denom <= 0.0 {
        return Err(Error::DegenerateStatistic(format!(
            "F_F is undefined: N(p-1) - chi2 = {denom:e} (rankings agree on every dataset)"
        )));
    }
    let ff = (nf - 1.0) * chi2 / denom;
    Ok(FriedmanReport {
        n_datasets: n,
        n_models: p,
        chi2,
        ff,
        df1: p - 1,
        df2: (n - 1) * (p - 1),
        critical_value,
        reject_null: critical_value.map(|c| ff > c),
    })
}

/// `C.D. = q_α √(p(p+1)/(6N))`
pub fn nemenyi_cd(p: usize, n: usize, q_alpha: f64) -> Result<f64> {
    if p < 2 || n < 1 {
        return Err(Error::DegenerateStatistic(format!(
            "critical difference needs p >= 2 and N >= 1, got p={p}, N={n}"
        )));
    }
    if !(q_alpha > 0.0 && q_alpha.is_finite()) {
        return Err(Error::InvalidHyperparameter(format!("q_alpha must be positive, got {q_alpha}")));
    }
    let (pf, nf) = (p as f64, n as f64);
    Ok(q_alpha * (pf * (pf + 1.0) / (6.0 * nf)).sqrt())
}

/// Nemenyi `q_α` at α = 0.05 for 2 ≤ p ≤ 10 models.
pub fn q_alpha_005(p: usize) -> Option<f64> {
    const TABLE: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
    p.checked_sub(2).and_then(|i| TABLE.get(i).copied())
}

/// Wins needed over N datasets for significance at α = 0.05: `N/2 + 1.96·√N/2`.
pub fn sign_test_threshold(n: usize) -> f64 {
    let nf = n as f64;
    nf / 2.0 + 1.96 * nf.sqrt() / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinTieLoss {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

impl WinTieLoss {
    pub fn n(&self) -> usize {
        self.wins + self.ties + self.losses
    }

    pub fn mirrored(&self) -> WinTieLoss {
        WinTieLoss {
            wins: self.losses,
            ties: self.ties,
            losses: self.wins,
        }
    }

    pub fn threshold(&self) -> f64 {
        sign_test_threshold(self.n())
    }

    pub fn significant(&self) -> bool {
        self.wins as f64 >= self.threshold()
    }
}

/// Datasets on which `a` beats, ties with and loses to `b`.
pub fn win_tie_loss(a: &[f64], b: &[f64], better: Better) -> Result<WinTieLoss> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "score vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("win-tie-loss over zero datasets".into()));
    }
    let mut out = WinTieLoss {
        wins: 0,
        ties: 0,
        losses: 0,
    };
    for (&x, &y) in a.iter().zip(b) {
        if better.beats(x, y) {
            out.wins += 1;
        } else if better.beats(y, x) {
            out.losses += 1;
        } else {
            out.ties += 1;
        }
    }
    Ok(out)
}

/// Entry `[i][j]` compares model `i` (row) against model `j`; the diagonal is empty.
pub fn pairwise_win_tie_loss(
    scores: ArrayView2<'_, f64>,
    better: Better,
) -> Result<Vec<Vec<Option<WinTieLoss>>>> {
    let p = scores.ncols();
    let cols: Vec<Vec<f64>> = scores.axis_iter(Axis(1)).map(|c| c.to_vec()).collect();
    let mut out = vec![vec![None; p]; p];
    for i in 0..p {
        for j in 0..p {
            if i != j {
                out[i][j] = Some(win_tie_loss(&cols[i], &cols[j], better)?);
            }
        }
    }
    Ok(out)
}
