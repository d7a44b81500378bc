//! Twin restricted kernel machine for binary classification.
//!
//! Each class gets its own hyperplane. The class +1 hyperplane is fitted by
//! solving
//!
//! ```text
//! [ K(A,A)/γ₁ + η₁I   e₁ ] [ h₁ ]   [ e₁ + K(A,B)e₂/γ₁ ]
//! [ e₁ᵀ               0  ] [ b₁ ] = [ n₂               ]
//! ```
//!
//! and the class −1 hyperplane by the same construction on `B` with the
//! right-hand side negated (`−(e₂ + K(B,A)e₁/γ₂)`, `−n₁`). Weights are never
//! materialized: both decision functions are evaluated in kernel form and a
//! point is labelled by the sign of `g₁(x) + g₂(x)`.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::LabelMap;
use crate::error::{Error, Result};
use crate::kernel::{gram, KernelSpec};
use crate::solver::{solve_bordered, BorderSign, BorderedSystem, SolveReport};
use crate::util::{check_columns, check_finite, check_positive, max_abs, regularized, select_rows};
use crate::SystemDiagnostics;

pub const POSITIVE_SYSTEM: &str = "class +1 system";
pub const NEGATIVE_SYSTEM: &str = "class -1 system";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrkmClassifierHyperparams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub kernel: KernelSpec,
}

impl TrkmClassifierHyperparams {
    /// Equal penalties for both hyperplanes (γ₁ = γ₂, η₁ = η₂).
    pub fn equal(gamma: f64, eta: f64, kernel: KernelSpec) -> Self {
        TrkmClassifierHyperparams {
            gamma1: gamma,
            gamma2: gamma,
            eta1: eta,
            eta2: eta,
            kernel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("gamma1", self.gamma1)?;
        check_positive("gamma2", self.gamma2)?;
        check_positive("eta1", self.eta1)?;
        check_positive("eta2", self.eta2)?;
        self.kernel.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrkmClassifierModel {
    positive: Array2<f64>,
    negative: Array2<f64>,
    h1: Array1<f64>,
    b1: f64,
    h2: Array1<f64>,
    b2: f64,
    hyperparams: TrkmClassifierHyperparams,
    labels: LabelMap,
    reports: Option<[SolveReport; 2]>,
}

/// Fit from the two class matrices: rows of `positive` are the +1 samples,
/// rows of `negative` the −1 samples.
pub fn fit_classifier(
    positive: ArrayView2<'_, f64>,
    negative: ArrayView2<'_, f64>,
    hp: &TrkmClassifierHyperparams,
) -> Result<TrkmClassifierModel> {
    fit_with_labels(positive, negative, hp, LabelMap::default())
}

/// Fit from a sample matrix and ±1 labels. Rows keep their input order within
/// each class.
pub fn fit_classifier_labeled(
    x: ArrayView2<'_, f64>,
    labels: &[i8],
    label_map: LabelMap,
    hp: &TrkmClassifierHyperparams,
) -> Result<TrkmClassifierModel> {
    if labels.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} samples",
            labels.len(),
            x.nrows()
        )));
    }
    let (pos, neg) = split_by_label(labels)?;
    let a = select_rows(x, &pos);
    let b = select_rows(x, &neg);
    fit_with_labels(a.view(), b.view(), hp, label_map)
}

pub(crate) fn split_by_label(labels: &[i8]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match l {
            1 => pos.push(i),
            -1 => neg.push(i),
            other => {
                return Err(Error::InvalidHyperparameter(format!(
                    "label at index {i} is {other}, expected +1 or -1"
                )))
            }
        }
    }
    Ok((pos, neg))
}

fn fit_with_labels(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    hp: &TrkmClassifierHyperparams,
    labels: LabelMap,
) -> Result<TrkmClassifierModel> {
    hp.validate()?;
    if a.nrows() == 0 {
        return Err(Error::EmptyClass("+1"));
    }
    if b.nrows() == 0 {
        return Err(Error::EmptyClass("-1"));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "class +1 samples have {} features, class -1 samples have {}",
            a.ncols(),
            b.ncols()
        )));
    }
    check_finite("class +1 samples", a)?;
    check_finite("class -1 samples", b)?;

    let (n1, n2) = (a.nrows(), b.nrows());
    let k_aa = gram(&hp.kernel, a, a)?.into_inner();
    let k_bb = gram(&hp.kernel, b, b)?.into_inner();
    let k_ab = gram(&hp.kernel, a, b)?.into_inner();

    // e₁ + K(A,B)e₂/γ₁
    let rhs1 = k_ab.sum_axis(ndarray::Axis(1)).mapv(|s| 1.0 + s / hp.gamma1);
    let sys1 = BorderedSystem::with_ones_border(
        regularized(k_aa, hp.gamma1, hp.eta1),
        BorderSign::Plus,
        rhs1,
        n2 as f64,
    );
    // −(e₂ + K(B,A)e₁/γ₂)
    let rhs2 = k_ab.sum_axis(ndarray::Axis(0)).mapv(|s| -(1.0 + s / hp.gamma2));
    let sys2 = BorderedSystem::with_ones_border(
        regularized(k_bb, hp.gamma2, hp.eta2),
        BorderSign::Plus,
        rhs2,
        -(n1 as f64),
    );

    let r1 = solve_bordered(&sys1).map_err(|e| e.in_system(POSITIVE_SYSTEM))?;
    let r2 = solve_bordered(&sys2).map_err(|e| e.in_system(NEGATIVE_SYSTEM))?;

    Ok(TrkmClassifierModel {
        positive: a.to_owned(),
        negative: b.to_owned(),
        h1: r1.head().to_owned(),
        b1: r1.tail(),
        h2: r2.head().to_owned(),
        b2: r2.tail(),
        hyperparams: *hp,
        labels,
        reports: Some([r1, r2]),
    })
}

impl TrkmClassifierModel {
    /// Reassemble a model from stored parts (no solve reports).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        positive: Array2<f64>,
        negative: Array2<f64>,
        h1: Array1<f64>,
        b1: f64,
        h2: Array1<f64>,
        b2: f64,
        hyperparams: TrkmClassifierHyperparams,
        labels: LabelMap,
    ) -> Result<Self> {
        hyperparams.validate()?;
        if positive.nrows() == 0 || negative.nrows() == 0 {
            return Err(Error::DimensionMismatch("a class matrix is empty".into()));
        }
        if positive.ncols() != negative.ncols()
            || h1.len() != positive.nrows()
            || h2.len() != negative.nrows()
        {
            return Err(Error::DimensionMismatch(
                "stored class matrices and hidden features disagree in size".into(),
            ));
        }
        Ok(TrkmClassifierModel {
            positive,
            negative,
            h1,
            b1,
            h2,
            b2,
            hyperparams,
            labels,
            reports: None,
        })
    }

    pub fn positive_samples(&self) -> &Array2<f64> {
        &self.positive
    }

    pub fn negative_samples(&self) -> &Array2<f64> {
        &self.negative
    }

    pub fn h1(&self) -> &Array1<f64> {
        &self.h1
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn h2(&self) -> &Array1<f64> {
        &self.h2
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn hyperparams(&self) -> &TrkmClassifierHyperparams {
        &self.hyperparams
    }

    pub fn labels(&self) -> &LabelMap {
        &self.labels
    }

    /// Solve reports of the two systems; `None` for models loaded from disk.
    pub fn solve_reports(&self) -> Option<&[SolveReport; 2]> {
        self.reports.as_ref()
    }

    pub fn n_features(&self) -> usize {
        self.positive.ncols()
    }

    /// `(g₁(x), g₂(x))` for every row of `x`.
    pub fn decision_values(&self, x: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array1<f64>)> {
        check_columns(x, self.n_features())?;
        if x.nrows() == 0 {
            return Ok((Array1::zeros(0), Array1::zeros(0)));
        }
        let hp = &self.hyperparams;
        let k_xa = gram(&hp.kernel, x, self.positive.view())?.into_inner();
        let k_xb = gram(&hp.kernel, x, self.negative.view())?.into_inner();
        let k_xa_e = k_xa.sum_axis(ndarray::Axis(1));
        let k_xb_e = k_xb.sum_axis(ndarray::Axis(1));
        let g1 = (k_xa.dot(&self.h1) - &k_xb_e).mapv(|v| v / hp.gamma1 + self.b1);
        let g2 = (k_xb.dot(&self.h2) + &k_xa_e).mapv(|v| v / hp.gamma2 + self.b2);
        Ok((g1, g2))
    }

    /// Labels in {+1, −1}; a zero score maps to +1.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<i8>> {
        let (g1, g2) = self.decision_values(x)?;
        Ok(g1
            .iter()
            .zip(g2.iter())
            .map(|(a, b)| if a + b >= 0.0 { 1 } else { -1 })
            .collect())
    }

    /// Error variables of both hyperplanes in kernel form:
    /// `ξ₁ = e₁ − (K(A,A)h₁ − K(A,B)e₂)/γ₁ − e₁b₁` and
    /// `ξ₂ = −e₂ − (K(B,B)h₂ + K(B,A)e₁)/γ₂ − e₂b₂`.
    pub fn slacks(&self) -> Result<(Array1<f64>, Array1<f64>)> {
        let hp = &self.hyperparams;
        let (a, b) = (self.positive.view(), self.negative.view());
        let k_aa = gram(&hp.kernel, a, a)?.into_inner();
        let k_bb = gram(&hp.kernel, b, b)?.into_inner();
        let k_ab = gram(&hp.kernel, a, b)?.into_inner();
        let xi1 = (k_aa.dot(&self.h1) - k_ab.sum_axis(ndarray::Axis(1)))
            .mapv(|v| 1.0 - v / hp.gamma1 - self.b1);
        let xi2 = (k_bb.dot(&self.h2) + k_ab.sum_axis(ndarray::Axis(0)))
            .mapv(|v| -1.0 - v / hp.gamma2 - self.b2);
        Ok((xi1, xi2))
    }

    /// Balance and stationarity checks for both systems. At an exact solution
    /// `η₁h₁ = ξ₁`, `Σh₁ = n₂`, `η₂h₂ = ξ₂` and `Σh₂ = −n₁`.
    pub fn diagnostics(&self) -> Result<[SystemDiagnostics; 2]> {
        let (xi1, xi2) = self.slacks()?;
        let hp = &self.hyperparams;
        let (n1, n2) = (self.positive.nrows() as f64, self.negative.nrows() as f64);
        let reports = self.reports.as_ref();
        Ok([
            SystemDiagnostics {
                system: POSITIVE_SYSTEM.to_string(),
                hidden_sum: self.h1.sum(),
                expected_hidden_sum: n2,
                stationarity_residual: max_abs(&(&self.h1 * hp.eta1 - &xi1)),
                solve: reports.map(|r| r[0].clone().into()),
            },
            SystemDiagnostics {
                system: NEGATIVE_SYSTEM.to_string(),
                hidden_sum: self.h2.sum(),
                expected_hidden_sum: -n1,
                stationarity_residual: max_abs(&(&self.h2 * hp.eta2 - &xi2)),
                solve: reports.map(|r| r[1].clone().into()),
            },
        ])
    }

    /// Explicit weights `w₁ = (Aᵀh₁ − Bᵀe₂)/γ₁`, `w₂ = (Bᵀh₂ + Aᵀe₁)/γ₂`.
    /// Only defined for the linear kernel.
    pub fn linear_weights(&self) -> Option<(Array1<f64>, Array1<f64>)> {
        if self.hyperparams.kernel != KernelSpec::Linear {
            return None;
        }
        let hp = &self.hyperparams;
        let a_sum = self.positive.sum_axis(ndarray::Axis(0));
        let b_sum = self.negative.sum_axis(ndarray::Axis(0));
        let w1 = (self.positive.t().dot(&self.h1) - b_sum) / hp.gamma1;
        let w2 = (self.negative.t().dot(&self.h2) + a_sum) / hp.gamma2;
        Some((w1, w2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn gaussian_hp(gamma: f64, eta: f64, sigma: f64) -> TrkmClassifierHyperparams {
        TrkmClassifierHyperparams::equal(gamma, eta, KernelSpec::gaussian(sigma).unwrap())
    }

    #[test]
    fn single_sample_per_class() {
        let a = array![[0.0, 0.0]];
        let b = array![[1.0, 1.0]];
        let m = fit_classifier(a.view(), b.view(), &gaussian_hp(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(m.h1().to_vec(), vec![1.0]);
        assert_eq!(m.h2().to_vec(), vec![-1.0]);
    }

    #[test]
    fn balance_rows_hold() {
        let a = array![[0.0, 0.1], [0.3, 0.2], [1.0, -0.5]];
        let b = array![[2.0, 2.0], [2.5, 1.0], [3.0, 3.0], [1.5, 2.2], [2.2, 2.9]];
        let m = fit_classifier(a.view(), b.view(), &gaussian_hp(0.5, 0.1, 1.0)).unwrap();
        assert!((m.h1().sum() - 5.0).abs() < 1e-6 * 5.0);
        assert!((m.h2().sum() + 3.0).abs() < 1e-6 * 3.0);
        for d in m.diagnostics().unwrap() {
            assert!(d.balance_error() < 1e-9);
            assert!(d.stationarity_residual < 1e-9);
            assert!(d.solve.unwrap().residual_norm < 1e-8 * 5.0);
        }
    }

    #[test]
    fn empty_class_and_mismatch() {
        let a = array![[0.0, 0.1]];
        let empty = Array2::<f64>::zeros((0, 2));
        let hp = gaussian_hp(1.0, 1.0, 1.0);
        assert!(matches!(fit_classifier(empty.view(), a.view(), &hp), Err(Error::EmptyClass("+1"))));
        assert!(matches!(fit_classifier(a.view(), empty.view(), &hp), Err(Error::EmptyClass("-1"))));
        let wide = array![[0.0, 0.1, 0.2]];
        assert!(matches!(
            fit_classifier(a.view(), wide.view(), &hp),
            Err(Error::DimensionMismatch(_))
        ));
        let m = fit_classifier(a.view(), array![[1.0, 1.0]].view(), &hp).unwrap();
        assert!(matches!(
            m.predict(wide.view()),
            Err(Error::FeatureCountMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn invalid_hyperparameters_rejected() {
        let a = array![[0.0]];
        let b = array![[1.0]];
        let mut hp = gaussian_hp(1.0, 1.0, 1.0);
        hp.eta2 = 0.0;
        assert!(matches!(
            fit_classifier(a.view(), b.view(), &hp),
            Err(Error::InvalidHyperparameter(_))
        ));
    }

    #[test]
    fn empty_input_gives_empty_output() {
        let m = fit_classifier(array![[0.0]].view(), array![[1.0]].view(), &gaussian_hp(1.0, 1.0, 1.0))
            .unwrap();
        let (g1, g2) = m.decision_values(Array2::<f64>::zeros((0, 1)).view()).unwrap();
        assert!(g1.is_empty() && g2.is_empty());
        assert!(m.predict(Array2::<f64>::zeros((0, 1)).view()).unwrap().is_empty());
    }

    #[test]
    fn zero_score_maps_to_positive() {
        // Two points mirrored around the origin with identical hyperparameters
        // give g₁ + g₂ = 0 at the origin for the linear kernel.
        let a = array![[1.0]];
        let b = array![[-1.0]];
        let hp = TrkmClassifierHyperparams::equal(1.0, 1.0, KernelSpec::Linear);
        let m = fit_classifier(a.view(), b.view(), &hp).unwrap();
        let (g1, g2) = m.decision_values(array![[0.0]].view()).unwrap();
        assert_eq!(g1[0] + g2[0], 0.0);
        assert_eq!(m.predict(array![[0.0]].view()).unwrap(), vec![1]);
    }

    #[test]
    fn labeled_fit_preserves_order() {
        let x = array![[0.0], [5.0], [0.5], [4.0]];
        let labels = [1, -1, 1, -1];
        let hp = gaussian_hp(1.0, 1.0, 1.0);
        let m = fit_classifier_labeled(x.view(), &labels, LabelMap::default(), &hp).unwrap();
        assert_eq!(m.positive_samples(), &array![[0.0], [0.5]]);
        assert_eq!(m.negative_samples(), &array![[5.0], [4.0]]);
        assert!(fit_classifier_labeled(x.view(), &[1, 0, 1, -1], LabelMap::default(), &hp).is_err());
    }
}
