//! One interface over the three model families, plus the trained pipeline
//! (feature scaler + fitted model + label names) that gets saved to disk.

use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::classifier::{fit_classifier_labeled, TrkmClassifierHyperparams, TrkmClassifierModel};
use crate::data::{Dataset, LabelMap, MinMaxScaler, Target};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::metrics::{accuracy, regression_errors};
use crate::regressor::{fit_regressor, TrkmRegressorHyperparams, TrkmRegressorModel};
use crate::rkm::{fit_rkm, RkmHyperparams, RkmModel};
use crate::{SystemDiagnostics, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "trkm-c")]
    TrkmC,
    #[serde(rename = "trkm-r")]
    TrkmR,
    #[serde(rename = "rkm")]
    Rkm,
}

impl ModelKind {
    pub fn task(self) -> Task {
        match self {
            ModelKind::TrkmC | ModelKind::Rkm => Task::Classify,
            ModelKind::TrkmR => Task::Regress,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::TrkmC => "trkm-c",
            ModelKind::TrkmR => "trkm-r",
            ModelKind::Rkm => "rkm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "trkm-c" => Ok(ModelKind::TrkmC),
            "trkm-r" => Ok(ModelKind::TrkmR),
            "rkm" => Ok(ModelKind::Rkm),
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }

    /// The TRKM variant for a task.
    pub fn trkm(task: Task) -> Self {
        match task {
            Task::Classify => ModelKind::TrkmC,
            Task::Regress => ModelKind::TrkmR,
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hyperparameters shared by all families. RKM reads `gamma1` and `eta1` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub kernel: KernelSpec,
}

impl Hyperparams {
    pub fn equal(gamma: f64, eta: f64, kernel: KernelSpec) -> Self {
        Hyperparams {
            gamma1: gamma,
            gamma2: gamma,
            eta1: eta,
            eta2: eta,
            kernel,
        }
    }

    pub fn classifier(&self) -> TrkmClassifierHyperparams {
        TrkmClassifierHyperparams {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            eta1: self.eta1,
            eta2: self.eta2,
            kernel: self.kernel,
        }
    }

    pub fn regressor(&self) -> TrkmRegressorHyperparams {
        TrkmRegressorHyperparams {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            eta1: self.eta1,
            eta2: self.eta2,
            kernel: self.kernel,
        }
    }

    pub fn rkm(&self) -> RkmHyperparams {
        RkmHyperparams {
            gamma: self.gamma1,
            eta: self.eta1,
            kernel: self.kernel,
        }
    }
}

impl std::fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.gamma1 == self.gamma2 && self.eta1 == self.eta2 {
            write!(f, "gamma={:e} eta={:e}", self.gamma1, self.eta1)?;
        } else {
            write!(
                f,
                "gamma1={:e} gamma2={:e} eta1={:e} eta2={:e}",
                self.gamma1, self.gamma2, self.eta1, self.eta2
            )?;
        }
        match self.kernel {
            KernelSpec::Gaussian { sigma } => write!(f, " sigma={sigma:e}"),
            KernelSpec::Linear => write!(f, " kernel=linear"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    TrkmC(TrkmClassifierModel),
    TrkmR(TrkmRegressorModel),
    Rkm(RkmModel),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Labels(Vec<i8>),
    Values(Array1<f64>),
}

impl Prediction {
    pub fn len(&self) -> usize {
        match self {
            Prediction::Labels(l) => l.len(),
            Prediction::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Fit one model on already-prepared features.
pub fn fit_model(kind: ModelKind, x: ArrayView2<'_, f64>, target: &Target, hp: &Hyperparams) -> Result<FittedModel> {
    match (kind, target) {
        (ModelKind::TrkmC, Target::Labels { values, map }) => Ok(FittedModel::TrkmC(fit_classifier_labeled(
            x,
            values,
            map.clone(),
            &hp.classifier(),
        )?)),
        (ModelKind::Rkm, Target::Labels { values, .. }) => Ok(FittedModel::Rkm(fit_rkm(x, values, &hp.rkm())?)),
        (ModelKind::TrkmR, Target::Values(y)) => Ok(FittedModel::TrkmR(fit_regressor(x, y.view(), &hp.regressor())?)),
        (kind, _) => Err(Error::TaskMismatch(format!(
            "{kind} is a {} model but the data has {} targets",
            kind.task(),
            match target {
                Target::Labels { .. } => "class",
                Target::Values(_) => "real-valued",
            }
        ))),
    }
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::TrkmC(_) => ModelKind::TrkmC,
            FittedModel::TrkmR(_) => ModelKind::TrkmR,
            FittedModel::Rkm(_) => ModelKind::Rkm,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            FittedModel::TrkmC(m) => m.n_features(),
            FittedModel::TrkmR(m) => m.n_features(),
            FittedModel::Rkm(m) => m.n_features(),
        }
    }

    pub fn hyperparams(&self) -> Hyperparams {
        match self {
            FittedModel::TrkmC(m) => {
                let h = m.hyperparams();
                Hyperparams {
                    gamma1: h.gamma1,
                    gamma2: h.gamma2,
                    eta1: h.eta1,
                    eta2: h.eta2,
                    kernel: h.kernel,
                }
            }
            FittedModel::TrkmR(m) => {
                let h = m.hyperparams();
                Hyperparams {
                    gamma1: h.gamma1,
                    gamma2: h.gamma2,
                    eta1: h.eta1,
                    eta2: h.eta2,
                    kernel: h.kernel,
                }
            }
            FittedModel::Rkm(m) => {
                let h = m.hyperparams();
                Hyperparams::equal(h.gamma, h.eta, h.kernel)
            }
        }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Prediction> {
        Ok(match self {
            FittedModel::TrkmC(m) => Prediction::Labels(m.predict(x)?),
            FittedModel::TrkmR(m) => Prediction::Values(m.predict(x)?),
            FittedModel::Rkm(m) => Prediction::Labels(m.predict(x)?),
        })
    }

    pub fn diagnostics(&self) -> Result<Vec<SystemDiagnostics>> {
        Ok(match self {
            FittedModel::TrkmC(m) => m.diagnostics()?.to_vec(),
            FittedModel::TrkmR(m) => m.diagnostics()?.to_vec(),
            FittedModel::Rkm(m) => vec![m.diagnostics()?],
        })
    }
}

/// Accuracy (%) for labels, RMSE for real targets.
pub fn score(truth: &Target, predicted: &Prediction) -> Result<f64> {
    match (truth, predicted) {
        (Target::Labels { values, .. }, Prediction::Labels(p)) => accuracy(values, p),
        (Target::Values(y), Prediction::Values(f)) => {
            let y = y.as_slice().expect("contiguous targets");
            let f = f.as_slice().expect("contiguous predictions");
            Ok(regression_errors(y, f)?.rmse)
        }
        _ => Err(Error::TaskMismatch("predictions and targets are of different kinds".into())),
    }
}

/// Fitted model together with the preprocessing it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: FittedModel,
    /// Applied to raw features before prediction.
    pub scaler: Option<MinMaxScaler>,
    /// Raw class names; classification only.
    pub label_map: Option<LabelMap>,
}

impl TrainedModel {
    /// Fit on `train` (raw features), optionally min-max scaling first.
    pub fn fit(kind: ModelKind, train: &Dataset, hp: &Hyperparams, normalize: bool) -> Result<Self> {
        let (prepared, scaler) = if normalize {
            let scaler = MinMaxScaler::fit(train.x().view())?;
            (train.apply_scaler(&scaler)?, Some(scaler))
        } else {
            (train.clone(), None)
        };
        let model = fit_model(kind, prepared.x().view(), prepared.target(), hp)?;
        Ok(TrainedModel {
            model,
            scaler,
            label_map: train.label_map().cloned(),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn n_features(&self) -> usize {
        self.model.n_features()
    }

    /// Predict from raw (unscaled) features.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Prediction> {
        if x.ncols() != self.n_features() {
            return Err(Error::FeatureCountMismatch {
                expected: self.n_features(),
                found: x.ncols(),
            });
        }
        match &self.scaler {
            Some(s) => self.model.predict(s.transform(x)?.view()),
            None => self.model.predict(x),
        }
    }

    /// Score on a dataset with raw features: accuracy (%) or RMSE.
    pub fn evaluate(&self, data: &Dataset) -> Result<f64> {
        score(data.target(), &self.predict(data.x().view())?)
    }

    /// Raw class name for each predicted label.
    pub fn decode_labels(&self, labels: &[i8]) -> Vec<String> {
        let map = self.label_map.clone().unwrap_or_default();
        labels.iter().map(|&l| map.decode(l).to_string()).collect()
    }
}
