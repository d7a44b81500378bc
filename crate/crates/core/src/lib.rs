//! Twin restricted kernel machines (TRKM) for binary classification and
//! regression.
//!
//! Both models are fitted in closed form: each hyperplane (or bounding
//! function) comes from one bordered linear system over a regularized kernel
//! block, and predictions are evaluated in dual form from the fitted hidden
//! features. Alongside the models the crate carries what is needed to run the
//! usual benchmark protocol:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`solver`] | LU solver for bordered systems, residual and condition estimate |
//! | [`kernel`] | Gaussian and linear kernels, Gram matrices |
//! | [`classifier`] | TRKM-C fit, decision values, labels |
//! | [`regressor`] | TRKM-R fit and prediction |
//! | [`rkm`] | single-machine RKM baseline |
//! | [`selection`] | train/test split, k-fold indices, grid search |
//! | [`metrics`] | accuracy and regression errors |
//! | [`stats`] | ranks, Friedman test, Nemenyi critical difference, sign test |
//! | [`data`] | CSV loading, min-max scaling |
//! | [`model`] | common interface over the model families, trained pipeline |
//! | [`model_file`] | versioned, checksummed model persistence |
//! | [`benchmark`] | dataset × model runs and their reports |

pub mod benchmark;
pub mod classifier;
pub mod data;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod model;
pub mod model_file;
pub mod regressor;
pub mod rkm;
pub mod selection;
pub mod solver;
pub mod stats;
mod util;

use serde::{Deserialize, Serialize};

pub use classifier::{fit_classifier, fit_classifier_labeled, TrkmClassifierHyperparams, TrkmClassifierModel};
pub use data::{Dataset, LabelMap, MinMaxScaler, Target};
pub use error::{Error, Result};
pub use kernel::{gram, KernelSpec};
pub use model::{Hyperparams, ModelKind, TrainedModel};
pub use regressor::{fit_regressor, TrkmRegressorHyperparams, TrkmRegressorModel};
pub use rkm::{fit_rkm, RkmHyperparams, RkmModel};
pub use solver::{solve_bordered, BorderSign, BorderedSystem, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classify,
    Regress,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Classify => "classify",
            Task::Regress => "regress",
        })
    }
}

/// Residual and conditioning of one solved system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub residual_norm: f64,
    pub condition_estimate: f64,
}

impl From<SolveReport> for SolveSummary {
    fn from(r: SolveReport) -> Self {
        SolveSummary {
            residual_norm: r.residual_norm,
            condition_estimate: r.condition_estimate,
        }
    }
}

/// Post-fit checks for one bordered system: the balance row on the hidden
/// features and the stationarity condition tying them to the error variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDiagnostics {
    pub system: String,
    pub hidden_sum: f64,
    pub expected_hidden_sum: f64,
    pub stationarity_residual: f64,
    /// Present for freshly fitted models only.
    pub solve: Option<SolveSummary>,
}

impl SystemDiagnostics {
    pub fn balance_error(&self) -> f64 {
        (self.hidden_sum - self.expected_hidden_sum).abs()
    }
}

impl std::fmt::Display for SystemDiagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: sum(h) = {:.9} (expected {}), stationarity residual {:.3e}",
            self.system, self.hidden_sum, self.expected_hidden_sum, self.stationarity_residual
        )?;
        if let Some(s) = &self.solve {
            write!(
                f,
                ", solve residual {:.3e}, condition estimate {:.3e}",
                s.residual_norm, s.condition_estimate
            )?;
        }
        Ok(())
    }
}
