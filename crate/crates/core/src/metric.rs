use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the four scores every pipeline is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    GroupDisparity,
    PredictionTime,
    RocAucTrain,
    RocAucHoldout,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::GroupDisparity,
        Metric::PredictionTime,
        Metric::RocAucTrain,
        Metric::RocAucHoldout,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::GroupDisparity => "group_disparity",
            Metric::PredictionTime => "prediction_time",
            Metric::RocAucTrain => "roc_auc_train",
            Metric::RocAucHoldout => "roc_auc_holdout",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::GroupDisparity => "Group Disparity",
            Metric::PredictionTime => "Prediction Time",
            Metric::RocAucTrain => "ROC AUC (train)",
            Metric::RocAucHoldout => "ROC AUC (holdout)",
        }
    }

    /// Whether larger values are better. ROC AUC is maximised; disparity and
    /// latency are minimised.
    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::RocAucTrain | Metric::RocAucHoldout)
    }

    /// Metrics that a search constraint may bound.
    pub fn is_constrainable(self) -> bool {
        matches!(self, Metric::GroupDisparity | Metric::PredictionTime)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown metric `{0}`")]
pub struct UnknownMetric(pub String);

impl FromStr for Metric {
    type Err = UnknownMetric;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UnknownMetric(s.to_string()))
    }
}

/// Scores of one evaluated pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub group_disparity: f64,
    pub prediction_time: f64,
    pub roc_auc_train: f64,
    pub roc_auc_holdout: f64,
}

impl Metrics {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::GroupDisparity => self.group_disparity,
            Metric::PredictionTime => self.prediction_time,
            Metric::RocAucTrain => self.roc_auc_train,
            Metric::RocAucHoldout => self.roc_auc_holdout,
        }
    }

    /// Checks the metric bounds: disparity in [0,1], time > 0, both AUCs in
    /// [0,1], train >= holdout, everything finite.
    pub fn within_bounds(&self) -> bool {
        let finite = Metric::ALL.iter().all(|&m| self.get(m).is_finite());
        finite
            && (0.0..=1.0).contains(&self.group_disparity)
            && self.prediction_time > 0.0
            && (0.0..=1.0).contains(&self.roc_auc_train)
            && (0.0..=1.0).contains(&self.roc_auc_holdout)
            && self.roc_auc_train >= self.roc_auc_holdout
    }
}
