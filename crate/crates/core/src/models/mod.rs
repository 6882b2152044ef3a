//! Classical learners over assembled feature vectors and the model artifact
//! that bundles them with their fold-local vocabulary and scaler.

pub mod data;
pub mod forest;
pub mod linear;
pub mod scaler;
pub mod smote;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureLayout, FeatureVector, Vocabulary};

pub use data::{squared_distance, Dataset};
pub use forest::{train_random_forest, DecisionTree, ForestParams, Node, RandomForest};
pub use linear::{
    hinge_objective, logistic_gradient, logistic_objective, sigmoid, train_linear_svm, train_logistic, LinearModel,
    LogisticFit, SvmFit,
};
pub use scaler::{fit_scaler, ScalerParams};
pub use smote::{balance_to_parity, interpolate, nearest_neighbors, smote, smote_with_provenance, Provenance};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LogisticRegression,
    LinearSvm,
    RandomForest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::LogisticRegression, ModelKind::LinearSvm, ModelKind::RandomForest];

    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "LR",
            ModelKind::LinearSvm => "SVM",
            ModelKind::RandomForest => "RF",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ModelKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lr" | "logistic" | "logistic_regression" => Ok(ModelKind::LogisticRegression),
            "svm" | "linear_svm" => Ok(ModelKind::LinearSvm),
            "rf" | "forest" | "random_forest" => Ok(ModelKind::RandomForest),
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub lr_lambda: f64,
    pub lr_max_iter: usize,
    pub lr_tol: f64,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    pub rf_trees: usize,
    pub rf_max_depth: Option<usize>,
    pub rf_min_samples_split: usize,
    pub rf_min_samples_leaf: usize,
    pub rf_max_features: Option<usize>,
    /// Neighbours used by SMOTE; 0 turns oversampling off.
    pub smote_k: usize,
    pub threshold: f64,
    pub max_vocab: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            lr_lambda: 1e-4,
            lr_max_iter: 2000,
            lr_tol: 1e-6,
            svm_lambda: 1e-4,
            svm_epochs: 50,
            rf_trees: 100,
            rf_max_depth: None,
            rf_min_samples_split: 2,
            rf_min_samples_leaf: 1,
            rf_max_features: None,
            smote_k: 5,
            threshold: 0.5,
            max_vocab: crate::features::DEFAULT_MAX_DIMS,
        }
    }
}

impl Hyperparameters {
    pub fn forest(&self, parallel: bool) -> ForestParams {
        ForestParams {
            n_trees: self.rf_trees,
            max_depth: self.rf_max_depth,
            min_samples_split: self.rf_min_samples_split,
            min_samples_leaf: self.rf_min_samples_leaf,
            max_features: self.rf_max_features,
            bootstrap: true,
            parallel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.lr_lambda >= 0.0 && self.lr_lambda.is_finite()) {
            return bad("lr_lambda must be a finite non-negative number");
        }
        if !(self.svm_lambda > 0.0 && self.svm_lambda.is_finite()) {
            return bad("svm_lambda must be a finite positive number");
        }
        if self.lr_tol.is_nan() || self.lr_tol <= 0.0 {
            return bad("lr_tol must be positive");
        }
        if self.svm_epochs == 0 || self.lr_max_iter == 0 {
            return bad("iteration budgets must be positive");
        }
        if self.rf_trees == 0 {
            return bad("rf_trees must be positive");
        }
        if self.rf_min_samples_leaf == 0 || self.rf_min_samples_split < 2 {
            return bad("rf_min_samples_leaf must be >= 1 and rf_min_samples_split >= 2");
        }
        if self.rf_max_features == Some(0) {
            return bad("rf_max_features must be positive");
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad("threshold must lie in [0, 1]");
        }
        if self.max_vocab == 0 {
            return bad("max_vocab must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub hyper: Hyperparameters,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> ModelSpec {
        ModelSpec {
            kind,
            hyper: Hyperparameters::default(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Classifier {
    Linear(LinearModel),
    Forest(RandomForest),
}

impl Classifier {
    /// Probability-like score in [0, 1]. Linear margins go through a plain
    /// logistic, so SVM scores are not calibrated.
    pub fn score(&self, r: &FeatureVector) -> f64 {
        match self {
            Classifier::Linear(m) => sigmoid(m.margin(r)),
            Classifier::Forest(f) => f.score(r),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Classifier::Linear(m) => m.weights.len(),
            Classifier::Forest(f) => f.n_features,
        }
    }
}

/// Trains the learner named by `spec` on already assembled rows.
pub fn fit_classifier(spec: &ModelSpec, data: &Dataset, parallel: bool) -> Result<Classifier> {
    let h = &spec.hyper;
    Ok(match spec.kind {
        ModelKind::LogisticRegression => {
            Classifier::Linear(train_logistic(data, h.lr_lambda, h.lr_max_iter, h.lr_tol)?.model)
        }
        ModelKind::LinearSvm => Classifier::Linear(train_linear_svm(data, h.svm_lambda, h.svm_epochs)?.model),
        ModelKind::RandomForest => Classifier::Forest(train_random_forest(data, &h.forest(parallel), spec.seed)?),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub spec: ModelSpec,
    pub threshold: f64,
    pub layout: FeatureLayout,
    pub feature_names: Vec<String>,
    pub vocabulary: Option<Vocabulary>,
    pub scaler: Option<ScalerParams>,
    pub classifier: Classifier,
}

impl TrainedModel {
    pub fn new(
        spec: ModelSpec,
        layout: FeatureLayout,
        vocabulary: Option<Vocabulary>,
        scaler: Option<ScalerParams>,
        classifier: Classifier,
    ) -> Result<TrainedModel> {
        if classifier.n_features() != layout.total_dim() {
            return Err(Error::Dimension {
                what: "model parameters",
                expected: layout.total_dim(),
                actual: classifier.n_features(),
            });
        }
        Ok(TrainedModel {
            format_version: FORMAT_VERSION,
            threshold: spec.hyper.threshold,
            feature_names: layout.column_names(vocabulary.as_ref()),
            spec,
            layout,
            vocabulary,
            scaler,
            classifier,
        })
    }

    /// Trains on `data`, whose rows must follow `layout`.
    pub fn fit(
        spec: &ModelSpec,
        data: &Dataset,
        layout: FeatureLayout,
        vocabulary: Option<Vocabulary>,
        scaler: Option<ScalerParams>,
    ) -> Result<TrainedModel> {
        check_layout(&layout, data.sparse_dim, data.dense_dim)?;
        let classifier = fit_classifier(spec, data, true)?;
        TrainedModel::new(spec.clone(), layout, vocabulary, scaler, classifier)
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<TrainedModel> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: TrainedModel = serde_json::from_str(&text)?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::ArtifactVersion(m.format_version));
        }
        Ok(m)
    }
}

fn check_layout(layout: &FeatureLayout, sparse_dim: usize, dense_dim: usize) -> Result<()> {
    if layout.sparse_dim != sparse_dim {
        return Err(Error::Dimension {
            what: "sparse block",
            expected: layout.sparse_dim,
            actual: sparse_dim,
        });
    }
    if layout.dense_dim() != dense_dim {
        return Err(Error::Dimension {
            what: "dense block",
            expected: layout.dense_dim(),
            actual: dense_dim,
        });
    }
    Ok(())
}

/// Labels are `score >= threshold`.
pub fn predict(m: &TrainedModel, rows: &[FeatureVector]) -> Result<(Vec<bool>, Vec<f64>)> {
    let mut labels = Vec::with_capacity(rows.len());
    let mut scores = Vec::with_capacity(rows.len());
    for r in rows {
        data::check_row(r, m.layout.sparse_dim, m.layout.dense_dim())?;
        let s = m.classifier.score(r);
        labels.push(s >= m.threshold);
        scores.push(s);
    }
    Ok((labels, scores))
}

pub fn rf_importance(m: &TrainedModel) -> Result<Vec<f64>> {
    match &m.classifier {
        Classifier::Forest(f) => Ok(f.importances.clone()),
        Classifier::Linear(_) => Err(Error::WrongModelKind(m.spec.kind.to_string())),
    }
}
