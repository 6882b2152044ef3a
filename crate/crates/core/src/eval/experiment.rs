//! Cross-validated training and evaluation of one (mask, model) cell.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{assemble, fit_vectorizer, FamilyMask, FeatureLayout, FeatureVector, Lexica, Vocabulary};
use crate::models::{balance_to_parity, fit_scaler, predict, Dataset, ModelSpec, ScalerParams, TrainedModel};
use crate::preprocess::{ProcessedText, Preprocessor};
use crate::seed;

use super::folds::{grouped_folds, stratified_folds, FoldPlan, GroupBy};
use super::metrics::{confusion, mean_metrics, prf, ConfusionMatrix, Metrics};

/// A corpus with both sides of every instance preprocessed once, shared by
/// all cells and folds.
pub struct PreparedCorpus<'a> {
    pub corpus: &'a Corpus,
    pub parents: Vec<ProcessedText>,
    pub replies: Vec<ProcessedText>,
    pub lexica: Lexica,
}

impl<'a> PreparedCorpus<'a> {
    pub fn new(corpus: &'a Corpus, pre: &Preprocessor, lexica: Lexica) -> PreparedCorpus<'a> {
        let (parents, replies) = corpus
            .instances()
            .par_iter()
            .map(|inst| (pre.process(&inst.parent_text), pre.process(&inst.reply_text)))
            .unzip();
        PreparedCorpus {
            corpus,
            parents,
            replies,
            lexica,
        }
    }

    pub fn len(&self) -> usize {
        self.corpus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corpus.is_empty()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.corpus.instances().iter().map(|i| i.label.is_abusive()).collect()
    }

    pub fn account_ids(&self) -> Vec<&str> {
        self.corpus
            .instances()
            .iter()
            .map(|i| i.target_account.account_id.as_str())
            .collect()
    }

    /// Assembles rows for `indices`, standardizing the dense block when a
    /// scaler is given.
    pub fn assemble_rows(
        &self,
        indices: &[usize],
        mask: FamilyMask,
        vocab: Option<&Vocabulary>,
        scaler: Option<&ScalerParams>,
    ) -> Result<Vec<FeatureVector>> {
        let insts = self.corpus.instances();
        indices
            .iter()
            .map(|&i| {
                assemble(
                    &insts[i],
                    &self.parents[i],
                    &self.replies[i],
                    mask,
                    vocab,
                    &self.lexica,
                    scaler,
                )
            })
            .collect()
    }
}

/// Everything fitted on a training fold before the model itself.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldFit {
    pub vocabulary: Option<Vocabulary>,
    pub layout: FeatureLayout,
    pub scaler: Option<ScalerParams>,
}

/// Fits the vocabulary on `train` when the mask has a text family and
/// derives the column layout.
pub fn fit_layout(
    p: &PreparedCorpus,
    mask: FamilyMask,
    train: &[usize],
    max_vocab: usize,
) -> Result<(Option<Vocabulary>, FeatureLayout)> {
    mask.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyInput("training fold is empty"));
    }
    let vocabulary = if mask.uses_text() {
        let mut texts: Vec<&[String]> = train.iter().map(|&i| p.replies[i].stems.as_slice()).collect();
        if mask.te {
            texts.extend(train.iter().map(|&i| p.parents[i].stems.as_slice()));
        }
        Some(fit_vectorizer(texts, max_vocab)?)
    } else {
        None
    };
    let layout = FeatureLayout::new(mask, vocabulary.as_ref(), p.corpus.embedding_dim())?;
    Ok((vocabulary, layout))
}

/// Fits the vocabulary (text masks only) and the scaler on `train` and
/// returns the standardized training set.
pub fn fit_fold(p: &PreparedCorpus, mask: FamilyMask, train: &[usize], max_vocab: usize) -> Result<(FoldFit, Dataset)> {
    let (vocabulary, layout) = fit_layout(p, mask, train, max_vocab)?;
    let mut rows = p.assemble_rows(train, mask, vocabulary.as_ref(), None)?;
    let scaler = if layout.dense_dim() > 0 {
        let s = fit_scaler(rows.iter().map(|r| r.dense.as_slice()))?;
        for r in &mut rows {
            s.apply_in_place(&mut r.dense)?;
        }
        Some(s)
    } else {
        None
    };
    let labels = train
        .iter()
        .map(|&i| p.corpus.instances()[i].label.is_abusive())
        .collect();
    let data = Dataset::new(rows, labels, layout.sparse_dim, layout.dense_dim())?;
    Ok((
        FoldFit {
            vocabulary,
            layout,
            scaler,
        },
        data,
    ))
}

/// Fits a model on the given training rows: fold-local features, SMOTE when
/// `smote_k > 0`, then the learner.
pub fn fit_on(p: &PreparedCorpus, mask: FamilyMask, spec: &ModelSpec, train: &[usize]) -> Result<(TrainedModel, usize)> {
    let (fit, data) = fit_fold(p, mask, train, spec.hyper.max_vocab)?;
    let before = data.len();
    let data = if spec.hyper.smote_k > 0 {
        let mut rng = seed::rng(seed::mix(spec.seed, 1));
        balance_to_parity(&data, spec.hyper.smote_k, &mut rng)?
    } else {
        data
    };
    let n_synthetic = data.len() - before;
    let mut model_spec = spec.clone();
    model_spec.seed = seed::mix(spec.seed, 2);
    let model = TrainedModel::fit(&model_spec, &data, fit.layout, fit.vocabulary, fit.scaler)?;
    Ok((model, n_synthetic))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvOptions {
    pub k: usize,
    pub group_by: GroupBy,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k: 5,
            group_by: GroupBy::None,
        }
    }
}

pub fn make_folds(p: &PreparedCorpus, opts: &CvOptions, seed: u64) -> Result<FoldPlan> {
    let labels = p.labels();
    let insts = p.corpus.instances();
    match opts.group_by {
        GroupBy::None => stratified_folds(&labels, opts.k, seed),
        GroupBy::Conversation => {
            let g: Vec<&str> = insts.iter().map(|i| i.conversation_id.as_str()).collect();
            grouped_folds(&labels, &g, opts.k, seed)
        }
        GroupBy::Account => grouped_folds(&labels, &p.account_ids(), opts.k, seed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_synthetic: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub mask: FamilyMask,
    pub spec: ModelSpec,
    pub folds: Vec<FoldOutcome>,
    /// Mean over folds.
    pub mean: Metrics,
    /// Metrics of the pooled out-of-fold predictions.
    pub pooled: Metrics,
    pub predictions: Vec<bool>,
    pub scores: Vec<f64>,
}

impl ExperimentResult {
    pub fn per_fold(&self) -> Vec<Metrics> {
        self.folds.iter().map(|f| f.metrics).collect()
    }
}

/// Seed of one (cell, fold) pair; independent of execution order.
pub fn cell_seed(seed: u64, mask: FamilyMask, spec: &ModelSpec, fold: usize) -> u64 {
    seed::mix_all(seed, &[mask.bits(), spec.kind as u64, fold as u64])
}

/// Runs every fold of `plan`. Each instance is predicted exactly once, by
/// the model that did not see it.
/// Outcome, test indices, predictions and scores of one fold.
type FoldRun = (FoldOutcome, Vec<usize>, Vec<bool>, Vec<f64>);

pub fn run_experiment(p: &PreparedCorpus, mask: FamilyMask, spec: &ModelSpec, plan: &FoldPlan) -> Result<ExperimentResult> {
    if plan.assignment.len() != p.len() {
        return Err(Error::LengthMismatch {
            left: plan.assignment.len(),
            right: p.len(),
        });
    }
    spec.hyper.validate()?;
    let labels = p.labels();
    let fold_runs: Vec<FoldRun> = (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let train = plan.train_indices(fold);
            let test = plan.test_indices(fold);
            let mut fold_spec = spec.clone();
            fold_spec.seed = cell_seed(spec.seed, mask, spec, fold);
            let (model, n_synthetic) = fit_on(p, mask, &fold_spec, &train)?;
            let rows = p.assemble_rows(&test, mask, model.vocabulary.as_ref(), model.scaler.as_ref())?;
            let (pred, scores) = predict(&model, &rows)?;
            let truth: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
            let cm = confusion(&truth, &pred)?;
            let outcome = FoldOutcome {
                fold,
                n_train: train.len(),
                n_test: test.len(),
                n_synthetic,
                confusion: cm,
                metrics: prf(&cm),
            };
            Ok((outcome, test, pred, scores))
        })
        .collect::<Result<_>>()?;

    let mut predictions = vec![false; p.len()];
    let mut scores = vec![0.0; p.len()];
    let mut folds = Vec::with_capacity(plan.k);
    for (outcome, test, pred, sc) in fold_runs {
        for ((i, y), s) in test.into_iter().zip(pred).zip(sc) {
            predictions[i] = y;
            scores[i] = s;
        }
        folds.push(outcome);
    }
    let per_fold: Vec<Metrics> = folds.iter().map(|f| f.metrics).collect();
    Ok(ExperimentResult {
        mask,
        spec: spec.clone(),
        mean: mean_metrics(&per_fold),
        pooled: prf(&confusion(&labels, &predictions)?),
        folds,
        predictions,
        scores,
    })
}

/// Builds folds from `spec.seed` and runs the cell.
pub fn cross_validate(
    p: &PreparedCorpus,
    mask: FamilyMask,
    spec: &ModelSpec,
    opts: &CvOptions,
) -> Result<ExperimentResult> {
    let plan = make_folds(p, opts, spec.seed)?;
    run_experiment(p, mask, spec, &plan)
}
