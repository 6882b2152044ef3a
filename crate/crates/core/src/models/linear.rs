//! L2-regularized linear learners: logistic regression trained by
//! full-batch gradient descent with backtracking, and a primal hinge-loss
//! SVM trained by full-batch subgradient descent with iterate averaging.
//!
//! Both objectives average the loss over rows and leave the bias
//! unregularized. Sparse columns are never densified.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

use super::data::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub sparse_dim: usize,
}

impl LinearModel {
    pub fn zeros(sparse_dim: usize, dense_dim: usize) -> LinearModel {
        LinearModel {
            weights: vec![0.0; sparse_dim + dense_dim],
            bias: 0.0,
            sparse_dim,
        }
    }

    pub fn margin(&self, r: &FeatureVector) -> f64 {
        let mut z = self.bias;
        for &(i, v) in &r.sparse {
            z += self.weights[i as usize] * v;
        }
        for (w, v) in self.weights[self.sparse_dim..].iter().zip(&r.dense) {
            z += w * v;
        }
        z
    }

    fn add_scaled_row(&self, grad: &mut [f64], r: &FeatureVector, c: f64) {
        for &(i, v) in &r.sparse {
            grad[i as usize] += c * v;
        }
        for (g, v) in grad[self.sparse_dim..].iter_mut().zip(&r.dense) {
            *g += c * v;
        }
    }

    fn norm_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// self - step * (grad_w, grad_b)
    fn stepped(&self, grad_w: &[f64], grad_b: f64, step: f64) -> LinearModel {
        LinearModel {
            weights: self
                .weights
                .iter()
                .zip(grad_w)
                .map(|(w, g)| w - step * g)
                .collect(),
            bias: self.bias - step * grad_b,
            sparse_dim: self.sparse_dim,
        }
    }
}

fn sign(y: bool) -> f64 {
    if y {
        1.0
    } else {
        -1.0
    }
}

/// log(1 + exp(x)) without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check_trainable(data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyInput("training set is empty"));
    }
    data.check_finite()?;
    let pos = data.n_positive();
    if pos == 0 || pos == data.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Mean logistic loss plus `lambda / 2 * |w|^2`.
pub fn logistic_objective(m: &LinearModel, data: &Dataset, lambda: f64) -> f64 {
    let n = data.len() as f64;
    let loss: f64 = data
        .rows
        .iter()
        .zip(&data.labels)
        .map(|(r, &y)| softplus(-sign(y) * m.margin(r)))
        .sum();
    loss / n + 0.5 * lambda * m.norm_sq()
}

/// Gradient of [`logistic_objective`] as (weights, bias).
pub fn logistic_gradient(m: &LinearModel, data: &Dataset, lambda: f64) -> (Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut g = vec![0.0; m.weights.len()];
    let mut gb = 0.0;
    for (r, &y) in data.rows.iter().zip(&data.labels) {
        let s = sign(y);
        let c = -s * sigmoid(-s * m.margin(r)) / n;
        m.add_scaled_row(&mut g, r, c);
        gb += c;
    }
    for (gi, w) in g.iter_mut().zip(&m.weights) {
        *gi += lambda * w;
    }
    (g, gb)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub model: LinearModel,
    pub iterations: usize,
    pub grad_inf_norm: f64,
}

pub fn train_logistic(data: &Dataset, lambda: f64, max_iter: usize, tol: f64) -> Result<LogisticFit> {
    check_trainable(data)?;
    let mut m = LinearModel::zeros(data.sparse_dim, data.dense_dim);
    let mut f = logistic_objective(&m, data, lambda);
    let mut step = 1.0;
    let mut iterations = 0;
    let (mut g, mut gb) = logistic_gradient(&m, data, lambda);
    let mut gnorm = inf_norm(&g, gb);
    while gnorm >= tol && iterations < max_iter {
        let g_sq: f64 = g.iter().map(|x| x * x).sum::<f64>() + gb * gb;
        step *= 2.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = m.stepped(&g, gb, step);
            let fc = logistic_objective(&cand, data, lambda);
            if fc <= f - 0.5 * step * g_sq {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            break;
        };
        m = cand;
        f = fc;
        iterations += 1;
        (g, gb) = logistic_gradient(&m, data, lambda);
        gnorm = inf_norm(&g, gb);
    }
    Ok(LogisticFit {
        model: m,
        iterations,
        grad_inf_norm: gnorm,
    })
}

fn inf_norm(g: &[f64], gb: f64) -> f64 {
    g.iter().fold(gb.abs(), |acc, x| acc.max(x.abs()))
}

/// Mean hinge loss plus `lambda / 2 * |w|^2`.
pub fn hinge_objective(m: &LinearModel, data: &Dataset, lambda: f64) -> f64 {
    let n = data.len() as f64;
    let loss: f64 = data
        .rows
        .iter()
        .zip(&data.labels)
        .map(|(r, &y)| (1.0 - sign(y) * m.margin(r)).max(0.0))
        .sum();
    loss / n + 0.5 * lambda * m.norm_sq()
}

pub fn mean_hinge_loss(m: &LinearModel, data: &Dataset) -> f64 {
    hinge_objective(m, data, 0.0)
}

fn hinge_subgradient(m: &LinearModel, data: &Dataset, lambda: f64) -> (Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut g = vec![0.0; m.weights.len()];
    let mut gb = 0.0;
    for (r, &y) in data.rows.iter().zip(&data.labels) {
        let s = sign(y);
        if s * m.margin(r) < 1.0 {
            m.add_scaled_row(&mut g, r, -s / n);
            gb -= s / n;
        }
    }
    for (gi, w) in g.iter_mut().zip(&m.weights) {
        *gi += lambda * w;
    }
    (g, gb)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmFit {
    pub model: LinearModel,
    /// Objective of the averaged iterate after each averaging epoch.
    pub trace: Vec<f64>,
}

/// Each epoch takes one full-batch subgradient step whose length is found
/// by backtracking on the objective. The returned model is the average of
/// the iterates from the second half of the epoch budget.
pub fn train_linear_svm(data: &Dataset, lambda: f64, epochs: usize) -> Result<SvmFit> {
    check_trainable(data)?;
    let mut m = LinearModel::zeros(data.sparse_dim, data.dense_dim);
    let mut f = hinge_objective(&m, data, lambda);
    let mut step = 1.0;
    let average_from = epochs / 2;
    let mut avg = LinearModel::zeros(data.sparse_dim, data.dense_dim);
    let mut n_avg = 0usize;
    let mut trace = Vec::new();
    for epoch in 0..epochs {
        let (g, gb) = hinge_subgradient(&m, data, lambda);
        step *= 2.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand = m.stepped(&g, gb, step);
            let fc = hinge_objective(&cand, data, lambda);
            if fc < f {
                m = cand;
                f = fc;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            step = 1.0;
        }
        if epoch >= average_from {
            n_avg += 1;
            let w = 1.0 / n_avg as f64;
            for (a, x) in avg.weights.iter_mut().zip(&m.weights) {
                *a += w * (x - *a);
            }
            avg.bias += w * (m.bias - avg.bias);
            trace.push(hinge_objective(&avg, data, lambda));
        }
    }
    if n_avg == 0 {
        avg = m;
    }
    Ok(SvmFit { model: avg, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Dataset {
        Dataset::from_dense(rows, labels).unwrap()
    }

    #[test]
    fn logistic_separates_two_points() {
        let d = data(vec![vec![0.0], vec![1.0]], vec![false, true]);
        let fit = train_logistic(&d, 1e-4, 2000, 1e-6).unwrap();
        assert!(fit.model.margin(&d.rows[0]) < 0.0);
        assert!(fit.model.margin(&d.rows[1]) > 0.0);
    }

    #[test]
    fn logistic_converges_on_overlapping_data() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64) / 10.0, ((i * 7) % 5) as f64]).collect();
        let labels: Vec<bool> = (0..40).map(|i| (i * 13) % 40 > 15).collect();
        let d = data(rows, labels);
        let fit = train_logistic(&d, 1e-2, 2000, 1e-6).unwrap();
        assert!(fit.grad_inf_norm < 1e-6, "{}", fit.grad_inf_norm);
    }

    #[test]
    fn single_class_and_nonfinite_rejected() {
        let d = data(vec![vec![0.0], vec![1.0]], vec![true, true]);
        assert!(matches!(train_logistic(&d, 1e-4, 10, 1e-6), Err(Error::SingleClass)));
        assert!(matches!(train_linear_svm(&d, 1e-4, 10), Err(Error::SingleClass)));
        let d = data(vec![vec![f64::NAN], vec![1.0]], vec![true, false]);
        assert!(matches!(train_logistic(&d, 1e-4, 10, 1e-6), Err(Error::NonFinite { row: 0 })));
    }

    #[test]
    fn zero_model_scores_one_half() {
        let m = LinearModel::zeros(3, 2);
        let r = FeatureVector {
            sparse: vec![(2, 5.0)],
            dense: vec![1.0, -3.0],
        };
        assert_eq!(sigmoid(m.margin(&r)), 0.5);
    }

    #[test]
    fn svm_reaches_zero_hinge_on_separable_set() {
        let rows = vec![
            vec![2.0, 2.0],
            vec![3.0, 1.5],
            vec![2.5, 3.0],
            vec![-2.0, -1.0],
            vec![-1.5, -2.5],
            vec![-3.0, -2.0],
        ];
        let labels = vec![true, true, true, false, false, false];
        let d = data(rows, labels);
        let fit = train_linear_svm(&d, 1e-4, 50).unwrap();
        assert_eq!(mean_hinge_loss(&fit.model, &d), 0.0);
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert_eq!(softplus(-1000.0), 0.0);
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    fn random_data(seed: u64, n: usize, d: usize) -> Dataset {
        use rand::Rng;
        let mut rng = crate::seed::rng(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<bool> = rows.iter().map(|r| r[0] + 0.5 * r[1] + rng.gen_range(-1.0..1.0) > 0.0).collect();
        data(rows, labels)
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        use rand::Rng;
        let d = random_data(3, 30, 5);
        let mut rng = crate::seed::rng(11);
        let lambda = 1e-2;
        let h = 1e-6;
        for _ in 0..10 {
            let mut m = LinearModel::zeros(0, 5);
            for w in m.weights.iter_mut() {
                *w = rng.gen_range(-1.0..1.0);
            }
            m.bias = rng.gen_range(-1.0..1.0);
            let (g, gb) = logistic_gradient(&m, &d, lambda);
            let analytic: Vec<f64> = g.iter().copied().chain(std::iter::once(gb)).collect();
            for (j, a) in analytic.iter().enumerate() {
                let mut plus = m.clone();
                let mut minus = m.clone();
                if j < 5 {
                    plus.weights[j] += h;
                    minus.weights[j] -= h;
                } else {
                    plus.bias += h;
                    minus.bias -= h;
                }
                let num = (logistic_objective(&plus, &d, lambda) - logistic_objective(&minus, &d, lambda)) / (2.0 * h);
                let rel = (num - a).abs() / a.abs().max(num.abs()).max(1e-8);
                assert!(rel < 1e-5, "coordinate {j}: {a} vs {num}");
            }
        }
    }

    #[test]
    fn logistic_label_flip_negates_model() {
        let d = random_data(5, 40, 3);
        let flipped = data(
            d.rows.iter().map(|r| r.dense.clone()).collect(),
            d.labels.iter().map(|y| !y).collect(),
        );
        let a = train_logistic(&d, 1e-2, 2000, 1e-9).unwrap().model;
        let b = train_logistic(&flipped, 1e-2, 2000, 1e-9).unwrap().model;
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x + y).abs() < 1e-6, "{x} {y}");
        }
        assert!((a.bias + b.bias).abs() < 1e-6);
    }

    #[test]
    fn logistic_feature_negation_negates_weights_only() {
        let d = random_data(6, 40, 3);
        let negated = data(
            d.rows.iter().map(|r| r.dense.iter().map(|x| -x).collect()).collect(),
            d.labels.clone(),
        );
        let a = train_logistic(&d, 1e-2, 2000, 1e-9).unwrap().model;
        let b = train_logistic(&negated, 1e-2, 2000, 1e-9).unwrap().model;
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x + y).abs() < 1e-6, "{x} {y}");
        }
        assert!((a.bias - b.bias).abs() < 1e-6);
    }

    #[test]
    fn svm_trace_does_not_increase() {
        let d = random_data(8, 60, 4);
        let fit = train_linear_svm(&d, 1e-3, 60).unwrap();
        assert!(!fit.trace.is_empty());
        for w in fit.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn svm_ignores_uniform_duplication() {
        let d = random_data(9, 50, 3);
        let dense: Vec<Vec<f64>> = d.rows.iter().map(|r| r.dense.clone()).collect();
        let doubled = data(
            dense.iter().chain(dense.iter()).cloned().collect(),
            d.labels.iter().chain(d.labels.iter()).copied().collect(),
        );
        let a = train_linear_svm(&d, 1e-3, 50).unwrap().model;
        let b = train_linear_svm(&doubled, 1e-3, 50).unwrap().model;
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x - y).abs() < 1e-6, "{x} {y}");
        }
        assert!((a.bias - b.bias).abs() < 1e-6);
    }
}
