use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with the abusive class as positive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, truth: bool, pred: bool) {
        match (truth, pred) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn confusion(y_true: &[bool], y_pred: &[bool]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        cm.add(t, p);
    }
    Ok(cm)
}

/// Precision and recall are 0 when their denominator is 0; F1 is their
/// harmonic mean, or 0 when both are 0.
pub fn prf(cm: &ConfusionMatrix) -> Metrics {
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Metrics { precision, recall, f1 }
}

/// Component-wise arithmetic mean; the F1 is averaged, not recomputed.
pub fn mean_metrics(ms: &[Metrics]) -> Metrics {
    if ms.is_empty() {
        return Metrics::default();
    }
    let n = ms.len() as f64;
    Metrics {
        precision: ms.iter().map(|m| m.precision).sum::<f64>() / n,
        recall: ms.iter().map(|m| m.recall).sum::<f64>() / n,
        f1: ms.iter().map(|m| m.f1).sum::<f64>() / n,
    }
}

/// Expected F1 of a label-blind predictor that says abusive with
/// probability `q` when the positive rate is `p`.
pub fn chance_f1(p: f64, q: f64) -> f64 {
    if p + q == 0.0 {
        0.0
    } else {
        2.0 * p * q / (p + q)
    }
}

/// Expected F1 of guessing at the class prior, which is the positive rate
/// itself. Always predicting abusive scores `chance_f1(p, 1.0)` instead.
pub fn prior_f1(y_true: &[bool]) -> f64 {
    if y_true.is_empty() {
        return 0.0;
    }
    let p = y_true.iter().filter(|&&y| y).count() as f64 / y_true.len() as f64;
    chance_f1(p, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_worked_cases() {
        let m = prf(&ConfusionMatrix {
            tp: 2,
            fp: 1,
            fn_: 1,
            tn: 0,
        });
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);

        let m = prf(&ConfusionMatrix {
            tp: 0,
            fp: 3,
            fn_: 2,
            tn: 1,
        });
        assert_eq!(m, Metrics::default());

        let y = [true, false, true];
        let m = prf(&confusion(&y, &y).unwrap());
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn length_mismatch() {
        assert!(confusion(&[true], &[]).is_err());
    }

    #[test]
    fn mean_is_componentwise() {
        let a = Metrics {
            precision: 1.0,
            recall: 0.0,
            f1: 0.0,
        };
        let b = Metrics {
            precision: 0.5,
            recall: 1.0,
            f1: 0.5,
        };
        assert_eq!(
            mean_metrics(&[a, b]),
            Metrics {
                precision: 0.75,
                recall: 0.5,
                f1: 0.25
            }
        );
    }

    #[test]
    fn prior_baseline() {
        assert!((prior_f1(&[true, false, false, false]) - 0.25).abs() < 1e-12);
        assert!((chance_f1(0.25, 1.0) - 0.4).abs() < 1e-12);
        assert_eq!(chance_f1(0.0, 0.0), 0.0);
    }
}
