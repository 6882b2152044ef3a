//! Per-target-account F1 and the median split of accounts.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::metrics::{prf, ConfusionMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountScore {
    pub account_id: String,
    pub n_replies: u64,
    pub confusion: ConfusionMatrix,
    pub f1: f64,
    /// No abusive replies: F1 is 1 without false positives, else 0.
    pub degenerate: bool,
    pub above: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAverages {
    pub feature_names: Vec<String>,
    pub above: Vec<f64>,
    pub below: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSplitReport {
    /// Sorted by account id.
    pub accounts: Vec<AccountScore>,
    pub median: f64,
    pub n_above: usize,
    pub n_below: usize,
    /// Every account has the same F1, so all land in the above group.
    pub all_tied: bool,
    pub n_degenerate: usize,
    pub averages: Option<GroupAverages>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Accounts at or above the median F1 form the above group.
pub fn user_median_split<S: AsRef<str>>(y_true: &[bool], y_pred: &[bool], accounts: &[S]) -> Result<UserSplitReport> {
    if y_true.is_empty() {
        return Err(Error::EmptyInput("no predictions to split"));
    }
    for other in [y_pred.len(), accounts.len()] {
        if other != y_true.len() {
            return Err(Error::LengthMismatch {
                left: y_true.len(),
                right: other,
            });
        }
    }
    let mut per: BTreeMap<&str, (u64, ConfusionMatrix)> = BTreeMap::new();
    for ((&t, &p), a) in y_true.iter().zip(y_pred).zip(accounts) {
        let e = per.entry(a.as_ref()).or_default();
        e.0 += 1;
        e.1.add(t, p);
    }
    let mut scores: Vec<AccountScore> = per
        .into_iter()
        .map(|(id, (n, cm))| {
            let degenerate = cm.tp + cm.fn_ == 0;
            let f1 = if degenerate {
                if cm.fp == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                prf(&cm).f1
            };
            AccountScore {
                account_id: id.to_string(),
                n_replies: n,
                confusion: cm,
                f1,
                degenerate,
                above: false,
            }
        })
        .collect();
    let mut f1s: Vec<f64> = scores.iter().map(|s| s.f1).collect();
    f1s.sort_by(f64::total_cmp);
    let med = median(&f1s);
    for s in &mut scores {
        s.above = s.f1 >= med;
    }
    let n_above = scores.iter().filter(|s| s.above).count();
    Ok(UserSplitReport {
        median: med,
        n_above,
        n_below: scores.len() - n_above,
        all_tied: f1s.first() == f1s.last(),
        n_degenerate: scores.iter().filter(|s| s.degenerate).count(),
        accounts: scores,
        averages: None,
    })
}

impl UserSplitReport {
    fn is_above(&self, account: &str) -> Option<bool> {
        self.accounts
            .binary_search_by(|s| s.account_id.as_str().cmp(account))
            .ok()
            .map(|i| self.accounts[i].above)
    }

    /// Averages every feature over the instances of each group after
    /// min-max scaling the feature over all given instances. A feature
    /// that is constant scales to 0; an empty group averages to 0.
    pub fn attach_group_averages<S: AsRef<str>>(
        &mut self,
        accounts: &[S],
        names: &[String],
        rows: &[Vec<f64>],
    ) -> Result<()> {
        if accounts.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: accounts.len(),
                right: rows.len(),
            });
        }
        let d = names.len();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for r in rows {
            if r.len() != d {
                return Err(Error::Dimension {
                    what: "group feature row",
                    expected: d,
                    actual: r.len(),
                });
            }
            for j in 0..d {
                lo[j] = lo[j].min(r[j]);
                hi[j] = hi[j].max(r[j]);
            }
        }
        let mut sums = [vec![0.0; d], vec![0.0; d]];
        let mut counts = [0usize; 2];
        for (a, r) in accounts.iter().zip(rows) {
            let Some(above) = self.is_above(a.as_ref()) else {
                return Err(Error::Config(format!("account {} has no predictions", a.as_ref())));
            };
            let g = usize::from(!above);
            counts[g] += 1;
            for j in 0..d {
                let span = hi[j] - lo[j];
                if span > 0.0 {
                    sums[g][j] += (r[j] - lo[j]) / span;
                }
            }
        }
        let [above, below] = [0, 1].map(|g| {
            sums[g]
                .iter()
                .map(|s| if counts[g] == 0 { 0.0 } else { (s / counts[g] as f64).clamp(0.0, 1.0) })
                .collect::<Vec<f64>>()
        });
        self.averages = Some(GroupAverages {
            feature_names: names.to_vec(),
            above,
            below,
        });
        Ok(())
    }

    pub fn write_user_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["account_id", "n_replies", "tp", "fp", "fn", "tn", "f1", "degenerate", "group"])?;
        for s in &self.accounts {
            let c = &s.confusion;
            w.write_record([
                s.account_id.clone(),
                s.n_replies.to_string(),
                c.tp.to_string(),
                c.fp.to_string(),
                c.fn_.to_string(),
                c.tn.to_string(),
                s.f1.to_string(),
                s.degenerate.to_string(),
                if s.above { "above" } else { "below" }.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_group_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["feature", "above_median", "below_median"])?;
        if let Some(a) = &self.averages {
            for ((n, x), y) in a.feature_names.iter().zip(&a.above).zip(&a.below) {
                w.write_record([n.clone(), x.to_string(), y.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
