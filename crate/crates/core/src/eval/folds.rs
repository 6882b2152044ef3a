use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// How instances are kept together when folds are dealt.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    #[default]
    None,
    Conversation,
    Account,
}

impl fmt::Display for GroupBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupBy::None => "none",
            GroupBy::Conversation => "conversation",
            GroupBy::Account => "account",
        })
    }
}

impl FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<GroupBy> {
        match s.trim() {
            "none" => Ok(GroupBy::None),
            "conversation" => Ok(GroupBy::Conversation),
            "account" => Ok(GroupBy::Account),
            other => Err(Error::Config(format!(
                "group_by must be none, conversation or account, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Fold id of every instance.
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn positives_per_fold(&self, labels: &[bool]) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for (&f, &y) in self.assignment.iter().zip(labels) {
            counts[f] += y as usize;
        }
        counts
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount(k));
    }
    Ok(())
}

/// Shuffles each class with a seeded rng and deals it round-robin. The
/// dealing position carries over from the abusive class to the other one,
/// so fold sizes also differ by at most one.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<FoldPlan> {
    check_k(k, labels.len())?;
    let mut rng = seed::rng(seed::mix(seed, 0xf01d));
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                k,
                class: if class { "abusive" } else { "non_abusive" },
                count: members.len(),
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan { k, seed, assignment })
}

/// Keeps every group in a single fold. Groups holding any abusive instance
/// are dealt first; each group goes to the currently smallest fold.
pub fn grouped_folds<S: AsRef<str>>(labels: &[bool], groups: &[S], k: usize, seed: u64) -> Result<FoldPlan> {
    if labels.len() != groups.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: groups.len(),
        });
    }
    check_k(k, labels.len())?;
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        let id = *index.entry(g.as_ref()).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[id].push(i);
    }
    if members.len() < k {
        return Err(Error::InvalidFoldCount(k));
    }
    let mut rng = seed::rng(seed::mix(seed, 0x9f01d));
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) =
        (0..members.len()).partition(|&g| members[g].iter().any(|&i| labels[i]));
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut sizes = vec![0usize; k];
    let mut assignment = vec![0; labels.len()];
    for g in pos.into_iter().chain(neg) {
        let f = (0..k).min_by_key(|&f| (sizes[f], f)).unwrap_or(0);
        sizes[f] += members[g].len();
        for &i in &members[g] {
            assignment[i] = f;
        }
    }
    Ok(FoldPlan { k, seed, assignment })
}

/// Sorted indices of a class-stratified sample of `n` instances. The
/// abusive share is rounded to the nearest count.
pub fn stratified_subsample(labels: &[bool], n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Config("sample size must be positive".into()));
    }
    if n >= labels.len() {
        return Ok((0..labels.len()).collect());
    }
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    let want_pos = ((n as f64) * pos.len() as f64 / labels.len() as f64).round() as usize;
    let want_pos = want_pos.min(pos.len()).max(n.saturating_sub(neg.len()));
    let mut rng = seed::rng(seed::mix(seed, 0x5a3b1e));
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut out: Vec<usize> = pos[..want_pos].iter().chain(&neg[..n - want_pos]).copied().collect();
    out.sort_unstable();
    Ok(out)
}
