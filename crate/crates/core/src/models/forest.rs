//! Random forest of CART trees with Gini impurity.
//!
//! Every tree is grown on its own bootstrap sample with its own random
//! stream `mix(seed, tree_index)`, so serial and parallel training produce
//! identical forests. Bootstrap duplicates are kept as integer weights.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::seed;

use super::data::{value_at, Dataset};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Candidate features per split; `None` means ceil(sqrt(d)).
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: None,
            bootstrap: true,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        weight: u32,
        positive: u32,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    fn leaf(&self, r: &FeatureVector, sparse_dim: usize) -> (u32, u32) {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { weight, positive } => return (*weight, *positive),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let v = value_at(r, sparse_dim, *feature as usize);
                    i = if v <= *threshold { *left } else { *right } as usize;
                }
            }
        }
    }

    /// Majority class of the reached leaf; ties go to the non-abusive class.
    pub fn vote(&self, r: &FeatureVector, sparse_dim: usize) -> bool {
        let (w, p) = self.leaf(r, sparse_dim);
        2 * p > w
    }

    pub fn n_splits(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Split { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left as usize).max(go(t, *right as usize)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub sparse_dim: usize,
    pub n_features: usize,
    /// Normalized mean decrease in impurity per feature.
    pub importances: Vec<f64>,
    pub oob_accuracy: Option<f64>,
    /// Set when the training labels held a single class; the forest then
    /// predicts that class with probability 1.
    pub constant: Option<bool>,
}

impl RandomForest {
    /// Fraction of trees voting abusive.
    pub fn score(&self, r: &FeatureVector) -> f64 {
        if let Some(c) = self.constant {
            return if c { 1.0 } else { 0.0 };
        }
        let votes = self.trees.iter().filter(|t| t.vote(r, self.sparse_dim)).count();
        votes as f64 / self.trees.len() as f64
    }
}

#[derive(Clone, Copy)]
struct Sample {
    row: u32,
    weight: u32,
    label: bool,
}

#[derive(Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Nonzero entries of each sparse column, by row.
type Columns = Vec<Vec<(u32, f64)>>;

fn sparse_columns(data: &Dataset) -> Columns {
    let mut cols: Columns = vec![Vec::new(); data.sparse_dim];
    for (i, r) in data.rows.iter().enumerate() {
        for &(j, v) in &r.sparse {
            if v != 0.0 {
                cols[j as usize].push((i as u32, v));
            }
        }
    }
    cols
}

struct TreeBuilder<'a, R: Rng> {
    data: &'a Dataset,
    columns: &'a Columns,
    params: &'a ForestParams,
    /// Node stamp per row; rows of the node being split carry `stamp`.
    mark: Vec<u32>,
    stamp: u32,
    max_features: usize,
    rng: R,
    features: Vec<u32>,
    importance: Vec<f64>,
    nodes: Vec<Node>,
    scratch: Vec<(f64, u32, u32)>,
    /// (bootstrap weight, label) per row.
    row_info: Vec<(u32, bool)>,
}

/// Sum of squared class weights over total weight; larger means purer.
/// `w * gini = w - purity(w, p)`.
fn purity(w: f64, p: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        (p * p + (w - p) * (w - p)) / w
    }
}

fn weighted_gini(w: f64, p: f64) -> f64 {
    w - purity(w, p)
}

impl<'a, R: Rng> TreeBuilder<'a, R> {
    fn best_split(&mut self, samples: &[Sample], total_w: u32, total_p: u32) -> Option<Split> {
        let d = self.features.len();
        let sparse_dim = self.data.sparse_dim;
        let min_leaf = self.params.min_samples_leaf.max(1) as u32;
        let mut best: Option<Split> = None;
        let mut informative = 0;
        let mut drawn = 0;
        self.stamp += 1;
        for s in samples {
            self.mark[s.row as usize] = self.stamp;
        }
        while drawn < d && informative < self.max_features {
            let pick = self.rng.gen_range(drawn..d);
            self.features.swap(drawn, pick);
            let f = self.features[drawn] as usize;
            drawn += 1;

            self.scratch.clear();
            let (mut zw, mut zp) = (0u32, 0u32);
            if f < sparse_dim && self.columns[f].len() < samples.len() {
                // walk the column's nonzeros; whatever is left is the zero bucket
                let (mut nw, mut np) = (0u32, 0u32);
                for &(row, v) in &self.columns[f] {
                    if self.mark[row as usize] == self.stamp {
                        let (w, y) = self.row_info[row as usize];
                        let p = if y { w } else { 0 };
                        nw += w;
                        np += p;
                        self.scratch.push((v, w, p));
                    }
                }
                zw = total_w - nw;
                zp = total_p - np;
            } else {
                for s in samples {
                    let v = value_at(&self.data.rows[s.row as usize], sparse_dim, f);
                    let p = if s.label { s.weight } else { 0 };
                    if f < sparse_dim && v == 0.0 {
                        zw += s.weight;
                        zp += p;
                    } else {
                        self.scratch.push((v, s.weight, p));
                    }
                }
            }
            if self.scratch.is_empty() {
                continue;
            }
            if zw > 0 {
                self.scratch.push((0.0, zw, zp));
            }
            let first = self.scratch[0].0;
            if self.scratch.iter().all(|e| e.0 == first) {
                continue;
            }
            informative += 1;
            self.scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

            let (tw, tp) = (total_w as f64, total_p as f64);
            let (mut lw, mut lp) = (0u32, 0u32);
            for i in 0..self.scratch.len() - 1 {
                let (v, w, p) = self.scratch[i];
                lw += w;
                lp += p;
                let next = self.scratch[i + 1].0;
                if next == v {
                    continue;
                }
                let rw = total_w - lw;
                if lw < min_leaf || rw < min_leaf {
                    continue;
                }
                let score = purity(lw as f64, lp as f64) + purity(tw - lw as f64, tp - lp as f64);
                if best.is_none_or(|b| score > b.score) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some(Split {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, mut samples: Vec<Sample>) {
        let root_w: u32 = samples.iter().map(|s| s.weight).sum();
        // (node index, start, end, depth)
        let mut stack = vec![(0usize, 0usize, samples.len(), 0usize)];
        self.nodes.push(Node::Leaf {
            weight: 0,
            positive: 0,
        });
        while let Some((id, start, end, depth)) = stack.pop() {
            let node = &mut samples[start..end];
            let w: u32 = node.iter().map(|s| s.weight).sum();
            let p: u32 = node.iter().filter(|s| s.label).map(|s| s.weight).sum();
            let can_split = p > 0
                && p < w
                && w as usize >= self.params.min_samples_split
                && self.params.max_depth.is_none_or(|m| depth < m);
            let split = if can_split { self.best_split(node, w, p) } else { None };
            let Some(split) = split else {
                self.nodes[id] = Node::Leaf { weight: w, positive: p };
                continue;
            };

            let sparse_dim = self.data.sparse_dim;
            let rows = &self.data.rows;
            let goes_left =
                |s: &Sample| value_at(&rows[s.row as usize], sparse_dim, split.feature) <= split.threshold;
            let mut mid = 0;
            for i in 0..node.len() {
                if goes_left(&node[i]) {
                    node.swap(i, mid);
                    mid += 1;
                }
            }
            let (lw, lp) = node[..mid]
                .iter()
                .fold((0u32, 0u32), |(a, b), s| (a + s.weight, b + if s.label { s.weight } else { 0 }));
            let decrease = weighted_gini(w as f64, p as f64)
                - weighted_gini(lw as f64, lp as f64)
                - weighted_gini((w - lw) as f64, (p - lp) as f64);
            self.importance[split.feature] += decrease / root_w as f64;

            let left = self.nodes.len();
            self.nodes.push(Node::Leaf {
                weight: 0,
                positive: 0,
            });
            self.nodes.push(Node::Leaf {
                weight: 0,
                positive: 0,
            });
            self.nodes[id] = Node::Split {
                feature: split.feature as u32,
                threshold: split.threshold,
                left: left as u32,
                right: left as u32 + 1,
            };
            stack.push((left + 1, start + mid, end, depth + 1));
            stack.push((left, start, start + mid, depth + 1));
        }
    }
}

struct GrownTree {
    tree: DecisionTree,
    importance: Vec<f64>,
    out_of_bag: Vec<(u32, bool)>,
}

fn grow_tree(data: &Dataset, columns: &Columns, params: &ForestParams, max_features: usize, tree_seed: u64) -> GrownTree {
    let n = data.len();
    let mut rng = seed::rng(tree_seed);
    let mut counts = vec![0u32; n];
    if params.bootstrap {
        for _ in 0..n {
            counts[rng.gen_range(0..n)] += 1;
        }
    } else {
        counts.fill(1);
    }
    let samples: Vec<Sample> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| Sample {
            row: i as u32,
            weight: c,
            label: data.labels[i],
        })
        .collect();
    let d = data.n_features();
    let mut b = TreeBuilder {
        data,
        columns,
        params,
        mark: vec![0; n],
        stamp: 0,
        row_info: counts.iter().zip(&data.labels).map(|(&c, &y)| (c, y)).collect(),
        max_features,
        rng,
        features: (0..d as u32).collect(),
        importance: vec![0.0; d],
        nodes: Vec::new(),
        scratch: Vec::new(),
    };
    b.build(samples);
    let tree = DecisionTree { nodes: b.nodes };
    let out_of_bag = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| (i as u32, tree.vote(&data.rows[i], data.sparse_dim)))
        .collect();
    GrownTree {
        tree,
        importance: b.importance,
        out_of_bag,
    }
}

pub fn train_random_forest(data: &Dataset, params: &ForestParams, seed: u64) -> Result<RandomForest> {
    if data.is_empty() {
        return Err(Error::EmptyInput("training set is empty"));
    }
    if params.n_trees == 0 {
        return Err(Error::Config("random forest needs at least one tree".into()));
    }
    data.check_finite()?;
    let d = data.n_features();
    let pos = data.n_positive();
    if pos == 0 || pos == data.len() {
        return Ok(RandomForest {
            trees: Vec::new(),
            sparse_dim: data.sparse_dim,
            n_features: d,
            importances: vec![0.0; d],
            oob_accuracy: None,
            constant: Some(pos > 0),
        });
    }

    let max_features = params
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d.max(1));
    let columns = sparse_columns(data);
    let grow = |t: usize| grow_tree(data, &columns, params, max_features, seed::mix(seed, t as u64));
    let grown: Vec<GrownTree> = if params.parallel {
        (0..params.n_trees).into_par_iter().map(grow).collect()
    } else {
        (0..params.n_trees).map(grow).collect()
    };

    let mut importances = vec![0.0; d];
    let mut oob_votes = vec![(0u32, 0u32); data.len()];
    for g in &grown {
        let total: f64 = g.importance.iter().sum();
        if total > 0.0 {
            for (acc, v) in importances.iter_mut().zip(&g.importance) {
                *acc += v / total;
            }
        }
        for &(row, vote) in &g.out_of_bag {
            let e = &mut oob_votes[row as usize];
            e.0 += vote as u32;
            e.1 += 1;
        }
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        importances.iter_mut().for_each(|v| *v /= total);
    }

    let mut seen = 0usize;
    let mut correct = 0usize;
    for ((pos_votes, n), &y) in oob_votes.iter().zip(&data.labels) {
        if *n > 0 {
            seen += 1;
            if (2 * pos_votes >= *n) == y {
                correct += 1;
            }
        }
    }

    Ok(RandomForest {
        trees: grown.into_iter().map(|g| g.tree).collect(),
        sparse_dim: data.sparse_dim,
        n_features: d,
        importances,
        oob_accuracy: (seen > 0).then(|| correct as f64 / seen as f64),
        constant: None,
    })
}
