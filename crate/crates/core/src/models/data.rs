use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Training or evaluation rows with a fixed sparse + dense layout.
/// Labels are `true` for the abusive class.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<bool>,
    pub sparse_dim: usize,
    pub dense_dim: usize,
}

impl Dataset {
    pub fn new(rows: Vec<FeatureVector>, labels: Vec<bool>, sparse_dim: usize, dense_dim: usize) -> Result<Dataset> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: labels.len(),
            });
        }
        for r in &rows {
            check_row(r, sparse_dim, dense_dim)?;
        }
        Ok(Dataset {
            rows,
            labels,
            sparse_dim,
            dense_dim,
        })
    }

    /// Dense-only rows, handy for small numeric fixtures.
    pub fn from_dense(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Dataset> {
        let d = rows.first().map_or(0, Vec::len);
        let rows = rows
            .into_iter()
            .map(|dense| FeatureVector {
                sparse: Vec::new(),
                dense,
            })
            .collect();
        Dataset::new(rows, labels, 0, d)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.sparse_dim + self.dense_dim
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    pub fn check_finite(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            if r.sparse.iter().any(|(_, v)| !v.is_finite()) || r.dense.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i });
            }
        }
        Ok(())
    }
}

pub(crate) fn check_row(r: &FeatureVector, sparse_dim: usize, dense_dim: usize) -> Result<()> {
    if r.dense.len() != dense_dim {
        return Err(Error::Dimension {
            what: "dense block",
            expected: dense_dim,
            actual: r.dense.len(),
        });
    }
    if let Some(&(i, _)) = r.sparse.last() {
        if i as usize >= sparse_dim {
            return Err(Error::Dimension {
                what: "sparse index bound",
                expected: sparse_dim,
                actual: i as usize + 1,
            });
        }
    }
    Ok(())
}

/// Value of global column `col` (sparse columns first, then dense).
pub(crate) fn value_at(r: &FeatureVector, sparse_dim: usize, col: usize) -> f64 {
    if col < sparse_dim {
        let c = col as u32;
        match r.sparse.binary_search_by_key(&c, |&(i, _)| i) {
            Ok(p) => r.sparse[p].1,
            Err(_) => 0.0,
        }
    } else {
        r.dense[col - sparse_dim]
    }
}

/// Squared Euclidean distance over both blocks; sparse lists are merged.
pub fn squared_distance(a: &FeatureVector, b: &FeatureVector) -> f64 {
    let mut d = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.sparse.len() || j < b.sparse.len() {
        let ai = a.sparse.get(i).map_or(u32::MAX, |p| p.0);
        let bj = b.sparse.get(j).map_or(u32::MAX, |p| p.0);
        let diff = if ai == bj {
            let v = a.sparse[i].1 - b.sparse[j].1;
            i += 1;
            j += 1;
            v
        } else if ai < bj {
            i += 1;
            a.sparse[i - 1].1
        } else {
            j += 1;
            b.sparse[j - 1].1
        };
        d += diff * diff;
    }
    for (x, y) in a.dense.iter().zip(&b.dense) {
        d += (x - y) * (x - y);
    }
    d
}
