//! SMOTE oversampling on assembled feature vectors.
//!
//! Each synthetic row is `x + u * (nn - x)` for a uniformly sampled minority
//! row `x`, one of its `k` nearest minority neighbours `nn` (Euclidean over
//! both blocks, ties broken by row order) and `u ~ U[0, 1]`. Sparse
//! coordinates are interpolated too, so synthetic counts are real-valued.

use rand::Rng;

use crate::error::{Error, Result};
use crate::features::FeatureVector;

use super::data::{squared_distance, Dataset};

/// Where a synthetic row came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub base: usize,
    pub neighbor: usize,
    pub gap: f64,
}

/// Indices of the `k` nearest rows to `rows[i]`, excluding `i` itself.
pub fn nearest_neighbors(rows: &[&FeatureVector], i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, r)| (squared_distance(rows[i], r), j))
        .collect();
    let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k, by);
        d.truncate(k);
    }
    d.sort_by(by);
    d.into_iter().map(|(_, j)| j).collect()
}

pub fn interpolate(x: &FeatureVector, nn: &FeatureVector, gap: f64) -> FeatureVector {
    let mut sparse = Vec::with_capacity(x.sparse.len().max(nn.sparse.len()));
    let (mut i, mut j) = (0, 0);
    while i < x.sparse.len() || j < nn.sparse.len() {
        let xi = x.sparse.get(i).map_or(u32::MAX, |p| p.0);
        let nj = nn.sparse.get(j).map_or(u32::MAX, |p| p.0);
        let (col, a, b) = if xi == nj {
            i += 1;
            j += 1;
            (xi, x.sparse[i - 1].1, nn.sparse[j - 1].1)
        } else if xi < nj {
            i += 1;
            (xi, x.sparse[i - 1].1, 0.0)
        } else {
            j += 1;
            (nj, 0.0, nn.sparse[j - 1].1)
        };
        let v = a + gap * (b - a);
        if v != 0.0 {
            sparse.push((col, v));
        }
    }
    let dense = x
        .dense
        .iter()
        .zip(&nn.dense)
        .map(|(a, b)| a + gap * (b - a))
        .collect();
    FeatureVector { sparse, dense }
}

/// Generates `n_synthetic` rows and records how each was made. `k` is
/// clamped to `minority.len() - 1`.
pub fn smote_with_provenance<R: Rng>(
    minority: &[&FeatureVector],
    k: usize,
    n_synthetic: usize,
    rng: &mut R,
) -> Result<Vec<(FeatureVector, Provenance)>> {
    if n_synthetic == 0 {
        return Ok(Vec::new());
    }
    if minority.len() < 2 {
        return Err(Error::TooFewMinority(minority.len()));
    }
    if k == 0 {
        return Err(Error::Config("smote k must be positive".into()));
    }
    let k = k.min(minority.len() - 1);
    let mut neighbors: Vec<Option<Vec<usize>>> = vec![None; minority.len()];
    let mut out = Vec::with_capacity(n_synthetic);
    for _ in 0..n_synthetic {
        let base = rng.gen_range(0..minority.len());
        let nns = neighbors[base].get_or_insert_with(|| nearest_neighbors(minority, base, k));
        let neighbor = nns[rng.gen_range(0..nns.len())];
        let gap: f64 = rng.gen::<f64>();
        out.push((
            interpolate(minority[base], minority[neighbor], gap),
            Provenance { base, neighbor, gap },
        ));
    }
    Ok(out)
}

pub fn smote<R: Rng>(
    minority: &[&FeatureVector],
    k: usize,
    n_synthetic: usize,
    rng: &mut R,
) -> Result<Vec<FeatureVector>> {
    Ok(smote_with_provenance(minority, k, n_synthetic, rng)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

/// Oversamples the smaller class until both classes have equal counts.
/// Synthetic rows are appended after the original rows.
pub fn balance_to_parity<R: Rng>(data: &Dataset, k: usize, rng: &mut R) -> Result<Dataset> {
    let n_pos = data.n_positive();
    let n_neg = data.len() - n_pos;
    if n_pos == n_neg {
        return Ok(data.clone());
    }
    let minority_label = n_pos < n_neg;
    let minority: Vec<&FeatureVector> = data
        .rows
        .iter()
        .zip(&data.labels)
        .filter(|(_, &y)| y == minority_label)
        .map(|(r, _)| r)
        .collect();
    let need = n_pos.max(n_neg) - n_pos.min(n_neg);
    let synthetic = smote(&minority, k, need, rng)?;
    let mut out = data.clone();
    out.labels.extend(std::iter::repeat_n(minority_label, synthetic.len()));
    out.rows.extend(synthetic);
    Ok(out)
}
