//! Per-column z-score standardization of the dense block.
//!
//! Uses the population (divide-by-n) standard deviation. Columns with zero
//! spread map to 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_scaler<'a, I>(dense_rows: I) -> Result<ScalerParams>
where
    I: IntoIterator<Item = &'a [f64]>,
    I::IntoIter: Clone,
{
    let rows = dense_rows.into_iter();
    let mut n = 0usize;
    let mut sum: Vec<f64> = Vec::new();
    let mut constant: Vec<bool> = Vec::new();
    let mut first: Vec<f64> = Vec::new();
    for r in rows.clone() {
        if n == 0 {
            sum = vec![0.0; r.len()];
            constant = vec![true; r.len()];
            first = r.to_vec();
        } else if r.len() != sum.len() {
            return Err(Error::Dimension {
                what: "scaler input row",
                expected: sum.len(),
                actual: r.len(),
            });
        }
        for (j, v) in r.iter().enumerate() {
            sum[j] += v;
            constant[j] &= *v == first[j];
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyInput("scaler needs at least one row"));
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
    let mut sq = vec![0.0; mean.len()];
    for r in rows {
        for ((acc, v), m) in sq.iter_mut().zip(r).zip(&mean) {
            *acc += (v - m) * (v - m);
        }
    }
    // exact constancy check: rounding in the mean must not invent spread
    let std = sq
        .iter()
        .zip(&constant)
        .map(|(s, &c)| if c { 0.0 } else { (s / n as f64).sqrt() })
        .collect();
    Ok(ScalerParams { mean, std })
}

impl ScalerParams {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Dimension {
                what: "scaler",
                expected: self.dim(),
                actual: len,
            });
        }
        Ok(())
    }

    pub fn apply_in_place(&self, row: &mut [f64]) -> Result<()> {
        self.check(row.len())?;
        for ((x, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
            *x = if *s > 0.0 { (*x - m) / s } else { 0.0 };
        }
        Ok(())
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        let mut out = row.to_vec();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    /// Maps standardized values back. Constant columns return their mean.
    pub fn invert(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check(row.len())?;
        Ok(row
            .iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((z, m), s)| z * s + m)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fit(rows: &[Vec<f64>]) -> ScalerParams {
        fit_scaler(rows.iter().map(Vec::as_slice)).unwrap()
    }

    #[test]
    fn two_point_column() {
        let p = fit(&[vec![1.0], vec![3.0]]);
        assert_eq!(p.mean, vec![2.0]);
        assert_eq!(p.std, vec![1.0]);
        assert_eq!(p.apply(&[1.0]).unwrap(), vec![-1.0]);
        assert_eq!(p.apply(&[3.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let p = fit(&[vec![5.0], vec![5.0], vec![5.0]]);
        assert_eq!(p.std, vec![0.0]);
        assert_eq!(p.apply(&[5.0]).unwrap(), vec![0.0]);
        let p = fit(&[vec![0.1], vec![0.1], vec![0.1]]);
        assert_eq!(p.std, vec![0.0]);
    }

    #[test]
    fn refit_on_standardized_is_identity_like() {
        let rows = vec![vec![1.0, 10.0], vec![2.0, 30.0], vec![4.0, 20.0], vec![8.0, 0.0]];
        let p = fit(&rows);
        let z: Vec<Vec<f64>> = rows.iter().map(|r| p.apply(r).unwrap()).collect();
        let q = fit(&z);
        for j in 0..2 {
            assert!(q.mean[j].abs() < 1e-12);
            assert!((q.std[j] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let empty: Vec<Vec<f64>> = vec![];
        assert!(fit_scaler(empty.iter().map(Vec::as_slice)).is_err());
        let p = fit(&[vec![1.0, 2.0]]);
        assert!(p.apply(&[1.0]).is_err());
        assert!(fit_scaler([&[1.0][..], &[1.0, 2.0][..]]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_and_moments(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..40)) {
            let p = fit(&rows);
            let z: Vec<Vec<f64>> = rows.iter().map(|r| p.apply(r).unwrap()).collect();
            for j in 0..3 {
                let n = rows.len() as f64;
                let mean = z.iter().map(|r| r[j]).sum::<f64>() / n;
                let sd = (z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).sqrt();
                prop_assert!(mean.abs() < 1e-9);
                if p.std[j] > 0.0 {
                    prop_assert!((sd - 1.0).abs() < 1e-9);
                } else {
                    prop_assert!(z.iter().all(|r| r[j] == 0.0));
                }
            }
            for (r, zr) in rows.iter().zip(&z) {
                let back = p.invert(zr).unwrap();
                for j in 0..3 {
                    if p.std[j] > 0.0 {
                        prop_assert!((back[j] - r[j]).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
