//! Random-forest importance ranking for a single feature family.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Family, FamilyMask};
use crate::models::{rf_importance, ModelKind, ModelSpec};

use super::experiment::{fit_on, PreparedCorpus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub family: Family,
    pub seed: u64,
    pub n_rows: usize,
    pub n_synthetic: usize,
    /// Descending importance; ties keep column order.
    pub entries: Vec<ImportanceEntry>,
}

/// Trains one forest on the whole corpus using only `family` and ranks its
/// columns.
pub fn importance_report(p: &PreparedCorpus, family: Family, spec: &ModelSpec) -> Result<ImportanceReport> {
    if !matches!(family, Family::Mt | Family::Tw | Family::Ac) {
        return Err(Error::Mask(format!(
            "importance reports cover mt, tw or ac, not {}",
            family.name()
        )));
    }
    if spec.kind != ModelKind::RandomForest {
        return Err(Error::WrongModelKind(spec.kind.to_string()));
    }
    spec.hyper.validate()?;
    let all: Vec<usize> = (0..p.len()).collect();
    let (model, n_synthetic) = fit_on(p, FamilyMask::of(&[family]), spec, &all)?;
    let imp = rf_importance(&model)?;
    let mut order: Vec<usize> = (0..imp.len()).collect();
    order.sort_by(|&a, &b| imp[b].total_cmp(&imp[a]).then(a.cmp(&b)));
    Ok(ImportanceReport {
        family,
        seed: spec.seed,
        n_rows: all.len(),
        n_synthetic,
        entries: order
            .into_iter()
            .map(|i| ImportanceEntry {
                feature: model.feature_names[i].clone(),
                importance: imp[i],
            })
            .collect(),
    })
}

impl ImportanceReport {
    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.feature == feature)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "feature", "importance"])?;
        for (i, e) in self.entries.iter().enumerate() {
            w.write_record([(i + 1).to_string(), e.feature.clone(), e.importance.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
