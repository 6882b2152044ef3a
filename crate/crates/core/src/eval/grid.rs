//! The mask x model experiment grid and its CSV / markdown reports.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::{Family, FamilyMask};
use crate::models::{Hyperparameters, ModelKind, ModelSpec};

use super::experiment::{make_folds, run_experiment, CvOptions, ExperimentResult, PreparedCorpus};
use super::folds::GroupBy;
use super::metrics::Metrics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub mask: FamilyMask,
    pub kind: ModelKind,
    pub mean: Metrics,
    pub pooled: Metrics,
    pub per_fold: Vec<Metrics>,
}

impl From<&ExperimentResult> for GridRow {
    fn from(r: &ExperimentResult) -> GridRow {
        GridRow {
            mask: r.mask,
            kind: r.spec.kind,
            mean: r.mean,
            pooled: r.pooled,
            per_fold: r.per_fold(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub seed: u64,
    pub k: usize,
    pub group_by: GroupBy,
    pub hyper: Hyperparameters,
    pub rows: Vec<GridRow>,
}

/// Runs every mask against every model on one shared fold plan. Rows come
/// out mask-major, in the order given.
pub fn run_grid(
    p: &PreparedCorpus,
    masks: &[FamilyMask],
    kinds: &[ModelKind],
    hyper: &Hyperparameters,
    seed: u64,
    opts: &CvOptions,
) -> Result<GridReport> {
    run_grid_with(p, masks, kinds, hyper, seed, opts, |_| {})
}

/// Same as [`run_grid`], calling `on_row` after each finished cell.
pub fn run_grid_with<F: FnMut(&GridRow)>(
    p: &PreparedCorpus,
    masks: &[FamilyMask],
    kinds: &[ModelKind],
    hyper: &Hyperparameters,
    seed: u64,
    opts: &CvOptions,
    mut on_row: F,
) -> Result<GridReport> {
    hyper.validate()?;
    let plan = make_folds(p, opts, seed)?;
    let mut rows = Vec::with_capacity(masks.len() * kinds.len());
    for &mask in masks {
        for &kind in kinds {
            let spec = ModelSpec {
                kind,
                hyper: hyper.clone(),
                seed,
            };
            let row = GridRow::from(&run_experiment(p, mask, &spec, &plan)?);
            on_row(&row);
            rows.push(row);
        }
    }
    Ok(GridReport {
        seed,
        k: opts.k,
        group_by: opts.group_by,
        hyper: hyper.clone(),
        rows,
    })
}

const MASK_COLUMNS: [Family; 5] = [Family::Rt, Family::Te, Family::Mt, Family::Tw, Family::Ac];

impl GridReport {
    pub fn row(&self, mask: FamilyMask, kind: ModelKind) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.mask == mask && r.kind == kind)
    }

    fn kinds(&self) -> Vec<ModelKind> {
        let mut ks: Vec<ModelKind> = Vec::new();
        for r in &self.rows {
            if !ks.contains(&r.kind) {
                ks.push(r.kind);
            }
        }
        ks
    }

    fn masks(&self) -> Vec<FamilyMask> {
        let mut ms: Vec<FamilyMask> = Vec::new();
        for r in &self.rows {
            if !ms.contains(&r.mask) {
                ms.push(r.mask);
            }
        }
        ms
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = MASK_COLUMNS.iter().map(|f| f.label().to_string()).collect();
        header.extend(
            [
                "model",
                "f1",
                "precision",
                "recall",
                "pooled_f1",
                "pooled_precision",
                "pooled_recall",
            ]
            .map(String::from),
        );
        for i in 1..=self.k {
            header.extend([format!("fold{i}_f1"), format!("fold{i}_precision"), format!("fold{i}_recall")]);
        }
        header.extend(["seed", "folds", "group_by", "hyperparameters"].map(String::from));
        w.write_record(&header)?;

        let hyper = serde_json::to_string(&self.hyper)?;
        for r in &self.rows {
            let mut rec: Vec<String> = MASK_COLUMNS
                .iter()
                .map(|&f| u8::from(r.mask.has(f)).to_string())
                .collect();
            rec.push(r.kind.short_name().to_string());
            for m in [r.mean, r.pooled] {
                rec.extend([m.f1, m.precision, m.recall].map(|v| v.to_string()));
            }
            for m in &r.per_fold {
                rec.extend([m.f1, m.precision, m.recall].map(|v| v.to_string()));
            }
            rec.push(self.seed.to_string());
            rec.push(format!("stratified_{}", self.k));
            rec.push(self.group_by.to_string());
            rec.push(hyper.clone());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Table with one line per mask and F1 / precision / recall columns per
    /// model. The best value of each column is bold.
    pub fn to_markdown(&self) -> String {
        let kinds = self.kinds();
        let masks = self.masks();
        let metric = |m: &Metrics, j: usize| [m.f1, m.precision, m.recall][j];

        let mut best: Vec<[f64; 3]> = vec![[f64::NEG_INFINITY; 3]; kinds.len()];
        for r in &self.rows {
            let ki = kinds.iter().position(|&k| k == r.kind).unwrap_or(0);
            for (j, b) in best[ki].iter_mut().enumerate() {
                *b = b.max(metric(&r.mean, j));
            }
        }

        let mut header: Vec<String> = MASK_COLUMNS.iter().map(|f| f.label().to_string()).collect();
        for k in &kinds {
            for m in ["F1", "P", "R"] {
                header.push(format!("{k} {m}"));
            }
        }
        let mut lines: Vec<Vec<String>> = Vec::new();
        for mask in &masks {
            let mut line: Vec<String> = MASK_COLUMNS
                .iter()
                .map(|&f| if mask.has(f) { "x".to_string() } else { String::new() })
                .collect();
            for (ki, &k) in kinds.iter().enumerate() {
                match self.row(*mask, k) {
                    Some(r) => {
                        for (j, &top) in best[ki].iter().enumerate() {
                            let v = metric(&r.mean, j);
                            let cell = format!("{v:.2}");
                            line.push(if v == top { format!("**{cell}**") } else { cell });
                        }
                    }
                    None => line.extend(["-", "-", "-"].map(String::from)),
                }
            }
            lines.push(line);
        }

        let widths: Vec<usize> = (0..header.len())
            .map(|c| lines.iter().map(|l| l[c].len()).chain([header[c].len(), 3]).max().unwrap_or(3))
            .collect();
        let fmt_line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            format!("| {} |", padded.join(" | "))
        };
        let mut out = String::new();
        out.push_str(&format!(
            "Mean over {} stratified folds (seed {}, group_by {}).\n\n",
            self.k, self.seed, self.group_by
        ));
        out.push_str(&fmt_line(&header));
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&fmt_line(&rule));
        out.push('\n');
        for l in &lines {
            out.push_str(&fmt_line(l));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(f1: f64) -> Metrics {
        Metrics {
            precision: f1,
            recall: f1,
            f1,
        }
    }

    fn report() -> GridReport {
        let row = |mask: &str, kind, f1s: [f64; 2]| GridRow {
            mask: mask.parse().unwrap(),
            kind,
            mean: m((f1s[0] + f1s[1]) / 2.0),
            pooled: m(0.5),
            per_fold: f1s.iter().map(|&v| m(v)).collect(),
        };
        GridReport {
            seed: 1,
            k: 2,
            group_by: GroupBy::None,
            hyper: Hyperparameters::default(),
            rows: vec![
                row("te", ModelKind::LogisticRegression, [0.8, 0.9]),
                row("te", ModelKind::RandomForest, [0.7, 0.7]),
                row("rt", ModelKind::LogisticRegression, [0.6, 0.6]),
                row("rt", ModelKind::RandomForest, [0.9, 0.9]),
            ],
        }
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let mut buf = Vec::new();
        report().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("Rt,Te,Mt,Tw,Ac,model,f1,precision,recall"));
        assert!(lines[1].starts_with("0,1,0,0,0,LR,"));
        assert!(lines[0].contains("fold2_recall"));
    }

    #[test]
    fn markdown_bolds_column_best() {
        let md = report().to_markdown();
        assert!(md.contains("**0.85**"));
        assert!(md.contains("**0.90**"));
        assert!(!md.contains("**0.70**"));
        assert_eq!(md.lines().filter(|l| l.starts_with('|')).count(), 4);
    }
}
