//! Runs a small mask x model grid on a synthetic corpus and prints the
//! table in markdown.
//!
//!     cargo run --release --example feature_grid -- [n_instances]

use convabuse::eval::{run_grid_with, CvOptions, PreparedCorpus};
use convabuse::features::{FamilyMask, Lexica};
use convabuse::models::{Hyperparameters, ModelKind};
use convabuse::preprocess::Preprocessor;
use convabuse::synthetic::{planted_signal_corpus, SyntheticConfig};

fn main() -> convabuse::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_500);
    let corpus = planted_signal_corpus(&SyntheticConfig {
        n_instances: n,
        seed: 2,
        ..SyntheticConfig::default()
    });
    let p = PreparedCorpus::new(&corpus, &Preprocessor::default(), Lexica::embedded());
    let masks = FamilyMask::parse_list("te,te+mt,te+tw+ac,ac,rt")?;
    let hyper = Hyperparameters {
        rf_trees: 30,
        ..Hyperparameters::default()
    };
    let report = run_grid_with(&p, &masks, &ModelKind::ALL, &hyper, 2, &CvOptions::default(), |row| {
        eprintln!("{:<10} {:<3} F1 {:.3}", row.mask.to_string(), row.kind, row.mean.f1)
    })?;
    print!("{}", report.to_markdown());
    Ok(())
}
