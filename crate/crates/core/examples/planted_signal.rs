//! Cross-validates a random forest on a synthetic corpus whose label lives
//! only in the parent post, with and without the parent text.
//!
//!     cargo run --release --example planted_signal -- [n_instances] [seed]

use std::time::Instant;

use convabuse::eval::{cross_validate, CvOptions, PreparedCorpus};
use convabuse::features::{FamilyMask, Lexica};
use convabuse::models::{ModelKind, ModelSpec};
use convabuse::preprocess::Preprocessor;
use convabuse::synthetic::{planted_signal_corpus, SyntheticConfig};

fn main() -> convabuse::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let corpus = planted_signal_corpus(&SyntheticConfig {
        n_instances: n,
        seed,
        ..SyntheticConfig::default()
    });
    let prepared = PreparedCorpus::new(&corpus, &Preprocessor::default(), Lexica::embedded());
    let spec = ModelSpec::new(ModelKind::RandomForest, seed);

    for mask in ["te", "rt"] {
        let mask: FamilyMask = mask.parse()?;
        let started = Instant::now();
        let r = cross_validate(&prepared, mask, &spec, &CvOptions::default())?;
        println!(
            "{mask:<3} F1 {:.3}  P {:.3}  R {:.3}  ({:.1}s)",
            r.mean.f1,
            r.mean.precision,
            r.mean.recall,
            started.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
