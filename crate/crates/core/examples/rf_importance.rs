//! Ranks the features of each metadata family by random-forest Gini
//! importance.

use convabuse::eval::{importance_report, PreparedCorpus};
use convabuse::features::{Family, Lexica};
use convabuse::models::{ModelKind, ModelSpec};
use convabuse::preprocess::Preprocessor;
use convabuse::synthetic::{planted_signal_corpus, SyntheticConfig};

fn main() -> convabuse::Result<()> {
    let corpus = planted_signal_corpus(&SyntheticConfig {
        n_instances: 1_000,
        seed: 4,
        ..SyntheticConfig::default()
    });
    let p = PreparedCorpus::new(&corpus, &Preprocessor::default(), Lexica::embedded());
    let mut spec = ModelSpec::new(ModelKind::RandomForest, 4);
    spec.hyper.rf_trees = 50;
    for family in [Family::Mt, Family::Tw, Family::Ac] {
        let r = importance_report(&p, family, &spec)?;
        println!("{}:", family.label());
        for e in r.entries.iter().take(5) {
            println!("  {:<28} {:.4}", e.feature, e.importance);
        }
    }
    Ok(())
}
