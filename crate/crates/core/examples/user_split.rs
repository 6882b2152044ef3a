//! Splits target accounts at the median per-account F1 of out-of-fold
//! predictions and compares their normalized metadata averages.

use convabuse::eval::{cross_validate, user_median_split, CvOptions, PreparedCorpus};
use convabuse::features::{FamilyMask, FeatureLayout, Lexica};
use convabuse::models::{ModelKind, ModelSpec};
use convabuse::preprocess::Preprocessor;
use convabuse::synthetic::{planted_signal_corpus, SyntheticConfig};

fn main() -> convabuse::Result<()> {
    let corpus = planted_signal_corpus(&SyntheticConfig {
        n_instances: 1_500,
        n_accounts: 25,
        seed: 3,
        ..SyntheticConfig::default()
    });
    let p = PreparedCorpus::new(&corpus, &Preprocessor::default(), Lexica::embedded());
    let mut spec = ModelSpec::new(ModelKind::LogisticRegression, 3);
    spec.hyper.lr_max_iter = 300;
    let r = cross_validate(&p, "te+mt".parse()?, &spec, &CvOptions::default())?;

    let accounts = p.account_ids();
    let mut split = user_median_split(&p.labels(), &r.predictions, &accounts)?;
    let meta: FamilyMask = "mt+tw+ac".parse()?;
    let all: Vec<usize> = (0..p.len()).collect();
    let rows: Vec<Vec<f64>> = p
        .assemble_rows(&all, meta, None, None)?
        .into_iter()
        .map(|v| v.dense)
        .collect();
    split.attach_group_averages(&accounts, &FeatureLayout::new(meta, None, None)?.dense_names, &rows)?;

    println!(
        "median F1 {:.3}: {} above, {} below",
        split.median, split.n_above, split.n_below
    );
    if let Some(a) = &split.averages {
        for ((name, x), y) in a.feature_names.iter().zip(&a.above).zip(&a.below).skip(32) {
            println!("  {name:<24} above {x:.3}  below {y:.3}");
        }
    }
    Ok(())
}
