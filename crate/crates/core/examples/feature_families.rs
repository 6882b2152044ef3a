//! Assembles the feature vector of one instance under a few family masks
//! and prints the named dense values.

use convabuse::eval::{fit_layout, PreparedCorpus};
use convabuse::features::{assemble, FamilyMask, FeatureLayout, Lexica};
use convabuse::preprocess::Preprocessor;
use convabuse::synthetic::{planted_signal_corpus, SyntheticConfig};

fn main() -> convabuse::Result<()> {
    let corpus = planted_signal_corpus(&SyntheticConfig {
        n_instances: 200,
        ..SyntheticConfig::default()
    });
    let p = PreparedCorpus::new(&corpus, &Preprocessor::default(), Lexica::embedded());
    let all: Vec<usize> = (0..p.len()).collect();
    let inst = &corpus.instances()[0];
    println!("parent: {}\nreply:  {}\n", inst.parent_text, inst.reply_text);

    for mask in ["rt", "te", "mt+tw+ac"] {
        let mask: FamilyMask = mask.parse()?;
        let (vocab, layout) = fit_layout(&p, mask, &all, 5000)?;
        let fv = assemble(inst, &p.parents[0], &p.replies[0], mask, vocab.as_ref(), &p.lexica, None)?;
        println!(
            "{mask}: {} sparse columns ({} nonzero), {} dense",
            layout.sparse_dim,
            fv.sparse.len(),
            fv.dense.len()
        );
    }

    let layout = FeatureLayout::new("mt+tw+ac".parse()?, None, None)?;
    let fv = assemble(inst, &p.parents[0], &p.replies[0], layout.mask, None, &p.lexica, None)?;
    for (name, v) in layout.dense_names.iter().zip(&fv.dense).take(20) {
        println!("  {name:<28} {v}");
    }
    Ok(())
}
