//! Balances an imbalanced training set with SMOTE and checks where the
//! synthetic rows land.

use convabuse::features::FeatureVector;
use convabuse::models::{balance_to_parity, smote_with_provenance, squared_distance, Dataset};

fn main() -> convabuse::Result<()> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..130 {
        let minority = i < 30;
        let t = i as f64;
        rows.push(FeatureVector {
            sparse: if minority { vec![(0, 1.0 + (i % 3) as f64)] } else { vec![] },
            dense: vec![if minority { 5.0 + (t * 0.37).sin() } else { (t * 0.11).cos() }],
        });
        labels.push(minority);
    }
    let data = Dataset::new(rows, labels, 2, 1)?;
    let mut rng = convabuse::seed::rng(5);
    let balanced = balance_to_parity(&data, 5, &mut rng)?;
    println!(
        "before: {} abusive / {} other; after: {} / {}",
        data.n_positive(),
        data.len() - data.n_positive(),
        balanced.n_positive(),
        balanced.len() - balanced.n_positive()
    );

    let minority: Vec<&FeatureVector> = data.rows.iter().take(30).collect();
    let synth = smote_with_provenance(&minority, 5, 5, &mut rng)?;
    for (row, prov) in synth {
        let base = minority[prov.base];
        let nn = minority[prov.neighbor];
        println!(
            "gap {:.3}: |x-s| = {:.3} <= |x-nn| = {:.3}",
            prov.gap,
            squared_distance(base, &row).sqrt(),
            squared_distance(base, nn).sqrt()
        );
    }
    Ok(())
}
