//! Trains the three learners on a small dense problem and compares their
//! scores on a few rows.

use convabuse::models::{
    fit_classifier, train_linear_svm, train_logistic, Classifier, Dataset, ModelKind, ModelSpec,
};
use rand::Rng;

fn main() -> convabuse::Result<()> {
    let mut rng = convabuse::seed::rng(3);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..400 {
        let x: f64 = rng.gen_range(-2.0..2.0);
        let y: f64 = rng.gen_range(-2.0..2.0);
        rows.push(vec![x, y, rng.gen_range(-1.0..1.0)]);
        labels.push(x + 0.5 * y + rng.gen_range(-0.3..0.3) > 0.0);
    }
    let data = Dataset::from_dense(rows, labels)?;

    let lr = train_logistic(&data, 1e-4, 2000, 1e-6)?;
    println!(
        "logistic: {} iterations, |grad| {:.2e}, w = {:?}",
        lr.iterations, lr.grad_inf_norm, lr.model.weights
    );
    let svm = train_linear_svm(&data, 1e-4, 50)?;
    println!("svm: final objective {:.4}, w = {:?}", svm.trace.last().unwrap_or(&f64::NAN), svm.model.weights);

    for kind in ModelKind::ALL {
        let mut spec = ModelSpec::new(kind, 11);
        spec.hyper.rf_trees = 50;
        let c = fit_classifier(&spec, &data, true)?;
        let correct = data
            .rows
            .iter()
            .zip(&data.labels)
            .filter(|(r, &y)| (c.score(r) >= 0.5) == y)
            .count();
        let extra = match &c {
            Classifier::Forest(f) => format!(", oob accuracy {:.3}", f.oob_accuracy.unwrap_or(f64::NAN)),
            Classifier::Linear(_) => String::new(),
        };
        println!("{kind:<3} training accuracy {:.3}{extra}", correct as f64 / data.len() as f64);
    }
    Ok(())
}
