//! Acceptance checks. Each test writes one `criterion N ... PASS|FAIL`
//! line straight to stdout so it shows up without `--nocapture`.
//!
//! Criteria 9 to 11 need the OAA corpus converted to the JSON-lines schema.
//! They are ignored by default; run them with
//! `OAA_CORPUS=/path/to/oaa.jsonl cargo test --release --test acceptance -- --ignored`.

use std::io::Write;
use std::time::Instant;

use convabuse::corpus::{corpus_stats, read_corpus_file, validate_corpus, Corpus};
use convabuse::eval::{
    confusion, cross_validate, fit_fold, importance_report, make_folds, prf, run_grid, stratified_folds,
    stratified_subsample, CvOptions, GroupBy, PreparedCorpus,
};
use convabuse::features::{fit_vectorizer, vectorize, Family, FamilyMask, FeatureVector, Lexica};
use convabuse::models::{
    balance_to_parity, logistic_gradient, logistic_objective, smote_with_provenance, squared_distance,
    train_random_forest, Dataset, ForestParams, Hyperparameters, LinearModel, ModelKind, ModelSpec,
};
use convabuse::preprocess::{stem, Preprocessor};
use convabuse::seed::rng;
use convabuse::synthetic::{planted_signal_corpus, SyntheticConfig};
use rand::seq::SliceRandom;
use rand::Rng;

fn report(n: u32, name: &str, outcome: &Result<String, String>) {
    let line = match outcome {
        Ok(detail) => format!("criterion {n:>2} {name}: PASS ({detail})\n"),
        Err(detail) => format!("criterion {n:>2} {name}: FAIL ({detail})\n"),
    };
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

fn check(n: u32, name: &str, outcome: Result<String, String>) {
    report(n, name, &outcome);
    if let Err(e) = outcome {
        panic!("criterion {n} failed: {e}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[test]
fn c01_metric_oracle() {
    let mut r = rng(1);
    let outcome = (|| {
        let mut degenerate = 0;
        for case in 0..1000 {
            let n = r.gen_range(0..40);
            let p_true = [0.0, 0.3, 1.0][case % 3];
            let p_pred = [0.0, 0.5, 1.0][(case / 3) % 3];
            let y_true: Vec<bool> = (0..n).map(|_| r.gen_bool(p_true)).collect();
            let y_pred: Vec<bool> = (0..n).map(|_| r.gen_bool(p_pred)).collect();
            let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
            for (&t, &p) in y_true.iter().zip(&y_pred) {
                match (t, p) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    (false, false) => {}
                }
            }
            let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
            let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            if tp + fp == 0 || tp + fn_ == 0 {
                degenerate += 1;
            }
            let m = prf(&confusion(&y_true, &y_pred).map_err(|e| e.to_string())?);
            ensure(
                m.precision == precision && m.recall == recall && m.f1 == f1,
                || format!("case {case}: got {m:?}, expected ({precision}, {recall}, {f1})"),
            )?;
        }
        Ok(format!("1000 sets, {degenerate} with a zero denominator"))
    })();
    check(1, "metric oracle", outcome);
}

fn enumerate_ngrams(stems: &[String]) -> Vec<String> {
    let mut out: Vec<String> = stems.to_vec();
    for i in 0..stems.len().saturating_sub(1) {
        out.push(format!("{} {}", stems[i], stems[i + 1]));
    }
    out
}

#[test]
fn c02_vectorizer_oracle() {
    let mut r = rng(2);
    let words = ["abus", "you", "idiot", "love", "go", "home", "fake", "news", "lie", "troll"];
    let outcome = (|| {
        let mut largest = 0;
        for case in 0..50 {
            let docs: Vec<Vec<String>> = (0..r.gen_range(1..8))
                .map(|_| {
                    (0..r.gen_range(0..9))
                        .map(|_| words.choose(&mut r).unwrap().to_string())
                        .collect()
                })
                .collect();
            let cap = if case % 5 == 0 { 5000 } else { r.gen_range(1..25) };
            let vocab = fit_vectorizer(docs.iter().map(|d| d.as_slice()), cap).map_err(|e| e.to_string())?;
            largest = largest.max(vocab.len());
            ensure(vocab.len() <= cap, || format!("case {case}: {} terms over cap {cap}", vocab.len()))?;

            let mut totals: std::collections::BTreeMap<String, usize> = Default::default();
            for d in &docs {
                for g in enumerate_ngrams(d) {
                    *totals.entry(g).or_default() += 1;
                }
            }
            ensure(vocab.len() == totals.len().min(cap), || format!("case {case}: vocabulary size"))?;
            let weakest_kept = vocab.terms().iter().map(|t| totals[t]).min().unwrap_or(usize::MAX);
            let strongest_dropped = totals
                .iter()
                .filter(|(t, _)| vocab.get(t).is_none())
                .map(|(_, &c)| c)
                .max()
                .unwrap_or(0);
            ensure(strongest_dropped <= weakest_kept, || {
                format!("case {case}: dropped a term seen {strongest_dropped} times")
            })?;

            for d in &docs {
                let grams = enumerate_ngrams(d);
                let mut expected: Vec<(u32, f64)> = Vec::new();
                for (col, term) in vocab.terms().iter().enumerate() {
                    let c = grams.iter().filter(|g| *g == term).count();
                    if c > 0 {
                        expected.push((col as u32, c as f64));
                    }
                }
                ensure(vectorize(d, &vocab) == expected, || format!("case {case}: counts differ for {d:?}"))?;
            }
        }
        Ok(format!("50 corpora, largest vocabulary {largest}"))
    })();
    check(2, "vectorizer oracle", outcome);
}

#[test]
fn c03_porter_vocabulary() {
    let voc = include_str!("data/porter_voc.txt");
    let expected = include_str!("data/porter_output.txt");
    let mut total = 0;
    let mut wrong = Vec::new();
    for (w, e) in voc.lines().zip(expected.lines()) {
        total += 1;
        let got = stem(w);
        if got != e {
            wrong.push(format!("{w} -> {got} (want {e})"));
        }
    }
    let outcome = if voc.lines().count() != expected.lines().count() {
        Err("vocabulary and output files differ in length".to_string())
    } else if wrong.is_empty() {
        Ok(format!("{total}/{total} words"))
    } else {
        Err(format!("{} of {total} differ, first: {}", wrong.len(), wrong[0]))
    };
    check(3, "porter stemmer", outcome);
}

fn densify(r: &FeatureVector, sparse_dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; sparse_dim];
    for &(c, x) in &r.sparse {
        v[c as usize] = x;
    }
    v.extend_from_slice(&r.dense);
    v
}

fn segment_residual(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(a, b)| b - a).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(a, p)| p - a).collect();
    let len2: f64 = ab.iter().map(|x| x * x).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (ap.iter().zip(&ab).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    ap.iter().zip(&ab).map(|(x, y)| (x - t * y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn c04_smote_geometry() {
    let mut r = rng(4);
    let sparse_dim = 6;
    let row = |r: &mut rand_chacha::ChaCha8Rng| {
        let mut sparse = Vec::new();
        for c in 0..sparse_dim as u32 {
            if r.gen_bool(0.3) {
                sparse.push((c, r.gen_range(1..4) as f64));
            }
        }
        FeatureVector {
            sparse,
            dense: (0..3).map(|_| r.gen_range(-5.0..5.0)).collect(),
        }
    };
    let outcome = (|| {
        let minority: Vec<FeatureVector> = (0..60).map(|_| row(&mut r)).collect();
        let refs: Vec<&FeatureVector> = minority.iter().collect();
        let k = 5;
        let made = smote_with_provenance(&refs, k, 10_000, &mut rng(40)).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for (i, (x, prov)) in made.iter().enumerate() {
            let base = &minority[prov.base];
            let nn = &minority[prov.neighbor];
            let mut dists: Vec<f64> = (0..minority.len())
                .filter(|&j| j != prov.base)
                .map(|j| squared_distance(base, &minority[j]))
                .collect();
            dists.sort_by(f64::total_cmp);
            ensure(prov.neighbor != prov.base && squared_distance(base, nn) <= dists[k - 1], || {
                format!("point {i}: neighbour {} is not among the {k} nearest", prov.neighbor)
            })?;
            let res = segment_residual(
                &densify(x, sparse_dim),
                &densify(base, sparse_dim),
                &densify(nn, sparse_dim),
            );
            worst = worst.max(res);
            ensure(res < 1e-9, || format!("point {i}: residual {res}"))?;
        }

        let mut rows: Vec<FeatureVector> = (0..140).map(|_| row(&mut r)).collect();
        rows.extend(minority.iter().cloned());
        let labels: Vec<bool> = (0..200).map(|i| i >= 140).collect();
        let data = Dataset::new(rows, labels, sparse_dim, 3).map_err(|e| e.to_string())?;
        let balanced = balance_to_parity(&data, k, &mut rng(41)).map_err(|e| e.to_string())?;
        let pos = balanced.n_positive();
        ensure(pos == 140 && balanced.len() == 280, || format!("{pos} positives of {}", balanced.len()))?;
        Ok(format!("10000 points, worst residual {worst:.1e}, 140/140 after balancing"))
    })();
    check(4, "smote geometry", outcome);
}

#[test]
fn c05_logistic_gradient() {
    let mut r = rng(5);
    let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..5).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
    let labels: Vec<bool> = rows.iter().map(|x| x[0] - x[3] + r.gen_range(-1.0..1.0) > 0.0).collect();
    let data = Dataset::from_dense(rows, labels).unwrap();
    let lambda = 1e-2;
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut failure = None;
    for point in 0..10 {
        let mut m = LinearModel::zeros(0, 5);
        for w in m.weights.iter_mut() {
            *w = r.gen_range(-1.5..1.5);
        }
        m.bias = r.gen_range(-1.0..1.0);
        let (g, gb) = logistic_gradient(&m, &data, lambda);
        for j in 0..6 {
            let analytic = if j < 5 { g[j] } else { gb };
            let mut plus = m.clone();
            let mut minus = m.clone();
            if j < 5 {
                plus.weights[j] += h;
                minus.weights[j] -= h;
            } else {
                plus.bias += h;
                minus.bias -= h;
            }
            let numeric =
                (logistic_objective(&plus, &data, lambda) - logistic_objective(&minus, &data, lambda)) / (2.0 * h);
            let rel = (numeric - analytic).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
            if rel >= 1e-5 && failure.is_none() {
                failure = Some(format!("point {point} coordinate {j}: relative error {rel:.2e}"));
            }
        }
    }
    let outcome = match failure {
        Some(f) => Err(f),
        None => Ok(format!("10 points, worst relative error {worst:.1e}")),
    };
    check(5, "logistic gradient", outcome);
}

#[test]
fn c06_fold_integrity() {
    let outcome = (|| {
        let mut r = rng(6);
        for case in 0..100 {
            let n = r.gen_range(20..400);
            let k = r.gen_range(2..11);
            let rate = r.gen_range(0.05..0.6);
            let labels: Vec<bool> = (0..n).map(|_| r.gen_bool(rate)).collect();
            let pos = labels.iter().filter(|&&y| y).count();
            if pos < k || n - pos < k {
                continue;
            }
            let plan = stratified_folds(&labels, k, case).map_err(|e| e.to_string())?;
            let mut seen = vec![0usize; n];
            for f in 0..k {
                for i in plan.test_indices(f) {
                    seen[i] += 1;
                }
                let train = plan.train_indices(f);
                ensure(train.len() + plan.test_indices(f).len() == n, || format!("case {case}: fold {f} sizes"))?;
            }
            ensure(seen.iter().all(|&c| c == 1), || format!("case {case}: not a partition"))?;
            let per = plan.positives_per_fold(&labels);
            let spread = per.iter().max().unwrap() - per.iter().min().unwrap();
            ensure(spread <= 1, || format!("case {case}: positives per fold {per:?}"))?;
        }

        let base = planted_signal_corpus(&SyntheticConfig {
            n_instances: 500,
            seed: 6,
            ..SyntheticConfig::default()
        });
        let plan = make_folds(&prep(&base), &CvOptions::default(), 6).map_err(|e| e.to_string())?;
        for fold in 0..plan.k {
            let mut perturbed = base.clone();
            for &i in &plan.test_indices(fold) {
                let inst = &mut perturbed.instances_mut()[i];
                inst.reply_text.push_str(" unseen tokens only here");
                inst.parent_text = "rewritten parent".into();
                inst.parent_meta.favourite_count += 500;
                inst.target_account.statuses_count += 1;
            }
            let train = plan.train_indices(fold);
            for m in ["rt+mt+tw+ac", "te+mt+tw+ac"] {
                let mask: FamilyMask = m.parse().unwrap();
                let (a, _) = fit_fold(&prep(&base), mask, &train, 5000).map_err(|e| e.to_string())?;
                let (b, _) = fit_fold(&prep(&perturbed), mask, &train, 5000).map_err(|e| e.to_string())?;
                ensure(a.vocabulary == b.vocabulary && a.scaler == b.scaler, || {
                    format!("fold {fold} mask {m}: fitted state changed")
                })?;
            }
        }
        Ok("100 random plans partition exactly, positives spread <= 1, no leakage".to_string())
    })();
    check(6, "fold integrity", outcome);
}

fn prep(c: &Corpus) -> PreparedCorpus<'_> {
    PreparedCorpus::new(c, &Preprocessor::default(), Lexica::embedded())
}

#[test]
fn c07_forest_determinism_and_importance() {
    let outcome = (|| {
        let mut r = rng(7);
        let rows: Vec<Vec<f64>> = (0..400).map(|_| (0..8).map(|_| r.gen_range(0.0..1.0)).collect()).collect();
        let noisy: Vec<bool> = rows.iter().map(|x| x[1] + x[2] + r.gen_range(-0.5..0.5) > 1.0).collect();
        let data = Dataset::from_dense(rows.clone(), noisy).map_err(|e| e.to_string())?;
        let serial = ForestParams {
            parallel: false,
            ..ForestParams::default()
        };
        let parallel = ForestParams {
            parallel: true,
            ..ForestParams::default()
        };
        let a = train_random_forest(&data, &serial, 70).map_err(|e| e.to_string())?;
        let b = train_random_forest(&data, &parallel, 70).map_err(|e| e.to_string())?;
        ensure(a == b, || "serial and parallel forests differ".into())?;

        let fixture: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![(i % 2) as f64, ((i * 37) % 11) as f64, ((i * 17) % 5) as f64])
            .collect();
        let labels: Vec<bool> = (0..200).map(|i| i % 2 == 1).collect();
        let decisive = Dataset::from_dense(fixture, labels).map_err(|e| e.to_string())?;
        let f = train_random_forest(&decisive, &ForestParams::default(), 71).map_err(|e| e.to_string())?;
        let sum: f64 = f.importances.iter().sum();
        ensure((sum - 1.0).abs() <= 1e-9, || format!("importances sum to {sum}"))?;
        ensure(f.importances[0] >= 0.9, || format!("decisive importance {}", f.importances[0]))?;

        // Reported only. With many high-cardinality irrelevant columns, the
        // splits made while the decisive column is not a candidate keep
        // roughly a tenth of the importance.
        let mut corpus = planted_signal_corpus(&SyntheticConfig {
            n_instances: 600,
            seed: 7,
            ..SyntheticConfig::default()
        });
        for (i, inst) in corpus.instances_mut().iter_mut().enumerate() {
            inst.target_account.account_id = format!("acct{i}");
            inst.target_account.verified = inst.label.is_abusive();
        }
        let spec = ModelSpec::new(ModelKind::RandomForest, 71);
        let rep = importance_report(&prep(&corpus), Family::Ac, &spec).map_err(|e| e.to_string())?;
        let continuous: Vec<bool> = rows.iter().map(|x| x[5] > 0.5).collect();
        let data = Dataset::from_dense(rows, continuous).map_err(|e| e.to_string())?;
        let g = train_random_forest(&data, &ForestParams::default(), 71).map_err(|e| e.to_string())?;
        Ok(format!(
            "{} trees identical, decisive importance {:.3}; reported only: account flag among 16 columns {} at {:.3}, \
             column among 7 continuous noise columns {:.3}",
            a.trees.len(),
            f.importances[0],
            rep.entries[0].feature,
            rep.entries[0].importance,
            g.importances[5]
        ))
    })();
    check(7, "random forest", outcome);
}

#[test]
fn c08_planted_signal_end_to_end() {
    let start = Instant::now();
    let cfg = SyntheticConfig {
        n_instances: 10_000,
        seed: 8,
        ..SyntheticConfig::default()
    };
    let corpus = planted_signal_corpus(&cfg);
    let p = PreparedCorpus::new(&corpus, &Preprocessor::default(), Lexica::embedded());
    let spec = ModelSpec::new(ModelKind::RandomForest, 8);
    let opts = CvOptions::default();
    let outcome = (|| {
        ensure(cfg.flip_rate < 0.02, || format!("flip rate {} allows Bayes error >= 0.02", cfg.flip_rate))?;
        let te = cross_validate(&p, "te".parse().unwrap(), &spec, &opts).map_err(|e| e.to_string())?;
        let rt = cross_validate(&p, "rt".parse().unwrap(), &spec, &opts).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let detail = format!("te F1 {:.3}, rt F1 {:.3}, {secs:.0} s", te.mean.f1, rt.mean.f1);
        ensure(te.mean.f1 >= 0.95 && rt.mean.f1 <= 0.60 && secs < 600.0, || detail.clone())?;
        Ok(detail)
    })();
    check(8, "planted signal", outcome);
}

fn oaa_corpus() -> Corpus {
    let path = std::env::var_os("OAA_CORPUS").unwrap_or_else(|| {
        panic!("OAA_CORPUS is not set; point it at the OAA corpus in JSON-lines form to run this criterion")
    });
    let ing = read_corpus_file(std::path::Path::new(&path)).expect("OAA corpus readable");
    assert!(ing.errors.is_empty(), "{} bad records in OAA corpus", ing.errors.len());
    let violations = validate_corpus(&ing.corpus);
    assert!(violations.is_empty(), "{} violations, first: {}", violations.len(), violations[0]);
    ing.corpus
}

#[test]
#[ignore = "needs the OAA corpus (set OAA_CORPUS)"]
fn c09_oaa_statistics() {
    let s = corpus_stats(&oaa_corpus());
    let detail = format!(
        "{} conversations, {} replies, {} abusive, {} with abuse, {} accounts",
        s.n_conversations, s.n_replies, s.n_abusive, s.n_conversations_with_abusive, s.n_accounts
    );
    let ok = s.n_conversations == 106_914
        && s.n_replies == 153_144
        && s.n_abusive == 24_907
        && s.n_conversations_with_abusive == 21_383;
    check(9, "oaa statistics", if ok { Ok(detail) } else { Err(detail) });
}

#[test]
#[ignore = "needs the OAA corpus (set OAA_CORPUS)"]
fn c10_oaa_directional_grid() {
    let corpus = oaa_corpus();
    let labels: Vec<bool> = corpus.instances().iter().map(|i| i.label.is_abusive()).collect();
    let masks = FamilyMask::paper16();
    let seeds = [1u64, 2, 3];
    let mut f1 = vec![0.0; masks.len()];
    for &seed in &seeds {
        let idx = stratified_subsample(&labels, 20_000, seed).unwrap();
        let sample = corpus.subset(&idx);
        let p = PreparedCorpus::new(&sample, &Preprocessor::default(), Lexica::embedded());
        let opts = CvOptions {
            k: 5,
            group_by: GroupBy::None,
        };
        let report = run_grid(&p, &masks, &[ModelKind::RandomForest], &Hyperparameters::default(), seed, &opts).unwrap();
        for (acc, row) in f1.iter_mut().zip(&report.rows) {
            *acc += row.mean.f1 / seeds.len() as f64;
        }
    }
    let at = |s: &str| f1[masks.iter().position(|m| *m == s.parse::<FamilyMask>().unwrap()).unwrap()];
    let rt = at("rt");
    let best_context = masks
        .iter()
        .zip(&f1)
        .filter(|(m, _)| !m.rt)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    let ac = at("ac");
    let (tmt, all) = (at("te+mt+tw"), at("te+mt+tw+ac"));
    let detail = format!("rt {rt:.3}, best contextual {best_context:.3}, ac {ac:.3}, te+mt+tw {tmt:.3}, all four {all:.3}");
    let ok = (rt - 0.84).abs() <= 0.10 && best_context >= rt - 0.02 && ac <= 0.50 && (tmt - all).abs() <= 0.03;
    check(10, "oaa directional grid", if ok { Ok(detail) } else { Err(detail) });
}

#[test]
#[ignore = "needs the OAA corpus (set OAA_CORPUS)"]
fn c11_oaa_importance_ranks() {
    let corpus = oaa_corpus();
    let p = PreparedCorpus::new(&corpus, &Preprocessor::default(), Lexica::embedded());
    let spec = ModelSpec::new(ModelKind::RandomForest, 1);
    let tw = importance_report(&p, Family::Tw, &spec).unwrap();
    let ac = importance_report(&p, Family::Ac, &spec).unwrap();
    let tw_first = tw.entries[0].feature.clone();
    let top4: Vec<&str> = ac.entries.iter().take(4).map(|e| e.feature.as_str()).collect();
    let wanted = ["favourites_count", "followers_count", "friends_count"];
    let detail = format!("tw first {tw_first}, ac top four {top4:?}");
    let ok = tw_first == "reply_negative_sentiment" && wanted.iter().all(|w| top4.contains(w));
    check(11, "oaa importance ranks", if ok { Ok(detail) } else { Err(detail) });
}
