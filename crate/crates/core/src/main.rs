use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use convabuse::assets::{load_assets, sha256_hex, Assets};
use convabuse::config::{load_table, set_key, RunConfig};
use convabuse::corpus::{corpus_stats, read_corpus_file, validate_corpus, Corpus};
use convabuse::eval::{
    cross_validate, fit_layout, importance_report, run_grid_with, stratified_subsample, user_median_split,
    PreparedCorpus,
};
use convabuse::features::{Family, FamilyMask};
use convabuse::models::{ModelSpec, FORMAT_VERSION};
use convabuse::Error;

#[derive(Parser)]
#[command(name = "convabuse", version, about = "Abusive reply detection with conversational context")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Stratified subsample size.
    #[arg(long, global = true)]
    sample: Option<usize>,
    /// Corpus file (JSON lines).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Override any config key, e.g. `--set rf_trees=50`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a corpus, write it in canonical form.
    Ingest {
        #[arg(value_name = "INPUT")]
        path: PathBuf,
        /// Canonical corpus path (default: <out>/corpus.jsonl).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print corpus statistics.
    Stats {
        #[arg(value_name = "INPUT")]
        path: Option<PathBuf>,
    },
    /// Cross-validate every mask against every model.
    Grid {
        #[arg(long)]
        masks: Option<String>,
        #[arg(long)]
        models: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        group_by: Option<String>,
    },
    /// Cross-validate one mask and model.
    Run {
        #[arg(long)]
        mask: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        group_by: Option<String>,
        /// Also fit on the whole corpus and save the model artifact.
        #[arg(long)]
        save_model: bool,
    },
    /// Rank the features of one family by random-forest importance.
    Importance {
        #[arg(long)]
        family: String,
    },
    /// Per-account F1 and the median split of target accounts.
    Usersplit {
        #[arg(long)]
        mask: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        k: Option<usize>,
    },
}

enum Failure {
    Config(String),
    Data(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let msg = e.to_string();
        match e {
            Error::Config(_)
            | Error::Mask(_)
            | Error::Asset { .. }
            | Error::InvalidFoldCount(_)
            | Error::WrongModelKind(_)
            | Error::ArtifactVersion(_) => Failure::Config(msg),
            Error::Io { .. }
            | Error::Stream(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::EmptyInput(_)
            | Error::EmptyVocabularyInput
            | Error::NonFinite { .. }
            | Error::SingleClass
            | Error::TooFewMinority(_)
            | Error::ClassTooSmall { .. }
            | Error::MissingEmbedding { .. } => Failure::Data(msg),
            _ => Failure::Internal(msg),
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn config_err(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

fn resolve_config(cli: &Cli) -> Outcome<RunConfig> {
    let mut table = match &cli.config {
        Some(p) => load_table(p).map_err(config_err)?,
        None => toml::Table::new(),
    };
    for s in &cli.set {
        set_key(&mut table, s).map_err(config_err)?;
    }
    let mut put = |key: &str, v: toml::Value| {
        table.insert(key.to_string(), v);
    };
    let path_value = |p: &Path| toml::Value::String(p.to_string_lossy().into_owned());
    if let Some(s) = cli.seed {
        put("seed", toml::Value::Integer(s as i64));
    }
    if let Some(p) = &cli.out {
        put("out", path_value(p));
    }
    if let Some(w) = cli.workers {
        put("workers", toml::Value::Integer(w as i64));
    }
    if let Some(n) = cli.sample {
        put("sample_size", toml::Value::Integer(n as i64));
    }
    if let Some(p) = &cli.input {
        put("input", path_value(p));
    }
    let text = |s: &Option<String>| s.clone().map(toml::Value::String);
    let int = |k: &Option<usize>| k.map(|v| toml::Value::Integer(v as i64));
    let overrides: Vec<(&str, Option<toml::Value>)> = match &cli.command {
        Command::Grid {
            masks,
            models,
            k,
            group_by,
        } => vec![
            ("masks", text(masks)),
            ("models", text(models)),
            ("k", int(k)),
            ("group_by", text(group_by)),
        ],
        Command::Run {
            mask,
            model,
            k,
            group_by,
            ..
        } => vec![
            ("mask", text(mask)),
            ("model", text(model)),
            ("k", int(k)),
            ("group_by", text(group_by)),
        ],
        Command::Usersplit { mask, model, k } => {
            vec![("mask", text(mask)), ("model", text(model)), ("k", int(k))]
        }
        Command::Stats { path: Some(p) } => vec![("input", Some(path_value(p)))],
        Command::Ingest { path, .. } => vec![("input", Some(path_value(path)))],
        _ => Vec::new(),
    };
    for (k, v) in overrides {
        if let Some(v) = v {
            put(k, v);
        }
    }
    let cfg = RunConfig::from_table(table).map_err(config_err)?;
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn input_path(cfg: &RunConfig) -> Outcome<&Path> {
    cfg.input
        .as_deref()
        .ok_or_else(|| Failure::Config("no input corpus: pass --input or set `input`".into()))
}

/// Loads a corpus that must be free of record errors and violations, then
/// applies the configured subsample.
fn load_clean_corpus(cfg: &RunConfig) -> Outcome<Corpus> {
    let path = input_path(cfg)?;
    let ingested = read_corpus_file(path)?;
    let violations = validate_corpus(&ingested.corpus);
    if !ingested.errors.is_empty() || !violations.is_empty() {
        let mut first: Vec<String> = ingested.errors.iter().map(|e| e.to_string()).collect();
        first.extend(violations.iter().map(|v| v.to_string()));
        first.truncate(5);
        return Err(Failure::Data(format!(
            "{} has {} bad records and {} violations (run `ingest` first):\n  {}",
            path.display(),
            ingested.errors.len(),
            violations.len(),
            first.join("\n  ")
        )));
    }
    let corpus = ingested.corpus;
    match cfg.sample_size {
        Some(n) if n < corpus.len() => {
            let labels: Vec<bool> = corpus.instances().iter().map(|i| i.label.is_abusive()).collect();
            let idx = stratified_subsample(&labels, n, cfg.seed)?;
            Ok(corpus.subset(&idx))
        }
        _ => Ok(corpus),
    }
}

fn create_out(cfg: &RunConfig) -> Outcome<&Path> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    Ok(&cfg.out)
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> convabuse::Result<()>) -> Outcome {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_sha256: String,
    config: &'a RunConfig,
    seed: u64,
    input: Option<String>,
    input_sha256: Option<String>,
    assets: &'a BTreeMap<String, String>,
    versions: BTreeMap<&'static str, String>,
    outputs: Vec<String>,
}

fn write_manifest(cfg: &RunConfig, assets: &Assets, command: &str, outputs: &[&str]) -> Outcome {
    let input_sha256 = match &cfg.input {
        Some(p) => Some(sha256_hex(&fs::read(p).map_err(|e| Error::io(p, e))?)),
        None => None,
    };
    let manifest = Manifest {
        command,
        config_sha256: cfg.hash(),
        config: cfg,
        seed: cfg.seed,
        input: cfg.input.as_ref().map(|p| p.display().to_string()),
        input_sha256,
        assets: &assets.checksums,
        versions: BTreeMap::from([
            ("convabuse", env!("CARGO_PKG_VERSION").to_string()),
            ("model_format", FORMAT_VERSION.to_string()),
        ]),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(Error::from)? + "\n";
    let path = cfg.out.join("manifest.json");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

fn cmd_ingest(cfg: &RunConfig, output: Option<&Path>) -> Outcome {
    let path = input_path(cfg)?;
    let ingested = read_corpus_file(path)?;
    let violations = validate_corpus(&ingested.corpus);
    let out_dir = create_out(cfg)?;
    let target = output.map(Path::to_path_buf).unwrap_or_else(|| out_dir.join("corpus.jsonl"));
    write_file(&target, |buf| ingested.corpus.write_jsonl(buf))?;
    let report = out_dir.join("ingest_errors.csv");
    write_file(&report, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["kind", "location", "message"])?;
        for e in &ingested.errors {
            w.write_record(["record".to_string(), format!("line {}", e.line), e.to_string()])?;
        }
        for v in &violations {
            w.write_record(["violation".to_string(), format!("instance {}", v.instance), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    })?;
    let assets = resolve_assets(cfg)?;
    let target_name = match output {
        Some(p) => p.display().to_string(),
        None => "corpus.jsonl".to_string(),
    };
    write_manifest(cfg, &assets, "ingest", &[&target_name, "ingest_errors.csv"])?;
    eprintln!(
        "ingested {} records into {} ({} bad records, {} violations)",
        ingested.corpus.len(),
        target.display(),
        ingested.errors.len(),
        violations.len()
    );
    for e in ingested.errors.iter().take(10) {
        eprintln!("  {e}");
    }
    for v in violations.iter().take(10) {
        eprintln!("  {v}");
    }
    if ingested.errors.is_empty() && violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Data(format!("see {}", report.display())))
    }
}

fn cmd_stats(cfg: &RunConfig) -> Outcome {
    let path = input_path(cfg)?;
    let ingested = read_corpus_file(path)?;
    if !ingested.errors.is_empty() {
        eprintln!("skipped {} bad records", ingested.errors.len());
    }
    let stats = corpus_stats(&ingested.corpus);
    print!("{}", stats.to_aligned_text());
    Ok(())
}

fn prepare<'a>(corpus: &'a Corpus, assets: &Assets) -> PreparedCorpus<'a> {
    PreparedCorpus::new(corpus, &assets.preprocessor, assets.lexica.clone())
}

fn resolve_assets(cfg: &RunConfig) -> Outcome<Assets> {
    load_assets(&cfg.assets, cfg.keep_hashtag_body).map_err(|e| match e {
        Error::Io { .. } => Failure::Config(e.to_string()),
        other => other.into(),
    })
}

fn cmd_grid(cfg: &RunConfig) -> Outcome {
    let corpus = load_clean_corpus(cfg)?;
    let out = create_out(cfg)?;
    let masks = cfg.mask_list()?;
    let kinds = cfg.model_list()?;
    let assets = resolve_assets(cfg)?;
    let prepared = prepare(&corpus, &assets);
    let total = masks.len() * kinds.len();
    let mut done = 0;
    let report = run_grid_with(&prepared, &masks, &kinds, &cfg.hyper, cfg.seed, &cfg.cv_options(), |row| {
        done += 1;
        eprintln!(
            "[{done}/{total}] {:<12} {:<3} F1 {:.3}  P {:.3}  R {:.3}",
            row.mask.to_string(),
            row.kind.short_name(),
            row.mean.f1,
            row.mean.precision,
            row.mean.recall
        );
    })?;
    write_file(&out.join("grid_report.csv"), |b| report.write_csv(b))?;
    fs::write(out.join("grid_report.md"), report.to_markdown()).map_err(|e| Error::io(out, e))?;
    write_manifest(cfg, &assets, "grid", &["grid_report.csv", "grid_report.md"])?;
    print!("{}", report.to_markdown());
    Ok(())
}

fn spec_for(cfg: &RunConfig) -> Outcome<ModelSpec> {
    Ok(ModelSpec {
        kind: cfg.single_model()?,
        hyper: cfg.hyper.clone(),
        seed: cfg.seed,
    })
}

fn write_feature_manifest(cfg: &RunConfig, p: &PreparedCorpus, mask: FamilyMask) -> Outcome {
    let all: Vec<usize> = (0..p.len()).collect();
    let (vocab, layout) = fit_layout(p, mask, &all, cfg.hyper.max_vocab)?;
    write_file(&cfg.out.join("features.csv"), |b| layout.write_manifest(vocab.as_ref(), b))
}

fn cmd_run(cfg: &RunConfig, save_model: bool) -> Outcome {
    let corpus = load_clean_corpus(cfg)?;
    let out = create_out(cfg)?;
    let mask = cfg.single_mask()?;
    let spec = spec_for(cfg)?;
    let assets = resolve_assets(cfg)?;
    let prepared = prepare(&corpus, &assets);
    let r = cross_validate(&prepared, mask, &spec, &cfg.cv_options())?;

    write_file(&out.join("run_folds.csv"), |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record([
            "fold",
            "n_train",
            "n_test",
            "n_synthetic",
            "tp",
            "fp",
            "fn",
            "tn",
            "precision",
            "recall",
            "f1",
        ])?;
        for f in &r.folds {
            let c = &f.confusion;
            w.write_record([
                (f.fold + 1).to_string(),
                f.n_train.to_string(),
                f.n_test.to_string(),
                f.n_synthetic.to_string(),
                c.tp.to_string(),
                c.fp.to_string(),
                c.fn_.to_string(),
                c.tn.to_string(),
                f.metrics.precision.to_string(),
                f.metrics.recall.to_string(),
                f.metrics.f1.to_string(),
            ])?;
        }
        for (name, m) in [("mean", r.mean), ("pooled", r.pooled)] {
            let blank = String::new;
            w.write_record([
                name.to_string(),
                blank(),
                blank(),
                blank(),
                blank(),
                blank(),
                blank(),
                blank(),
                m.precision.to_string(),
                m.recall.to_string(),
                m.f1.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    write_file(&out.join("predictions.csv"), |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["index", "conversation_id", "account_id", "label", "predicted", "score"])?;
        for (i, inst) in corpus.instances().iter().enumerate() {
            w.write_record([
                i.to_string(),
                inst.conversation_id.clone(),
                inst.target_account.account_id.clone(),
                inst.label.to_string(),
                convabuse::corpus::Label::from(r.predictions[i]).to_string(),
                r.scores[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    write_feature_manifest(cfg, &prepared, mask)?;
    let mut outputs = vec!["run_folds.csv", "predictions.csv", "features.csv"];
    if save_model {
        let all: Vec<usize> = (0..prepared.len()).collect();
        let (model, _) = convabuse::eval::fit_on(&prepared, mask, &spec, &all)?;
        model.save(&out.join("model.json"))?;
        outputs.push("model.json");
    }
    write_manifest(cfg, &assets, "run", &outputs)?;
    println!(
        "{mask} {}: F1 {:.4}  P {:.4}  R {:.4}  (mean of {} folds; pooled F1 {:.4})",
        spec.kind,
        r.mean.f1,
        r.mean.precision,
        r.mean.recall,
        r.folds.len(),
        r.pooled.f1
    );
    Ok(())
}

fn cmd_importance(cfg: &RunConfig, family: &str) -> Outcome {
    let family: Family = family.parse().map_err(config_err)?;
    let corpus = load_clean_corpus(cfg)?;
    let out = create_out(cfg)?;
    let mut spec = spec_for(cfg)?;
    spec.kind = convabuse::models::ModelKind::RandomForest;
    let assets = resolve_assets(cfg)?;
    let prepared = prepare(&corpus, &assets);
    let report = importance_report(&prepared, family, &spec)?;
    let name = format!("importance_{}.csv", family.name());
    write_file(&out.join(&name), |b| report.write_csv(b))?;
    write_manifest(cfg, &assets, "importance", &[&name])?;
    for (i, e) in report.entries.iter().take(10).enumerate() {
        println!("{:>2}. {:<32} {:.4}", i + 1, e.feature, e.importance);
    }
    Ok(())
}

fn cmd_usersplit(cfg: &RunConfig) -> Outcome {
    let corpus = load_clean_corpus(cfg)?;
    let out = create_out(cfg)?;
    let mask = cfg.single_mask()?;
    let spec = spec_for(cfg)?;
    let assets = resolve_assets(cfg)?;
    let prepared = prepare(&corpus, &assets);
    let r = cross_validate(&prepared, mask, &spec, &cfg.cv_options())?;
    let labels = prepared.labels();
    let accounts = prepared.account_ids();
    let mut report = user_median_split(&labels, &r.predictions, &accounts)?;

    let meta: FamilyMask = "mt+tw+ac".parse()?;
    let all: Vec<usize> = (0..prepared.len()).collect();
    let rows: Vec<Vec<f64>> = prepared
        .assemble_rows(&all, meta, None, None)?
        .into_iter()
        .map(|v| v.dense)
        .collect();
    let names = convabuse::features::FeatureLayout::new(meta, None, None)?.dense_names;
    report.attach_group_averages(&accounts, &names, &rows)?;

    write_file(&out.join("user_f1.csv"), |b| report.write_user_csv(b))?;
    write_file(&out.join("group_feature_averages.csv"), |b| report.write_group_csv(b))?;
    write_manifest(cfg, &assets, "usersplit", &["user_f1.csv", "group_feature_averages.csv"])?;
    println!(
        "{} accounts, median F1 {:.4}: {} above, {} below{}{}",
        report.accounts.len(),
        report.median,
        report.n_above,
        report.n_below,
        if report.all_tied { " (all accounts tied)" } else { "" },
        if report.n_degenerate > 0 {
            format!(", {} accounts without abusive replies", report.n_degenerate)
        } else {
            String::new()
        }
    );
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    let cfg = resolve_config(cli)?;
    if let Some(n) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    match &cli.command {
        Command::Ingest { output, .. } => cmd_ingest(&cfg, output.as_deref()),
        Command::Stats { .. } => cmd_stats(&cfg),
        Command::Grid { .. } => cmd_grid(&cfg),
        Command::Run { save_model, .. } => cmd_run(&cfg, *save_model),
        Command::Importance { family } => cmd_importance(&cfg, family),
        Command::Usersplit { .. } => cmd_usersplit(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (kind, msg) = match &f {
                Failure::Config(m) => ("config error", m),
                Failure::Data(m) => ("data error", m),
                Failure::Internal(m) => ("internal error", m),
            };
            let _ = writeln!(io::stderr(), "convabuse: {kind}: {msg}");
            ExitCode::from(f.code())
        }
    }
}
