//! Run configuration: one flat TOML table. Every key has a default and may
//! be overridden from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assets::{sha256_hex, AssetPaths};
use crate::error::{Error, Result};
use crate::eval::{CvOptions, GroupBy};
use crate::features::FamilyMask;
use crate::models::{Hyperparameters, ModelKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub k: usize,
    /// Comma-separated masks such as `te+mt,rt`, or `paper16`.
    pub masks: String,
    /// Comma-separated model kinds.
    pub models: String,
    /// Mask and model of the single-cell commands.
    pub mask: String,
    pub model: String,
    pub sample_size: Option<usize>,
    pub group_by: GroupBy,
    pub workers: Option<usize>,
    pub keep_hashtag_body: bool,
    #[serde(flatten)]
    pub assets: AssetPaths,
    #[serde(flatten)]
    pub hyper: Hyperparameters,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            out: PathBuf::from("out"),
            seed: 7,
            k: 5,
            masks: "paper16".into(),
            models: "lr,svm,rf".into(),
            mask: "rt".into(),
            model: "rf".into(),
            sample_size: None,
            group_by: GroupBy::None,
            workers: None,
            keep_hashtag_body: true,
            assets: AssetPaths::default(),
            hyper: Hyperparameters::default(),
        }
    }
}

const RUN_KEYS: &[&str] = &[
    "input",
    "out",
    "seed",
    "k",
    "masks",
    "models",
    "mask",
    "model",
    "sample_size",
    "group_by",
    "workers",
    "keep_hashtag_body",
    "stopword_path",
    "sentiment_lexicon_path",
    "hate_words_path",
    "abusive_words_path",
];

pub const HYPER_KEYS: &[&str] = &[
    "lr_lambda",
    "lr_max_iter",
    "lr_tol",
    "svm_lambda",
    "svm_epochs",
    "rf_trees",
    "rf_max_depth",
    "rf_min_samples_split",
    "rf_min_samples_leaf",
    "rf_max_features",
    "smote_k",
    "threshold",
    "max_vocab",
];

pub fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

pub fn load_table(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text)
}

/// Applies a `key=value` override. The value is read as a TOML value when
/// it parses as one and as a bare string otherwise.
pub fn set_key(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected key=value, got {assignment:?}")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    table.insert(key.to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parses a config file body. Unknown keys are rejected by name.
    pub fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::from_table(parse_table(text)?)
    }

    pub fn from_table(table: toml::Table) -> Result<RunConfig> {
        for key in table.keys() {
            if !RUN_KEYS.contains(&key.as_str()) && !HYPER_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown config key {key:?}")));
            }
        }
        let cfg: RunConfig = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::from_table(load_table(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if self.sample_size == Some(0) {
            return Err(Error::Config("sample_size must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be positive".into()));
        }
        self.mask_list()?;
        self.model_list()?;
        self.single_mask()?;
        self.single_model()?;
        Ok(())
    }

    pub fn mask_list(&self) -> Result<Vec<FamilyMask>> {
        FamilyMask::parse_list(&self.masks)
    }

    pub fn model_list(&self) -> Result<Vec<ModelKind>> {
        let kinds: Vec<ModelKind> = self
            .models
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        if kinds.is_empty() {
            return Err(Error::Config("models must name at least one model".into()));
        }
        Ok(kinds)
    }

    pub fn single_mask(&self) -> Result<FamilyMask> {
        let m: FamilyMask = self.mask.parse()?;
        m.validate()?;
        Ok(m)
    }

    pub fn single_model(&self) -> Result<ModelKind> {
        self.model.parse()
    }

    pub fn cv_options(&self) -> CvOptions {
        CvOptions {
            k: self.k,
            group_by: self.group_by,
        }
    }

    /// Canonical TOML of the resolved configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_toml().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_key_reads_values() {
        let mut t = toml::Table::new();
        set_key(&mut t, "seed=3").unwrap();
        set_key(&mut t, "masks = te+mt,rt").unwrap();
        set_key(&mut t, "out=\"dir\"").unwrap();
        let cfg = RunConfig::from_table(t).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.masks, "te+mt,rt");
        assert_eq!(cfg.out, PathBuf::from("dir"));
        assert!(set_key(&mut toml::Table::new(), "novalue").is_err());
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn flat_keys_reach_nested_fields() {
        let cfg = RunConfig::parse(
            "seed = 11\nrf_trees = 20\nhate_words_path = \"h.txt\"\ngroup_by = \"account\"\nmasks = \"te,rt\"",
        )
        .unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.hyper.rf_trees, 20);
        assert_eq!(cfg.assets.hate_words_path, Some(PathBuf::from("h.txt")));
        assert_eq!(cfg.group_by, GroupBy::Account);
        assert_eq!(cfg.mask_list().unwrap().len(), 2);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("seeed = 1").unwrap_err().to_string();
        assert!(err.contains("seeed"), "{err}");
    }

    #[test]
    fn bad_values_fail_validation() {
        assert!(RunConfig::parse("k = 1").unwrap().validate().is_err());
        assert!(RunConfig::parse("models = \"knn\"").unwrap().validate().is_err());
        assert!(RunConfig::parse("threshold = 2.0").unwrap().validate().is_err());
        assert!(RunConfig::parse("seed = \"x\"").is_err());
    }

    #[test]
    fn every_hyperparameter_is_a_known_key() {
        let h = Hyperparameters {
            rf_max_depth: Some(3),
            rf_max_features: Some(2),
            ..Hyperparameters::default()
        };
        let table = toml::Table::try_from(&h).unwrap();
        let mut keys: Vec<&str> = table.keys().map(String::as_str).collect();
        keys.sort_unstable();
        let mut want = HYPER_KEYS.to_vec();
        want.sort_unstable();
        assert_eq!(keys, want);
    }

    #[test]
    fn round_trip_and_hash() {
        let mut cfg = RunConfig::default();
        cfg.sample_size = Some(100);
        let back = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        cfg.seed += 1;
        assert_ne!(back.hash(), cfg.hash());
    }
}
