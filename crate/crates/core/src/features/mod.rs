//! Feature families and per-instance vector assembly.
//!
//! A vector has a sparse block (bag-of-n-grams counts) and a dense block
//! (meta features). Which families contribute is decided by a
//! [`FamilyMask`]; dense ranges always appear in the canonical order
//! Te scalars, Mt, Tw, Ac, Emb.

pub mod families;
pub mod lexicon;
pub mod vocab;

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::models::scaler::ScalerParams;
use crate::preprocess::ProcessedText;

pub use families::{
    account_features, meta_text_features, named_entity_count, sentiment_scores, text_scalars,
    tweet_features, NamedVector, SentimentScores, ACCOUNT_NAMES, META_TEXT_NAMES, TEXT_SCALAR_NAMES,
    TWEET_NAMES,
};
pub use lexicon::{Lexica, SentimentLexicon, WordList};
pub use vocab::{fit_vectorizer, vectorize, Vocabulary, DEFAULT_MAX_DIMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rt,
    Te,
    Mt,
    Tw,
    Ac,
    Emb,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Rt,
        Family::Te,
        Family::Mt,
        Family::Tw,
        Family::Ac,
        Family::Emb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Rt => "rt",
            Family::Te => "te",
            Family::Mt => "mt",
            Family::Tw => "tw",
            Family::Ac => "ac",
            Family::Emb => "emb",
        }
    }

    /// Capitalized column label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Family::Rt => "Rt",
            Family::Te => "Te",
            Family::Mt => "Mt",
            Family::Tw => "Tw",
            Family::Ac => "Ac",
            Family::Emb => "Emb",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Mask(format!("unknown family `{s}`")))
    }
}

/// Which feature families are active in one experiment cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FamilyMask {
    pub rt: bool,
    pub te: bool,
    pub mt: bool,
    pub tw: bool,
    pub ac: bool,
    pub emb: bool,
}

impl FamilyMask {
    pub fn of(families: &[Family]) -> FamilyMask {
        let mut m = FamilyMask::default();
        for f in families {
            m.set(*f, true);
        }
        m
    }

    pub fn has(&self, f: Family) -> bool {
        match f {
            Family::Rt => self.rt,
            Family::Te => self.te,
            Family::Mt => self.mt,
            Family::Tw => self.tw,
            Family::Ac => self.ac,
            Family::Emb => self.emb,
        }
    }

    pub fn set(&mut self, f: Family, on: bool) {
        match f {
            Family::Rt => self.rt = on,
            Family::Te => self.te = on,
            Family::Mt => self.mt = on,
            Family::Tw => self.tw = on,
            Family::Ac => self.ac = on,
            Family::Emb => self.emb = on,
        }
    }

    pub fn families(&self) -> Vec<Family> {
        Family::ALL.into_iter().filter(|f| self.has(*f)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.families().is_empty()
    }

    pub fn uses_text(&self) -> bool {
        self.rt || self.te
    }

    pub fn union(&self, other: &FamilyMask) -> FamilyMask {
        let mut m = *self;
        for f in other.families() {
            m.set(f, true);
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Mask("at least one family must be active".into()));
        }
        if self.rt && self.te {
            return Err(Error::Mask("rt and te are mutually exclusive".into()));
        }
        Ok(())
    }

    /// Stable small integer used to derive per-cell seeds.
    pub fn bits(&self) -> u64 {
        Family::ALL
            .iter()
            .enumerate()
            .filter(|(_, f)| self.has(**f))
            .map(|(i, _)| 1u64 << i)
            .sum()
    }

    /// The 16 rows of the published comparison table, in row order: the 15
    /// non-empty combinations of {te, mt, tw, ac}, then the reply-only
    /// baseline.
    pub fn paper16() -> Vec<FamilyMask> {
        use Family::*;
        [
            &[Te][..],
            &[Mt],
            &[Tw],
            &[Ac],
            &[Te, Mt],
            &[Te, Tw],
            &[Te, Ac],
            &[Mt, Tw],
            &[Mt, Ac],
            &[Tw, Ac],
            &[Te, Mt, Tw],
            &[Te, Mt, Ac],
            &[Te, Tw, Ac],
            &[Mt, Tw, Ac],
            &[Te, Mt, Tw, Ac],
            &[Rt],
        ]
        .iter()
        .map(|fs| FamilyMask::of(fs))
        .collect()
    }

    /// Parses a comma-separated list of masks; `paper16` expands to the
    /// full table.
    pub fn parse_list(s: &str) -> Result<Vec<FamilyMask>> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            if item.eq_ignore_ascii_case("paper16") {
                out.extend(FamilyMask::paper16());
            } else {
                out.push(item.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Mask("empty mask list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for FamilyMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.families().iter().map(|f| f.name()).collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join("+"))
        }
    }
}

impl FromStr for FamilyMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<FamilyMask> {
        let mut m = FamilyMask::default();
        for part in s.split('+') {
            m.set(part.parse()?, true);
        }
        m.validate()?;
        Ok(m)
    }
}

impl TryFrom<String> for FamilyMask {
    type Error = Error;

    fn try_from(s: String) -> Result<FamilyMask> {
        s.parse()
    }
}

impl From<FamilyMask> for String {
    fn from(m: FamilyMask) -> String {
        m.to_string()
    }
}

/// One assembled instance. Sparse entries are sorted by column and live in
/// `0..layout.sparse_dim`; dense values follow the layout's name list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    pub sparse: Vec<(u32, f64)>,
    pub dense: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRange {
    pub family: Family,
    pub dense: bool,
    pub start: usize,
    pub end: usize,
}

impl FamilyRange {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

/// Column layout shared by every vector assembled under one mask and
/// vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub mask: FamilyMask,
    pub vocab_size: usize,
    pub sparse_dim: usize,
    pub dense_names: Vec<String>,
    pub ranges: Vec<FamilyRange>,
}

impl FeatureLayout {
    pub fn new(mask: FamilyMask, vocab: Option<&Vocabulary>, embedding_dim: Option<usize>) -> Result<FeatureLayout> {
        mask.validate()?;
        let vocab_size = match (mask.uses_text(), vocab) {
            (true, Some(v)) => v.len(),
            (true, None) => return Err(Error::Mask(format!("mask {mask} needs a fitted vocabulary"))),
            (false, _) => 0,
        };
        let mut ranges = Vec::new();
        let mut sparse_dim = 0;
        if mask.rt {
            ranges.push(FamilyRange {
                family: Family::Rt,
                dense: false,
                start: 0,
                end: vocab_size,
            });
            sparse_dim = vocab_size;
        }
        if mask.te {
            ranges.push(FamilyRange {
                family: Family::Te,
                dense: false,
                start: 0,
                end: 2 * vocab_size,
            });
            sparse_dim = 2 * vocab_size;
        }

        let mut dense_names: Vec<String> = Vec::new();
        let mut push_dense = |family: Family, names: &mut dyn Iterator<Item = String>| {
            let start = dense_names.len();
            dense_names.extend(names);
            ranges.push(FamilyRange {
                family,
                dense: true,
                start,
                end: dense_names.len(),
            });
        };
        let to_owned = |ns: &'static [&'static str]| ns.iter().map(|s| s.to_string());
        if mask.te {
            push_dense(Family::Te, &mut to_owned(&TEXT_SCALAR_NAMES));
        }
        if mask.mt {
            push_dense(Family::Mt, &mut to_owned(&META_TEXT_NAMES));
        }
        if mask.tw {
            push_dense(Family::Tw, &mut to_owned(&TWEET_NAMES));
        }
        if mask.ac {
            push_dense(Family::Ac, &mut to_owned(&ACCOUNT_NAMES));
        }
        if mask.emb {
            let d = embedding_dim
                .ok_or_else(|| Error::Mask("emb family needs a corpus embedding dimension".into()))?;
            push_dense(Family::Emb, &mut (0..d).map(|i| format!("emb_{i}")));
        }
        Ok(FeatureLayout {
            mask,
            vocab_size,
            sparse_dim,
            dense_names,
            ranges,
        })
    }

    pub fn dense_dim(&self) -> usize {
        self.dense_names.len()
    }

    pub fn total_dim(&self) -> usize {
        self.sparse_dim + self.dense_dim()
    }

    /// Global column names: sparse columns first, then dense.
    pub fn column_names(&self, vocab: Option<&Vocabulary>) -> Vec<String> {
        let mut names = Vec::with_capacity(self.total_dim());
        if let Some(v) = vocab.filter(|_| self.sparse_dim > 0) {
            names.extend(v.terms().iter().map(|t| format!("reply:{t}")));
            if self.mask.te {
                names.extend(v.terms().iter().map(|t| format!("parent:{t}")));
            }
        }
        names.extend(self.dense_names.iter().cloned());
        names
    }

    pub fn column_family(&self, column: usize) -> Option<Family> {
        if column < self.sparse_dim {
            return self.ranges.iter().find(|r| !r.dense).map(|r| r.family);
        }
        let d = column - self.sparse_dim;
        self.ranges
            .iter()
            .find(|r| r.dense && r.range().contains(&d))
            .map(|r| r.family)
    }

    /// Writes the `name,family,index` manifest.
    pub fn write_manifest<W: Write>(&self, vocab: Option<&Vocabulary>, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["name", "family", "index"])?;
        for (i, name) in self.column_names(vocab).iter().enumerate() {
            let fam = self.column_family(i).map(Family::name).unwrap_or("");
            w.write_record([name.as_str(), fam, &i.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds one feature vector. Text families need `vocab`; when `scaler` is
/// given the dense block is standardized with its parameters.
#[allow(clippy::too_many_arguments)]
pub fn assemble(
    inst: &Instance,
    parent_pt: &ProcessedText,
    reply_pt: &ProcessedText,
    mask: FamilyMask,
    vocab: Option<&Vocabulary>,
    lexica: &Lexica,
    scaler: Option<&ScalerParams>,
) -> Result<FeatureVector> {
    mask.validate()?;
    let mut sparse = Vec::new();
    if mask.uses_text() {
        let v = vocab.ok_or_else(|| Error::Mask(format!("mask {mask} needs a fitted vocabulary")))?;
        sparse = vectorize(&reply_pt.stems, v);
        if mask.te {
            let offset = v.len() as u32;
            sparse.extend(
                vectorize(&parent_pt.stems, v)
                    .into_iter()
                    .map(|(i, c)| (i + offset, c)),
            );
        }
    }

    let mut dense = Vec::new();
    if mask.te {
        dense.extend(text_scalars(parent_pt, reply_pt, &lexica.sentiment).values);
    }
    if mask.mt {
        dense.extend(meta_text_features(parent_pt, reply_pt, lexica).values);
    }
    if mask.tw {
        dense.extend(tweet_features(&inst.parent_meta, parent_pt, reply_pt, &lexica.sentiment).values);
    }
    if mask.ac {
        dense.extend(account_features(&inst.target_account).values);
    }
    if mask.emb {
        let e = inst
            .dense_embedding
            .as_ref()
            .ok_or_else(|| Error::MissingEmbedding {
                conversation_id: inst.conversation_id.clone(),
            })?;
        dense.extend_from_slice(e);
    }

    if let Some(sc) = scaler {
        sc.apply_in_place(&mut dense)?;
    }
    Ok(FeatureVector { sparse, dense })
}
