//! Word lists and lexica, embedded by default and replaceable by path.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::lexicon::{DEFAULT_ABUSIVE_WORDS, DEFAULT_HATE_WORDS, DEFAULT_SENTIMENT};
use crate::features::{Lexica, SentimentLexicon, WordList};
use crate::preprocess::{Preprocessor, Stopwords, DEFAULT_STOPWORDS};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetPaths {
    pub stopword_path: Option<PathBuf>,
    pub sentiment_lexicon_path: Option<PathBuf>,
    pub hate_words_path: Option<PathBuf>,
    pub abusive_words_path: Option<PathBuf>,
}

pub struct Assets {
    pub preprocessor: Preprocessor,
    pub lexica: Lexica,
    /// sha256 of each asset's text, keyed by file name.
    pub checksums: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_or(path: Option<&Path>, embedded: &'static str) -> Result<String> {
    match path {
        None => Ok(embedded.to_string()),
        Some(p) => fs::read_to_string(p).map_err(|e| Error::io(p, e)),
    }
}

pub fn load_assets(paths: &AssetPaths, keep_hashtag_body: bool) -> Result<Assets> {
    let stopwords = read_or(paths.stopword_path.as_deref(), DEFAULT_STOPWORDS)?;
    let sentiment = read_or(paths.sentiment_lexicon_path.as_deref(), DEFAULT_SENTIMENT)?;
    let hate = read_or(paths.hate_words_path.as_deref(), DEFAULT_HATE_WORDS)?;
    let abusive = read_or(paths.abusive_words_path.as_deref(), DEFAULT_ABUSIVE_WORDS)?;

    let checksums = [
        ("stopwords.txt", &stopwords),
        ("sentiment_lexicon.tsv", &sentiment),
        ("hate_words.txt", &hate),
        ("abusive_words.txt", &abusive),
    ]
    .into_iter()
    .map(|(name, text)| (name.to_string(), sha256_hex(text.as_bytes())))
    .collect();

    Ok(Assets {
        preprocessor: Preprocessor {
            stopwords: Stopwords::parse(&stopwords),
            keep_hashtag_body,
        },
        lexica: Lexica {
            sentiment: SentimentLexicon::parse(&sentiment)?,
            hate: WordList::parse(&hate),
            abusive: WordList::parse(&abusive),
        },
        checksums,
    })
}
