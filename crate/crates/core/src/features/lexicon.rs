//! Word lists and the sentiment lexicon.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::preprocess::{asset_lines, normalize_word, stem};

pub const DEFAULT_SENTIMENT: &str = include_str!("../../assets/sentiment_lexicon.tsv");
pub const DEFAULT_HATE_WORDS: &str = include_str!("../../assets/hate_words.txt");
pub const DEFAULT_ABUSIVE_WORDS: &str = include_str!("../../assets/abusive_words.txt");

/// Word to polarity score in [-1, 1], matched against cleaned tokens.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    scores: HashMap<String, f64>,
}

impl SentimentLexicon {
    pub fn parse(text: &str) -> Result<SentimentLexicon> {
        let mut scores = HashMap::new();
        for line in asset_lines(text) {
            let bad = |msg: String| Error::Asset {
                name: "sentiment lexicon".into(),
                message: msg,
            };
            let (word, score) = line
                .split_once('\t')
                .ok_or_else(|| bad(format!("expected word<TAB>score, got `{line}`")))?;
            let word = word.trim();
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad score in `{line}`")))?;
            if !score.is_finite() || !(-1.0..=1.0).contains(&score) {
                return Err(bad(format!("score for `{word}` outside [-1, 1]")));
            }
            if word.is_empty() || word.chars().any(char::is_uppercase) {
                return Err(bad(format!("word `{word}` must be non-empty lowercase")));
            }
            scores.insert(word.to_string(), score);
        }
        Ok(SentimentLexicon { scores })
    }

    pub fn from_pairs<I, S>(pairs: I) -> SentimentLexicon
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        SentimentLexicon {
            scores: pairs.into_iter().map(|(w, s)| (w.into(), s)).collect(),
        }
    }

    pub fn score(&self, word: &str) -> Option<f64> {
        self.scores.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// A term list matched on stems: entries are cleaned and stemmed at load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordList {
    stems: HashSet<String>,
}

impl WordList {
    pub fn parse(text: &str) -> WordList {
        WordList::from_words(asset_lines(text))
    }

    pub fn from_words<I, S>(words: I) -> WordList
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        WordList {
            stems: words
                .into_iter()
                .map(|w| normalize_word(w.as_ref()))
                .filter(|w| !w.is_empty())
                .map(|w| stem(&w))
                .collect(),
        }
    }

    pub fn contains_stem(&self, s: &str) -> bool {
        self.stems.contains(s)
    }

    pub fn count_in(&self, stems: &[String]) -> usize {
        stems.iter().filter(|s| self.contains_stem(s)).count()
    }

    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }
}

/// The word resources the feature families need.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexica {
    pub sentiment: SentimentLexicon,
    pub hate: WordList,
    pub abusive: WordList,
}

impl Lexica {
    pub fn embedded() -> Lexica {
        Lexica {
            sentiment: SentimentLexicon::parse(DEFAULT_SENTIMENT).expect("embedded lexicon is valid"),
            hate: WordList::parse(DEFAULT_HATE_WORDS),
            abusive: WordList::parse(DEFAULT_ABUSIVE_WORDS),
        }
    }
}
