//! Text preprocessing: tokenization, cleaning, stemming, and the raw-text
//! measurements used by the meta-text feature family.
//!
//! Counts in [`RawTextCounts`] are taken from the raw text before any
//! cleaning, so emoji, hashtags and URLs are still visible to them.

pub mod porter;

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::{Error, Result};

pub use porter::stem;

pub const DEFAULT_STOPWORDS: &str = include_str!("../../assets/stopwords.txt");

/// Stopword set. Entries are stored in cleaned form (lowercase ASCII
/// letters only), so `don't` matches the cleaned token `dont`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords {
    words: HashSet<String>,
}

impl Stopwords {
    pub fn parse(text: &str) -> Stopwords {
        let words = asset_lines(text)
            .map(normalize_word)
            .filter(|w| !w.is_empty())
            .collect();
        Stopwords { words }
    }

    pub fn english() -> Stopwords {
        Stopwords::parse(DEFAULT_STOPWORDS)
    }

    pub fn from_words<I, S>(words: I) -> Stopwords
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stopwords {
            words: words.into_iter().map(|w| normalize_word(w.as_ref())).collect(),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords::english()
    }
}

/// Non-empty, non-comment lines of a text asset, trimmed.
pub(crate) fn asset_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Lowercases and keeps ASCII letters only.
pub fn normalize_word(token: &str) -> String {
    token
        .to_lowercase()
        .chars()
        .filter(char::is_ascii_alphabetic)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessConfig {
    /// Replaces the embedded stopword list.
    pub stopword_path: Option<PathBuf>,
    /// When true, `#fail` contributes the token `fail`; when false, hashtag
    /// tokens are dropped from the cleaned token list.
    pub keep_hashtag_body: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stopword_path: None,
            keep_hashtag_body: true,
        }
    }
}

impl PreprocessConfig {
    pub fn load_stopwords(&self) -> Result<Stopwords> {
        match &self.stopword_path {
            None => Ok(Stopwords::english()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Ok(Stopwords::parse(&text))
            }
        }
    }
}

/// Everything downstream needs to know about one text.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessor {
    pub stopwords: Stopwords,
    pub keep_hashtag_body: bool,
}

impl Preprocessor {
    pub fn new(cfg: &PreprocessConfig) -> Result<Preprocessor> {
        Ok(Preprocessor {
            stopwords: cfg.load_stopwords()?,
            keep_hashtag_body: cfg.keep_hashtag_body,
        })
    }

    pub fn process(&self, text: &str) -> ProcessedText {
        preprocess_text(text, self)
    }
}

impl Default for Preprocessor {
    fn default() -> Self {
        Preprocessor {
            stopwords: Stopwords::english(),
            keep_hashtag_body: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RawTextCounts {
    pub word_count: usize,
    pub char_count: usize,
    pub sentence_count: usize,
    pub avg_word_length: f64,
    pub avg_sentence_length: f64,
    pub hashtag_count: usize,
    pub mention_count: usize,
    pub url_count: usize,
    pub punctuation_count: usize,
    pub stopword_count: usize,
    pub capitalized_word_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProcessedText {
    pub raw: String,
    pub tokens_raw: Vec<String>,
    pub tokens_clean: Vec<String>,
    pub stems: Vec<String>,
    pub sentences: Vec<String>,
    pub counts: RawTextCounts,
}

/// Splits on runs of Unicode whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// A sentence ends at a maximal run of `.`, `!` or `?` that is followed by
/// whitespace or the end of the text.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if !is_terminator(chars[i].1) {
            i += 1;
            continue;
        }
        let run_start = chars[i].0;
        let mut end = i;
        while end < chars.len() && is_terminator(chars[end].1) {
            end += 1;
        }
        let boundary = end == chars.len() || chars[end].1.is_whitespace();
        if boundary {
            let seg = text[start..run_start].trim();
            if !seg.is_empty() {
                out.push(seg.to_string());
            }
            start = if end == chars.len() { text.len() } else { chars[end].0 };
        }
        i = end;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}

/// Lowercases, strips every character that is not an ASCII letter, then
/// drops empty tokens, single letters and stopwords, in that order.
pub fn clean_tokens(tokens: &[String], stopwords: &Stopwords) -> Vec<String> {
    tokens
        .iter()
        .map(|t| normalize_word(t))
        .filter(|t| t.len() >= 2 && !stopwords.contains(t))
        .collect()
}

pub fn is_hashtag(token: &str) -> bool {
    let mut chars = token.chars();
    chars.next() == Some('#') && chars.next().is_some_and(|c| c.is_alphanumeric() || c == '_')
}

pub fn is_mention(token: &str) -> bool {
    token.starts_with('@')
}

pub fn is_url(token: &str) -> bool {
    let lower = token.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

pub fn is_capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_uppercase)
}

pub fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

pub fn preprocess_text(text: &str, pre: &Preprocessor) -> ProcessedText {
    let tokens_raw = tokenize(text);
    let sentences = split_sentences(text);

    let kept: Vec<String> = if pre.keep_hashtag_body {
        tokens_raw.clone()
    } else {
        tokens_raw.iter().filter(|t| !is_hashtag(t)).cloned().collect()
    };
    let tokens_clean = clean_tokens(&kept, &pre.stopwords);
    let stems = tokens_clean.iter().map(|t| stem(t)).collect();

    let word_count = tokens_raw.len();
    let sentence_count = sentences.len();
    let total_word_chars: usize = tokens_raw.iter().map(|t| char_len(t)).sum();
    let counts = RawTextCounts {
        word_count,
        char_count: char_len(text),
        sentence_count,
        avg_word_length: if word_count == 0 {
            0.0
        } else {
            total_word_chars as f64 / word_count as f64
        },
        avg_sentence_length: if sentence_count == 0 {
            0.0
        } else {
            word_count as f64 / sentence_count as f64
        },
        hashtag_count: tokens_raw.iter().filter(|t| is_hashtag(t)).count(),
        mention_count: tokens_raw.iter().filter(|t| is_mention(t)).count(),
        url_count: tokens_raw.iter().filter(|t| is_url(t)).count(),
        punctuation_count: text.chars().filter(|&c| is_punctuation(c)).count(),
        stopword_count: tokens_raw
            .iter()
            .filter(|t| pre.stopwords.contains(&normalize_word(t)))
            .count(),
        capitalized_word_count: tokens_raw.iter().filter(|t| is_capitalized(t)).count(),
    };

    ProcessedText {
        raw: text.to_string(),
        tokens_raw,
        tokens_clean,
        stems,
        sentences,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn stopword_asset_has_179_entries() {
        assert_eq!(asset_lines(DEFAULT_STOPWORDS).count(), 179);
        let sw = Stopwords::english();
        assert!(sw.contains("the") && sw.contains("dont") && !sw.contains("cat"));
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("You are  WRONG!"), toks(&["You", "are", "WRONG!"]));
        assert_eq!(tokenize("a\tb\nc"), toks(&["a", "b", "c"]));
    }

    #[test]
    fn sentence_examples() {
        assert!(split_sentences("").is_empty());
        assert_eq!(split_sentences("Stop. Now!"), toks(&["Stop", "Now"]));
        assert_eq!(split_sentences("no terminator"), toks(&["no terminator"]));
        assert_eq!(split_sentences("what?!?  ok... fine"), toks(&["what", "ok", "fine"]));
        assert_eq!(split_sentences("e.g. this"), toks(&["e.g", "this"]));
        assert!(split_sentences("  ...  ").is_empty());
    }

    #[test]
    fn clean_examples() {
        let sw = Stopwords::from_words(["the"]);
        assert_eq!(clean_tokens(&toks(&["The", "CAT!!"]), &sw), toks(&["cat"]));
        assert!(clean_tokens(&toks(&["a"]), &sw).is_empty());
        assert_eq!(clean_tokens(&toks(&["café", "🙂", "2024"]), &sw), toks(&["caf"]));
        // strip first, then the single-letter rule applies
        assert!(clean_tokens(&toks(&["A."]), &sw).is_empty());
    }

    #[test]
    fn empty_text() {
        let p = preprocess_text("", &Preprocessor::default());
        assert_eq!(p, ProcessedText::default());
    }

    #[test]
    fn raw_counts_example() {
        let p = preprocess_text("Check https://x.co #fail @you NOW!", &Preprocessor::default());
        let c = &p.counts;
        assert_eq!(c.hashtag_count, 1);
        assert_eq!(c.mention_count, 1);
        assert_eq!(c.url_count, 1);
        assert_eq!(c.capitalized_word_count, 2);
        assert_eq!(c.word_count, 5);
        assert_eq!(c.sentence_count, 1);
        // ':' '/' '/' '.' '#' '@' '!'
        assert_eq!(c.punctuation_count, 7);
        // "@you" and "NOW!" normalize to stopwords
        assert_eq!(c.stopword_count, 2);
        assert_eq!(p.tokens_clean, toks(&["check", "httpsxco", "fail"]));
    }

    #[test]
    fn hashtag_body_switch() {
        let pre = Preprocessor {
            keep_hashtag_body: false,
            ..Preprocessor::default()
        };
        let p = preprocess_text("epic #fail today", &pre);
        assert_eq!(p.tokens_clean, toks(&["epic", "today"]));
        assert_eq!(p.counts.hashtag_count, 1);
        let p = preprocess_text("epic #fail today", &Preprocessor::default());
        assert_eq!(p.tokens_clean, toks(&["epic", "fail", "today"]));
    }

    #[test]
    fn stems_and_sentences() {
        let p = preprocess_text("Running quickly.", &Preprocessor::default());
        assert_eq!(p.stems, toks(&["run", "quickli"]));
        assert_eq!(p.counts.sentence_count, 1);
        assert_eq!(p.counts.avg_word_length, 7.5);
        assert_eq!(p.counts.avg_sentence_length, 2.0);
    }

    #[test]
    fn symbols_are_not_punctuation() {
        assert!(is_punctuation('!') && is_punctuation('¿') && is_punctuation('—'));
        assert!(!is_punctuation('+') && !is_punctuation('$') && !is_punctuation('🙂'));
    }
}
