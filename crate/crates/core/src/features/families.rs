//! Dense feature families: meta-text (Mt), tweet-level (Tw) and target
//! account (Ac) features, plus the sentiment and named-entity scalars they
//! share with the text family.

use crate::corpus::{AccountMeta, PostMeta};
use crate::preprocess::{is_capitalized, ProcessedText};

use super::lexicon::{Lexica, SentimentLexicon};

/// A dense vector with a fixed, static list of column names.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedVector {
    pub names: &'static [&'static str],
    pub values: Vec<f64>,
}

impl NamedVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentScores {
    pub positive_sum: f64,
    pub negative_sum: f64,
    pub neutral_fraction: f64,
}

pub fn sentiment_scores(tokens_clean: &[String], lex: &SentimentLexicon) -> SentimentScores {
    let mut positive_sum = 0.0;
    let mut negative_sum = 0.0;
    let mut unmatched = 0usize;
    for t in tokens_clean {
        match lex.score(t) {
            Some(s) => {
                positive_sum += s.max(0.0);
                negative_sum += (-s).max(0.0);
            }
            None => unmatched += 1,
        }
    }
    let neutral_fraction = if tokens_clean.is_empty() {
        1.0
    } else {
        unmatched as f64 / tokens_clean.len() as f64
    };
    SentimentScores {
        positive_sum,
        negative_sum,
        neutral_fraction,
    }
}

fn ends_sentence(token: &str) -> bool {
    token.ends_with(['.', '!', '?'])
}

/// Heuristic named-entity count: maximal runs of capitalized tokens that
/// do not start a sentence. A sentence starts at the first token and after
/// any token ending in `.`, `!` or `?`.
pub fn named_entity_count(tokens_raw: &[String]) -> usize {
    let mut count = 0;
    let mut in_run = false;
    let mut sentence_start = true;
    for t in tokens_raw {
        let eligible = !sentence_start && is_capitalized(t);
        if eligible && !in_run {
            count += 1;
        }
        in_run = eligible;
        sentence_start = ends_sentence(t);
    }
    count
}

pub const META_TEXT_NAMES: [&str; 32] = [
    "parent_word_count",
    "parent_char_count",
    "parent_sentence_count",
    "parent_avg_word_length",
    "parent_avg_sentence_length",
    "parent_hashtag_count",
    "parent_mention_count",
    "parent_url_count",
    "parent_punctuation_count",
    "parent_stopword_count",
    "parent_capitalized_word_count",
    "parent_hate_word_count",
    "parent_abusive_word_count",
    "parent_positive_word_count",
    "parent_negative_word_count",
    "parent_stemmed_char_count",
    "reply_word_count",
    "reply_char_count",
    "reply_sentence_count",
    "reply_avg_word_length",
    "reply_avg_sentence_length",
    "reply_hashtag_count",
    "reply_mention_count",
    "reply_url_count",
    "reply_punctuation_count",
    "reply_stopword_count",
    "reply_capitalized_word_count",
    "reply_hate_word_count",
    "reply_abusive_word_count",
    "reply_positive_word_count",
    "reply_negative_word_count",
    "reply_stemmed_char_count",
];

fn meta_text_side(pt: &ProcessedText, lexica: &Lexica, out: &mut Vec<f64>) {
    let c = &pt.counts;
    let positive = pt
        .tokens_clean
        .iter()
        .filter(|t| lexica.sentiment.score(t).is_some_and(|s| s > 0.0))
        .count();
    let negative = pt
        .tokens_clean
        .iter()
        .filter(|t| lexica.sentiment.score(t).is_some_and(|s| s < 0.0))
        .count();
    let stemmed_chars: usize = pt.stems.iter().map(|s| s.chars().count()).sum();
    out.extend_from_slice(&[
        c.word_count as f64,
        c.char_count as f64,
        c.sentence_count as f64,
        c.avg_word_length,
        c.avg_sentence_length,
        c.hashtag_count as f64,
        c.mention_count as f64,
        c.url_count as f64,
        c.punctuation_count as f64,
        c.stopword_count as f64,
        c.capitalized_word_count as f64,
        lexica.hate.count_in(&pt.stems) as f64,
        lexica.abusive.count_in(&pt.stems) as f64,
        positive as f64,
        negative as f64,
        stemmed_chars as f64,
    ]);
}

/// Meta-text family: 16 measurements per side, parent first.
pub fn meta_text_features(parent: &ProcessedText, reply: &ProcessedText, lexica: &Lexica) -> NamedVector {
    let mut values = Vec::with_capacity(32);
    meta_text_side(parent, lexica, &mut values);
    meta_text_side(reply, lexica, &mut values);
    NamedVector {
        names: &META_TEXT_NAMES,
        values,
    }
}

pub const TWEET_NAMES: [&str; 6] = [
    "parent_retweet_count",
    "parent_favourite_count",
    "reply_positive_sentiment",
    "reply_negative_sentiment",
    "reply_neutral_fraction",
    "reply_named_entity_count",
];

/// Tweet-level family.
pub fn tweet_features(
    parent_meta: &PostMeta,
    _parent: &ProcessedText,
    reply: &ProcessedText,
    lex: &SentimentLexicon,
) -> NamedVector {
    let s = sentiment_scores(&reply.tokens_clean, lex);
    NamedVector {
        names: &TWEET_NAMES,
        values: vec![
            parent_meta.retweet_count as f64,
            parent_meta.favourite_count as f64,
            s.positive_sum,
            s.negative_sum,
            s.neutral_fraction,
            named_entity_count(&reply.tokens_raw) as f64,
        ],
    }
}

pub const ACCOUNT_NAMES: [&str; 16] = [
    "followers_count",
    "friends_count",
    "favourites_count",
    "listed_count",
    "statuses_count",
    "geo_enabled",
    "verified",
    "contributors_enabled",
    "is_translator",
    "is_translation_enabled",
    "default_profile",
    "default_profile_image",
    "following",
    "follow_request_sent",
    "notifications",
    "has_extended_profile",
];

/// Target-account family: the 16 snapshot fields, booleans as 0/1.
pub fn account_features(a: &AccountMeta) -> NamedVector {
    let b = |v: bool| if v { 1.0 } else { 0.0 };
    NamedVector {
        names: &ACCOUNT_NAMES,
        values: vec![
            a.followers_count as f64,
            a.friends_count as f64,
            a.favourites_count as f64,
            a.listed_count as f64,
            a.statuses_count as f64,
            b(a.geo_enabled),
            b(a.verified),
            b(a.contributors_enabled),
            b(a.is_translator),
            b(a.is_translation_enabled),
            b(a.default_profile),
            b(a.default_profile_image),
            b(a.following),
            b(a.follow_request_sent),
            b(a.notifications),
            b(a.has_extended_profile),
        ],
    }
}

pub const TEXT_SCALAR_NAMES: [&str; 6] = [
    "te_reply_positive_sentiment",
    "te_reply_negative_sentiment",
    "te_reply_named_entity_count",
    "te_parent_positive_sentiment",
    "te_parent_negative_sentiment",
    "te_parent_named_entity_count",
];

/// Sentiment and named-entity scalars appended to the dense block when the
/// reply+parent text family is active. Reply side first.
pub fn text_scalars(parent: &ProcessedText, reply: &ProcessedText, lex: &SentimentLexicon) -> NamedVector {
    let mut values = Vec::with_capacity(6);
    for side in [reply, parent] {
        let s = sentiment_scores(&side.tokens_clean, lex);
        values.push(s.positive_sum);
        values.push(s.negative_sum);
        values.push(named_entity_count(&side.tokens_raw) as f64);
    }
    NamedVector {
        names: &TEXT_SCALAR_NAMES,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::lexicon::WordList;
    use crate::preprocess::{preprocess_text, Preprocessor};

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn lex() -> SentimentLexicon {
        SentimentLexicon::from_pairs([("good", 0.7), ("bad", -0.6), ("kind", 0.5)])
    }

    fn pt(text: &str) -> ProcessedText {
        preprocess_text(text, &Preprocessor::default())
    }

    #[test]
    fn sentiment_examples() {
        let e = sentiment_scores(&[], &lex());
        assert_eq!((e.positive_sum, e.negative_sum, e.neutral_fraction), (0.0, 0.0, 1.0));
        let r = sentiment_scores(&s(&["good", "bad", "table"]), &lex());
        assert_eq!(r.positive_sum, 0.7);
        assert_eq!(r.negative_sum, 0.6);
        assert_eq!(r.neutral_fraction, 1.0 / 3.0);
        let u = sentiment_scores(&s(&["chair", "table"]), &lex());
        assert_eq!((u.positive_sum, u.negative_sum, u.neutral_fraction), (0.0, 0.0, 1.0));
    }

    #[test]
    fn named_entity_examples() {
        assert_eq!(named_entity_count(&[]), 0);
        assert_eq!(named_entity_count(&s(&["I", "met", "Jane", "Doe", "today."])), 1);
        assert_eq!(named_entity_count(&s(&["Great", "idea"])), 0);
        assert_eq!(
            named_entity_count(&s(&["saw", "Bob", "and", "Ann", "there.", "Then", "left"])),
            2
        );
    }

    #[test]
    fn meta_text_empty_is_zero() {
        let v = meta_text_features(&pt(""), &pt(""), &Lexica::default());
        assert_eq!(v.values, vec![0.0; 32]);
        assert_eq!(v.names.len(), 32);
    }

    #[test]
    fn meta_text_parent_sentences() {
        let v = meta_text_features(&pt("Stop. Now!"), &pt(""), &Lexica::default());
        assert_eq!(v.get("parent_sentence_count"), Some(2.0));
        assert_eq!(v.get("parent_word_count"), Some(2.0));
        assert!(v.values[16..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn meta_text_hate_words() {
        let lexica = Lexica {
            hate: WordList::from_words(["vermin", "filth"]),
            ..Lexica::default()
        };
        let v = meta_text_features(&pt(""), &pt("such vermin and filth here"), &lexica);
        assert_eq!(v.get("reply_hate_word_count"), Some(2.0));
        assert_eq!(v.get("parent_hate_word_count"), Some(0.0));
    }

    #[test]
    fn tweet_examples() {
        let zero = tweet_features(&PostMeta::default(), &pt(""), &pt(""), &lex());
        assert_eq!(zero.values, vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let meta = PostMeta {
            retweet_count: 3,
            favourite_count: 7,
        };
        let v = tweet_features(&meta, &pt(""), &pt("bad bad"), &lex());
        assert_eq!(v.values, vec![3.0, 7.0, 0.0, 1.2, 0.0, 0.0]);
        let v = tweet_features(&PostMeta::default(), &pt(""), &pt("Jane Doe is kind."), &lex());
        assert_eq!(v.get("reply_positive_sentiment"), Some(0.5));
        assert_eq!(v.get("reply_named_entity_count"), Some(1.0));
    }

    #[test]
    fn account_layout() {
        assert_eq!(account_features(&AccountMeta::default()).values, vec![0.0; 16]);
        let a = AccountMeta {
            followers_count: 10,
            verified: true,
            ..AccountMeta::default()
        };
        let v = account_features(&a);
        assert_eq!(v.values[0], 10.0);
        assert_eq!(v.get("verified"), Some(1.0));
        assert_eq!(v.values.iter().sum::<f64>(), 11.0);
    }
}
