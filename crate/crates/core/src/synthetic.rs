//! Generator for corpora with a planted, parent-only signal.
//!
//! A conversation is hostile when its parent carries cue words; every reply
//! text is filler drawn independently of the label. Labels equal the
//! hostile flag except for a small fraction of flips, which bounds the
//! Bayes error by `flip_rate`. Parent length does not depend on the label.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{AccountMeta, Corpus, Instance, Label, PostMeta};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_instances: usize,
    pub positive_rate: f64,
    pub flip_rate: f64,
    pub n_accounts: usize,
    pub max_replies_per_conversation: usize,
    pub filler_words: usize,
    pub cues_per_hostile_parent: usize,
    pub embedding_dim: Option<usize>,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_instances: 10_000,
            positive_rate: 0.3,
            flip_rate: 0.01,
            n_accounts: 60,
            max_replies_per_conversation: 3,
            filler_words: 60,
            cues_per_hostile_parent: 2,
            embedding_dim: None,
            seed: 0,
        }
    }
}

pub const CUE_WORDS: [&str; 6] = ["zorblat", "kravex", "quenthor", "vyxil", "drumok", "snagrel"];

/// Pronounceable two-syllable words that survive cleaning and stemming
/// unchanged in shape: letters only, no stopwords, no cue words.
pub fn filler_vocabulary(n: usize) -> Vec<String> {
    let consonants = b"bdfgklmnprstvz";
    let vowels = b"aiou";
    let syllables: Vec<String> = consonants
        .iter()
        .flat_map(|&c| vowels.iter().map(move |&v| format!("{}{}", c as char, v as char)))
        .collect();
    let m = syllables.len();
    let mut out = Vec::with_capacity(n);
    let mut i = 0usize;
    while out.len() < n && i < m * m {
        // stride through the pairs so neighbouring words differ in both halves
        let j = (i * 97) % (m * m);
        out.push(format!("{}{}", syllables[j / m], syllables[j % m]));
        i += 1;
    }
    out
}

fn account<R: Rng>(id: usize, rng: &mut R) -> AccountMeta {
    let mut log_count = |hi: f64| (10f64.powf(rng.gen_range(0.0..hi)) - 1.0).round() as i64;
    AccountMeta {
        account_id: format!("acct{id:04}"),
        followers_count: log_count(6.0),
        friends_count: log_count(4.0),
        favourites_count: log_count(5.0),
        listed_count: log_count(3.0),
        statuses_count: log_count(5.5),
        geo_enabled: rng.gen_bool(0.4),
        verified: rng.gen_bool(0.3),
        contributors_enabled: false,
        is_translator: rng.gen_bool(0.02),
        is_translation_enabled: rng.gen_bool(0.1),
        default_profile: rng.gen_bool(0.5),
        default_profile_image: rng.gen_bool(0.05),
        following: rng.gen_bool(0.1),
        follow_request_sent: false,
        notifications: rng.gen_bool(0.05),
        has_extended_profile: rng.gen_bool(0.6),
    }
}

fn sentence<R: Rng>(words: &[String], len: usize, rng: &mut R) -> Vec<String> {
    (0..len).map(|_| words[rng.gen_range(0..words.len())].clone()).collect()
}

fn capitalize_first(mut w: Vec<String>) -> String {
    if let Some(first) = w.first_mut() {
        let mut c = first.chars();
        if let Some(h) = c.next() {
            *first = h.to_uppercase().chain(c).collect();
        }
    }
    w.join(" ")
}

pub fn planted_signal_corpus(cfg: &SyntheticConfig) -> Corpus {
    let mut rng = seed::rng(seed::mix(cfg.seed, 0x5e7));
    let words = filler_vocabulary(cfg.filler_words);
    let accounts: Vec<AccountMeta> = (0..cfg.n_accounts.max(1)).map(|i| account(i, &mut rng)).collect();
    let mut instances = Vec::with_capacity(cfg.n_instances);
    let mut conv = 0usize;
    while instances.len() < cfg.n_instances {
        let hostile = rng.gen_bool(cfg.positive_rate);
        let len = rng.gen_range(8..=12);
        let mut parent = sentence(&words, len, &mut rng);
        if hostile {
            let slots = rand::seq::index::sample(&mut rng, len, cfg.cues_per_hostile_parent.min(len));
            for s in slots {
                parent[s] = CUE_WORDS.choose(&mut rng).unwrap_or(&CUE_WORDS[0]).to_string();
            }
        }
        let parent_text = capitalize_first(parent) + ".";
        let target = accounts[rng.gen_range(0..accounts.len())].clone();
        let parent_meta = PostMeta {
            retweet_count: rng.gen_range(0..500),
            favourite_count: rng.gen_range(0..2000),
        };
        let n_replies = rng.gen_range(1..=cfg.max_replies_per_conversation.max(1));
        for _ in 0..n_replies {
            if instances.len() == cfg.n_instances {
                break;
            }
            let reply_len = rng.gen_range(5..=10);
            let mut reply = sentence(&words, reply_len, &mut rng).join(" ");
            if rng.gen_bool(0.3) {
                reply = format!("@{} {reply}", target.account_id);
            }
            let flipped = rng.gen_bool(cfg.flip_rate);
            let dense_embedding = cfg
                .embedding_dim
                .map(|d| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect());
            instances.push(Instance {
                conversation_id: format!("c{conv:07}"),
                parent_text: parent_text.clone(),
                reply_text: reply,
                parent_meta,
                target_account: target.clone(),
                label: Label::from(hostile != flipped),
                dense_embedding,
            });
        }
        conv += 1;
    }
    Corpus::new(instances, cfg.embedding_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::validate_corpus;
    use crate::preprocess::Preprocessor;

    #[test]
    fn filler_words_survive_cleaning() {
        let words = filler_vocabulary(60);
        let pre = Preprocessor::default();
        let mut uniq = words.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 60);
        for w in &words {
            assert_eq!(pre.process(w).tokens_clean, vec![w.clone()], "{w}");
            assert!(!CUE_WORDS.contains(&w.as_str()));
        }
    }

    #[test]
    fn corpus_is_valid_and_reproducible() {
        let cfg = SyntheticConfig {
            n_instances: 500,
            seed: 4,
            ..SyntheticConfig::default()
        };
        let c = planted_signal_corpus(&cfg);
        assert_eq!(c.len(), 500);
        assert!(validate_corpus(&c).is_empty());
        assert_eq!(c, planted_signal_corpus(&cfg));
        let pos = c.instances().iter().filter(|i| i.label.is_abusive()).count();
        assert!((100..200).contains(&pos), "{pos}");
    }

    #[test]
    fn labels_follow_cues() {
        let c = planted_signal_corpus(&SyntheticConfig {
            n_instances: 2000,
            seed: 1,
            ..SyntheticConfig::default()
        });
        let agree = c
            .instances()
            .iter()
            .filter(|i| CUE_WORDS.iter().any(|w| i.parent_text.contains(w)) == i.label.is_abusive())
            .count();
        assert!(agree as f64 / 2000.0 > 0.97);
    }
}
