//! Conversation records: parsing, validation and summary statistics.
//!
//! One record per line, each line a JSON object holding a parent post, one
//! direct reply, the parent author's account snapshot and the reply label.
//! Records sharing a `conversation_id` form one conversation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Abusive,
    NonAbusive,
}

impl Label {
    pub fn is_abusive(self) -> bool {
        self == Label::Abusive
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Abusive => "abusive",
            Label::NonAbusive => "non_abusive",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "abusive" => Some(Label::Abusive),
            "non_abusive" => Some(Label::NonAbusive),
            _ => None,
        }
    }
}

impl From<bool> for Label {
    fn from(abusive: bool) -> Self {
        if abusive {
            Label::Abusive
        } else {
            Label::NonAbusive
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Snapshot of the parent author's account. Counts are signed so that a
/// corrupted snapshot can be represented and reported by [`validate_corpus`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountMeta {
    pub account_id: String,
    pub followers_count: i64,
    pub friends_count: i64,
    pub favourites_count: i64,
    pub listed_count: i64,
    pub statuses_count: i64,
    pub geo_enabled: bool,
    pub verified: bool,
    pub contributors_enabled: bool,
    pub is_translator: bool,
    pub is_translation_enabled: bool,
    pub default_profile: bool,
    pub default_profile_image: bool,
    pub following: bool,
    pub follow_request_sent: bool,
    pub notifications: bool,
    pub has_extended_profile: bool,
}

impl AccountMeta {
    pub fn counts(&self) -> [(&'static str, i64); 5] {
        [
            ("followers_count", self.followers_count),
            ("friends_count", self.friends_count),
            ("favourites_count", self.favourites_count),
            ("listed_count", self.listed_count),
            ("statuses_count", self.statuses_count),
        ]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostMeta {
    pub retweet_count: i64,
    pub favourite_count: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub conversation_id: String,
    pub parent_text: String,
    pub reply_text: String,
    pub parent_meta: PostMeta,
    pub target_account: AccountMeta,
    pub label: Label,
    pub dense_embedding: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    instances: Vec<Instance>,
    embedding_dim: Option<usize>,
}

impl Corpus {
    /// Builds a corpus, stably grouping instances by `conversation_id`.
    pub fn new(mut instances: Vec<Instance>, embedding_dim: Option<usize>) -> Self {
        instances.sort_by(|a, b| a.conversation_id.cmp(&b.conversation_id));
        Corpus {
            instances,
            embedding_dim,
        }
    }

    /// Builds a corpus without reordering. Used to construct fixtures that
    /// deliberately violate invariants.
    pub fn from_raw(instances: Vec<Instance>, embedding_dim: Option<usize>) -> Self {
        Corpus {
            instances,
            embedding_dim,
        }
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instances_mut(&mut self) -> &mut [Instance] {
        &mut self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn embedding_dim(&self) -> Option<usize> {
        self.embedding_dim
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    /// Keeps the instances at `indices` (in the given order, then regrouped).
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        let picked = indices.iter().map(|&i| self.instances[i].clone()).collect();
        Corpus::new(picked, self.embedding_dim)
    }

    /// Writes the canonical line-delimited form.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for inst in &self.instances {
            serde_json::to_writer(&mut out, &Record::from_instance(inst))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

/// Wire form of one line. Every field is optional here so that missing
/// fields can be reported by name instead of by a generic decode error.
#[derive(Debug, Default, Serialize, Deserialize)]
struct Record {
    conversation_id: Option<String>,
    parent_text: Option<String>,
    reply_text: Option<String>,
    label: Option<String>,
    parent_retweet_count: Option<i64>,
    parent_favourite_count: Option<i64>,
    account_id: Option<String>,
    followers_count: Option<i64>,
    friends_count: Option<i64>,
    favourites_count: Option<i64>,
    listed_count: Option<i64>,
    statuses_count: Option<i64>,
    geo_enabled: Option<bool>,
    verified: Option<bool>,
    contributors_enabled: Option<bool>,
    is_translator: Option<bool>,
    is_translation_enabled: Option<bool>,
    default_profile: Option<bool>,
    default_profile_image: Option<bool>,
    following: Option<bool>,
    follow_request_sent: Option<bool>,
    notifications: Option<bool>,
    has_extended_profile: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dense_embedding: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordErrorKind {
    Malformed(String),
    MissingField(&'static str),
    InvalidLabel(String),
    NegativeCount(&'static str),
    EmptyText(&'static str),
    EmbeddingDimension { expected: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordError {
    /// 1-based line number in the input stream.
    pub line: usize,
    pub kind: RecordErrorKind,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            RecordErrorKind::Malformed(msg) => write!(f, "malformed record: {msg}"),
            RecordErrorKind::MissingField(name) => write!(f, "missing required field `{name}`"),
            RecordErrorKind::InvalidLabel(l) => {
                write!(f, "label `{l}` is not one of abusive, non_abusive")
            }
            RecordErrorKind::NegativeCount(name) => write!(f, "field `{name}` is negative"),
            RecordErrorKind::EmptyText(name) => write!(f, "field `{name}` is empty"),
            RecordErrorKind::EmbeddingDimension { expected, actual } => write!(
                f,
                "dense_embedding has length {actual}, corpus dimension is {expected}"
            ),
        }
    }
}

impl Record {
    fn from_instance(inst: &Instance) -> Record {
        let a = &inst.target_account;
        Record {
            conversation_id: Some(inst.conversation_id.clone()),
            parent_text: Some(inst.parent_text.clone()),
            reply_text: Some(inst.reply_text.clone()),
            label: Some(inst.label.as_str().to_string()),
            parent_retweet_count: Some(inst.parent_meta.retweet_count),
            parent_favourite_count: Some(inst.parent_meta.favourite_count),
            account_id: Some(a.account_id.clone()),
            followers_count: Some(a.followers_count),
            friends_count: Some(a.friends_count),
            favourites_count: Some(a.favourites_count),
            listed_count: Some(a.listed_count),
            statuses_count: Some(a.statuses_count),
            geo_enabled: Some(a.geo_enabled),
            verified: Some(a.verified),
            contributors_enabled: Some(a.contributors_enabled),
            is_translator: Some(a.is_translator),
            is_translation_enabled: Some(a.is_translation_enabled),
            default_profile: Some(a.default_profile),
            default_profile_image: Some(a.default_profile_image),
            following: Some(a.following),
            follow_request_sent: Some(a.follow_request_sent),
            notifications: Some(a.notifications),
            has_extended_profile: Some(a.has_extended_profile),
            dense_embedding: inst.dense_embedding.clone(),
        }
    }

    fn into_instance(self) -> std::result::Result<Instance, RecordErrorKind> {
        use RecordErrorKind::*;

        fn req<T>(v: Option<T>, name: &'static str) -> std::result::Result<T, RecordErrorKind> {
            v.ok_or(MissingField(name))
        }
        fn count(v: Option<i64>, name: &'static str) -> std::result::Result<i64, RecordErrorKind> {
            let v = req(v, name)?;
            if v < 0 {
                Err(NegativeCount(name))
            } else {
                Ok(v)
            }
        }
        fn text(v: Option<String>, name: &'static str) -> std::result::Result<String, RecordErrorKind> {
            let v = req(v, name)?;
            if v.trim().is_empty() {
                Err(EmptyText(name))
            } else {
                Ok(v)
            }
        }

        let conversation_id = req(self.conversation_id, "conversation_id")?;
        let parent_text = text(self.parent_text, "parent_text")?;
        let reply_text = text(self.reply_text, "reply_text")?;
        let raw_label = req(self.label, "label")?;
        let label = Label::parse(&raw_label).ok_or(InvalidLabel(raw_label))?;
        let parent_meta = PostMeta {
            retweet_count: count(self.parent_retweet_count, "parent_retweet_count")?,
            favourite_count: count(self.parent_favourite_count, "parent_favourite_count")?,
        };
        let account_id = req(self.account_id, "account_id")?;
        if account_id.is_empty() {
            return Err(EmptyText("account_id"));
        }
        let target_account = AccountMeta {
            account_id,
            followers_count: count(self.followers_count, "followers_count")?,
            friends_count: count(self.friends_count, "friends_count")?,
            favourites_count: count(self.favourites_count, "favourites_count")?,
            listed_count: count(self.listed_count, "listed_count")?,
            statuses_count: count(self.statuses_count, "statuses_count")?,
            geo_enabled: req(self.geo_enabled, "geo_enabled")?,
            verified: req(self.verified, "verified")?,
            contributors_enabled: req(self.contributors_enabled, "contributors_enabled")?,
            is_translator: req(self.is_translator, "is_translator")?,
            is_translation_enabled: req(self.is_translation_enabled, "is_translation_enabled")?,
            default_profile: req(self.default_profile, "default_profile")?,
            default_profile_image: req(self.default_profile_image, "default_profile_image")?,
            // usually null in platform exports
            following: self.following.unwrap_or(false),
            follow_request_sent: self.follow_request_sent.unwrap_or(false),
            notifications: self.notifications.unwrap_or(false),
            has_extended_profile: req(self.has_extended_profile, "has_extended_profile")?,
        };
        Ok(Instance {
            conversation_id,
            parent_text,
            reply_text,
            parent_meta,
            target_account,
            label,
            dense_embedding: self.dense_embedding,
        })
    }
}

/// Result of ingesting a record stream: every valid record plus one error
/// per rejected line.
#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub corpus: Corpus,
    pub errors: Vec<RecordError>,
}

/// Parses a line-delimited record stream. Invalid UTF-8 is replaced with
/// U+FFFD; blank lines are skipped.
pub fn parse_conversations<R: BufRead>(reader: R) -> Result<Ingested> {
    let mut instances = Vec::new();
    let mut errors = Vec::new();
    let mut embedding_dim: Option<usize> = None;

    for (idx, line) in reader.split(b'\n').enumerate() {
        let line_no = idx + 1;
        let bytes = line?;
        let text = String::from_utf8_lossy(&bytes);
        let text = text.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        let record: Record = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => {
                errors.push(RecordError {
                    line: line_no,
                    kind: RecordErrorKind::Malformed(e.to_string()),
                });
                continue;
            }
        };
        match record.into_instance() {
            Ok(inst) => {
                if let Some(emb) = &inst.dense_embedding {
                    match embedding_dim {
                        None => embedding_dim = Some(emb.len()),
                        Some(d) if d != emb.len() => {
                            errors.push(RecordError {
                                line: line_no,
                                kind: RecordErrorKind::EmbeddingDimension {
                                    expected: d,
                                    actual: emb.len(),
                                },
                            });
                            continue;
                        }
                        Some(_) => {}
                    }
                }
                instances.push(inst);
            }
            Err(kind) => errors.push(RecordError {
                line: line_no,
                kind,
            }),
        }
    }

    Ok(Ingested {
        corpus: Corpus::new(instances, embedding_dim),
        errors,
    })
}

pub fn parse_str(s: &str) -> Result<Ingested> {
    parse_conversations(s.as_bytes())
}

pub fn read_corpus_file(path: &std::path::Path) -> Result<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_conversations(std::io::BufReader::new(file))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub n_accounts: u64,
    pub n_conversations: u64,
    pub n_conversations_with_abusive: u64,
    pub n_conversations_without_abusive: u64,
    pub n_replies: u64,
    pub n_abusive: u64,
    pub n_non_abusive: u64,
}

impl CorpusStats {
    /// Rows in the order of the published dataset summary table.
    pub fn rows(&self) -> [(&'static str, u64); 7] {
        [
            ("Number of user accounts", self.n_accounts),
            ("Number of conversations", self.n_conversations),
            (
                "Number of conversations with abusive replies",
                self.n_conversations_with_abusive,
            ),
            (
                "Number of conversations with non-abusive replies",
                self.n_conversations_without_abusive,
            ),
            ("Number of replies", self.n_replies),
            ("Number of abusive replies", self.n_abusive),
            ("Number of non-abusive replies", self.n_non_abusive),
        ]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["feature", "count"])?;
        for (name, count) in self.rows() {
            w.write_record([name, &count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_aligned_text(&self) -> String {
        let rows = self.rows();
        let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(7);
        let counts: Vec<String> = rows.iter().map(|(_, c)| group_thousands(*c)).collect();
        let count_w = counts.iter().map(String::len).max().unwrap_or(0).max(5);
        let mut s = format!("{:<name_w$}  {:>count_w$}\n", "Feature", "Count");
        for ((name, _), count) in rows.iter().zip(&counts) {
            s.push_str(&format!("{name:<name_w$}  {count:>count_w$}\n"));
        }
        s
    }
}

fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

pub fn corpus_stats(c: &Corpus) -> CorpusStats {
    let mut accounts = HashSet::new();
    let mut conversations: HashMap<&str, bool> = HashMap::new();
    let mut stats = CorpusStats::default();
    for inst in c.instances() {
        accounts.insert(inst.target_account.account_id.as_str());
        let abusive = inst.label.is_abusive();
        *conversations.entry(inst.conversation_id.as_str()).or_insert(false) |= abusive;
        stats.n_replies += 1;
        if abusive {
            stats.n_abusive += 1;
        } else {
            stats.n_non_abusive += 1;
        }
    }
    stats.n_accounts = accounts.len() as u64;
    stats.n_conversations = conversations.len() as u64;
    stats.n_conversations_with_abusive = conversations.values().filter(|&&a| a).count() as u64;
    stats.n_conversations_without_abusive =
        stats.n_conversations - stats.n_conversations_with_abusive;
    stats
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub instance: usize,
    pub conversation_id: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "instance {} (conversation {}): {}",
            self.instance, self.conversation_id, self.message
        )
    }
}

/// Checks every corpus invariant; an empty result means the corpus is valid.
pub fn validate_corpus(c: &Corpus) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |idx: usize, inst: &Instance, message: String| {
        out.push(Violation {
            instance: idx,
            conversation_id: inst.conversation_id.clone(),
            message,
        })
    };

    let mut first_account: BTreeMap<&str, usize> = BTreeMap::new();
    let mut closed_groups: HashSet<&str> = HashSet::new();
    let mut current: Option<&str> = None;

    for (idx, inst) in c.instances().iter().enumerate() {
        if inst.parent_text.trim().is_empty() {
            push(idx, inst, "parent_text is empty".into());
        }
        if inst.reply_text.trim().is_empty() {
            push(idx, inst, "reply_text is empty".into());
        }
        for (name, v) in [
            ("parent_retweet_count", inst.parent_meta.retweet_count),
            ("parent_favourite_count", inst.parent_meta.favourite_count),
        ] {
            if v < 0 {
                push(idx, inst, format!("{name} is negative ({v})"));
            }
        }
        let acct = &inst.target_account;
        if acct.account_id.is_empty() {
            push(idx, inst, "account_id is empty".into());
        }
        for (name, v) in acct.counts() {
            if v < 0 {
                push(idx, inst, format!("{name} is negative ({v})"));
            }
        }
        match (&inst.dense_embedding, c.embedding_dim()) {
            (Some(e), Some(d)) if e.len() != d => push(
                idx,
                inst,
                format!("dense_embedding length {} differs from corpus dimension {d}", e.len()),
            ),
            (Some(_), None) => push(
                idx,
                inst,
                "dense_embedding present but corpus declares no embedding dimension".into(),
            ),
            _ => {}
        }

        let cid = inst.conversation_id.as_str();
        if current != Some(cid) {
            if let Some(prev) = current {
                closed_groups.insert(prev);
            }
            if closed_groups.contains(cid) {
                push(idx, inst, "conversation group is not contiguous".into());
            }
            current = Some(cid);
        }

        match first_account.get(acct.account_id.as_str()) {
            None => {
                first_account.insert(acct.account_id.as_str(), idx);
            }
            Some(&first) => {
                if c.instances()[first].target_account != *acct {
                    push(
                        idx,
                        inst,
                        format!(
                            "account {} snapshot differs from the one at instance {first}",
                            acct.account_id
                        ),
                    );
                }
            }
        }
    }
    out
}
