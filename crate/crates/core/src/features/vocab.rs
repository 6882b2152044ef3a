//! Unigram + bigram count vectorizer over stems.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DIMS: usize = 5000;

/// N-gram to column map. Columns are dense, ordered by descending training
/// frequency with lexicographic tie-breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "StoredVocabulary")]
pub struct Vocabulary {
    terms: Vec<String>,
    max_dims: usize,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn from_terms(terms: Vec<String>, max_dims: usize) -> Vocabulary {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            terms,
            max_dims,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_dims(&self) -> usize {
        self.max_dims
    }

    pub fn get(&self, ngram: &str) -> Option<u32> {
        self.index.get(ngram).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

#[derive(Deserialize)]
struct StoredVocabulary {
    terms: Vec<String>,
    max_dims: usize,
}

impl From<StoredVocabulary> for Vocabulary {
    fn from(v: StoredVocabulary) -> Self {
        Vocabulary::from_terms(v.terms, v.max_dims)
    }
}

/// Calls `f` with every unigram and adjacent bigram of `stems`.
fn for_each_ngram(stems: &[String], buf: &mut String, mut f: impl FnMut(&str)) {
    for s in stems {
        f(s);
    }
    for pair in stems.windows(2) {
        buf.clear();
        buf.push_str(&pair[0]);
        buf.push(' ');
        buf.push_str(&pair[1]);
        f(buf);
    }
}

pub fn fit_vectorizer<'a, I>(training_texts: I, max_dims: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a [String]>,
{
    if max_dims == 0 {
        return Err(Error::Config("max_dims must be positive".into()));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut seen_any = false;
    let mut buf = String::new();
    for stems in training_texts {
        seen_any = true;
        for_each_ngram(stems, &mut buf, |g| {
            if let Some(c) = counts.get_mut(g) {
                *c += 1;
            } else {
                counts.insert(g.to_string(), 1);
            }
        });
    }
    if !seen_any {
        return Err(Error::EmptyVocabularyInput);
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_dims);
    Ok(Vocabulary::from_terms(
        ranked.into_iter().map(|(t, _)| t).collect(),
        max_dims,
    ))
}

/// Sparse n-gram counts, sorted by column. Out-of-vocabulary n-grams are
/// ignored.
pub fn vectorize(stems: &[String], v: &Vocabulary) -> Vec<(u32, f64)> {
    let mut cols = Vec::new();
    let mut buf = String::new();
    for_each_ngram(stems, &mut buf, |g| {
        if let Some(i) = v.get(g) {
            cols.push(i);
        }
    });
    cols.sort_unstable();
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(cols.len());
    for c in cols {
        match out.last_mut() {
            Some((last, n)) if *last == c => *n += 1.0,
            _ => out.push((c, 1.0)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn fit_orders_by_frequency_then_lexicographically() {
        let texts = [s(&["a", "b"]), s(&["a"])];
        let v = fit_vectorizer(texts.iter().map(Vec::as_slice), 10).unwrap();
        assert_eq!(v.terms(), &s(&["a", "a b", "b"])[..]);
        let v1 = fit_vectorizer(texts.iter().map(Vec::as_slice), 1).unwrap();
        assert_eq!(v1.terms(), &s(&["a"])[..]);
        let vx = fit_vectorizer([s(&["x"])].iter().map(Vec::as_slice), 10).unwrap();
        assert_eq!(vx.get("x"), Some(0));
    }

    #[test]
    fn fit_rejects_empty_input() {
        let none: Vec<Vec<String>> = vec![];
        assert!(matches!(
            fit_vectorizer(none.iter().map(Vec::as_slice), 10),
            Err(Error::EmptyVocabularyInput)
        ));
    }

    #[test]
    fn vectorize_examples() {
        let v = Vocabulary::from_terms(s(&["a", "a b", "b"]), 10);
        assert!(vectorize(&[], &v).is_empty());
        assert_eq!(
            vectorize(&s(&["a", "b", "a"]), &v),
            vec![(0, 2.0), (1, 1.0), (2, 1.0)]
        );
        assert!(vectorize(&s(&["zz", "yy"]), &v).is_empty());
    }
}
