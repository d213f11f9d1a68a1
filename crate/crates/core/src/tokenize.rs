//! Text normalization, tokenization, n-grams and bag-of-words vectors.
//!
//! Normalization is NFC, then lowercase, then NFC again (lowercasing can
//! produce decomposed sequences). Tokens are maximal runs of letters, digits
//! and apostrophes with leading/trailing apostrophes trimmed; everything else
//! separates, which strips `#`/`@` sigils and splits URLs into fragments.
//! No stopword removal, no stemming.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
}

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSeq {
            tokens: iter.into_iter().map(Into::into).collect(),
        }
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || is_apostrophe(c)
}

pub fn normalize(text: &str) -> String {
    if text.is_ascii() {
        return text.to_ascii_lowercase();
    }
    let composed: String = text.nfc().collect();
    composed.to_lowercase().nfc().collect()
}

pub fn tokenize(text: &str) -> TokenSeq {
    let norm = normalize(text);
    let mut tokens = Vec::new();
    for run in norm.split(|c: char| !is_token_char(c)) {
        let trimmed = run.trim_matches(is_apostrophe);
        if trimmed.is_empty() {
            continue;
        }
        // Typographic apostrophes are folded to ASCII.
        if trimmed.contains('\u{2019}') {
            tokens.push(trimmed.replace('\u{2019}', "'"));
        } else {
            tokens.push(trimmed.to_string());
        }
    }
    TokenSeq { tokens }
}

pub fn ngrams(t: &TokenSeq, n: usize) -> Result<Vec<String>> {
    match n {
        1 => Ok(t.tokens.clone()),
        2 => Ok(t.tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])).collect()),
        _ => Err(Error::invalid(format!("n-gram order must be 1 or 2, got {n}"))),
    }
}

/// Unigram vocabulary in first-appearance order with document frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyFile", into = "VocabularyFile")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<u32>,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    terms: Vec<String>,
    doc_freq: Vec<u32>,
}

impl TryFrom<VocabularyFile> for Vocabulary {
    type Error = Error;

    fn try_from(f: VocabularyFile) -> Result<Self> {
        Vocabulary::from_parts(f.terms, f.doc_freq)
    }
}

impl From<Vocabulary> for VocabularyFile {
    fn from(v: Vocabulary) -> Self {
        VocabularyFile {
            terms: v.terms,
            doc_freq: v.doc_freq,
        }
    }
}

impl Vocabulary {
    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<u32>) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::invalid("vocabulary terms and doc_freq differ in length"));
        }
        if doc_freq.contains(&0) {
            return Err(Error::invalid("vocabulary doc_freq must be at least 1"));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary term {t:?}")));
            }
        }
        Ok(Vocabulary {
            terms,
            doc_freq,
            index,
        })
    }

    pub fn build<'a, I>(docs: I, min_df: u32) -> Result<Self>
    where
        I: IntoIterator<Item = &'a TokenSeq>,
    {
        let mut order: Vec<String> = Vec::new();
        let mut df: HashMap<&'a str, u32> = HashMap::new();
        let mut ndocs = 0usize;
        let mut last_doc: HashMap<&'a str, usize> = HashMap::new();
        for doc in docs {
            ndocs += 1;
            for tok in doc.iter() {
                if last_doc.insert(tok, ndocs) == Some(ndocs) {
                    continue;
                }
                let entry = df.entry(tok).or_insert_with(|| {
                    order.push(tok.to_string());
                    0
                });
                *entry += 1;
            }
        }
        if ndocs == 0 {
            return Err(Error::Empty("cannot build a vocabulary from zero documents".into()));
        }
        let min_df = min_df.max(1);
        let mut terms = Vec::new();
        let mut doc_freq = Vec::new();
        for term in order {
            let count = df[term.as_str()];
            if count >= min_df {
                doc_freq.push(count);
                terms.push(term);
            }
        }
        Vocabulary::from_parts(terms, doc_freq)
    }

    pub fn from_corpus(c: &Corpus, min_df: u32) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::Empty("corpus has no records".into()));
        }
        let seqs: Vec<TokenSeq> = c.iter().map(|r| tokenize(&r.text)).collect();
        Self::build(&seqs, min_df)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, term: &str) -> Option<u32> {
        self.id(term).map(|i| self.doc_freq[i as usize])
    }

    pub fn doc_freqs(&self) -> &[u32] {
        &self.doc_freq
    }

    pub fn vectorize(&self, t: &TokenSeq) -> FeatureVector {
        FeatureVector::from_ids(t.iter().filter_map(|tok| self.id(tok)))
    }

    pub fn vectorize_text(&self, text: &str) -> FeatureVector {
        self.vectorize(&tokenize(text))
    }
}

/// Sparse term counts, sorted by term id; every stored count is at least 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    entries: Vec<(u32, u32)>,
}

impl FeatureVector {
    pub fn from_ids(ids: impl IntoIterator<Item = u32>) -> Self {
        let mut ids: Vec<u32> = ids.into_iter().collect();
        ids.sort_unstable();
        let mut entries: Vec<(u32, u32)> = Vec::with_capacity(ids.len());
        for id in ids {
            match entries.last_mut() {
                Some((last, n)) if *last == id => *n += 1,
                _ => entries.push((id, 1)),
            }
        }
        FeatureVector { entries }
    }

    /// Builds from (id, count) pairs; zero counts are dropped, repeats summed.
    pub fn from_counts(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut pairs: Vec<(u32, u32)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        pairs.sort_unstable_by_key(|&(id, _)| id);
        let mut entries: Vec<(u32, u32)> = Vec::with_capacity(pairs.len());
        for (id, c) in pairs {
            match entries.last_mut() {
                Some((last, n)) if *last == id => *n += c,
                _ => entries.push((id, c)),
            }
        }
        FeatureVector { entries }
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn get(&self, id: u32) -> u32 {
        self.entries
            .binary_search_by_key(&id, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn binarized(&self) -> FeatureVector {
        FeatureVector {
            entries: self.entries.iter().map(|&(id, _)| (id, 1)).collect(),
        }
    }
}
