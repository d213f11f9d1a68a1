//! Tweet-like corpora: loading, validation, filtering and persistence.
//!
//! A corpus file is JSON Lines, one record per line:
//!
//! ```text
//! {"id": "1", "text": "ugh #sostressed", "city": "new_york",
//!  "labels": {"relevant": true, "first_hand": true, "themes": ["topic_education"]}}
//! ```
//!
//! `created_at`, `city` and `labels` are optional. Blank lines are skipped.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::themes::ThemeId;

pub const MAX_TEXT_CHARS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    Stress,
    #[serde(alias = "relax")]
    Relaxation,
}

impl Track {
    /// Keyword used by the first step of the city pipeline.
    pub fn keyword(self) -> &'static str {
        match self {
            Track::Stress => "stress",
            Track::Relaxation => "relax",
        }
    }

    /// Hashtag list used to collect the seed dataset.
    pub fn hashtags(self) -> &'static [&'static str] {
        match self {
            Track::Stress => STRESS_HASHTAGS,
            Track::Relaxation => RELAX_HASHTAGS,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Track::Stress => "stress",
            Track::Relaxation => "relaxation",
        }
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Track {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stress" => Ok(Track::Stress),
            "relax" | "relaxation" => Ok(Track::Relaxation),
            other => Err(Error::invalid(format!("unknown track {other:?}"))),
        }
    }
}

pub const STRESS_HASHTAGS: &[&str] = &[
    "#stress",
    "#stressed",
    "#stressful",
    "#stressin",
    "#stressing",
    "#sostressful",
    "#sostressed",
    "#stressinout",
    "#stressingout",
];

pub const RELAX_HASHTAGS: &[&str] = &[
    "#relax",
    "#relaxed",
    "#relaxin",
    "#relaxing",
    "#sorelaxin",
    "#sorelaxing",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet {
    pub relevant: Option<bool>,
    pub first_hand: Option<bool>,
    pub themes: BTreeSet<ThemeId>,
}

impl LabelSet {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.first_hand.is_some() && self.relevant != Some(true) {
            return Err("first_hand label requires relevant = true".into());
        }
        if !self.themes.is_empty() && self.first_hand != Some(true) {
            return Err("themes require first_hand = true".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    /// RFC 3339 timestamp, kept verbatim.
    pub created_at: Option<String>,
    pub city: Option<String>,
    pub labels: Option<LabelSet>,
}

impl TweetRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        TweetRecord {
            id: id.into(),
            text: text.into(),
            created_at: None,
            city: None,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: LabelSet) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn relevant(&self) -> Option<bool> {
        self.labels.as_ref().and_then(|l| l.relevant)
    }

    pub fn first_hand(&self) -> Option<bool> {
        self.labels.as_ref().and_then(|l| l.first_hand)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.text.trim().is_empty() {
            return Err("text is empty".into());
        }
        let chars = self.text.chars().count();
        if chars > MAX_TEXT_CHARS {
            return Err(format!("text has {chars} characters, limit is {MAX_TEXT_CHARS}"));
        }
        if let Some(ts) = &self.created_at {
            if !looks_like_rfc3339(ts) {
                return Err(format!("created_at {ts:?} is not an RFC 3339 timestamp"));
            }
        }
        if let Some(labels) = &self.labels {
            labels.validate()?;
        }
        Ok(())
    }
}

// Structural check only: date, 'T', time, and a zone designator.
fn looks_like_rfc3339(s: &str) -> bool {
    let b = s.as_bytes();
    let digits = |r: std::ops::Range<usize>| r.clone().all(|i| b.get(i).is_some_and(u8::is_ascii_digit));
    if b.len() < 20 || !digits(0..4) || b[4] != b'-' || !digits(5..7) || b[7] != b'-' || !digits(8..10) {
        return false;
    }
    if !matches!(b[10], b'T' | b't' | b' ') || !digits(11..13) || b[13] != b':' || !digits(14..16) || b[16] != b':' || !digits(17..19) {
        return false;
    }
    let mut rest = &s[19..];
    if let Some(frac) = rest.strip_prefix('.') {
        let n = frac.bytes().take_while(u8::is_ascii_digit).count();
        if n == 0 {
            return false;
        }
        rest = &frac[n..];
    }
    match rest.as_bytes() {
        [b'Z' | b'z'] => true,
        [b'+' | b'-', h1, h2, b':', m1, m2] => [h1, h2, m1, m2].iter().all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub records: Vec<TweetRecord>,
    pub track: Track,
    pub provenance: Vec<String>,
}

// On-disk shapes. Optional fields are skipped when absent so that writing a
// loaded corpus reproduces the same logical content.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: Option<String>,
    text: Option<String>,
    created_at: Option<String>,
    city: Option<String>,
    labels: Option<RawLabels>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLabels {
    #[serde(skip_serializing_if = "Option::is_none")]
    relevant: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_hand: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    themes: Vec<String>,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    id: &'a str,
    text: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    created_at: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    city: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<RawLabels>,
}

impl Corpus {
    pub fn new(records: Vec<TweetRecord>, track: Track) -> Result<Self> {
        let corpus = Corpus {
            records,
            track,
            provenance: Vec::new(),
        };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TweetRecord> {
        self.records.iter()
    }

    /// Checks every record and id uniqueness. Positions in errors are 1-based.
    pub fn validate(&self) -> Result<()> {
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(self.records.len());
        for (i, rec) in self.records.iter().enumerate() {
            rec.validate().map_err(|message| Error::Line { line: i + 1, message })?;
            if let Some(first) = seen.insert(rec.id.as_str(), i + 1) {
                return Err(Error::DuplicateId {
                    id: rec.id.clone(),
                    first,
                    second: i + 1,
                });
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, track: Track) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut corpus = Self::parse(&content, track)?;
        corpus.provenance.push(format!("loaded from {}", path.display()));
        Ok(corpus)
    }

    /// Parses JSON Lines content. Errors name the 1-based physical line.
    pub fn parse(content: &str, track: Track) -> Result<Self> {
        let mut records = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (idx, line) in content.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let rec = parse_line(line, track).map_err(|message| Error::Line { line: lineno, message })?;
            if let Some(first) = seen.insert(rec.id.clone(), lineno) {
                return Err(Error::DuplicateId {
                    id: rec.id,
                    first,
                    second: lineno,
                });
            }
            records.push(rec);
        }
        if records.is_empty() {
            return Err(Error::Empty("corpus file contains no records".into()));
        }
        Ok(Corpus {
            records,
            track,
            provenance: Vec::new(),
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("serde_json emits UTF-8")
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        for rec in &self.records {
            let out = OutRecord {
                id: &rec.id,
                text: &rec.text,
                created_at: rec.created_at.as_deref(),
                city: rec.city.as_deref(),
                labels: rec.labels.as_ref().map(|l| RawLabels {
                    relevant: l.relevant,
                    first_hand: l.first_hand,
                    themes: l.themes.iter().map(|t| t.name().to_string()).collect(),
                }),
            };
            serde_json::to_writer(&mut w, &out)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Stable filter that also records the step in the provenance log.
    pub fn retain_where(&self, note: String, mut keep: impl FnMut(&TweetRecord) -> bool) -> Corpus {
        let records = self.records.iter().filter(|r| keep(r)).cloned().collect();
        let mut provenance = self.provenance.clone();
        provenance.push(note);
        Corpus {
            records,
            track: self.track,
            provenance,
        }
    }

    /// Case-insensitive raw substring match, so "mistress" passes "stress".
    pub fn filter_keyword(&self, keyword: &str) -> Result<Corpus> {
        if keyword.is_empty() {
            return Err(Error::invalid("keyword must be nonempty"));
        }
        let needle = keyword.to_lowercase();
        Ok(self.retain_where(format!("keyword {keyword:?}"), |r| {
            contains_keyword(&r.text, &needle)
        }))
    }

    /// Keeps records containing at least one of `tags` as a whole hashtag.
    pub fn filter_hashtags<S: AsRef<str>>(&self, tags: &[S]) -> Result<Corpus> {
        let matcher = HashtagMatcher::new(tags)?;
        let note = format!("hashtags {}", matcher.tags.join(","));
        Ok(self.retain_where(note, |r| matcher.matches(&r.text)))
    }
}

/// `needle` must already be lowercase.
pub fn contains_keyword(text: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return true;
    }
    if text.is_ascii() {
        // ASCII fast path.
        let hay = text.as_bytes();
        let n = needle.as_bytes();
        n.len() <= hay.len() && hay.windows(n.len()).any(|w| w.eq_ignore_ascii_case(n))
    } else {
        text.to_lowercase().contains(needle)
    }
}

#[derive(Debug, Clone)]
pub struct HashtagMatcher {
    tags: Vec<String>,
}

impl HashtagMatcher {
    pub fn new<S: AsRef<str>>(tags: &[S]) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::invalid("hashtag set must be nonempty"));
        }
        let mut out = Vec::with_capacity(tags.len());
        for tag in tags {
            let tag = tag.as_ref();
            if !tag.starts_with('#') || tag.len() < 2 {
                return Err(Error::invalid(format!("hashtag {tag:?} must start with '#'")));
            }
            out.push(tag.to_lowercase());
        }
        Ok(HashtagMatcher { tags: out })
    }

    pub fn matches(&self, text: &str) -> bool {
        let lower = text.to_lowercase();
        self.tags.iter().any(|tag| {
            lower.match_indices(tag.as_str()).any(|(start, m)| {
                let before_ok = lower[..start].chars().next_back().is_none_or(|c| !is_word_char(c));
                let after = &lower[start + m.len()..];
                before_ok && !continues_word(after)
            })
        })
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

// An apostrophe only continues the tag when a letter or digit follows it.
fn continues_word(after: &str) -> bool {
    let mut chars = after.chars();
    match chars.next() {
        Some(c) if is_word_char(c) => true,
        Some('\'') | Some('\u{2019}') => chars.next().is_some_and(char::is_alphanumeric),
        _ => false,
    }
}

fn parse_line(line: &str, track: Track) -> std::result::Result<TweetRecord, String> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| {
        let msg = e.to_string();
        // serde_json appends " at line 1 column N"; the outer error already names the line.
        match msg.rfind(" at line ") {
            Some(pos) => msg[..pos].to_string(),
            None => msg,
        }
    })?;
    let id = raw.id.ok_or("missing field id")?;
    let text = raw.text.ok_or("missing field text")?;
    let labels = match raw.labels {
        None => None,
        Some(l) => {
            let themes = l
                .themes
                .iter()
                .map(|name| ThemeId::parse(track, name).map_err(|e| e.to_string()))
                .collect::<std::result::Result<BTreeSet<_>, _>>()?;
            Some(LabelSet {
                relevant: l.relevant,
                first_hand: l.first_hand,
                themes,
            })
        }
    };
    let rec = TweetRecord {
        id,
        text,
        created_at: raw.created_at,
        city: raw.city,
        labels,
    };
    rec.validate()?;
    Ok(rec)
}
