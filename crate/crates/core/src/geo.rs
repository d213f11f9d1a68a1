//! City-level analysis: the three-step classification cascade, proportions,
//! pairwise two-proportion chi-squared tests, keyword frequency tables and
//! tag-cloud weights.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{RecordClassifier, Task};
use crate::corpus::{Corpus, Track};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::chi2_sf_df1;
use crate::themes::{classify_themes, ThemeAssignment, ThemeId, ThemeLexicon};
use crate::tokenize::tokenize;

/// Forbes 2011 (CNN 2014) stress ranks, shown for reference only.
pub const SURVEY_RANKS: &[(&str, &str)] = &[
    ("los_angeles", "1 (3)"),
    ("new_york", "2 (1)"),
    ("san_diego", "5 (38)"),
    ("san_francisco", "7 (39)"),
];

pub fn survey_rank(city: &str) -> Option<&'static str> {
    let key = city.to_lowercase().replace([' ', '-'], "_");
    SURVEY_RANKS.iter().find(|(c, _)| *c == key).map(|(_, r)| *r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeCount {
    pub theme: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeywordRow<T> {
    pub term: String,
    pub count: u64,
    pub percent: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CityReport<T> {
    pub city: String,
    pub track: Track,
    pub total_tweets: u64,
    pub keyword_matched: u64,
    pub relevant: u64,
    pub first_hand: u64,
    pub proportion_relevant: T,
    pub proportion_first_hand: T,
    pub theme_table: Vec<ThemeCount>,
    pub top_keywords: Vec<KeywordRow<T>>,
}

fn ratio<T: Scalar>(num: u64, den: u64) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_u64(num).unwrap() / T::from_u64(den).unwrap()
    }
}

impl<T: Scalar> CityReport<T> {
    /// Report from cascade counts alone; rejects counts that widen.
    pub fn from_counts(
        city: impl Into<String>,
        track: Track,
        total_tweets: u64,
        keyword_matched: u64,
        relevant: u64,
        first_hand: u64,
    ) -> Result<Self> {
        let city = city.into();
        if !(total_tweets >= keyword_matched && keyword_matched >= relevant && relevant >= first_hand) {
            return Err(Error::invalid(format!(
                "{city}: counts must narrow (total {total_tweets} >= keyword {keyword_matched} >= relevant {relevant} >= first-hand {first_hand})"
            )));
        }
        Ok(CityReport {
            city,
            track,
            total_tweets,
            keyword_matched,
            relevant,
            first_hand,
            proportion_relevant: ratio(relevant, total_tweets),
            proportion_first_hand: ratio(first_hand, total_tweets),
            theme_table: Vec::new(),
            top_keywords: Vec::new(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CityOutcome<T> {
    pub report: CityReport<T>,
    /// Records that survived all three steps.
    pub first_hand: Corpus,
    pub assignments: Vec<ThemeAssignment>,
}

fn check_target(model: &dyn RecordClassifier, track: Track, task: Task, slot: &str) -> Result<()> {
    match model.target() {
        Some(t) if t.track != track || t.task != task => Err(Error::invalid(format!(
            "{slot} model was trained for {} {}, pipeline expects {track} {task}",
            t.track, t.task
        ))),
        _ => Ok(()),
    }
}

/// Keyword filter, then relevance model, then first-hand model; themes are
/// assigned to the survivors. `total_tweets` defaults to the corpus size.
#[allow(clippy::too_many_arguments)]
pub fn run_city_pipeline<T: Scalar>(
    city: &str,
    corpus: &Corpus,
    total_tweets: Option<u64>,
    relevance: &dyn RecordClassifier,
    first_hand: &dyn RecordClassifier,
    lexicon: &ThemeLexicon,
    track: Track,
    top_k: usize,
) -> Result<CityOutcome<T>> {
    check_target(relevance, track, Task::Relevance, "relevance")?;
    check_target(first_hand, track, Task::FirstHand, "first-hand")?;
    let total = total_tweets.unwrap_or(corpus.len() as u64);
    if total < corpus.len() as u64 {
        return Err(Error::invalid(format!(
            "{city}: total_tweets {total} is smaller than the {} records supplied",
            corpus.len()
        )));
    }
    let matched = corpus.filter_keyword(track.keyword())?;
    let keep_relevant: Vec<bool> = matched.records.par_iter().map(|r| relevance.classify(r)).collect();
    let mut flags = keep_relevant.iter();
    let relevant = matched.retain_where("relevance model".into(), |_| *flags.next().unwrap());
    let keep_first: Vec<bool> = relevant.records.par_iter().map(|r| first_hand.classify(r)).collect();
    let mut flags = keep_first.iter();
    let survivors = relevant.retain_where("first-hand model".into(), |_| *flags.next().unwrap());

    let assignments: Vec<ThemeAssignment> = survivors
        .records
        .par_iter()
        .map(|r| classify_themes(r, lexicon, track))
        .collect();
    let mut counts: HashMap<ThemeId, u64> = HashMap::new();
    for a in &assignments {
        for t in &a.themes {
            *counts.entry(*t).or_default() += 1;
        }
    }
    let theme_table = ThemeId::all(track)
        .map(|t| ThemeCount {
            theme: t.name().to_string(),
            count: counts.get(&t).copied().unwrap_or(0),
        })
        .collect();
    let top_keywords = if survivors.is_empty() { Vec::new() } else { top_keywords(&survivors, top_k)? };

    let mut report = CityReport::from_counts(
        city,
        track,
        total,
        matched.len() as u64,
        relevant.len() as u64,
        survivors.len() as u64,
    )?;
    report.theme_table = theme_table;
    report.top_keywords = top_keywords;
    Ok(CityOutcome {
        report,
        first_hand: survivors,
        assignments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult<T> {
    pub statistic: T,
    pub df: u32,
    pub p_value: T,
    pub yates: bool,
}

/// Pearson chi-squared on `[[a_pos, a_total - a_pos], [b_pos, b_total - b_pos]]`
/// with margin-based expectations; p from the df = 1 closed form.
pub fn chi2_two_proportions<T: Scalar>(
    a_pos: u64,
    a_total: u64,
    b_pos: u64,
    b_total: u64,
    yates: bool,
) -> Result<TestResult<T>> {
    if a_total == 0 || b_total == 0 {
        return Err(Error::invalid("chi-squared totals must be positive"));
    }
    if a_pos > a_total || b_pos > b_total {
        return Err(Error::invalid("positive count exceeds its total"));
    }
    let observed = [[a_pos, a_total - a_pos], [b_pos, b_total - b_pos]];
    let rows = [a_total, b_total];
    let cols = [a_pos + b_pos, (a_total - a_pos) + (b_total - b_pos)];
    let n = T::from_u64(a_total + b_total).unwrap();
    let half = T::lit(0.5);
    let mut statistic = T::zero();
    for (i, row) in observed.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = T::from_u64(rows[i]).unwrap() * T::from_u64(cols[j]).unwrap() / n;
            if e <= T::zero() {
                return Err(Error::invalid(format!(
                    "expected count is zero in cell ({i}, {j}); the test is undefined"
                )));
            }
            let mut dev = (T::from_u64(o).unwrap() - e).abs();
            if yates {
                dev = (dev - half).max(T::zero());
            }
            statistic = statistic + dev * dev / e;
        }
    }
    Ok(TestResult {
        statistic,
        df: 1,
        p_value: chi2_sf_df1(statistic),
        yates,
    })
}

/// Which counts form each city's row of the 2x2 table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contingency {
    #[default]
    FirstHandVsTotal,
    FirstHandVsKeyword,
    /// Relevant (step two) tweets against all tweets.
    RelevantVsTotal,
}

impl Contingency {
    pub fn as_str(self) -> &'static str {
        match self {
            Contingency::FirstHandVsTotal => "first_hand_vs_total",
            Contingency::FirstHandVsKeyword => "first_hand_vs_keyword",
            Contingency::RelevantVsTotal => "relevant_vs_total",
        }
    }

    fn row<T>(self, r: &CityReport<T>) -> (u64, u64) {
        match self {
            Contingency::FirstHandVsTotal => (r.first_hand, r.total_tweets),
            Contingency::FirstHandVsKeyword => (r.first_hand, r.keyword_matched),
            Contingency::RelevantVsTotal => (r.relevant, r.total_tweets),
        }
    }
}

impl std::str::FromStr for Contingency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "first_hand_vs_total" => Ok(Contingency::FirstHandVsTotal),
            "first_hand_vs_keyword" => Ok(Contingency::FirstHandVsKeyword),
            "relevant_vs_total" => Ok(Contingency::RelevantVsTotal),
            other => Err(Error::invalid(format!("unknown contingency {other:?}"))),
        }
    }
}

/// Symmetric matrix of pairwise tests; the diagonal is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValueMatrix<T> {
    pub cities: Vec<String>,
    pub contingency: Contingency,
    pub cells: Vec<Vec<Option<TestResult<T>>>>,
}

pub fn pairwise_compare<T: Scalar>(
    reports: &[CityReport<T>],
    yates: bool,
    contingency: Contingency,
) -> Result<PValueMatrix<T>> {
    if reports.len() < 2 {
        return Err(Error::invalid("pairwise comparison needs at least two cities"));
    }
    let n = reports.len();
    let mut cells = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (a_pos, a_total) = contingency.row(&reports[i]);
            let (b_pos, b_total) = contingency.row(&reports[j]);
            let res = chi2_two_proportions(a_pos, a_total, b_pos, b_total, yates)
                .map_err(|e| Error::invalid(format!("{} vs {}: {e}", reports[i].city, reports[j].city)))?;
            cells[i][j] = Some(res);
            cells[j][i] = Some(res);
        }
    }
    Ok(PValueMatrix {
        cities: reports.iter().map(|r| r.city.clone()).collect(),
        contingency,
        cells,
    })
}

pub fn format_p_value(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".to_string()
    } else {
        format!("{p:.4}")
    }
}

impl<T: Scalar + Serialize> PValueMatrix<T> {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, &TestResult<T>)> {
        let n = self.cities.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.cells[i][j].as_ref().expect("off-diagonal"))))
    }

    pub fn render_text(&self) -> String {
        let width = self.cities.iter().map(String::len).max().unwrap_or(4).max(8);
        let mut out = format!("{:<width$}", "");
        for c in &self.cities {
            out.push_str(&format!("  {c:>width$}"));
        }
        out.push('\n');
        for (i, c) in self.cities.iter().enumerate() {
            out.push_str(&format!("{c:<width$}"));
            for cell in &self.cells[i] {
                let s = match cell {
                    Some(r) => format_p_value(r.p_value.to_f64_lossless()),
                    None => "NA".to_string(),
                };
                out.push_str(&format!("  {s:>width$}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes") + "\n"
    }
}

/// Table of cascade counts and proportions, one row per city.
pub fn render_city_table<T: Scalar>(reports: &[CityReport<T>]) -> String {
    let width = reports.iter().map(|r| r.city.len()).max().unwrap_or(4).max(4);
    let mut out = format!(
        "{:<width$}  {:>8}  {:>10}  {:>10}  {:>10}  {:>10}  {:>12}  {:>12}\n",
        "city", "survey", "tweets", "keyword", "relevant", "first_hand", "prop_relev", "prop_first"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>10}  {:>10}  {:>10}  {:>10}  {:>12.4e}  {:>12.4e}\n",
            r.city,
            survey_rank(&r.city).unwrap_or("-"),
            r.total_tweets,
            r.keyword_matched,
            r.relevant,
            r.first_hand,
            r.proportion_relevant.to_f64_lossless(),
            r.proportion_first_hand.to_f64_lossless(),
        ));
    }
    out
}

/// Unigram frequencies over the whole corpus, descending, ties by term.
pub fn term_counts(c: &Corpus) -> (Vec<(String, u64)>, u64) {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for r in c.iter() {
        for tok in tokenize(&r.text).tokens {
            total += 1;
            *counts.entry(tok).or_default() += 1;
        }
    }
    let mut rows: Vec<(String, u64)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    (rows, total)
}

pub fn top_keywords<T: Scalar>(c: &Corpus, k: usize) -> Result<Vec<KeywordRow<T>>> {
    if k == 0 {
        return Err(Error::invalid("top-k must be at least 1"));
    }
    if c.is_empty() {
        return Err(Error::Empty("corpus has no records".into()));
    }
    let (rows, total) = term_counts(c);
    if total == 0 {
        return Err(Error::Empty("corpus has no tokens".into()));
    }
    Ok(rows
        .into_iter()
        .take(k)
        .map(|(term, count)| KeywordRow {
            term,
            count,
            percent: ratio::<T>(count, total) * T::lit(100.0),
        })
        .collect())
}

pub fn render_keyword_rows<T: Scalar>(rows: &[KeywordRow<T>]) -> String {
    let width = rows.iter().map(|r| r.term.chars().count()).max().unwrap_or(4).max(4);
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>6}\n",
            r.term,
            r.count,
            format!("{:.1}%", r.percent.to_f64_lossless())
        ));
    }
    out
}

/// Relative-frequency weights for a tag cloud, descending, ties by term.
/// `drop_term` removes one token (usually the track keyword) before weighting.
pub fn tagcloud_weights<T: Scalar>(c: &Corpus, drop_term: Option<&str>) -> Vec<(String, T)> {
    let (mut rows, _) = term_counts(c);
    if let Some(d) = drop_term {
        rows.retain(|(t, _)| t != d);
    }
    let total: u64 = rows.iter().map(|(_, n)| n).sum();
    rows.into_iter().map(|(t, n)| (t, ratio::<T>(n, total))).collect()
}

pub fn render_tagcloud<T: Scalar>(weights: &[(String, T)]) -> String {
    weights.iter().map(|(t, w)| format!("{t}\t{w}\n")).collect()
}

pub fn tagcloud_export<T: Scalar>(c: &Corpus, path: impl AsRef<Path>, drop_term: Option<&str>) -> Result<()> {
    let path = path.as_ref();
    let body = render_tagcloud(&tagcloud_weights::<T>(c, drop_term));
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

/// City manifest: where a city's records live and how many tweets the city
/// produced in total. `counts` replaces the corpus when only the cascade
/// counts are known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityManifest {
    pub city: String,
    pub total_tweets: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<CascadeCounts>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeCounts {
    pub keyword_matched: u64,
    pub relevant: u64,
    pub first_hand: u64,
}

impl CityManifest {
    /// Relative `corpus_path` values resolve against the manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: CityManifest = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        match (&m.corpus_path, &m.counts) {
            (None, None) => {
                return Err(Error::invalid(format!(
                    "{}: manifest needs corpus_path or counts",
                    path.display()
                )))
            }
            (Some(_), Some(_)) => {
                return Err(Error::invalid(format!(
                    "{}: corpus_path and counts are mutually exclusive",
                    path.display()
                )))
            }
            (None, Some(_)) if m.total_tweets.is_none() => {
                return Err(Error::invalid(format!("{}: counts require total_tweets", path.display())))
            }
            _ => {}
        }
        if let Some(p) = &m.corpus_path {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    m.corpus_path = Some(dir.join(p));
                }
            }
        }
        Ok(m)
    }
}
