//! Confusion matrices, the four evaluation rates, stratified k-fold
//! cross-validation and information-gain term ranking.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{Example, Learner, ModelKind, Task};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scalar::{xlog2x, Scalar};
use crate::tokenize::{tokenize, FeatureVector, TokenSeq, Vocabulary};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, predicted: bool, gold: bool) {
        match (predicted, gold) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    /// The same predictions scored with the other class as positive.
    pub fn swapped(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }

    fn ratios(&self) -> [(u64, u64); 4] {
        [
            (self.tp + self.tn, self.total()),
            (self.tp, self.tp + self.fn_),
            (self.tn, self.tn + self.fp),
            (self.tp, self.tp + self.fp),
        ]
    }

    /// Accuracy, sensitivity, specificity and PPV as percentages with two
    /// decimals, rounded half-up in exact integer arithmetic.
    pub fn percent_strings(&self) -> [Option<String>; 4] {
        self.ratios().map(|(num, den)| (den > 0).then(|| percent_2dp(num, den)))
    }
}

fn percent_2dp(num: u64, den: u64) -> String {
    let hundredths = (20_000 * num as u128 + den as u128) / (2 * den as u128);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

impl Add for ConfusionMatrix {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionMatrix::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_, self.tn + o.tn)
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ConfusionMatrix::default(), Add::add)
    }
}

pub fn confusion(preds: &[bool], gold: &[bool]) -> Result<ConfusionMatrix> {
    if preds.len() != gold.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} gold labels",
            preds.len(),
            gold.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Empty("no predictions to score".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &g) in preds.iter().zip(gold) {
        cm.record(p, g);
    }
    Ok(cm)
}

/// `None` marks a rate whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport<T> {
    pub accuracy: Option<T>,
    pub sensitivity: Option<T>,
    pub specificity: Option<T>,
    pub ppv: Option<T>,
}

impl<T: Scalar> MetricsReport<T> {
    pub fn values(&self) -> [Option<T>; 4] {
        [self.accuracy, self.sensitivity, self.specificity, self.ppv]
    }

    /// Percentages to two decimals, "NA" when undefined.
    pub fn percent_strings(&self) -> [String; 4] {
        self.values().map(|v| match v {
            Some(x) => format!("{:.2}", (x.to_f64_lossless() * 10_000.0).round() / 100.0),
            None => "NA".to_string(),
        })
    }
}

pub fn metrics<T: Scalar>(cm: &ConfusionMatrix) -> Result<MetricsReport<T>> {
    if cm.total() == 0 {
        return Err(Error::Empty("confusion matrix has no examples".into()));
    }
    let [acc, sen, spec, ppv] = cm.ratios().map(|(num, den)| {
        (den > 0).then(|| T::from_u64(num).unwrap() / T::from_u64(den).unwrap())
    });
    Ok(MetricsReport {
        accuracy: acc,
        sensitivity: sen,
        specificity: spec,
        ppv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Sum fold matrices, compute rates once.
    #[default]
    Pooled,
    /// Average each rate over the folds where it is defined.
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub min_df: u32,
    pub aggregation: Aggregation,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 10,
            seed: 42,
            min_df: 1,
            aggregation: Aggregation::Pooled,
        }
    }
}

/// Offset added to the run seed for the SVM shuffle of fold `f` (seed + 1 + f).
pub const FOLD_SEED_OFFSET: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport<T> {
    pub task: Task,
    pub model: ModelKind,
    pub k: usize,
    pub seed: u64,
    pub aggregation: Aggregation,
    pub examples: usize,
    pub pooled: ConfusionMatrix,
    pub folds: Vec<ConfusionMatrix>,
    /// Test-fold membership per example, in corpus order of the task's population.
    pub fold_of: Vec<usize>,
    pub metrics: MetricsReport<T>,
}

/// Assigns each example to one of `k` folds. Classes are shuffled separately
/// and dealt round-robin (positives first, negatives continuing the cycle),
/// so fold sizes and per-class counts differ by at most one.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    for (class, members) in [("positive", &pos), ("negative", &neg)] {
        if members.len() < k {
            return Err(Error::TooFewMembers {
                class,
                count: members.len(),
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold_of = vec![0; labels.len()];
    for (slot, &i) in pos.iter().chain(&neg).enumerate() {
        fold_of[i] = slot % k;
    }
    Ok(fold_of)
}

/// Labelled token sequences for `task`, in corpus order.
pub fn task_examples(c: &Corpus, task: Task) -> Result<Vec<(TokenSeq, bool)>> {
    c.iter()
        .filter(|r| task.applies_to(r))
        .map(|r| {
            let y = task.gold(r).ok_or_else(|| Error::MissingLabel {
                id: r.id.clone(),
                field: if task == Task::Relevance { "relevant" } else { "first_hand" },
            })?;
            Ok((tokenize(&r.text), y))
        })
        .collect()
}

pub fn cross_validate<T: Scalar>(
    c: &Corpus,
    task: Task,
    learner: &Learner<T>,
    cfg: &CvConfig,
) -> Result<CvReport<T>> {
    let examples = task_examples(c, task)?;
    cross_validate_examples(&examples, task, learner, cfg)
}

pub fn cross_validate_examples<T: Scalar>(
    examples: &[(TokenSeq, bool)],
    task: Task,
    learner: &Learner<T>,
    cfg: &CvConfig,
) -> Result<CvReport<T>> {
    let labels: Vec<bool> = examples.iter().map(|e| e.1).collect();
    let fold_of = stratified_folds(&labels, cfg.k, cfg.seed)?;
    let folds: Vec<ConfusionMatrix> = (0..cfg.k)
        .into_par_iter()
        .map(|fold| -> Result<ConfusionMatrix> {
            let train_docs = examples.iter().zip(&fold_of).filter(|(_, &f)| f != fold).map(|(e, _)| &e.0);
            let vocab = Vocabulary::build(train_docs, cfg.min_df)?;
            let train: Vec<Example> = examples
                .iter()
                .zip(&fold_of)
                .filter(|(_, &f)| f != fold)
                .map(|(e, _)| (vocab.vectorize(&e.0), e.1))
                .collect();
            let seed = cfg.seed.wrapping_add(FOLD_SEED_OFFSET + fold as u64);
            let model = learner.with_seed(seed).train(&train, &vocab)?;
            let mut cm = ConfusionMatrix::default();
            for (e, _) in examples.iter().zip(&fold_of).filter(|(_, &f)| f == fold) {
                cm.record(model.predict(&vocab.vectorize(&e.0)).label, e.1);
            }
            Ok(cm)
        })
        .collect::<Result<_>>()?;
    let pooled: ConfusionMatrix = folds.iter().copied().sum();
    let metrics = match cfg.aggregation {
        Aggregation::Pooled => metrics(&pooled)?,
        Aggregation::Macro => macro_average(&folds)?,
    };
    Ok(CvReport {
        task,
        model: learner.kind(),
        k: cfg.k,
        seed: cfg.seed,
        aggregation: cfg.aggregation,
        examples: examples.len(),
        pooled,
        folds,
        fold_of,
        metrics,
    })
}

fn macro_average<T: Scalar>(folds: &[ConfusionMatrix]) -> Result<MetricsReport<T>> {
    let per_fold: Vec<MetricsReport<T>> = folds.iter().map(metrics).collect::<Result<_>>()?;
    let mean = |pick: fn(&MetricsReport<T>) -> Option<T>| {
        let defined: Vec<T> = per_fold.iter().filter_map(pick).collect();
        (!defined.is_empty()).then(|| defined.iter().copied().sum::<T>() / T::from_count(defined.len()))
    };
    Ok(MetricsReport {
        accuracy: mean(|m| m.accuracy),
        sensitivity: mean(|m| m.sensitivity),
        specificity: mean(|m| m.specificity),
        ppv: mean(|m| m.ppv),
    })
}

#[derive(Serialize)]
struct CvJson<'a> {
    task: &'a str,
    model: String,
    k: usize,
    seed: u64,
    aggregation: Aggregation,
    examples: usize,
    cells: ConfusionMatrix,
    metrics: CvMetricsJson,
}

#[derive(Serialize)]
struct CvMetricsJson {
    accuracy: Option<f64>,
    sensitivity: Option<f64>,
    specificity: Option<f64>,
    ppv: Option<f64>,
}

impl<T: Scalar> CvReport<T> {
    /// Rates as percentage strings; pooled reports round exactly from the cells.
    pub fn percent_strings(&self) -> [String; 4] {
        match self.aggregation {
            Aggregation::Pooled => self.pooled.percent_strings().map(|s| s.unwrap_or_else(|| "NA".into())),
            Aggregation::Macro => self.metrics.percent_strings(),
        }
    }

    pub fn render_text(&self) -> String {
        let p = self.percent_strings();
        let cm = &self.pooled;
        let sw = self.seed.to_string().len().max(4);
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:<5} {:>3} {:>sw$} {:>8}  {}\n",
            "task", "model", "k", "seed", "examples", "Acc/Sen/Spec/PPV"
        ));
        out.push_str(&format!(
            "{:<12} {:<5} {:>3} {:>sw$} {:>8}  {}\n",
            self.task.as_str(),
            self.model.to_string(),
            self.k,
            self.seed,
            self.examples,
            p.join("/")
        ));
        out.push_str(&format!(
            "\naggregation: {}\n{:>6} {:>6} {:>6} {:>6}\n{:>6} {:>6} {:>6} {:>6}\n",
            match self.aggregation {
                Aggregation::Pooled => "pooled",
                Aggregation::Macro => "macro",
            },
            "TP",
            "FP",
            "FN",
            "TN",
            cm.tp,
            cm.fp,
            cm.fn_,
            cm.tn
        ));
        out
    }

    pub fn render_json(&self) -> String {
        let p = self.percent_strings();
        let num = |s: &String| s.parse::<f64>().ok();
        let json = CvJson {
            task: self.task.as_str(),
            model: self.model.to_string(),
            k: self.k,
            seed: self.seed,
            aggregation: self.aggregation,
            examples: self.examples,
            cells: self.pooled,
            metrics: CvMetricsJson {
                accuracy: num(&p[0]),
                sensitivity: num(&p[1]),
                specificity: num(&p[2]),
                ppv: num(&p[3]),
            },
        };
        serde_json::to_string_pretty(&json).expect("report serializes") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermScore<T> {
    pub term: String,
    pub gain: T,
}

fn entropy2<T: Scalar>(a: u64, b: u64) -> T {
    let n = a + b;
    if n == 0 {
        return T::zero();
    }
    let n = T::from_u64(n).unwrap();
    let pa = T::from_u64(a).unwrap() / n;
    let pb = T::from_u64(b).unwrap() / n;
    -(xlog2x(pa) + xlog2x(pb))
}

/// Information gain (bits) of term presence for every vocabulary term over
/// labelled documents, sorted by gain descending then term ascending.
pub fn information_gain_vectors<T: Scalar>(
    docs: &[(FeatureVector, bool)],
    vocab: &Vocabulary,
) -> Result<Vec<TermScore<T>>> {
    let n_pos = docs.iter().filter(|d| d.1).count() as u64;
    let n = docs.len() as u64;
    if n_pos == 0 {
        return Err(Error::SingleClass("negative"));
    }
    if n_pos == n {
        return Err(Error::SingleClass("positive"));
    }
    let n_neg = n - n_pos;
    let mut present = vec![[0u64; 2]; vocab.len()];
    for (x, y) in docs {
        for &(id, _) in x.entries() {
            if let Some(cell) = present.get_mut(id as usize) {
                cell[usize::from(*y)] += 1;
            }
        }
    }
    let prior = entropy2::<T>(n_pos, n_neg);
    let total = T::from_u64(n).unwrap();
    let mut scores: Vec<TermScore<T>> = present
        .iter()
        .enumerate()
        .map(|(id, &[neg_with, pos_with])| {
            let with = pos_with + neg_with;
            let p_with = T::from_u64(with).unwrap() / total;
            let p_without = T::from_u64(n - with).unwrap() / total;
            let cond = p_with * entropy2::<T>(pos_with, neg_with)
                + p_without * entropy2::<T>(n_pos - pos_with, n_neg - neg_with);
            let gain = (prior - cond).max(T::zero()).min(prior);
            TermScore {
                term: vocab.term(id as u32).to_string(),
                gain,
            }
        })
        .collect();
    scores.sort_by(|a, b| {
        b.gain
            .partial_cmp(&a.gain)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.term.cmp(&b.term))
    });
    Ok(scores)
}

pub fn information_gain<T: Scalar>(c: &Corpus, vocab: &Vocabulary, task: Task) -> Result<Vec<TermScore<T>>> {
    let docs: Vec<(FeatureVector, bool)> = task_examples(c, task)?
        .into_iter()
        .map(|(t, y)| (vocab.vectorize(&t), y))
        .collect();
    information_gain_vectors(&docs, vocab)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermRow {
    pub gain: String,
    pub term: String,
}

/// First `k` scores as rows with the gain fixed to five decimals.
pub fn top_terms<T: Scalar>(scores: &[TermScore<T>], k: usize) -> Result<Vec<TermRow>> {
    if k == 0 {
        return Err(Error::invalid("top-k must be at least 1"));
    }
    Ok(scores
        .iter()
        .take(k)
        .map(|s| TermRow {
            gain: format!("{:.5}", s.gain.to_f64_lossless()),
            term: s.term.clone(),
        })
        .collect())
}

pub fn render_term_rows(rows: &[TermRow]) -> String {
    rows.iter().map(|r| format!("{} {}\n", r.gain, r.term)).collect()
}
