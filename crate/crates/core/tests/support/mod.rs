//! Oracles and data generators shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stresslens::classify::Example;
use stresslens::corpus::{LabelSet, Track, TweetRecord};
use stresslens::tokenize::FeatureVector;
use stresslens::Corpus;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- NB oracle

fn big(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact multinomial Bayes with Laplace smoothing (alpha = 1):
/// P(c) * prod_t ((count(t, c) + 1) / (tokens(c) + |V|))^x_t.
/// Returns true when the positive joint is strictly larger.
pub fn exact_nb_decision(train: &[Example], vocab_size: usize, x: &FeatureVector) -> bool {
    let mut docs = [0u64; 2];
    let mut counts = [vec![0u64; vocab_size], vec![0u64; vocab_size]];
    for (v, y) in train {
        let c = usize::from(*y);
        docs[c] += 1;
        for &(id, n) in v.entries() {
            counts[c][id as usize] += u64::from(n);
        }
    }
    let joint = |c: usize| {
        let tokens: u64 = counts[c].iter().sum();
        let mut p = big(docs[c]) / big(docs[0] + docs[1]);
        for &(id, n) in x.entries() {
            let lik = big(counts[c][id as usize] + 1) / big(tokens + vocab_size as u64);
            for _ in 0..n {
                p *= lik.clone();
            }
        }
        p
    };
    joint(1) > joint(0)
}

/// Random feature vector over `dim` terms with counts in 0..=max.
pub fn random_vector(r: &mut impl Rng, dim: usize, max: u32) -> FeatureVector {
    FeatureVector::from_counts((0..dim as u32).map(|id| (id, r.gen_range(0..=max))).filter(|&(_, n)| n > 0))
}

// ---------------------------------------------------------------- IG oracle

fn h(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Mutual information between term presence and class, written as
/// sum over the four cells of p(t, c) log2(p(t, c) / (p(t) p(c))).
pub fn mutual_information(present: &[bool], labels: &[bool]) -> f64 {
    let n = present.len() as f64;
    let mut mi = 0.0;
    for t in [false, true] {
        for c in [false, true] {
            let joint = present.iter().zip(labels).filter(|&(&p, &l)| p == t && l == c).count() as f64 / n;
            if joint == 0.0 {
                continue;
            }
            let pt = present.iter().filter(|&&p| p == t).count() as f64 / n;
            let pc = labels.iter().filter(|&&l| l == c).count() as f64 / n;
            mi += joint * (joint / (pt * pc)).log2();
        }
    }
    mi
}

pub fn binary_entropy(p: f64) -> f64 {
    h(p) + h(1.0 - p)
}

// ------------------------------------------------------- chi-squared oracle

/// Upper tail of the df = 1 chi-squared distribution by quadrature:
/// with x = u^2 the density integral becomes sqrt(2/pi) * int_{sqrt(s)}^inf exp(-u^2/2) du.
pub fn chi2_df1_tail_by_quadrature(s: f64) -> f64 {
    let f = |u: f64| (-0.5 * u * u).exp();
    let a = s.sqrt();
    // exp(-u^2/2) < 1e-40 beyond u = 14, far below the tolerance.
    let b = a + 14.0;
    let whole = simpson(&f, a, b);
    std::f64::consts::FRAC_2_PI.sqrt() * adaptive_simpson(&f, a, b, 1e-15, whole, 60)
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, whole: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, tol / 2.0, left, depth - 1) + adaptive_simpson(f, m, b, tol / 2.0, right, depth - 1)
    }
}

// --------------------------------------------------------- separable sets

/// Random count vectors labelled by a planted hyperplane (w*, b*), keeping
/// only points at distance >= `margin` from it, measured with the bias as
/// a coordinate (the SVM regularizes the bias as an always-one feature).
pub fn separable_set(r: &mut impl Rng, margin: f64) -> (usize, Vec<Example>) {
    loop {
        let dim = r.gen_range(2..=10usize);
        let w: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
        let b: f64 = r.gen_range(-3.0..3.0);
        let norm = (w.iter().map(|v| v * v).sum::<f64>() + b * b).sqrt();
        let n = r.gen_range(4..=50usize);
        let mut set = Vec::with_capacity(n);
        let mut tries = 0;
        while set.len() < n && tries < 10_000 {
            tries += 1;
            let x: Vec<u32> = (0..dim).map(|_| r.gen_range(0..=5)).collect();
            let s = (w.iter().zip(&x).map(|(w, &x)| w * f64::from(x)).sum::<f64>() + b) / norm;
            if s.abs() >= margin {
                let fv = FeatureVector::from_counts(x.iter().enumerate().map(|(i, &c)| (i as u32, c)).filter(|p| p.1 > 0));
                set.push((fv, s > 0.0));
            }
        }
        let pos = set.iter().filter(|e| e.1).count();
        if set.len() >= 4 && pos > 0 && pos < set.len() {
            return (dim, set);
        }
    }
}

// ------------------------------------------------------ synthetic tweets

const FIRST_PERSON: &[&str] = &["i", "i'm", "my", "me", "so", "ugh", "feel", "today", "really", "can't", "need", "tired"];
const TOPICS: &[&str] = &["work", "exam", "boss", "bills", "traffic", "deadline", "class", "rent", "family", "job"];
const NEWS: &[&str] = &["study", "report", "tips", "experts", "research", "article", "health", "new", "reduce", "via", "how", "ways"];
const OFF_TOPIC: &[&str] = &["mistress", "distress", "bank", "test", "signal", "results", "ceremonies", "vessel", "movie", "sale"];
const FILLER: &[&str] = &["the", "a", "and", "to", "of", "at", "in", "this", "that", "with", "is", "on", "for", "it"];
const BACKGROUND: &[&str] = &["coffee", "game", "music", "lunch", "beach", "weekend", "love", "photo", "happy", "great", "night", "city"];
const STRESS_FORMS: &[&str] = &["stress", "stressed", "stressing", "stressful"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    FirstHand,
    News,
    OffTopic,
    Background,
}

fn pick<'a>(r: &mut impl Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(r).unwrap()
}

/// One synthetic tweet. Each content slot has a 10% chance of drawing from
/// a neighbouring class's pool, so the classes overlap a little.
pub fn synthetic_text(r: &mut impl Rng, kind: Kind) -> String {
    let (own, other): (&[&str], &[&str]) = match kind {
        Kind::FirstHand => (FIRST_PERSON, NEWS),
        Kind::News => (NEWS, FIRST_PERSON),
        Kind::OffTopic => (OFF_TOPIC, NEWS),
        Kind::Background => (BACKGROUND, TOPICS),
    };
    let mut words: Vec<String> = Vec::new();
    let slots = r.gen_range(4..=7);
    for _ in 0..slots {
        let pool = if r.gen_bool(0.1) { other } else { own };
        words.push(pick(r, pool).to_string());
        if r.gen_bool(0.5) {
            words.push(pick(r, FILLER).to_string());
        }
    }
    match kind {
        Kind::FirstHand | Kind::News => {
            words.push(pick(r, TOPICS).to_string());
            let at = r.gen_range(0..=words.len());
            words.insert(at, pick(r, STRESS_FORMS).to_string());
        }
        Kind::OffTopic => {
            let hook = *[("mistress", ""), ("distress", ""), ("stress", "test")].choose(r).unwrap();
            let at = r.gen_range(0..=words.len());
            words.insert(at, format!("{} {}", hook.0, hook.1).trim().to_string());
        }
        Kind::Background => {}
    }
    words.join(" ")
}

pub fn labelled_record(r: &mut impl Rng, id: String, kind: Kind) -> TweetRecord {
    let text = synthetic_text(r, kind);
    let relevant = matches!(kind, Kind::FirstHand | Kind::News);
    let labels = LabelSet {
        relevant: Some(relevant),
        first_hand: relevant.then_some(kind == Kind::FirstHand),
        ..LabelSet::default()
    };
    TweetRecord::new(id, text).with_labels(labels)
}

#[derive(Debug, Clone, Copy)]
pub struct CityPlan {
    pub total: usize,
    pub first_hand: usize,
    pub news: usize,
    pub off_topic: usize,
}

/// A shuffled city corpus with exactly the planted class counts; the
/// remainder is background chatter without the keyword.
pub fn synthetic_city(name: &str, plan: CityPlan, seed: u64) -> Corpus {
    let mut r = rng(seed);
    let background = plan.total - plan.first_hand - plan.news - plan.off_topic;
    let mut kinds: Vec<Kind> = [
        (Kind::FirstHand, plan.first_hand),
        (Kind::News, plan.news),
        (Kind::OffTopic, plan.off_topic),
        (Kind::Background, background),
    ]
    .iter()
    .flat_map(|&(k, n)| std::iter::repeat_n(k, n))
    .collect();
    kinds.shuffle(&mut r);
    let records = kinds
        .into_iter()
        .enumerate()
        .map(|(i, k)| {
            let mut rec = labelled_record(&mut r, format!("{name}-{i}"), k);
            rec.city = Some(name.to_string());
            rec
        })
        .collect();
    Corpus::new(records, Track::Stress).unwrap()
}

/// Labelled keyword-matched sample for training the two classifiers.
pub fn training_sample(n: usize, seed: u64) -> Corpus {
    let mut r = rng(seed);
    let records = (0..n)
        .map(|i| {
            let u: f64 = r.gen();
            let kind = if u < 0.45 {
                Kind::FirstHand
            } else if u < 0.7 {
                Kind::News
            } else {
                Kind::OffTopic
            };
            labelled_record(&mut r, format!("train-{i}"), kind)
        })
        .collect();
    Corpus::new(records, Track::Stress).unwrap()
}

/// Labelled corpus of `n` records with roughly 40% relevant.
pub fn relevance_corpus(n: usize, seed: u64) -> Corpus {
    let mut r = rng(seed);
    let records = (0..n)
        .map(|i| {
            let kind = if r.gen_bool(0.4) { Kind::FirstHand } else { Kind::OffTopic };
            labelled_record(&mut r, format!("r{i}"), kind)
        })
        .collect();
    Corpus::new(records, Track::Stress).unwrap()
}
