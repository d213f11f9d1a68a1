//! Multinomial naive Bayes with additive (Laplace) smoothing.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tokenize::{FeatureVector, Vocabulary};

use super::{check_training_set, Example, ModelTarget, Prediction};

const NEG: usize = 0;
const POS: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes<T> {
    vocab: Vocabulary,
    alpha: T,
    /// ln P(class), indexed `[negative, positive]`.
    log_prior: [T; 2],
    /// ln P(term | class), one row per class.
    log_likelihood: [Vec<T>; 2],
    pub target: Option<ModelTarget>,
}

impl<T: Scalar> NaiveBayes<T> {
    /// P(t|c) = (count(t, c) + alpha) / (tokens(c) + alpha * |V|).
    pub fn train(data: &[Example], vocab: Vocabulary, alpha: T) -> Result<Self> {
        if alpha <= T::zero() || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        check_training_set(data, &vocab)?;
        let dim = vocab.len();
        let mut counts = [vec![0u64; dim], vec![0u64; dim]];
        let mut docs = [0usize; 2];
        let mut tokens = [0u64; 2];
        for (x, y) in data {
            let c = usize::from(*y);
            docs[c] += 1;
            for &(id, n) in x.entries() {
                counts[c][id as usize] += n as u64;
                tokens[c] += n as u64;
            }
        }
        let total = T::from_count(data.len());
        let log_prior = [0, 1].map(|c| (T::from_count(docs[c]) / total).ln());
        let vsize = T::from_count(dim);
        let log_likelihood = [0, 1].map(|c| {
            let denom = T::from_u64(tokens[c]).expect("token count fits") + alpha * vsize;
            counts[c]
                .iter()
                .map(|&n| ((T::from_u64(n).expect("count fits") + alpha) / denom).ln())
                .collect()
        });
        Ok(NaiveBayes {
            vocab,
            alpha,
            log_prior,
            log_likelihood,
            target: None,
        })
    }

    /// Assembles a model from raw parameters (used by the file loader).
    pub fn from_parts(
        vocab: Vocabulary,
        alpha: T,
        log_prior: [T; 2],
        log_likelihood: [Vec<T>; 2],
    ) -> Result<Self> {
        if log_likelihood.iter().any(|row| row.len() != vocab.len()) {
            return Err(Error::Model(format!(
                "likelihood rows must have {} entries",
                vocab.len()
            )));
        }
        let finite = log_prior.iter().chain(log_likelihood.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Model("non-finite naive Bayes parameter".into()));
        }
        Ok(NaiveBayes {
            vocab,
            alpha,
            log_prior,
            log_likelihood,
            target: None,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `(negative, positive)`.
    pub fn log_prior(&self) -> (T, T) {
        (self.log_prior[NEG], self.log_prior[POS])
    }

    /// `positive == true` selects the positive-class row.
    pub fn log_likelihood(&self, positive: bool) -> &[T] {
        &self.log_likelihood[usize::from(positive)]
    }

    /// Unnormalized log joint per class, `[negative, positive]`.
    pub fn class_scores(&self, x: &FeatureVector) -> [T; 2] {
        let dim = self.vocab.len() as u32;
        [NEG, POS].map(|c| {
            let row = &self.log_likelihood[c];
            x.entries()
                .iter()
                .filter(|&&(id, _)| id < dim)
                .fold(self.log_prior[c], |acc, &(id, n)| acc + T::from_u32(n).unwrap() * row[id as usize])
        })
    }

    /// Posterior `[P(neg|x), P(pos|x)]` via a stable softmax.
    pub fn posterior(&self, x: &FeatureVector) -> [T; 2] {
        let s = self.class_scores(x);
        let m = s[0].max(s[1]);
        let e = s.map(|v| (v - m).exp());
        let z = e[0] + e[1];
        e.map(|v| v / z)
    }

    /// Score is the positive-minus-negative log joint. Differences within the
    /// accumulated rounding bound count as exact ties.
    pub fn predict(&self, x: &FeatureVector) -> Prediction<T> {
        let dim = self.vocab.len() as u32;
        let mut score = self.log_prior[POS] - self.log_prior[NEG];
        let mut magnitude = self.log_prior[POS].abs() + self.log_prior[NEG].abs();
        let mut ops = 2usize;
        for &(id, n) in x.entries().iter().filter(|&&(id, _)| id < dim) {
            let n = T::from_u32(n).unwrap();
            let (p, q) = (self.log_likelihood[POS][id as usize], self.log_likelihood[NEG][id as usize]);
            score = score + n * (p - q);
            magnitude = magnitude + n * (p.abs() + q.abs());
            ops += 2;
        }
        let slack = magnitude * T::epsilon() * T::from_count(4 * ops);
        if score.abs() <= slack {
            score = T::zero();
        }
        Prediction::from_score(score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::TokenSeq;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vocab(terms: &[&str]) -> Vocabulary {
        Vocabulary::build(&[terms.iter().copied().collect::<TokenSeq>()], 1).unwrap()
    }

    fn fv(pairs: &[(u32, u32)]) -> FeatureVector {
        FeatureVector::from_counts(pairs.iter().copied())
    }

    #[test]
    fn balanced_priors() {
        let v = vocab(&["a", "b"]);
        let data = vec![(fv(&[(0, 1)]), true), (fv(&[(0, 2)]), true), (fv(&[(1, 1)]), false), (fv(&[(1, 1)]), false)];
        let m = NaiveBayes::<f64>::train(&data, v, 1.0).unwrap();
        assert_relative_eq!(m.log_prior().0, 0.5f64.ln());
        assert_relative_eq!(m.log_prior().1, 0.5f64.ln());
    }

    #[test]
    fn laplace_estimate_and_prediction() {
        // {("stress stress", +), ("relax", -)}
        let v = vocab(&["stress", "relax"]);
        let data = vec![(fv(&[(0, 2)]), true), (fv(&[(1, 1)]), false)];
        let m = NaiveBayes::<f64>::train(&data, v, 1.0).unwrap();
        assert_relative_eq!(m.log_likelihood(true)[0].exp(), 0.75, epsilon = 1e-15);
        assert_relative_eq!(m.log_likelihood(true)[1].exp(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(m.log_likelihood(false)[0].exp(), 1.0 / 3.0, epsilon = 1e-15);
        let p = m.predict(&fv(&[(0, 1)]));
        assert!(p.label);
        // ln(0.75) - ln(1/3)
        assert_relative_eq!(p.score, (0.75f64 * 3.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn large_alpha_flattens_likelihoods() {
        let v = vocab(&["a", "b", "c", "d"]);
        let data = vec![(fv(&[(0, 9), (1, 1)]), true), (fv(&[(2, 5)]), false)];
        let m = NaiveBayes::<f64>::train(&data, v, 1e9).unwrap();
        for c in [false, true] {
            for &ll in m.log_likelihood(c) {
                assert_relative_eq!(ll.exp(), 0.25, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn empty_vector_with_balanced_priors_is_negative() {
        let v = vocab(&["a", "b"]);
        let data = vec![(fv(&[(0, 1)]), true), (fv(&[(1, 1)]), false)];
        let m = NaiveBayes::<f64>::train(&data, v, 1.0).unwrap();
        let p = m.predict(&FeatureVector::default());
        assert_eq!(p.score, 0.0);
        assert!(!p.label);
    }

    #[test]
    fn oov_ids_are_ignored() {
        let v = vocab(&["a", "b"]);
        let data = vec![(fv(&[(0, 1)]), true), (fv(&[(1, 1)]), false)];
        let m = NaiveBayes::<f64>::train(&data, v, 1.0).unwrap();
        assert_eq!(m.predict(&fv(&[(0, 1), (7, 3)])), m.predict(&fv(&[(0, 1)])));
    }

    #[test]
    fn training_errors() {
        let v = vocab(&["a"]);
        let one_class = vec![(fv(&[(0, 1)]), true), (fv(&[(0, 2)]), true)];
        assert!(matches!(NaiveBayes::<f64>::train(&one_class, v.clone(), 1.0), Err(Error::SingleClass(_))));
        let ok = vec![(fv(&[(0, 1)]), true), (fv(&[(0, 2)]), false)];
        assert!(NaiveBayes::<f64>::train(&ok, v.clone(), 0.0).is_err());
        assert!(NaiveBayes::<f64>::train(&[], v.clone(), 1.0).is_err());
        let out_of_range = vec![(fv(&[(3, 1)]), true), (fv(&[(0, 2)]), false)];
        assert!(NaiveBayes::<f64>::train(&out_of_range, v, 1.0).is_err());
    }

    #[test]
    fn f32_model_agrees_with_f64() {
        let v = vocab(&["a", "b", "c"]);
        let data = vec![(fv(&[(0, 3), (1, 1)]), true), (fv(&[(2, 2), (1, 1)]), false), (fv(&[(2, 1)]), false)];
        let m64 = NaiveBayes::<f64>::train(&data, v.clone(), 1.0).unwrap();
        let m32 = NaiveBayes::<f32>::train(&data, v, 1.0).unwrap();
        for x in [fv(&[(0, 1)]), fv(&[(2, 1)]), fv(&[(1, 4), (0, 1)])] {
            assert_eq!(m64.predict(&x).label, m32.predict(&x).label);
            assert_relative_eq!(m64.predict(&x).score, m32.predict(&x).score as f64, epsilon = 1e-5);
        }
    }

    fn random_model() -> impl Strategy<Value = (Vec<Example>, usize)> {
        (1usize..=4).prop_flat_map(|dim| {
            let doc = (prop::collection::vec((0..dim as u32, 1u32..4), 0..4), any::<bool>())
                .prop_map(|(pairs, y)| (FeatureVector::from_counts(pairs), y));
            (prop::collection::vec(doc, 2..=6), Just(dim))
        })
    }

    fn vocab_of(dim: usize) -> Vocabulary {
        let terms: Vec<String> = (0..dim).map(|i| format!("t{i}")).collect();
        Vocabulary::from_parts(terms, vec![1; dim]).unwrap()
    }

    proptest! {
        #[test]
        fn normalized_parameters((data, dim) in random_model()) {
            prop_assume!(data.iter().any(|d| d.1) && data.iter().any(|d| !d.1));
            let m = NaiveBayes::<f64>::train(&data, vocab_of(dim), 1.0).unwrap();
            let (n, p) = m.log_prior();
            prop_assert!((n.exp() + p.exp() - 1.0).abs() < 1e-9);
            for c in [false, true] {
                let s: f64 = m.log_likelihood(c).iter().map(|l| l.exp()).sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn posterior_sums_to_one((data, dim) in random_model(), x in prop::collection::vec((0u32..4, 1u32..20), 0..6)) {
            prop_assume!(data.iter().any(|d| d.1) && data.iter().any(|d| !d.1));
            let m = NaiveBayes::<f64>::train(&data, vocab_of(dim), 1.0).unwrap();
            let post = m.posterior(&FeatureVector::from_counts(x));
            prop_assert!((post[0] + post[1] - 1.0).abs() < 1e-9);
        }

        #[test]
        fn doubling_counts_doubles_likelihood_term((data, dim) in random_model(), x in prop::collection::vec((0u32..4, 1u32..5), 1..4)) {
            prop_assume!(data.iter().any(|d| d.1) && data.iter().any(|d| !d.1));
            let m = NaiveBayes::<f64>::train(&data, vocab_of(dim), 1.0).unwrap();
            let (ln, lp) = m.log_prior();
            let prior = lp - ln;
            let single = FeatureVector::from_counts(x.clone());
            let double = FeatureVector::from_counts(x.iter().map(|&(i, c)| (i, 2 * c)));
            // Raw class scores: predict() snaps near-ties to zero.
            let raw = |x: &FeatureVector| { let s = m.class_scores(x); s[1] - s[0] - prior };
            prop_assert!((raw(&double) - 2.0 * raw(&single)).abs() < 1e-9);
        }

        #[test]
        fn shared_per_term_factor_keeps_labels((data, dim) in random_model(),
                                               shifts in prop::collection::vec(-3.0f64..3.0, 4),
                                               x in prop::collection::vec((0u32..4, 1u32..5), 0..5)) {
            prop_assume!(data.iter().any(|d| d.1) && data.iter().any(|d| !d.1));
            let m = NaiveBayes::<f64>::train(&data, vocab_of(dim), 1.0).unwrap();
            let (ln, lp) = m.log_prior();
            let shifted = [false, true].map(|c| {
                m.log_likelihood(c).iter().zip(&shifts).map(|(l, s)| l + s).collect::<Vec<_>>()
            });
            let m2 = NaiveBayes::from_parts(m.vocabulary().clone(), 1.0, [ln, lp], shifted).unwrap();
            let x = FeatureVector::from_counts(x);
            prop_assert_eq!(m.predict(&x).label, m2.predict(&x).label);
        }
    }
}
