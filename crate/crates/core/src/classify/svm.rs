//! Linear SVM trained with Pegasos (stochastic subgradient on the
//! L2-regularized hinge loss, optional projection onto the 1/sqrt(lambda)
//! ball). The bias is an extra always-one feature and is regularized with
//! the weights. The step size is offset so early steps stay bounded, and
//! the returned model is the mean iterate of the final epochs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tokenize::{FeatureVector, Vocabulary};

use super::{check_training_set, Example, ModelTarget, Prediction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig<T> {
    pub lambda: T,
    pub epochs: usize,
    pub seed: u64,
    pub project: bool,
    /// Use presence (0/1) instead of raw counts.
    pub binarize: bool,
}

impl<T: Scalar> Default for SvmConfig<T> {
    fn default() -> Self {
        SvmConfig {
            lambda: T::lit(1e-4),
            epochs: 20,
            seed: 42,
            project: true,
            binarize: false,
        }
    }
}

impl<T: Scalar> SvmConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.lambda <= T::zero() || !self.lambda.is_finite() {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm<T> {
    vocab: Vocabulary,
    weights: Vec<T>,
    bias: T,
    config: SvmConfig<T>,
    pub target: Option<ModelTarget>,
}

/// Weight vector kept as `scale * raw` so the per-step shrink is O(1).
/// The last slot of `raw` is the bias. While averaging, the running sum of
/// iterates is `avg_base + avg_coef * raw`, which keeps updates sparse.
struct ScaledWeights<T> {
    raw: Vec<T>,
    scale: T,
    raw_norm_sq: T,
    avg_base: Vec<T>,
    avg_coef: T,
    averaged: usize,
}

impl<T: Scalar> ScaledWeights<T> {
    fn new(dim: usize) -> Self {
        ScaledWeights {
            raw: vec![T::zero(); dim + 1],
            scale: T::one(),
            raw_norm_sq: T::zero(),
            avg_base: vec![T::zero(); dim + 1],
            avg_coef: T::zero(),
            averaged: 0,
        }
    }

    fn bias_slot(&self) -> usize {
        self.raw.len() - 1
    }

    fn dot(&self, x: &FeatureVector, binarize: bool) -> T {
        let mut acc = self.raw[self.bias_slot()];
        for &(id, n) in x.entries() {
            let v = if binarize { T::one() } else { T::from_u32(n).unwrap() };
            acc = acc + v * self.raw[id as usize];
        }
        acc * self.scale
    }

    fn shrink(&mut self, factor: T) {
        self.scale = self.scale * factor;
        if self.scale < T::lit(1e-9) {
            self.fold_scale();
        }
    }

    fn fold_scale(&mut self) {
        let s = self.scale;
        self.raw.iter_mut().for_each(|w| *w = *w * s);
        self.avg_coef = self.avg_coef / s;
        self.scale = T::one();
        self.raw_norm_sq = self.raw.iter().map(|&w| w * w).sum();
    }

    /// w += step * x (x with its constant bias feature).
    fn add(&mut self, x: &FeatureVector, step: T, binarize: bool) {
        let delta = step / self.scale;
        let coef = self.avg_coef;
        let bias_slot = self.bias_slot();
        let mut bump = |slot: usize, v: T| {
            let old = self.raw[slot];
            let new = old + delta * v;
            self.raw_norm_sq = self.raw_norm_sq + new * new - old * old;
            self.raw[slot] = new;
            self.avg_base[slot] = self.avg_base[slot] - coef * delta * v;
        };
        for &(id, n) in x.entries() {
            let v = if binarize { T::one() } else { T::from_u32(n).unwrap() };
            bump(id as usize, v);
        }
        bump(bias_slot, T::one());
    }

    /// Adds the current iterate to the running sum.
    fn accumulate(&mut self) {
        self.avg_coef = self.avg_coef + self.scale;
        self.averaged += 1;
    }

    fn norm(&self) -> T {
        self.scale * self.raw_norm_sq.max(T::zero()).sqrt()
    }

    /// Mean of the accumulated iterates, split into (weights, bias).
    fn into_average(self) -> (Vec<T>, T) {
        let n = T::from_count(self.averaged.max(1));
        let mut w: Vec<T> = self
            .avg_base
            .iter()
            .zip(&self.raw)
            .map(|(&u, &r)| (u + self.avg_coef * r) / n)
            .collect();
        let bias = w.pop().expect("bias slot");
        (w, bias)
    }
}

/// Epochs at the end of training whose iterates are averaged.
pub fn averaging_epochs(epochs: usize) -> usize {
    (epochs / 4).max(1)
}

impl<T: Scalar> LinearSvm<T> {
    pub fn train(data: &[Example], vocab: Vocabulary, config: SvmConfig<T>) -> Result<Self> {
        config.validate()?;
        check_training_set(data, &vocab)?;
        let (weights, bias) = pegasos(data, vocab.len(), &config);
        Ok(LinearSvm {
            vocab,
            weights,
            bias,
            config,
            target: None,
        })
    }

    pub fn from_parts(vocab: Vocabulary, weights: Vec<T>, bias: T, config: SvmConfig<T>) -> Result<Self> {
        if weights.len() != vocab.len() {
            return Err(Error::Model(format!(
                "{} weights for a {}-term vocabulary",
                weights.len(),
                vocab.len()
            )));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Model("non-finite SVM parameter".into()));
        }
        Ok(LinearSvm {
            vocab,
            weights,
            bias,
            config,
            target: None,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> T {
        self.bias
    }

    pub fn config(&self) -> &SvmConfig<T> {
        &self.config
    }

    /// Euclidean norm of (weights, bias).
    pub fn norm(&self) -> T {
        self.weights
            .iter()
            .chain(std::iter::once(&self.bias))
            .map(|&w| w * w)
            .sum::<T>()
            .sqrt()
    }

    /// w . x + b over in-vocabulary ids.
    pub fn predict(&self, x: &FeatureVector) -> Prediction<T> {
        let dim = self.weights.len() as u32;
        let score = x
            .entries()
            .iter()
            .filter(|&&(id, _)| id < dim)
            .fold(self.bias, |acc, &(id, n)| {
                let v = if self.config.binarize { T::one() } else { T::from_u32(n).unwrap() };
                acc + self.weights[id as usize] * v
            });
        Prediction::from_score(score)
    }
}

/// Step size 1 / (1 + lambda t), i.e. the Pegasos rate 1 / (lambda t)
/// offset by 1 / lambda steps; the result is the mean iterate over the
/// last `averaging_epochs(epochs)` epochs.
fn pegasos<T: Scalar>(data: &[Example], dim: usize, cfg: &SvmConfig<T>) -> (Vec<T>, T) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut w = ScaledWeights::new(dim);
    let radius = T::one() / cfg.lambda.sqrt();
    let first_averaged = cfg.epochs - averaging_epochs(cfg.epochs);
    let mut t = 0usize;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let (x, positive) = &data[i];
            let y = if *positive { T::one() } else { -T::one() };
            let eta = T::one() / (T::one() + cfg.lambda * T::from_count(t));
            let margin = y * w.dot(x, cfg.binarize);
            w.shrink(T::one() - eta * cfg.lambda);
            if margin < T::one() {
                w.add(x, eta * y, cfg.binarize);
            }
            if cfg.project {
                let norm = w.norm();
                if norm > radius {
                    w.shrink(radius / norm);
                }
                debug_assert!(w.norm() <= radius * T::lit(1.0 + 1e-6), "projection bound violated");
            }
            if epoch >= first_averaged {
                w.accumulate();
            }
        }
    }
    w.into_average()
}
