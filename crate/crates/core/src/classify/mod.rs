//! Binary bag-of-words classifiers and their on-disk container.

mod nb;
mod persist;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use nb::NaiveBayes;
pub use persist::FORMAT_VERSION;
pub use svm::{LinearSvm, SvmConfig};

use crate::corpus::{Track, TweetRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tokenize::{FeatureVector, Vocabulary};

/// A labelled training or test example; `true` is the positive class.
pub type Example = (FeatureVector, bool);

/// Decision output. `label` is `score > 0`, so an exact tie is negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub label: bool,
    pub score: T,
}

impl<T: Scalar> Prediction<T> {
    pub fn from_score(score: T) -> Self {
        Prediction {
            label: score > T::zero(),
            score,
        }
    }
}

/// Which gold label a model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Relevance,
    #[serde(alias = "firsthand")]
    FirstHand,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Relevance => "relevance",
            Task::FirstHand => "first_hand",
        }
    }

    /// Gold label of `rec` for this task. First-hand examples are drawn only
    /// from relevant records, so other records yield `None`.
    pub fn gold(self, rec: &TweetRecord) -> Option<bool> {
        match self {
            Task::Relevance => rec.relevant(),
            Task::FirstHand => match rec.relevant() {
                Some(true) => rec.first_hand(),
                _ => None,
            },
        }
    }

    /// True if `rec` belongs to this task's example population.
    pub fn applies_to(self, rec: &TweetRecord) -> bool {
        match self {
            Task::Relevance => true,
            Task::FirstHand => rec.relevant() == Some(true),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relevance" => Ok(Task::Relevance),
            "firsthand" | "first_hand" | "first-hand" => Ok(Task::FirstHand),
            other => Err(Error::invalid(format!("unknown task {other:?}"))),
        }
    }
}

/// Track and task a model was trained for, if recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelTarget {
    pub track: Track,
    pub task: Task,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Nb,
    Svm,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Nb => "nb",
            ModelKind::Svm => "svm",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nb" => Ok(ModelKind::Nb),
            "svm" => Ok(ModelKind::Svm),
            other => Err(Error::invalid(format!("unknown model kind {other:?}"))),
        }
    }
}

/// Training recipe for either classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Learner<T> {
    Nb { alpha: T },
    Svm(SvmConfig<T>),
}

impl<T: Scalar> Learner<T> {
    pub fn nb() -> Self {
        Learner::Nb { alpha: T::one() }
    }

    pub fn svm() -> Self {
        Learner::Svm(SvmConfig::default())
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Learner::Nb { .. } => ModelKind::Nb,
            Learner::Svm(_) => ModelKind::Svm,
        }
    }

    /// Same recipe with the SVM shuffle seed replaced; NB is seedless.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Learner::Svm(cfg) => Learner::Svm(SvmConfig { seed, ..cfg }),
            nb => nb,
        }
    }

    pub fn train(&self, data: &[Example], vocab: &Vocabulary) -> Result<Model<T>> {
        match *self {
            Learner::Nb { alpha } => NaiveBayes::train(data, vocab.clone(), alpha).map(Model::Nb),
            Learner::Svm(cfg) => LinearSvm::train(data, vocab.clone(), cfg).map(Model::Svm),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model<T> {
    Nb(NaiveBayes<T>),
    Svm(LinearSvm<T>),
}

impl<T: Scalar> Model<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Nb(_) => ModelKind::Nb,
            Model::Svm(_) => ModelKind::Svm,
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        match self {
            Model::Nb(m) => m.vocabulary(),
            Model::Svm(m) => m.vocabulary(),
        }
    }

    pub fn target(&self) -> Option<ModelTarget> {
        match self {
            Model::Nb(m) => m.target,
            Model::Svm(m) => m.target,
        }
    }

    pub fn with_target(mut self, target: ModelTarget) -> Self {
        match &mut self {
            Model::Nb(m) => m.target = Some(target),
            Model::Svm(m) => m.target = Some(target),
        }
        self
    }

    pub fn predict(&self, x: &FeatureVector) -> Prediction<T> {
        match self {
            Model::Nb(m) => m.predict(x),
            Model::Svm(m) => m.predict(x),
        }
    }

    pub fn predict_text(&self, text: &str) -> Prediction<T> {
        self.predict(&self.vocabulary().vectorize_text(text))
    }
}

/// Anything that can say yes/no to a record: trained models, or lookup
/// oracles standing in for them.
pub trait RecordClassifier: Sync {
    fn classify(&self, rec: &TweetRecord) -> bool;

    fn target(&self) -> Option<ModelTarget> {
        None
    }
}

impl<T: Scalar> RecordClassifier for Model<T> {
    fn classify(&self, rec: &TweetRecord) -> bool {
        self.predict_text(&rec.text).label
    }

    fn target(&self) -> Option<ModelTarget> {
        Model::target(self)
    }
}

pub(crate) fn check_training_set(data: &[Example], vocab: &Vocabulary) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Empty("training set has no examples".into()));
    }
    if vocab.is_empty() {
        return Err(Error::Empty("vocabulary has no terms".into()));
    }
    let pos = data.iter().filter(|(_, y)| *y).count();
    if pos == 0 {
        return Err(Error::SingleClass("negative"));
    }
    if pos == data.len() {
        return Err(Error::SingleClass("positive"));
    }
    let dim = vocab.len() as u32;
    if let Some((x, _)) = data.iter().find(|(x, _)| x.entries().iter().any(|&(id, _)| id >= dim)) {
        return Err(Error::invalid(format!(
            "feature vector {:?} has ids outside the {dim}-term vocabulary",
            x.entries()
        )));
    }
    Ok(())
}
