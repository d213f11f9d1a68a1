//! Stress and relaxation tweet analysis.
//!
//! The crate covers the whole batch pipeline: corpus ingestion and keyword or
//! hashtag filtering ([`corpus`]), tokenization and bag-of-words vectors
//! ([`tokenize`]), naive Bayes and Pegasos linear SVM classifiers
//! ([`classify`]), cross-validated evaluation and information-gain ranking
//! ([`evaluate`]), lexicon-based theme tagging ([`themes`]) and city-level
//! proportions with chi-squared comparisons ([`geo`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod geo;
pub mod scalar;
pub mod special;
pub mod themes;
pub mod tokenize;

pub use classify::{Learner, Model, ModelKind, ModelTarget, Prediction, RecordClassifier, SvmConfig, Task};
pub use corpus::{Corpus, LabelSet, Track, TweetRecord};
pub use error::{Error, Result};
pub use evaluate::{ConfusionMatrix, CvConfig};
pub use scalar::Scalar;
pub use themes::{ThemeAssignment, ThemeId, ThemeLexicon};
pub use tokenize::{FeatureVector, TokenSeq, Vocabulary};

pub type NaiveBayes = classify::NaiveBayes<f64>;
pub type NaiveBayesF32 = classify::NaiveBayes<f32>;
pub type LinearSvm = classify::LinearSvm<f64>;
pub type LinearSvmF32 = classify::LinearSvm<f32>;
pub type AnyModel = classify::Model<f64>;
pub type AnyModelF32 = classify::Model<f32>;
pub type MetricsReport = evaluate::MetricsReport<f64>;
pub type CvReport = evaluate::CvReport<f64>;
pub type TermScore = evaluate::TermScore<f64>;
pub type CityReport = geo::CityReport<f64>;
pub type TestResult = geo::TestResult<f64>;
pub type PValueMatrix = geo::PValueMatrix<f64>;
