use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "stresslens", version, about = "Stress and relaxation tweet analysis")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Run seed; the STRESSLENS_SEED environment variable takes precedence.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = TrackArg::Stress)]
    pub track: TrackArg,

    /// Directory for report files (text and JSON) and the run configuration.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Print JSON instead of aligned text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrackArg {
    Stress,
    #[value(alias = "relaxation")]
    Relax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Nb,
    Svm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Relevance,
    #[value(alias = "first-hand", alias = "first_hand")]
    Firsthand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregationArg {
    Pooled,
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ContingencyArg {
    FirstHandVsTotal,
    FirstHandVsKeyword,
    RelevantVsTotal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct TrainOpts {
    #[arg(long, value_enum, default_value_t = ModelArg::Svm)]
    pub model: ModelArg,

    #[arg(long, value_enum, default_value_t = TaskArg::Relevance)]
    pub task: TaskArg,

    /// Laplace smoothing constant for naive Bayes.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// SVM regularization strength.
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,

    #[arg(long, default_value_t = 20)]
    pub epochs: usize,

    /// Disable the SVM norm-ball projection.
    #[arg(long)]
    pub no_project: bool,

    /// SVM on term presence instead of counts.
    #[arg(long)]
    pub binarize: bool,

    /// Drop terms seen in fewer training documents.
    #[arg(long, default_value_t = 1)]
    pub min_df: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a JSON-lines corpus and summarize it.
    Ingest {
        file: PathBuf,
        /// Write the validated corpus here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Keep records containing a keyword or one of a set of hashtags.
    Filter {
        corpus: PathBuf,
        #[arg(long, conflicts_with = "hashtags", required_unless_present = "hashtags")]
        keyword: Option<String>,
        /// `builtin` for the track's hashtag set, or a comma-separated list.
        #[arg(long)]
        hashtags: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train a classifier and save it as JSON.
    Train {
        corpus: PathBuf,
        #[command(flatten)]
        opts: TrainOpts,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Stratified k-fold cross-validation report.
    Cv {
        corpus: PathBuf,
        #[command(flatten)]
        opts: TrainOpts,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value_t = AggregationArg::Pooled)]
        aggregation: AggregationArg,
    },
    /// Label records through the keyword, relevance and first-hand steps.
    Classify {
        corpus: PathBuf,
        #[arg(long)]
        relevance: PathBuf,
        #[arg(long)]
        firsthand: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Assign lexicon themes and print the theme distribution.
    Themes {
        corpus: PathBuf,
        /// Lexicon JSON; the built-in starter lexicon when omitted.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Write per-record assignments as JSON lines.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rank terms by information gain.
    RankTerms {
        corpus: PathBuf,
        #[arg(long, default_value_t = 30)]
        top: usize,
        #[arg(long, value_enum, default_value_t = TaskArg::Relevance)]
        task: TaskArg,
        #[arg(long, default_value_t = 1)]
        min_df: u32,
    },
    /// City proportions and pairwise chi-squared tests from city manifests.
    Compare {
        #[arg(required = true, num_args = 2..)]
        manifests: Vec<PathBuf>,
        /// Yates continuity correction.
        #[arg(long, value_enum, num_args = 0..=1, default_value_t = Switch::Off, default_missing_value = "on")]
        yates: Switch,
        #[arg(long, value_enum, default_value_t = ContingencyArg::FirstHandVsTotal)]
        contingency: ContingencyArg,
        /// Relevance model, required for manifests that point at a corpus.
        #[arg(long)]
        relevance: Option<PathBuf>,
        #[arg(long)]
        firsthand: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Rows in each city's keyword table.
        #[arg(long, default_value_t = 30)]
        top: usize,
    },
    /// Keyword tables and tag-cloud weights for first-hand corpora.
    Report {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
        #[arg(long, default_value_t = 30)]
        top: usize,
        /// Also write `<name>.tagcloud.tsv` files (into --out-dir, else beside the input).
        #[arg(long)]
        tagcloud: bool,
        /// Leave the track keyword out of tag clouds.
        #[arg(long)]
        drop_track_term: bool,
    },
}
