use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use stresslens::classify::{Learner, Model, ModelTarget, RecordClassifier, SvmConfig, Task};
use stresslens::corpus::Track;
use stresslens::evaluate::{self, Aggregation, CvConfig};
use stresslens::geo::{self, CityManifest, CityReport, Contingency, PValueMatrix};
use stresslens::themes::{classify_themes, theme_distribution, ThemeAssignment, ThemeId, ThemeLexicon};
use stresslens::tokenize::Vocabulary;
use stresslens::Corpus;

use crate::args::{AggregationArg, Cli, Command, ContingencyArg, ModelArg, Switch, TaskArg, TrackArg, TrainOpts};
use crate::output::{to_json, write_file, write_or_stdout, Output};
use crate::usage;

pub const SEED_ENV: &str = "STRESSLENS_SEED";

/// Everything a run depends on besides its input files.
#[derive(Debug, Serialize)]
struct RunConfig {
    command: &'static str,
    seed: u64,
    track: Track,
    k_folds: usize,
    svm: SvmSection,
    nb: NbSection,
    min_df: u32,
    yates: bool,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SvmSection {
    lambda: f64,
    epochs: usize,
    project: bool,
    binarize: bool,
}

#[derive(Debug, Serialize)]
struct NbSection {
    alpha: f64,
}

impl RunConfig {
    fn new(command: &'static str, seed: u64, track: Track, output_dir: Option<PathBuf>) -> Self {
        let svm = SvmConfig::<f64>::default();
        RunConfig {
            command,
            seed,
            track,
            k_folds: CvConfig::default().k,
            svm: SvmSection {
                lambda: svm.lambda,
                epochs: svm.epochs,
                project: svm.project,
                binarize: svm.binarize,
            },
            nb: NbSection { alpha: 1.0 },
            min_df: 1,
            yates: false,
            output_dir,
        }
    }

    fn with_train(mut self, o: &TrainOpts) -> Self {
        self.svm = SvmSection {
            lambda: o.lambda,
            epochs: o.epochs,
            project: !o.no_project,
            binarize: o.binarize,
        };
        self.nb = NbSection { alpha: o.alpha };
        self.min_df = o.min_df;
        self
    }
}

fn resolve_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}={v:?} is not an unsigned 64-bit integer"))),
        Err(_) => Ok(flag),
    }
}

fn track(t: TrackArg) -> Track {
    match t {
        TrackArg::Stress => Track::Stress,
        TrackArg::Relax => Track::Relaxation,
    }
}

fn task(t: TaskArg) -> Task {
    match t {
        TaskArg::Relevance => Task::Relevance,
        TaskArg::Firsthand => Task::FirstHand,
    }
}

fn learner(o: &TrainOpts, seed: u64) -> Learner<f64> {
    match o.model {
        ModelArg::Nb => Learner::Nb { alpha: o.alpha },
        ModelArg::Svm => Learner::Svm(SvmConfig {
            lambda: o.lambda,
            epochs: o.epochs,
            seed,
            project: !o.no_project,
            binarize: o.binarize,
        }),
    }
}

fn load_corpus(path: &Path, track: Track) -> Result<Corpus> {
    Ok(Corpus::load(path, track)?)
}

fn load_lexicon(path: Option<&Path>) -> Result<ThemeLexicon> {
    Ok(match path {
        Some(p) => ThemeLexicon::load(p)?,
        None => ThemeLexicon::builtin(),
    })
}

/// Loads a model and checks it was trained for `track` and `task`.
fn load_model(path: &Path, track: Track, task: Task) -> Result<Model<f64>> {
    let m = Model::<f64>::load(path)?;
    if let Some(t) = m.target() {
        if t.track != track || t.task != task {
            return Err(stresslens::Error::invalid(format!(
                "{}: model was trained for {} {}, expected {track} {task}",
                path.display(),
                t.track,
                t.task
            ))
            .into());
        }
    }
    Ok(m)
}

pub fn run(cli: Cli) -> Result<()> {
    let seed = resolve_seed(cli.global.seed)?;
    let track = track(cli.global.track);
    let out = Output::new(cli.global.out_dir.clone(), cli.global.json)?;
    let base = |name| RunConfig::new(name, seed, track, cli.global.out_dir.clone());
    let config = match &cli.command {
        Command::Ingest { file, output } => {
            ingest(file, output.as_deref(), track, &out)?;
            base("ingest")
        }
        Command::Filter { corpus, keyword, hashtags, output } => {
            filter(corpus, keyword.as_deref(), hashtags.as_deref(), output.as_deref(), track)?;
            base("filter")
        }
        Command::Train { corpus, opts, output } => {
            train(corpus, opts, output, track, seed)?;
            base("train").with_train(opts)
        }
        Command::Cv { corpus, opts, k, aggregation } => {
            cv(corpus, opts, *k, *aggregation, track, seed, &out)?;
            RunConfig { k_folds: *k, ..base("cv").with_train(opts) }
        }
        Command::Classify { corpus, relevance, firsthand, output } => {
            classify(corpus, relevance, firsthand, output.as_deref(), track)?;
            base("classify")
        }
        Command::Themes { corpus, lexicon, output } => {
            themes(corpus, lexicon.as_deref(), output.as_deref(), track, &out)?;
            base("themes")
        }
        Command::RankTerms { corpus, top, task: t, min_df } => {
            rank_terms(corpus, *top, task(*t), *min_df, track, &out)?;
            RunConfig { min_df: *min_df, ..base("rank-terms") }
        }
        Command::Compare { manifests, yates, contingency, relevance, firsthand, lexicon, top } => {
            let yates = *yates == Switch::On;
            let contingency = match contingency {
                ContingencyArg::FirstHandVsTotal => Contingency::FirstHandVsTotal,
                ContingencyArg::FirstHandVsKeyword => Contingency::FirstHandVsKeyword,
                ContingencyArg::RelevantVsTotal => Contingency::RelevantVsTotal,
            };
            let models = CompareModels {
                relevance: relevance.as_deref(),
                firsthand: firsthand.as_deref(),
                lexicon: lexicon.as_deref(),
            };
            compare(manifests, yates, contingency, &models, *top, track, &out)?;
            RunConfig { yates, ..base("compare") }
        }
        Command::Report { corpora, top, tagcloud, drop_track_term } => {
            report(corpora, *top, *tagcloud, *drop_track_term, track, &out)?;
            base("report")
        }
    };
    if let Some(path) = out.artifact("run_config.json") {
        write_file(&path, &to_json(&config))?;
    }
    Ok(())
}

fn ingest(file: &Path, output: Option<&Path>, track: Track, out: &Output) -> Result<()> {
    let c = load_corpus(file, track)?;
    let count = |f: &dyn Fn(&stresslens::TweetRecord) -> bool| c.iter().filter(|r| f(r)).count();
    let mut cities: BTreeMap<&str, usize> = BTreeMap::new();
    for r in c.iter() {
        *cities.entry(r.city.as_deref().unwrap_or("-")).or_default() += 1;
    }
    let summary = json!({
        "records": c.len(),
        "track": track,
        "keyword_matched": count(&|r| stresslens::corpus::contains_keyword(&r.text, track.keyword())),
        "labelled_relevance": count(&|r| r.relevant().is_some()),
        "relevant": count(&|r| r.relevant() == Some(true)),
        "first_hand": count(&|r| r.first_hand() == Some(true)),
        "cities": cities,
    });
    let mut text = String::new();
    for key in ["records", "keyword_matched", "labelled_relevance", "relevant", "first_hand"] {
        text.push_str(&format!("{key:<20} {}\n", summary[key]));
    }
    for (city, n) in &cities {
        text.push_str(&format!("city {city:<15} {n}\n"));
    }
    out.emit("ingest", &text, &to_json(&summary))?;
    if let Some(p) = output {
        c.save(p)?;
    }
    Ok(())
}

fn filter(corpus: &Path, keyword: Option<&str>, hashtags: Option<&str>, output: Option<&Path>, track: Track) -> Result<()> {
    let c = load_corpus(corpus, track)?;
    let kept = match (keyword, hashtags) {
        (Some(k), None) => c.filter_keyword(k)?,
        (None, Some("builtin")) => c.filter_hashtags(track.hashtags())?,
        (None, Some(list)) => {
            let tags: Vec<String> = list.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
            if tags.is_empty() {
                return Err(usage("--hashtags needs `builtin` or a comma-separated list"));
            }
            c.filter_hashtags(&tags)?
        }
        _ => return Err(usage("give exactly one of --keyword or --hashtags")),
    };
    eprintln!("kept {} of {} records", kept.len(), c.len());
    write_or_stdout(output, &kept.to_jsonl())
}

fn training_examples(c: &Corpus, t: Task, min_df: u32) -> Result<(Vocabulary, Vec<stresslens::classify::Example>)> {
    let docs = evaluate::task_examples(c, t)?;
    let vocab = Vocabulary::build(docs.iter().map(|d| &d.0), min_df)?;
    let examples = docs.iter().map(|(toks, y)| (vocab.vectorize(toks), *y)).collect();
    Ok((vocab, examples))
}

fn train(corpus: &Path, opts: &TrainOpts, output: &Path, track: Track, seed: u64) -> Result<()> {
    let c = load_corpus(corpus, track)?;
    let t = task(opts.task);
    let (vocab, examples) = training_examples(&c, t, opts.min_df)?;
    let model = learner(opts, seed).train(&examples, &vocab)?.with_target(ModelTarget { track, task: t });
    model.save(output)?;
    let pos = examples.iter().filter(|e| e.1).count();
    eprintln!(
        "trained {} {t} model on {} examples ({pos} positive, {} terms) -> {}",
        model.kind(),
        examples.len(),
        vocab.len(),
        output.display()
    );
    Ok(())
}

fn cv(
    corpus: &Path,
    opts: &TrainOpts,
    k: usize,
    aggregation: AggregationArg,
    track: Track,
    seed: u64,
    out: &Output,
) -> Result<()> {
    let c = load_corpus(corpus, track)?;
    let cfg = CvConfig {
        k,
        seed,
        min_df: opts.min_df,
        aggregation: match aggregation {
            AggregationArg::Pooled => Aggregation::Pooled,
            AggregationArg::Macro => Aggregation::Macro,
        },
    };
    let t = task(opts.task);
    let report = evaluate::cross_validate(&c, t, &learner(opts, seed), &cfg)?;
    let stem = format!("cv_{}_{}", t, report.model);
    out.emit(&stem, &report.render_text(), &report.render_json())
}

#[derive(Serialize)]
struct Labels<'a> {
    id: &'a str,
    keyword: bool,
    relevant: bool,
    first_hand: bool,
}

fn classify(corpus: &Path, relevance: &Path, firsthand: &Path, output: Option<&Path>, track: Track) -> Result<()> {
    let c = load_corpus(corpus, track)?;
    let rel = load_model(relevance, track, Task::Relevance)?;
    let fh = load_model(firsthand, track, Task::FirstHand)?;
    let mut lines = String::new();
    for r in c.iter() {
        let keyword = stresslens::corpus::contains_keyword(&r.text, track.keyword());
        let relevant = keyword && rel.classify(r);
        let labels = Labels {
            id: &r.id,
            keyword,
            relevant,
            first_hand: relevant && fh.classify(r),
        };
        lines.push_str(&serde_json::to_string(&labels)?);
        lines.push('\n');
    }
    write_or_stdout(output, &lines)
}

fn assignment_json(a: &ThemeAssignment) -> serde_json::Value {
    let matched: BTreeMap<&str, &Vec<String>> = a.matched_terms.iter().map(|(t, v)| (t.name(), v)).collect();
    json!({
        "id": a.id,
        "themes": a.themes.iter().map(|t| t.name()).collect::<Vec<_>>(),
        "matched_terms": matched,
    })
}

fn themes(corpus: &Path, lexicon: Option<&Path>, output: Option<&Path>, track: Track, out: &Output) -> Result<()> {
    let c = load_corpus(corpus, track)?;
    let lex = load_lexicon(lexicon)?;
    let assignments: Vec<ThemeAssignment> = c.iter().map(|r| classify_themes(r, &lex, track)).collect();
    let dist = theme_distribution::<f64>(&assignments, c.len(), track)?;
    let mut lines = String::new();
    for a in &assignments {
        lines.push_str(&serde_json::to_string(&assignment_json(a))?);
        lines.push('\n');
    }
    if let Some(p) = output.map(Path::to_path_buf).or_else(|| out.artifact("theme_assignments.jsonl")) {
        write_file(&p, &lines)?;
    }
    out.emit("themes", &dist.render(), &to_json(&dist))
}

fn rank_terms(corpus: &Path, top: usize, t: Task, min_df: u32, track: Track, out: &Output) -> Result<()> {
    let c = load_corpus(corpus, track)?;
    let docs = evaluate::task_examples(&c, t)?;
    let vocab = Vocabulary::build(docs.iter().map(|d| &d.0), min_df)?;
    let scores = evaluate::information_gain::<f64>(&c, &vocab, t)?;
    let rows = evaluate::top_terms(&scores, top)?;
    out.emit("rank_terms", &evaluate::render_term_rows(&rows), &to_json(&rows))
}

struct CompareModels<'a> {
    relevance: Option<&'a Path>,
    firsthand: Option<&'a Path>,
    lexicon: Option<&'a Path>,
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

fn compare(
    manifests: &[PathBuf],
    yates: bool,
    contingency: Contingency,
    models: &CompareModels,
    top: usize,
    track: Track,
    out: &Output,
) -> Result<()> {
    let mut loaded_models: Option<(Model<f64>, Model<f64>, ThemeLexicon)> = None;
    let mut reports: Vec<CityReport<f64>> = Vec::new();
    for path in manifests {
        let m = CityManifest::load(path)?;
        if reports.iter().any(|r| r.city == m.city) {
            return Err(stresslens::Error::invalid(format!("city {:?} appears in more than one manifest", m.city)).into());
        }
        let report = match (&m.counts, &m.corpus_path) {
            (Some(k), _) => CityReport::from_counts(
                m.city.clone(),
                track,
                m.total_tweets.expect("checked by the manifest loader"),
                k.keyword_matched,
                k.relevant,
                k.first_hand,
            )?,
            (None, Some(corpus_path)) => {
                if loaded_models.is_none() {
                    let (Some(rel), Some(fh)) = (models.relevance, models.firsthand) else {
                        return Err(usage(format!(
                            "{}: manifests with a corpus need --relevance and --firsthand models",
                            path.display()
                        )));
                    };
                    loaded_models = Some((
                        load_model(rel, track, Task::Relevance)?,
                        load_model(fh, track, Task::FirstHand)?,
                        load_lexicon(models.lexicon)?,
                    ));
                }
                let (rel, fh, lex) = loaded_models.as_ref().expect("loaded above");
                let corpus = load_corpus(corpus_path, track)?;
                let outcome = geo::run_city_pipeline(&m.city, &corpus, m.total_tweets, rel, fh, lex, track, top)
                    .with_context(|| format!("city {}", m.city))?;
                if let Some(p) = out.artifact(&format!("{}.first_hand.jsonl", file_safe(&m.city))) {
                    outcome.first_hand.save(p)?;
                }
                outcome.report
            }
            (None, None) => unreachable!("manifest loader requires counts or corpus_path"),
        };
        reports.push(report);
    }
    let matrix = geo::pairwise_compare(&reports, yates, contingency)?;
    let mut text = geo::render_city_table(&reports);
    text.push('\n');
    text.push_str(&format!(
        "p-values ({}, Yates {})\n",
        contingency.as_str(),
        if yates { "on" } else { "off" }
    ));
    text.push_str(&matrix.render_text());
    if reports.iter().any(|r| !r.theme_table.is_empty()) {
        text.push('\n');
        text.push_str(&render_theme_matrix(&reports, track));
    }
    let json = to_json(&CompareJson {
        cities: &reports,
        p_values: &matrix,
        yates,
    });
    out.emit("compare", &text, &json)
}

#[derive(Serialize)]
struct CompareJson<'a> {
    cities: &'a [CityReport<f64>],
    p_values: &'a PValueMatrix<f64>,
    yates: bool,
}

/// Share of each city's first-hand tweets per theme.
fn render_theme_matrix(reports: &[CityReport<f64>], track: Track) -> String {
    let width = ThemeId::all(track).map(|t| t.name().len()).max().unwrap_or(5);
    let cols: Vec<&CityReport<f64>> = reports.iter().filter(|r| !r.theme_table.is_empty()).collect();
    let cw = cols.iter().map(|r| r.city.len()).max().unwrap_or(6).max(8);
    let mut out = format!("{:<width$}", "theme");
    for r in &cols {
        out.push_str(&format!("  {:>cw$}", r.city));
    }
    out.push('\n');
    for theme in ThemeId::all(track) {
        out.push_str(&format!("{:<width$}", theme.name()));
        for r in &cols {
            let n = r.theme_table.iter().find(|t| t.theme == theme.name()).map_or(0, |t| t.count);
            let share = if r.first_hand == 0 { 0.0 } else { n as f64 / r.first_hand as f64 };
            out.push_str(&format!("  {share:>cw$.4}"));
        }
        out.push('\n');
    }
    out
}

fn report(corpora: &[PathBuf], top: usize, tagcloud: bool, drop_track_term: bool, track: Track, out: &Output) -> Result<()> {
    let mut text = String::new();
    let mut tables = BTreeMap::new();
    for path in corpora {
        let c = load_corpus(path, track)?;
        let name = corpus_name(path);
        let rows = geo::top_keywords::<f64>(&c, top).with_context(|| format!("{}", path.display()))?;
        text.push_str(&format!("== {name}\n"));
        text.push_str(&geo::render_keyword_rows(&rows));
        if tagcloud {
            let drop = drop_track_term.then(|| track.keyword());
            let dest = out
                .artifact(&format!("{name}.tagcloud.tsv"))
                .unwrap_or_else(|| path.with_file_name(format!("{name}.tagcloud.tsv")));
            geo::tagcloud_export::<f64>(&c, &dest, drop)?;
        }
        if tables.insert(name.clone(), rows).is_some() {
            return Err(usage(format!("two inputs share the name {name:?}")));
        }
    }
    out.emit("report", &text, &to_json(&tables))
}

/// File name without `.jsonl` and a trailing `.first_hand`.
fn corpus_name(path: &Path) -> String {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = file.strip_suffix(".jsonl").unwrap_or(&file);
    stem.strip_suffix(".first_hand").unwrap_or(stem).to_string()
}
