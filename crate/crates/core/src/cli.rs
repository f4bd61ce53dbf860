//! Command-line front end.
//!
//! Exit codes: 0 success, 2 data error, 3 usage or configuration error.
//! Every command writes a manifest (command, flags, seed, input and output
//! fingerprints, versions) next to its output file as `<out>.manifest.json`,
//! or to stderr when the output goes to stdout.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{corpus_stats, parse_conll, Corpus, StatsReport};
use crate::eval::{
    compare_approaches, diagnose_stage1, diagnose_stage2, diagnose_stage3, evaluate, EvalError, EvalReport,
};
use crate::models::file::MODEL_VERSION;
use crate::models::{
    train_gate, train_span_classifier, train_tagger, AnyModel, ExternalPredictions, Hyper, ModelError,
    ValidatedExternal,
};
use crate::pipeline::{
    read_predictions_jsonl, write_predictions_jsonl, Approach, ExternalGate, ExternalTagger, ExternalTyper, Gate,
    Pipeline, PipelineError, Tagger, Typer,
};
use crate::spans::{sentence_entity_label, TagScheme};

pub const THREADS_ENV: &str = "CASCADE_NER_THREADS";

#[derive(Debug)]
enum CliError {
    Data(String),
    Usage(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Data(_) => 2,
            CliError::Usage(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Data(m) | CliError::Usage(m) => m,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidHyper(_) => usage(e),
            _ => data(e),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::SchemeMismatch { .. }
            | PipelineError::ExternalSchemeMismatch { .. }
            | PipelineError::MissingComponent { .. }
            | PipelineError::UnexpectedComponent { .. }
            | PipelineError::UnknownApproach(_) => usage(e),
            PipelineError::Model(m) => m.into(),
            _ => data(e),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Pipeline(p) => p.into(),
            _ => data(e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cascade-ner", version, about = "Flat and cascaded software-mention recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Task {
    Gate,
    Tagger,
    Typer,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SchemeArg {
    Full27,
    Untyped3,
}

impl From<SchemeArg> for TagScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Full27 => TagScheme::Full27,
            SchemeArg::Untyped3 => TagScheme::Untyped3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TrainSubset {
    Gated,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus statistics and per-type entity counts.
    Stats {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Train one component and write it as a JSON model file.
    Train {
        #[arg(value_enum)]
        task: Task,
        input: PathBuf,
        out: PathBuf,
        /// Tag scheme for `tagger` (default untyped3); `flat` is always full27.
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        #[arg(long, default_value_t = Hyper::default().epochs)]
        epochs: usize,
        #[arg(long, default_value_t = Hyper::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = Hyper::default().learning_rate)]
        learning_rate: f64,
        /// Tagger training sentences: only those with entities, or all.
        #[arg(long, value_enum)]
        train_subset: Option<TrainSubset>,
    },
    /// Run one approach over a corpus and write predictions as JSONL.
    Predict {
        #[arg(long)]
        approach: u8,
        #[arg(long)]
        tagger: Option<PathBuf>,
        #[arg(long)]
        typer: Option<PathBuf>,
        #[arg(long)]
        gate: Option<PathBuf>,
        /// External predictions; fill every component not given as a model.
        #[arg(long)]
        external: Vec<PathBuf>,
        /// Include the stage trace in each record.
        #[arg(long)]
        trace: bool,
        input: PathBuf,
        out: PathBuf,
    },
    /// Exact-match evaluation of predictions against gold.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Evaluate one stage on gold upstream inputs.
    Diagnose {
        #[arg(long)]
        stage: u8,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        gate: Option<PathBuf>,
        #[arg(long)]
        tagger: Option<PathBuf>,
        #[arg(long)]
        typer: Option<PathBuf>,
        #[arg(long)]
        external: Vec<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Evaluate several configured pipelines and print a grid.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return e.code();
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(usage)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| data(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| data(format!("cannot write {}: {e}", path.display())))
}

fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    parse_conll(&read(path)?).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<AnyModel, CliError> {
    AnyModel::load(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn load_external(paths: &[PathBuf], corpus: &Corpus) -> Result<Option<ValidatedExternal>, CliError> {
    let mut merged: Option<ExternalPredictions> = None;
    for p in paths {
        let next = ExternalPredictions::load(p).map_err(|e| data(format!("{}: {e}", p.display())))?;
        merged = Some(match merged {
            None => next,
            Some(m) => m.merge(next)?,
        });
    }
    merged.map(|m| m.validate(corpus)).transpose().map_err(Into::into)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct FileRecord {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    flags: BTreeMap<&'static str, serde_json::Value>,
    seed: u64,
    inputs: Vec<FileRecord>,
    outputs: Vec<FileRecord>,
    version: &'static str,
    model_format_version: u32,
}

impl Manifest {
    fn new(command: &'static str, seed: u64) -> Self {
        Manifest {
            command,
            flags: BTreeMap::new(),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION"),
            model_format_version: MODEL_VERSION,
        }
    }

    fn flag(&mut self, name: &'static str, value: impl Serialize) -> &mut Self {
        self.flags.insert(name, serde_json::to_value(value).expect("flags serialize"));
        self
    }

    fn input(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| data(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(FileRecord { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(self)
    }

    /// Records `contents` as written to `out` and emits the manifest.
    fn finish(mut self, out: Option<&Path>, contents: &str) -> Result<(), CliError> {
        if let Some(path) = out {
            self.outputs.push(FileRecord { path: path.display().to_string(), sha256: sha256_hex(contents.as_bytes()) });
        }
        let mut json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        json.push('\n');
        match out {
            Some(path) => {
                let mut name = path.as_os_str().to_owned();
                name.push(".manifest.json");
                write(Path::new(&name), &json)
            }
            None => {
                eprint!("{json}");
                Ok(())
            }
        }
    }
}

/// Writes `contents` to `out`, or stdout when absent, then the manifest.
fn emit(manifest: Manifest, out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write(path, contents)?,
        None => print!("{contents}"),
    }
    manifest.finish(out, contents)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Stats { input, format } => cmd_stats(&input, format),
        Command::Train { task, input, out, scheme, epochs, seed, learning_rate, train_subset } => {
            let hyper = Hyper { epochs, seed, learning_rate };
            cmd_train(task, &input, &out, scheme, &hyper, train_subset)
        }
        Command::Predict { approach, tagger, typer, gate, external, trace, input, out } => {
            cmd_predict(approach, Components { gate, tagger, typer, external }, trace, &input, &out)
        }
        Command::Evaluate { gold, pred, report, format } => cmd_evaluate(&gold, &pred, report.as_deref(), format),
        Command::Diagnose { stage, gold, gate, tagger, typer, external, report, format } => {
            cmd_diagnose(stage, &gold, Components { gate, tagger, typer, external }, report.as_deref(), format)
        }
        Command::Compare { config, gold, report, format } => cmd_compare(&config, &gold, report.as_deref(), format),
    }
}

fn render_stats(stats: &StatsReport) -> String {
    let mut out = String::new();
    let rows: [(&str, String); 5] = [
        ("Number of sentences", stats.sentence_count.to_string()),
        ("Sentences with entity", stats.sentences_with_entity.to_string()),
        ("Total entities", stats.total_entities.to_string()),
        ("Max length", stats.max_length.to_string()),
        ("Avg length", format!("{:.2}", stats.avg_length)),
    ];
    for (k, v) in rows {
        out.push_str(&format!("{k:<24}{v:>8}\n"));
    }
    out.push('\n');
    for (ty, n) in &stats.per_type_counts {
        out.push_str(&format!("{:<32}{n:>8}\n", ty.to_string()));
    }
    out.push('\n');
    for (group, n) in &stats.per_group_totals {
        out.push_str(&format!("{:<32}{n:>8}\n", group.as_str()));
    }
    out
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_stats(input: &Path, format: Format) -> Result<(), CliError> {
    let corpus = load_corpus(input)?;
    let stats = corpus_stats(&corpus);
    let text = match format {
        Format::Json => json_line(&stats),
        Format::Table => render_stats(&stats),
    };
    let mut m = Manifest::new("stats", Hyper::default().seed);
    m.flag("format", format);
    m.input(input)?;
    emit(m, None, &text)
}

fn cmd_train(
    task: Task,
    input: &Path,
    out: &Path,
    scheme: Option<SchemeArg>,
    hyper: &Hyper,
    subset: Option<TrainSubset>,
) -> Result<(), CliError> {
    hyper.validate()?;
    let scheme = match (task, scheme) {
        (Task::Flat, None | Some(SchemeArg::Full27)) => Some(TagScheme::Full27),
        (Task::Flat, Some(SchemeArg::Untyped3)) => return Err(usage("`train flat` always uses the full27 scheme")),
        (Task::Tagger, s) => Some(s.map_or(TagScheme::Untyped3, TagScheme::from)),
        (Task::Gate | Task::Typer, Some(_)) => return Err(usage("--scheme applies only to `tagger` and `flat`")),
        (Task::Gate | Task::Typer, None) => None,
    };
    let subset = match (task, subset) {
        (Task::Tagger, s) => Some(s.unwrap_or(TrainSubset::Gated)),
        (_, Some(_)) => return Err(usage("--train-subset applies only to `tagger`")),
        (_, None) => None,
    };
    let corpus = load_corpus(input)?;
    let model: AnyModel = match task {
        Task::Gate => train_gate(&corpus, hyper)?.into(),
        Task::Typer => train_span_classifier(&corpus, hyper)?.into(),
        Task::Flat => train_tagger(&corpus, TagScheme::Full27, hyper)?.into(),
        Task::Tagger => {
            let scheme = scheme.expect("set for tagger");
            let mut tagger = if subset == Some(TrainSubset::Gated) {
                let gated = corpus.filter(|s| sentence_entity_label(s.tags()));
                if gated.is_empty() {
                    return Err(data("no sentence contains an entity; use --train-subset all to train anyway"));
                }
                train_tagger(&gated, scheme, hyper)?
            } else {
                train_tagger(&corpus, scheme, hyper)?
            };
            tagger.meta.train_subset = subset.map(|s| match s {
                TrainSubset::Gated => "gated".to_string(),
                TrainSubset::All => "all".to_string(),
            });
            tagger.into()
        }
    };
    let json = model.to_json();
    let mut m = Manifest::new("train", hyper.seed);
    m.flag("task", task)
        .flag("epochs", hyper.epochs)
        .flag("learning_rate", hyper.learning_rate)
        .flag("scheme", scheme)
        .flag("train_subset", subset);
    m.input(input)?;
    emit(m, Some(out), &json)
}

/// Component sources named on the command line.
struct Components {
    gate: Option<PathBuf>,
    tagger: Option<PathBuf>,
    typer: Option<PathBuf>,
    external: Vec<PathBuf>,
}

impl Components {
    fn record(&self, m: &mut Manifest) -> Result<(), CliError> {
        for (name, p) in [("gate", &self.gate), ("tagger", &self.tagger), ("typer", &self.typer)] {
            m.flag(name, p.as_ref().map(|p| p.display().to_string()));
            if let Some(p) = p {
                m.input(p)?;
            }
        }
        m.flag("external", self.external.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
        for p in &self.external {
            m.input(p)?;
        }
        Ok(())
    }

    fn gate(&self, ext: Option<&ValidatedExternal>) -> Result<Option<Arc<dyn Gate>>, CliError> {
        if let Some(p) = &self.gate {
            return match load_model(p)? {
                AnyModel::Gate(g) => Ok(Some(Arc::new(g))),
                other => Err(usage(format!("{} is a {:?} model, not a gate", p.display(), other.kind()))),
            };
        }
        Ok(ext.filter(|e| e.inner().has_gates()).map(|e| Arc::new(ExternalGate(e.clone())) as Arc<dyn Gate>))
    }

    fn tagger(&self, ext: Option<&ValidatedExternal>, scheme: TagScheme) -> Result<Option<Arc<dyn Tagger>>, CliError> {
        if let Some(p) = &self.tagger {
            return match load_model(p)? {
                AnyModel::Tagger(t) => Ok(Some(Arc::new(t))),
                other => Err(usage(format!("{} is a {:?} model, not a tagger", p.display(), other.kind()))),
            };
        }
        match ext.filter(|e| e.inner().has_tags()) {
            Some(e) => Ok(Some(Arc::new(ExternalTagger::new(e.clone(), scheme)?))),
            None => Ok(None),
        }
    }

    fn typer(&self, ext: Option<&ValidatedExternal>) -> Result<Option<Arc<dyn Typer>>, CliError> {
        if let Some(p) = &self.typer {
            return match load_model(p)? {
                AnyModel::Typer(t) => Ok(Some(Arc::new(t))),
                other => Err(usage(format!("{} is a {:?} model, not a typer", p.display(), other.kind()))),
            };
        }
        Ok(ext.filter(|e| e.inner().has_span_types()).map(|e| Arc::new(ExternalTyper(e.clone())) as Arc<dyn Typer>))
    }

    /// Builds a pipeline; external predictions fill only the components the
    /// approach uses.
    fn pipeline(&self, approach: Approach, corpus: &Corpus) -> Result<Pipeline, CliError> {
        let ext = load_external(&self.external, corpus)?;
        let ext = ext.as_ref();
        let gate = match approach {
            Approach::ThreeStage => self.gate(ext)?,
            _ if self.gate.is_some() => {
                return Err(PipelineError::UnexpectedComponent { approach: approach.number(), component: "gate" }.into())
            }
            _ => None,
        };
        let typer = match approach {
            Approach::Flat if self.typer.is_some() => {
                return Err(PipelineError::UnexpectedComponent { approach: 1, component: "typer" }.into())
            }
            Approach::Flat => None,
            _ => self.typer(ext)?,
        };
        let tagger = self.tagger(ext, approach.tagger_scheme())?;
        Ok(Pipeline::new(approach, gate, tagger, typer)?)
    }
}

fn cmd_predict(approach: u8, components: Components, trace: bool, input: &Path, out: &Path) -> Result<(), CliError> {
    let approach = Approach::from_number(approach)?;
    let corpus = load_corpus(input)?;
    let pipeline = components.pipeline(approach, &corpus)?;
    let preds = pipeline.predict_corpus(&corpus)?;
    let jsonl = write_predictions_jsonl(&preds, trace);
    let mut m = Manifest::new("predict", Hyper::default().seed);
    m.flag("approach", approach.number()).flag("trace", trace);
    components.record(&mut m)?;
    m.input(input)?;
    emit(m, Some(out), &jsonl)
}

fn render_report(report: &EvalReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Table => report.render_table(),
    }
}

fn cmd_evaluate(gold: &Path, pred: &Path, report: Option<&Path>, format: Format) -> Result<(), CliError> {
    let corpus = load_corpus(gold)?;
    let preds = read_predictions_jsonl(&read(pred)?).map_err(|e| data(format!("{}: {e}", pred.display())))?;
    let r = evaluate(&corpus, &preds)?;
    let mut m = Manifest::new("evaluate", Hyper::default().seed);
    m.flag("format", format);
    m.input(gold)?.input(pred)?;
    emit(m, report, &render_report(&r, format))
}

fn cmd_diagnose(
    stage: u8,
    gold: &Path,
    components: Components,
    report: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    let corpus = load_corpus(gold)?;
    let ext = load_external(&components.external, &corpus)?;
    let ext = ext.as_ref();
    let missing =
        |what: &str| usage(format!("stage {stage} needs --{what} or an --external file with {what} predictions"));
    let r = match stage {
        1 => {
            let gate = components.gate(ext)?.ok_or_else(|| missing("gate"))?;
            diagnose_stage1(gate.as_ref(), &corpus)?
        }
        2 => {
            let scheme = ext.and_then(|e| e.inner().scheme()).unwrap_or(TagScheme::Untyped3);
            let tagger = components.tagger(ext, scheme)?.ok_or_else(|| missing("tagger"))?;
            diagnose_stage2(tagger.as_ref(), &corpus)?
        }
        3 => {
            let typer = components.typer(ext)?.ok_or_else(|| missing("typer"))?;
            diagnose_stage3(typer.as_ref(), &corpus)?
        }
        n => return Err(usage(format!("--stage must be 1, 2 or 3, got {n}"))),
    };
    let mut m = Manifest::new("diagnose", Hyper::default().seed);
    m.flag("stage", stage).flag("format", format);
    components.record(&mut m)?;
    m.input(gold)?;
    emit(m, report, &render_report(&r, format))
}

/// One named system in a `compare` config. Relative paths are resolved
/// against the config file's directory.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSpec {
    name: String,
    approach: u8,
    #[serde(default)]
    gate: Option<PathBuf>,
    #[serde(default)]
    tagger: Option<PathBuf>,
    #[serde(default)]
    typer: Option<PathBuf>,
    #[serde(default)]
    external: Vec<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareConfig {
    systems: Vec<SystemSpec>,
}

fn cmd_compare(config: &Path, gold: &Path, report: Option<&Path>, format: Format) -> Result<(), CliError> {
    let cfg: CompareConfig =
        serde_json::from_str(&read(config)?).map_err(|e| usage(format!("{}: {e}", config.display())))?;
    if cfg.systems.is_empty() {
        return Err(usage("compare config lists no systems"));
    }
    let base = config.parent().unwrap_or(Path::new("."));
    let resolve = |p: Option<PathBuf>| p.map(|p| base.join(p));
    let corpus = load_corpus(gold)?;
    let mut m = Manifest::new("compare", Hyper::default().seed);
    m.flag("format", format);
    m.input(config)?.input(gold)?;
    let mut systems = Vec::new();
    for spec in cfg.systems {
        let approach = Approach::from_number(spec.approach)?;
        let components = Components {
            gate: resolve(spec.gate),
            tagger: resolve(spec.tagger),
            typer: resolve(spec.typer),
            external: spec.external.into_iter().map(|p| base.join(p)).collect(),
        };
        let pipeline = components.pipeline(approach, &corpus).map_err(|e| match e {
            CliError::Usage(msg) => usage(format!("system `{}`: {msg}", spec.name)),
            CliError::Data(msg) => data(format!("system `{}`: {msg}", spec.name)),
        })?;
        for p in
            [&components.gate, &components.tagger, &components.typer].into_iter().flatten().chain(&components.external)
        {
            m.input(p)?;
        }
        systems.push((spec.name, pipeline));
    }
    let table = compare_approaches(&systems, &corpus)?;
    let text = match format {
        Format::Json => json_line(&table),
        Format::Table => table.render_grid(),
    };
    emit(m, report, &text)
}
