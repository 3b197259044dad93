use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kinmorph::analyzer::{Analyzer, StemLexicon, Template, DEFAULT_TEMPLATES};
use kinmorph::annotation::{self, AppState, ServerConfig, Store};
use kinmorph::constraints::ConstraintSet;
use kinmorph::corpus::{CorpusStore, EmbeddingTable, FrequencyTable, Lexicon};
use kinmorph::features::{AssemblyContext, FeatureExtractor, NormalizerConfig, Range, StatTables};
use kinmorph::learning::{self, ConfidenceRule, Phase, SplitSpec, TrainConfig};
use kinmorph::model::{Checkpoint, ModelConfig, OptimizerKind};
use kinmorph::morphotactics::Inventory;
use kinmorph::rewrite::RuleSet;

/// Kinyarwanda verb analysis and disambiguation.
#[derive(Parser, Debug)]
#[command(name = "kinmorph", version, max_term_width = 100)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

/// Resource paths and hyperparameters. Each can also be set in the
/// `--config` file as `name = value`, using the flag name without dashes.
#[derive(Args, Debug)]
#[command(next_help_heading = "Global options")]
struct Global {
    /// Config file of `key = value` lines; flags given on the command line win
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Morpheme inventory TSV [default: built-in]
    #[arg(long, global = true, value_name = "FILE")]
    inventory: Option<PathBuf>,
    /// Rewrite rules [default: built-in]
    #[arg(long, global = true, value_name = "FILE")]
    rules: Option<PathBuf>,
    /// Constraint rules [default: built-in]
    #[arg(long, global = true, value_name = "FILE")]
    constraints: Option<PathBuf>,
    /// Stem lexicon that filters analyzer stems [default: built-in]
    #[arg(long, global = true, value_name = "FILE")]
    stems: Option<PathBuf>,
    /// Accept any residue as a stem
    #[arg(long, global = true)]
    no_stem_lexicon: bool,
    /// Inflection templates [default: built-in]
    #[arg(long, global = true, value_name = "FILE")]
    templates: Option<PathBuf>,
    /// Word vectors in text format (`vocab dim` header)
    #[arg(long, global = true, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Corpus frequencies TSV (`word token_count doc_count`)
    #[arg(long, global = true, value_name = "FILE")]
    frequencies: Option<PathBuf>,
    /// Small lexicon, one stem per line
    #[arg(long, global = true, value_name = "FILE")]
    small_lexicon: Option<PathBuf>,
    /// Large lexicon, one stem per line
    #[arg(long, global = true, value_name = "FILE")]
    large_lexicon: Option<PathBuf>,
    /// Number of nearest inflections used per candidate stem
    #[arg(long = "k", global = true, default_value_t = 10)]
    k: usize,
    /// Maximum number of generated inflections per stem
    #[arg(long = "n", global = true, default_value_t = 64)]
    n: usize,
    /// Sigmoid range of similarity features
    #[arg(long, global = true, value_name = "MIN,MAX", default_value = "0,1")]
    similarity_range: String,
    /// Sigmoid range of raw corpus counts
    #[arg(long, global = true, value_name = "MIN,MAX", default_value = "0,10000")]
    count_range: String,
    /// Sigmoid range of selection ratios
    #[arg(long, global = true, value_name = "MIN,MAX", default_value = "-1,1")]
    ratio_range: String,
    /// Sigmoid range of frequency distances
    #[arg(long, global = true, value_name = "MIN,MAX", default_value = "0,1")]
    distance_range: String,
    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log more (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List candidate segmentations, ranked when a model is given
    Analyze(AnalyzeArgs),
    /// Build selection statistics from labels
    BuildStats(BuildStatsArgs),
    /// Train a scorer on labels
    Train(TrainArgs),
    /// Report accuracy of a model on labels
    Eval(EvalArgs),
    /// Split labels into train, dev and test files by surface word
    Split(SplitArgs),
    /// Score unlabeled words and write predictions
    Predict(PredictArgs),
    /// Pick the most uncertain predictions for annotation
    SelectUncertain(SelectUncertainArgs),
    /// Turn confident predictions into pseudo-labels
    SelectConfident(SelectConfidentArgs),
    /// Count token and document frequencies in text files
    Ingest(IngestArgs),
    /// Export labels from an annotation event log
    Export(ExportArgs),
    /// Run the annotation server
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Words to analyze
    #[arg(required = true)]
    words: Vec<String>,
    /// Model checkpoint; ranks candidates by probability
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Selection statistics TSV used with --model
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
    /// Also print indicator features
    #[arg(long)]
    indicators: bool,
}

#[derive(Args, Debug)]
struct BuildStatsArgs {
    /// Labels file
    #[arg(long, value_name = "FILE")]
    labels: PathBuf,
    /// Output statistics TSV
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Write rejected labels here
    #[arg(long, value_name = "FILE")]
    rejects: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Labels file
    #[arg(long, value_name = "FILE")]
    labels: PathBuf,
    /// Output checkpoint
    #[arg(long, value_name = "FILE", default_value = "model.json")]
    out: PathBuf,
    /// Output statistics TSV built from the training split
    #[arg(long, value_name = "FILE")]
    stats_out: Option<PathBuf>,
    /// Metrics CSV (`epoch,split,loss,accuracy`)
    #[arg(long, value_name = "FILE")]
    metrics: Option<PathBuf>,
    /// Write rejected labels here
    #[arg(long, value_name = "FILE")]
    rejects: Option<PathBuf>,
    /// Hidden layer sizes, e.g. 32,16,8 or 64-32-8
    #[arg(long, default_value = "32,16,8")]
    hidden: String,
    /// Passes over the training split
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    /// Minibatch size
    #[arg(long, default_value_t = 256)]
    batch: usize,
    /// Adam learning rate
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    /// Add a large-batch LAMB phase after the main one
    #[arg(long)]
    finetune: bool,
    /// Epochs of the LAMB phase
    #[arg(long, default_value_t = 100)]
    finetune_epochs: usize,
    /// Minibatch size of the LAMB phase
    #[arg(long, default_value_t = 4000)]
    finetune_batch: usize,
    /// Learning rate of the LAMB phase
    #[arg(long, default_value_t = 0.001)]
    finetune_lr: f64,
    /// Seed for the split, initialization and shuffling
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train, dev and test fractions
    #[arg(long, default_value = "0.7,0.15,0.15")]
    ratios: String,
    /// Repeat this annotator's instances in the training split
    #[arg(long, value_name = "ID")]
    upsample_annotator: Option<String>,
    /// How many times to repeat the upsampled annotator's instances
    #[arg(long, default_value_t = 4)]
    upsample_factor: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Labels file
    #[arg(long, value_name = "FILE")]
    labels: PathBuf,
    /// Model checkpoint
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Selection statistics TSV
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SplitArgs {
    /// Labels file
    #[arg(long, value_name = "FILE")]
    labels: PathBuf,
    /// Shuffle seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train, dev and test fractions
    #[arg(long, default_value = "0.7,0.15,0.15")]
    ratios: String,
    /// Directory for train.tsv, dev.tsv and test.tsv
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Words to score, one per line
    #[arg(long, value_name = "FILE")]
    words: PathBuf,
    /// Model checkpoint
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Selection statistics TSV
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
    /// Output predictions TSV [default: stdout]
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelectUncertainArgs {
    /// Predictions TSV
    #[arg(long, value_name = "FILE")]
    predictions: PathBuf,
    /// Keep words whose entropy exceeds this (nats)
    #[arg(long, default_value_t = 1.0)]
    min_entropy: f64,
    /// Maximum number of words kept
    #[arg(long, default_value_t = 10000)]
    top: usize,
    /// Output predictions TSV [default: stdout]
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelectConfidentArgs {
    /// Predictions TSV
    #[arg(long, value_name = "FILE")]
    predictions: PathBuf,
    /// Minimum top stem probability
    #[arg(long, default_value_t = 0.95)]
    min_p1: f64,
    /// Minimum number of candidate stems
    #[arg(long, default_value_t = 3)]
    min_stems: usize,
    /// Minimum gap between the two best stems
    #[arg(long, default_value_t = 0.95)]
    min_gap: f64,
    /// Maximum stem entropy (nats)
    #[arg(long, default_value_t = 0.1)]
    max_entropy: f64,
    /// Output labels file [default: stdout]
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Text files; every non-empty line is one document
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Output frequencies TSV
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExportArgs {
    /// Event log (JSON lines)
    #[arg(long, value_name = "FILE")]
    log: PathBuf,
    /// Keep only these annotators, comma-separated
    #[arg(long, value_name = "IDS")]
    annotators: Option<String>,
    /// Output labels file [default: stdout]
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// Listen address
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
    /// Event log (JSON lines), created if missing
    #[arg(long, value_name = "FILE", default_value = "events.jsonl")]
    log: PathBuf,
    /// Snapshot file
    #[arg(long, value_name = "FILE")]
    snapshot: Option<PathBuf>,
    /// Built UI bundle served at /
    #[arg(long = "static", value_name = "DIR")]
    static_dir: Option<PathBuf>,
    /// Seed the queue from a predictions TSV
    #[arg(long, value_name = "FILE")]
    predictions: Option<PathBuf>,
    /// Seed the queue from a word list, one per line
    #[arg(long, value_name = "FILE", conflicts_with = "predictions")]
    words: Option<PathBuf>,
    /// Queue refresh: keep words whose entropy exceeds this (nats)
    #[arg(long, default_value_t = 1.0)]
    min_entropy: f64,
    /// Queue refresh: maximum queue size
    #[arg(long, default_value_t = 10000)]
    top: usize,
}

enum Failure {
    Config(String),
    Domain(String),
}

type CliResult<T> = Result<T, Failure>;

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn domain_err(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Options a config file may set.
const CONFIG_KEYS: &[&str] = &[
    "inventory",
    "rules",
    "constraints",
    "stems",
    "no-stem-lexicon",
    "templates",
    "embeddings",
    "frequencies",
    "small-lexicon",
    "large-lexicon",
    "k",
    "n",
    "similarity-range",
    "count-range",
    "ratio-range",
    "distance-range",
    "jobs",
];

fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('[') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let k = k.trim().replace('_', "-");
        let v = v.trim().trim_matches('"').to_string();
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(format!("config line {}: unknown key {k:?}", i + 1));
        }
        out.insert(k, v);
    }
    Ok(out)
}

/// Inserts config-file values for options not given on the command line.
fn apply_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let pos = args.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else { return Ok(args) };
    let path = match args[pos].split_once('=') {
        Some((_, p)) => p.to_string(),
        None => args.get(pos + 1).cloned().ok_or("--config needs a file")?,
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
    let given = |k: &str| {
        let flag = format!("--{k}");
        args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut extra = Vec::new();
    for (k, v) in parse_config(&text)? {
        if given(&k) {
            continue;
        }
        if k == "no-stem-lexicon" {
            if v == "true" {
                extra.push(format!("--{k}"));
            }
        } else {
            extra.push(format!("--{k}={v}"));
        }
    }
    let mut out = vec![args[0].clone()];
    out.extend(extra);
    out.extend(args.into_iter().skip(1));
    Ok(out)
}

fn parse_range(text: &str) -> CliResult<Range> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| config_err(format!("range {text:?} must be MIN,MAX")))?;
    let a: f64 = a.trim().parse().map_err(config_err)?;
    let b: f64 = b.trim().parse().map_err(config_err)?;
    Range::new(a, b).map_err(config_err)
}

struct Resources {
    analyzer: Analyzer,
    corpus: CorpusStore,
    templates: Vec<Template>,
    cfg: NormalizerConfig,
    ctx: AssemblyContext,
}

impl Resources {
    fn load(g: &Global) -> CliResult<Resources> {
        let inventory = match &g.inventory {
            Some(p) => Inventory::parse(&read(p)?).map_err(config_err)?,
            None => Inventory::default_kinyarwanda(),
        };
        let rules = match &g.rules {
            Some(p) => RuleSet::parse(&read(p)?).map_err(config_err)?,
            None => RuleSet::default_kinyarwanda(),
        };
        let constraints = match &g.constraints {
            Some(p) => ConstraintSet::parse(&read(p)?).map_err(config_err)?,
            None => ConstraintSet::default_kinyarwanda(),
        };
        let mut analyzer = Analyzer::new(inventory, rules, constraints);
        if !g.no_stem_lexicon {
            analyzer = analyzer.with_stem_lexicon(match &g.stems {
                Some(p) => StemLexicon::parse(&read(p)?),
                None => StemLexicon::default_kinyarwanda(),
            });
        }
        let templates = Template::parse_list(&match &g.templates {
            Some(p) => read(p)?,
            None => DEFAULT_TEMPLATES.to_string(),
        })
        .map_err(config_err)?;
        let embeddings = match &g.embeddings {
            Some(p) => EmbeddingTable::parse(&read(p)?).map_err(config_err)?,
            None => EmbeddingTable::new(1),
        };
        let frequencies = match &g.frequencies {
            Some(p) => FrequencyTable::parse(&read(p)?).map_err(config_err)?,
            None => FrequencyTable::default(),
        };
        let lexicon = |p: &Option<PathBuf>| -> CliResult<Lexicon> {
            Ok(match p {
                Some(p) => Lexicon::parse(&read(p)?),
                None => Lexicon::default(),
            })
        };
        let corpus = CorpusStore::new(embeddings, frequencies, lexicon(&g.small_lexicon)?, lexicon(&g.large_lexicon)?);
        let cfg = NormalizerConfig {
            similarity: parse_range(&g.similarity_range)?,
            count: parse_range(&g.count_range)?,
            ratio: parse_range(&g.ratio_range)?,
            distance: parse_range(&g.distance_range)?,
        };
        let ctx = AssemblyContext {
            k: g.k,
            n: g.n,
            ..Default::default()
        };
        ctx.validate().map_err(config_err)?;
        Ok(Resources {
            analyzer,
            corpus,
            templates,
            cfg,
            ctx,
        })
    }

    fn extractor(&self) -> CliResult<FeatureExtractor<'_>> {
        FeatureExtractor::new(&self.analyzer, &self.corpus, self.templates.clone(), self.cfg, self.ctx).map_err(config_err)
    }
}

fn load_stats(path: Option<&Path>) -> CliResult<StatTables> {
    match path {
        Some(p) => StatTables::parse(&read(p)?).map_err(config_err),
        None => Ok(StatTables::new()),
    }
}

fn load_model(path: &Path) -> CliResult<kinmorph::model::Mlp> {
    Checkpoint::from_json(&read(path)?)
        .and_then(|c| c.model())
        .map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn load_labels(path: &Path) -> CliResult<Vec<learning::LabeledPair>> {
    learning::parse_labels(&read(path)?).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn write_rejects(path: Option<&Path>, rejects: &[learning::Reject]) -> CliResult<()> {
    for r in rejects {
        log::warn!("rejected label: {r}");
    }
    if let Some(p) = path {
        let text: String = rejects.iter().map(|r| format!("{r}\n")).collect();
        write(p, &text)?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(j) = cli.global.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(config_err)?;
    }
    let res = Resources::load(&cli.global)?;
    match cli.command {
        Command::Analyze(a) => analyze(&res, a),
        Command::BuildStats(a) => {
            let labels = load_labels(&a.labels)?;
            let (tables, rejects) = learning::build_stats(&labels, &res.analyzer);
            write_rejects(a.rejects.as_deref(), &rejects)?;
            write(&a.out, &tables.to_tsv())
        }
        Command::Train(a) => train(&res, a),
        Command::Eval(a) => {
            let labels = load_labels(&a.labels)?;
            let model = load_model(&a.model)?;
            let tables = load_stats(a.stats.as_deref())?;
            let fx = res.extractor()?;
            let (instances, rejects) = learning::build_instances(&labels, &fx, &tables);
            write_rejects(None, &rejects)?;
            let acc = learning::evaluate(&model, &instances).map_err(domain_err)?;
            println!("accuracy\t{acc}\t{}", instances.len());
            let mut per: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
            for i in &instances {
                let e = per.entry(&i.annotator).or_default();
                e.1 += 1;
                if learning::is_correct(&model, i) {
                    e.0 += 1;
                }
            }
            for (ann, (c, n)) in per {
                println!("annotator\t{ann}\t{}\t{n}", c as f64 / n as f64);
            }
            Ok(())
        }
        Command::Split(a) => {
            let labels = load_labels(&a.labels)?;
            let plan = SplitSpec::parse_ratios(&a.ratios, a.seed).map_err(config_err)?;
            let s = learning::split_by(labels, |l| &l.surface, &plan).map_err(config_err)?;
            fs::create_dir_all(&a.out_dir).map_err(domain_err)?;
            for (name, part) in [("train", &s.train), ("dev", &s.dev), ("test", &s.test)] {
                write(&a.out_dir.join(format!("{name}.tsv")), &learning::format_labels(part))?;
            }
            Ok(())
        }
        Command::Predict(a) => {
            let model = load_model(&a.model)?;
            let tables = load_stats(a.stats.as_deref())?;
            let fx = res.extractor()?;
            let text = read(&a.words)?;
            let words: Vec<&str> = text.lines().map(str::trim).filter(|w| !w.is_empty()).collect();
            use rayon::prelude::*;
            let preds: Vec<_> = words
                .par_iter()
                .filter_map(|w| learning::unlabeled_instance(w, &fx, &tables))
                .map(|i| learning::predict(&model, &i))
                .collect();
            emit(a.out.as_deref(), &learning::format_predictions(&preds))
        }
        Command::SelectUncertain(a) => {
            let preds = learning::parse_predictions(&read(&a.predictions)?).map_err(config_err)?;
            let batch = learning::select_uncertain(&preds, a.min_entropy, a.top);
            emit(a.out.as_deref(), &learning::format_predictions(&batch))
        }
        Command::SelectConfident(a) => {
            let preds = learning::parse_predictions(&read(&a.predictions)?).map_err(config_err)?;
            let rule = ConfidenceRule {
                min_p1: a.min_p1,
                min_stems: a.min_stems,
                min_gap: a.min_gap,
                max_entropy: a.max_entropy,
            };
            let picked = learning::select_confident(&preds, &rule);
            emit(a.out.as_deref(), &learning::format_labels(&learning::pseudo_labels(&picked)))
        }
        Command::Ingest(a) => {
            let mut table = FrequencyTable::default();
            for f in &a.files {
                for line in read(f)?.lines() {
                    let tokens: Vec<String> = line
                        .split(|c: char| !c.is_alphabetic())
                        .filter(|t| !t.is_empty())
                        .map(str::to_lowercase)
                        .collect();
                    if !tokens.is_empty() {
                        table.add_document(tokens);
                    }
                }
            }
            write(&a.out, &table.to_tsv())
        }
        Command::Export(a) => {
            let events = annotation::store::read_events(&a.log).map_err(config_err)?;
            let state = annotation::replay(&events).map_err(domain_err)?;
            let filter = a
                .annotators
                .map(|s| s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect());
            emit(a.out.as_deref(), &learning::format_labels(&state.export(filter.as_ref())))
        }
        Command::Serve(a) => serve(res, a),
    }
}

fn analyze(res: &Resources, a: AnalyzeArgs) -> CliResult<()> {
    let ranked = match &a.model {
        Some(m) => Some((load_model(m)?, load_stats(a.stats.as_deref())?, res.extractor()?)),
        None => None,
    };
    for word in &a.words {
        let segs = res.analyzer.analyze(word);
        let mut rows: Vec<(Option<f64>, String, String)> = segs
            .iter()
            .map(|s| {
                let ind = if a.indicators {
                    format!("\t{}", res.analyzer.indicator_features(s))
                } else {
                    String::new()
                };
                (None, s.serialize(), ind)
            })
            .collect();
        if let Some((model, tables, fx)) = &ranked {
            let vectors = fx.assemble_all(word, &segs, tables);
            let p = model.predict(&vectors);
            for (r, q) in rows.iter_mut().zip(&p.probs) {
                r.0 = Some(*q);
            }
            rows.sort_by(|x, y| y.0.unwrap_or(0.0).total_cmp(&x.0.unwrap_or(0.0)).then_with(|| x.1.cmp(&y.1)));
        }
        if a.words.len() > 1 {
            println!("# {word}");
        }
        for (p, s, ind) in rows {
            match p {
                Some(p) => println!("{p:.4}\t{s}{ind}"),
                None => println!("{s}{ind}"),
            }
        }
    }
    Ok(())
}

fn train(res: &Resources, a: TrainArgs) -> CliResult<()> {
    let labels = load_labels(&a.labels)?;
    let plan = SplitSpec::parse_ratios(&a.ratios, a.seed).map_err(config_err)?;
    let parts = learning::split_by(labels, |l| &l.surface, &plan).map_err(config_err)?;
    let (tables, mut rejects) = learning::build_stats(&parts.train, &res.analyzer);
    let fx = res.extractor()?;
    let build = |ls: &[learning::LabeledPair], rejects: &mut Vec<learning::Reject>| {
        let (inst, rej) = learning::build_instances(ls, &fx, &tables);
        rejects.extend(rej);
        inst
    };
    let mut train_set = build(&parts.train, &mut Vec::new());
    let dev_set = build(&parts.dev, &mut rejects);
    let test_set = build(&parts.test, &mut rejects);
    write_rejects(a.rejects.as_deref(), &rejects)?;
    if let Some(ann) = &a.upsample_annotator {
        train_set = learning::upsample(train_set, ann, a.upsample_factor);
    }
    let cfg = TrainConfig {
        model: ModelConfig {
            hidden: ModelConfig::parse_hidden(&a.hidden).map_err(config_err)?,
            seed: a.seed,
        },
        main: Phase {
            optimizer: OptimizerKind::Adam,
            lr: a.lr,
            batch: a.batch,
            epochs: a.epochs,
        },
        finetune: a.finetune.then_some(Phase {
            optimizer: OptimizerKind::Lamb,
            lr: a.finetune_lr,
            batch: a.finetune_batch,
            epochs: a.finetune_epochs,
        }),
        target_dev_accuracy: None,
    };
    let out = learning::train(&train_set, &dev_set, &cfg).map_err(domain_err)?;
    write(&a.out, &Checkpoint::new(&out.model, Some(&out.optimizer)).to_json())?;
    if let Some(p) = &a.metrics {
        write(p, &learning::format_metrics(&out.metrics))?;
    }
    if let Some(p) = &a.stats_out {
        write(p, &tables.to_tsv())?;
    }
    println!("train\t{}", train_set.len());
    if let Ok(acc) = learning::evaluate(&out.model, &dev_set) {
        println!("dev_accuracy\t{acc}");
    }
    if let Ok(acc) = learning::evaluate(&out.model, &test_set) {
        println!("test_accuracy\t{acc}");
    }
    Ok(())
}

fn serve(res: Resources, a: ServeArgs) -> CliResult<()> {
    let mut store = Store::open(&a.log, a.snapshot.as_deref()).map_err(config_err)?;
    let seed_tasks = if let Some(p) = &a.predictions {
        let preds = learning::parse_predictions(&read(p)?).map_err(config_err)?;
        Some(
            learning::select_uncertain(&preds, a.min_entropy, a.top)
                .iter()
                .map(|p| annotation::task_from_prediction(p, &res.analyzer))
                .collect(),
        )
    } else if let Some(p) = &a.words {
        Some(
            read(p)?
                .lines()
                .filter_map(|w| annotation::task_from_analysis(w.trim(), &res.analyzer))
                .collect(),
        )
    } else {
        None
    };
    if let Some(tasks) = seed_tasks {
        store.replace_queue(tasks).map_err(domain_err)?;
    }
    let state = AppState::new(
        store,
        res.analyzer,
        ServerConfig {
            min_entropy: a.min_entropy,
            top: a.top,
            static_dir: a.static_dir,
        },
    );
    let rt = tokio::runtime::Runtime::new().map_err(domain_err)?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&a.addr).await.map_err(config_err)?;
        log::info!("listening on {}", a.addr);
        axum::serve(listener, annotation::router(state)).await.map_err(domain_err)
    })
}

fn main() -> ExitCode {
    let args = match apply_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
