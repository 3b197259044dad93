//! Labeled data, dataset construction, splits, active-learning selection,
//! training and evaluation.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analyzer::Analyzer;
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, FeatureVector, StatTables, FEATURE_COUNT, RATIO_MEANS, RATIO_OFFSET};
use crate::model::{self, Example, Mlp, ModelConfig, Optimizer, OptimizerKind};

/// Annotator id written on machine-produced labels.
pub const MODEL_ANNOTATOR: &str = "model";

/// One `surface/stem:chosen/proposed[TAB annotator]` line.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledPair {
    pub surface: String,
    pub stem: String,
    pub chosen: u32,
    pub proposed: u32,
    pub annotator: String,
}

impl LabeledPair {
    pub fn new(surface: &str, stem: &str, chosen: u32, proposed: u32, annotator: &str) -> Result<LabeledPair> {
        if proposed == 0 || chosen > proposed {
            return Err(Error::validation(format!("need 0 <= chosen <= proposed, proposed >= 1; got {chosen}/{proposed}")));
        }
        if surface.is_empty() || stem.is_empty() {
            return Err(Error::validation("empty surface or stem"));
        }
        Ok(LabeledPair {
            surface: surface.to_string(),
            stem: stem.to_string(),
            chosen,
            proposed,
            annotator: annotator.to_string(),
        })
    }
}

impl fmt::Display for LabeledPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}:{}/{}", self.surface, self.stem, self.chosen, self.proposed)?;
        if !self.annotator.is_empty() {
            write!(f, "\t{}", self.annotator)?;
        }
        Ok(())
    }
}

impl FromStr for LabeledPair {
    type Err = Error;

    fn from_str(line: &str) -> Result<LabeledPair> {
        let (pair, annotator) = match line.split_once('\t') {
            Some((p, a)) => (p, a.trim()),
            None => (line, ""),
        };
        let bad = || Error::validation(format!("malformed label {line:?}"));
        let (surface, rest) = pair.trim().split_once('/').ok_or_else(bad)?;
        let (stem, counts) = rest.rsplit_once(':').ok_or_else(bad)?;
        let (c, p) = counts.split_once('/').ok_or_else(bad)?;
        let c = c.parse().map_err(|_| bad())?;
        let p = p.parse().map_err(|_| bad())?;
        LabeledPair::new(surface, stem, c, p, annotator)
    }
}

pub fn parse_labels(source: &str) -> Result<Vec<LabeledPair>> {
    source
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| l.parse().map_err(|e: Error| Error::parse("labels", i + 1, e.to_string())))
        .collect()
}

pub fn format_labels(labels: &[LabeledPair]) -> String {
    let mut out = String::new();
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    out
}

/// The labels of one surface word reduced to a single decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordLabel {
    pub surface: String,
    /// Stem with the highest `chosen/proposed` (first on ties), if any stem
    /// was chosen.
    pub gold: Option<String>,
    pub annotator: String,
}

/// Groups labels by surface word, in order of first appearance.
pub fn group_labels(labels: &[LabeledPair]) -> Vec<WordLabel> {
    let mut order: Vec<&str> = Vec::new();
    let mut by_word: HashMap<&str, Vec<&LabeledPair>> = HashMap::new();
    for l in labels {
        by_word
            .entry(l.surface.as_str())
            .or_insert_with(|| {
                order.push(&l.surface);
                Vec::new()
            })
            .push(l);
    }
    order
        .into_iter()
        .map(|w| {
            let ls = &by_word[w];
            let best = ls
                .iter()
                .filter(|l| l.chosen > 0)
                .fold(None::<&&LabeledPair>, |acc, l| match acc {
                    Some(a) if u64::from(a.chosen) * u64::from(l.proposed) >= u64::from(l.chosen) * u64::from(a.proposed) => Some(a),
                    _ => Some(l),
                });
            WordLabel {
                surface: w.to_string(),
                gold: best.map(|l| l.stem.clone()),
                annotator: best.unwrap_or(&ls[0]).annotator.clone(),
            }
        })
        .collect()
}

/// Labels for one annotation: `chosen/proposed` per candidate stem, where
/// proposed is the number of analyses with that stem.
pub fn labels_for_choice(surface: &str, stems: &[&str], chosen: &str, annotator: &str) -> Result<Vec<LabeledPair>> {
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for s in stems {
        *counts.entry(s).or_default() += 1;
    }
    if !counts.contains_key(chosen) {
        return Err(Error::domain(format!("{chosen:?} is not a candidate stem of {surface:?}")));
    }
    let mut out: Vec<LabeledPair> = counts
        .iter()
        .map(|(s, &n)| LabeledPair::new(surface, s, if *s == chosen { n } else { 0 }, n, annotator))
        .collect::<Result<_>>()?;
    out.sort_by_key(|l| std::cmp::Reverse(l.chosen));
    Ok(out)
}

/// A label that could not be turned into an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reject {
    pub surface: String,
    pub stem: String,
    pub reason: String,
}

impl fmt::Display for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.surface, self.stem, self.reason)
    }
}

fn check_gold(analyzer: &Analyzer, w: &WordLabel) -> std::result::Result<Vec<crate::analyzer::Segmentation>, Reject> {
    let segs = analyzer.analyze(&w.surface);
    let gold = w.gold.as_deref().unwrap_or_default();
    let reason = if segs.is_empty() {
        "no analysis"
    } else if w.gold.is_none() {
        "no chosen stem"
    } else if !segs.iter().any(|s| s.stem() == gold) {
        "stem matches no analysis"
    } else {
        return Ok(segs);
    };
    Err(Reject {
        surface: w.surface.clone(),
        stem: gold.to_string(),
        reason: reason.to_string(),
    })
}

/// Selection statistics from labeled words. Words whose chosen stem matches
/// no analysis are returned as rejects.
pub fn build_stats(labels: &[LabeledPair], analyzer: &Analyzer) -> (StatTables, Vec<Reject>) {
    let mut tables = StatTables::new();
    let mut rejects = Vec::new();
    for w in group_labels(labels) {
        match check_gold(analyzer, &w) {
            Ok(segs) => {
                let gold = w.gold.as_deref().unwrap_or_default();
                tables
                    .update(segs.iter().map(|s| (s.stem(), analyzer.indicator_features(s))), gold)
                    .expect("gold checked");
            }
            Err(r) => rejects.push(r),
        }
    }
    (tables, rejects)
}

/// One word with its candidates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub surface: String,
    pub annotator: String,
    /// Serialized segmentations.
    pub analyses: Vec<String>,
    pub stems: Vec<String>,
    pub features: Vec<FeatureVector>,
    pub gold: Option<String>,
}

impl Instance {
    pub fn target(&self) -> Option<Vec<f64>> {
        model::targets(self.gold.as_deref()?, &self.stems).ok()
    }
}

/// Instances for every labeled word with a usable label; the rest are
/// rejected.
pub fn build_instances(
    labels: &[LabeledPair],
    extractor: &FeatureExtractor<'_>,
    tables: &StatTables,
) -> (Vec<Instance>, Vec<Reject>) {
    let analyzer = extractor.analyzer();
    let results: Vec<std::result::Result<Instance, Reject>> = group_labels(labels)
        .par_iter()
        .map(|w| {
            let segs = check_gold(analyzer, w)?;
            Ok(Instance {
                surface: w.surface.clone(),
                annotator: w.annotator.clone(),
                analyses: segs.iter().map(|s| s.serialize()).collect(),
                stems: segs.iter().map(|s| s.stem().to_string()).collect(),
                features: extractor.assemble_all(&w.surface, &segs, tables),
                gold: w.gold.clone(),
            })
        })
        .collect();
    let mut instances = Vec::new();
    let mut rejects = Vec::new();
    for r in results {
        match r {
            Ok(i) => instances.push(i),
            Err(r) => rejects.push(r),
        }
    }
    (instances, rejects)
}

/// Unlabeled instance for prediction.
pub fn unlabeled_instance(word: &str, extractor: &FeatureExtractor<'_>, tables: &StatTables) -> Option<Instance> {
    let segs = extractor.analyzer().analyze(word);
    if segs.is_empty() {
        return None;
    }
    Some(Instance {
        surface: word.to_string(),
        annotator: String::new(),
        analyses: segs.iter().map(|s| s.serialize()).collect(),
        stems: segs.iter().map(|s| s.stem().to_string()).collect(),
        features: extractor.assemble_all(word, &segs, tables),
        gold: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.70,
            dev: 0.15,
            test: 0.15,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.dev, self.test];
        if all.iter().any(|f| !(0.0..=1.0).contains(f)) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::validation("split fractions must be in [0,1] and sum to 1"));
        }
        Ok(())
    }

    /// Parses `0.7,0.15,0.15`.
    pub fn parse_ratios(text: &str, seed: u64) -> Result<SplitSpec> {
        let f: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::validation(format!("bad ratios {text:?}")))?;
        let [train, dev, test] = f.as_slice() else {
            return Err(Error::validation("expected three ratios"));
        };
        let s = SplitSpec {
            train: *train,
            dev: *dev,
            test: *test,
            seed,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Splits<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
}

/// Splits items by surface word: distinct words are shuffled with the seed
/// and cut at the rounded fractions, so no word crosses splits. Items keep
/// their input order within a split.
pub fn split_by<T>(items: Vec<T>, key: impl Fn(&T) -> &str, plan: &SplitSpec) -> Result<Splits<T>> {
    plan.validate()?;
    let mut words: Vec<String> = items.iter().map(|i| key(i).to_string()).collect();
    words.sort();
    words.dedup();
    words.shuffle(&mut ChaCha8Rng::seed_from_u64(plan.seed));
    let n = words.len();
    let n_train = (plan.train * n as f64).round() as usize;
    let n_dev = ((plan.dev * n as f64).round() as usize).min(n - n_train.min(n));
    let part: HashMap<String, u8> = words
        .into_iter()
        .enumerate()
        .map(|(i, w)| (w, if i < n_train { 0 } else if i < n_train + n_dev { 1 } else { 2 }))
        .collect();
    let mut out = Splits {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
    };
    for item in items {
        match part[key(&item)] {
            0 => out.train.push(item),
            1 => out.dev.push(item),
            _ => out.test.push(item),
        }
    }
    Ok(out)
}

pub fn split(instances: Vec<Instance>, plan: &SplitSpec) -> Result<Splits<Instance>> {
    split_by(instances, |i| &i.surface, plan)
}

/// Repeats each instance of `annotator` `factor` times in place.
pub fn upsample(instances: Vec<Instance>, annotator: &str, factor: usize) -> Vec<Instance> {
    let mut out = Vec::with_capacity(instances.len());
    for i in instances {
        if i.annotator == annotator && factor > 1 {
            out.extend(std::iter::repeat_n(i, factor));
        } else {
            out.push(i);
        }
    }
    out
}

/// Probability mass of one stem, summed over its segmentations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StemProb {
    pub stem: String,
    pub prob: f64,
    pub count: u32,
}

/// Model output for one word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordPrediction {
    pub word: String,
    /// Entropy of the distribution over segmentations, in nats.
    pub entropy: f64,
    /// Sorted by descending probability, then stem.
    pub stems: Vec<StemProb>,
}

/// Sums segmentation probabilities per stem.
pub fn aggregate_stems<S: AsRef<str>>(stems: &[S], probs: &[f64]) -> Vec<StemProb> {
    let mut acc: BTreeMap<&str, (f64, u32)> = BTreeMap::new();
    for (s, p) in stems.iter().zip(probs) {
        let e = acc.entry(s.as_ref()).or_default();
        e.0 += p;
        e.1 += 1;
    }
    let mut out: Vec<StemProb> = acc
        .into_iter()
        .map(|(stem, (prob, count))| StemProb {
            stem: stem.to_string(),
            prob,
            count,
        })
        .collect();
    out.sort_by(|a, b| b.prob.total_cmp(&a.prob).then_with(|| a.stem.cmp(&b.stem)));
    out
}

impl WordPrediction {
    pub fn new(word: &str, stems: &[String], probs: &[f64]) -> WordPrediction {
        WordPrediction {
            word: word.to_string(),
            entropy: model::entropy(probs),
            stems: aggregate_stems(stems, probs),
        }
    }

    pub fn stem_entropy(&self) -> f64 {
        model::entropy(&self.stems.iter().map(|s| s.prob).collect::<Vec<_>>())
    }

    pub fn top(&self) -> Option<&StemProb> {
        self.stems.first()
    }

    /// `word TAB entropy TAB stem:prob:count,...`
    pub fn to_tsv_line(&self) -> String {
        let stems: Vec<String> = self
            .stems
            .iter()
            .map(|s| format!("{}:{}:{}", s.stem, s.prob, s.count))
            .collect();
        format!("{}\t{}\t{}", self.word, self.entropy, stems.join(","))
    }

    pub fn parse_tsv_line(line: &str) -> Result<WordPrediction> {
        let bad = || Error::validation(format!("malformed prediction line {line:?}"));
        let f: Vec<&str> = line.split('\t').collect();
        let [word, h, stems] = f.as_slice() else {
            return Err(bad());
        };
        let entropy: f64 = h.parse().map_err(|_| bad())?;
        if word.is_empty() || !entropy.is_finite() || entropy < 0.0 {
            return Err(bad());
        }
        let stems = stems
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                let mut it = s.rsplitn(3, ':');
                let count = it.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
                let prob: f64 = it.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
                let stem = it.next().filter(|s| !s.is_empty()).ok_or_else(bad)?;
                if !(0.0..=1.0 + 1e-9).contains(&prob) {
                    return Err(bad());
                }
                Ok(StemProb {
                    stem: stem.to_string(),
                    prob,
                    count,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WordPrediction {
            word: word.to_string(),
            entropy,
            stems,
        })
    }
}

pub fn parse_predictions(source: &str) -> Result<Vec<WordPrediction>> {
    source
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| WordPrediction::parse_tsv_line(l).map_err(|e| Error::parse("predictions", i + 1, e.to_string())))
        .collect()
}

pub fn format_predictions(preds: &[WordPrediction]) -> String {
    let mut out = String::new();
    for p in preds {
        let _ = writeln!(out, "{}", p.to_tsv_line());
    }
    out
}

/// Words with entropy above `min_entropy`, most uncertain first (ties by
/// word), at most `top`.
pub fn select_uncertain(preds: &[WordPrediction], min_entropy: f64, top: usize) -> Vec<WordPrediction> {
    let mut out: Vec<WordPrediction> = preds.iter().filter(|p| p.entropy > min_entropy).cloned().collect();
    out.sort_by(|a, b| b.entropy.total_cmp(&a.entropy).then_with(|| a.word.cmp(&b.word)));
    out.truncate(top);
    out
}

/// Thresholds for pseudo-labeling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRule {
    pub min_p1: f64,
    pub min_stems: usize,
    pub min_gap: f64,
    pub max_entropy: f64,
}

impl Default for ConfidenceRule {
    fn default() -> Self {
        ConfidenceRule {
            min_p1: 0.95,
            min_stems: 3,
            min_gap: 0.95,
            max_entropy: 0.1,
        }
    }
}

impl ConfidenceRule {
    /// All four conditions on the stem-level distribution.
    pub fn accepts(&self, p: &WordPrediction) -> bool {
        let p1 = p.stems.first().map_or(0.0, |s| s.prob);
        let p2 = p.stems.get(1).map_or(0.0, |s| s.prob);
        p1 >= self.min_p1 && p.stems.len() >= self.min_stems && p1 - p2 > self.min_gap && p.stem_entropy() < self.max_entropy
    }
}

pub fn select_confident(preds: &[WordPrediction], rule: &ConfidenceRule) -> Vec<WordPrediction> {
    preds.iter().filter(|p| rule.accepts(p)).cloned().collect()
}

/// Pseudo-labels for confident predictions: the top stem is chosen.
pub fn pseudo_labels(preds: &[WordPrediction]) -> Vec<LabeledPair> {
    let mut out = Vec::new();
    for p in preds {
        for (i, s) in p.stems.iter().enumerate() {
            let count = s.count.max(1);
            out.push(LabeledPair {
                surface: p.word.clone(),
                stem: s.stem.clone(),
                chosen: if i == 0 { count } else { 0 },
                proposed: count,
                annotator: MODEL_ANNOTATOR.to_string(),
            });
        }
    }
    out
}

pub fn predict(model: &Mlp, instance: &Instance) -> WordPrediction {
    let p = model.predict(&instance.features);
    WordPrediction::new(&instance.surface, &instance.stems, &p.probs)
}

/// Whether the stem with the most aggregated probability is gold.
pub fn is_correct(model: &Mlp, instance: &Instance) -> bool {
    let pred = predict(model, instance);
    matches!((pred.top(), &instance.gold), (Some(t), Some(g)) if &t.stem == g)
}

/// Fraction of gold-labeled instances whose top stem is gold.
pub fn evaluate(model: &Mlp, instances: &[Instance]) -> Result<f64> {
    let labeled: Vec<&Instance> = instances.iter().filter(|i| i.gold.is_some()).collect();
    if labeled.is_empty() {
        return Err(Error::domain("no labeled instances to evaluate"));
    }
    let correct = labeled.par_iter().filter(|i| is_correct(model, i)).count();
    Ok(correct as f64 / labeled.len() as f64)
}

/// Mean loss and accuracy.
pub fn loss_and_accuracy(model: &Mlp, instances: &[Instance]) -> Result<(f64, f64)> {
    let data: Vec<(&Instance, Vec<f64>)> = instances.iter().filter_map(|i| Some((i, i.target()?))).collect();
    if data.is_empty() {
        return Err(Error::domain("no labeled instances to evaluate"));
    }
    let loss: f64 = data
        .par_iter()
        .map(|(i, t)| {
            model.loss(Example {
                candidates: &i.features,
                target: t,
            })
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let acc = evaluate(model, instances)?;
    Ok((loss / data.len() as f64, acc))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub main: Phase,
    pub finetune: Option<Phase>,
    /// Stop the main phase once dev accuracy reaches this value.
    pub target_dev_accuracy: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model: ModelConfig::default(),
            main: Phase {
                optimizer: OptimizerKind::Adam,
                lr: 0.01,
                batch: 256,
                epochs: 50,
            },
            finetune: None,
            target_dev_accuracy: None,
        }
    }
}

impl TrainConfig {
    /// Large-batch LAMB phase after the main one.
    pub fn lamb_finetune(lr: f64) -> Phase {
        Phase {
            optimizer: OptimizerKind::Lamb,
            lr,
            batch: 4000,
            epochs: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub epoch: usize,
    pub split: String,
    pub loss: f64,
    pub accuracy: f64,
}

pub fn format_metrics(rows: &[MetricRow]) -> String {
    let mut out = String::from("epoch,split,loss,accuracy\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.epoch, r.split, r.loss, r.accuracy);
    }
    out
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: Mlp,
    pub optimizer: Optimizer,
    pub metrics: Vec<MetricRow>,
}

/// Mini-batch training. Each epoch reshuffles the training set with a
/// stream seeded from the model seed; train and dev loss and accuracy are
/// logged after every epoch (epochs count on across phases).
pub fn train(train_set: &[Instance], dev_set: &[Instance], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let data: Vec<(&Instance, Vec<f64>)> = train_set.iter().filter_map(|i| Some((i, i.target()?))).collect();
    if data.is_empty() {
        return Err(Error::domain("empty training set"));
    }
    let mut model = Mlp::new(&cfg.model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.model.seed ^ 0x5eed);
    let mut metrics = Vec::new();
    let mut epoch = 0;
    let mut optimizer = Optimizer::new(cfg.main.optimizer, cfg.main.lr, model.tensors());
    let dev_labeled = dev_set.iter().any(|i| i.gold.is_some());
    let phases: Vec<(&Phase, bool)> = std::iter::once((&cfg.main, true))
        .chain(cfg.finetune.iter().map(|p| (p, false)))
        .collect();
    for (pi, (phase, is_main)) in phases.into_iter().enumerate() {
        if phase.batch == 0 || phase.lr <= 0.0 {
            return Err(Error::validation("batch size and learning rate must be positive"));
        }
        if pi > 0 {
            optimizer = Optimizer::new(phase.optimizer, phase.lr, model.tensors());
        }
        for _ in 0..phase.epochs {
            epoch += 1;
            let mut order: Vec<usize> = (0..data.len()).collect();
            order.shuffle(&mut rng);
            for chunk in order.chunks(phase.batch) {
                let batch: Vec<Example> = chunk
                    .iter()
                    .map(|&k| Example {
                        candidates: &data[k].0.features,
                        target: &data[k].1,
                    })
                    .collect();
                let (_, grad) = model.loss_and_grad(&batch);
                optimizer.step(model.tensors_mut(), &grad);
            }
            let (loss, acc) = loss_and_accuracy(&model, train_set)?;
            metrics.push(MetricRow {
                epoch,
                split: "train".into(),
                loss,
                accuracy: acc,
            });
            if dev_labeled {
                let (loss, acc) = loss_and_accuracy(&model, dev_set)?;
                metrics.push(MetricRow {
                    epoch,
                    split: "dev".into(),
                    loss,
                    accuracy: acc,
                });
                log::info!("epoch {epoch}: dev loss {loss:.4} accuracy {acc:.4}");
                if is_main && cfg.target_dev_accuracy.is_some_and(|t| acc >= t) {
                    break;
                }
            }
        }
    }
    Ok(TrainOutcome {
        model,
        optimizer,
        metrics,
    })
}

/// Instances whose gold stem is recoverable from the selection-ratio block
/// alone: the gold candidate's present indicators have positive ratios, the
/// others negative ones, and every other feature is noise.
pub fn synthetic_ratio_dataset(n: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = crate::features::NormalizerConfig::default();
    let ratio = crate::features::Family::Ratio;
    (0..n)
        .map(|k| {
            let m = rng.random_range(2..=6usize);
            let gold = rng.random_range(0..m);
            let stems: Vec<String> = (0..m).map(|j| format!("s{j}")).collect();
            let features = (0..m)
                .map(|j| {
                    let mut v: Vec<f64> = (0..FEATURE_COUNT).map(|_| rng.random::<f64>()).collect();
                    let mut present = Vec::new();
                    for f in 0..crate::analyzer::INDICATOR_COUNT {
                        let slot = RATIO_OFFSET + f;
                        if rng.random_bool(0.3) {
                            let r = if j == gold {
                                rng.random_range(0.2..1.0)
                            } else {
                                rng.random_range(-1.0..0.0)
                            };
                            v[slot] = cfg.sigma(r, ratio);
                            present.push(v[slot]);
                        } else {
                            v[slot] = 0.0;
                        }
                    }
                    if present.is_empty() {
                        present.push(cfg.sigma(0.0, ratio));
                    }
                    let means = crate::features::means(&present);
                    v[RATIO_MEANS..RATIO_MEANS + 3].copy_from_slice(&means);
                    FeatureVector::new(v).expect("64 values")
                })
                .collect();
            Instance {
                surface: format!("w{k}"),
                annotator: "synthetic".into(),
                analyses: stems.clone(),
                stems,
                features,
                gold: Some(format!("s{gold}")),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pred(word: &str, h: f64, probs: &[f64]) -> WordPrediction {
        let stems: Vec<String> = (0..probs.len()).map(|i| format!("s{i}")).collect();
        WordPrediction {
            word: word.into(),
            entropy: h,
            stems: aggregate_stems(&stems, probs),
        }
    }

    #[test]
    fn label_lines() {
        let l: LabeledPair = "gatwikirwa/twikir:1/1\tann7".parse().unwrap();
        assert_eq!(l.stem, "twikir");
        assert_eq!(l.annotator, "ann7");
        assert_eq!(l.to_string(), "gatwikirwa/twikir:1/1\tann7");
        let l: LabeledPair = "gatwikirwa/twikirw:0/2".parse().unwrap();
        assert_eq!((l.chosen, l.proposed, l.annotator.as_str()), (0, 2, ""));
        for bad in ["x", "a/b:2/1", "a/b:0/0", "a/b:1", "/b:1/1", "a/b:x/1"] {
            assert!(bad.parse::<LabeledPair>().is_err(), "{bad}");
        }
        assert!(matches!(parse_labels("a/b:1/1\nbad\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn choice_labels() {
        let stems = ["twikirw", "twikir", "twikirw", "kir"];
        let ls = labels_for_choice("gatwikirwa", &stems, "twikir", "a").unwrap();
        let text: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
        assert_eq!(text, ["gatwikirwa/twikir:1/1\ta", "gatwikirwa/kir:0/1\ta", "gatwikirwa/twikirw:0/2\ta"]);
        assert!(labels_for_choice("x", &stems, "zzz", "a").is_err());
        let g = group_labels(&ls);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].gold.as_deref(), Some("twikir"));
    }

    #[test]
    fn gatwikirwa_instance() {
        let analyzer = Analyzer::default_kinyarwanda();
        let corpus = crate::corpus::CorpusStore::default();
        let fx = FeatureExtractor::new(
            &analyzer,
            &corpus,
            crate::analyzer::Template::default_list(),
            Default::default(),
            Default::default(),
        )
        .unwrap();
        let labels = parse_labels("gatwikirwa/twikir:1/1\nxyz/abc:1/1\n").unwrap();
        let (tables, rejects) = build_stats(&labels, &analyzer);
        assert_eq!(rejects.len(), 1);
        assert_eq!(tables.get(24, "twikir"), (1, 1));
        let (inst, rejects) = build_instances(&labels, &fx, &tables);
        assert_eq!(rejects[0].surface, "xyz");
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].features.len(), 6);
        let t = inst[0].target().unwrap();
        assert_eq!(t.iter().filter(|&&p| p == 1.0).count(), 1);
        let gi = inst[0].stems.iter().position(|s| s == "twikir").unwrap();
        assert_eq!(t[gi], 1.0);
    }

    #[test]
    fn splits() {
        let items: Vec<String> = (0..100).map(|i| format!("w{i:03}")).collect();
        let s = split_by(items.clone(), |s| s, &SplitSpec { seed: 7, ..Default::default() }).unwrap();
        assert_eq!((s.train.len(), s.dev.len(), s.test.len()), (70, 15, 15));
        let again = split_by(items, |s| s, &SplitSpec { seed: 7, ..Default::default() }).unwrap();
        assert_eq!(s, again);
        let one = split_by(vec!["a".to_string()], |s| s, &SplitSpec::default()).unwrap();
        assert_eq!(one.train.len(), 1);
        assert!(SplitSpec::parse_ratios("0.7,0.2,0.2", 0).is_err());
        assert!(SplitSpec::parse_ratios("0.7,0.15,0.15", 0).is_ok());
    }

    #[test]
    fn upsampling() {
        let mut data = synthetic_ratio_dataset(10, 1);
        data[2].annotator = "best".into();
        data[5].annotator = "best".into();
        let up = upsample(data.clone(), "best", 4);
        assert_eq!(up.len(), 16);
        assert_eq!(up[2..6].iter().filter(|i| i.surface == "w2").count(), 4);
        assert_eq!(upsample(data.clone(), "best", 1), data);
        assert_eq!(upsample(data.clone(), "nobody", 4), data);
    }

    #[test]
    fn confident_examples() {
        let rule = ConfidenceRule::default();
        let p = pred("a", 0.0, &[0.99, 0.005, 0.005]);
        assert_abs_diff_eq!(p.stem_entropy(), 0.062_933_006_160_446_8, epsilon = 1e-12);
        assert!(rule.accepts(&p));
        assert!(!rule.accepts(&pred("a", 0.0, &[0.97, 0.02, 0.01])));
        assert!(!rule.accepts(&pred("a", 0.0, &[0.98, 0.01, 0.01])));
        assert!(!rule.accepts(&pred("a", 0.0, &[0.99, 0.01])));
        assert!(!rule.accepts(&pred("a", 0.0, &[0.25; 4])));
        let pl = pseudo_labels(&[p]);
        assert_eq!(pl[0].to_string(), "a/s0:1/1\tmodel");
        assert_eq!(pl[1].chosen, 0);
    }

    #[test]
    fn uncertain_order() {
        let ps = vec![pred("b", 1.5, &[0.5, 0.5]), pred("a", 1.5, &[0.5, 0.5]), pred("c", 0.9, &[1.0]), pred("d", 2.0, &[1.0])];
        let words: Vec<String> = select_uncertain(&ps, 1.0, 10).into_iter().map(|p| p.word).collect();
        assert_eq!(words, ["d", "a", "b"]);
        assert_eq!(select_uncertain(&ps, 1.0, 2).len(), 2);
        assert!(select_uncertain(&ps, 5.0, 10).is_empty());
    }

    #[test]
    fn prediction_lines() {
        let p = pred("gatwikirwa", 1.25, &[0.5, 0.3, 0.2]);
        let back = WordPrediction::parse_tsv_line(&p.to_tsv_line()).unwrap();
        assert_eq!(back, p);
        assert!(WordPrediction::parse_tsv_line("w\tnan\ts:1:1").is_err());
        assert!(WordPrediction::parse_tsv_line("w\t1").is_err());
        assert!(WordPrediction::parse_tsv_line("w\t1\ts:2.0:1").is_err());
    }

    #[test]
    fn synthetic_layout() {
        let cfg = crate::features::NormalizerConfig::default();
        let neutral = cfg.sigma(0.0, crate::features::Family::Ratio);
        for inst in synthetic_ratio_dataset(50, 9) {
            let gold = inst.stems.iter().position(|s| Some(s) == inst.gold.as_ref()).unwrap();
            for (j, v) in inst.features.iter().enumerate() {
                let v = v.values();
                let present: Vec<f64> = v[RATIO_OFFSET..RATIO_OFFSET + 47].iter().copied().filter(|&x| x > 0.0).collect();
                let want = if present.is_empty() { crate::features::means(&[neutral]) } else { crate::features::means(&present) };
                assert_eq!(&v[RATIO_MEANS..RATIO_MEANS + 3], &want);
                assert!(present.iter().all(|&x| (x > neutral) == (j == gold)));
            }
        }
    }

    #[test]
    fn single_instance_memorized() {
        let data = synthetic_ratio_dataset(1, 3);
        let cfg = TrainConfig {
            main: Phase {
                epochs: 30,
                ..TrainConfig::default().main
            },
            ..Default::default()
        };
        let out = train(&data, &[], &cfg).unwrap();
        assert_eq!(evaluate(&out.model, &data).unwrap(), 1.0);
        assert!(train(&[], &[], &cfg).is_err());
        assert!(evaluate(&out.model, &[]).is_err());
    }

    #[test]
    fn training_is_reproducible() {
        let data = synthetic_ratio_dataset(60, 4);
        let cfg = TrainConfig {
            model: ModelConfig { hidden: vec![6, 3], seed: 5 },
            main: Phase {
                epochs: 3,
                batch: 16,
                ..TrainConfig::default().main
            },
            finetune: Some(Phase {
                epochs: 2,
                ..TrainConfig::lamb_finetune(0.001)
            }),
            target_dev_accuracy: None,
        };
        let a = train(&data[..40], &data[40..], &cfg).unwrap();
        let b = train(&data[..40], &data[40..], &cfg).unwrap();
        assert_eq!(format_metrics(&a.metrics), format_metrics(&b.metrics));
        assert_eq!(a.model, b.model);
        assert_eq!(a.metrics.len(), 10);
    }
}
