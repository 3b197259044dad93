//! Disambiguation features: normalizing sigmoid, similarity and frequency
//! features, chosen/proposed statistics and the 64-value input vector.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analyzer::{Analyzer, IndicatorSet, Inflection, Segmentation, Template, INDICATOR_COUNT, INDICATOR_KEYS};
use crate::corpus::CorpusStore;
use crate::error::{Error, Result};

/// Length of a feature vector.
pub const FEATURE_COUNT: usize = 64;
/// Offset of the three ratio means.
pub const RATIO_MEANS: usize = 11;
/// Offset of the first per-indicator ratio.
pub const RATIO_OFFSET: usize = 14;
pub const TEMPLATE_POPULARITY: usize = 61;
pub const SMALL_LEXICON: usize = 62;
pub const LARGE_LEXICON: usize = 63;

/// Smallest input accepted by the geometric and harmonic means.
const MEAN_FLOOR: f64 = 1e-6;

/// `[1 + exp(-8 (z - min) / (max - min))]^-8`.
pub fn norm_sigmoid(z: f64, min: f64, max: f64) -> f64 {
    (1.0 + (-8.0 * (z - min) / (max - min)).exp()).powi(-8)
}

/// Arithmetic, geometric and harmonic means. Inputs of the last two are
/// floored at 1e-6.
pub fn means(values: &[f64]) -> [f64; 3] {
    let n = values.len() as f64;
    let arith = values.iter().sum::<f64>() / n;
    let geo = (values.iter().map(|v| v.max(MEAN_FLOOR).ln()).sum::<f64>() / n).exp();
    let harm = n / values.iter().map(|v| 1.0 / v.max(MEAN_FLOOR)).sum::<f64>();
    [arith, geo, harm]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Similarity,
    Count,
    Ratio,
    Distance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn new(min: f64, max: f64) -> Result<Range> {
        if max <= min || !min.is_finite() || !max.is_finite() {
            return Err(Error::validation(format!("normalizer range ({min}, {max}) must have max > min")));
        }
        Ok(Range { min, max })
    }
}

/// Active range of the sigmoid for each feature family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizerConfig {
    pub similarity: Range,
    pub count: Range,
    pub ratio: Range,
    pub distance: Range,
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        NormalizerConfig {
            similarity: Range { min: 0.0, max: 1.0 },
            count: Range { min: 0.0, max: 10000.0 },
            ratio: Range { min: -1.0, max: 1.0 },
            distance: Range { min: 0.0, max: 1.0 },
        }
    }
}

impl NormalizerConfig {
    pub fn range(&self, family: Family) -> Range {
        match family {
            Family::Similarity => self.similarity,
            Family::Count => self.count,
            Family::Ratio => self.ratio,
            Family::Distance => self.distance,
        }
    }

    pub fn sigma(&self, z: f64, family: Family) -> f64 {
        let r = self.range(family);
        norm_sigmoid(z, r.min, r.max)
    }
}

/// How many inflections are generated and used, and what to emit for
/// missing data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyContext {
    pub k: usize,
    pub n: usize,
    pub neutral_similarity: f64,
    pub absent_ratio: f64,
}

impl Default for AssemblyContext {
    fn default() -> Self {
        AssemblyContext {
            k: 10,
            n: 64,
            neutral_similarity: 0.5,
            absent_ratio: 0.0,
        }
    }
}

impl AssemblyContext {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return Err(Error::validation(format!("need 1 <= K <= N, got K={} N={}", self.k, self.n)));
        }
        Ok(())
    }
}

/// Selection statistics per (indicator feature, stem): `chosen` may go
/// negative, `proposed` counts every time the pair was offered.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StatTables {
    entries: BTreeMap<(u8, String), (i64, u64)>,
}

impl StatTables {
    pub fn new() -> StatTables {
        StatTables::default()
    }

    /// Records one annotation: every feature of every analysis is proposed
    /// once for that analysis's stem, and counts for or against the stem
    /// depending on whether it was chosen.
    pub fn update<'a, I>(&mut self, analyses: I, chosen_stem: &str) -> Result<()>
    where
        I: IntoIterator<Item = (&'a str, IndicatorSet)>,
    {
        let analyses: Vec<_> = analyses.into_iter().collect();
        if !analyses.iter().any(|(s, _)| *s == chosen_stem) {
            return Err(Error::domain(format!("chosen stem {chosen_stem:?} is not among the analyses")));
        }
        for (stem, set) in analyses {
            let delta = if stem == chosen_stem { 1 } else { -1 };
            for f in set.numbers() {
                let e = self.entries.entry((f, stem.to_string())).or_insert((0, 0));
                e.0 += delta;
                e.1 += 1;
            }
        }
        Ok(())
    }

    /// `(chosen, proposed)`, zero for unseen pairs.
    pub fn get(&self, feature: u8, stem: &str) -> (i64, u64) {
        self.entries
            .get(&(feature, stem.to_string()))
            .copied()
            .unwrap_or((0, 0))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn merge(&mut self, other: &StatTables) {
        for (k, (c, p)) in &other.entries {
            let e = self.entries.entry(k.clone()).or_insert((0, 0));
            e.0 += c;
            e.1 += p;
        }
    }

    /// `feature_no TAB stem TAB chosen TAB proposed`, sorted.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for ((f, s), (c, p)) in &self.entries {
            let _ = writeln!(out, "{f}\t{s}\t{c}\t{p}");
        }
        out
    }

    pub fn parse(source: &str) -> Result<StatTables> {
        const WHAT: &str = "stat tables";
        let mut t = StatTables::new();
        for (i, line) in source.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::parse(WHAT, i + 1, m);
            let f: Vec<&str> = line.split('\t').collect();
            let [feat, stem, chosen, proposed] = f.as_slice() else {
                return Err(err("expected 4 tab-separated fields"));
            };
            let feat: u8 = feat.parse().map_err(|_| err("bad feature number"))?;
            if !(1..=INDICATOR_COUNT as u8).contains(&feat) {
                return Err(err("feature number out of range"));
            }
            let chosen: i64 = chosen.parse().map_err(|_| err("bad chosen count"))?;
            let proposed: u64 = proposed.parse().map_err(|_| err("bad proposed count"))?;
            if chosen.unsigned_abs() > proposed {
                return Err(err("|chosen| exceeds proposed"));
            }
            t.entries.insert((feat, stem.to_string()), (chosen, proposed));
        }
        Ok(t)
    }
}

/// Means over the present indicators and the 47 per-indicator selection
/// ratios of one analysis.
pub fn ratio_features(
    tables: &StatTables,
    stem: &str,
    set: IndicatorSet,
    cfg: &NormalizerConfig,
    ctx: &AssemblyContext,
) -> ([f64; 3], [f64; INDICATOR_COUNT]) {
    let mut per = [ctx.absent_ratio; INDICATOR_COUNT];
    let mut present = Vec::new();
    for f in set.numbers() {
        let (c, p) = tables.get(f, stem);
        let ratio = if p == 0 { 0.0 } else { c as f64 / p as f64 };
        let v = cfg.sigma(ratio, Family::Ratio);
        per[usize::from(f) - 1] = v;
        present.push(v);
    }
    if present.is_empty() {
        present.push(cfg.sigma(0.0, Family::Ratio));
    }
    (means(&present), per)
}

/// Fixed-length input vector of the scorer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<FeatureVector> {
        if values.len() != FEATURE_COUNT {
            return Err(Error::validation(format!(
                "feature vector has {} values, expected {FEATURE_COUNT}",
                values.len()
            )));
        }
        Ok(FeatureVector(values))
    }

    pub fn zeros() -> FeatureVector {
        FeatureVector(vec![0.0; FEATURE_COUNT])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    /// Comma-separated values using the shortest round-tripping notation.
    pub fn to_csv_row(&self) -> String {
        let cells: Vec<String> = self.0.iter().map(f64::to_string).collect();
        cells.join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<FeatureVector> {
        let values = row
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::validation(format!("bad feature value: {e}")))?;
        FeatureVector::new(values)
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        FeatureVector::new(v)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

/// Column names of the feature vector.
pub fn feature_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "sim_arith", "sim_geo", "sim_harm", "freq_dist", "pop_arith", "pop_geo", "pop_harm", "pop_word",
        "all_arith", "all_geo", "all_harm", "ratio_arith", "ratio_geo", "ratio_harm",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    names.extend(INDICATOR_KEYS.iter().map(|k| format!("ratio_{k}")));
    names.extend(["template_popularity", "small_lexicon", "large_lexicon"].map(String::from));
    names
}

pub fn csv_header() -> String {
    feature_names().join(",")
}

/// Features that depend only on the word and the candidate stem.
#[derive(Clone, Debug, PartialEq)]
pub struct StemBlock {
    /// Indices 0..=10 and 61..=63 of the vector.
    pub similarity: [f64; 11],
    pub template_popularity: f64,
    pub small: bool,
    pub large: bool,
    /// The K nearest inflections with their `d_e`.
    pub nearest: Vec<(Inflection, f64)>,
}

/// Computes feature vectors against fixed corpus resources.
#[derive(Clone, Debug)]
pub struct FeatureExtractor<'a> {
    analyzer: &'a Analyzer,
    corpus: &'a CorpusStore,
    templates: Vec<Template>,
    cfg: NormalizerConfig,
    ctx: AssemblyContext,
    template_popularity: Vec<f64>,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(
        analyzer: &'a Analyzer,
        corpus: &'a CorpusStore,
        templates: Vec<Template>,
        cfg: NormalizerConfig,
        ctx: AssemblyContext,
    ) -> Result<FeatureExtractor<'a>> {
        ctx.validate()?;
        let mut stems: Vec<&str> = corpus.large.iter().collect();
        stems.sort_unstable();
        let template_popularity = templates
            .iter()
            .map(|t| {
                let single = std::slice::from_ref(t);
                let (mut total, mut n) = (0u64, 0u64);
                for stem in &stems {
                    for inf in analyzer.inflection_set(stem, single, |_| true, 1) {
                        total += corpus.frequencies.counts(&inf.surface).0;
                        n += 1;
                    }
                }
                if n == 0 { 0.0 } else { total as f64 / n as f64 }
            })
            .collect();
        Ok(FeatureExtractor {
            analyzer,
            corpus,
            templates,
            cfg,
            ctx,
            template_popularity,
        })
    }

    pub fn config(&self) -> &NormalizerConfig {
        &self.cfg
    }

    pub fn context(&self) -> &AssemblyContext {
        &self.ctx
    }

    pub fn analyzer(&self) -> &Analyzer {
        self.analyzer
    }

    /// Mean token count of the forms each template produces over the large
    /// lexicon.
    pub fn template_popularity(&self) -> &[f64] {
        &self.template_popularity
    }

    /// Normalized angular similarity; the neutral value when either word has
    /// no embedding.
    pub fn d_e(&self, x: &str, y: &str) -> f64 {
        match self.corpus.embeddings.angular_similarity(x, y) {
            Some(s) => self.cfg.sigma(s, Family::Similarity),
            None => self.ctx.neutral_similarity,
        }
    }

    /// `(t_c, t_d)`: normalized token and document counts.
    pub fn frequency_point(&self, word: &str) -> (f64, f64) {
        let (t, d) = self.corpus.frequencies.counts(word);
        (self.cfg.sigma(t as f64, Family::Count), self.cfg.sigma(d as f64, Family::Count))
    }

    /// Corpus-attested inflections of `stem`, at most N.
    pub fn inflections(&self, stem: &str) -> Vec<Inflection> {
        let corpus = self.corpus;
        self.analyzer.inflection_set(
            stem,
            &self.templates,
            |w| corpus.embeddings.contains(w) || corpus.frequencies.counts(w).0 > 0,
            self.ctx.n,
        )
    }

    /// The K inflections most similar to `x`, by descending `d_e` with ties
    /// in generation order.
    pub fn nearest(&self, x: &str, inflections: Vec<Inflection>) -> Vec<(Inflection, f64)> {
        let mut scored: Vec<(Inflection, f64)> = inflections
            .into_iter()
            .map(|y| {
                let d = self.d_e(x, &y.surface);
                (y, d)
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        scored.truncate(self.ctx.k);
        scored
    }

    /// The three means of `d_e` over the nearest set, or the neutral triple when empty.
    pub fn similarity_feature(&self, nearest: &[(Inflection, f64)]) -> [f64; 3] {
        if nearest.is_empty() {
            return [self.ctx.neutral_similarity; 3];
        }
        let d: Vec<f64> = nearest.iter().map(|(_, d)| *d).collect();
        means(&d)
    }

    /// Normalized mean distance between the frequency points of `x` and the
    /// nearest inflections.
    pub fn d_t(&self, x: &str, nearest: &[(Inflection, f64)]) -> f64 {
        if nearest.is_empty() {
            return self.ctx.neutral_similarity;
        }
        let (xc, xd) = self.frequency_point(x);
        let total: f64 = nearest
            .iter()
            .map(|(y, _)| {
                let (yc, yd) = self.frequency_point(&y.surface);
                ((xc - yc).powi(2) + (xd - yd).powi(2)).sqrt()
            })
            .sum();
        self.cfg.sigma(total / nearest.len() as f64, Family::Distance)
    }

    /// Means of the nearest inflections' popularity, and the popularity of
    /// `x` itself.
    pub fn popularity_features(&self, x: &str, nearest: &[(Inflection, f64)]) -> ([f64; 3], f64) {
        let pop = |w: &str| {
            let (c, d) = self.frequency_point(w);
            (c + d) / 2.0
        };
        let own = pop(x);
        if nearest.is_empty() {
            return ([self.ctx.neutral_similarity; 3], own);
        }
        let p: Vec<f64> = nearest.iter().map(|(y, _)| pop(&y.surface)).collect();
        (means(&p), own)
    }

    pub fn stem_block(&self, word: &str, stem: &str) -> StemBlock {
        let nearest = self.nearest(word, self.inflections(stem));
        let sim = self.similarity_feature(&nearest);
        let dt = self.d_t(word, &nearest);
        let (pop, own) = self.popularity_features(word, &nearest);
        let mut similarity = [0.0; 11];
        similarity[..3].copy_from_slice(&sim);
        similarity[3] = dt;
        similarity[4..7].copy_from_slice(&pop);
        similarity[7] = own;
        let all = means(&similarity[..8]);
        similarity[8..11].copy_from_slice(&all);
        let template_popularity = if nearest.is_empty() {
            self.ctx.neutral_similarity
        } else {
            let sum: f64 = nearest.iter().map(|(y, _)| self.template_popularity[y.template]).sum();
            self.cfg.sigma(sum / nearest.len() as f64, Family::Count)
        };
        StemBlock {
            similarity,
            template_popularity,
            small: self.corpus.small.contains(stem),
            large: self.corpus.large.contains(stem),
            nearest,
        }
    }

    /// Puts a stem block and an analysis's indicator features together.
    pub fn combine(&self, block: &StemBlock, stem: &str, set: IndicatorSet, tables: &StatTables) -> FeatureVector {
        let (ratio_means, per) = ratio_features(tables, stem, set, &self.cfg, &self.ctx);
        let mut v = Vec::with_capacity(FEATURE_COUNT);
        v.extend_from_slice(&block.similarity);
        v.extend_from_slice(&ratio_means);
        v.extend_from_slice(&per);
        v.push(block.template_popularity);
        v.push(f64::from(u8::from(block.small)));
        v.push(f64::from(u8::from(block.large)));
        FeatureVector(v)
    }

    pub fn assemble(&self, word: &str, candidate: &Segmentation, tables: &StatTables) -> FeatureVector {
        let block = self.stem_block(word, candidate.stem());
        let set = self.analyzer.indicator_features(candidate);
        self.combine(&block, candidate.stem(), set, tables)
    }

    /// Vectors for all candidates of a word, sharing per-stem work.
    pub fn assemble_all(&self, word: &str, candidates: &[Segmentation], tables: &StatTables) -> Vec<FeatureVector> {
        let mut blocks: HashMap<&str, StemBlock> = HashMap::new();
        candidates
            .iter()
            .map(|c| {
                let block = blocks
                    .entry(c.stem())
                    .or_insert_with(|| self.stem_block(word, c.stem()));
                self.combine(block, c.stem(), self.analyzer.indicator_features(c), tables)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EmbeddingTable, FrequencyTable, Lexicon};
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigmoid_points() {
        assert_abs_diff_eq!(norm_sigmoid(0.0, 0.0, 1.0), 0.00390625, epsilon = 1e-15);
        assert_abs_diff_eq!(norm_sigmoid(1.0, 0.0, 1.0), 0.997_321, epsilon = 1e-6);
        assert_abs_diff_eq!(norm_sigmoid(0.5, 0.0, 1.0), 0.864_849_804_673_413, epsilon = 1e-12);
        assert!(norm_sigmoid(0.3, 0.0, 1.0) < norm_sigmoid(0.31, 0.0, 1.0));
    }

    #[test]
    fn mean_values() {
        let m = means(&[0.2, 0.8]);
        assert_abs_diff_eq!(m[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(m[2], 0.32, epsilon = 1e-15);
        assert_eq!(means(&[0.3; 4]).map(|v| (v * 1e12).round()), [0.3e12; 3]);
        let z = means(&[0.0, 1.0]);
        assert!(z[1] > 0.0 && z[2] > 0.0);
    }

    #[test]
    fn range_validation() {
        assert!(Range::new(1.0, 1.0).is_err());
        assert!(Range::new(0.0, 1.0).is_ok());
        let ctx = AssemblyContext { k: 5, n: 4, ..Default::default() };
        assert!(ctx.validate().is_err());
    }

    #[test]
    fn ratio_cases() {
        let cfg = NormalizerConfig::default();
        let ctx = AssemblyContext::default();
        let mut t = StatTables::new();
        let set = IndicatorSet::from_numbers(&[1, 24]);
        t.update([("twikir", set), ("kir", IndicatorSet::from_numbers(&[1]))], "twikir")
            .unwrap();
        let (m, per) = ratio_features(&t, "twikir", set, &cfg, &ctx);
        assert_abs_diff_eq!(per[0], cfg.sigma(1.0, Family::Ratio), epsilon = 1e-15);
        assert_abs_diff_eq!(per[23], cfg.sigma(1.0, Family::Ratio), epsilon = 1e-15);
        assert_eq!(per[1], 0.0);
        assert_abs_diff_eq!(m[0], cfg.sigma(1.0, Family::Ratio), epsilon = 1e-12);

        let (_, per) = ratio_features(&t, "kir", IndicatorSet::from_numbers(&[1]), &cfg, &ctx);
        assert_abs_diff_eq!(per[0], cfg.sigma(-1.0, Family::Ratio), epsilon = 1e-15);
        assert!(per[0] < cfg.sigma(0.0, Family::Ratio));

        let (m, per) = ratio_features(&t, "nope", IndicatorSet::from_numbers(&[2]), &cfg, &ctx);
        assert_abs_diff_eq!(per[1], cfg.sigma(0.0, Family::Ratio), epsilon = 1e-15);
        assert_abs_diff_eq!(m[1], cfg.sigma(0.0, Family::Ratio), epsilon = 1e-12);

        let (m, _) = ratio_features(&t, "nope", IndicatorSet::new(), &cfg, &ctx);
        assert_abs_diff_eq!(m[2], cfg.sigma(0.0, Family::Ratio), epsilon = 1e-15);
    }

    #[test]
    fn stat_tables_persist() {
        let mut t = StatTables::new();
        assert!(t.update([("a", IndicatorSet::from_numbers(&[1]))], "b").is_err());
        t.update(
            [
                ("a", IndicatorSet::from_numbers(&[1, 2])),
                ("b", IndicatorSet::from_numbers(&[1])),
            ],
            "b",
        )
        .unwrap();
        let text = t.to_tsv();
        assert_eq!(text, "1\ta\t-1\t1\n1\tb\t1\t1\n2\ta\t-1\t1\n");
        assert_eq!(StatTables::parse(&text).unwrap(), t);
        assert!(StatTables::parse("48\ta\t0\t0\n").is_err());
        assert!(StatTables::parse("1\ta\t-3\t2\n").is_err());
    }

    #[test]
    fn vector_round_trip() {
        let v = FeatureVector::new((0..64).map(|i| i as f64 / 64.0).collect()).unwrap();
        assert_eq!(FeatureVector::from_csv_row(&v.to_csv_row()).unwrap(), v);
        assert!(FeatureVector::new(vec![0.0; 63]).is_err());
        assert_eq!(feature_names().len(), FEATURE_COUNT);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<FeatureVector>(&json).unwrap(), v);
        assert!(serde_json::from_str::<FeatureVector>("[1.0]").is_err());
    }

    #[test]
    fn empty_inflections_are_neutral() {
        let analyzer = Analyzer::default_kinyarwanda();
        let corpus = CorpusStore::new(
            EmbeddingTable::new(2),
            FrequencyTable::default(),
            Lexicon::default(),
            Lexicon::default(),
        );
        let fx = FeatureExtractor::new(
            &analyzer,
            &corpus,
            Template::default_list(),
            NormalizerConfig::default(),
            AssemblyContext::default(),
        )
        .unwrap();
        let segs = analyzer.analyze("gatwikirwa");
        let vs = fx.assemble_all("gatwikirwa", &segs, &StatTables::new());
        assert_eq!(vs.len(), 6);
        for v in &vs {
            assert_eq!(v.values().len(), FEATURE_COUNT);
            assert!(v.values().iter().all(|x| (0.0..=1.0).contains(x)));
            assert_eq!(&v.values()[..7], &[0.5; 7]);
        }
        assert_eq!(vs[0], fx.assemble("gatwikirwa", &segs[0], &StatTables::new()));
    }

    #[test]
    fn gatwikirwa_event_deltas() {
        let analyzer = Analyzer::default_kinyarwanda();
        let segs = analyzer.analyze("gatwikirwa");
        let mut t = StatTables::new();
        t.update(segs.iter().map(|s| (s.stem(), analyzer.indicator_features(s))), "twikir")
            .unwrap();
        assert_eq!(t.get(24, "twikir"), (1, 1));
        assert_eq!(t.get(8, "kir"), (-1, 1));
        assert_eq!(t.get(1, "twikirw"), (-2, 2));
    }
}
