//! A three-word corpus small enough to evaluate every feature by hand.

use kinmorph::analyzer::{IndicatorSet, Template};
use kinmorph::corpus::{CorpusStore, EmbeddingTable, FrequencyTable, Lexicon};
use kinmorph::features::StatTables;

pub fn sigma(z: f64, min: f64, max: f64) -> f64 {
    1.0 / (1.0 + (-8.0 * (z - min) / (max - min)).exp()).powi(8)
}

pub fn sim(z: f64) -> f64 {
    sigma(z, 0.0, 1.0)
}

pub fn count(z: f64) -> f64 {
    sigma(z, 0.0, 10000.0)
}

pub fn ratio(z: f64) -> f64 {
    sigma(z, -1.0, 1.0)
}

pub fn three_means(v: &[f64]) -> [f64; 3] {
    let n = v.len() as f64;
    let a = v.iter().sum::<f64>() / n;
    let g = v.iter().map(|x| x.max(1e-6)).product::<f64>().powf(1.0 / n);
    let h = n / v.iter().map(|x| 1.0 / x.max(1e-6)).sum::<f64>();
    [a, g, h]
}

pub fn corpus() -> CorpusStore {
    let mut emb = EmbeddingTable::new(2);
    emb.insert("gatwikirwa".into(), vec![1.0, 0.0]).unwrap();
    emb.insert("gutwikira".into(), vec![0.0, 3.0]).unwrap();
    emb.insert("yaratwikiye".into(), vec![2.0, 2.0]).unwrap();
    let mut freq = FrequencyTable::default();
    freq.insert("gatwikirwa", 30, 3).unwrap();
    freq.insert("gutwikira", 5000, 100).unwrap();
    freq.insert("gusoma", 200, 10).unwrap();
    CorpusStore::new(
        emb,
        freq,
        Lexicon::from_stems(["twikir"]),
        Lexicon::from_stems(["som", "twikir"]),
    )
}

pub fn templates() -> Vec<Template> {
    Template::parse_list("SUBJ:ku/19,ASP:a\nSUBJ:a/4,TAM:ara,ASP:ye\n").unwrap()
}

/// One annotation: twikir chosen over kir.
pub fn tables() -> StatTables {
    let mut t = StatTables::new();
    t.update(
        [("twikir", IndicatorSet::from_numbers(&[1, 24])), ("kir", IndicatorSet::from_numbers(&[1, 8]))],
        "twikir",
    )
    .unwrap();
    t
}

pub fn expected_twikir() -> Vec<f64> {
    // yaratwikiye is at 45 degrees from gatwikirwa, gutwikira at 90.
    let d = [sim(0.75), sim(0.5)];
    let x = (count(30.0), count(3.0));
    let ys = [(count(0.0), count(0.0)), (count(5000.0), count(100.0))];
    let dist: f64 = ys.iter().map(|y| ((x.0 - y.0).powi(2) + (x.1 - y.1).powi(2)).sqrt()).sum::<f64>() / 2.0;
    let pops: Vec<f64> = ys.iter().map(|y| (y.0 + y.1) / 2.0).collect();
    let mut v = Vec::new();
    v.extend(three_means(&d));
    v.push(sigma(dist, 0.0, 1.0));
    v.extend(three_means(&pops));
    v.push((x.0 + x.1) / 2.0);
    let first8 = v.clone();
    v.extend(three_means(&first8));
    let present = [ratio(1.0), ratio(0.0), ratio(1.0)];
    v.extend(three_means(&present));
    let mut per = [0.0; 47];
    per[0] = ratio(1.0);
    per[4] = ratio(0.0);
    per[23] = ratio(1.0);
    v.extend(per);
    // Template popularity: (gusoma + gutwikira) / 2 for the first template,
    // nothing for the second.
    v.push(count((2600.0 + 0.0) / 2.0));
    v.extend([1.0, 1.0]);
    v
}

pub fn expected_kir() -> Vec<f64> {
    let own = (count(30.0) + count(3.0)) / 2.0;
    let mut v = vec![0.5; 7];
    v.push(own);
    let first8 = v.clone();
    v.extend(three_means(&first8));
    v.extend(three_means(&[ratio(-1.0), ratio(-1.0)]));
    let mut per = [0.0; 47];
    per[0] = ratio(-1.0);
    per[7] = ratio(-1.0);
    v.extend(per);
    v.extend([0.5, 0.0, 0.0]);
    v
}

/// The twikir and kir vectors of gatwikirwa computed by the library.
pub fn computed() -> (Vec<f64>, Vec<f64>) {
    let analyzer = kinmorph::analyzer::Analyzer::default_kinyarwanda();
    let corpus = corpus();
    let ex = kinmorph::features::FeatureExtractor::new(
        &analyzer,
        &corpus,
        templates(),
        Default::default(),
        Default::default(),
    )
    .unwrap();
    let t = tables();
    let v = |stem: &str, set: &[u8]| {
        ex.combine(&ex.stem_block("gatwikirwa", stem), stem, IndicatorSet::from_numbers(set), &t)
            .values()
            .to_vec()
    };
    (v("twikir", &[1, 5, 24]), v("kir", &[1, 8]))
}

/// Largest absolute difference from the hand values.
pub fn max_error() -> f64 {
    let (twikir, kir) = computed();
    let err = |a: &[f64], b: &[f64]| {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    err(&twikir, &expected_twikir()).max(err(&kir, &expected_kir()))
}

/// Every gatwikirwa candidate with its vector, in golden-file format.
pub fn gatwikirwa_csv() -> String {
    use kinmorph::analyzer::Analyzer;
    use kinmorph::features::{csv_header, FeatureExtractor};
    let analyzer = Analyzer::default_kinyarwanda();
    let corpus = corpus();
    let ex = FeatureExtractor::new(&analyzer, &corpus, templates(), Default::default(), Default::default()).unwrap();
    let segs = analyzer.analyze("gatwikirwa");
    let vectors = ex.assemble_all("gatwikirwa", &segs, &tables());
    let mut csv = format!("segmentation,{}\n", csv_header());
    for (seg, v) in segs.iter().zip(&vectors) {
        assert_eq!(v, &ex.assemble("gatwikirwa", seg, &tables()));
        csv.push_str(&format!("{},{}\n", seg.serialize(), v.to_csv_row()));
    }
    csv
}

pub fn golden_path() -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/gatwikirwa_features.csv")
}
