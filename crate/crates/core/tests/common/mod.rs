#![allow(dead_code)]

pub mod interpreter;
pub mod oracle;
pub mod toy;

use kinmorph::analyzer::Analyzer;
use kinmorph::rewrite::DeepMorpheme;

pub const FIXTURES: &str = include_str!("../../fixtures/deep_surface.tsv");

pub struct Fixture {
    pub deep: String,
    pub surface: String,
}

pub fn fixtures() -> Vec<Fixture> {
    FIXTURES
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut f = l.split('\t');
            Fixture {
                deep: f.next().unwrap().to_string(),
                surface: f.next().expect("surface column").to_string(),
            }
        })
        .collect()
}

/// Whether some analysis of `surface` has the deep sequence: same forms in
/// order, the same overrides, and the slots where the fixture gives them.
pub fn recovers(analyzer: &Analyzer, deep: &[DeepMorpheme], surface: &str) -> bool {
    analyzer.analyze(surface).iter().any(|seg| {
        let got = seg.deep();
        got.len() == deep.len()
            && got.iter().zip(deep).all(|(g, d)| {
                g.form == d.form && g.choice == d.choice && d.slot.is_none_or(|s| g.slot == Some(s))
            })
    })
}

use kinmorph::learning::{StemProb, WordPrediction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random predictions over 1 to 12 candidates spread across up to 5 stems,
/// with a share of sharply peaked distributions so both selection rules
/// see positives.
pub fn random_predictions(n: usize, seed: u64) -> Vec<WordPrediction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let m = rng.random_range(1..=12);
            let stems: Vec<String> = (0..m).map(|_| format!("s{}", rng.random_range(0..5))).collect();
            let sharp = rng.random_bool(0.3);
            let mut w: Vec<f64> = (0..m)
                .map(|_| if sharp { rng.random::<f64>().powi(40) } else { rng.random::<f64>() })
                .collect();
            if sharp {
                w[0] = 1.0;
            }
            let total: f64 = w.iter().sum();
            let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
            WordPrediction::new(&format!("w{:05}", i % (n / 2).max(1)), &stems, &probs)
        })
        .collect()
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// `{H > min}` ordered by entropy then word, cut at `top`.
pub fn oracle_uncertain(preds: &[WordPrediction], min: f64, top: usize) -> Vec<WordPrediction> {
    let mut keep: Vec<&WordPrediction> = preds.iter().filter(|p| p.entropy > min).collect();
    keep.sort_by(|a, b| {
        b.entropy
            .partial_cmp(&a.entropy)
            .unwrap()
            .then(a.word.cmp(&b.word))
    });
    keep.into_iter().take(top).cloned().collect()
}

/// `P1 >= 0.95`, at least three stems, `P1 - P2 > 0.95` and `H < 0.1`, all
/// over the stem distribution.
pub fn oracle_confident(preds: &[WordPrediction]) -> Vec<WordPrediction> {
    preds
        .iter()
        .filter(|p| {
            let mut probs: Vec<f64> = p.stems.iter().map(|s: &StemProb| s.prob).collect();
            probs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let p1 = probs.first().copied().unwrap_or(0.0);
            let p2 = probs.get(1).copied().unwrap_or(0.0);
            p1 >= 0.95 && probs.len() >= 3 && p1 - p2 > 0.95 && entropy(&probs) < 0.1
        })
        .cloned()
        .collect()
}
