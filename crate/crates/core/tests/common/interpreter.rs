//! A separately written reading of the constraint file and a random word
//! generator.

use kinmorph::analyzer::{Analyzer, DEFAULT_STEMS};
use kinmorph::constraints::DEFAULT_CONSTRAINTS;
use kinmorph::morphotactics::{Inventory, Slot};
use kinmorph::rewrite::RuleSet;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

pub enum Value {
    Lit(String),
    Re(Regex),
    Len(usize),
}

pub struct Pat {
    negated: bool,
    verb: bool,
    slot: String,
    value: Value,
}

impl Pat {
    fn parse(text: &str) -> Pat {
        let inner = text.trim().strip_prefix('{').unwrap().strip_suffix('}').unwrap();
        let parts: Vec<&str> = inner.splitn(3, ';').collect();
        let (negated, pos) = match parts[0].strip_prefix('!') {
            Some(p) => (true, p),
            None => (false, parts[0]),
        };
        let v = parts[2];
        let value = if let Some(n) = v.strip_prefix('#') {
            Value::Len(n.parse().unwrap())
        } else if v.len() > 1 && v.starts_with('/') && v.ends_with('/') {
            Value::Re(Regex::new(&v[1..v.len() - 1]).unwrap())
        } else {
            Value::Lit(v.to_string())
        };
        Pat {
            negated,
            verb: pos == "V",
            slot: parts[1].replace('_', "-"),
            value,
        }
    }

    fn hit(&self, form: &str) -> bool {
        match &self.value {
            Value::Lit(s) => s == form,
            Value::Re(r) => r.is_match(form),
            Value::Len(n) => form.chars().count() == *n,
        }
    }

    pub fn matches(&self, cells: &[(Slot, &str)]) -> bool {
        let any = self.verb && cells.iter().any(|(s, f)| s.name() == self.slot && self.hit(f));
        any != self.negated
    }
}

pub fn load_rules() -> Vec<(Pat, Pat)> {
    DEFAULT_CONSTRAINTS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (a, b) = l.split_once("=>").unwrap();
            (Pat::parse(a), Pat::parse(b))
        })
        .collect()
}

/// Deep sequence assembled slot by slot from the inventory, without
/// consulting constraints.
pub fn random_deep(rng: &mut ChaCha8Rng, inv: &Inventory, stems: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    let pick = |rng: &mut ChaCha8Rng, slot: Slot| -> Option<String> {
        let forms: Vec<&str> = inv.lookup(slot).map(|m| m.form.as_str()).collect();
        forms.choose(rng).map(|f| f.to_string())
    };
    for (slot, p) in [
        (Slot::PreIn, 0.2),
        (Slot::Subj, 0.9),
        (Slot::Neg, 0.1),
        (Slot::Tam, 0.5),
        (Slot::Obj2, 0.1),
        (Slot::Obj1, 0.3),
        (Slot::Refl, 0.1),
    ] {
        if rng.random_bool(p) {
            out.extend(pick(rng, slot));
        }
    }
    out.push(stems.choose(rng).unwrap().to_string());
    for _ in 0..rng.random_range(0..3) {
        out.extend(pick(rng, Slot::Suff));
    }
    out.extend(pick(rng, Slot::Asp));
    if rng.random_bool(0.1) {
        out.extend(pick(rng, Slot::LocP));
    }
    out
}

pub fn random_letters(rng: &mut ChaCha8Rng) -> String {
    const SYL: [&str; 14] = ["a", "ba", "ra", "ki", "mu", "tu", "ye", "we", "ga", "so", "ma", "ny", "i", "e"];
    (0..rng.random_range(2..7)).map(|_| *SYL.choose(rng).unwrap()).collect()
}

/// Analyzes `words` random words and returns `(analyses, violations)`
/// according to the independent interpreter.
pub fn check(words: usize, seed: u64) -> (usize, Vec<String>) {
    let rules = load_rules();
    let inv = Inventory::default_kinyarwanda();
    let rewrite = RuleSet::default_kinyarwanda();
    let stems: Vec<&str> = DEFAULT_STEMS
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap().trim())
        .collect();
    let an = Analyzer::default_kinyarwanda();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut analyses = 0usize;
    let mut bad = Vec::new();
    for i in 0..words {
        let word = if i % 4 == 3 {
            random_letters(&mut rng)
        } else {
            rewrite.to_surface_forms(&random_deep(&mut rng, &inv, &stems))
        };
        for seg in an.analyze(&word) {
            analyses += 1;
            let cells = seg.slot_forms();
            if rules.iter().any(|(lhs, rhs)| lhs.matches(&cells) && !rhs.matches(&cells)) {
                bad.push(format!("{word}: {}", seg.serialize()));
            }
        }
    }
    (analyses, bad)
}
