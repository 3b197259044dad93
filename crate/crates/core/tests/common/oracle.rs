//! Exhaustive generation over a small inventory.

use std::collections::{BTreeMap, BTreeSet};

use kinmorph::analyzer::{Analyzer, Cell, Segmentation, StemLexicon};
use kinmorph::constraints::ConstraintSet;
use kinmorph::morphotactics::{Inventory, Morpheme, Slot};
use kinmorph::rewrite::RuleSet;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INVENTORY: &str = "\
3\tSUBJ\t-\t-\t-
5\tTAM\t-\t-\t-
9\tOBJ1\t-\t-\t-
11\tSTEM\t-\t-\trequired
12\tSUFF\t-\t-\trepeatable
15\tASP\t-\t-\t-
3\tSUBJ\tu\t1\thuman
3\tSUBJ\tu\t7\t-
3\tSUBJ\tku\t19\tinfinitive
3\tSUBJ\ta\t4\thuman
5\tTAM\tra\t-\t-
9\tOBJ1\tmu\t-\thuman
9\tOBJ1\tki\t-\t-
12\tSUFF\tir\t14\titerable
12\tSUFF\tik\t12\t-
15\tASP\ta\t-\t-
15\tASP\te\t-\t-
";

const RULES: &str = "\
ku + -> gu [left:^$] [right:^[ptkfsc]] [lslot:SUBJ] both
u + -> w [right:^[aeiou]] both
";

const CONSTRAINTS: &str = "{V;OBJ1;/./} => {V;SUBJ;/./}\n";

const STEMS: [&str; 2] = ["som", "ik"];

/// Longest surface string probed; no rule shortens text, so deeper
/// sequences cannot reach it.
pub const MAX_LEN: usize = 11;

pub struct Oracle {
    inv: Inventory,
    rules: RuleSet,
    constraints: ConstraintSet,
    items: Vec<(Slot, Morpheme)>,
    pub found: BTreeMap<String, BTreeSet<String>>,
}

impl Oracle {
    fn ambiguous_class(&self, m: &Morpheme) -> bool {
        self.inv.lookup(m.slot).any(|o| o.form == m.form && o.class_id != m.class_id)
    }

    fn cell(&self, m: &Morpheme, choice: Option<String>) -> Cell {
        Cell {
            form: m.form.clone(),
            class_id: if self.ambiguous_class(m) { m.class_id } else { None },
            tag: if self.inv.needs_tag(m) { m.tag.clone() } else { None },
            choice,
        }
    }

    /// Every morpheme sequence in slot order whose forms fit in `MAX_LEN`.
    fn sequences(&self, prefix: &mut Vec<Morpheme>, len: usize, out: &mut Vec<Vec<Morpheme>>) {
        if prefix.iter().any(|m| m.slot == Slot::Stem) {
            out.push(prefix.clone());
        }
        let last = prefix.last().map(|m| m.slot);
        for (slot, m) in &self.items {
            let ok = match last {
                None => true,
                Some(l) => *slot > l || (*slot == Slot::Suff && l == Slot::Suff),
            };
            let stem_first = *slot <= Slot::Stem || prefix.iter().any(|p| p.slot == Slot::Stem);
            if !ok || !stem_first || len + m.form.len() > MAX_LEN {
                continue;
            }
            prefix.push(m.clone());
            self.sequences(prefix, len + m.form.len(), out);
            prefix.pop();
        }
    }

    /// Renders a sequence under every combination of boundary alternatives.
    fn realize(&mut self, seq: &[Morpheme], i: usize, out: String, choices: &mut Vec<Option<String>>) {
        if i == seq.len() {
            if out.len() > MAX_LEN {
                return;
            }
            let cells: Vec<(Slot, Cell)> = seq
                .iter()
                .zip(choices.iter())
                .map(|(m, c)| (m.slot, self.cell(m, c.clone())))
                .collect();
            let Ok(seg) = Segmentation::from_cells(cells, |f| self.inv.suffix_home(f)) else {
                return;
            };
            let forms = seg.slot_forms();
            if self.inv.validate_order(&forms) && self.constraints.accepts(&forms) {
                let key = seg.serialize();
                self.found.entry(out).or_default().insert(key);
            }
            return;
        }
        if i == 0 {
            choices.push(None);
            self.realize(seq, 1, seq[0].form.clone(), choices);
            choices.pop();
            return;
        }
        let (prev, m) = (&seq[i - 1], &seq[i]);
        for alt in self.rules.alternatives(&out, Some(prev.slot), &m.form, Some(m.slot)) {
            let mut next = out.clone();
            self.rules.apply(&mut next, alt.rule, &m.form);
            choices[i - 1] = alt.annotation;
            choices.push(None);
            self.realize(seq, i + 1, next, choices);
            choices.pop();
        }
        choices[i - 1] = None;
    }
}

pub fn build() -> (Analyzer, Oracle) {
    let inv = Inventory::parse(INVENTORY).unwrap();
    let rules = RuleSet::parse(RULES).unwrap();
    let constraints = ConstraintSet::parse(CONSTRAINTS).unwrap();
    assert!(inv.morphemes().len() <= 12);
    assert!(rules.len() <= 2);
    let mut items: Vec<(Slot, Morpheme)> = inv.morphemes().iter().map(|m| (m.slot, m.clone())).collect();
    for s in STEMS {
        items.push((
            Slot::Stem,
            Morpheme {
                form: s.into(),
                slot: Slot::Stem,
                class_id: None,
                tag: None,
            },
        ));
    }
    let analyzer = Analyzer::new(inv.clone(), rules.clone(), constraints.clone())
        .with_stem_lexicon(StemLexicon::from_stems(STEMS))
        .with_max_analyses(100_000);
    let mut oracle = Oracle {
        inv,
        rules,
        constraints,
        items,
        found: BTreeMap::new(),
    };
    let mut seqs = Vec::new();
    oracle.sequences(&mut Vec::new(), 0, &mut seqs);
    for seq in &seqs {
        oracle.realize(seq, 0, String::new(), &mut Vec::new());
    }
    (analyzer, oracle)
}

/// Compares the analyzer with the oracle on `n` strings, half of them
/// generated forms. Returns the mismatching words and how many probes had
/// more than one analysis.
pub fn compare(n: usize, seed: u64) -> (Vec<String>, usize) {
    let (an, oracle) = build();
    let surfaces: Vec<&String> = oracle.found.keys().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters: Vec<char> = "aegikmorsuw".chars().collect();
    let mut ambiguous = 0;
    let mut bad = Vec::new();
    for i in 0..n {
        let word: String = if i % 2 == 0 {
            (*surfaces.choose(&mut rng).unwrap()).clone()
        } else {
            let n = rng.random_range(1..=MAX_LEN);
            (0..n).map(|_| *letters.choose(&mut rng).unwrap()).collect()
        };
        let got: BTreeSet<String> = an.analyze(&word).iter().map(|s| s.serialize()).collect();
        let want = oracle.found.get(&word).cloned().unwrap_or_default();
        if want.len() > 1 {
            ambiguous += 1;
        }
        if got != want {
            bad.push(word);
        }
    }
    (bad, ambiguous)
}
