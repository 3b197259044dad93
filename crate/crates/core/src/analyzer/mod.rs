//! Candidate segmentation of verbal surface forms, generation, inflection
//! sets and morphological indicator features.

mod indicators;
mod segmentation;
mod templates;

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

pub use indicators::{IndicatorSet, INDICATOR_COUNT, INDICATOR_KEYS};
pub use segmentation::{Cell, Segmentation, COLUMNS, STEM_COLUMN};
pub use templates::{Inflection, StemLexicon, Template, DEFAULT_STEMS, DEFAULT_TEMPLATES};

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::morphotactics::{Inventory, Morpheme, Slot};
use crate::rewrite::{Alternative, DeepMorpheme, RuleSet};
use indicators::{PAIR_FEATURES, SUFFIX_FEATURES};

pub const DEFAULT_MAX_ANALYSES: usize = 256;

/// Upper bound on morphemes appended after any point of the search.
const MAX_APPENDS: usize = 21;

/// Immutable analyzer: inventory, rewrite rules, constraints and an optional
/// stem lexicon restricting the `STEM` residue.
#[derive(Clone, Debug)]
pub struct Analyzer {
    inventory: Inventory,
    rules: RuleSet,
    constraints: ConstraintSet,
    stems: Option<StemLexicon>,
    max_analyses: usize,
    margin: usize,
    class_ambiguous: HashSet<(Slot, String)>,
}

impl Analyzer {
    pub fn new(inventory: Inventory, rules: RuleSet, constraints: ConstraintSet) -> Analyzer {
        let margin = rules.max_left() + MAX_APPENDS * rules.max_shrink();
        let mut class_ambiguous = HashSet::new();
        for m in inventory.morphemes() {
            if inventory
                .lookup(m.slot)
                .any(|o| o.form == m.form && o.class_id != m.class_id)
            {
                class_ambiguous.insert((m.slot, m.form.clone()));
            }
        }
        Analyzer {
            inventory,
            rules,
            constraints,
            stems: None,
            max_analyses: DEFAULT_MAX_ANALYSES,
            margin,
            class_ambiguous,
        }
    }

    /// The shipped inventory, rules, constraints and stem lexicon.
    pub fn default_kinyarwanda() -> Analyzer {
        Analyzer::new(
            Inventory::default_kinyarwanda(),
            RuleSet::default_kinyarwanda(),
            ConstraintSet::default_kinyarwanda(),
        )
        .with_stem_lexicon(StemLexicon::default_kinyarwanda())
    }

    pub fn with_stem_lexicon(mut self, stems: StemLexicon) -> Analyzer {
        self.stems = Some(stems);
        self
    }

    /// Accept any non-empty residue as a stem.
    pub fn without_stem_lexicon(mut self) -> Analyzer {
        self.stems = None;
        self
    }

    pub fn with_max_analyses(mut self, max: usize) -> Analyzer {
        self.max_analyses = max.max(1);
        self
    }

    pub fn inventory(&self) -> &Inventory {
        &self.inventory
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn stem_lexicon(&self) -> Option<&StemLexicon> {
        self.stems.as_ref()
    }

    /// All candidate segmentations of `word`, sorted by serialization.
    pub fn analyze(&self, word: &str) -> Vec<Segmentation> {
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            return Vec::new();
        }
        let mut search = Search {
            an: self,
            word: &word,
            items: Vec::new(),
            found: BTreeMap::new(),
            stems_at: HashMap::new(),
            limit: self.max_analyses,
            truncated: false,
        };
        search.descend("");
        if search.truncated {
            log::warn!(
                "analysis of {word:?} stopped at {} candidates",
                self.max_analyses
            );
        }
        search.found.into_values().take(self.max_analyses).collect()
    }

    /// Inventory entries a cell may stand for.
    pub fn candidates<'s>(&'s self, slot: Slot, cell: &'s Cell) -> impl Iterator<Item = &'s Morpheme> + 's {
        self.inventory.lookup(slot).filter(move |m| {
            m.form == cell.form
                && cell.class_id.is_none_or(|c| m.class_id == Some(c))
                && cell.tag.as_deref().is_none_or(|t| m.has_tag(t))
        })
    }

    /// The unique inventory entry of a cell, if it is unambiguous.
    pub fn resolve<'s>(&'s self, slot: Slot, cell: &'s Cell) -> Option<&'s Morpheme> {
        let mut it = self.candidates(slot, cell);
        let first = it.next()?;
        it.next().is_none().then_some(first)
    }

    /// Checks inventory membership, slot order, override names and
    /// constraints.
    pub fn validate(&self, seg: &Segmentation) -> Result<()> {
        for (slot, cell) in seg.cells() {
            if slot == Slot::Stem {
                continue;
            }
            if self.candidates(slot, cell).next().is_none() {
                return Err(Error::validation(format!("{cell} is not a {slot} morpheme")));
            }
        }
        let forms = seg.slot_forms();
        if !self.inventory.validate_order(&forms) {
            return Err(Error::validation("morphemes violate the slot order"));
        }
        if let Some(v) = self.constraints.violations(&forms).first() {
            return Err(Error::validation(format!("violates constraint {v}")));
        }
        let deep = seg.deep();
        let mut out = String::new();
        for (i, m) in deep.iter().enumerate() {
            if i == 0 {
                out.push_str(&m.form);
                continue;
            }
            let prev = &deep[i - 1];
            if let Some(c) = &prev.choice {
                if !self.rules.choice_is_valid(&out, prev.slot, c, &m.form, m.slot) {
                    return Err(Error::validation(format!(
                        "no rewrite alternative {c:?} after {:?}",
                        prev.form
                    )));
                }
            }
            let rule = self
                .rules
                .choose(&out, prev.slot, prev.choice.as_deref(), &m.form, m.slot);
            self.rules.apply(&mut out, rule, &m.form);
        }
        if let Some(last) = deep.last() {
            if last.choice.is_some() {
                return Err(Error::validation("override on the last morpheme"));
            }
        }
        Ok(())
    }

    /// Surface form of a valid segmentation.
    pub fn generate(&self, seg: &Segmentation) -> Result<String> {
        self.validate(seg)?;
        Ok(self.rules.to_surface(&seg.deep()))
    }

    /// Dictionary form `ku-<stem>-a`, e.g. `gutwikira`.
    pub fn lemma(&self, stem: &str) -> String {
        self.rules.to_surface(&[
            DeepMorpheme::in_slot("ku", Slot::Subj),
            DeepMorpheme::in_slot(stem, Slot::Stem),
            DeepMorpheme::in_slot("a", Slot::Asp),
        ])
    }

    /// Common inflections of `stem` that pass `vocab`, at most `cap`.
    pub fn inflection_set(
        &self,
        stem: &str,
        templates: &[Template],
        vocab: impl Fn(&str) -> bool,
        cap: usize,
    ) -> Vec<Inflection> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (i, t) in templates.iter().enumerate() {
            if out.len() >= cap {
                break;
            }
            let Ok(seg) = Segmentation::from_cells(t.with_stem(stem), |f| self.inventory.suffix_home(f)) else {
                continue;
            };
            let Ok(surface) = self.generate(&seg) else {
                continue;
            };
            if vocab(&surface) && seen.insert(surface.clone()) {
                out.push(Inflection { surface, template: i });
            }
        }
        out
    }

    /// Morphological indicator features of a segmentation.
    pub fn indicator_features(&self, seg: &Segmentation) -> IndicatorSet {
        let mut f = IndicatorSet::new();
        let tagged = |slot: Slot, tag: &str| {
            seg.cell(slot)
                .and_then(|c| self.resolve(slot, c))
                .is_some_and(|m| m.has_tag(tag))
        };
        let objects = [Slot::Obj3, Slot::Obj2, Slot::Obj1];
        let has_subj = seg.has(Slot::Subj);
        f.set(1, has_subj);
        f.set(2, !has_subj);
        f.set(3, tagged(Slot::Subj, "human"));
        f.set(4, tagged(Slot::Subj, "locative"));
        f.set(5, objects.iter().any(|&s| seg.has(s)));
        f.set(6, objects.iter().any(|&s| tagged(s, "human")));
        f.set(7, objects.iter().any(|&s| tagged(s, "locative")));

        let refl = seg.has(Slot::Refl);
        let (o3, o2, o1) = (seg.has(Slot::Obj3), seg.has(Slot::Obj2), seg.has(Slot::Obj1));
        let suffixes = seg.suffixes();
        let any_suff = !suffixes.is_empty();
        let passive = seg.cell(Slot::PSuff).is_some_and(|c| c.form == "w");
        f.set(8, refl);
        f.set(9, o3);
        f.set(10, o2 && o3);
        f.set(11, o1 && o2 && o3);
        f.set(12, o2 && o3 && any_suff);
        f.set(13, o3 && any_suff);
        f.set(14, o2 && o3 && refl && any_suff);
        f.set(15, o3 && refl && any_suff);
        for (n, s) in SUFFIX_FEATURES {
            f.set(n, suffixes.contains(&s));
        }
        f.set(24, passive);
        let mut chain: Vec<&str> = suffixes.clone();
        if let Some(p) = seg.cell(Slot::PSuff) {
            chain.push(&p.form);
        }
        for (n, a, b) in PAIR_FEATURES {
            f.set(n, chain.windows(2).any(|w| w[0] == a && w[1] == b));
        }
        f.set(30, seg.has(Slot::LocP));

        let (_, trace) = self.rules.render_trace(&seg.deep());
        let used = |l: &str, r: &str, rhs: &str| {
            trace
                .iter()
                .flatten()
                .any(|&id| self.rules.get(id).is(l, r, rhs))
        };
        f.set(31, used("r", "y", "y"));
        f.set(32, used("r", "y", "z"));
        f.set(42, used("t", "y", "s"));
        f.set(43, used("t", "y", "sh"));

        f.set(33, seg.cell(Slot::Obj3).is_some_and(|c| c.form == "ka" || c.form == "ku"));
        f.set(36, o3 && any_suff && passive);
        let non_locative_object = objects.iter().any(|&s| {
            seg.cell(s)
                .is_some_and(|c| self.candidates(s, c).any(|m| !m.has_tag("locative")))
        });
        f.set(37, non_locative_object && !any_suff && !seg.has(Slot::PSuff));
        f.set(38, suffixes.len() >= 2);
        f.set(39, suffixes.len() >= 3);
        f.set(40, tagged(Slot::PreIn, "imperative"));
        f.set(41, tagged(Slot::PreIn, "conditional"));
        f
    }

    fn cell_for(&self, m: &Morpheme, choice: Option<String>) -> Cell {
        let class_id = if self.class_ambiguous.contains(&(m.slot, m.form.clone())) {
            m.class_id
        } else {
            None
        };
        let tag = if self.inventory.needs_tag(m) { m.tag.clone() } else { None };
        Cell {
            form: m.form.clone(),
            class_id,
            tag,
            choice,
        }
    }

    /// Deep stems whose realization could start near the end of `out`: a
    /// surface substring, optionally preceded by the `right` part of a rule
    /// whose output ends just before it, and followed by the `left` part of a
    /// rule whose output starts just after it.
    fn stem_candidates(&self, word: &str, n: usize) -> BTreeSet<String> {
        let lo = n.saturating_sub(self.rules.max_left());
        let hi = (n + self.rules.max_rhs()).min(word.len());
        let mut found = BTreeSet::new();
        for a in lo..=hi {
            if !word.is_char_boundary(a) {
                continue;
            }
            let mut heads: Vec<&str> = vec![""];
            for r in self.rules.rules() {
                if !r.right.is_empty() && word[..a].ends_with(&r.rhs) && !heads.contains(&r.right.as_str()) {
                    heads.push(&r.right);
                }
            }
            for b in a + 1..=word.len() {
                if !word.is_char_boundary(b) {
                    continue;
                }
                let core = &word[a..b];
                let mut tails: Vec<&str> = vec![""];
                for r in self.rules.rules() {
                    if !r.left.is_empty() && word[b..].starts_with(&r.rhs) && !tails.contains(&r.left.as_str()) {
                        tails.push(&r.left);
                    }
                }
                for h in &heads {
                    for t in &tails {
                        let stem = format!("{h}{core}{t}");
                        if self.stems.as_ref().is_none_or(|lex| lex.contains(&stem)) {
                            found.insert(stem);
                        }
                    }
                }
            }
        }
        found
    }
}

struct Item<'a> {
    slot: Slot,
    form: Cow<'a, str>,
    morpheme: Option<&'a Morpheme>,
    choice: Option<String>,
}

struct Search<'a> {
    an: &'a Analyzer,
    word: &'a str,
    items: Vec<Item<'a>>,
    found: BTreeMap<String, Segmentation>,
    /// Stem candidates by output length.
    stems_at: HashMap<usize, Vec<String>>,
    limit: usize,
    truncated: bool,
}

impl<'a> Search<'a> {
    /// Text more than `margin` bytes before the end can no longer change.
    fn compatible(&self, out: &str) -> bool {
        let stable = out.len().saturating_sub(self.an.margin);
        stable <= self.word.len() && self.word.as_bytes()[..stable] == out.as_bytes()[..stable]
    }

    fn descend(&mut self, out: &str) {
        if self.found.len() > self.limit {
            self.truncated = true;
            return;
        }
        let an = self.an;
        let filled: Vec<Slot> = self.items.iter().map(|i| i.slot).collect();
        if filled.contains(&Slot::Stem) && out == self.word {
            self.finish();
        }
        for slot in an.inventory.next_slots(&filled) {
            if slot == Slot::Stem {
                let n = out.len();
                if !self.stems_at.contains_key(&n) {
                    let found: Vec<String> = an.stem_candidates(self.word, n).into_iter().collect();
                    self.stems_at.insert(n, found);
                }
                for stem in self.stems_at[&n].clone() {
                    self.push(slot, Cow::Owned(stem), None, out);
                }
            } else {
                for m in an.inventory.lookup(slot) {
                    self.push(slot, Cow::Borrowed(m.form.as_str()), Some(m), out);
                }
            }
        }
    }

    fn push(&mut self, slot: Slot, form: Cow<'a, str>, morpheme: Option<&'a Morpheme>, out: &str) {
        if let Some(prev) = self.items.last() {
            if slot == Slot::Suff
                && prev.slot == Slot::Suff
                && prev.form == form
                && !self.an.inventory.suffix_iterable(&form)
            {
                return;
            }
        }
        let alternatives = match self.items.last() {
            None => vec![Alternative {
                rule: None,
                annotation: None,
            }],
            Some(prev) => self.an.rules.alternatives(out, Some(prev.slot), &form, Some(slot)),
        };
        for alt in alternatives {
            let mut next = out.to_string();
            self.an.rules.apply(&mut next, alt.rule, &form);
            if !self.compatible(&next) {
                continue;
            }
            if let Some(prev) = self.items.last_mut() {
                prev.choice = alt.annotation;
            }
            self.items.push(Item {
                slot,
                form: form.clone(),
                morpheme,
                choice: None,
            });
            self.descend(&next);
            self.items.pop();
        }
        if let Some(prev) = self.items.last_mut() {
            prev.choice = None;
        }
    }

    fn finish(&mut self) {
        let cells: Vec<(Slot, Cell)> = self
            .items
            .iter()
            .map(|it| {
                let cell = match it.morpheme {
                    Some(m) => self.an.cell_for(m, it.choice.clone()),
                    None => Cell {
                        form: it.form.to_string(),
                        class_id: None,
                        tag: None,
                        choice: it.choice.clone(),
                    },
                };
                (it.slot, cell)
            })
            .collect();
        let Ok(seg) = Segmentation::from_cells(cells, |f| self.an.inventory.suffix_home(f)) else {
            return;
        };
        if self.an.constraints.accepts(&seg.slot_forms()) {
            self.found.insert(seg.serialize(), seg);
        }
    }
}
