//! Morpheme inventory and the ordered slot system of the verbal template.
//!
//! Slots are consumed left to right in ascending id order. Every slot is
//! optional except `STEM`, and only `SUFF` may repeat (up to
//! [`Inventory::suffix_columns`] times).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The shipped default inventory.
pub const DEFAULT_INVENTORY: &str = include_str!("../data/inventory.tsv");

/// A positional category of the verbal template.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    NAug,
    PreIn,
    Subj,
    Neg,
    Tam,
    NaEmph,
    Obj3,
    Obj2,
    Obj1,
    Refl,
    Stem,
    Suff,
    PSuff,
    Asp,
    LocP,
}

impl Slot {
    pub const ALL: [Slot; 15] = [
        Slot::NAug,
        Slot::PreIn,
        Slot::Subj,
        Slot::Neg,
        Slot::Tam,
        Slot::NaEmph,
        Slot::Obj3,
        Slot::Obj2,
        Slot::Obj1,
        Slot::Refl,
        Slot::Stem,
        Slot::Suff,
        Slot::PSuff,
        Slot::Asp,
        Slot::LocP,
    ];

    /// Row number of the slot in the verbal template. `SUFF` spans rows 12-13.
    pub fn id(self) -> u8 {
        match self {
            Slot::NAug => 1,
            Slot::PreIn => 2,
            Slot::Subj => 3,
            Slot::Neg => 4,
            Slot::Tam => 5,
            Slot::NaEmph => 6,
            Slot::Obj3 => 7,
            Slot::Obj2 => 8,
            Slot::Obj1 => 9,
            Slot::Refl => 10,
            Slot::Stem => 11,
            Slot::Suff => 12,
            Slot::PSuff => 14,
            Slot::Asp => 15,
            Slot::LocP => 16,
        }
    }

    pub fn from_id(id: u8) -> Option<Slot> {
        Slot::ALL.iter().copied().find(|s| s.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Slot::NAug => "N-AUG",
            Slot::PreIn => "PRE-IN",
            Slot::Subj => "SUBJ",
            Slot::Neg => "NEG",
            Slot::Tam => "TAM",
            Slot::NaEmph => "NA-EMPH",
            Slot::Obj3 => "OBJ3",
            Slot::Obj2 => "OBJ2",
            Slot::Obj1 => "OBJ1",
            Slot::Refl => "REFL",
            Slot::Stem => "STEM",
            Slot::Suff => "SUFF",
            Slot::PSuff => "P-SUFF",
            Slot::Asp => "ASP",
            Slot::LocP => "LOC-P",
        }
    }

    /// Whether morphemes of this slot carry a noun-class index.
    pub fn is_object(self) -> bool {
        matches!(self, Slot::Obj1 | Slot::Obj2 | Slot::Obj3)
    }

    /// First serialization column (1-based) used by the slot.
    pub fn column(self) -> usize {
        match self {
            Slot::Suff => 12,
            Slot::PSuff => 18,
            Slot::Asp => 19,
            Slot::LocP => 20,
            s => s.id() as usize,
        }
    }

    /// Slot owning a 1-based serialization column.
    pub fn for_column(column: usize) -> Option<Slot> {
        match column {
            1..=11 => Slot::from_id(column as u8),
            12..=17 => Some(Slot::Suff),
            18 => Some(Slot::PSuff),
            19 => Some(Slot::Asp),
            20 => Some(Slot::LocP),
            _ => None,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Slot {
    type Err = Error;

    /// Accepts both `PRE-IN` and the rule-language spelling `PRE_IN`.
    fn from_str(s: &str) -> Result<Slot> {
        let norm = s.trim().to_ascii_uppercase().replace('_', "-");
        Slot::ALL
            .iter()
            .copied()
            .find(|slot| slot.name() == norm)
            .ok_or_else(|| Error::validation(format!("unknown slot name {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotSpec {
    pub slot: Slot,
    pub repeatable: bool,
    pub required: bool,
}

impl SlotSpec {
    pub fn id(&self) -> u8 {
        self.slot.id()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Morpheme {
    /// Deep (pre-rewrite) form.
    pub form: String,
    pub slot: Slot,
    pub class_id: Option<u16>,
    pub tag: Option<String>,
}

impl Morpheme {
    pub fn has_tag(&self, tag: &str) -> bool {
        self.tag.as_deref() == Some(tag)
    }
}

/// The immutable morpheme inventory.
#[derive(Clone, Debug)]
pub struct Inventory {
    slots: Vec<SlotSpec>,
    morphemes: Vec<Morpheme>,
    suffix_columns: usize,
    suffix_home: HashMap<String, usize>,
    by_slot: HashMap<Slot, Vec<usize>>,
}

impl Inventory {
    pub fn default_kinyarwanda() -> Inventory {
        Inventory::parse(DEFAULT_INVENTORY).expect("shipped inventory is valid")
    }

    /// Parses the tab-separated inventory format.
    pub fn parse(source: &str) -> Result<Inventory> {
        const WHAT: &str = "inventory";
        let mut slots: Vec<SlotSpec> = Vec::new();
        let mut morphemes = Vec::new();
        let mut suffix_home = HashMap::new();

        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim_end();
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::parse(
                    WHAT,
                    line_no,
                    format!("expected 5 tab-separated fields, found {}", fields.len()),
                ));
            }
            let id: u8 = fields[0]
                .parse()
                .map_err(|_| Error::parse(WHAT, line_no, format!("bad slot id {:?}", fields[0])))?;
            let slot = Slot::from_id(id)
                .ok_or_else(|| Error::parse(WHAT, line_no, format!("unknown slot id {id}")))?;
            let named: Slot = fields[1]
                .parse()
                .map_err(|_| Error::parse(WHAT, line_no, format!("unknown slot name {:?}", fields[1])))?;
            if named != slot {
                return Err(Error::parse(
                    WHAT,
                    line_no,
                    format!("slot id {id} is {slot}, not {named}"),
                ));
            }
            let form = fields[2];
            let tag = match fields[4] {
                "-" | "" => None,
                t => Some(t.to_string()),
            };

            if form == "-" {
                if slots.iter().any(|s| s.slot == slot) {
                    return Err(Error::parse(WHAT, line_no, format!("slot {slot} declared twice")));
                }
                slots.push(SlotSpec {
                    slot,
                    repeatable: tag.as_deref() == Some("repeatable"),
                    required: tag.as_deref() == Some("required"),
                });
                continue;
            }

            if !form.chars().all(|c| c.is_lowercase() && c.is_alphabetic()) {
                return Err(Error::parse(
                    WHAT,
                    line_no,
                    format!("form {form:?} must be non-empty lowercase letters"),
                ));
            }
            let number = match fields[3] {
                "-" | "" => None,
                n => Some(n.parse::<u16>().map_err(|_| {
                    Error::parse(WHAT, line_no, format!("bad class id {n:?}"))
                })?),
            };
            let class_id = if slot == Slot::Suff {
                if let Some(col) = number {
                    if !(12..=17).contains(&col) {
                        return Err(Error::parse(
                            WHAT,
                            line_no,
                            format!("suffix column {col} outside 12..=17"),
                        ));
                    }
                    suffix_home.insert(form.to_string(), col as usize);
                }
                None
            } else {
                number
            };
            morphemes.push(Morpheme {
                form: form.to_string(),
                slot,
                class_id,
                tag,
            });
        }

        Inventory::new(slots, morphemes, 6, suffix_home)
    }

    pub fn new(
        mut slots: Vec<SlotSpec>,
        morphemes: Vec<Morpheme>,
        suffix_columns: usize,
        suffix_home: HashMap<String, usize>,
    ) -> Result<Inventory> {
        slots.sort_by_key(|s| s.id());
        let stems: Vec<_> = slots.iter().filter(|s| s.slot == Slot::Stem).collect();
        if stems.len() != 1 || !stems[0].required {
            return Err(Error::validation("inventory needs exactly one required STEM slot"));
        }
        if let Some(bad) = slots
            .iter()
            .find(|s| (s.required && s.slot != Slot::Stem) || (s.repeatable && s.slot != Slot::Suff))
        {
            return Err(Error::validation(format!("slot {} has invalid flags", bad.slot)));
        }
        if !(1..=6).contains(&suffix_columns) {
            return Err(Error::validation("suffix_columns must be in 1..=6"));
        }
        let mut seen = std::collections::HashSet::new();
        let mut by_slot: HashMap<Slot, Vec<usize>> = HashMap::new();
        for (i, m) in morphemes.iter().enumerate() {
            if !slots.iter().any(|s| s.slot == m.slot) {
                return Err(Error::validation(format!(
                    "morpheme {:?} uses undeclared slot {}",
                    m.form, m.slot
                )));
            }
            if m.slot == Slot::Stem {
                return Err(Error::validation("the STEM slot takes no inventory morphemes"));
            }
            if !seen.insert((m.form.clone(), m.slot, m.class_id, m.tag.clone())) {
                return Err(Error::validation(format!(
                    "duplicate morpheme {:?} in slot {}",
                    m.form, m.slot
                )));
            }
            by_slot.entry(m.slot).or_default().push(i);
        }
        Ok(Inventory {
            slots,
            morphemes,
            suffix_columns,
            suffix_home,
            by_slot,
        })
    }

    pub fn slots(&self) -> &[SlotSpec] {
        &self.slots
    }

    pub fn morphemes(&self) -> &[Morpheme] {
        &self.morphemes
    }

    pub fn suffix_columns(&self) -> usize {
        self.suffix_columns
    }

    pub fn has_slot(&self, slot: Slot) -> bool {
        self.slots.iter().any(|s| s.slot == slot)
    }

    /// Morphemes of one slot in file order.
    pub fn lookup(&self, slot: Slot) -> impl Iterator<Item = &Morpheme> + '_ {
        self.by_slot
            .get(&slot)
            .into_iter()
            .flatten()
            .map(move |&i| &self.morphemes[i])
    }

    /// Finds a morpheme by slot, form and class. When several morphemes share
    /// those (e.g. imperative and conditional `ni`), `tag` picks one; without a
    /// tag the first listed is returned.
    pub fn find(&self, slot: Slot, form: &str, class_id: Option<u16>, tag: Option<&str>) -> Option<&Morpheme> {
        self.lookup(slot).find(|m| {
            m.form == form && m.class_id == class_id && tag.is_none_or(|t| m.tag.as_deref() == Some(t))
        })
    }

    /// True when more than one inventory entry shares slot, form and class,
    /// so the tag is needed to tell them apart.
    pub fn needs_tag(&self, m: &Morpheme) -> bool {
        self.lookup(m.slot)
            .filter(|o| o.form == m.form && o.class_id == m.class_id)
            .count()
            > 1
    }

    /// Canonical serialization column of a suffix (12..=17).
    pub fn suffix_home(&self, form: &str) -> usize {
        self.suffix_home.get(form).copied().unwrap_or(12)
    }

    /// Slots that may legally follow the slots already filled (in order).
    pub fn next_slots(&self, filled: &[Slot]) -> BTreeSet<Slot> {
        let last = filled.iter().max().copied();
        let stem_done = filled.contains(&Slot::Stem);
        let suff_used = filled.iter().filter(|s| **s == Slot::Suff).count();
        self.slots
            .iter()
            .map(|s| s.slot)
            .filter(|&slot| {
                let after = last.is_none_or(|l| slot > l);
                let repeat = slot == Slot::Suff && last == Some(Slot::Suff) && suff_used < self.suffix_columns;
                let reachable = stem_done || slot <= Slot::Stem;
                (after || repeat) && reachable
            })
            .collect()
    }

    /// Whether suffix `form` may directly follow itself.
    pub fn suffix_iterable(&self, form: &str) -> bool {
        self.lookup(Slot::Suff).any(|m| m.form == form && m.has_tag("iterable"))
    }

    /// Checks slot ordering of a morpheme sequence: non-decreasing slots, one
    /// STEM, no repeated non-repeatable slot, at most `suffix_columns` SUFF,
    /// and no suffix directly repeated unless it is iterable.
    pub fn validate_order<S: AsRef<str>>(&self, seq: &[(Slot, S)]) -> bool {
        let mut prev: Option<Slot> = None;
        let mut stems = 0;
        let mut suffixes = 0;
        let mut prev_pair: Option<(Slot, &str)> = None;
        for (slot, form) in seq {
            if form.as_ref().is_empty() || !self.has_slot(*slot) {
                return false;
            }
            if let Some(p) = prev {
                if *slot < p || (*slot == p && *slot != Slot::Suff) {
                    return false;
                }
            }
            if let Some((Slot::Suff, pf)) = prev_pair {
                if *slot == Slot::Suff && pf == form.as_ref() && !self.suffix_iterable(pf) {
                    return false;
                }
            }
            prev_pair = Some((*slot, form.as_ref()));
            match slot {
                Slot::Stem => stems += 1,
                Slot::Suff => suffixes += 1,
                _ => {}
            }
            prev = Some(*slot);
        }
        stems == 1 && suffixes <= self.suffix_columns
    }

    /// Renders the inventory back into its file format.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for s in &self.slots {
            let flag = if s.required {
                "required"
            } else if s.repeatable {
                "repeatable"
            } else {
                "-"
            };
            out.push_str(&format!("{}\t{}\t-\t-\t{}\n", s.id(), s.slot, flag));
        }
        for m in &self.morphemes {
            let number = if m.slot == Slot::Suff {
                self.suffix_home.get(&m.form).map(|c| c.to_string())
            } else {
                m.class_id.map(|c| c.to_string())
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                m.slot.id(),
                m.slot,
                m.form,
                number.as_deref().unwrap_or("-"),
                m.tag.as_deref().unwrap_or("-")
            ));
        }
        out
    }
}
