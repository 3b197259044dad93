use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphotactics::Slot;
use crate::rewrite::DeepMorpheme;

/// Number of serialization columns.
pub const COLUMNS: usize = 20;
pub const STEM_COLUMN: usize = 11;
pub const FIRST_SUFFIX_COLUMN: usize = 12;
pub const LAST_SUFFIX_COLUMN: usize = 17;

/// One filled column: `form[/class][:tag][[override]]`.
///
/// The class index and tag are only kept when the inventory needs them to
/// tell morphemes apart (`u/1` vs `u/5`, imperative vs conditional `ni`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub form: String,
    pub class_id: Option<u16>,
    pub tag: Option<String>,
    /// Rewrite alternative used at the right boundary, when not the default.
    pub choice: Option<String>,
}

impl Cell {
    pub fn new(form: impl Into<String>) -> Cell {
        Cell {
            form: form.into(),
            class_id: None,
            tag: None,
            choice: None,
        }
    }

    pub fn with_class(mut self, class_id: u16) -> Cell {
        self.class_id = Some(class_id);
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Cell {
        self.tag = Some(tag.into());
        self
    }

    pub fn with_choice(mut self, choice: impl Into<String>) -> Cell {
        self.choice = Some(choice.into());
        self
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.form)?;
        if let Some(c) = self.class_id {
            write!(f, "/{c}")?;
        }
        if let Some(t) = &self.tag {
            write!(f, ":{t}")?;
        }
        if let Some(c) = &self.choice {
            write!(f, "[{c}]")?;
        }
        Ok(())
    }
}

impl FromStr for Cell {
    type Err = Error;

    fn from_str(token: &str) -> Result<Cell> {
        let bad = |msg: &str| Error::validation(format!("bad cell {token:?}: {msg}"));
        let (body, choice) = match token.find('[') {
            Some(i) => {
                let c = token[i + 1..].strip_suffix(']').ok_or_else(|| bad("unclosed '['"))?;
                (&token[..i], Some(c.to_string()))
            }
            None => (token, None),
        };
        let (body, tag) = match body.split_once(':') {
            Some((b, t)) if !t.is_empty() => (b, Some(t.to_string())),
            Some(_) => return Err(bad("empty tag")),
            None => (body, None),
        };
        let (form, class_id) = match body.split_once('/') {
            Some((f, c)) => (f, Some(c.parse::<u16>().map_err(|_| bad("class must be a number"))?)),
            None => (body, None),
        };
        if form.is_empty() || form == "-" || form.contains(|c: char| c.is_whitespace() || "[]/:".contains(c)) {
            return Err(bad("empty or malformed form"));
        }
        Ok(Cell {
            form: form.to_string(),
            class_id,
            tag,
            choice,
        })
    }
}

/// One analysis of a surface word laid out over the 20 template columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segmentation {
    columns: Vec<Option<Cell>>,
}

impl Segmentation {
    /// Builds a segmentation from cells in template order. Suffixes are placed
    /// at their canonical column when possible, shifted right to keep order.
    pub fn from_cells(cells: Vec<(Slot, Cell)>, suffix_home: impl Fn(&str) -> usize) -> Result<Segmentation> {
        let mut columns = vec![None; COLUMNS];
        let suffix_count = cells.iter().filter(|(s, _)| *s == Slot::Suff).count();
        if suffix_count > LAST_SUFFIX_COLUMN - FIRST_SUFFIX_COLUMN + 1 {
            return Err(Error::validation("too many suffixes"));
        }
        let mut prev_col = 0;
        let mut suffix_seen = 0;
        for (slot, cell) in cells {
            let col = if slot == Slot::Suff {
                suffix_seen += 1;
                let remaining = suffix_count - suffix_seen;
                let home = suffix_home(&cell.form).clamp(FIRST_SUFFIX_COLUMN, LAST_SUFFIX_COLUMN);
                home.max(prev_col + 1).max(FIRST_SUFFIX_COLUMN).min(LAST_SUFFIX_COLUMN - remaining)
            } else {
                slot.column()
            };
            if col <= prev_col {
                return Err(Error::validation(format!("slot {slot} out of order")));
            }
            columns[col - 1] = Some(cell);
            prev_col = col;
        }
        let seg = Segmentation { columns };
        if seg.column(STEM_COLUMN).is_none() {
            return Err(Error::validation("segmentation has no stem"));
        }
        Ok(seg)
    }

    /// Cell at a 1-based column.
    pub fn column(&self, col: usize) -> Option<&Cell> {
        self.columns.get(col.wrapping_sub(1)).and_then(Option::as_ref)
    }

    pub fn stem(&self) -> &str {
        self.column(STEM_COLUMN).map(|c| c.form.as_str()).unwrap_or("")
    }

    /// Filled cells with their slots, in column order.
    pub fn cells(&self) -> impl Iterator<Item = (Slot, &Cell)> + '_ {
        self.columns.iter().enumerate().filter_map(|(i, c)| {
            let cell = c.as_ref()?;
            Some((Slot::for_column(i + 1).expect("column in range"), cell))
        })
    }

    pub fn cell(&self, slot: Slot) -> Option<&Cell> {
        self.cells().find(|(s, _)| *s == slot).map(|(_, c)| c)
    }

    pub fn has(&self, slot: Slot) -> bool {
        self.cell(slot).is_some()
    }

    /// `(slot, deep form)` pairs, the view constraint rules operate on.
    pub fn slot_forms(&self) -> Vec<(Slot, &str)> {
        self.cells().map(|(s, c)| (s, c.form.as_str())).collect()
    }

    pub fn suffixes(&self) -> Vec<&str> {
        self.cells()
            .filter(|(s, _)| *s == Slot::Suff)
            .map(|(_, c)| c.form.as_str())
            .collect()
    }

    /// Deep morpheme sequence fed to the rewrite rules.
    pub fn deep(&self) -> Vec<DeepMorpheme> {
        self.cells()
            .map(|(slot, c)| DeepMorpheme {
                form: c.form.clone(),
                slot: Some(slot),
                choice: c.choice.clone(),
            })
            .collect()
    }

    /// Hyphenated deep forms, e.g. `ka-tu-ik-ir-w-a`.
    pub fn morpheme_sequence(&self) -> String {
        self.cells().map(|(_, c)| c.form.as_str()).collect::<Vec<_>>().join("-")
    }

    pub fn serialize(&self) -> String {
        self.columns
            .iter()
            .map(|c| c.as_ref().map_or_else(|| "-".to_string(), Cell::to_string))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses 20 space-separated tokens. Only the layout is checked here;
    /// inventory membership is checked by the analyzer.
    pub fn parse(text: &str) -> Result<Segmentation> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != COLUMNS {
            return Err(Error::validation(format!(
                "expected {COLUMNS} columns, found {}",
                tokens.len()
            )));
        }
        let columns = tokens
            .iter()
            .map(|t| if *t == "-" { Ok(None) } else { t.parse::<Cell>().map(Some) })
            .collect::<Result<Vec<_>>>()?;
        if columns[STEM_COLUMN - 1].is_none() {
            return Err(Error::validation("segmentation has no stem"));
        }
        Ok(Segmentation { columns })
    }
}

impl fmt::Display for Segmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl FromStr for Segmentation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Segmentation> {
        Segmentation::parse(s)
    }
}
