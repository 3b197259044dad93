use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::morphotactics::Slot;

use super::segmentation::Cell;

pub const DEFAULT_TEMPLATES: &str = include_str!("../../data/templates.txt");
pub const DEFAULT_STEMS: &str = include_str!("../../data/stems.txt");

/// Affixes that turn a bare stem into a common inflection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub affixes: Vec<(Slot, Cell)>,
}

impl Template {
    /// Parses `SUBJ:u/1,TAM:za,ASP:a`.
    pub fn parse(line: &str) -> Result<Template> {
        let mut affixes = Vec::new();
        for part in line.split(',') {
            let (slot, cell) = part
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::validation(format!("template entry {part:?} needs SLOT:form")))?;
            let slot: Slot = slot.parse()?;
            if slot == Slot::Stem {
                return Err(Error::validation("templates must not fill the STEM slot"));
            }
            affixes.push((slot, cell.parse::<Cell>()?));
        }
        Ok(Template { affixes })
    }

    /// Parses one template per line, skipping blanks and `#` comments.
    pub fn parse_list(source: &str) -> Result<Vec<Template>> {
        let mut out = Vec::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            out.push(Template::parse(line).map_err(|e| Error::parse("templates", i + 1, e.to_string()))?);
        }
        Ok(out)
    }

    pub fn default_list() -> Vec<Template> {
        Template::parse_list(DEFAULT_TEMPLATES).expect("shipped templates are valid")
    }

    /// Cells of this template around `stem`, in slot order.
    pub fn with_stem(&self, stem: &str) -> Vec<(Slot, Cell)> {
        let mut cells = self.affixes.clone();
        cells.push((Slot::Stem, Cell::new(stem)));
        cells.sort_by_key(|(s, _)| *s);
        cells
    }
}

/// A word produced from a stem by one template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inflection {
    pub surface: String,
    pub template: usize,
}

/// Known verb stems with optional glosses.
#[derive(Clone, Debug, Default)]
pub struct StemLexicon {
    stems: HashSet<String>,
    glosses: BTreeMap<String, String>,
}

impl StemLexicon {
    /// Parses `stem[TAB gloss]` lines; `#` starts a comment line.
    pub fn parse(source: &str) -> StemLexicon {
        let mut lex = StemLexicon::default();
        for line in source.lines() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (stem, gloss) = line.split_once('\t').unwrap_or((line, ""));
            let stem = stem.trim();
            lex.stems.insert(stem.to_string());
            if !gloss.trim().is_empty() {
                lex.glosses.insert(stem.to_string(), gloss.trim().to_string());
            }
        }
        lex
    }

    pub fn default_kinyarwanda() -> StemLexicon {
        StemLexicon::parse(DEFAULT_STEMS)
    }

    pub fn from_stems<I: IntoIterator<Item = S>, S: Into<String>>(stems: I) -> StemLexicon {
        StemLexicon {
            stems: stems.into_iter().map(Into::into).collect(),
            glosses: BTreeMap::new(),
        }
    }

    pub fn contains(&self, stem: &str) -> bool {
        self.stems.contains(stem)
    }

    pub fn gloss(&self, stem: &str) -> Option<&str> {
        self.glosses.get(stem).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }

    /// Stems in sorted order.
    pub fn stems(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.stems.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }
}
