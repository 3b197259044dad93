//! Morpheme association constraints.
//!
//! A rule `{V;NEG;ta} => {!V;PRE_IN;nti}` reads: whenever a verb has `ta` in
//! `NEG`, it must not have `nti` in `PRE-IN`. A pattern is
//! `{[!]pos;SLOT;value}` where value is a literal deep form, `/regex/` or
//! `#n` (form length in characters). Patterns match existentially over the
//! cells of their slot; a negated pattern matches when no cell does. Only the
//! `V` part of speech exists in this toolkit, so patterns for any other never
//! match. A segmentation is accepted when every rule holds.

use std::fmt;

use regex::Regex;

use crate::error::{Error, Result};
use crate::morphotactics::Slot;

pub const DEFAULT_CONSTRAINTS: &str = include_str!("../data/constraints.rules");

#[derive(Clone, Debug)]
pub enum ValueMatcher {
    Literal(String),
    Regex(Regex),
    Length(usize),
}

impl ValueMatcher {
    fn matches(&self, form: &str) -> bool {
        match self {
            ValueMatcher::Literal(s) => form == s,
            ValueMatcher::Regex(re) => re.is_match(form),
            ValueMatcher::Length(n) => form.chars().count() == *n,
        }
    }
}

impl fmt::Display for ValueMatcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueMatcher::Literal(s) => f.write_str(s),
            ValueMatcher::Regex(re) => write!(f, "/{}/", re.as_str()),
            ValueMatcher::Length(n) => write!(f, "#{n}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Pattern {
    pub negated: bool,
    pub pos: String,
    pub slot: Slot,
    pub value: ValueMatcher,
}

impl Pattern {
    pub fn matches<S: AsRef<str>>(&self, cells: &[(Slot, S)]) -> bool {
        let hit = self.pos == "V"
            && cells
                .iter()
                .any(|(slot, form)| *slot == self.slot && self.value.matches(form.as_ref()));
        hit != self.negated
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bang = if self.negated { "!" } else { "" };
        let slot = self.slot.name().replace('-', "_");
        write!(f, "{{{bang}{};{slot};{}}}", self.pos, self.value)
    }
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub antecedent: Pattern,
    pub consequent: Pattern,
}

impl Constraint {
    pub fn holds<S: AsRef<str>>(&self, cells: &[(Slot, S)]) -> bool {
        !self.antecedent.matches(cells) || self.consequent.matches(cells)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.antecedent, self.consequent)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConstraintSet {
    rules: Vec<Constraint>,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::RuleSyntax {
            line: self.line,
            column: self.text[..self.pos].chars().count() + 1,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(self.err(format!("expected {token:?}")))
        }
    }

    /// Reads up to (not including) the next `;` or `}`.
    fn field(&mut self) -> &'a str {
        let rest = &self.text[self.pos..];
        let end = rest.find([';', '}']).unwrap_or(rest.len());
        self.pos += end;
        rest[..end].trim()
    }

    fn pattern(&mut self) -> Result<Pattern> {
        self.expect("{")?;
        self.skip_ws();
        let negated = self.text[self.pos..].starts_with('!');
        if negated {
            self.pos += 1;
        }
        let pos_start = self.pos;
        let pos = self.field();
        if pos.is_empty() || !pos.chars().all(|c| c.is_ascii_alphabetic()) {
            self.pos = pos_start;
            return Err(self.err("expected a part-of-speech tag"));
        }
        self.expect(";")?;
        self.skip_ws();
        let slot_start = self.pos;
        let slot_name = self.field();
        let slot = slot_name.parse::<Slot>().map_err(|_| {
            self.pos = slot_start;
            self.err(format!("unknown slot {slot_name:?}"))
        })?;
        self.expect(";")?;
        self.skip_ws();
        let value_start = self.pos;
        let value = if self.text[self.pos..].starts_with('/') {
            let body = &self.text[self.pos + 1..];
            let end = body.find('/').ok_or_else(|| self.err("unterminated regex"))?;
            let re = Regex::new(&body[..end]).map_err(|e| self.err(format!("bad regex: {e}")))?;
            self.pos += end + 2;
            ValueMatcher::Regex(re)
        } else if self.text[self.pos..].starts_with('#') {
            self.pos += 1;
            let digits = self.field();
            let n = digits.parse::<usize>().map_err(|_| {
                self.pos = value_start;
                self.err("expected a length after '#'")
            })?;
            ValueMatcher::Length(n)
        } else {
            let lit = self.field();
            if lit.is_empty() {
                return Err(self.err("empty value"));
            }
            ValueMatcher::Literal(lit.to_string())
        };
        self.expect("}")?;
        Ok(Pattern {
            negated,
            pos: pos.to_string(),
            slot,
            value,
        })
    }
}

impl ConstraintSet {
    pub fn default_kinyarwanda() -> ConstraintSet {
        ConstraintSet::parse(DEFAULT_CONSTRAINTS).expect("shipped constraints are valid")
    }

    pub fn new(rules: Vec<Constraint>) -> ConstraintSet {
        ConstraintSet { rules }
    }

    /// Parses one rule per line; `#` starts a comment at the beginning of a
    /// line. Errors carry the 1-based line and column.
    pub fn parse(source: &str) -> Result<ConstraintSet> {
        let mut rules = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            rules.push(Self::parse_rule_at(line, idx + 1)?);
        }
        Ok(ConstraintSet { rules })
    }

    pub fn parse_rule(text: &str) -> Result<Constraint> {
        Self::parse_rule_at(text, 1)
    }

    fn parse_rule_at(text: &str, line: usize) -> Result<Constraint> {
        let mut cur = Cursor { text, pos: 0, line };
        let antecedent = cur.pattern()?;
        cur.expect("=>")?;
        let consequent = cur.pattern()?;
        cur.skip_ws();
        if cur.pos != text.len() {
            return Err(cur.err("trailing input"));
        }
        Ok(Constraint {
            antecedent,
            consequent,
        })
    }

    pub fn rules(&self) -> &[Constraint] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// True when every rule holds for the `(slot, deep form)` cells.
    pub fn accepts<S: AsRef<str>>(&self, cells: &[(Slot, S)]) -> bool {
        self.rules.iter().all(|r| r.holds(cells))
    }

    /// Rules violated by the cells, for diagnostics.
    pub fn violations<S: AsRef<str>>(&self, cells: &[(Slot, S)]) -> Vec<&Constraint> {
        self.rules.iter().filter(|r| !r.holds(cells)).collect()
    }
}
