//! Morphographemic rewriting at morpheme boundaries.
//!
//! Surface forms are produced left to right. When a deep morpheme is appended,
//! the first rule whose pattern matches the boundary replaces the tail of the
//! text produced so far (`left`) together with the head of the new morpheme
//! (`right`) by its `rhs`. Consecutive rules sharing a pattern form a group of
//! alternatives (`r + y -> y` / `r + y -> z`): generation takes the first one
//! unless the left morpheme carries an override naming another `rhs`, while
//! analysis explores all of them.

use std::fmt;

use regex::Regex;

use crate::error::{Error, Result};
use crate::morphotactics::Slot;

pub const DEFAULT_RULES: &str = include_str!("../data/rewrite.rules");

pub type RuleId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Generation,
    Analysis,
    Both,
}

impl Direction {
    fn generates(self) -> bool {
        matches!(self, Direction::Generation | Direction::Both)
    }

    fn analyses(self) -> bool {
        matches!(self, Direction::Analysis | Direction::Both)
    }
}

#[derive(Clone, Debug)]
pub struct RewriteRule {
    pub left: String,
    pub right: String,
    pub rhs: String,
    pub left_context: Option<Regex>,
    pub right_context: Option<Regex>,
    pub left_slot: Option<Slot>,
    pub right_slot: Option<Slot>,
    pub direction: Direction,
}

impl RewriteRule {
    fn same_pattern(&self, other: &RewriteRule) -> bool {
        fn re(r: &Option<Regex>) -> Option<&str> {
            r.as_ref().map(Regex::as_str)
        }
        self.left == other.left
            && self.right == other.right
            && re(&self.left_context) == re(&other.left_context)
            && re(&self.right_context) == re(&other.right_context)
            && self.left_slot == other.left_slot
            && self.right_slot == other.right_slot
    }

    fn matches(&self, out: &str, left_slot: Option<Slot>, next: &str, right_slot: Option<Slot>) -> bool {
        if !out.ends_with(&self.left) || !next.starts_with(&self.right) {
            return false;
        }
        // slot conditions only bind morphemes whose slot is known
        let slot_ok = |want: Option<Slot>, have: Option<Slot>| match (want, have) {
            (Some(w), Some(h)) => w == h,
            _ => true,
        };
        if !slot_ok(self.left_slot, left_slot) || !slot_ok(self.right_slot, right_slot) {
            return false;
        }
        let before = &out[..out.len() - self.left.len()];
        let rest = &next[self.right.len()..];
        self.left_context.as_ref().is_none_or(|re| re.is_match(before))
            && self.right_context.as_ref().is_none_or(|re| re.is_match(rest))
    }

    /// `true` for the `left + right -> rhs` shape (ignoring contexts).
    pub fn is(&self, left: &str, right: &str, rhs: &str) -> bool {
        self.left == left && self.right == right && self.rhs == rhs
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs = match (self.left.is_empty(), self.right.is_empty()) {
            (false, false) => format!("{} + {}", self.left, self.right),
            (false, true) => format!("{} +", self.left),
            (true, _) => format!("+ {}", self.right),
        };
        write!(f, "{lhs} -> {}", self.rhs)?;
        if let Some(re) = &self.left_context {
            write!(f, " [left:{}]", re.as_str())?;
        }
        if let Some(re) = &self.right_context {
            write!(f, " [right:{}]", re.as_str())?;
        }
        if let Some(s) = self.left_slot {
            write!(f, " [lslot:{s}]")?;
        }
        if let Some(s) = self.right_slot {
            write!(f, " [rslot:{s}]")?;
        }
        let dir = match self.direction {
            Direction::Generation => "gen",
            Direction::Analysis => "ana",
            Direction::Both => "both",
        };
        write!(f, " {dir}")
    }
}

/// One deep morpheme to render.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeepMorpheme {
    pub form: String,
    pub slot: Option<Slot>,
    /// `rhs` of the alternative to use at this morpheme's right boundary.
    pub choice: Option<String>,
}

impl DeepMorpheme {
    pub fn new(form: impl Into<String>) -> Self {
        DeepMorpheme {
            form: form.into(),
            slot: None,
            choice: None,
        }
    }

    pub fn in_slot(form: impl Into<String>, slot: Slot) -> Self {
        DeepMorpheme {
            form: form.into(),
            slot: Some(slot),
            choice: None,
        }
    }

    /// Parses a hyphenated deep string such as `n-a-fat[sh]-ye` or
    /// `N_AUG:u-a-som-ye`.
    pub fn parse_sequence(text: &str) -> Result<Vec<DeepMorpheme>> {
        text.split('-')
            .map(|tok| {
                let (slot, rest) = match tok.split_once(':') {
                    Some((s, r)) => (Some(s.parse::<Slot>()?), r),
                    None => (None, tok),
                };
                let (form, choice) = match rest.split_once('[') {
                    Some((f, c)) => {
                        let c = c
                            .strip_suffix(']')
                            .ok_or_else(|| Error::validation(format!("unclosed override in {tok:?}")))?;
                        (f, Some(c.to_string()))
                    }
                    None => (rest, None),
                };
                if form.is_empty() {
                    return Err(Error::validation(format!("empty morpheme in {text:?}")));
                }
                Ok(DeepMorpheme {
                    form: form.to_string(),
                    slot,
                    choice,
                })
            })
            .collect()
    }
}

/// One way a morpheme may be realized at a surface position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Realization {
    /// Surface characters (bytes) covered.
    pub consumed: usize,
    pub rule: Option<RuleId>,
    /// Head of the next deep morpheme already accounted for by the rule.
    pub consumes_next: String,
}

/// One analysis option at a boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alternative {
    pub rule: Option<RuleId>,
    /// Override to record on the left morpheme, set when this is not the
    /// generation default.
    pub annotation: Option<String>,
}

/// An ordered, immutable rule table.
#[derive(Clone, Debug, Default)]
pub struct RuleSet {
    rules: Vec<RewriteRule>,
    group_end: Vec<usize>,
}

impl RuleSet {
    pub fn default_kinyarwanda() -> RuleSet {
        RuleSet::parse(DEFAULT_RULES).expect("shipped rewrite rules are valid")
    }

    pub fn new(rules: Vec<RewriteRule>) -> RuleSet {
        let mut group_end = vec![0; rules.len()];
        let mut i = 0;
        while i < rules.len() {
            let mut j = i + 1;
            while j < rules.len() && rules[j].same_pattern(&rules[i]) {
                j += 1;
            }
            for g in &mut group_end[i..j] {
                *g = j;
            }
            i = j;
        }
        RuleSet { rules, group_end }
    }

    /// Parses the rule file format:
    /// `lhs -> rhs [left:<re>] [right:<re>] [lslot:S] [rslot:S] [gen|ana|both]`.
    pub fn parse(source: &str) -> Result<RuleSet> {
        const WHAT: &str = "rewrite rules";
        let mut rules = Vec::new();
        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rest) = line
                .split_once("->")
                .ok_or_else(|| Error::parse(WHAT, line_no, "missing '->'"))?;
            let (left, right) = match lhs.split_once('+') {
                Some((l, r)) => (l.trim(), r.trim()),
                None => (lhs.trim(), ""),
            };
            if left.is_empty() && right.is_empty() {
                return Err(Error::parse(WHAT, line_no, "empty left-hand side"));
            }
            let rest = rest.trim();
            let (rhs, mut opts) = match rest.find('[') {
                Some(i) => (rest[..i].trim(), &rest[i..]),
                None => {
                    let mut parts = rest.rsplitn(2, char::is_whitespace);
                    let last = parts.next().unwrap_or("");
                    if matches!(last, "gen" | "ana" | "both") {
                        (parts.next().unwrap_or("").trim(), last)
                    } else {
                        (rest, "")
                    }
                }
            };
            let mut rule = RewriteRule {
                left: left.to_string(),
                right: right.to_string(),
                rhs: rhs.to_string(),
                left_context: None,
                right_context: None,
                left_slot: None,
                right_slot: None,
                direction: Direction::Both,
            };
            loop {
                opts = opts.trim_start();
                if opts.is_empty() {
                    break;
                }
                if let Some(body) = opts.strip_prefix('[') {
                    // a condition ends at the first ']' followed by whitespace or the line end
                    let end = body
                        .match_indices(']')
                        .map(|(i, _)| i)
                        .find(|&i| body[i + 1..].chars().next().is_none_or(char::is_whitespace))
                        .ok_or_else(|| Error::parse(WHAT, line_no, "unclosed '['"))?;
                    let (key, value) = body[..end]
                        .split_once(':')
                        .ok_or_else(|| Error::parse(WHAT, line_no, "condition needs key:value"))?;
                    let regex = |v: &str| {
                        Regex::new(v).map_err(|e| Error::parse(WHAT, line_no, format!("bad regex: {e}")))
                    };
                    let slot = |v: &str| {
                        v.parse::<Slot>()
                            .map_err(|e| Error::parse(WHAT, line_no, e.to_string()))
                    };
                    match key {
                        "left" => rule.left_context = Some(regex(value)?),
                        "right" => rule.right_context = Some(regex(value)?),
                        "lslot" => rule.left_slot = Some(slot(value)?),
                        "rslot" => rule.right_slot = Some(slot(value)?),
                        other => {
                            return Err(Error::parse(WHAT, line_no, format!("unknown condition {other:?}")))
                        }
                    }
                    opts = &body[end + 1..];
                } else {
                    let word = opts.split_whitespace().next().unwrap_or("");
                    rule.direction = match word {
                        "gen" => Direction::Generation,
                        "ana" => Direction::Analysis,
                        "both" => Direction::Both,
                        other => return Err(Error::parse(WHAT, line_no, format!("unexpected {other:?}"))),
                    };
                    opts = &opts[word.len()..];
                }
            }
            rules.push(rule);
        }
        Ok(RuleSet::new(rules))
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn get(&self, id: RuleId) -> &RewriteRule {
        &self.rules[id]
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Longest `left` part; bounds how far back an append can rewrite.
    pub fn max_left(&self) -> usize {
        self.rules.iter().map(|r| r.left.len()).max().unwrap_or(0)
    }

    /// Largest amount by which a single append can shorten the text. An
    /// empty `right` leaves at least one character of the next morpheme.
    pub fn max_shrink(&self) -> usize {
        self.rules
            .iter()
            .map(|r| r.left.len().saturating_sub(r.rhs.len() + usize::from(r.right.is_empty())))
            .max()
            .unwrap_or(0)
    }

    pub fn max_rhs(&self) -> usize {
        self.rules.iter().map(|r| r.rhs.len()).max().unwrap_or(0)
    }

    fn group_at(&self, out: &str, left_slot: Option<Slot>, next: &str, right_slot: Option<Slot>) -> Option<std::ops::Range<usize>> {
        let first = self
            .rules
            .iter()
            .position(|r| r.matches(out, left_slot, next, right_slot))?;
        Some(first..self.group_end[first])
    }

    fn default_in(&self, group: &std::ops::Range<usize>) -> Option<RuleId> {
        group.clone().find(|&i| self.rules[i].direction.generates())
    }

    /// Rule used by generation at a boundary, honouring an override.
    pub fn choose(
        &self,
        out: &str,
        left_slot: Option<Slot>,
        choice: Option<&str>,
        next: &str,
        right_slot: Option<Slot>,
    ) -> Option<RuleId> {
        let group = self.group_at(out, left_slot, next, right_slot)?;
        if let Some(c) = choice {
            if let Some(i) = group.clone().find(|&i| self.rules[i].rhs == c) {
                return Some(i);
            }
        }
        self.default_in(&group)
    }

    /// Whether `choice` names a member of the group at this boundary.
    pub fn choice_is_valid(&self, out: &str, left_slot: Option<Slot>, choice: &str, next: &str, right_slot: Option<Slot>) -> bool {
        self.group_at(out, left_slot, next, right_slot)
            .is_some_and(|g| g.clone().any(|i| self.rules[i].rhs == choice))
    }

    /// Every analysis option at a boundary.
    pub fn alternatives(&self, out: &str, left_slot: Option<Slot>, next: &str, right_slot: Option<Slot>) -> Vec<Alternative> {
        let Some(group) = self.group_at(out, left_slot, next, right_slot) else {
            return vec![Alternative {
                rule: None,
                annotation: None,
            }];
        };
        let default = self.default_in(&group);
        let mut alts = vec![Alternative {
            rule: default,
            annotation: None,
        }];
        for i in group {
            if Some(i) != default && self.rules[i].direction.analyses() {
                alts.push(Alternative {
                    rule: Some(i),
                    annotation: Some(self.rules[i].rhs.clone()),
                });
            }
        }
        alts
    }

    /// Appends `next` to `out` through `rule` (plain concatenation for `None`).
    pub fn apply(&self, out: &mut String, rule: Option<RuleId>, next: &str) {
        match rule {
            Some(id) => {
                let r = &self.rules[id];
                out.truncate(out.len() - r.left.len());
                out.push_str(&r.rhs);
                out.push_str(&next[r.right.len()..]);
            }
            None => out.push_str(next),
        }
    }

    /// Renders a deep sequence and reports the rule applied at each boundary.
    pub fn render_trace(&self, deep: &[DeepMorpheme]) -> (String, Vec<Option<RuleId>>) {
        let mut out = String::new();
        let mut trace = Vec::with_capacity(deep.len().saturating_sub(1));
        let mut prev: Option<&DeepMorpheme> = None;
        for m in deep {
            match prev {
                None => out.push_str(&m.form),
                Some(p) => {
                    let rule = self.choose(&out, p.slot, p.choice.as_deref(), &m.form, m.slot);
                    self.apply(&mut out, rule, &m.form);
                    trace.push(rule);
                }
            }
            prev = Some(m);
        }
        (out, trace)
    }

    /// Surface form of a deep sequence. Total and deterministic.
    pub fn to_surface(&self, deep: &[DeepMorpheme]) -> String {
        self.render_trace(deep).0
    }

    /// Convenience for plain forms without slots or overrides.
    pub fn to_surface_forms<S: AsRef<str>>(&self, forms: &[S]) -> String {
        let deep: Vec<_> = forms.iter().map(|f| DeepMorpheme::new(f.as_ref())).collect();
        self.to_surface(&deep)
    }

    /// Every way `form` can be realized at byte offset `at` of `surface`,
    /// either verbatim or with its tail rewritten by a rule. Contexts that
    /// depend on the following morpheme are not checked.
    pub fn from_surface_matches(&self, surface: &str, form: &str, at: usize) -> Vec<Realization> {
        let mut found = Vec::new();
        if at > surface.len() || !surface.is_char_boundary(at) {
            return found;
        }
        let rest = &surface[at..];
        if rest.starts_with(form) {
            found.push(Realization {
                consumed: form.len(),
                rule: None,
                consumes_next: String::new(),
            });
        }
        for (id, r) in self.rules.iter().enumerate() {
            if !form.ends_with(&r.left) || (r.left.is_empty() && r.right.is_empty()) {
                continue;
            }
            let kept = &form[..form.len() - r.left.len()];
            let realized = format!("{kept}{}", r.rhs);
            if !rest.starts_with(&realized) {
                continue;
            }
            let before = format!("{}{kept}", &surface[..at]);
            if r.left_context.as_ref().is_some_and(|re| !re.is_match(&before)) {
                continue;
            }
            found.push(Realization {
                consumed: realized.len(),
                rule: Some(id),
                consumes_next: r.right.clone(),
            });
        }
        found.sort();
        found.dedup();
        found
    }
}
