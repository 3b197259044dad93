//! Event-sourced task queue: every mutation is an event appended to a
//! newline-delimited JSON log, and the state is a fold over the events.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::analyzer::Analyzer;
use crate::error::{Error, Result};
use crate::learning::{labels_for_choice, LabeledPair, WordPrediction};

/// Write a snapshot after this many events.
pub const SNAPSHOT_EVERY: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub number: usize,
    pub stem: String,
    pub lemma: String,
    /// Number of analyses with this stem.
    pub count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Open,
    Labeled,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub word: String,
    pub candidates: Vec<Candidate>,
    pub entropy: f64,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum Event {
    /// Replaces the queue.
    Queue { tasks: Vec<Task>, timestamp: u64 },
    /// `stem: None` is a skip.
    Label {
        word: String,
        annotator: String,
        stem: Option<String>,
        timestamp: u64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatorStats {
    pub labeled: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub queue: usize,
    pub open: usize,
    pub labeled: usize,
    pub skipped: usize,
    pub annotators: BTreeMap<String, AnnotatorStats>,
}

/// In-memory state derived from the events.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    tasks: BTreeMap<String, Task>,
    /// Annotators that answered (labeled or skipped) each word.
    answered: BTreeMap<String, BTreeSet<String>>,
    /// Every label event ever applied, including ones for words since
    /// dropped from the queue.
    labels: Vec<(String, String, Option<String>, Vec<Candidate>)>,
    events: usize,
}

impl State {
    pub fn apply(&mut self, event: &Event) -> Result<()> {
        match event {
            Event::Queue { tasks, .. } => {
                let mut fresh = BTreeMap::new();
                for t in tasks {
                    let mut t = t.clone();
                    t.status = self.status_of(&t.word);
                    fresh.insert(t.word.clone(), t);
                }
                self.tasks = fresh;
            }
            Event::Label {
                word, annotator, stem, ..
            } => {
                let task = self
                    .tasks
                    .get_mut(word)
                    .ok_or_else(|| Error::domain(format!("unknown task {word:?}")))?;
                if let Some(s) = stem {
                    if !task.candidates.iter().any(|c| &c.stem == s) {
                        return Err(Error::validation(format!("{s:?} is not a candidate of {word:?}")));
                    }
                    task.status = Status::Labeled;
                } else if task.status == Status::Open {
                    task.status = Status::Skipped;
                }
                self.answered
                    .entry(word.clone())
                    .or_default()
                    .insert(annotator.clone());
                self.labels
                    .push((word.clone(), annotator.clone(), stem.clone(), task.candidates.clone()));
            }
        }
        self.events += 1;
        Ok(())
    }

    fn status_of(&self, word: &str) -> Status {
        let mut status = Status::Open;
        for (w, _, stem, _) in &self.labels {
            if w == word {
                if stem.is_some() {
                    return Status::Labeled;
                }
                status = Status::Skipped;
            }
        }
        status
    }

    pub fn events(&self) -> usize {
        self.events
    }

    pub fn task(&self, word: &str) -> Option<&Task> {
        self.tasks.get(word)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &Task> {
        self.tasks.values()
    }

    /// Highest-entropy unlabeled task this annotator has not answered; ties
    /// go to the alphabetically first word.
    pub fn next_task(&self, annotator: &str) -> Option<&Task> {
        self.tasks
            .values()
            .filter(|t| t.status != Status::Labeled)
            .filter(|t| !self.answered.get(&t.word).is_some_and(|a| a.contains(annotator)))
            .min_by(|a, b| b.entropy.total_cmp(&a.entropy).then_with(|| a.word.cmp(&b.word)))
    }

    pub fn stats(&self) -> Stats {
        let mut s = Stats {
            queue: self.tasks.len(),
            ..Default::default()
        };
        for t in self.tasks.values() {
            if t.status != Status::Labeled {
                s.open += 1;
            }
        }
        for (_, annotator, stem, _) in &self.labels {
            let a = s.annotators.entry(annotator.clone()).or_default();
            if stem.is_some() {
                a.labeled += 1;
                s.labeled += 1;
            } else {
                a.skipped += 1;
                s.skipped += 1;
            }
        }
        s
    }

    /// Label lines for every non-skip event in log order, optionally only
    /// for the given annotators.
    pub fn export(&self, annotators: Option<&BTreeSet<String>>) -> Vec<LabeledPair> {
        let mut out = Vec::new();
        for (word, annotator, stem, candidates) in &self.labels {
            let Some(stem) = stem else { continue };
            if annotators.is_some_and(|set| !set.contains(annotator)) {
                continue;
            }
            let stems: Vec<&str> = candidates
                .iter()
                .flat_map(|c| std::iter::repeat_n(c.stem.as_str(), c.count.max(1) as usize))
                .collect();
            out.extend(labels_for_choice(word, &stems, stem, annotator).expect("stem validated on apply"));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    state: State,
}

/// The state plus its durable log.
#[derive(Debug)]
pub struct Store {
    state: State,
    log: Option<(PathBuf, BufWriter<File>)>,
    snapshot: Option<PathBuf>,
}

pub fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

impl Store {
    /// A store without persistence.
    pub fn in_memory() -> Store {
        Store {
            state: State::default(),
            log: None,
            snapshot: None,
        }
    }

    /// Opens `log` (created if missing), starting from `snapshot` when it is
    /// consistent with the log, then replaying the remaining events.
    pub fn open(log: &Path, snapshot: Option<&Path>) -> Result<Store> {
        let events = if log.exists() { read_events(log)? } else { Vec::new() };
        let mut state = State::default();
        if let Some(snap) = snapshot.filter(|p| p.exists()) {
            let s: Snapshot = serde_json::from_str(&fs::read_to_string(snap)?)?;
            if s.state.events <= events.len() {
                state = s.state;
            } else {
                log::warn!("snapshot is ahead of the event log; replaying from scratch");
            }
        }
        for e in &events[state.events..] {
            state.apply(e)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(log)?;
        Ok(Store {
            state,
            log: Some((log.to_path_buf(), BufWriter::new(file))),
            snapshot: snapshot.map(Path::to_path_buf),
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn log_path(&self) -> Option<&Path> {
        self.log.as_ref().map(|(p, _)| p.as_path())
    }

    /// Applies and persists an event. A rejected event leaves state and log
    /// untouched.
    pub fn record(&mut self, event: Event) -> Result<()> {
        let mut next = self.state.clone();
        next.apply(&event)?;
        if let Some((_, w)) = &mut self.log {
            serde_json::to_writer(&mut *w, &event)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        self.state = next;
        if self.state.events.is_multiple_of(SNAPSHOT_EVERY) {
            self.write_snapshot()?;
        }
        Ok(())
    }

    pub fn write_snapshot(&self) -> Result<()> {
        if let Some(path) = &self.snapshot {
            let tmp = path.with_extension("tmp");
            fs::write(
                &tmp,
                serde_json::to_string(&Snapshot {
                    state: self.state.clone(),
                })?,
            )?;
            fs::rename(tmp, path)?;
        }
        Ok(())
    }

    pub fn label(&mut self, word: &str, annotator: &str, stem: Option<&str>) -> Result<()> {
        self.record(Event::Label {
            word: word.to_string(),
            annotator: annotator.to_string(),
            stem: stem.map(str::to_string),
            timestamp: now(),
        })
    }

    pub fn replace_queue(&mut self, tasks: Vec<Task>) -> Result<()> {
        self.record(Event::Queue { tasks, timestamp: now() })
    }
}

pub fn read_events(path: &Path) -> Result<Vec<Event>> {
    fs::read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse("event log", i + 1, e.to_string())))
        .collect()
}

/// Folds a list of events from an empty state.
pub fn replay(events: &[Event]) -> Result<State> {
    let mut s = State::default();
    for e in events {
        s.apply(e)?;
    }
    Ok(s)
}

/// A task from a prediction: candidates follow the prediction's stem order.
pub fn task_from_prediction(p: &WordPrediction, analyzer: &Analyzer) -> Task {
    Task {
        word: p.word.clone(),
        candidates: p
            .stems
            .iter()
            .enumerate()
            .map(|(i, s)| candidate(i + 1, &s.stem, s.count, analyzer))
            .collect(),
        entropy: p.entropy,
        status: Status::Open,
    }
}

/// A task straight from the analyzer, with uniform probabilities; `None`
/// when the word has no analysis.
pub fn task_from_analysis(word: &str, analyzer: &Analyzer) -> Option<Task> {
    let segs = analyzer.analyze(word);
    if segs.is_empty() {
        return None;
    }
    let stems: Vec<String> = segs.iter().map(|s| s.stem().to_string()).collect();
    let probs = vec![1.0 / segs.len() as f64; segs.len()];
    let mut p = WordPrediction::new(word, &stems, &probs);
    p.stems.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.stem.cmp(&b.stem)));
    Some(task_from_prediction(&p, analyzer))
}

fn candidate(number: usize, stem: &str, count: u32, analyzer: &Analyzer) -> Candidate {
    Candidate {
        number,
        stem: stem.to_string(),
        lemma: analyzer.lemma(stem),
        count,
        gloss: analyzer
            .stem_lexicon()
            .and_then(|l| l.gloss(stem))
            .map(str::to_string),
    }
}
