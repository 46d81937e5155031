//! Detection scoring over a corpus of deliberately wrong instructions, and
//! command-length metrics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assistant::{Assistant, ReplyKind};
use crate::dialogue::{DialogueError, DialogueSession, Speaker, TranscriptEntry};
use crate::scene::{apply_install, ObjectId, Scene, SceneError};
use crate::script::{ScriptRunner, Step, StepOutcome};
use crate::validator::Verdict;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    /// `(panel, stud)` installs applied before the script runs.
    #[serde(default)]
    pub history: Vec<(u32, u32)>,
    #[serde(with = "serde_yaml::with::singleton_map_recursive")]
    pub script: Vec<Step>,
    pub expected: Verdict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCorpus {
    pub entries: Vec<CorpusEntry>,
}

impl EvalCorpus {
    pub fn from_yaml(text: &str) -> Result<Self, EvalError> {
        let corpus: EvalCorpus = serde_yaml::from_str(text).map_err(|e| EvalError::Schema(e.to_string()))?;
        for entry in &corpus.entries {
            if !entry.script.iter().any(|s| matches!(s, Step::Say(_))) {
                return Err(EvalError::Schema(format!("entry {:?} never sends a message", entry.name)));
            }
        }
        Ok(corpus)
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.entries.iter().filter(|e| e.expected == verdict).count()
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("corpus schema error: {0}")]
    Schema(String),
    #[error("entry {entry:?}: history cannot be applied: {source}")]
    History { entry: String, source: SceneError },
    #[error("entry {entry:?}: {source}")]
    Session { entry: String, source: DialogueError },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub issued: usize,
    pub detected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryOutcome {
    pub name: String,
    pub expected: Verdict,
    pub reply_kind: Option<ReplyKind>,
    pub reply_category: Option<Verdict>,
    pub detected: bool,
    pub transcript: Vec<TranscriptEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub assistant: String,
    /// Error categories only. For correct instructions see `correct`.
    pub categories: BTreeMap<Verdict, Tally>,
    /// Correct instructions: `detected` counts those that reached a confirmation request.
    pub correct: Tally,
    pub entries: Vec<EntryOutcome>,
}

impl DetectionReport {
    pub fn total(&self) -> Tally {
        self.categories.values().fold(Tally::default(), |acc, t| Tally {
            issued: acc.issued + t.issued,
            detected: acc.detected + t.detected,
        })
    }

    /// Detected over issued across the error categories; `None` for an empty corpus.
    pub fn detection_rate(&self) -> Option<f64> {
        let t = self.total();
        (t.issued > 0).then(|| t.detected as f64 / t.issued as f64)
    }
}

impl fmt::Display for DetectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "assistant: {}", self.assistant)?;
        writeln!(f, "{:<24} {:>8} {:>10}", "category", "# cases", "# detected")?;
        for v in Verdict::ERRORS {
            let t = self.categories.get(&v).copied().unwrap_or_default();
            writeln!(f, "{:<24} {:>8} {:>10}", v.label(), t.issued, t.detected)?;
        }
        let total = self.total();
        writeln!(f, "{:<24} {:>8} {:>10}", "total", total.issued, total.detected)?;
        match self.detection_rate() {
            Some(rate) => writeln!(f, "detection rate: {:.2}%", rate * 100.0)?,
            None => writeln!(f, "detection rate: n/a")?,
        }
        write!(
            f,
            "correct instructions confirmed: {}/{}",
            self.correct.detected, self.correct.issued
        )
    }
}

fn scene_with_history(base: &Scene, entry: &CorpusEntry) -> Result<Scene, EvalError> {
    entry.history.iter().try_fold(base.clone(), |scene, &(p, s)| {
        apply_install(&scene, ObjectId(p), ObjectId(s)).map_err(|source| EvalError::History {
            entry: entry.name.clone(),
            source,
        })
    })
}

/// Runs one entry in a fresh session and scores its final reply.
pub fn eval_entry(
    entry: &CorpusEntry,
    scene: &Scene,
    assistant: &dyn Assistant,
) -> Result<EntryOutcome, EvalError> {
    let scene = scene_with_history(scene, entry)?;
    let session = DialogueSession::with_id(format!("eval-{}", entry.name), scene);
    let mut runner = ScriptRunner::new(session, assistant);
    runner.run(&entry.script).map_err(|source| EvalError::Session {
        entry: entry.name.clone(),
        source,
    })?;

    let acknowledged = runner.log().iter().any(|r| {
        matches!(&r.outcome, StepOutcome::Reply(reply) if reply.kind == ReplyKind::Acknowledge)
    });
    let reply = runner.last_reply().cloned();
    let detected = match (&reply, entry.expected) {
        (Some(r), Verdict::Ok) => r.kind == ReplyKind::ConfirmRequest,
        (Some(r), expected) => {
            !acknowledged && r.is_pushback() && r.category.is_none_or(|c| c == expected)
        }
        (None, _) => false,
    };
    Ok(EntryOutcome {
        name: entry.name.clone(),
        expected: entry.expected,
        reply_kind: reply.as_ref().map(|r| r.kind),
        reply_category: reply.as_ref().and_then(|r| r.category),
        detected,
        transcript: runner.session().transcript().to_vec(),
    })
}

pub fn eval_corpus(
    corpus: &EvalCorpus,
    scene: &Scene,
    assistant: &dyn Assistant,
) -> Result<DetectionReport, EvalError> {
    let mut report = DetectionReport {
        assistant: assistant.name().to_string(),
        categories: Verdict::ERRORS.iter().map(|v| (*v, Tally::default())).collect(),
        correct: Tally::default(),
        entries: Vec::with_capacity(corpus.entries.len()),
    };
    for entry in &corpus.entries {
        let outcome = eval_entry(entry, scene, assistant)?;
        let tally = match entry.expected {
            Verdict::Ok => &mut report.correct,
            v => report.categories.entry(v).or_default(),
        };
        tally.issued += 1;
        tally.detected += usize::from(outcome.detected);
        report.entries.push(outcome);
    }
    Ok(report)
}

/// Whitespace-separated words in a spoken command.
pub fn word_count(utterance: &str) -> usize {
    utterance.split_whitespace().count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordCountMetrics {
    pub per_command: Vec<usize>,
    pub mean: Option<f64>,
}

/// Word counts of the user's commands, ignoring appended selection clauses.
pub fn word_count_metrics(transcript: &[TranscriptEntry]) -> WordCountMetrics {
    let per_command: Vec<usize> = transcript
        .iter()
        .filter(|e| e.speaker == Speaker::User)
        .map(|e| word_count(e.utterance.as_deref().unwrap_or(&e.text)))
        .collect();
    let mean = (!per_command.is_empty())
        .then(|| per_command.iter().sum::<usize>() as f64 / per_command.len() as f64);
    WordCountMetrics { per_command, mean }
}
