//! The instruction-approval session.
//!
//! ```text
//! AwaitingInstruction --ConfirmRequest--> AwaitingConfirmation --"yes" / OKAY!!!--> ReadyForApproval
//!        ^                                      |                                      |
//!        +---- Clarification / Rejection -------+                                   approve
//!        |                                                                             v
//!        +------------------------- complete(success | failure) <---------------- Dispatching
//! ```
//!
//! While an assistant call is in flight the session sits in `AssistantPending`
//! and refuses further messages. The scene only changes in [`DialogueSession::complete`].

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assistant::{Assistant, AssistantError, AssistantReply, ReplyKind, Turn};
use crate::dispatch::TaskCommand;
use crate::fusion::{compose, record_selection, Highlight, SelectionBatch, SelectionError};
use crate::parser::{extract_ids, parse_command, Action};
use crate::scene::{apply_install, ObjectId, Scene};
use crate::validator::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DialogueState {
    AwaitingInstruction,
    AwaitingConfirmation,
    ReadyForApproval,
    Dispatching,
    AssistantPending,
}

impl fmt::Display for DialogueState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A `(panel, stud)` pair under discussion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PendingTask {
    pub panel: ObjectId,
    pub stud: ObjectId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    User,
    Assistant,
    System,
    Robot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub speaker: Speaker,
    pub text: String,
    pub at: DateTime<Utc>,
    /// For user entries: the spoken part before selection clauses were appended.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utterance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply_kind: Option<ReplyKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TaskOutcome {
    Success,
    Failed { reason: String },
}

#[derive(Debug, Error)]
pub enum DialogueError {
    #[error("session is busy ({0}); try again when it is idle")]
    Busy(DialogueState),
    #[error("a task is waiting for approval; approve it or cancel")]
    AwaitingApproval,
    #[error("nothing approved: the session is {0}, approval needs an OKAY!!! acknowledgment first")]
    NothingApproved(DialogueState),
    #[error("ids extracted from the confirmation ({extracted}) do not match the pending task (panel {panel}, stud {stud})")]
    ExtractionMismatch {
        extracted: String,
        panel: ObjectId,
        stud: ObjectId,
    },
    #[error("no task is being dispatched (session is {0})")]
    NotDispatching(DialogueState),
    #[error("no assistant call is in flight")]
    NoTurnInFlight,
    #[error("nothing to cancel in state {0}")]
    NothingToCancel(DialogueState),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Assistant(#[from] AssistantError),
}

#[derive(Debug, Clone)]
struct Suspended {
    state: DialogueState,
    task: Option<PendingTask>,
}

#[derive(Debug, Clone)]
pub struct DialogueSession {
    id: String,
    state: DialogueState,
    scene: Scene,
    pending_task: Option<PendingTask>,
    offered_task: Option<PendingTask>,
    last_confirm_text: Option<String>,
    transcript: Vec<TranscriptEntry>,
    selections: SelectionBatch,
    suspended: Option<Suspended>,
    started_at: DateTime<Utc>,
}

impl DialogueSession {
    pub fn new(scene: Scene) -> Self {
        Self::with_id(uuid::Uuid::new_v4().to_string(), scene)
    }

    pub fn with_id(id: impl Into<String>, scene: Scene) -> Self {
        Self {
            id: id.into(),
            state: DialogueState::AwaitingInstruction,
            scene,
            pending_task: None,
            offered_task: None,
            last_confirm_text: None,
            transcript: Vec::new(),
            selections: SelectionBatch::new(),
            suspended: None,
            started_at: Utc::now(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn state(&self) -> DialogueState {
        self.state
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn pending_task(&self) -> Option<PendingTask> {
        self.pending_task
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn selections(&self) -> &SelectionBatch {
        &self.selections
    }

    pub fn started_at(&self) -> DateTime<Utc> {
        self.started_at
    }

    fn note(&mut self, speaker: Speaker, text: impl Into<String>) {
        self.transcript.push(TranscriptEntry {
            speaker,
            text: text.into(),
            at: Utc::now(),
            utterance: None,
            reply_kind: None,
        });
    }

    /// Records a pointing selection for the next message.
    pub fn select(&mut self, object_id: ObjectId) -> Result<Highlight, DialogueError> {
        Ok(record_selection(&mut self.selections, &self.scene, object_id)?)
    }

    /// First half of a submit: fuse, parse, validate, and park the session in
    /// `AssistantPending` until [`finish_turn`](Self::finish_turn).
    pub fn begin_turn(&mut self, utterance: &str) -> Result<Turn, DialogueError> {
        match self.state {
            DialogueState::AwaitingInstruction | DialogueState::AwaitingConfirmation => {}
            DialogueState::ReadyForApproval => return Err(DialogueError::AwaitingApproval),
            busy => return Err(DialogueError::Busy(busy)),
        }
        let command = compose(utterance, &mut self.selections);
        let intent = parse_command(&command, &self.scene);
        let verdict = match intent.action {
            Action::PickPlace => Some(validate(&self.scene, &intent).expect("pick-place intent validates")),
            _ => None,
        };
        let turn = Turn {
            state: self.state,
            pending_task: self.pending_task,
            offered_task: self.offered_task,
            command,
            intent,
            verdict,
            scene: self.scene.clone(),
            history: self.transcript.clone(),
        };
        self.suspended = Some(Suspended {
            state: self.state,
            task: self.pending_task,
        });
        self.state = DialogueState::AssistantPending;
        self.pending_task = None;
        Ok(turn)
    }

    /// Second half of a submit: record the exchange and move the state machine.
    pub fn finish_turn(
        &mut self,
        turn: &Turn,
        reply: Result<AssistantReply, AssistantError>,
    ) -> Result<AssistantReply, DialogueError> {
        let Some(prior) = self.suspended.take() else {
            return Err(DialogueError::NoTurnInFlight);
        };
        self.transcript.push(TranscriptEntry {
            speaker: Speaker::User,
            text: turn.command.text.clone(),
            at: Utc::now(),
            utterance: Some(turn.command.utterance.clone()),
            reply_kind: None,
        });

        let reply = match reply {
            Ok(r) => r,
            Err(e) => {
                self.state = prior.state;
                self.pending_task = prior.task;
                self.note(Speaker::System, format!("assistant unavailable: {e}"));
                return Err(e.into());
            }
        };

        self.transcript.push(TranscriptEntry {
            speaker: Speaker::Assistant,
            text: reply.text.clone(),
            at: Utc::now(),
            utterance: None,
            reply_kind: Some(reply.kind),
        });

        let restore = |s: &mut Self| {
            s.state = prior.state;
            s.pending_task = prior.task;
        };
        let reset = |s: &mut Self| {
            s.state = DialogueState::AwaitingInstruction;
            s.pending_task = None;
            s.last_confirm_text = None;
        };

        match reply.kind {
            ReplyKind::Acknowledge => {
                let confirmed = prior.state == DialogueState::AwaitingConfirmation
                    && turn.intent.action == Action::Confirm
                    && prior.task.is_some();
                if confirmed {
                    self.state = DialogueState::ReadyForApproval;
                    self.pending_task = prior.task;
                } else {
                    restore(self);
                    self.note(
                        Speaker::System,
                        "acknowledgment ignored: no confirmed interpretation to approve",
                    );
                }
            }
            ReplyKind::ConfirmRequest => match reply.cited_pair() {
                Some(task) => {
                    self.state = DialogueState::AwaitingConfirmation;
                    self.pending_task = Some(task);
                    self.last_confirm_text = Some(reply.text.clone());
                }
                None => reset(self),
            },
            ReplyKind::ReAsk if prior.state == DialogueState::AwaitingConfirmation => restore(self),
            ReplyKind::ReAsk | ReplyKind::Clarification | ReplyKind::Rejection => reset(self),
        }
        self.offered_task = match reply.kind {
            ReplyKind::Rejection => reply.cited_pair(),
            _ => None,
        };
        Ok(reply)
    }

    /// Runs a full turn against `assistant`.
    pub fn submit(
        &mut self,
        utterance: &str,
        assistant: &dyn Assistant,
    ) -> Result<AssistantReply, DialogueError> {
        let turn = self.begin_turn(utterance)?;
        let reply = assistant.respond(&turn);
        self.finish_turn(&turn, reply)
    }

    /// The human approval step. Emits the task for the robot.
    pub fn approve(&mut self) -> Result<TaskCommand, DialogueError> {
        if self.state != DialogueState::ReadyForApproval {
            return Err(DialogueError::NothingApproved(self.state));
        }
        let task = self.pending_task.expect("ReadyForApproval carries a task");
        let text = self.last_confirm_text.as_deref().unwrap_or("");
        let ids = extract_ids(text, &self.scene);
        if ids.panels != [task.panel] || ids.studs != [task.stud] || !ids.unknown.is_empty() {
            return Err(DialogueError::ExtractionMismatch {
                extracted: format!("panels {:?}, studs {:?}", ids.panels, ids.studs),
                panel: task.panel,
                stud: task.stud,
            });
        }
        self.state = DialogueState::Dispatching;
        self.note(
            Speaker::System,
            format!("approved: dispatching panel {} to stud {}", task.panel, task.stud),
        );
        Ok(TaskCommand::pick_place(task.panel, task.stud, &self.id))
    }

    /// Abandons an interpretation that is awaiting confirmation or approval.
    pub fn cancel(&mut self) -> Result<(), DialogueError> {
        match self.state {
            DialogueState::AwaitingConfirmation | DialogueState::ReadyForApproval => {
                self.state = DialogueState::AwaitingInstruction;
                self.pending_task = None;
                self.last_confirm_text = None;
                self.note(Speaker::System, "pending task cancelled");
                Ok(())
            }
            other => Err(DialogueError::NothingToCancel(other)),
        }
    }

    /// Applies the robot's result. Only a success changes the scene.
    pub fn complete(&mut self, outcome: TaskOutcome) -> Result<(), DialogueError> {
        if self.state != DialogueState::Dispatching {
            return Err(DialogueError::NotDispatching(self.state));
        }
        let task = self.pending_task.take().expect("Dispatching carries a task");
        self.state = DialogueState::AwaitingInstruction;
        self.last_confirm_text = None;
        match outcome {
            TaskOutcome::Success => match apply_install(&self.scene, task.panel, task.stud) {
                Ok(next) => {
                    self.scene = next;
                    self.note(
                        Speaker::Robot,
                        format!("panel {} installed on stud {}", task.panel, task.stud),
                    );
                }
                Err(e) => self.note(Speaker::Robot, format!("install not recorded: {e}")),
            },
            TaskOutcome::Failed { reason } => self.note(
                Speaker::Robot,
                format!(
                    "task failed for panel {} on stud {}: {reason}; scene unchanged",
                    task.panel, task.stud
                ),
            ),
        }
        Ok(())
    }

    /// Checks the state/pending-task invariant. Used by tests and debug builds.
    pub fn check_invariants(&self) -> Result<(), String> {
        let needs_task = matches!(
            self.state,
            DialogueState::AwaitingConfirmation | DialogueState::ReadyForApproval | DialogueState::Dispatching
        );
        if needs_task != self.pending_task.is_some() {
            return Err(format!(
                "state {} with pending task {:?}",
                self.state, self.pending_task
            ));
        }
        if (self.state == DialogueState::AssistantPending) != self.suspended.is_some() {
            return Err("suspended turn does not match AssistantPending".into());
        }
        Ok(())
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            state: self.state,
            pending_task: self.pending_task,
            pending_selections: self.selections.events().iter().map(|e| (e.role, e.object_id)).collect(),
            approve_enabled: self.state == DialogueState::ReadyForApproval,
            elapsed_ms: (Utc::now() - self.started_at).num_milliseconds().max(0) as u64,
            transcript: self.transcript.clone(),
            scene: self
                .scene
                .objects()
                .map(|o| ObjectView {
                    id: o.id,
                    kind: o.kind,
                    name: o.name.clone(),
                    area_label: o.area_label,
                    installed_on: o.installed_on,
                    occupied_by: o.occupied_by,
                })
                .collect(),
        }
    }
}

/// Serializable snapshot for clients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub state: DialogueState,
    pub pending_task: Option<PendingTask>,
    pub pending_selections: Vec<(crate::fusion::SelectionRole, ObjectId)>,
    pub approve_enabled: bool,
    pub elapsed_ms: u64,
    pub transcript: Vec<TranscriptEntry>,
    pub scene: Vec<ObjectView>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectView {
    pub id: ObjectId,
    pub kind: crate::scene::ObjectKind,
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_label: Option<crate::scene::AreaLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub installed_on: Option<ObjectId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupied_by: Option<ObjectId>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assistant::{ReferenceAssistant, UnavailableKind};
    use crate::scene::{available_ids, ObjectKind};
    use crate::validator::{validate_pair, Verdict};

    fn session() -> DialogueSession {
        DialogueSession::with_id("s1", Scene::reference())
    }

    fn task(p: u32, s: u32) -> PendingTask {
        PendingTask {
            panel: ObjectId(p),
            stud: ObjectId(s),
        }
    }

    #[test]
    fn happy_path_single_install() {
        let rule = ReferenceAssistant;
        let mut s = session();
        let r = s.submit("Panel 504 to stud 606", &rule).unwrap();
        assert_eq!(r.kind, ReplyKind::ConfirmRequest);
        assert_eq!(s.state(), DialogueState::AwaitingConfirmation);
        assert_eq!(s.pending_task(), Some(task(504, 606)));

        let r = s.submit("yes", &rule).unwrap();
        assert_eq!(r.text, "OKAY!!!");
        assert_eq!(s.state(), DialogueState::ReadyForApproval);

        let cmd = s.approve().unwrap();
        assert_eq!((cmd.target_id, cmd.destination_id), (ObjectId(504), ObjectId(606)));
        assert_eq!(cmd.session, "s1");
        assert_eq!(s.state(), DialogueState::Dispatching);
        // scene does not move until completion
        assert!(s.scene().installations().is_empty());

        s.complete(TaskOutcome::Success).unwrap();
        assert_eq!(s.state(), DialogueState::AwaitingInstruction);
        assert_eq!(s.scene().get(ObjectId(504)).unwrap().installed_on, Some(ObjectId(606)));
        assert_eq!(validate_pair(s.scene(), ObjectId(502), ObjectId(606)).verdict, Verdict::AlreadyInstalled);
        s.check_invariants().unwrap();
    }

    #[test]
    fn blank_message_reasks() {
        let mut s = session();
        let r = s.submit("", &ReferenceAssistant).unwrap();
        assert_eq!(r.kind, ReplyKind::ReAsk);
        assert_eq!(s.state(), DialogueState::AwaitingInstruction);
    }

    #[test]
    fn blank_while_confirming_keeps_pending_task() {
        let mut s = session();
        s.submit("Panel 504 to stud 606", &ReferenceAssistant).unwrap();
        let r = s.submit("", &ReferenceAssistant).unwrap();
        assert_eq!(r.kind, ReplyKind::ReAsk);
        assert_eq!(s.state(), DialogueState::AwaitingConfirmation);
        assert_eq!(s.pending_task(), Some(task(504, 606)));
    }

    #[test]
    fn approve_requires_acknowledgment() {
        let mut s = session();
        assert!(matches!(s.approve(), Err(DialogueError::NothingApproved(_))));
        s.submit("Panel 504 to stud 606", &ReferenceAssistant).unwrap();
        assert!(matches!(s.approve(), Err(DialogueError::NothingApproved(_))));
    }

    #[test]
    fn double_approve_errors() {
        let mut s = session();
        s.submit("Panel 504 to stud 606", &ReferenceAssistant).unwrap();
        s.submit("yes", &ReferenceAssistant).unwrap();
        s.approve().unwrap();
        assert!(matches!(s.approve(), Err(DialogueError::NothingApproved(DialogueState::Dispatching))));
        assert!(matches!(
            s.submit("Panel 501 to stud 602", &ReferenceAssistant),
            Err(DialogueError::Busy(DialogueState::Dispatching))
        ));
    }

    #[test]
    fn extraction_mismatch_blocks_dispatch() {
        let mut s = session();
        s.submit("Panel 504 to stud 606", &ReferenceAssistant).unwrap();
        s.submit("yes", &ReferenceAssistant).unwrap();
        s.last_confirm_text = Some("Install panel 501 on stud 602?".into());
        assert!(matches!(s.approve(), Err(DialogueError::ExtractionMismatch { .. })));
        assert_eq!(s.state(), DialogueState::ReadyForApproval);
    }

    #[test]
    fn failure_leaves_scene_unchanged() {
        let mut s = session();
        s.submit("Panel 504 to stud 606", &ReferenceAssistant).unwrap();
        s.submit("yes", &ReferenceAssistant).unwrap();
        s.approve().unwrap();
        s.complete(TaskOutcome::Failed { reason: "gripper fault".into() }).unwrap();
        assert_eq!(s.state(), DialogueState::AwaitingInstruction);
        assert!(s.scene().installations().is_empty());
        assert!(s.transcript().last().unwrap().text.contains("gripper fault"));
    }

    #[test]
    fn rejection_clears_pending_and_new_instruction_replaces() {
        let mut s = session();
        s.submit("Panel 504 to stud 606", &ReferenceAssistant).unwrap();
        // a fresh instruction while confirming replaces the interpretation
        s.submit("Panel 501 to stud 602", &ReferenceAssistant).unwrap();
        assert_eq!(s.pending_task(), Some(task(501, 602)));
        s.submit("Panel 502 to stud 606", &ReferenceAssistant).unwrap();
        assert_eq!(s.state(), DialogueState::AwaitingInstruction);
        assert_eq!(s.pending_task(), None);
    }

    #[test]
    fn offered_alternative_still_needs_confirmation() {
        let mut s = session();
        let r = s.submit("Panel 504 to stud 605", &ReferenceAssistant).unwrap();
        assert_eq!(r.kind, ReplyKind::Rejection);
        let r = s.submit("yes", &ReferenceAssistant).unwrap();
        assert_eq!(r.kind, ReplyKind::ConfirmRequest);
        assert_eq!(s.pending_task(), Some(task(504, 606)));
        let r = s.submit("yes", &ReferenceAssistant).unwrap();
        assert_eq!(r.kind, ReplyKind::Acknowledge);
    }

    #[test]
    fn busy_while_assistant_pending() {
        let mut s = session();
        let turn = s.begin_turn("Panel 504 to stud 606").unwrap();
        assert_eq!(s.state(), DialogueState::AssistantPending);
        s.check_invariants().unwrap();
        assert!(matches!(s.begin_turn("yes"), Err(DialogueError::Busy(DialogueState::AssistantPending))));
        let reply = ReferenceAssistant.respond(&turn);
        s.finish_turn(&turn, reply).unwrap();
        assert_eq!(s.state(), DialogueState::AwaitingConfirmation);
    }

    #[test]
    fn unavailable_assistant_restores_state() {
        let mut s = session();
        s.submit("Panel 504 to stud 606", &ReferenceAssistant).unwrap();
        let turn = s.begin_turn("yes").unwrap();
        let err = AssistantError::Unavailable {
            kind: UnavailableKind::Transport,
            reason: "connection refused".into(),
        };
        assert!(matches!(s.finish_turn(&turn, Err(err)), Err(DialogueError::Assistant(_))));
        assert_eq!(s.state(), DialogueState::AwaitingConfirmation);
        assert_eq!(s.pending_task(), Some(task(504, 606)));
    }

    #[test]
    fn stray_acknowledgment_is_ignored() {
        struct AlwaysOkay;
        impl Assistant for AlwaysOkay {
            fn respond(&self, _: &Turn) -> Result<AssistantReply, AssistantError> {
                Ok(crate::assistant::classify_reply("OKAY!!!", &Scene::reference()))
            }
            fn name(&self) -> &'static str {
                "okay"
            }
        }
        let mut s = session();
        s.submit("Panel 504 to stud 606", &AlwaysOkay).unwrap();
        assert_eq!(s.state(), DialogueState::AwaitingInstruction);
        assert!(s.approve().is_err());
    }

    #[test]
    fn cancel_from_ready() {
        let mut s = session();
        s.submit("Panel 504 to stud 606", &ReferenceAssistant).unwrap();
        s.submit("yes", &ReferenceAssistant).unwrap();
        assert!(matches!(s.submit("no", &ReferenceAssistant), Err(DialogueError::AwaitingApproval)));
        s.cancel().unwrap();
        assert_eq!(s.state(), DialogueState::AwaitingInstruction);
        assert!(s.cancel().is_err());
    }

    #[test]
    fn multimodal_selection_flow() {
        let mut s = session();
        s.select(ObjectId(501)).unwrap();
        s.select(ObjectId(602)).unwrap();
        let r = s.submit("install this here", &ReferenceAssistant).unwrap();
        assert_eq!(r.cited_pair(), Some(task(501, 602)));
        assert!(s.selections().is_empty());
        let user = &s.transcript()[0];
        assert_eq!(user.utterance.as_deref(), Some("install this here"));
        assert!(user.text.ends_with("The destination is the center of stud 602."));
    }

    #[test]
    fn four_installs_exhaust_panels() {
        let rule = ReferenceAssistant;
        let mut s = session();
        for cmd in ["Panel 501 to stud 602", "Panel 502 to stud 604", "Panel 503 to stud 608", "Panel 504 to stud 606"] {
            s.submit(cmd, &rule).unwrap();
            s.submit("yes", &rule).unwrap();
            s.approve().unwrap();
            s.complete(TaskOutcome::Success).unwrap();
        }
        assert!(available_ids(s.scene(), ObjectKind::Panel).is_empty());
    }
}
