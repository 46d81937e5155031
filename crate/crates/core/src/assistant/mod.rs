//! Robot-side replies.
//!
//! [`ReferenceAssistant`] is a deterministic policy backed by the validator.
//! [`LlmAssistant`] sends the generated prompt and the transcript to an
//! external chat-completion endpoint and classifies what comes back. Both sit
//! behind the [`Assistant`] trait so a session does not care which one it has.

mod llm;
mod prompt;

pub use llm::{classify_reply, LlmAssistant, LlmConfig, ENV_API_KEY, ENV_BASE_URL, ENV_MODEL};
pub use prompt::{build_prompt, PromptError, PromptSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialogue::{DialogueState, PendingTask, TranscriptEntry};
use crate::fusion::CompositeCommand;
use crate::parser::{Action, Ambiguity, ParsedIntent};
use crate::scene::{ObjectId, ObjectKind, Scene};
use crate::validator::{ValidationResult, Verdict};

/// The exact acknowledgment that unlocks the approval step.
pub const ACK_SENTINEL: &str = "OKAY!!!";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplyKind {
    ConfirmRequest,
    Clarification,
    Rejection,
    Acknowledge,
    ReAsk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssistantReply {
    pub text: String,
    pub kind: ReplyKind,
    pub cited_panel: Option<ObjectId>,
    pub cited_stud: Option<ObjectId>,
    /// Error category the reply addresses, when the assistant knows it.
    pub category: Option<Verdict>,
}

impl AssistantReply {
    fn new(kind: ReplyKind, text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            kind,
            cited_panel: None,
            cited_stud: None,
            category: None,
        }
    }

    fn citing(mut self, pair: Option<PendingTask>) -> Self {
        if let Some(p) = pair {
            self.cited_panel = Some(p.panel);
            self.cited_stud = Some(p.stud);
        }
        self
    }

    fn category(mut self, v: Verdict) -> Self {
        self.category = Some(v);
        self
    }

    /// Both cited ids, when present.
    pub fn cited_pair(&self) -> Option<PendingTask> {
        Some(PendingTask {
            panel: self.cited_panel?,
            stud: self.cited_stud?,
        })
    }

    /// Whether the reply refuses or questions the instruction.
    pub fn is_pushback(&self) -> bool {
        matches!(self.kind, ReplyKind::Rejection | ReplyKind::Clarification)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnavailableKind {
    Transport,
    Timeout,
    Auth,
    Protocol,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssistantError {
    #[error("assistant unavailable ({kind:?}): {reason}")]
    Unavailable { kind: UnavailableKind, reason: String },
    #[error("assistant misconfigured: {0}")]
    Config(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Everything an assistant may look at when producing a reply.
#[derive(Debug, Clone)]
pub struct Turn {
    /// Session state when the message arrived.
    pub state: DialogueState,
    pub pending_task: Option<PendingTask>,
    /// Alternative offered by the previous rejection, if any.
    pub offered_task: Option<PendingTask>,
    pub command: CompositeCommand,
    pub intent: ParsedIntent,
    /// Present for pick-and-place intents.
    pub verdict: Option<ValidationResult>,
    pub scene: Scene,
    /// Transcript before this message.
    pub history: Vec<TranscriptEntry>,
}

pub trait Assistant: Send + Sync {
    fn respond(&self, turn: &Turn) -> Result<AssistantReply, AssistantError>;

    fn name(&self) -> &'static str;
}

/// Validator-backed policy with one fixed template per reply kind.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceAssistant;

impl Assistant for ReferenceAssistant {
    fn respond(&self, turn: &Turn) -> Result<AssistantReply, AssistantError> {
        Ok(reference_reply(turn))
    }

    fn name(&self) -> &'static str {
        "rule"
    }
}

const ASK_FOR_INSTRUCTION: &str =
    "Please tell me which panel to pick up and which stud to place it on.";

pub fn confirm_request_text(task: PendingTask) -> String {
    format!(
        "I will pick up panel {} and place it on the center of stud {}. Is this information correct?",
        task.panel, task.stud
    )
}

/// The unique alternative `(panel, stud)` implied by a rejection, if there is one.
fn single_alternative(turn: &Turn, verdict: &ValidationResult) -> Option<PendingTask> {
    let (target, stud) = turn.intent.grounded()?;
    let kind_of = |id: ObjectId| turn.scene.get(id).map(|o| o.kind);
    let panels: Vec<ObjectId> = verdict
        .suggestions
        .iter()
        .copied()
        .filter(|id| kind_of(*id) == Some(ObjectKind::Panel))
        .collect();
    let studs: Vec<ObjectId> = verdict
        .suggestions
        .iter()
        .copied()
        .filter(|id| kind_of(*id) == Some(ObjectKind::Stud))
        .collect();
    match (verdict.verdict, &panels[..], &studs[..]) {
        (Verdict::MismatchedPairing, [], [s]) => Some(PendingTask { panel: target, stud: *s }),
        (Verdict::AlreadyInstalled, [], [s]) => {
            let panel_free = turn.scene.get(target).is_some_and(|p| !p.is_installed());
            panel_free.then_some(PendingTask { panel: target, stud: *s })
        }
        (Verdict::AlreadyInstalled, [p], []) => {
            let stud_free = turn.scene.get(stud).is_some_and(|s| !s.is_occupied());
            stud_free.then_some(PendingTask { panel: *p, stud })
        }
        _ => None,
    }
}

/// The deterministic reply policy.
pub fn reference_reply(turn: &Turn) -> AssistantReply {
    let awaiting = turn.state == DialogueState::AwaitingConfirmation;
    let intent = &turn.intent;

    if intent.ambiguity == Ambiguity::Blank {
        return match (awaiting, turn.pending_task) {
            (true, Some(task)) => AssistantReply::new(
                ReplyKind::ReAsk,
                format!(
                    "I still need your confirmation. Should I install panel {} on stud {}? Please answer yes or no.",
                    task.panel, task.stud
                ),
            )
            .citing(Some(task)),
            _ => AssistantReply::new(
                ReplyKind::ReAsk,
                format!("How can I assist you further? {ASK_FOR_INSTRUCTION}"),
            ),
        };
    }

    match intent.action {
        Action::Confirm => match (awaiting, turn.pending_task, turn.offered_task) {
            (true, Some(task), _) => {
                AssistantReply::new(ReplyKind::Acknowledge, ACK_SENTINEL).citing(Some(task))
            }
            (false, _, Some(offer)) => {
                AssistantReply::new(ReplyKind::ConfirmRequest, confirm_request_text(offer))
                    .citing(Some(offer))
            }
            _ => AssistantReply::new(
                ReplyKind::Clarification,
                format!("There is nothing to confirm yet. {ASK_FOR_INSTRUCTION}"),
            ),
        },
        Action::Deny => AssistantReply::new(
            ReplyKind::Clarification,
            "Understood, that is not correct. Please provide the correct panel and destination stud.",
        ),
        Action::Unknown => AssistantReply::new(
            ReplyKind::Clarification,
            format!("I did not find an instruction in that message. {ASK_FOR_INSTRUCTION}"),
        ),
        Action::PickPlace => {
            let Some(verdict) = &turn.verdict else {
                return AssistantReply::new(ReplyKind::Clarification, ASK_FOR_INSTRUCTION);
            };
            match verdict.verdict {
                Verdict::Ok => {
                    let (panel, stud) = intent.grounded().expect("ok verdict implies grounded intent");
                    let task = PendingTask { panel, stud };
                    AssistantReply::new(ReplyKind::ConfirmRequest, confirm_request_text(task))
                        .citing(Some(task))
                        .category(Verdict::Ok)
                }
                Verdict::PartialOrDuplicate => AssistantReply::new(
                    ReplyKind::Clarification,
                    format!("{} Please provide accurate information.", verdict.explanation),
                )
                .category(Verdict::PartialOrDuplicate),
                other => {
                    let alternative = single_alternative(turn, verdict);
                    let mut text = verdict.explanation.clone();
                    if let Some(alt) = alternative {
                        text.push_str(&format!(
                            " Would you like to install panel {} on stud {} instead?",
                            alt.panel, alt.stud
                        ));
                    }
                    AssistantReply::new(ReplyKind::Rejection, text)
                        .citing(alternative)
                        .category(other)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{compose, SelectionBatch};
    use crate::parser::{extract_ids, parse_command};
    use crate::scene::apply_install;
    use crate::validator::validate;

    fn turn(scene: &Scene, state: DialogueState, pending: Option<PendingTask>, text: &str) -> Turn {
        let command = compose(text, &mut SelectionBatch::new());
        let intent = parse_command(&command, scene);
        let verdict = (intent.action == Action::PickPlace).then(|| validate(scene, &intent).unwrap());
        Turn {
            state,
            pending_task: pending,
            offered_task: None,
            command,
            intent,
            verdict,
            scene: scene.clone(),
            history: Vec::new(),
        }
    }

    fn task(p: u32, s: u32) -> PendingTask {
        PendingTask {
            panel: ObjectId(p),
            stud: ObjectId(s),
        }
    }

    #[test]
    fn ok_gets_confirm_request() {
        let scene = Scene::reference();
        let r = reference_reply(&turn(&scene, DialogueState::AwaitingInstruction, None, "Panel 504 to stud 606"));
        assert_eq!(r.kind, ReplyKind::ConfirmRequest);
        assert_eq!(r.cited_pair(), Some(task(504, 606)));
        let ids = extract_ids(&r.text, &scene);
        assert_eq!(ids.panels, vec![ObjectId(504)]);
        assert_eq!(ids.studs, vec![ObjectId(606)]);
        assert!(ids.unknown.is_empty());
    }

    #[test]
    fn confirm_after_request_is_sentinel() {
        let scene = Scene::reference();
        let r = reference_reply(&turn(&scene, DialogueState::AwaitingConfirmation, Some(task(504, 606)), "yes"));
        assert_eq!(r.kind, ReplyKind::Acknowledge);
        assert_eq!(r.text, "OKAY!!!");
    }

    #[test]
    fn confirm_without_request_is_not_sentinel() {
        let scene = Scene::reference();
        let r = reference_reply(&turn(&scene, DialogueState::AwaitingInstruction, None, "yes"));
        assert_eq!(r.kind, ReplyKind::Clarification);
    }

    #[test]
    fn blank_reasks() {
        let scene = Scene::reference();
        let r = reference_reply(&turn(&scene, DialogueState::AwaitingInstruction, None, ""));
        assert_eq!(r.kind, ReplyKind::ReAsk);
        assert!(r.text.starts_with("How can I assist you further?"));

        let r = reference_reply(&turn(&scene, DialogueState::AwaitingConfirmation, Some(task(504, 606)), ""));
        assert_eq!(r.kind, ReplyKind::ReAsk);
        assert_eq!(r.cited_pair(), Some(task(504, 606)));
    }

    #[test]
    fn mismatch_offers_alternative() {
        let scene = Scene::reference();
        let r = reference_reply(&turn(&scene, DialogueState::AwaitingInstruction, None, "Panel 504 to stud 605"));
        assert_eq!(r.kind, ReplyKind::Rejection);
        assert!(r.text.contains("panel 504 on stud 606 instead?"), "{}", r.text);
        assert_eq!(r.category, Some(Verdict::MismatchedPairing));
    }

    #[test]
    fn mismatch_with_several_options_lists_them() {
        let scene = Scene::reference();
        let r = reference_reply(&turn(&scene, DialogueState::AwaitingInstruction, None, "Panel 502 to stud 606"));
        assert_eq!(r.kind, ReplyKind::Rejection);
        assert!(r.cited_pair().is_none());
        assert!(r.text.contains("602, 604 and 608"), "{}", r.text);
    }

    #[test]
    fn history_rejection() {
        let scene = apply_install(&Scene::reference(), ObjectId(503), ObjectId(608)).unwrap();
        let r = reference_reply(&turn(&scene, DialogueState::AwaitingInstruction, None, "Panel 501 to stud 608"));
        assert_eq!(r.kind, ReplyKind::Rejection);
        assert_eq!(r.category, Some(Verdict::AlreadyInstalled));
        assert!(r.text.contains("503"));
    }

    #[test]
    fn ambiguity_gets_clarification() {
        let scene = Scene::reference();
        let r = reference_reply(&turn(
            &scene,
            DialogueState::AwaitingInstruction,
            None,
            "place panel 501, I mean panel 502, on stud 602",
        ));
        assert_eq!(r.kind, ReplyKind::Clarification);
        assert_eq!(r.category, Some(Verdict::PartialOrDuplicate));
    }

    #[test]
    fn deny_asks_for_correction() {
        let scene = Scene::reference();
        let r = reference_reply(&turn(&scene, DialogueState::AwaitingConfirmation, Some(task(501, 602)), "no"));
        assert_eq!(r.kind, ReplyKind::Clarification);
    }

    #[test]
    fn policy_is_pure() {
        let scene = Scene::reference();
        let t = turn(&scene, DialogueState::AwaitingInstruction, None, "Panel 502 to stud 606");
        assert_eq!(reference_reply(&t), reference_reply(&t));
    }
}
