//! Scripted sessions: a list of user actions replayed against a session with
//! an in-process robot.

use serde::{Deserialize, Serialize};

use crate::assistant::{Assistant, AssistantReply};
use crate::dialogue::{DialogueError, DialogueSession, TaskOutcome};
use crate::dispatch::{Phase, RobotEvent, RobotSim, TaskCommand};
use crate::fusion::Highlight;
use crate::scene::ObjectId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    /// Send a message (with any pending selections).
    Say(String),
    /// Point at an object.
    Select(u32),
    /// Press the approval button; the robot runs the task to completion.
    Approve,
    /// Make the robot fail the next task.
    InjectFault,
    Cancel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StepOutcome {
    Reply(AssistantReply),
    Highlight(Highlight),
    Dispatched { task: TaskCommand, events: Vec<RobotEvent> },
    FaultArmed,
    Cancelled,
    Rejected { error: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: Step,
    pub outcome: StepOutcome,
}

/// Drives one session with one assistant and a simulated arm.
pub struct ScriptRunner<'a> {
    session: DialogueSession,
    assistant: &'a dyn Assistant,
    robot: RobotSim,
    log: Vec<StepRecord>,
}

impl<'a> ScriptRunner<'a> {
    pub fn new(session: DialogueSession, assistant: &'a dyn Assistant) -> Self {
        Self {
            session,
            assistant,
            robot: RobotSim::default(),
            log: Vec::new(),
        }
    }

    pub fn session(&self) -> &DialogueSession {
        &self.session
    }

    pub fn into_session(self) -> DialogueSession {
        self.session
    }

    pub fn log(&self) -> &[StepRecord] {
        &self.log
    }

    /// Runs one step. Session-level refusals (busy, nothing approved, bad
    /// selection) are recorded as outcomes; only an unavailable assistant is
    /// returned as an error.
    pub fn run_step(&mut self, step: &Step) -> Result<&StepOutcome, DialogueError> {
        let outcome = match step {
            Step::Say(text) => match self.session.submit(text, self.assistant) {
                Ok(reply) => StepOutcome::Reply(reply),
                Err(e @ DialogueError::Assistant(_)) => return Err(e),
                Err(e) => StepOutcome::Rejected { error: e.to_string() },
            },
            Step::Select(id) => match self.session.select(ObjectId(*id)) {
                Ok(h) => StepOutcome::Highlight(h),
                Err(e) => StepOutcome::Rejected { error: e.to_string() },
            },
            Step::Approve => match self.session.approve() {
                Ok(task) => {
                    let events = self.robot.execute(task.clone());
                    let outcome = match events.last().map(|e| e.phase) {
                        Some(Phase::Done) => TaskOutcome::Success,
                        _ => TaskOutcome::Failed {
                            reason: events.last().map(|e| e.detail.clone()).unwrap_or_default(),
                        },
                    };
                    self.session.complete(outcome)?;
                    StepOutcome::Dispatched { task, events }
                }
                Err(e) => StepOutcome::Rejected { error: e.to_string() },
            },
            Step::InjectFault => {
                self.robot.faults_mut().fail_next += 1;
                StepOutcome::FaultArmed
            }
            Step::Cancel => match self.session.cancel() {
                Ok(()) => StepOutcome::Cancelled,
                Err(e) => StepOutcome::Rejected { error: e.to_string() },
            },
        };
        self.log.push(StepRecord {
            step: step.clone(),
            outcome,
        });
        Ok(&self.log.last().unwrap().outcome)
    }

    pub fn run(&mut self, steps: &[Step]) -> Result<(), DialogueError> {
        for step in steps {
            self.run_step(step)?;
        }
        Ok(())
    }

    /// The most recent assistant reply, if any.
    pub fn last_reply(&self) -> Option<&AssistantReply> {
        self.log.iter().rev().find_map(|r| match &r.outcome {
            StepOutcome::Reply(reply) => Some(reply),
            _ => None,
        })
    }
}

/// A replay file: optional scene path, assistant mode, and steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayFile {
    #[serde(default)]
    pub scene: Option<String>,
    #[serde(default)]
    pub assistant: Option<String>,
    #[serde(with = "serde_yaml::with::singleton_map_recursive")]
    pub steps: Vec<Step>,
}

impl ReplayFile {
    pub fn from_yaml(text: &str) -> Result<Self, serde_yaml::Error> {
        serde_yaml::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assistant::{ReferenceAssistant, ReplyKind};
    use crate::scene::Scene;

    #[test]
    fn yaml_steps() {
        let file = ReplayFile::from_yaml(
            "assistant: rule\nsteps:\n  - select: 501\n  - say: install this here\n  - approve\n  - inject_fault\n",
        )
        .unwrap();
        assert_eq!(
            file.steps,
            vec![
                Step::Select(501),
                Step::Say("install this here".into()),
                Step::Approve,
                Step::InjectFault
            ]
        );
    }

    #[test]
    fn runner_records_refusals() {
        let rule = ReferenceAssistant;
        let mut runner = ScriptRunner::new(DialogueSession::new(Scene::reference()), &rule);
        assert!(matches!(runner.run_step(&Step::Approve).unwrap(), StepOutcome::Rejected { .. }));
        assert!(matches!(runner.run_step(&Step::Select(605)).unwrap(), StepOutcome::Rejected { .. }));
        runner
            .run(&[Step::Select(501), Step::Select(602), Step::Say("install this here".into())])
            .unwrap();
        assert_eq!(runner.last_reply().unwrap().kind, ReplyKind::ConfirmRequest);
    }

    #[test]
    fn fault_rolls_back() {
        let rule = ReferenceAssistant;
        let mut runner = ScriptRunner::new(DialogueSession::new(Scene::reference()), &rule);
        runner
            .run(&[
                Step::InjectFault,
                Step::Say("Panel 504 to stud 606".into()),
                Step::Say("yes".into()),
                Step::Approve,
            ])
            .unwrap();
        match &runner.log().last().unwrap().outcome {
            StepOutcome::Dispatched { events, .. } => assert_eq!(events.last().unwrap().phase, Phase::Failed),
            other => panic!("unexpected {other:?}"),
        }
        assert!(runner.session().scene().installations().is_empty());
    }
}
