//! Dialogue-gated pick-and-place orchestration for human-robot drywall installation.
//!
//! A user speaks (or types) an instruction and may point at objects. The
//! pointing selections are fused into the message as id clauses, the message
//! is grounded against a semantic scene, checked against size rules and the
//! installation history, and answered by an assistant. Nothing reaches the
//! robot until the assistant has restated the task, the user has confirmed
//! it, the assistant has acknowledged with `OKAY!!!`, and the user has
//! pressed approve.
//!
//! ```
//! use hrc_core::{assistant::ReferenceAssistant, dialogue::{DialogueSession, TaskOutcome}, scene::Scene};
//!
//! let rule = ReferenceAssistant;
//! let mut session = DialogueSession::new(Scene::reference());
//! session.submit("Panel 504 to stud 606", &rule).unwrap();
//! assert_eq!(session.submit("yes", &rule).unwrap().text, "OKAY!!!");
//! let task = session.approve().unwrap();
//! assert_eq!(task.target_id.0, 504);
//! session.complete(TaskOutcome::Success).unwrap();
//! ```

pub mod assistant;
pub mod dialogue;
pub mod dispatch;
pub mod eval;
pub mod fusion;
pub mod parser;
pub mod scene;
pub mod script;
pub mod validator;

/// The bundled reference corpus of 55 wrong and 10 correct instructions.
pub const REFERENCE_CORPUS_YAML: &str = include_str!("../../../corpus/reference.yaml");
