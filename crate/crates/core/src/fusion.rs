//! Merging a spoken (or typed) utterance with pointing selections.
//!
//! Selections are held in a [`SelectionBatch`] until the user presses send.
//! [`compose`] then appends one ID clause per pending selection to the
//! utterance, target first, and clears the batch.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{ObjectId, ObjectKind, Scene};

/// Placeholder replaced by the selected object's id.
pub const ID_PLACEHOLDER: &str = "####";
pub const TARGET_CLAUSE: &str = "The ID of the target object is ####.";
pub const DESTINATION_CLAUSE: &str = "The destination is the center of stud ####.";

/// How long the UI should tint a selected object red.
pub const HIGHLIGHT_MS: u64 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRole {
    Target,
    Destination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionEvent {
    pub object_id: ObjectId,
    pub role: SelectionRole,
    pub sequence: u64,
}

/// Acknowledgment sent back to the UI after a selection is recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub object_id: ObjectId,
    pub role: SelectionRole,
    pub color: String,
    pub duration_ms: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SelectionError {
    #[error("object {0} does not exist in the scene")]
    UnknownObject(ObjectId),
    #[error("{kind} {id} cannot be selected: no panel can be placed there")]
    NotInteractable { id: ObjectId, kind: ObjectKind },
}

/// Selections waiting for the next send. At most one per role.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionBatch {
    target: Option<SelectionEvent>,
    destination: Option<SelectionEvent>,
    next_sequence: u64,
}

impl SelectionBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn target(&self) -> Option<SelectionEvent> {
        self.target
    }

    pub fn destination(&self) -> Option<SelectionEvent> {
        self.destination
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_none() && self.destination.is_none()
    }

    /// Pending events, target before destination.
    pub fn events(&self) -> Vec<SelectionEvent> {
        self.target.into_iter().chain(self.destination).collect()
    }

    fn push(&mut self, object_id: ObjectId, role: SelectionRole) -> SelectionEvent {
        self.next_sequence += 1;
        let event = SelectionEvent {
            object_id,
            role,
            sequence: self.next_sequence,
        };
        match role {
            SelectionRole::Target => self.target = Some(event),
            SelectionRole::Destination => self.destination = Some(event),
        }
        event
    }

    /// Drops pending events but keeps the sequence counter running.
    fn clear(&mut self) {
        self.target = None;
        self.destination = None;
    }
}

/// Records a pointing selection. Panels become the target, destination studs
/// the destination; a later selection of the same role replaces the earlier one.
pub fn record_selection(
    batch: &mut SelectionBatch,
    scene: &Scene,
    object_id: ObjectId,
) -> Result<Highlight, SelectionError> {
    let obj = scene
        .get(object_id)
        .ok_or(SelectionError::UnknownObject(object_id))?;
    let role = match obj.kind {
        ObjectKind::Panel => SelectionRole::Target,
        ObjectKind::Stud if obj.is_destination() => SelectionRole::Destination,
        kind => return Err(SelectionError::NotInteractable { id: object_id, kind }),
    };
    batch.push(object_id, role);
    Ok(Highlight {
        object_id,
        role,
        color: "red".to_string(),
        duration_ms: HIGHLIGHT_MS,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeCommand {
    pub text: String,
    pub utterance: String,
    pub attachments: Vec<SelectionEvent>,
}

impl CompositeCommand {
    pub fn is_blank(&self) -> bool {
        self.text.trim().is_empty()
    }
}

fn clause(template: &str, id: ObjectId) -> String {
    template.replace(ID_PLACEHOLDER, &id.to_string())
}

/// Fuses an utterance with the pending selections and clears the batch.
///
/// The utterance (minus trailing whitespace) is kept verbatim as the prefix.
/// If it lacks terminal punctuation a period is added before the clauses.
pub fn compose(utterance: &str, batch: &mut SelectionBatch) -> CompositeCommand {
    let attachments = batch.events();
    batch.clear();

    let spoken = utterance.trim_end();
    let mut text = spoken.to_string();
    for event in &attachments {
        if !text.is_empty() {
            if !text.ends_with(['.', '!', '?']) {
                text.push('.');
            }
            text.push(' ');
        }
        let template = match event.role {
            SelectionRole::Target => TARGET_CLAUSE,
            SelectionRole::Destination => DESTINATION_CLAUSE,
        };
        text.push_str(&clause(template, event.object_id));
    }

    CompositeCommand {
        text,
        utterance: utterance.to_string(),
        attachments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene() -> Scene {
        Scene::reference()
    }

    #[test]
    fn verbatim_target_clause() {
        // 127 is not in the reference scene, so build the batch by hand.
        let mut batch = SelectionBatch::new();
        batch.push(ObjectId(127), SelectionRole::Target);
        let cmd = compose("pick up this one", &mut batch);
        assert_eq!(cmd.text, "pick up this one. The ID of the target object is 127.");
        assert!(batch.is_empty());
    }

    #[test]
    fn target_and_destination_clauses() {
        let scene = scene();
        let mut batch = SelectionBatch::new();
        record_selection(&mut batch, &scene, ObjectId(501)).unwrap();
        record_selection(&mut batch, &scene, ObjectId(602)).unwrap();
        let cmd = compose("Please place this panel at this stud", &mut batch);
        assert_eq!(
            cmd.text,
            "Please place this panel at this stud. The ID of the target object is 501. \
             The destination is the center of stud 602."
        );
        assert_eq!(cmd.attachments.len(), 2);
    }

    #[test]
    fn clause_order_ignores_selection_order() {
        let scene = scene();
        let mut batch = SelectionBatch::new();
        record_selection(&mut batch, &scene, ObjectId(604)).unwrap();
        record_selection(&mut batch, &scene, ObjectId(502)).unwrap();
        let cmd = compose("install this here", &mut batch);
        assert_eq!(
            cmd.text,
            "install this here. The ID of the target object is 502. \
             The destination is the center of stud 604."
        );
    }

    #[test]
    fn no_selection_leaves_text_unchanged() {
        let mut batch = SelectionBatch::new();
        let cmd = compose("Panel 504 to stud 606", &mut batch);
        assert_eq!(cmd.text, "Panel 504 to stud 606");
        assert!(cmd.attachments.is_empty());
    }

    #[test]
    fn empty_everything_is_blank() {
        let mut batch = SelectionBatch::new();
        let cmd = compose("", &mut batch);
        assert!(cmd.is_blank());
        assert_eq!(cmd.text, "");
    }

    #[test]
    fn selection_only_has_no_leading_separator() {
        let scene = scene();
        let mut batch = SelectionBatch::new();
        record_selection(&mut batch, &scene, ObjectId(503)).unwrap();
        let cmd = compose("", &mut batch);
        assert_eq!(cmd.text, "The ID of the target object is 503.");
    }

    #[test]
    fn existing_punctuation_is_kept() {
        let scene = scene();
        let mut batch = SelectionBatch::new();
        record_selection(&mut batch, &scene, ObjectId(503)).unwrap();
        let cmd = compose("could you pick this up?", &mut batch);
        assert_eq!(cmd.text, "could you pick this up? The ID of the target object is 503.");
    }

    #[test]
    fn latest_selection_wins() {
        let scene = scene();
        let mut batch = SelectionBatch::new();
        record_selection(&mut batch, &scene, ObjectId(501)).unwrap();
        record_selection(&mut batch, &scene, ObjectId(503)).unwrap();
        assert_eq!(batch.target().unwrap().object_id, ObjectId(503));
        assert!(batch.destination().is_none());
        assert_eq!(batch.events().len(), 1);
    }

    #[test]
    fn sequence_strictly_increases() {
        let scene = scene();
        let mut batch = SelectionBatch::new();
        record_selection(&mut batch, &scene, ObjectId(501)).unwrap();
        record_selection(&mut batch, &scene, ObjectId(602)).unwrap();
        let events = batch.events();
        assert!(events[0].sequence < events[1].sequence);
        compose("x", &mut batch);
        record_selection(&mut batch, &scene, ObjectId(502)).unwrap();
        assert!(batch.target().unwrap().sequence > events[1].sequence);
    }

    #[test]
    fn rejects_non_destination_and_unknown() {
        let scene = scene();
        let mut batch = SelectionBatch::new();
        assert_eq!(
            record_selection(&mut batch, &scene, ObjectId(605)),
            Err(SelectionError::NotInteractable {
                id: ObjectId(605),
                kind: ObjectKind::Stud
            })
        );
        assert_eq!(
            record_selection(&mut batch, &scene, ObjectId(999)),
            Err(SelectionError::UnknownObject(ObjectId(999)))
        );
        assert!(batch.is_empty());
    }

    #[test]
    fn highlight_is_red() {
        let scene = scene();
        let mut batch = SelectionBatch::new();
        let h = record_selection(&mut batch, &scene, ObjectId(501)).unwrap();
        assert_eq!(h.color, "red");
        assert_eq!(h.role, SelectionRole::Target);
    }
}
