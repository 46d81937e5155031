//! Instruction correctness against the scene's size rules and install history.
//!
//! Faults are checked in a fixed order and the first hit wins:
//! partial/duplicate information, then objects that do not exist, then
//! objects already used, then panel/stud pairings that do not fit.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parser::{Action, Ambiguity, ParsedIntent};
use crate::scene::{available, ObjectId, ObjectKind, Scene, SceneObject};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    MismatchedPairing,
    MaterialNotPresent,
    AlreadyInstalled,
    PartialOrDuplicate,
}

impl Verdict {
    pub const ERRORS: [Verdict; 4] = [
        Verdict::MismatchedPairing,
        Verdict::MaterialNotPresent,
        Verdict::AlreadyInstalled,
        Verdict::PartialOrDuplicate,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Ok => "ok",
            Verdict::MismatchedPairing => "mismatched_pairing",
            Verdict::MaterialNotPresent => "material_not_present",
            Verdict::AlreadyInstalled => "already_installed",
            Verdict::PartialOrDuplicate => "partial_or_duplicate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub verdict: Verdict,
    pub explanation: String,
    /// Currently available alternatives (panels and/or destination studs).
    pub suggestions: Vec<ObjectId>,
}

impl ValidationResult {
    fn new(verdict: Verdict, explanation: String, suggestions: Vec<ObjectId>) -> Self {
        Self {
            verdict,
            explanation,
            suggestions,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.verdict == Verdict::Ok
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidatorError {
    #[error("only pick-and-place intents can be validated, got {0:?}")]
    NotPickPlace(Action),
}

fn join_ids(ids: &[ObjectId]) -> String {
    match ids {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => {
            let head: Vec<String> = init.iter().map(ToString::to_string).collect();
            format!("{} and {last}", head.join(", "))
        }
    }
}

fn free_studs_for(scene: &Scene, panel: &SceneObject) -> Vec<ObjectId> {
    available(scene, ObjectKind::Stud)
        .into_iter()
        .filter(|s| s.allowed_panel_size.is_some() && s.allowed_panel_size == panel.size_ft)
        .map(|s| s.id)
        .collect()
}

fn free_panels_for(scene: &Scene, stud: &SceneObject) -> Vec<ObjectId> {
    available(scene, ObjectKind::Panel)
        .into_iter()
        .filter(|p| stud.allowed_panel_size.is_some() && p.size_ft == stud.allowed_panel_size)
        .map(|p| p.id)
        .collect()
}

fn ids_of(objs: Vec<&SceneObject>) -> Vec<ObjectId> {
    objs.into_iter().map(|o| o.id).collect()
}

fn partial(scene: &Scene, intent: &ParsedIntent) -> ValidationResult {
    let free_panels = available(scene, ObjectKind::Panel);
    let free_studs = available(scene, ObjectKind::Stud);
    let is_free = |id: &ObjectId| {
        free_panels.iter().any(|o| o.id == *id) || free_studs.iter().any(|o| o.id == *id)
    };
    let (explanation, suggestions) = match intent.ambiguity {
        Ambiguity::ConflictingTargets => (
            format!(
                "Two different panels were given ({}). Please confirm which one is correct.",
                join_ids(&intent.target_refs)
            ),
            intent.target_refs.iter().copied().filter(is_free).collect(),
        ),
        Ambiguity::ConflictingDestinations => (
            format!(
                "Two different destinations were given (studs {}). Please confirm which one is correct.",
                join_ids(&intent.destination_refs)
            ),
            intent.destination_refs.iter().copied().filter(is_free).collect(),
        ),
        Ambiguity::MissingTarget => {
            let mut text = "The panel to pick up is missing.".to_string();
            if !intent.unresolved_refs.is_empty() {
                text.push_str(&format!(
                    " I could not match {} to any panel or stud.",
                    join_ids(&intent.unresolved_refs)
                ));
            }
            (text, ids_of(free_panels))
        }
        Ambiguity::MissingDestination => {
            let target = intent.target_refs.first().and_then(|id| scene.get(*id));
            let suggestions = match target {
                Some(p) if p.is_panel() => free_studs_for(scene, p),
                _ => ids_of(free_studs),
            };
            ("The destination stud is missing.".to_string(), suggestions)
        }
        Ambiguity::Blank => ("No instruction was given.".to_string(), Vec::new()),
        Ambiguity::None => unreachable!("partial() called on an unambiguous intent"),
    };
    ValidationResult::new(Verdict::PartialOrDuplicate, explanation, suggestions)
}

/// Checks a pick-and-place intent against the scene.
pub fn validate(scene: &Scene, intent: &ParsedIntent) -> Result<ValidationResult, ValidatorError> {
    if intent.action != Action::PickPlace {
        return Err(ValidatorError::NotPickPlace(intent.action));
    }
    let Some((target_id, stud_id)) = intent.grounded() else {
        return Ok(partial(scene, intent));
    };
    Ok(validate_pair(scene, target_id, stud_id))
}

/// Checks a single grounded `(panel, stud)` pair.
pub fn validate_pair(scene: &Scene, target_id: ObjectId, stud_id: ObjectId) -> ValidationResult {
    let panel = scene.get(target_id).filter(|o| o.is_panel());
    let stud = scene.get(stud_id).filter(|o| o.kind == ObjectKind::Stud);

    let (panel, stud) = match (panel, stud) {
        (Some(p), Some(s)) => (p, s),
        (None, stud) => {
            let mut text = format!("There is no panel {target_id} on the site.");
            if stud.is_none() {
                text.push_str(&format!(" There is no stud {stud_id} either."));
            }
            let free: Vec<ObjectId> = available(scene, ObjectKind::Panel).iter().map(|o| o.id).collect();
            text.push_str(&available_sentence("panels", &free));
            return ValidationResult::new(Verdict::MaterialNotPresent, text, free);
        }
        (Some(p), None) => {
            let free = free_studs_for(scene, p);
            let mut text = format!("There is no stud {stud_id} in the wall.");
            text.push_str(&available_sentence("destinations", &free));
            return ValidationResult::new(Verdict::MaterialNotPresent, text, free);
        }
    };

    let target_used = panel.installed_on;
    let stud_used = stud.occupied_by;
    if target_used.is_some() || stud_used.is_some() {
        let mut text = String::new();
        let mut suggestions = Vec::new();
        if let Some(on) = target_used {
            text.push_str(&format!(
                "Panel {target_id} is already installed on stud {on}, so it cannot be installed again."
            ));
            let free = if stud_used.is_none() && stud.is_destination() {
                free_panels_for(scene, stud)
            } else {
                ids_of(available(scene, ObjectKind::Panel))
            };
            text.push_str(&available_sentence("panels", &free));
            suggestions.extend(free);
        }
        if let Some(by) = stud_used {
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(&format!(
                "Panel {by} is already installed on stud {stud_id}, so it cannot be used again."
            ));
            let free = if target_used.is_none() {
                free_studs_for(scene, panel)
            } else {
                ids_of(available(scene, ObjectKind::Stud))
            };
            text.push_str(&available_sentence("destinations", &free));
            suggestions.extend(free);
        }
        return ValidationResult::new(Verdict::AlreadyInstalled, text, suggestions);
    }

    match stud.allowed_panel_size {
        None => {
            let free = free_studs_for(scene, panel);
            let text = format!(
                "Panels can't be placed on stud {stud_id}; it is not a destination stud.{}",
                available_sentence("destinations", &free)
            );
            ValidationResult::new(Verdict::MismatchedPairing, text, free)
        }
        Some(allowed) if Some(allowed) != panel.size_ft => {
            let free = free_studs_for(scene, panel);
            let size = panel.size_ft.map(|s| s.to_string()).unwrap_or_default();
            let text = format!(
                "Panel {target_id} is {size}, but stud {stud_id} only takes {allowed} panels.{}",
                available_sentence("destinations", &free)
            );
            ValidationResult::new(Verdict::MismatchedPairing, text, free)
        }
        Some(_) => ValidationResult::new(
            Verdict::Ok,
            format!("Panel {target_id} can be installed on stud {stud_id}."),
            Vec::new(),
        ),
    }
}

fn available_sentence(what: &str, ids: &[ObjectId]) -> String {
    if ids.is_empty() {
        format!(" No suitable {what} are available.")
    } else {
        format!(" Available {what}: {}.", join_ids(ids))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub panel: ObjectId,
    pub stud: ObjectId,
    pub verdict: Verdict,
}

/// Verdict for every panel crossed with every stud under the current history.
pub fn enumerate_verdicts(scene: &Scene) -> Vec<VerdictRow> {
    let mut rows = Vec::new();
    for panel in scene.panels() {
        for stud in scene.studs() {
            rows.push(VerdictRow {
                panel: panel.id,
                stud: stud.id,
                verdict: validate_pair(scene, panel.id, stud.id).verdict,
            });
        }
    }
    rows
}

pub fn write_verdict_csv<W: Write>(rows: &[VerdictRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["panel", "stud", "verdict"])?;
    for row in rows {
        w.write_record([row.panel.to_string(), row.stud.to_string(), row.verdict.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
