//! System prompt generated from scene data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{AreaLabel, ObjectId, Scene};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("scene has no panels; the prompt would be vacuous")]
    NoPanels,
    #[error("scene has no destination studs; the prompt would be vacuous")]
    NoDestinations,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub role_context: String,
    pub material_inventory: String,
    pub destination_rules: String,
    /// Verification, clarification, history, and blank-message instructions.
    pub instruction_blocks: [String; 4],
}

impl PromptSpec {
    pub fn render(&self) -> String {
        let mut parts = vec![
            self.role_context.as_str(),
            self.material_inventory.as_str(),
            self.destination_rules.as_str(),
        ];
        parts.extend(self.instruction_blocks.iter().map(String::as_str));
        parts.join("\n\n")
    }
}

fn list(ids: &[ObjectId]) -> String {
    match ids {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => {
            let head: Vec<String> = init.iter().map(ToString::to_string).collect();
            format!("{} and {last}", head.join(", "))
        }
    }
}

pub fn build_prompt(scene: &Scene) -> Result<PromptSpec, PromptError> {
    let panels: Vec<_> = scene.panels().collect();
    if panels.is_empty() {
        return Err(PromptError::NoPanels);
    }
    let destinations: Vec<_> = scene.destination_studs().collect();
    if destinations.is_empty() {
        return Err(PromptError::NoDestinations);
    }

    let role_context = "You are a robot on a construction site, working as my teammate. \
        I will give you instructions for drywall installation. From each instruction, \
        work out the target of the pick-up action (a panel) and the destination of the \
        place action (a stud). Do not make up scenarios about the situation."
        .to_string();

    let pairs: Vec<String> = panels
        .iter()
        .map(|p| {
            let size = p.size_ft.map(|s| s.to_string()).unwrap_or_else(|| "unknown size".into());
            format!("({}, {size})", p.id)
        })
        .collect();
    let material_inventory = format!(
        "Targets are drywall panels. There are {} drywall panels on site, listed as (ID, size in feet) pairs: {}.",
        panels.len(),
        pairs.join(", ")
    );

    let studs: Vec<_> = scene.studs().collect();
    let stud_ids: Vec<ObjectId> = studs.iter().map(|s| s.id).collect();
    let blocked: Vec<ObjectId> = studs.iter().filter(|s| !s.is_destination()).map(|s| s.id).collect();
    let mut rules = format!(
        "Destinations are studs of the stud wall. The wall has {} studs with IDs {}, ordered from left to right",
        studs.len(),
        list(&stud_ids)
    );
    if let (Some(first), Some(last)) = (stud_ids.first(), stud_ids.last()) {
        rules.push_str(&format!(": {first} is the leftmost stud and {last} is the rightmost stud"));
    }
    rules.push_str(&format!(
        ". There are {} destination areas, each with a destination stud at its center, and a panel \
         is always placed on the center of the destination stud of the chosen area.",
        destinations.len()
    ));
    if !blocked.is_empty() {
        rules.push_str(&format!(" Panels can't be placed on studs {}.", list(&blocked)));
    }
    for label in AreaLabel::ALL {
        if let Some(stud) = scene.stud_for_area(label) {
            rules.push_str(&format!(
                " Stud {} is at the center of the {label} destination area, so choosing the {label} area means stud {}.",
                stud.id, stud.id
            ));
        }
    }
    let mut by_size: BTreeMap<String, Vec<ObjectId>> = BTreeMap::new();
    for stud in &destinations {
        if let Some(size) = stud.allowed_panel_size {
            by_size.entry(size.to_string()).or_default().push(stud.id);
        }
    }
    for (size, ids) in &by_size {
        let noun = if ids.len() == 1 { "stud" } else { "studs" };
        rules.push_str(&format!(" Only {size} panels may be installed on {noun} {}.", list(ids)));
    }
    for (size, ids) in &by_size {
        let fitting: Vec<ObjectId> = panels
            .iter()
            .filter(|p| p.size_ft.map(|s| s.to_string()).as_deref() == Some(size.as_str()))
            .map(|p| p.id)
            .collect();
        if fitting.len() == 1 && ids.len() == 1 {
            rules.push_str(&format!(
                " For example, panel {} belongs on the center of stud {}.",
                fitting[0], ids[0]
            ));
        }
    }
    rules.push_str(" If a panel's size does not match its destination, it must not be installed.");

    let verification = "Once you know both the target and the destination, ask me whether your \
        understanding is correct, and mention the panel ID and the stud ID when you ask. If I \
        answer 'yes' or 'it's correct', reply with exactly 'OKAY!!!' and nothing else. After you \
        reply 'OKAY!!!', treat that panel as installed on that stud."
        .to_string();
    let clarification = "If the panel or the destination is unclear or inaccurate, ask me for \
        accurate information. If I give two different targets or two different destinations, \
        ask me which one is correct instead of choosing one yourself. If I mention an object \
        that is not listed above, tell me it does not exist."
        .to_string();
    let mut history = "Remember the installation history when you confirm an instruction. A panel \
        that is already installed cannot be installed again, and a stud that already holds a \
        panel cannot be used again. When you refuse for this reason, explain why and mention \
        the available targets or destinations."
        .to_string();
    let installed = scene.installations();
    if !installed.is_empty() {
        let done: Vec<String> = installed
            .iter()
            .map(|(p, s)| format!("panel {p} on stud {s}"))
            .collect();
        history.push_str(&format!(" Already installed: {}.", done.join("; ")));
    }
    let blank = "If my message is empty, ask me again what I would like you to do instead of \
        guessing my intent."
        .to_string();

    Ok(PromptSpec {
        role_context,
        material_inventory,
        destination_rules: rules,
        instruction_blocks: [verification, clarification, history, blank],
    })
}
