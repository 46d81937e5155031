//! Grounding composite commands into target and destination references.
//!
//! The parser is keyword based. Ids must be standalone numeric tokens and are
//! classified by looking them up in the scene; area phrases such as
//! "second rightmost" resolve to the stud carrying that area label; selection
//! attachments contribute their ids directly. Nothing here fails: everything
//! that goes wrong is reported through [`Ambiguity`].

use serde::{Deserialize, Serialize};

use crate::fusion::{CompositeCommand, SelectionRole};
use crate::scene::{AreaLabel, ObjectId, ObjectKind, Scene};

/// Words that mark an utterance as a pick-and-place instruction.
pub const ACTION_VERBS: &[&str] = &[
    "pick", "place", "install", "put", "hang", "move", "mount", "attach", "set",
];

/// Tokens that make a reference-free reply a denial. Checked before affirmations,
/// so "not correct" is a denial.
pub const NEGATIONS: &[&str] = &[
    "no", "nope", "nah", "not", "wrong", "incorrect", "isn't", "don't", "negative",
];

/// Tokens that make a reference-free reply a confirmation.
pub const AFFIRMATIONS: &[&str] = &[
    "yes", "yeah", "yep", "yup", "correct", "right", "confirm", "confirmed", "ok", "okay",
    "sure", "affirmative",
];

const PANEL_WORDS: &[&str] = &["panel", "panels", "target", "drywall", "board"];
const STUD_WORDS: &[&str] = &["stud", "studs", "destination"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    PickPlace,
    Confirm,
    Deny,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambiguity {
    None,
    ConflictingTargets,
    ConflictingDestinations,
    MissingTarget,
    MissingDestination,
    Blank,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedIntent {
    pub action: Action,
    /// Panel references in order of first mention. May include ids that are
    /// not in the scene when the text called them a panel ("panel 999").
    pub target_refs: Vec<ObjectId>,
    pub destination_refs: Vec<ObjectId>,
    /// Numbers that are not scene objects and had no panel/stud cue.
    pub unresolved_refs: Vec<ObjectId>,
    pub ambiguity: Ambiguity,
}

impl ParsedIntent {
    /// The `(target, destination)` pair when the intent is unambiguous.
    pub fn grounded(&self) -> Option<(ObjectId, ObjectId)> {
        match (self.ambiguity, &self.target_refs[..], &self.destination_refs[..]) {
            (Ambiguity::None, [t], [d]) => Some((*t, *d)),
            _ => None,
        }
    }

    pub fn blank() -> Self {
        ParsedIntent {
            action: Action::Unknown,
            target_refs: Vec::new(),
            destination_refs: Vec::new(),
            unresolved_refs: Vec::new(),
            ambiguity: Ambiguity::Blank,
        }
    }
}

/// Ids found in free text, bucketed by scene kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedIds {
    pub panels: Vec<ObjectId>,
    pub studs: Vec<ObjectId>,
    /// Numbers naming no panel or stud in the scene.
    pub unknown: Vec<ObjectId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RoleCue {
    Panel,
    Stud,
}

#[derive(Debug, Clone, Copy)]
struct NumberToken {
    value: u32,
    cue: Option<RoleCue>,
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '\u{2019}'))
        .filter(|w| !w.is_empty())
        .map(|w| w.replace('\u{2019}', "'").trim_matches('\'').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Standalone numeric tokens, skipping "4 by 8" style size phrases.
fn number_tokens(text: &str) -> Vec<NumberToken> {
    let words = words(text);
    let is_num = |w: &str| !w.is_empty() && w.bytes().all(|b| b.is_ascii_digit());
    let mut out = Vec::new();
    for (i, w) in words.iter().enumerate() {
        if !is_num(w) {
            continue;
        }
        let size_left = i >= 2 && words[i - 1] == "by" && is_num(&words[i - 2]);
        let size_right = i + 2 < words.len() && words[i + 1] == "by" && is_num(&words[i + 2]);
        if size_left || size_right {
            continue;
        }
        let Ok(value) = w.parse::<u32>() else { continue };
        let cue = i
            .checked_sub(1)
            .map(|j| words[j].as_str())
            .and_then(|prev| {
                if PANEL_WORDS.contains(&prev) {
                    Some(RoleCue::Panel)
                } else if STUD_WORDS.contains(&prev) {
                    Some(RoleCue::Stud)
                } else {
                    None
                }
            });
        out.push(NumberToken { value, cue });
    }
    out
}

fn push_unique(list: &mut Vec<ObjectId>, id: ObjectId) {
    if !list.contains(&id) {
        list.push(id);
    }
}

/// Scans `text` for standalone integers and buckets them by scene kind.
pub fn extract_ids(text: &str, scene: &Scene) -> ExtractedIds {
    let mut ids = ExtractedIds::default();
    for tok in number_tokens(text) {
        let id = ObjectId(tok.value);
        match scene.get(id).map(|o| o.kind) {
            Some(ObjectKind::Panel) => push_unique(&mut ids.panels, id),
            Some(ObjectKind::Stud) => push_unique(&mut ids.studs, id),
            _ => push_unique(&mut ids.unknown, id),
        }
    }
    ids
}

fn normalize_for_areas(text: &str) -> String {
    let lowered = words(text).join(" ");
    lowered
        .replace("left most", "leftmost")
        .replace("right most", "rightmost")
}

/// Every area phrase in `text`, in order of appearance. Longest match wins, so
/// "second rightmost" never also yields "rightmost".
pub fn area_labels_in(text: &str) -> Vec<AreaLabel> {
    let norm = normalize_for_areas(text);
    let tokens: Vec<&str> = norm.split(' ').collect();
    let mut found = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let next = tokens.get(i + 1).copied();
        let (label, width) = match (tokens[i], next) {
            ("second", Some("leftmost")) => (Some(AreaLabel::SecondLeftmost), 2),
            ("second", Some("rightmost")) => (Some(AreaLabel::SecondRightmost), 2),
            ("leftmost", _) => (Some(AreaLabel::Leftmost), 1),
            ("rightmost", _) => (Some(AreaLabel::Rightmost), 1),
            _ => (None, 1),
        };
        if let Some(label) = label {
            found.push(label);
        }
        i += width;
    }
    found
}

/// First area phrase in `phrase`, case-insensitive.
pub fn area_label_in(phrase: &str) -> Option<AreaLabel> {
    area_labels_in(phrase).into_iter().next()
}

/// Resolves an area phrase to the destination stud carrying that label.
pub fn resolve_area_phrase(phrase: &str, scene: &Scene) -> Option<ObjectId> {
    area_label_in(phrase)
        .and_then(|label| scene.stud_for_area(label))
        .map(|s| s.id)
}

fn classify_reply_word(text: &str) -> Option<Action> {
    let ws = words(text);
    if ws.iter().any(|w| NEGATIONS.contains(&w.as_str())) {
        Some(Action::Deny)
    } else if ws.iter().any(|w| AFFIRMATIONS.contains(&w.as_str())) {
        Some(Action::Confirm)
    } else {
        None
    }
}

fn has_action_verb(text: &str) -> bool {
    words(text).iter().any(|w| ACTION_VERBS.contains(&w.as_str()))
}

/// Grounds a composite command against the scene.
pub fn parse_command(command: &CompositeCommand, scene: &Scene) -> ParsedIntent {
    if command.is_blank() && command.attachments.is_empty() {
        return ParsedIntent::blank();
    }
    let text = &command.text;

    let mut targets = Vec::new();
    let mut destinations = Vec::new();
    let mut unresolved = Vec::new();

    for tok in number_tokens(text) {
        let id = ObjectId(tok.value);
        match (scene.get(id).map(|o| o.kind), tok.cue) {
            (Some(ObjectKind::Panel), _) => push_unique(&mut targets, id),
            (Some(ObjectKind::Stud), _) => push_unique(&mut destinations, id),
            (_, Some(RoleCue::Panel)) => push_unique(&mut targets, id),
            (_, Some(RoleCue::Stud)) => push_unique(&mut destinations, id),
            (_, None) => push_unique(&mut unresolved, id),
        }
    }
    for label in area_labels_in(text) {
        if let Some(stud) = scene.stud_for_area(label) {
            push_unique(&mut destinations, stud.id);
        }
    }
    for event in &command.attachments {
        match event.role {
            SelectionRole::Target => push_unique(&mut targets, event.object_id),
            SelectionRole::Destination => push_unique(&mut destinations, event.object_id),
        }
    }

    let has_refs = !(targets.is_empty() && destinations.is_empty() && unresolved.is_empty());
    let action = if has_refs || has_action_verb(text) {
        Action::PickPlace
    } else {
        classify_reply_word(text).unwrap_or(Action::Unknown)
    };

    let ambiguity = if targets.len() > 1 {
        Ambiguity::ConflictingTargets
    } else if destinations.len() > 1 {
        Ambiguity::ConflictingDestinations
    } else if targets.is_empty() {
        Ambiguity::MissingTarget
    } else if destinations.is_empty() {
        Ambiguity::MissingDestination
    } else {
        Ambiguity::None
    };

    ParsedIntent {
        action,
        target_refs: targets,
        destination_refs: destinations,
        unresolved_refs: unresolved,
        ambiguity,
    }
}

/// Convenience for text with no attachments.
pub fn parse_text(text: &str, scene: &Scene) -> ParsedIntent {
    let command = CompositeCommand {
        text: text.to_string(),
        utterance: text.to_string(),
        attachments: Vec::new(),
    };
    parse_command(&command, scene)
}
