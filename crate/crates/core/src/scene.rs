//! Semantic scene model: panels, studs, and installation state.
//!
//! A [`Scene`] is an immutable value. Installing a panel produces a successor
//! scene, so a session can keep its whole lineage around for replay.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The reference drywall scene: panels 501-504 and studs 601-609.
pub const REFERENCE_SCENE_JSON: &str = include_str!("../../../scenes/drywall_reference.json");

/// Identifier of a scene object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for ObjectId {
    fn from(v: u32) -> Self {
        ObjectId(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Panel,
    Stud,
    Other,
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectKind::Panel => "panel",
            ObjectKind::Stud => "stud",
            ObjectKind::Other => "object",
        })
    }
}

/// Destination area a stud sits at the center of, counted from the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaLabel {
    Leftmost,
    SecondLeftmost,
    SecondRightmost,
    Rightmost,
}

impl AreaLabel {
    pub const ALL: [AreaLabel; 4] = [
        AreaLabel::Leftmost,
        AreaLabel::SecondLeftmost,
        AreaLabel::SecondRightmost,
        AreaLabel::Rightmost,
    ];

    /// Canonical lowercase phrase, e.g. `"second rightmost"`.
    pub fn phrase(self) -> &'static str {
        match self {
            AreaLabel::Leftmost => "leftmost",
            AreaLabel::SecondLeftmost => "second leftmost",
            AreaLabel::SecondRightmost => "second rightmost",
            AreaLabel::Rightmost => "rightmost",
        }
    }
}

impl fmt::Display for AreaLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phrase())
    }
}

/// Panel dimensions in feet, serialized as `[width, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct SizeFt {
    pub width: f64,
    pub height: f64,
}

impl SizeFt {
    pub const fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }
}

impl From<[f64; 2]> for SizeFt {
    fn from([width, height]: [f64; 2]) -> Self {
        Self { width, height }
    }
}

impl From<SizeFt> for [f64; 2] {
    fn from(s: SizeFt) -> Self {
        [s.width, s.height]
    }
}

impl fmt::Display for SizeFt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} by {}", self.width, self.height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: ObjectId,
    pub kind: ObjectKind,
    pub name: String,
    pub layer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_ft: Option<SizeFt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_label: Option<AreaLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_panel_size: Option<SizeFt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub installed_on: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupied_by: Option<ObjectId>,
    /// Carried through untouched; never interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<serde_json::Value>,
}

impl SceneObject {
    pub fn is_panel(&self) -> bool {
        self.kind == ObjectKind::Panel
    }

    /// A stud that can receive a panel (one with an area label).
    pub fn is_destination(&self) -> bool {
        self.kind == ObjectKind::Stud && self.area_label.is_some()
    }

    pub fn is_installed(&self) -> bool {
        self.installed_on.is_some()
    }

    pub fn is_occupied(&self) -> bool {
        self.occupied_by.is_some()
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("malformed scene document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scene integrity violation: {0}")]
    Integrity(String),
    #[error("object {0} not found")]
    NotFound(ObjectId),
    #[error("cannot install panel {panel} on stud {stud}: {reason}")]
    Precondition {
        panel: ObjectId,
        stud: ObjectId,
        reason: String,
    },
}

#[derive(Serialize, Deserialize)]
struct SceneDocument {
    objects: Vec<SceneObject>,
    #[serde(default)]
    metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    objects: BTreeMap<ObjectId, SceneObject>,
    metadata: BTreeMap<String, serde_json::Value>,
}

impl Scene {
    /// Builds a scene from objects, checking every integrity rule.
    pub fn from_objects(
        objects: impl IntoIterator<Item = SceneObject>,
        metadata: BTreeMap<String, serde_json::Value>,
    ) -> Result<Self, SceneError> {
        let mut map = BTreeMap::new();
        for obj in objects {
            let id = obj.id;
            if map.insert(id, obj).is_some() {
                return Err(SceneError::Integrity(format!("duplicate object id {id}")));
            }
        }
        let scene = Scene {
            objects: map,
            metadata,
        };
        scene.check_integrity()?;
        Ok(scene)
    }

    pub fn reference() -> Self {
        load_scene(REFERENCE_SCENE_JSON).expect("bundled reference scene is valid")
    }

    fn check_integrity(&self) -> Result<(), SceneError> {
        let bad = |msg: String| Err(SceneError::Integrity(msg));
        for obj in self.objects.values() {
            if obj.id.0 == 0 {
                return bad("object ids must be positive".into());
            }
            match obj.kind {
                ObjectKind::Panel => {
                    if obj.area_label.is_some() || obj.allowed_panel_size.is_some() {
                        return bad(format!("panel {} carries destination fields", obj.id));
                    }
                    if obj.occupied_by.is_some() {
                        return bad(format!("panel {} has occupied_by", obj.id));
                    }
                    if obj.size_ft.is_none() {
                        return bad(format!("panel {} has no size_ft", obj.id));
                    }
                }
                ObjectKind::Stud => {
                    if obj.size_ft.is_some() || obj.installed_on.is_some() {
                        return bad(format!("stud {} carries panel fields", obj.id));
                    }
                    if obj.area_label.is_some() != obj.allowed_panel_size.is_some() {
                        return bad(format!(
                            "stud {} must carry both area_label and allowed_panel_size or neither",
                            obj.id
                        ));
                    }
                }
                ObjectKind::Other => {
                    if obj.size_ft.is_some()
                        || obj.installed_on.is_some()
                        || obj.area_label.is_some()
                        || obj.allowed_panel_size.is_some()
                        || obj.occupied_by.is_some()
                    {
                        return bad(format!("object {} of kind other carries panel/stud fields", obj.id));
                    }
                }
            }
        }

        let mut labels = BTreeSet::new();
        for obj in self.objects.values() {
            if let Some(label) = obj.area_label {
                if !labels.insert(label) {
                    return bad(format!("area label {label} assigned to more than one stud"));
                }
            }
            if let Some(stud_id) = obj.installed_on {
                match self.objects.get(&stud_id) {
                    Some(stud) if stud.kind == ObjectKind::Stud => {
                        if stud.occupied_by != Some(obj.id) {
                            return bad(format!(
                                "panel {} claims stud {stud_id}, which does not name it back",
                                obj.id
                            ));
                        }
                    }
                    _ => return bad(format!("panel {} installed on unknown stud {stud_id}", obj.id)),
                }
            }
            if let Some(panel_id) = obj.occupied_by {
                match self.objects.get(&panel_id) {
                    Some(panel) if panel.kind == ObjectKind::Panel => {
                        if panel.installed_on != Some(obj.id) {
                            return bad(format!(
                                "stud {} claims panel {panel_id}, which does not name it back",
                                obj.id
                            ));
                        }
                    }
                    _ => return bad(format!("stud {} occupied by unknown panel {panel_id}", obj.id)),
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, id: ObjectId) -> Option<&SceneObject> {
        self.objects.get(&id)
    }

    pub fn objects(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.values()
    }

    pub fn metadata(&self) -> &BTreeMap<String, serde_json::Value> {
        &self.metadata
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn panels(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.values().filter(|o| o.kind == ObjectKind::Panel)
    }

    pub fn studs(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.values().filter(|o| o.kind == ObjectKind::Stud)
    }

    pub fn destination_studs(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.values().filter(|o| o.is_destination())
    }

    pub fn stud_for_area(&self, label: AreaLabel) -> Option<&SceneObject> {
        self.destination_studs().find(|s| s.area_label == Some(label))
    }

    /// `(panel, stud)` pairs currently installed, ordered by panel id.
    pub fn installations(&self) -> Vec<(ObjectId, ObjectId)> {
        self.panels()
            .filter_map(|p| p.installed_on.map(|s| (p.id, s)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = SceneDocument {
            objects: self.objects.values().cloned().collect(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("scene serializes")
    }
}

/// Parses a scene document and checks its integrity.
pub fn load_scene(document: &str) -> Result<Scene, SceneError> {
    let doc: SceneDocument = serde_json::from_str(document)?;
    Scene::from_objects(doc.objects, doc.metadata)
}

pub fn lookup(scene: &Scene, id: ObjectId) -> Result<&SceneObject, SceneError> {
    scene.get(id).ok_or(SceneError::NotFound(id))
}

/// Records `panel` as installed on `stud` and returns the successor scene.
///
/// Callers are expected to have validated the pair already. This only
/// refuses pairs that would break the scene's own invariants.
pub fn apply_install(scene: &Scene, panel: ObjectId, stud: ObjectId) -> Result<Scene, SceneError> {
    let refuse = |reason: &str| SceneError::Precondition {
        panel,
        stud,
        reason: reason.to_string(),
    };
    let p = scene.get(panel).ok_or_else(|| refuse("unknown panel id"))?;
    let s = scene.get(stud).ok_or_else(|| refuse("unknown stud id"))?;
    if !p.is_panel() {
        return Err(refuse("target is not a panel"));
    }
    if s.kind != ObjectKind::Stud {
        return Err(refuse("destination is not a stud"));
    }
    if let Some(on) = p.installed_on {
        return Err(refuse(&format!("panel already installed on stud {on}")));
    }
    if let Some(by) = s.occupied_by {
        return Err(refuse(&format!("stud already occupied by panel {by}")));
    }

    let mut next = scene.clone();
    next.objects.get_mut(&panel).unwrap().installed_on = Some(stud);
    next.objects.get_mut(&stud).unwrap().occupied_by = Some(panel);
    Ok(next)
}

/// Uninstalled panels, or unoccupied destination studs, by ascending id.
pub fn available(scene: &Scene, kind: ObjectKind) -> Vec<&SceneObject> {
    match kind {
        ObjectKind::Panel => scene.panels().filter(|p| !p.is_installed()).collect(),
        ObjectKind::Stud => scene
            .destination_studs()
            .filter(|s| !s.is_occupied())
            .collect(),
        ObjectKind::Other => Vec::new(),
    }
}

pub fn available_ids(scene: &Scene, kind: ObjectKind) -> Vec<ObjectId> {
    available(scene, kind).into_iter().map(|o| o.id).collect()
}
