use proptest::prelude::*;

use hrc_core::assistant::ReferenceAssistant;
use hrc_core::dialogue::{DialogueSession, TaskOutcome};
use hrc_core::fusion::{compose, record_selection, SelectionBatch, DESTINATION_CLAUSE, TARGET_CLAUSE};
use hrc_core::parser::parse_text;
use hrc_core::scene::{apply_install, ObjectId, Scene};
use hrc_core::validator::validate_pair;

const SELECTABLE: [u32; 8] = [501, 502, 503, 504, 602, 604, 606, 608];

fn selections() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(prop::sample::select(SELECTABLE.to_vec()), 0..6)
}

fn utterance() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "", "install this here", "Please put it there", "yes!", "move it", "hang this drywall  ",
        "what?", "ok.",
    ])
    .prop_map(str::to_string)
}

fn fuse(utterance: &str, ids: &[u32]) -> hrc_core::fusion::CompositeCommand {
    let scene = Scene::reference();
    let mut batch = SelectionBatch::new();
    for id in ids {
        record_selection(&mut batch, &scene, ObjectId(*id)).unwrap();
    }
    compose(utterance, &mut batch)
}

proptest! {
    #[test]
    fn fusion_is_deterministic(u in utterance(), ids in selections()) {
        prop_assert_eq!(fuse(&u, &ids), fuse(&u, &ids));
    }

    #[test]
    fn fusion_keeps_utterance_prefix_and_one_clause_per_role(u in utterance(), ids in selections()) {
        let cmd = fuse(&u, &ids);
        prop_assert!(cmd.text.starts_with(u.trim_end()));
        let has_panel = ids.iter().any(|id| *id < 600);
        let has_stud = ids.iter().any(|id| *id >= 600);
        let target_prefix = TARGET_CLAUSE.split("####").next().unwrap();
        let dest_prefix = DESTINATION_CLAUSE.split("####").next().unwrap();
        prop_assert_eq!(cmd.text.matches(target_prefix).count(), usize::from(has_panel));
        prop_assert_eq!(cmd.text.matches(dest_prefix).count(), usize::from(has_stud));
        if has_panel && has_stud {
            prop_assert!(cmd.text.find(target_prefix) < cmd.text.find(dest_prefix));
        }
    }

    #[test]
    fn parsed_refs_include_latest_selection_per_role(ids in selections()) {
        let scene = Scene::reference();
        let cmd = fuse("install this here", &ids);
        let intent = parse_text(&cmd.text, &scene);
        if let Some(p) = ids.iter().rev().find(|id| **id < 600) {
            prop_assert!(intent.target_refs.contains(&ObjectId(*p)));
        }
        if let Some(s) = ids.iter().rev().find(|id| **id >= 600) {
            prop_assert!(intent.destination_refs.contains(&ObjectId(*s)));
        }
    }

    #[test]
    fn validated_installs_preserve_scene_invariants(pairs in prop::collection::vec((501u32..=504, 601u32..=609), 0..12)) {
        let mut scene = Scene::reference();
        for (p, s) in pairs {
            if validate_pair(&scene, ObjectId(p), ObjectId(s)).is_ok() {
                scene = apply_install(&scene, ObjectId(p), ObjectId(s)).unwrap();
            }
            let installs = scene.installations();
            let mut panels: Vec<_> = installs.iter().map(|(p, _)| *p).collect();
            let mut studs: Vec<_> = installs.iter().map(|(_, s)| *s).collect();
            panels.dedup();
            studs.sort();
            studs.dedup();
            prop_assert_eq!(panels.len(), installs.len());
            prop_assert_eq!(studs.len(), installs.len());
            for (p, s) in installs {
                prop_assert_eq!(scene.get(s).unwrap().occupied_by, Some(p));
                prop_assert_eq!(scene.get(p).unwrap().installed_on, Some(s));
            }
        }
    }

    #[test]
    fn session_invariants_hold_on_random_walks(steps in prop::collection::vec(0u8..6, 1..40), seed in any::<u64>()) {
        let rule = ReferenceAssistant;
        let mut session = DialogueSession::new(Scene::reference());
        let mut x = seed;
        for step in steps {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let p = 501 + (x >> 33) % 4;
            let s = 602 + 2 * ((x >> 40) % 4);
            match step {
                0 => { let _ = session.submit(&format!("Panel {p} to stud {s}"), &rule); }
                1 => { let _ = session.submit("yes", &rule); }
                2 => { let _ = session.approve(); }
                3 => { let _ = session.complete(TaskOutcome::Success); }
                4 => { let _ = session.select(ObjectId(p as u32)); }
                _ => { let _ = session.cancel(); }
            }
            prop_assert!(session.check_invariants().is_ok(), "{:?}", session.check_invariants());
        }
    }
}
