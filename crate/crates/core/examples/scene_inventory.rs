//! Load a scene, list what is available, and install a panel.
//!
//!     cargo run -p hrc-core --example scene_inventory [scene.json]

use hrc_core::scene::{apply_install, available_ids, load_scene, ObjectId, ObjectKind, Scene};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = match std::env::args().nth(1) {
        Some(path) => load_scene(&std::fs::read_to_string(path)?)?,
        None => Scene::reference(),
    };

    println!("panels:");
    for p in scene.panels() {
        let size = p.size_ft.map(|s| s.to_string()).unwrap_or_else(|| "?".into());
        println!("  {:>4}  {:<20} {size}", p.id, p.name);
    }
    println!("destination studs:");
    for s in scene.destination_studs() {
        let label = s.area_label.map(|l| l.phrase()).unwrap_or("-");
        let size = s.allowed_panel_size.map(|s| s.to_string()).unwrap_or_default();
        println!("  {:>4}  {label:<18} takes {size}", s.id);
    }

    let after = apply_install(&scene, ObjectId(504), ObjectId(606))?;
    println!("\nafter installing 504 on 606:");
    let ids = |kind| available_ids(&after, kind).iter().map(|id| id.0).collect::<Vec<_>>();
    println!("  free panels: {:?}", ids(ObjectKind::Panel));
    println!("  free studs:  {:?}", ids(ObjectKind::Stud));
    println!("  original scene untouched: {}", scene.installations().is_empty());

    if let Err(e) = apply_install(&after, ObjectId(501), ObjectId(606)) {
        println!("  second install on 606 refused: {e}");
    }
    Ok(())
}
