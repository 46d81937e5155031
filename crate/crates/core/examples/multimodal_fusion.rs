//! Pointing selections fused into a spoken command.

use hrc_core::fusion::{compose, record_selection, SelectionBatch};
use hrc_core::parser::parse_command;
use hrc_core::scene::{ObjectId, Scene};

fn main() {
    let scene = Scene::reference();
    let mut batch = SelectionBatch::new();

    for id in [502, 504, 606, 999] {
        match record_selection(&mut batch, &scene, ObjectId(id)) {
            Ok(h) => println!("selected {id}: {:?}, {} highlight for {} ms", h.role, h.color, h.duration_ms),
            Err(e) => println!("selected {id}: {e}"),
        }
    }

    let cmd = compose("Please install this panel here", &mut batch);
    println!("\ncomposite: {}", cmd.text);
    println!("batch empty afterwards: {}", batch.is_empty());

    let intent = parse_command(&cmd, &scene);
    println!("parsed: {:?} target {:?} destination {:?}", intent.action, intent.target_refs, intent.destination_refs);
}
