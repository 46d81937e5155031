//! The system prompt sent to an LLM assistant, regenerated from the scene.

use hrc_core::assistant::build_prompt;
use hrc_core::scene::{apply_install, ObjectId, Scene};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = apply_install(&Scene::reference(), ObjectId(504), ObjectId(606))?;
    let prompt = build_prompt(&scene)?;
    println!("{}", prompt.render());
    Ok(())
}
