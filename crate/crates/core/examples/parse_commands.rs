//! Ground free-form commands against the scene.

use hrc_core::parser::parse_text;
use hrc_core::scene::Scene;

fn main() {
    let scene = Scene::reference();
    let commands = [
        "Panel 504 to stud 606",
        "Please place panel 504 in the second rightmost position",
        "Okay, robot, could you please pick up panel 503 and install it at the rightmost portion of the framing?",
        "Use the 4 by 8 panel 501 on stud 602",
        "place panel 502, I mean panel 503, on stud 604",
        "install 501",
        "yes, that's right",
        "no",
        "",
    ];
    for text in commands {
        let intent = parse_text(text, &scene);
        println!("{text:?}");
        println!(
            "    {:?}  targets {:?}  destinations {:?}  unresolved {:?}  ambiguity {:?}",
            intent.action, intent.target_refs, intent.destination_refs, intent.unresolved_refs, intent.ambiguity
        );
    }
}
