//! Check instructions against size rules and the install history, then print
//! the verdict table for the fresh scene.

use hrc_core::parser::parse_text;
use hrc_core::scene::{apply_install, ObjectId, Scene};
use hrc_core::validator::{enumerate_verdicts, validate, Verdict};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = apply_install(&Scene::reference(), ObjectId(501), ObjectId(602))?;
    println!("history: 501 on 602\n");
    for text in [
        "Panel 502 to stud 604",
        "Panel 504 to stud 602",
        "Panel 505 to stud 604",
        "Panel 501 to stud 604",
        "Panel 503 to stud 606",
        "Panel 502 to stud 605",
        "place panel 502, I mean panel 503, on stud 604",
    ] {
        let result = validate(&scene, &parse_text(text, &scene))?;
        println!("{text}\n    {}: {}", result.verdict, result.explanation);
    }

    println!("\nfresh scene, every panel against every stud:");
    let rows = enumerate_verdicts(&Scene::reference());
    let studs: Vec<u32> = Scene::reference().studs().map(|s| s.id.0).collect();
    print!("{:>6}", "");
    for s in &studs {
        print!("{s:>6}");
    }
    println!();
    for panel in Scene::reference().panels() {
        print!("{:>6}", panel.id.0);
        for s in &studs {
            let row = rows.iter().find(|r| r.panel == panel.id && r.stud.0 == *s).unwrap();
            print!("{:>6}", if row.verdict == Verdict::Ok { "ok" } else { "." });
        }
        println!();
    }
    let ok = rows.iter().filter(|r| r.verdict == Verdict::Ok).count();
    println!("{ok} of {} pairs are valid", rows.len());
    Ok(())
}
