//! An interactive session with the reference assistant and a simulated arm.
//!
//! Type commands; `select <id>` points at an object, `approve` runs the task,
//! `cancel` drops the pending interpretation and `fault` makes the next task
//! fail. The session ends when stdin closes.
//!
//!     cargo run -p hrc-core --example dialogue_session

use std::io::BufRead;

use hrc_core::assistant::ReferenceAssistant;
use hrc_core::dialogue::DialogueSession;
use hrc_core::scene::Scene;
use hrc_core::script::{ScriptRunner, Step, StepOutcome};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rule = ReferenceAssistant;
    let mut runner = ScriptRunner::new(DialogueSession::new(Scene::reference()), &rule);
    println!("session ready; state {}", runner.session().state());

    for line in std::io::stdin().lock().lines() {
        let line = line?;
        let step = match line.trim().split_once(' ') {
            Some(("select", id)) => match id.trim().parse() {
                Ok(id) => Step::Select(id),
                Err(_) => {
                    println!("select needs a numeric id");
                    continue;
                }
            },
            _ if line.trim() == "approve" => Step::Approve,
            _ if line.trim() == "cancel" => Step::Cancel,
            _ if line.trim() == "fault" => Step::InjectFault,
            _ => Step::Say(line),
        };
        match runner.run_step(&step)? {
            StepOutcome::Reply(r) => println!("assistant: {}", r.text),
            StepOutcome::Highlight(h) => println!("[{} highlighted as {:?}]", h.object_id, h.role),
            StepOutcome::Dispatched { events, .. } => {
                for ev in events {
                    println!("robot: {:?} {}", ev.phase, ev.detail);
                }
            }
            StepOutcome::FaultArmed => println!("[next task will fail]"),
            StepOutcome::Cancelled => println!("[cancelled]"),
            StepOutcome::Rejected { error } => println!("[{error}]"),
        }
        println!("  state {}", runner.session().state());
    }
    println!("installed: {:?}", runner.session().scene().installations());
    Ok(())
}
