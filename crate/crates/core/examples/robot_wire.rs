//! Task frames on the wire and the simulated arm's event sequence.

use hrc_core::dispatch::{decode, encode, encode_event, FaultInjection, RobotSim, TaskCommand};
use hrc_core::scene::ObjectId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let task = TaskCommand::pick_place(ObjectId(504), ObjectId(606), "s1");
    let frame = encode(&task);
    println!("task frame: {frame}");
    assert_eq!(decode(&frame)?, task);

    match decode(r#"{"op":"publish","topic":"/hrc/task","msg":{"action":"weld"}}"#) {
        Ok(_) => unreachable!(),
        Err(e) => println!("bad frame: {e}"),
    }

    let mut sim = RobotSim::new(FaultInjection { fail_all: false, fail_next: 1 });
    sim.enqueue(task.clone());
    sim.enqueue(TaskCommand::pick_place(ObjectId(501), ObjectId(602), "s1"));
    println!("\nfirst task fails, second succeeds:");
    for ev in sim.run_until_idle() {
        println!("{}", encode_event(&ev));
    }
    Ok(())
}
