//! Approved tasks, their wire format, and the simulated robot that runs them.

mod sim;
pub mod transport;
mod wire;

pub use sim::{spawn_robot, FaultInjection, Phase, RobotEvent, RobotHandle, RobotSim, SimConfig};
pub use wire::{
    decode, decode_event, encode, encode_event, WireError, EVENT_TOPIC, TASK_TOPIC,
};

use serde::{Deserialize, Serialize};

use crate::scene::ObjectId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskAction {
    PickPlace,
}

/// A pick-and-place order the human has approved.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaskCommand {
    pub action: TaskAction,
    pub target_id: ObjectId,
    pub destination_id: ObjectId,
    pub session: String,
}

impl TaskCommand {
    pub fn pick_place(target: ObjectId, destination: ObjectId, session: impl Into<String>) -> Self {
        Self {
            action: TaskAction::PickPlace,
            target_id: target,
            destination_id: destination,
            session: session.into(),
        }
    }
}
