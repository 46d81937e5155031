//! rosbridge-style JSON frames.
//!
//! Task frame, with keys in this exact order:
//!
//! ```json
//! {"op":"publish","topic":"/hrc/task","msg":{"action":"pick_place","target_id":504,"destination_id":606,"session":"s1"}}
//! ```

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::sim::{Phase, RobotEvent};
use super::{TaskAction, TaskCommand};
use crate::scene::ObjectId;

pub const TASK_TOPIC: &str = "/hrc/task";
pub const EVENT_TOPIC: &str = "/hrc/robot_event";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("unsupported op {0:?}")]
    WrongOp(String),
    #[error("unexpected topic {0:?}")]
    WrongTopic(String),
    #[error("missing or invalid field {0:?}")]
    MissingField(&'static str),
    #[error("unsupported action {0:?}")]
    UnknownAction(String),
}

#[derive(Serialize)]
struct Envelope<'a, M> {
    op: &'a str,
    topic: &'a str,
    msg: M,
}

#[derive(Serialize)]
struct TaskMsg<'a> {
    action: TaskAction,
    target_id: ObjectId,
    destination_id: ObjectId,
    session: &'a str,
}

pub fn encode(task: &TaskCommand) -> String {
    let frame = Envelope {
        op: "publish",
        topic: TASK_TOPIC,
        msg: TaskMsg {
            action: task.action,
            target_id: task.target_id,
            destination_id: task.destination_id,
            session: &task.session,
        },
    };
    serde_json::to_string(&frame).expect("task frame serializes")
}

fn envelope<'a>(value: &'a Value, topic: &str) -> Result<&'a serde_json::Map<String, Value>, WireError> {
    let obj = value
        .as_object()
        .ok_or_else(|| WireError::Malformed("frame is not a JSON object".into()))?;
    let op = obj.get("op").and_then(Value::as_str).ok_or(WireError::MissingField("op"))?;
    if op != "publish" {
        return Err(WireError::WrongOp(op.to_string()));
    }
    let t = obj.get("topic").and_then(Value::as_str).ok_or(WireError::MissingField("topic"))?;
    if t != topic {
        return Err(WireError::WrongTopic(t.to_string()));
    }
    obj.get("msg")
        .and_then(Value::as_object)
        .ok_or(WireError::MissingField("msg"))
}

fn id_field(msg: &serde_json::Map<String, Value>, name: &'static str) -> Result<ObjectId, WireError> {
    msg.get(name)
        .and_then(Value::as_u64)
        .and_then(|v| u32::try_from(v).ok())
        .map(ObjectId)
        .ok_or(WireError::MissingField(name))
}

fn task_from_msg(msg: &serde_json::Map<String, Value>) -> Result<TaskCommand, WireError> {
    let action = msg.get("action").and_then(Value::as_str).ok_or(WireError::MissingField("action"))?;
    if action != "pick_place" {
        return Err(WireError::UnknownAction(action.to_string()));
    }
    Ok(TaskCommand {
        action: TaskAction::PickPlace,
        target_id: id_field(msg, "target_id")?,
        destination_id: id_field(msg, "destination_id")?,
        session: msg
            .get("session")
            .and_then(Value::as_str)
            .ok_or(WireError::MissingField("session"))?
            .to_string(),
    })
}

/// Strict parse of a task frame. Unknown extra fields inside `msg` are ignored.
pub fn decode(frame: &str) -> Result<TaskCommand, WireError> {
    let value: Value = serde_json::from_str(frame).map_err(|e| WireError::Malformed(e.to_string()))?;
    let msg = envelope(&value, TASK_TOPIC)?;
    task_from_msg(msg)
}

#[derive(Serialize)]
struct EventMsg<'a> {
    phase: Phase,
    sequence: u64,
    detail: &'a str,
    task: TaskMsg<'a>,
}

pub fn encode_event(event: &RobotEvent) -> String {
    let frame = Envelope {
        op: "publish",
        topic: EVENT_TOPIC,
        msg: EventMsg {
            phase: event.phase,
            sequence: event.sequence,
            detail: &event.detail,
            task: TaskMsg {
                action: event.task.action,
                target_id: event.task.target_id,
                destination_id: event.task.destination_id,
                session: &event.task.session,
            },
        },
    };
    serde_json::to_string(&frame).expect("event frame serializes")
}

pub fn decode_event(frame: &str) -> Result<RobotEvent, WireError> {
    let value: Value = serde_json::from_str(frame).map_err(|e| WireError::Malformed(e.to_string()))?;
    let msg = envelope(&value, EVENT_TOPIC)?;
    let phase = msg
        .get("phase")
        .cloned()
        .and_then(|v| serde_json::from_value::<Phase>(v).ok())
        .ok_or(WireError::MissingField("phase"))?;
    let sequence = msg.get("sequence").and_then(Value::as_u64).ok_or(WireError::MissingField("sequence"))?;
    let detail = msg.get("detail").and_then(Value::as_str).unwrap_or_default().to_string();
    let task = msg
        .get("task")
        .and_then(Value::as_object)
        .ok_or(WireError::MissingField("task"))
        .and_then(task_from_msg)?;
    Ok(RobotEvent {
        phase,
        task,
        sequence,
        detail,
    })
}
