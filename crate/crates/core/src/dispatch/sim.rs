//! Single-arm discrete-event robot.
//!
//! Tasks run strictly one at a time in arrival order. Each task produces
//! `Accepted, Picking, Placing` and then exactly one of `Done` or `Failed`.

use std::collections::VecDeque;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, mpsc};

use super::TaskCommand;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Accepted,
    Picking,
    Placing,
    Done,
    Failed,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Done | Phase::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotEvent {
    pub phase: Phase,
    pub task: TaskCommand,
    /// Monotonic across everything this robot has emitted.
    pub sequence: u64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FaultInjection {
    /// Every task fails.
    pub fail_all: bool,
    /// The next `n` accepted tasks fail.
    pub fail_next: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimConfig {
    pub phase_delay: Duration,
    pub faults: FaultInjection,
}

#[derive(Debug)]
struct Active {
    task: TaskCommand,
    phase: Phase,
    fail: bool,
}

#[derive(Debug, Default)]
pub struct RobotSim {
    queue: VecDeque<TaskCommand>,
    active: Option<Active>,
    sequence: u64,
    faults: FaultInjection,
}

impl RobotSim {
    pub fn new(faults: FaultInjection) -> Self {
        Self {
            faults,
            ..Self::default()
        }
    }

    pub fn faults_mut(&mut self) -> &mut FaultInjection {
        &mut self.faults
    }

    /// Queues a task. Never drops.
    pub fn enqueue(&mut self, task: TaskCommand) {
        self.queue.push_back(task);
    }

    pub fn is_idle(&self) -> bool {
        self.active.is_none() && self.queue.is_empty()
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Advances by one event, or returns `None` when there is nothing to do.
    ///
    /// A real joint-state stream would be published between `Picking` and
    /// `Placing` here; the simulator only reports phase changes.
    pub fn step(&mut self) -> Option<RobotEvent> {
        let (task, phase, detail) = match self.active.take() {
            None => {
                let task = self.queue.pop_front()?;
                let fail = if self.faults.fail_all {
                    true
                } else if self.faults.fail_next > 0 {
                    self.faults.fail_next -= 1;
                    true
                } else {
                    false
                };
                self.active = Some(Active {
                    task: task.clone(),
                    phase: Phase::Accepted,
                    fail,
                });
                (task, Phase::Accepted, "task accepted".to_string())
            }
            Some(mut active) => {
                let (next, detail) = match active.phase {
                    Phase::Accepted => (Phase::Picking, format!("picking up panel {}", active.task.target_id)),
                    Phase::Picking => (
                        Phase::Placing,
                        format!("placing on the center of stud {}", active.task.destination_id),
                    ),
                    Phase::Placing if active.fail => (Phase::Failed, "injected fault: placement aborted".into()),
                    Phase::Placing => (
                        Phase::Done,
                        format!("panel {} placed on stud {}", active.task.target_id, active.task.destination_id),
                    ),
                    Phase::Done | Phase::Failed => unreachable!("terminal tasks are not kept active"),
                };
                let task = active.task.clone();
                if !next.is_terminal() {
                    active.phase = next;
                    self.active = Some(active);
                }
                (task, next, detail)
            }
        };
        self.sequence += 1;
        Some(RobotEvent {
            phase,
            task,
            sequence: self.sequence,
            detail,
        })
    }

    pub fn run_until_idle(&mut self) -> Vec<RobotEvent> {
        std::iter::from_fn(|| self.step()).collect()
    }

    /// Queues `task` and runs until its terminal event.
    pub fn execute(&mut self, task: TaskCommand) -> Vec<RobotEvent> {
        self.enqueue(task.clone());
        let mut events = Vec::new();
        while let Some(ev) = self.step() {
            let done = ev.task == task && ev.phase.is_terminal();
            events.push(ev);
            if done {
                break;
            }
        }
        events
    }
}

/// Handle to a simulator running on the tokio runtime.
#[derive(Debug, Clone)]
pub struct RobotHandle {
    tasks: mpsc::UnboundedSender<TaskCommand>,
    events: broadcast::Sender<RobotEvent>,
}

impl RobotHandle {
    /// Queues a task; returns false if the robot task has stopped.
    pub fn dispatch(&self, task: TaskCommand) -> bool {
        self.tasks.send(task).is_ok()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<RobotEvent> {
        self.events.subscribe()
    }
}

/// Runs a simulator in the background, pausing `phase_delay` between events.
pub fn spawn_robot(config: SimConfig) -> RobotHandle {
    let (task_tx, mut task_rx) = mpsc::unbounded_channel();
    let (event_tx, _) = broadcast::channel(256);
    let events = event_tx.clone();
    tokio::spawn(async move {
        let mut sim = RobotSim::new(config.faults);
        loop {
            if sim.is_idle() {
                match task_rx.recv().await {
                    Some(task) => sim.enqueue(task),
                    None => break,
                }
            }
            while let Ok(task) = task_rx.try_recv() {
                sim.enqueue(task);
            }
            if let Some(ev) = sim.step() {
                let _ = event_tx.send(ev);
                if !config.phase_delay.is_zero() {
                    tokio::time::sleep(config.phase_delay).await;
                } else {
                    tokio::task::yield_now().await;
                }
            }
        }
    });
    RobotHandle {
        tasks: task_tx,
        events,
    }
}
