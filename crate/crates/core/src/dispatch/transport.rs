//! Newline-delimited JSON over TCP, speaking the same frames as [`super::encode`].
//!
//! A client writes task frames; the robot answers with one event frame per
//! phase for each task that connection submitted. Bad frames get a status
//! frame back and the connection stays open.

use std::collections::HashSet;
use std::io;

use serde_json::json;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream, ToSocketAddrs};
use tokio::sync::mpsc;

use super::{decode, decode_event, encode, encode_event, spawn_robot, RobotEvent, RobotHandle, SimConfig, TaskCommand, WireError};

fn status_frame(level: &str, msg: &str) -> String {
    json!({"op": "status", "level": level, "msg": msg}).to_string()
}

/// Accepts connections forever, all sharing one simulated arm.
pub async fn serve_robot(listener: TcpListener, config: SimConfig) -> io::Result<()> {
    let robot = spawn_robot(config);
    loop {
        let (stream, _) = listener.accept().await?;
        let robot = robot.clone();
        tokio::spawn(async move {
            if let Err(e) = handle_connection(stream, robot).await {
                eprintln!("robot connection closed: {e}");
            }
        });
    }
}

async fn handle_connection(stream: TcpStream, robot: RobotHandle) -> io::Result<()> {
    let (read, mut write) = stream.into_split();
    let mut lines = BufReader::new(read).lines();
    let mut events = robot.subscribe();
    let mut mine: HashSet<TaskCommand> = HashSet::new();
    let (out_tx, mut out_rx) = mpsc::unbounded_channel::<String>();

    let writer = tokio::spawn(async move {
        while let Some(line) = out_rx.recv().await {
            write.write_all(line.as_bytes()).await?;
            write.write_all(b"\n").await?;
        }
        io::Result::Ok(())
    });

    loop {
        tokio::select! {
            line = lines.next_line() => {
                let Some(line) = line? else { break };
                if line.trim().is_empty() {
                    continue;
                }
                match decode(&line) {
                    Ok(task) => {
                        mine.insert(task.clone());
                        robot.dispatch(task);
                    }
                    Err(e) => {
                        let _ = out_tx.send(status_frame("error", &e.to_string()));
                    }
                }
            }
            ev = events.recv() => {
                match ev {
                    Ok(ev) if mine.contains(&ev.task) => {
                        if ev.phase.is_terminal() {
                            mine.remove(&ev.task);
                        }
                        let _ = out_tx.send(encode_event(&ev));
                    }
                    Ok(_) => {}
                    Err(tokio::sync::broadcast::error::RecvError::Lagged(_)) => {}
                    Err(_) => break,
                }
            }
        }
    }
    drop(out_tx);
    writer.await.map_err(io::Error::other)?
}

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("robot reported: {0}")]
    Status(String),
    #[error("connection closed")]
    Closed,
}

/// Client side of the robot transport.
pub struct RobotClient {
    lines: tokio::io::Lines<BufReader<tokio::net::tcp::OwnedReadHalf>>,
    write: tokio::net::tcp::OwnedWriteHalf,
}

impl RobotClient {
    pub async fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        let stream = TcpStream::connect(addr).await?;
        let (read, write) = stream.into_split();
        Ok(Self {
            lines: BufReader::new(read).lines(),
            write,
        })
    }

    pub async fn send(&mut self, task: &TaskCommand) -> io::Result<()> {
        self.send_raw(&encode(task)).await
    }

    pub async fn send_raw(&mut self, frame: &str) -> io::Result<()> {
        self.write.write_all(frame.as_bytes()).await?;
        self.write.write_all(b"\n").await
    }

    pub async fn next_event(&mut self) -> Result<RobotEvent, ClientError> {
        let line = self.lines.next_line().await?.ok_or(ClientError::Closed)?;
        match decode_event(&line) {
            Ok(ev) => Ok(ev),
            Err(WireError::WrongOp(op)) if op == "status" => {
                let v: serde_json::Value = serde_json::from_str(&line).map_err(|e| WireError::Malformed(e.to_string()))?;
                Err(ClientError::Status(v["msg"].as_str().unwrap_or_default().to_string()))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Sends a task and collects events through its terminal phase.
    pub async fn run(&mut self, task: &TaskCommand) -> Result<Vec<RobotEvent>, ClientError> {
        self.send(task).await?;
        let mut out = Vec::new();
        loop {
            let ev = self.next_event().await?;
            let done = ev.task == *task && ev.phase.is_terminal();
            out.push(ev);
            if done {
                return Ok(out);
            }
        }
    }
}
