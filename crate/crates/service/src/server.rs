//! HTTP + WebSocket front end over [`DialogueSession`]s sharing one robot.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;
use tower_http::services::ServeDir;

use hrc_core::assistant::{Assistant, AssistantError, AssistantReply, LlmAssistant, LlmConfig, ReferenceAssistant};
use hrc_core::dialogue::{DialogueError, DialogueSession, DialogueState, SessionView, TaskOutcome};
use hrc_core::dispatch::{spawn_robot, Phase, RobotEvent, RobotHandle, SimConfig, TaskCommand};
use hrc_core::fusion::Highlight;
use hrc_core::scene::{load_scene, ObjectId, Scene};

use crate::AssistantMode;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub scene: Scene,
    pub default_assistant: AssistantMode,
    /// Required for sessions that ask for the LLM assistant.
    pub llm: Option<LlmConfig>,
    pub robot: SimConfig,
    /// Directory served at `/` for a browser client.
    pub static_dir: Option<PathBuf>,
}

impl ServerConfig {
    pub fn new(scene: Scene) -> Self {
        Self {
            scene,
            default_assistant: AssistantMode::Rule,
            llm: None,
            robot: SimConfig::default(),
            static_dir: None,
        }
    }
}

/// Frames pushed to `/session/{id}/events` subscribers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Frame {
    Reply { reply: AssistantReply },
    Highlight { highlight: Highlight },
    Robot { event: RobotEvent },
    State { state: DialogueState, approve_enabled: bool },
}

struct SessionSlot {
    session: Mutex<DialogueSession>,
    assistant: Arc<dyn Assistant>,
    frames: broadcast::Sender<Frame>,
}

impl SessionSlot {
    fn publish_state(&self) {
        let state = self.session.lock().unwrap().state();
        let _ = self.frames.send(Frame::State {
            state,
            approve_enabled: state == DialogueState::ReadyForApproval,
        });
    }
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    config: ServerConfig,
    sessions: Mutex<HashMap<String, Arc<SessionSlot>>>,
    robot: RobotHandle,
}

impl AppState {
    /// Starts the shared robot. Must be called inside a tokio runtime.
    pub fn new(config: ServerConfig) -> Self {
        let robot = spawn_robot(config.robot.clone());
        let state = Self {
            inner: Arc::new(Inner {
                config,
                sessions: Mutex::new(HashMap::new()),
                robot,
            }),
        };
        tokio::spawn(route_robot_events(state.clone()));
        state
    }

    fn slot(&self, id: &str) -> Result<Arc<SessionSlot>, ApiError> {
        self.inner
            .sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))
    }
}

/// Feeds robot events back to the session that dispatched the task.
async fn route_robot_events(state: AppState) {
    let mut events = state.inner.robot.subscribe();
    loop {
        let event = match events.recv().await {
            Ok(ev) => ev,
            Err(broadcast::error::RecvError::Lagged(n)) => {
                tracing::warn!(skipped = n, "robot event stream lagged");
                continue;
            }
            Err(broadcast::error::RecvError::Closed) => break,
        };
        let Ok(slot) = state.slot(&event.task.session) else {
            tracing::warn!(session = %event.task.session, "robot event for unknown session");
            continue;
        };
        let _ = slot.frames.send(Frame::Robot { event: event.clone() });
        if event.phase.is_terminal() {
            let outcome = match event.phase {
                Phase::Done => TaskOutcome::Success,
                _ => TaskOutcome::Failed {
                    reason: event.detail.clone(),
                },
            };
            if let Err(e) = slot.session.lock().unwrap().complete(outcome) {
                tracing::error!(error = %e, "robot completion rejected by session");
            }
            slot.publish_state();
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
    #[error("robot is not running")]
    RobotDown,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Dialogue(e) => match e {
                DialogueError::Busy(_)
                | DialogueError::AwaitingApproval
                | DialogueError::NothingApproved(_)
                | DialogueError::ExtractionMismatch { .. }
                | DialogueError::NotDispatching(_)
                | DialogueError::NoTurnInFlight
                | DialogueError::NothingToCancel(_) => StatusCode::CONFLICT,
                DialogueError::Selection(_) => StatusCode::UNPROCESSABLE_ENTITY,
                DialogueError::Assistant(_) => StatusCode::SERVICE_UNAVAILABLE,
            },
            ApiError::RobotDown => StatusCode::SERVICE_UNAVAILABLE,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct CreateSession {
    pub assistant: Option<AssistantMode>,
    /// Inline scene document; the server's scene when absent.
    pub scene: Option<serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SendBody {
    pub utterance: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectBody {
    pub object_id: u32,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReplyResponse {
    pub reply: AssistantReply,
    pub session: SessionView,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ApproveResponse {
    pub task: TaskCommand,
    pub session: SessionView,
}

async fn create_session(
    State(state): State<AppState>,
    body: Option<Json<CreateSession>>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let body = body.map(|Json(b)| b).unwrap_or_default();
    let config = &state.inner.config;
    let scene = match body.scene {
        Some(doc) => load_scene(&doc.to_string()).map_err(|e| ApiError::BadRequest(e.to_string()))?,
        None => config.scene.clone(),
    };
    let assistant: Arc<dyn Assistant> = match body.assistant.unwrap_or(config.default_assistant) {
        AssistantMode::Rule => Arc::new(ReferenceAssistant),
        AssistantMode::Llm => match &config.llm {
            Some(llm) => Arc::new(LlmAssistant::new(llm.clone())),
            None => {
                return Err(ApiError::BadRequest(
                    AssistantError::Config("this server has no LLM endpoint configured".into()).to_string(),
                ))
            }
        },
    };
    let session = DialogueSession::new(scene);
    let view = session.view();
    let (frames, _) = broadcast::channel(64);
    state.inner.sessions.lock().unwrap().insert(
        view.id.clone(),
        Arc::new(SessionSlot {
            session: Mutex::new(session),
            assistant,
            frames,
        }),
    );
    tracing::info!(session = %view.id, "session created");
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let slot = state.slot(&id)?;
    let view = slot.session.lock().unwrap().view();
    Ok(Json(view))
}

async fn select(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<SelectBody>,
) -> Result<Json<Highlight>, ApiError> {
    let slot = state.slot(&id)?;
    let highlight = slot.session.lock().unwrap().select(ObjectId(body.object_id))?;
    let _ = slot.frames.send(Frame::Highlight {
        highlight: highlight.clone(),
    });
    Ok(Json(highlight))
}

async fn send(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<SendBody>,
) -> Result<Json<ReplyResponse>, ApiError> {
    let slot = state.slot(&id)?;
    let turn = slot.session.lock().unwrap().begin_turn(&body.utterance)?;
    slot.publish_state();

    let assistant = slot.assistant.clone();
    let (turn, reply) = tokio::task::spawn_blocking(move || {
        let reply = assistant.respond(&turn);
        (turn, reply)
    })
    .await
    .map_err(|e| ApiError::BadRequest(format!("assistant task failed: {e}")))?;

    let result = slot.session.lock().unwrap().finish_turn(&turn, reply);
    if let Ok(reply) = &result {
        let _ = slot.frames.send(Frame::Reply { reply: reply.clone() });
    }
    slot.publish_state();
    let reply = result?;
    let view = slot.session.lock().unwrap().view();
    Ok(Json(ReplyResponse { reply, session: view }))
}

async fn approve(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<(StatusCode, Json<ApproveResponse>), ApiError> {
    let slot = state.slot(&id)?;
    let (task, view) = {
        let mut session = slot.session.lock().unwrap();
        let task = session.approve()?;
        (task, session.view())
    };
    slot.publish_state();
    if !state.inner.robot.dispatch(task.clone()) {
        return Err(ApiError::RobotDown);
    }
    tracing::info!(session = %id, panel = %task.target_id, stud = %task.destination_id, "task dispatched");
    Ok((StatusCode::ACCEPTED, Json(ApproveResponse { task, session: view })))
}

async fn cancel(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let slot = state.slot(&id)?;
    let view = {
        let mut session = slot.session.lock().unwrap();
        session.cancel()?;
        session.view()
    };
    slot.publish_state();
    Ok(Json(view))
}

async fn events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let slot = state.slot(&id)?;
    let frames = slot.frames.subscribe();
    Ok(ws.on_upgrade(move |socket| stream_frames(socket, frames)))
}

async fn stream_frames(mut socket: WebSocket, mut frames: broadcast::Receiver<Frame>) {
    loop {
        tokio::select! {
            frame = frames.recv() => match frame {
                Ok(frame) => {
                    let text = serde_json::to_string(&frame).expect("frames serialize");
                    if socket.send(Message::Text(text)).await.is_err() {
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => break,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
}

async fn health() -> &'static str {
    "ok"
}

pub fn router(state: AppState) -> Router {
    let static_dir = state.inner.config.static_dir.clone();
    let api = Router::new()
        .route("/health", get(health))
        .route("/session", post(create_session))
        .route("/session/:id", get(get_session))
        .route("/session/:id/send", post(send))
        .route("/session/:id/select", post(select))
        .route("/session/:id/approve", post(approve))
        .route("/session/:id/cancel", post(cancel))
        .route("/session/:id/events", get(events))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds and serves until the process is interrupted.
pub async fn serve(config: ServerConfig, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let app = router(AppState::new(config));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
