use std::net::SocketAddr;
use std::time::Duration;

use futures::StreamExt;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

use hrc_core::dispatch::{FaultInjection, SimConfig};
use hrc_core::scene::Scene;
use hrc_service::server::{router, AppState, ServerConfig};

async fn start(config: ServerConfig) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = router(AppState::new(config));
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    addr
}

fn config(phase_ms: u64, faults: FaultInjection) -> ServerConfig {
    let mut c = ServerConfig::new(Scene::reference());
    c.robot = SimConfig {
        phase_delay: Duration::from_millis(phase_ms),
        faults,
    };
    c
}

struct Api {
    base: String,
    http: reqwest::Client,
}

impl Api {
    fn new(addr: SocketAddr) -> Self {
        Self {
            base: format!("http://{addr}"),
            http: reqwest::Client::new(),
        }
    }

    async fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let r = self.http.post(format!("{}{path}", self.base)).json(&body).send().await.unwrap();
        (r.status().as_u16(), r.json().await.unwrap_or(Value::Null))
    }

    async fn get(&self, path: &str) -> (u16, Value) {
        let r = self.http.get(format!("{}{path}", self.base)).send().await.unwrap();
        (r.status().as_u16(), r.json().await.unwrap_or(Value::Null))
    }

    async fn session(&self) -> String {
        let (status, view) = self.post("/session", json!({})).await;
        assert_eq!(status, 201);
        view["id"].as_str().unwrap().to_string()
    }
}

#[tokio::test]
async fn new_session_awaits_instruction() {
    let addr = start(config(0, FaultInjection::default())).await;
    let api = Api::new(addr);
    let id = api.session().await;
    let (status, view) = api.get(&format!("/session/{id}")).await;
    assert_eq!(status, 200);
    assert_eq!(view["state"], "AwaitingInstruction");
    assert_eq!(view["approve_enabled"], false);
    assert_eq!(view["scene"].as_array().unwrap().len(), 13);
}

#[tokio::test]
async fn full_flow_dispatches_and_streams_robot_events() {
    let addr = start(config(30, FaultInjection::default())).await;
    let api = Api::new(addr);
    let id = api.session().await;
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/session/{id}/events"))
        .await
        .unwrap();

    let (status, _) = api.post(&format!("/session/{id}/approve"), json!({})).await;
    assert_eq!(status, 409, "approve before any confirmation");

    let (status, body) = api.post(&format!("/session/{id}/select"), json!({"object_id": 504})).await;
    assert_eq!((status, body["role"].as_str()), (200, Some("target")));
    api.post(&format!("/session/{id}/select"), json!({"object_id": 606})).await;
    let (status, body) = api.post(&format!("/session/{id}/send"), json!({"utterance": "install this here"})).await;
    assert_eq!(status, 200);
    assert_eq!(body["reply"]["kind"], "confirm_request");
    assert_eq!(body["session"]["state"], "AwaitingConfirmation");

    let (_, body) = api.post(&format!("/session/{id}/send"), json!({"utterance": "yes"})).await;
    assert_eq!(body["reply"]["text"], "OKAY!!!");
    assert_eq!(body["session"]["approve_enabled"], true);

    let (status, body) = api.post(&format!("/session/{id}/send"), json!({"utterance": "Panel 501 to stud 602"})).await;
    assert_eq!(status, 409, "messages wait for approve or cancel: {body}");

    let (status, body) = api.post(&format!("/session/{id}/approve"), json!({})).await;
    assert_eq!(status, 202);
    assert_eq!(body["task"]["target_id"], 504);
    assert_eq!(body["task"]["destination_id"], 606);

    let (status, _) = api.post(&format!("/session/{id}/send"), json!({"utterance": "yes"})).await;
    assert_eq!(status, 409, "busy while dispatching");
    let (status, _) = api.post(&format!("/session/{id}/approve"), json!({})).await;
    assert_eq!(status, 409, "one approval, one dispatch");

    let mut kinds = Vec::new();
    let mut phases = Vec::new();
    let deadline = tokio::time::timeout(Duration::from_secs(5), async {
        while let Some(Ok(Message::Text(text))) = ws.next().await {
            let frame: Value = serde_json::from_str(&text).unwrap();
            kinds.push(frame["type"].as_str().unwrap().to_string());
            if frame["type"] == "robot" {
                phases.push(frame["event"]["phase"].as_str().unwrap().to_string());
            }
            if frame["type"] == "state" && phases.last().map(String::as_str) == Some("done") {
                assert_eq!(frame["state"], "AwaitingInstruction");
                break;
            }
        }
    });
    deadline.await.expect("robot finished within 5 s");
    assert_eq!(phases, ["accepted", "picking", "placing", "done"]);
    for kind in ["highlight", "reply", "state", "robot"] {
        assert!(kinds.iter().any(|k| k == kind), "no {kind} frame in {kinds:?}");
    }

    let (_, view) = api.get(&format!("/session/{id}")).await;
    let panel = view["scene"].as_array().unwrap().iter().find(|o| o["id"] == 504).unwrap();
    assert_eq!(panel["installed_on"], 606);
}

#[tokio::test]
async fn failed_task_leaves_scene_unchanged() {
    let addr = start(config(1, FaultInjection { fail_all: true, fail_next: 0 })).await;
    let api = Api::new(addr);
    let id = api.session().await;
    api.post(&format!("/session/{id}/send"), json!({"utterance": "Panel 504 to stud 606"})).await;
    api.post(&format!("/session/{id}/send"), json!({"utterance": "yes"})).await;
    let (status, _) = api.post(&format!("/session/{id}/approve"), json!({})).await;
    assert_eq!(status, 202);
    let mut view = Value::Null;
    for _ in 0..200 {
        view = api.get(&format!("/session/{id}")).await.1;
        if view["state"] == "AwaitingInstruction" {
            break;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    assert_eq!(view["state"], "AwaitingInstruction");
    assert!(view["scene"].as_array().unwrap().iter().all(|o| o.get("installed_on").is_none()));
}

#[tokio::test]
async fn cancel_and_errors() {
    let addr = start(config(0, FaultInjection::default())).await;
    let api = Api::new(addr);
    let id = api.session().await;

    assert_eq!(api.get("/session/nope").await.0, 404);
    assert_eq!(api.post(&format!("/session/{id}/select"), json!({"object_id": 777})).await.0, 422);
    assert_eq!(api.post(&format!("/session/{id}/cancel"), json!({})).await.0, 409);

    api.post(&format!("/session/{id}/send"), json!({"utterance": "Panel 501 to stud 602"})).await;
    let (status, view) = api.post(&format!("/session/{id}/cancel"), json!({})).await;
    assert_eq!((status, view["state"].as_str()), (200, Some("AwaitingInstruction")));

    let (status, body) = api.post("/session", json!({"assistant": "llm"})).await;
    assert_eq!(status, 400, "{body}");
}

#[tokio::test]
async fn session_with_inline_scene() {
    let addr = start(config(0, FaultInjection::default())).await;
    let api = Api::new(addr);
    let scene: Value = serde_json::from_str(hrc_core::scene::REFERENCE_SCENE_JSON).unwrap();
    let (status, view) = api.post("/session", json!({"scene": scene, "assistant": "rule"})).await;
    assert_eq!(status, 201);
    assert_eq!(view["scene"].as_array().unwrap().len(), 13);
    let (status, _) = api.post("/session", json!({"scene": {"objects": "nope"}})).await;
    assert_eq!(status, 400);
}

#[tokio::test]
async fn static_client_is_served() {
    let dir = std::env::temp_dir().join(format!("hrc-static-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<html>operator</html>").unwrap();
    let mut c = config(0, FaultInjection::default());
    c.static_dir = Some(dir);
    let addr = start(c).await;
    let body = reqwest::get(format!("http://{addr}/index.html")).await.unwrap().text().await.unwrap();
    assert!(body.contains("operator"));
    let health = reqwest::get(format!("http://{addr}/health")).await.unwrap().text().await.unwrap();
    assert_eq!(health, "ok");
}
