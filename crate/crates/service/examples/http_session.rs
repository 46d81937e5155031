//! Starts the server in-process and drives one session over HTTP while
//! printing the WebSocket frames it pushes.
//!
//!     cargo run -p hrc-service --example http_session

use std::future::IntoFuture;
use std::time::Duration;

use futures::StreamExt;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

use hrc_core::dispatch::SimConfig;
use hrc_core::scene::Scene;
use hrc_service::server::{router, AppState, ServerConfig};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ServerConfig::new(Scene::reference());
    config.robot = SimConfig {
        phase_delay: Duration::from_millis(100),
        ..SimConfig::default()
    };
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    tokio::spawn(axum::serve(listener, router(AppState::new(config))).into_future());
    println!("server on http://{addr}");

    let http = reqwest::Client::new();
    let base = format!("http://{addr}");
    let view: Value = http.post(format!("{base}/session")).json(&json!({})).send().await?.json().await?;
    let id = view["id"].as_str().unwrap().to_string();

    let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/session/{id}/events")).await?;
    let printer = tokio::spawn(async move {
        let mut ws = ws;
        while let Some(Ok(Message::Text(text))) = ws.next().await {
            println!("  ws  {text}");
            if text.contains("\"phase\":\"done\"") || text.contains("\"phase\":\"failed\"") {
                break;
            }
        }
    });

    for object_id in [504, 606] {
        http.post(format!("{base}/session/{id}/select")).json(&json!({"object_id": object_id})).send().await?;
    }
    for utterance in ["install this here", "yes"] {
        let body: Value = http
            .post(format!("{base}/session/{id}/send"))
            .json(&json!({"utterance": utterance}))
            .send()
            .await?
            .json()
            .await?;
        println!("user: {utterance}\nassistant: {}", body["reply"]["text"]);
    }
    let approved = http.post(format!("{base}/session/{id}/approve")).send().await?;
    println!("approve -> {}", approved.status());

    tokio::time::timeout(Duration::from_secs(5), printer).await??;
    let view: Value = http.get(format!("{base}/session/{id}")).send().await?.json().await?;
    println!("final state: {}", view["state"]);
    Ok(())
}
