//! Chat-completion client. All network use of the crate goes through here.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{build_prompt, Assistant, AssistantError, AssistantReply, ReplyKind, Turn, UnavailableKind, ACK_SENTINEL};
use crate::dialogue::Speaker;
use crate::parser::extract_ids;
use crate::scene::Scene;

pub const ENV_BASE_URL: &str = "HRC_LLM_BASE_URL";
pub const ENV_MODEL: &str = "HRC_LLM_MODEL";
pub const ENV_API_KEY: &str = "HRC_LLM_API_KEY";

const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
const DEFAULT_MODEL: &str = "gpt-4";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmConfig {
    pub base_url: String,
    pub model: String,
    pub api_key: String,
    pub timeout: Duration,
}

impl LlmConfig {
    /// Reads the endpoint from the environment. The API key is required.
    pub fn from_env() -> Result<Self, AssistantError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, AssistantError> {
        let api_key = get(ENV_API_KEY)
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| AssistantError::Config(format!("{ENV_API_KEY} is not set")))?;
        Ok(Self {
            base_url: get(ENV_BASE_URL).unwrap_or_else(|| DEFAULT_BASE_URL.to_string()),
            model: get(ENV_MODEL).unwrap_or_else(|| DEFAULT_MODEL.to_string()),
            api_key,
            timeout: Duration::from_secs(60),
        })
    }
}

#[derive(Debug, Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: Vec<ChatMessage<'a>>,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

/// Assistant backed by an external chat-completion endpoint.
///
/// Blocking; callers on an async runtime should run it on a blocking thread.
#[derive(Debug, Clone)]
pub struct LlmAssistant {
    config: LlmConfig,
}

impl LlmAssistant {
    pub fn new(config: LlmConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    fn unavailable(kind: UnavailableKind, reason: impl Into<String>) -> AssistantError {
        AssistantError::Unavailable {
            kind,
            reason: reason.into(),
        }
    }

    /// Sends the conversation and returns the raw completion text.
    pub fn complete(&self, system: &str, turn: &Turn) -> Result<String, AssistantError> {
        let mut messages = vec![ChatMessage {
            role: "system",
            content: system,
        }];
        for entry in &turn.history {
            let role = match entry.speaker {
                Speaker::User => "user",
                Speaker::Assistant => "assistant",
                Speaker::System | Speaker::Robot => continue,
            };
            messages.push(ChatMessage {
                role,
                content: &entry.text,
            });
        }
        messages.push(ChatMessage {
            role: "user",
            content: &turn.command.text,
        });
        let body = ChatRequest {
            model: &self.config.model,
            temperature: 0.0,
            messages,
        };

        let client = reqwest::blocking::Client::builder()
            .timeout(self.config.timeout)
            .build()
            .map_err(|e| Self::unavailable(UnavailableKind::Transport, e.to_string()))?;
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let response = client
            .post(url)
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(|e| {
                let kind = if e.is_timeout() {
                    UnavailableKind::Timeout
                } else {
                    UnavailableKind::Transport
                };
                Self::unavailable(kind, e.to_string())
            })?;

        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(Self::unavailable(UnavailableKind::Auth, format!("endpoint returned {status}")));
        }
        if !status.is_success() {
            return Err(Self::unavailable(UnavailableKind::Protocol, format!("endpoint returned {status}")));
        }
        let parsed: ChatResponse = response
            .json()
            .map_err(|e| Self::unavailable(UnavailableKind::Protocol, e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Self::unavailable(UnavailableKind::Protocol, "response has no message content"))
    }
}

impl Assistant for LlmAssistant {
    fn respond(&self, turn: &Turn) -> Result<AssistantReply, AssistantError> {
        let prompt = build_prompt(&turn.scene)?;
        let text = self.complete(&prompt.render(), turn)?;
        Ok(classify_reply(&text, &turn.scene))
    }

    fn name(&self) -> &'static str {
        "llm"
    }
}

const REJECTION_CUES: &[&str] = &[
    "cannot", "can't", "can not", "not possible", "already", "does not exist", "doesn't exist",
    "not available", "unable", "should not", "must not", "isn't available",
];

const REASK_CUES: &[&str] = &["assist you", "help you", "what would you like"];

/// Maps free-form model output onto a reply kind.
///
/// Exact sentinel is an acknowledgment; refusal wording is a rejection; a
/// question naming exactly one panel and one stud is a confirmation request;
/// an id-free offer of help is a re-ask; anything else is a clarification.
pub fn classify_reply(text: &str, scene: &Scene) -> AssistantReply {
    let trimmed = text.trim();
    let ids = extract_ids(trimmed, scene);
    let (panel, stud) = match (&ids.panels[..], &ids.studs[..]) {
        ([p], [s]) => (Some(*p), Some(*s)),
        _ => (None, None),
    };
    let lower = trimmed.to_lowercase();

    let kind = if trimmed == ACK_SENTINEL {
        ReplyKind::Acknowledge
    } else if REJECTION_CUES.iter().any(|c| lower.contains(c)) {
        ReplyKind::Rejection
    } else if trimmed.contains('?') && panel.is_some() && ids.unknown.is_empty() {
        ReplyKind::ConfirmRequest
    } else if ids.panels.is_empty() && ids.studs.is_empty() && REASK_CUES.iter().any(|c| lower.contains(c)) {
        ReplyKind::ReAsk
    } else {
        ReplyKind::Clarification
    };

    AssistantReply {
        text: trimmed.to_string(),
        kind,
        cited_panel: panel,
        cited_stud: stud,
        category: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::ObjectId;

    #[test]
    fn sentinel_is_acknowledge() {
        let r = classify_reply("OKAY!!!", &Scene::reference());
        assert_eq!(r.kind, ReplyKind::Acknowledge);
        assert_eq!(classify_reply("OKAY!!! Installing now.", &Scene::reference()).kind, ReplyKind::Clarification);
    }

    #[test]
    fn confirmation_question() {
        let r = classify_reply(
            "You want me to pick up panel 501 and place it on stud 602, correct?",
            &Scene::reference(),
        );
        assert_eq!(r.kind, ReplyKind::ConfirmRequest);
        assert_eq!((r.cited_panel, r.cited_stud), (Some(ObjectId(501)), Some(ObjectId(602))));
    }

    #[test]
    fn refusal_and_offer() {
        let scene = Scene::reference();
        let r = classify_reply(
            "Panel 501 cannot be placed on stud 608 because panel 503 is already installed there.",
            &scene,
        );
        assert_eq!(r.kind, ReplyKind::Rejection);
        assert_eq!(classify_reply("How can I assist you further?", &scene).kind, ReplyKind::ReAsk);
        assert_eq!(
            classify_reply("Which panel do you mean, 501 or 502?", &scene).kind,
            ReplyKind::Clarification
        );
    }

    #[test]
    fn config_requires_key() {
        assert!(matches!(LlmConfig::from_lookup(|_| None), Err(AssistantError::Config(_))));
        let cfg = LlmConfig::from_lookup(|k| (k == ENV_API_KEY).then(|| "sk-test".to_string())).unwrap();
        assert_eq!(cfg.model, "gpt-4");
    }
}
