//! One exchange with an LLM-backed assistant.
//!
//! Needs `HRC_LLM_API_KEY`; `HRC_LLM_BASE_URL` and `HRC_LLM_MODEL` are optional.
//!
//!     HRC_LLM_API_KEY=... cargo run -p hrc-core --example llm_session -- "Panel 504 to stud 606"

use hrc_core::assistant::{LlmAssistant, LlmConfig};
use hrc_core::dialogue::DialogueSession;
use hrc_core::scene::Scene;

fn main() {
    let config = match LlmConfig::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}; set it to talk to a chat-completion endpoint");
            return;
        }
    };
    println!("model {} at {}", config.model, config.base_url);
    let llm = LlmAssistant::new(config);
    let mut session = DialogueSession::new(Scene::reference());
    let message = std::env::args().nth(1).unwrap_or_else(|| "Panel 504 to stud 606".into());
    for text in [message.as_str(), "yes"] {
        match session.submit(text, &llm) {
            Ok(reply) => println!("user: {text}\nassistant [{:?}]: {}", reply.kind, reply.text),
            Err(e) => {
                eprintln!("turn failed: {e}");
                return;
            }
        }
    }
    println!("state: {}", session.state());
}
