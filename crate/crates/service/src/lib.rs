//! Session service and command-line front end for `hrc-core`.

pub mod cli;
pub mod server;

use serde::{Deserialize, Serialize};

/// Which assistant answers the user's messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AssistantMode {
    /// Deterministic reference assistant.
    Rule,
    /// External chat-completion endpoint.
    Llm,
}
