//! `hrc` subcommands.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};
use thiserror::Error;

use hrc_core::assistant::{Assistant, AssistantError, LlmAssistant, LlmConfig, ReferenceAssistant};
use hrc_core::dialogue::DialogueSession;
use hrc_core::dispatch::transport::serve_robot;
use hrc_core::dispatch::{FaultInjection, SimConfig};
use hrc_core::eval::{eval_corpus, word_count_metrics, EvalCorpus, EvalError};
use hrc_core::scene::{load_scene, Scene, SceneError};
use hrc_core::script::{ReplayFile, ScriptRunner, Step, StepOutcome};
use hrc_core::validator::{enumerate_verdicts, write_verdict_csv};

use crate::server::{serve, ServerConfig};
use crate::AssistantMode;

#[derive(Debug, Parser)]
#[command(name = "hrc", version, about = "Dialogue-gated pick-and-place orchestration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP/WebSocket session server with a simulated robot.
    Serve {
        /// Scene JSON; the bundled reference scene when omitted.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "rule")]
        assistant: AssistantMode,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Directory with a browser client to serve at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Simulated time per robot phase.
        #[arg(long, default_value_t = 250)]
        phase_delay_ms: u64,
    },
    /// Replay a scripted session (YAML) and print the transcript.
    Replay {
        file: PathBuf,
        /// Overrides the assistant named in the file.
        #[arg(long, value_enum)]
        assistant: Option<AssistantMode>,
        /// Print the final session as JSON instead of a transcript.
        #[arg(long)]
        json: bool,
    },
    /// Score an assistant on a corpus of wrong instructions.
    Eval {
        /// Corpus YAML; the bundled reference corpus when omitted.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "rule")]
        assistant: AssistantMode,
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Print the verdict for every panel and stud as CSV.
    Enumerate {
        #[arg(long)]
        scene: Option<PathBuf>,
    },
    /// Run the simulated robot on a TCP socket (newline-delimited JSON).
    Robot {
        #[arg(long, default_value = "127.0.0.1:9090")]
        listen: SocketAddr,
        /// Fail every task after the placing phase.
        #[arg(long)]
        fail_all: bool,
        #[arg(long, default_value_t = 250)]
        phase_delay_ms: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Assistant(#[from] AssistantError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for usage mistakes, 2 for everything that fails at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn scene_from(path: Option<&Path>) -> Result<Scene, CliError> {
    match path {
        Some(p) => Ok(load_scene(&read(p)?)?),
        None => Ok(Scene::reference()),
    }
}

/// Builds the assistant, failing up front if the LLM is not configured.
pub fn make_assistant(mode: AssistantMode) -> Result<Box<dyn Assistant>, CliError> {
    Ok(match mode {
        AssistantMode::Rule => Box::new(ReferenceAssistant),
        AssistantMode::Llm => Box::new(LlmAssistant::new(LlmConfig::from_env()?)),
    })
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Serve {
            scene,
            assistant,
            listen,
            static_dir,
            phase_delay_ms,
        } => {
            let llm = match assistant {
                AssistantMode::Llm => Some(LlmConfig::from_env()?),
                AssistantMode::Rule => None,
            };
            let config = ServerConfig {
                scene: scene_from(scene.as_deref())?,
                default_assistant: assistant,
                llm,
                robot: SimConfig {
                    phase_delay: Duration::from_millis(phase_delay_ms),
                    faults: FaultInjection::default(),
                },
                static_dir,
            };
            tokio::runtime::Runtime::new()?.block_on(serve(config, listen))?;
            Ok(())
        }
        Command::Replay { file, assistant, json } => replay(&file, assistant, json, out),
        Command::Eval {
            corpus,
            assistant,
            scene,
            json,
        } => {
            let assistant = make_assistant(assistant)?;
            let corpus = match corpus {
                Some(p) => EvalCorpus::from_yaml(&read(&p)?)?,
                None => EvalCorpus::from_yaml(hrc_core::REFERENCE_CORPUS_YAML)?,
            };
            let report = eval_corpus(&corpus, &scene_from(scene.as_deref())?, assistant.as_ref())?;
            if json {
                serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| CliError::Runtime(e.to_string()))?;
                writeln!(out)?;
            } else {
                writeln!(out, "{report}")?;
            }
            Ok(())
        }
        Command::Enumerate { scene } => {
            let rows = enumerate_verdicts(&scene_from(scene.as_deref())?);
            write_verdict_csv(&rows, out).map_err(|e| CliError::Runtime(e.to_string()))
        }
        Command::Robot {
            listen,
            fail_all,
            phase_delay_ms,
        } => {
            let config = SimConfig {
                phase_delay: Duration::from_millis(phase_delay_ms),
                faults: FaultInjection {
                    fail_all,
                    fail_next: 0,
                },
            };
            tokio::runtime::Runtime::new()?.block_on(async {
                let listener = tokio::net::TcpListener::bind(listen).await?;
                tracing::info!(addr = %listener.local_addr()?, "robot listening");
                serve_robot(listener, config).await
            })?;
            Ok(())
        }
    }
}

fn replay(file: &Path, mode: Option<AssistantMode>, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let replay = ReplayFile::from_yaml(&read(file)?).map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
    let mode = match (mode, replay.assistant.as_deref()) {
        (Some(m), _) => m,
        (None, None | Some("rule")) => AssistantMode::Rule,
        (None, Some("llm")) => AssistantMode::Llm,
        (None, Some(other)) => return Err(CliError::Usage(format!("unknown assistant {other:?} in replay file"))),
    };
    let assistant = make_assistant(mode)?;
    let scene = match &replay.scene {
        Some(p) => {
            let path = file.parent().unwrap_or(Path::new(".")).join(p);
            load_scene(&read(&path)?)?
        }
        None => Scene::reference(),
    };
    let mut runner = ScriptRunner::new(DialogueSession::new(scene), assistant.as_ref());
    for step in &replay.steps {
        let outcome = runner
            .run_step(step)
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .clone();
        if !json {
            print_step(out, step, &outcome)?;
        }
    }
    let session = runner.into_session();
    if json {
        serde_json::to_writer_pretty(&mut *out, &session.view()).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(out)?;
        return Ok(());
    }
    writeln!(out)?;
    let installs = session.scene().installations();
    if installs.is_empty() {
        writeln!(out, "installed: none")?;
    } else {
        let list: Vec<String> = installs.iter().map(|(p, s)| format!("{p} on {s}")).collect();
        writeln!(out, "installed: {}", list.join(", "))?;
    }
    let metrics = word_count_metrics(session.transcript());
    if let Some(mean) = metrics.mean {
        writeln!(out, "words per command: {:?} (mean {mean:.1})", metrics.per_command)?;
    }
    Ok(())
}

fn print_step(out: &mut dyn Write, step: &Step, outcome: &StepOutcome) -> std::io::Result<()> {
    match step {
        Step::Say(text) => writeln!(out, "user: {text}")?,
        Step::Select(id) => writeln!(out, "user selects {id}")?,
        Step::Approve => writeln!(out, "user approves")?,
        Step::InjectFault => writeln!(out, "(fault armed for next task)")?,
        Step::Cancel => writeln!(out, "user cancels")?,
    }
    match outcome {
        StepOutcome::Reply(r) => writeln!(out, "  assistant [{:?}]: {}", r.kind, r.text),
        StepOutcome::Highlight(h) => writeln!(out, "  highlight {} as {:?}", h.object_id, h.role),
        StepOutcome::Dispatched { events, .. } => {
            for ev in events {
                writeln!(out, "  robot {:?}: {}", ev.phase, ev.detail)?;
            }
            Ok(())
        }
        StepOutcome::FaultArmed | StepOutcome::Cancelled => Ok(()),
        StepOutcome::Rejected { error } => writeln!(out, "  refused: {error}"),
    }
}
