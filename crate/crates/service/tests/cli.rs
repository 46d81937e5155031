use std::path::PathBuf;
use std::process::Command;

fn hrc() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hrc"));
    cmd.env_remove("HRC_LLM_API_KEY").env("RUST_LOG", "off");
    cmd
}

fn repo(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(path)
}

#[test]
fn enumerate_writes_csv() {
    let out = hrc().args(["enumerate", "--scene"]).arg(repo("scenes/drywall_reference.json")).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("panel,stud,verdict"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 36);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",ok")).count(), 10);
}

#[test]
fn eval_reference_corpus() {
    let out = hrc().args(["eval", "--assistant", "rule", "--json"]).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["assistant"], "rule");
    assert_eq!(report["entries"].as_array().unwrap().len(), 65);
}

#[test]
fn replay_installs_everything() {
    for file in ["replays/speech.yaml", "replays/multimodal.yaml"] {
        let out = hrc().arg("replay").arg(repo(file)).output().unwrap();
        assert!(out.status.success(), "{file}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("installed: 501 on 602, 502 on 604, 503 on 608, 504 on 606"), "{text}");
    }
}

#[test]
fn llm_without_credentials_is_a_startup_error() {
    for args in [vec!["eval", "--assistant", "llm"], vec!["serve", "--assistant", "llm", "--listen", "127.0.0.1:0"]] {
        let out = hrc().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("HRC_LLM_API_KEY"));
    }
}

#[test]
fn exit_codes() {
    assert_eq!(hrc().output().unwrap().status.code(), Some(1));
    assert_eq!(hrc().args(["eval", "--assistant", "maybe"]).output().unwrap().status.code(), Some(1));
    assert_eq!(hrc().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(hrc().args(["replay", "/no/such/file.yaml"]).output().unwrap().status.code(), Some(2));
}
