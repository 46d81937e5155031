//! Score the reference assistant on the bundled corpus of wrong instructions.

use hrc_core::assistant::ReferenceAssistant;
use hrc_core::eval::{eval_corpus, EvalCorpus};
use hrc_core::scene::Scene;
use hrc_core::REFERENCE_CORPUS_YAML;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = EvalCorpus::from_yaml(REFERENCE_CORPUS_YAML)?;
    let report = eval_corpus(&corpus, &Scene::reference(), &ReferenceAssistant)?;
    println!("{report}\n");
    for entry in report.entries.iter().filter(|e| e.expected.label() == "partial_or_duplicate").take(3) {
        let said = entry.transcript.iter().find_map(|t| t.utterance.clone()).unwrap_or_default();
        let answer = entry.transcript.iter().rev().find(|t| t.reply_kind.is_some()).map(|t| t.text.as_str());
        println!("{}: {said:?}\n    -> {}", entry.name, answer.unwrap_or("(no reply)"));
    }
    Ok(())
}
