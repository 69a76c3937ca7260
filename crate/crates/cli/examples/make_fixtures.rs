//! Rebuilds the recorded chat cache and the derived files under `fixtures/`
//! from a deterministic stand-in for the subject models and the judge.
//!
//! cargo run -p valuescope --example make_fixtures

use std::path::{Path, PathBuf};

use serde_json::json;
use valuescope::config::Config;
use valuescope_core::io::read_jsonl;
use valuescope_core::synth::{fnv1a64, stream};
use valuescope_core::{DilemmaRecord, ValueSystem};
use valuescope_gateway::{ChatBackend, ChatRequest, ChatResponse, GatewayError};

pub const JUDGE: &str = "judge-model";
pub const MODELS: [(&str, &str); 3] = [("model-a", "alpha"), ("model-a-mini", "alpha"), ("model-b", "beta")];

const OPENERS: [&str; 6] = [
    "At its core this is about",
    "What tips the balance here is",
    "Before anything else, think about",
    "Much of the answer rests on",
    "A decent outcome depends on",
    "Nobody should overlook",
];

const DETAILS: [&str; 8] = [
    "because people rely on it when things go wrong.",
    "since a single careless step can undo years of goodwill.",
    "and the people involved deserve to be heard before anyone acts.",
    "which is easy to lose and hard to rebuild.",
    "even when the rules are silent on the matter.",
    "as the long-term costs usually outweigh the short-term convenience.",
    "so any decision should be explained openly to those it affects.",
    "given how often small choices set the pattern for bigger ones.",
];

/// Values each question tends to raise.
fn question_pool(question: &str) -> Vec<&'static str> {
    if question.contains("drones") {
        vec!["Privacy", "Safety", "Respect for Property", "Autonomy", "Public Safety", "Security", "Consideration", "Transparency"]
    } else if question.contains("parent") {
        vec!["Love", "Care", "Responsibility", "Independence", "Well-being", "Sacrifice", "Compassion", "Respect"]
    } else {
        vec!["Truthfulness", "Public Safety", "Loyalty", "Courage", "Integrity", "Accountability", "Transparency", "Professionalism"]
    }
}

struct Fake {
    system: ValueSystem,
    dilemmas: Vec<DilemmaRecord>,
}

impl Fake {
    fn weight(&self, model: &str, value: &str) -> f64 {
        let family = MODELS.iter().find(|m| m.0 == model).map_or(model, |m| m.1);
        let base = stream(fnv1a64(value.as_bytes()), family).next_gaussian();
        let own = stream(fnv1a64(value.as_bytes()), model).next_gaussian();
        base + 0.4 * own
    }

    fn long_form(&self, req: &ChatRequest, prompt: &str) -> String {
        let k: usize = prompt
            .split("only generate ")
            .nth(1)
            .and_then(|s| s.split(' ').next())
            .and_then(|s| s.parse().ok())
            .unwrap_or(5);
        let question = prompt.rsplit("in total: ").next().unwrap_or_default();
        let mut rng = stream(req.sample_idx as u64, &format!("{}/{question}", req.model_id));
        let mut ranked: Vec<(f64, &str)> = question_pool(question)
            .into_iter()
            .map(|v| (self.weight(&req.model_id, v) + 0.5 * rng.next_gaussian(), v))
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
        (0..k)
            .map(|i| {
                let v = ranked[i % ranked.len()].1;
                let name = if v == "Truthfulness" { "truthfullness" } else { v };
                let mut line = format!(
                    "{}. {} {} {}",
                    i + 1,
                    OPENERS[rng.below(OPENERS.len() as u64) as usize],
                    name,
                    DETAILS[rng.below(DETAILS.len() as u64) as usize]
                );
                if rng.below(4) == 0 {
                    let extra = ranked[(i + 1) % ranked.len()].1;
                    line.push_str(&format!(" The same goes for {extra}."));
                }
                line
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn short_form(&self, req: &ChatRequest, prompt: &str) -> String {
        let Some(d) = self.dilemmas.iter().find(|d| prompt.contains(&format!("Dilemma: {}", d.scenario))) else {
            return "I cannot choose.".into();
        };
        let sum = |vs: &[String]| vs.iter().map(|v| self.weight(&req.model_id, v)).sum::<f64>() / vs.len() as f64;
        let explicit = prompt.contains("Values supporting");
        let mut rng = stream(fnv1a64(req.model_id.as_bytes()), &format!("{}/{explicit}", d.id));
        let margin = sum(&d.action1.values) - sum(&d.action2.values) + 0.6 * rng.next_gaussian();
        if margin >= 0.0 { "Action 1" } else { "Action 2" }.into()
    }

    /// Member names in `text`, longest first, each match consuming its span.
    fn mentioned(&self, text: &str) -> Vec<String> {
        let mut names: Vec<&str> = self.system.iter().collect();
        names.sort_by_key(|n| std::cmp::Reverse(n.len()));
        let mut rest = text.to_string();
        let mut found: Vec<(usize, String)> = Vec::new();
        for n in names {
            let mut from = 0;
            while let Some(pos) = rest[from..].find(n).map(|p| p + from) {
                let end = pos + n.len();
                let before = rest[..pos].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
                let after = rest[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
                if before && after {
                    found.push((pos, n.to_string()));
                    rest.replace_range(pos..end, &"#".repeat(n.len()));
                    break;
                }
                from = end;
            }
        }
        found.sort();
        found.into_iter().map(|(_, n)| n).collect()
    }

    fn judge(&self, prompt: &str, retry: bool) -> String {
        if let Some(rest) = prompt.strip_prefix("Extract all the arguments") {
            let text = rest.rsplit("\n\nInput: ").next().unwrap_or_default().trim_end_matches("\nOutput:");
            if !retry && fnv1a64(text.as_bytes()).is_multiple_of(7) {
                return "The response lists several arguments about the question.".into();
            }
            let args: Vec<_> = text
                .lines()
                .map(|l| l.split_once(". ").map_or(l, |(_, t)| t))
                .map(|t| json!({ "argument": t }))
                .collect();
            return serde_json::to_string(&args).expect("json");
        }
        let argument = prompt.rsplit("Argument: ").next().unwrap_or_default();
        if prompt.contains("Choose five values") {
            let mut names = self.mentioned(argument);
            if argument.contains("truthfullness") {
                names.push("truthfullness".into());
            }
            return format!("List supporting values: {}", names.join(", "));
        }
        if let Some(v) = prompt.rsplit("Input Value: ").next().filter(|_| prompt.contains("closest matching")) {
            return if v.eq_ignore_ascii_case("truthfullness") { "Truthfulness".into() } else { v.into() };
        }
        if prompt.contains("longest path in the tree") {
            let words = argument.split_whitespace().count();
            return format!("Specificity: {}", (1 + words / 6).min(5));
        }
        if prompt.contains("assign a specificity score") {
            let h = fnv1a64(argument.as_bytes());
            if !retry && h.is_multiple_of(11) {
                return "The argument is fairly specific.".into();
            }
            return json!({"score": 1 + h % 5, "explanation": "Judged on clarity, detail and context."}).to_string();
        }
        "Unrecognised prompt.".into()
    }
}

impl ChatBackend for Fake {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let users: Vec<&str> = req.messages.iter().filter(|m| m.role == "user").map(|m| m.content.as_str()).collect();
        let retry = users.len() > 1;
        let prompt = users[0];
        let text = if req.model_id == JUDGE {
            self.judge(prompt, retry)
        } else if prompt.starts_with("Generate comprehensive") {
            self.long_form(req, prompt)
        } else {
            self.short_form(req, prompt)
        };
        Ok(ChatResponse::text(text))
    }
}

fn run(args: &[&str], factory: &valuescope::BackendFactory) {
    let mut full = vec!["valuescope"];
    full.extend_from_slice(args);
    let code = valuescope::main_with(full, Some(factory));
    assert_eq!(code, std::process::ExitCode::SUCCESS, "{args:?}");
}

fn main() -> anyhow::Result<()> {
    std::env::set_var("SOURCE_DATE_EPOCH", "0");
    let root: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").canonicalize()?;
    std::env::set_current_dir(&root)?;
    let system = ValueSystem::parse(&std::fs::read_to_string("values.txt")?)?;
    let dilemmas: Vec<DilemmaRecord> = read_jsonl(Path::new("dilemmas.jsonl"))?.records;
    let factory = move |_: &Config| -> anyhow::Result<Box<dyn ChatBackend>> {
        Ok(Box::new(Fake {
            system: system.clone(),
            dilemmas: dilemmas.clone(),
        }))
    };
    let _ = std::fs::remove_dir_all("cache");
    let scratch = tempfile::tempdir()?;
    let tmp = |name: &str| scratch.path().join(name).display().to_string();
    let common = ["--mode", "record", "--cache-dir", "cache", "--concurrency", "1", "--endpoint", "https://llm.invalid/v1"];

    let mut responses = String::new();
    for (model, _) in MODELS {
        let out = tmp(&format!("{model}.jsonl"));
        let mf = tmp(&format!("{model}.gen.json"));
        let mut a = vec!["generate", "--subject-model", model, "--questions", "questions.jsonl", "--k", "5"];
        a.extend(["--samples", "3", "--temperature", "0.9", "--out", &out, "--manifest", &mf]);
        a.extend(common);
        run(&a, &factory);
        responses.push_str(&std::fs::read_to_string(&out)?);
        for cond in ["implicit", "explicit"] {
            let out = format!("decisions/{model}.{cond}.jsonl");
            let mf = tmp(&format!("{model}.{cond}.json"));
            let mut a = vec!["generate", "--subject-model", model, "--dilemmas", "dilemmas.jsonl", "--condition", cond];
            a.extend(["--out", &out, "--manifest", &mf]);
            a.extend(common);
            run(&a, &factory);
        }
    }
    std::fs::write("responses.jsonl", responses)?;
    let mf = tmp("annotate.json");
    let mut a = vec!["annotate", "--judge-model", JUDGE, "--responses", "responses.jsonl", "--values", "values.txt"];
    a.extend(["--specificity", "--out", "arguments.jsonl", "--manifest", &mf]);
    a.extend(common);
    run(&a, &factory);
    println!("fixtures rebuilt under {}", root.display());
    Ok(())
}
