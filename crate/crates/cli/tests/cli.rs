use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use valuescope_core::io::{load_document, save_document};
use valuescope_core::manifest::RunManifest;
use valuescope_core::trueskill::{round_half_even, BeliefState};
use valuescope_core::{ModeTag, PreferenceVector};
use valuescope_gateway::{cache_key, ChatRequest, Message, TemplateId};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").canonicalize().unwrap()
}

fn fx(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn vs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_valuescope"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "0")
        .env_remove("VALUESCOPE_ENDPOINT")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn write_prefs(path: &str, xs: &[(&str, f64)]) {
    let pv = PreferenceVector::new(ModeTag::External, xs.iter().map(|(k, v)| (k.to_string(), *v)).collect()).unwrap();
    save_document(Path::new(path), &pv).unwrap();
}

#[test]
fn prefs_short_reproduces_worked_matches() {
    let d = tempfile::tempdir().unwrap();
    let out = p(&d, "beliefs.json");
    let o = vs(&[
        "prefs-short",
        "--dilemmas",
        &fx("worked_matches_dilemmas.jsonl"),
        "--decisions",
        &fx("worked_matches.jsonl"),
        "--values",
        &fx("values.txt"),
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s: BeliefState = load_document(Path::new(&out)).unwrap();
    let r = |v: &str| (round_half_even(s.belief(v).mu, 3), round_half_even(s.belief(v).sigma, 3));
    assert_eq!(r("Honesty"), (29.465, 7.934));
    assert_eq!(r("Courage"), (29.465, 7.934));
    assert_eq!(r("Integrity"), (29.459, 7.939));
    assert_eq!(r("Compassion"), (20.561, 7.934));
    assert_eq!(r("Empathy"), (20.561, 7.934));
    assert_eq!(r("Sacrifice"), (20.541, 7.939));
    assert_eq!(r("Consideration"), (20.541, 7.939));
    assert_eq!(r("Vulnerability"), (25.013, 8.327));
    assert_eq!(r("Privacy"), (24.987, 8.327));
}

#[test]
fn consistency_writes_one_pearson_row() {
    let d = tempfile::tempdir().unwrap();
    let (a, b, out) = (p(&d, "short.json"), p(&d, "long.json"), p(&d, "r.csv"));
    write_prefs(&a, &[("x", 1.0), ("y", 2.0), ("z", 4.0), ("only_a", 9.0)]);
    write_prefs(&b, &[("x", 3.0), ("y", 1.0), ("z", 2.0)]);
    let o = vs(&["consistency", "--a", &a, "--b", &b, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "pair,statistic,value,n_common");
    assert_eq!(lines.len(), 2);
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[0], "short vs long");
    assert_eq!(cells[1], "pearson");
    // dx = (-4/3, -1/3, 5/3), dy = (1, -1, 0): r = -1 / sqrt(42/9 * 2)
    let want = -1.0 / (42.0f64 / 9.0 * 2.0).sqrt();
    assert!((cells[2].parse::<f64>().unwrap() - want).abs() < 1e-15);
    assert_eq!(cells[3], "3");
}

#[test]
fn consistency_without_inputs_is_a_validation_error() {
    let d = tempfile::tempdir().unwrap();
    let o = vs(&["consistency", "--out", &p(&d, "r.csv")]);
    assert_eq!(code(&o), 1);
}

fn first_extract_key(endpoint: &str) -> String {
    let first = std::fs::read_to_string(fixtures().join("responses.jsonl")).unwrap();
    let row: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    let prompt = TemplateId::ExtractArguments
        .render(&BTreeMap::from([("response", row["text"].as_str().unwrap().to_string())]))
        .unwrap();
    let req = ChatRequest {
        temperature: 0.0,
        messages: vec![Message::user(prompt)],
        ..ChatRequest::new(endpoint, "judge-model", "")
    };
    cache_key(&req)
}

#[test]
fn cold_cache_replay_exits_3_naming_first_key() {
    let d = tempfile::tempdir().unwrap();
    let o = vs(&[
        "annotate",
        "--mode",
        "replay",
        "--cache-dir",
        &p(&d, "empty-cache"),
        "--endpoint",
        "https://llm.invalid/v1",
        "--judge-model",
        "judge-model",
        "--responses",
        &fx("responses.jsonl"),
        "--values",
        &fx("values.txt"),
        "--out",
        &p(&d, "args.jsonl"),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains(&first_extract_key("https://llm.invalid/v1")), "{err}");
    assert!(err.contains("model-a:q-drones-k5-s0"), "{err}");
    assert!(!Path::new(&p(&d, "args.jsonl")).exists());
}

fn annotate_replay(out: &str, concurrency: &str) -> Output {
    vs(&[
        "annotate",
        "--mode",
        "replay",
        "--cache-dir",
        &fx("cache"),
        "--endpoint",
        "https://llm.invalid/v1",
        "--judge-model",
        "judge-model",
        "--concurrency",
        concurrency,
        "--specificity",
        "--responses",
        &fx("responses.jsonl"),
        "--values",
        &fx("values.txt"),
        "--out",
        out,
    ])
}

#[test]
fn warm_replay_matches_recording_at_any_concurrency() {
    let d = tempfile::tempdir().unwrap();
    let (one, eight) = (p(&d, "one.jsonl"), p(&d, "eight.jsonl"));
    assert_eq!(code(&annotate_replay(&one, "1")), 0);
    assert_eq!(code(&annotate_replay(&eight, "8")), 0);
    let a = std::fs::read(&one).unwrap();
    assert_eq!(a, std::fs::read(&eight).unwrap());
    assert_eq!(a, std::fs::read(fixtures().join("arguments.jsonl")).unwrap());
}

#[test]
fn every_run_writes_a_manifest() {
    let d = tempfile::tempdir().unwrap();
    let out = p(&d, "args.jsonl");
    assert_eq!(code(&annotate_replay(&out, "2")), 0);
    let m: RunManifest = load_document(Path::new(&format!("{out}.manifest.json"))).unwrap();
    assert_eq!(m.command, "annotate");
    assert_eq!(m.created_at, "1970-01-01T00:00:00Z");
    assert_eq!(m.mode.as_deref(), Some("replay"));
    assert_eq!(m.model_id.as_deref(), Some("judge-model"));
    assert_eq!(m.temperature, Some(0.0));
    assert_eq!(m.prompt_template_hashes.len(), 5);
    assert_eq!(
        m.prompt_template_hashes["spec_path"],
        valuescope_core::io::content_hash(TemplateId::SpecPath.body().as_bytes())
    );
    assert_eq!(m.settings["network_calls"], 0);
    assert_eq!(m.run_id.len(), 16);
}

#[test]
fn generate_replays_recorded_responses() {
    let d = tempfile::tempdir().unwrap();
    let out = p(&d, "resp.jsonl");
    let o = vs(&[
        "generate",
        "--mode",
        "replay",
        "--cache-dir",
        &fx("cache"),
        "--endpoint",
        "https://llm.invalid/v1",
        "--subject-model",
        "model-b",
        "--questions",
        &fx("questions.jsonl"),
        "--k",
        "5",
        "--samples",
        "3",
        "--temperature",
        "0.9",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let got = std::fs::read_to_string(&out).unwrap();
    let recorded = std::fs::read_to_string(fixtures().join("responses.jsonl")).unwrap();
    let want: Vec<&str> = recorded.lines().filter(|l| l.contains("\"model_id\":\"model-b\"")).collect();
    assert_eq!(got.lines().collect::<Vec<_>>(), want);

    let dec = p(&d, "dec.jsonl");
    let o = vs(&[
        "generate",
        "--mode",
        "replay",
        "--cache-dir",
        &fx("cache"),
        "--endpoint",
        "https://llm.invalid/v1",
        "--subject-model",
        "model-b",
        "--dilemmas",
        &fx("dilemmas.jsonl"),
        "--condition",
        "explicit",
        "--out",
        &dec,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        std::fs::read(&dec).unwrap(),
        std::fs::read(fixtures().join("decisions/model-b.explicit.jsonl")).unwrap()
    );
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let d = tempfile::tempdir().unwrap();
    let cfg = p(&d, "config.json");
    let body = serde_json::json!({
        "endpoint": "https://llm.invalid/v1",
        "judge_model": "judge-model",
        "mode": "replay",
        "cache_dir": fx("cache"),
        "concurrency": 3,
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    let out = p(&d, "args.jsonl");
    let base = ["--config", cfg.as_str(), "annotate", "--specificity", "--responses"];
    let mut args = base.to_vec();
    let (r, v) = (fx("responses.jsonl"), fx("values.txt"));
    args.extend([r.as_str(), "--values", v.as_str(), "--out", out.as_str()]);
    let o = vs(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m: RunManifest = load_document(Path::new(&format!("{out}.manifest.json"))).unwrap();
    assert_eq!(m.settings["config"]["concurrency"], 3);

    // a different endpoint changes every cache key, so replay misses
    args.extend(["--endpoint", "https://elsewhere.invalid/v1"]);
    assert_eq!(code(&vs(&args)), 3);
}

#[test]
fn bad_config_and_missing_files_map_to_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let cfg = p(&d, "config.json");
    std::fs::write(&cfg, r#"{"concurrency": 0}"#).unwrap();
    let o = vs(&["--config", &cfg, "synth", "--out-dir", &p(&d, "s")]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    std::fs::write(&cfg, r#"{"colour": "blue"}"#).unwrap();
    assert_eq!(code(&vs(&["--config", &cfg, "synth", "--out-dir", &p(&d, "s")])), 1);
    let o = vs(&["--mode", "replay", "synth", "--out-dir", &p(&d, "s")]);
    assert_eq!(code(&o), 1, "replay without a cache directory");

    let o = vs(&["prefs-short", "--dilemmas", &p(&d, "nope.jsonl"), "--decisions", &fx("worked_matches.jsonl"), "--out", &p(&d, "b.json")]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert_eq!(code(&vs(&["no-such-command"])), 1);
    assert_eq!(code(&vs(&["--help"])), 0);
}

#[test]
fn validation_failures_exit_1() {
    let d = tempfile::tempdir().unwrap();
    let bad = p(&d, "bad.jsonl");
    std::fs::write(
        &bad,
        r#"{"id":"b1","scenario":"s","action1":{"text":"a","values":["Honesty"]},"action2":{"text":"b","values":["Hovercraft"]}}
"#,
    )
    .unwrap();
    let o = vs(&["validate", "--values", &fx("values.txt"), "--dilemmas", &bad, "--out", &p(&d, "r.json")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Hovercraft"));
    let o = vs(&["prefs-short", "--dilemmas", &bad, "--decisions", &fx("worked_matches.jsonl"), "--values", &fx("values.txt"), "--out", &p(&d, "b.json")]);
    assert_eq!(code(&o), 1);

    let broken = p(&d, "broken.jsonl");
    std::fs::write(&broken, "{\"id\":\"x\",\"scenario\":\"s\",\"action1\":{\"text\":\"a\",\"values\":[]}}\n").unwrap();
    let o = vs(&["validate", "--values", &fx("values.txt"), "--dilemmas", &broken, "--out", &p(&d, "r.json")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains(":1:"), "{}", stderr(&o));
}

#[test]
fn fixture_corpus_validates() {
    let d = tempfile::tempdir().unwrap();
    let o = vs(&[
        "validate",
        "--values",
        &fx("values.txt"),
        "--dilemmas",
        &fx("dilemmas.jsonl"),
        "--questions",
        &fx("questions.jsonl"),
        "--out",
        &p(&d, "r.json"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn rollup_means_scored_members() {
    let d = tempfile::tempdir().unwrap();
    let (prefs, out) = (p(&d, "prefs.json"), p(&d, "rollup.csv"));
    write_prefs(&prefs, &[("Love", 0.25), ("Care", 0.5), ("Trust", -0.125), ("Honesty", 3.0)]);
    let o = vs(&[
        "rollup",
        "--prefs",
        &prefs,
        "--framework",
        &fx("frameworks/emotions.json"),
        "--values",
        &fx("values.txt"),
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "framework,coarse_value,score,n_members_scored\nEmotions,Love,0.375,2\nEmotions,Trust,-0.125,1\n"
    );
}

#[test]
fn rollup_rejects_unknown_framework_members() {
    let d = tempfile::tempdir().unwrap();
    let (prefs, fw) = (p(&d, "prefs.json"), p(&d, "fw.json"));
    write_prefs(&prefs, &[("Love", 0.25)]);
    std::fs::write(&fw, r#"{"name": "X", "groups": {"G": ["Love", "Lurve"]}}"#).unwrap();
    let o = vs(&["rollup", "--prefs", &prefs, "--framework", &fw, "--values", &fx("values.txt"), "--out", &p(&d, "o.csv")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Lurve"));
}

#[test]
fn synth_round_trip_recovers_planted_order() {
    let d = tempfile::tempdir().unwrap();
    let dir = p(&d, "syn");
    assert_eq!(code(&vs(&["synth", "--n-values", "6", "--n-dilemmas", "30", "--k", "3", "--out-dir", &dir])), 0);
    let f = |n: &str| format!("{dir}/{n}");
    let o = vs(&["prefs-short", "--dilemmas", &f("dilemmas.jsonl"), "--decisions", &f("decisions.jsonl"), "--values", &f("values.txt"), "--out", &f("b.json"), "--prefs", &f("short.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = vs(&["prefs-long", "--responses", &f("responses.jsonl"), "--arguments", &f("arguments.jsonl"), "--out", &f("long.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = vs(&["consistency", "--statistic", "spearman", "--a", &f("short.json"), "--b", &f("planted.json"), "--out", &f("r.csv")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(std::fs::read_to_string(f("r.csv")).unwrap().contains("short vs planted,spearman,1,6"));
    let long: PreferenceVector = load_document(Path::new(&f("long.json"))).unwrap();
    assert_eq!(long.mode, ModeTag::LongForm { k: 3 });
}

#[test]
fn report_needs_no_gateway() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (p(&d, "a.json"), p(&d, "b.json"));
    write_prefs(&a, &[("Love", 1.0), ("Care", 2.0), ("Trust", 3.0)]);
    write_prefs(&b, &[("Love", 1.5), ("Care", 1.0), ("Trust", 4.0)]);
    let plan = p(&d, "plan.json");
    std::fs::write(&plan, r#"{"models": [{"model_id": "m", "short": "a.json", "long": ["b.json"], "samples": ["a.json", "a.json"]}]}"#).unwrap();
    let out = p(&d, "report");
    let o = vs(&["--mode", "live", "--endpoint", "http://127.0.0.1:9", "report", "--plan", &plan, "--out-dir", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sc = std::fs::read_to_string(format!("{out}/sample_consistency.csv")).unwrap();
    assert_eq!(sc, "model,family,mean_spearman,n_samples,n_common\nm,m,1,2,3\n");
    assert!(Path::new(&format!("{out}/manifest.json")).exists());
}
