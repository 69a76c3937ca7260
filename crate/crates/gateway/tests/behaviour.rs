use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};
use valuescope_core::ValueSystem;
use valuescope_gateway::ops::{values_binding, Judge, SpecVariant};
use valuescope_gateway::scripted::ScriptedBackend;
use valuescope_gateway::{cache_key, Cache, ChatRequest, ChatResponse, Gateway, GatewayError, Mode, TemplateId};

fn system() -> ValueSystem {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/values.txt");
    ValueSystem::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn live(backend: ScriptedBackend) -> Gateway {
    Gateway::new(Mode::Live, None, Some(Box::new(backend))).unwrap()
}

fn judge(gw: &Gateway) -> Judge<'_> {
    Judge::new(gw, "https://judge.invalid/v1", "judge-model")
}

#[test]
fn seven_names_are_capped_at_five() {
    let gw = live(ScriptedBackend::new().reply(
        "Argument:",
        "List supporting values: Trust, Care, Honesty, Justice, Kindness, Love, Loyalty",
    ));
    let got = judge(&gw).assign_values("Keep the promise.", &system()).unwrap();
    assert_eq!(got.values, ["Trust", "Care", "Honesty", "Justice", "Kindness"]);
    assert_eq!(got.warnings.len(), 1);
}

#[test]
fn zero_twice_leaves_score_absent() {
    let backend = ScriptedBackend::new()
        .reply("longest path in the tree", "Specificity: 0")
        .reply_on_retry("longest path in the tree", "0");
    let gw = live(backend);
    assert_eq!(judge(&gw).judge_specificity("x", SpecVariant::Path).unwrap(), None);
    assert_eq!(gw.network_calls(), 2);
}

#[test]
fn zero_then_valid_uses_the_retry() {
    let backend = ScriptedBackend::new()
        .reply("assign a specificity score", r#"{"score": 0}"#)
        .reply_on_retry("assign a specificity score", r#"{"score": 4, "explanation": "ok"}"#);
    let gw = live(backend);
    assert_eq!(judge(&gw).judge_specificity("x", SpecVariant::Attr).unwrap(), Some(4));
}

#[test]
fn member_standardizes_without_a_call() {
    let gw = live(ScriptedBackend::new());
    assert_eq!(judge(&gw).standardize_value("Honesty", &system()).unwrap(), "Honesty");
    assert_eq!(gw.network_calls(), 0);
}

#[test]
fn non_member_answer_is_an_error() {
    let gw = live(ScriptedBackend::new().reply("Input Value: integrity", "Integrity2"));
    match judge(&gw).standardize_value("integrity", &system()) {
        Err(GatewayError::OutsideSystem { answer }) => assert_eq!(answer, "Integrity2"),
        other => panic!("expected an error, got {other:?}"),
    }
}

#[test]
fn unresolvable_names_are_dropped_with_a_warning() {
    let backend = ScriptedBackend::new()
        .reply("Argument:", "List supporting values: Honesty, Integrity2")
        .reply("Input Value: Integrity2", "Integrity3");
    let gw = live(backend);
    let got = judge(&gw).assign_values("Say it plainly.", &system()).unwrap();
    assert_eq!(got.values, ["Honesty"]);
    assert!(got.warnings[0].contains("Integrity2"));
}

#[test]
fn empty_list_is_not_retried() {
    let gw = live(ScriptedBackend::new().reply("Extract all the arguments", "[]"));
    assert!(judge(&gw).extract_arguments("Nothing to see.").unwrap().is_empty());
    assert_eq!(gw.network_calls(), 1);
}

#[test]
fn prose_twice_is_malformed() {
    let backend = ScriptedBackend::new()
        .reply("Extract all the arguments", "I think there are two.")
        .reply_on_retry("Extract all the arguments", "Still prose.");
    let gw = live(backend);
    assert!(matches!(
        judge(&gw).extract_arguments("Anything."),
        Err(GatewayError::Malformed { .. })
    ));
}

#[test]
fn cold_cache_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let gw = Gateway::new(Mode::Replay, Some(Cache::open(dir.path()).unwrap()), None).unwrap();
    let req = ChatRequest::new("https://e.invalid/v1", "m", "hello");
    let err = gw.chat(&req).unwrap_err();
    assert!(err.to_string().contains(&cache_key(&req)));
}

#[test]
fn recording_twice_never_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let gw = Gateway::new(
        Mode::Record,
        Some(Cache::open(dir.path()).unwrap()),
        Some(Box::new(ScriptedBackend::new().reply("hello", "hi"))),
    )
    .unwrap();
    let req = ChatRequest::new("https://e.invalid/v1", "m", "hello");
    gw.chat(&req).unwrap();
    gw.chat(&req).unwrap();
    assert_eq!(gw.network_calls(), 1);
    let reopened = Cache::open(dir.path()).unwrap();
    assert_eq!(reopened.len(), 1);
    let lines = std::fs::read_to_string(reopened.path()).unwrap();
    assert_eq!(lines.lines().count(), 1);
    reopened.put(&req, &ChatResponse::text("other"), "t").unwrap();
    assert_eq!(std::fs::read_to_string(reopened.path()).unwrap(), lines);
}

#[test]
fn key_covers_exactly_five_fields() {
    let base = ChatRequest::new("https://e.invalid/v1", "m", "hello");
    let k = cache_key(&base);
    let mut capped = base.clone();
    capped.max_tokens = Some(64);
    assert_eq!(cache_key(&capped), k);
    let variants = [
        ChatRequest { endpoint: "https://f.invalid/v1".into(), ..base.clone() },
        ChatRequest { model_id: "n".into(), ..base.clone() },
        ChatRequest::new("https://e.invalid/v1", "m", "hello!"),
        ChatRequest { temperature: 0.9, ..base.clone() },
        ChatRequest { sample_idx: 1, ..base.clone() },
    ];
    for v in variants {
        assert_ne!(cache_key(&v), k);
    }
}

#[test]
fn values_segment_hash_is_pinned() {
    let sys = system();
    let text = TemplateId::AssignValues
        .render(&BTreeMap::from([("values", values_binding(&sys)), ("argument", "x".to_string())]))
        .unwrap();
    let start = text.find("list: ").unwrap() + "list: ".len();
    let end = text.find("\nArgument: ").unwrap();
    let digest = hex::encode(Sha256::digest(&text.as_bytes()[start..end]));
    assert_eq!(digest, "863ddc50cd931ab91f95c2630c24e7604b143cc1919060e20ef98d3d176b2f00");
}

#[test]
fn invalid_temperature_is_rejected() {
    let gw = live(ScriptedBackend::new().reply("hello", "hi"));
    let req = ChatRequest { temperature: 2.5, ..ChatRequest::new("https://e.invalid/v1", "m", "hello") };
    assert!(matches!(gw.chat(&req), Err(GatewayError::InvalidRequest(_))));
}
