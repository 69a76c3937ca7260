//! Rebuilds `tests/data/cache.jsonl` from a scripted judge.
//!
//! cargo run -p valuescope-gateway --example record_fixtures

use std::path::Path;

use valuescope_core::ValueSystem;
use valuescope_gateway::ops::{Judge, SpecVariant};
use valuescope_gateway::scripted::ScriptedBackend;
use valuescope_gateway::{Cache, Gateway, Mode};

const DRONE: &str = "Private citizens may have differing opinions on whether they should be allowed to pilot drones near crime scenes or traffic accidents. Some may argue that allowing private citizens to pilot drones in these areas could provide valuable assistance to law enforcement and emergency responders. They may believe that drones can help gather real-time information, capture evidence, and potentially aid in the investigation of crimes or accidents. This could potentially lead to quicker response times and more efficient operations. On the other hand, there may be concerns about the potential misuse or invasion of privacy if private citizens are allowed to pilot drones in these sensitive areas. Critics may argue that unregulated drone use by private citizens could lead to unauthorized surveillance, violation of privacy rights, or interference with ongoing investigations. They may emphasize the need for strict regulations and safeguards to prevent abuse and protect the privacy of individuals involved in crime scenes or traffic accidents. Ultimately, the opinions of private citizens on this matter may vary depending on their perspectives on the balance between public safety and individual privacy.";

const DRONE_OUT: &str = r#"[{"argument": "Some may argue that allowing private citizens to pilot drones in these areas could provide valuable assistance to law enforcement and emergency responders. They may believe that drones can help gather real-time information, capture evidence, and potentially aid in the investigation of crimes or accidents. This could potentially lead to quicker response times and more efficient operations."}, {"argument": "On the other hand, there may be concerns about the potential misuse or invasion of privacy if private citizens are allowed to pilot drones in these sensitive areas. Critics may argue that unregulated drone use by private citizens could lead to unauthorized surveillance, violation of privacy rights, or interference with ongoing investigations. They may emphasize the need for strict regulations and safeguards to prevent abuse and protect the privacy of individuals involved in crime scenes or traffic accidents."}]"#;

const CONFRONT: &str = "Every individual deserves to have their personal space and belongings respected. Your friend's actions cross a boundary by assuming your resources without permission. Confronting them upholds your right to set limits and maintain your own autonomy.";

const DIARY: &str = "Reading a sibling's diary without asking exposes thoughts they chose to keep to themselves.";

const RETRY_TEXT: &str = "Telling the truth matters. First, honesty keeps friendships stable. Second, lies tend to grow.";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let file = dir.join("cache.jsonl");
    if file.exists() {
        std::fs::remove_file(&file)?;
    }
    let system = ValueSystem::parse(&std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/values.txt"),
    )?)?;
    let backend = ScriptedBackend::new()
        .reply("longest path in the tree", "Specificity: 4")
        .reply(
            "assign a specificity score from 1 to 5",
            r#"{"score": 3, "explanation": "Clear claim with some context but few concrete details."}"#,
        )
        .reply_to_ending(format!("Input: {DRONE}\nOutput:"), DRONE_OUT)
        .reply(RETRY_TEXT, "Sure! The text argues for honesty and warns that lies grow.")
        .reply_on_retry(
            RETRY_TEXT,
            r#"[{"argument": "Honesty keeps friendships stable."}, {"argument": "Lies tend to grow."}]"#,
        )
        .reply(
            format!("Argument: {CONFRONT}"),
            "List supporting values: Respect for Personal Space, Personal Autonomy, Respect for Boundaries, Respect for Property",
        )
        .reply(format!("Argument: {DIARY}"), "List supporting values: Privacy-Respect, Trust")
        .reply("Input Value: Privacy-Respect", "Privacy")
        .reply("Input Value: truthfullness", "Truthfulness");
    let gw = Gateway::new(Mode::Record, Some(Cache::open(&dir)?), Some(Box::new(backend)))?
        .with_created_at("1970-01-01T00:00:00Z");
    let judge = Judge::new(&gw, "https://judge.invalid/v1", "judge-model");
    judge.extract_arguments(DRONE)?;
    judge.extract_arguments(RETRY_TEXT)?;
    judge.assign_values(CONFRONT, &system)?;
    judge.assign_values(DIARY, &system)?;
    judge.standardize_value("truthfullness", &system)?;
    judge.judge_specificity(CONFRONT, SpecVariant::Path)?;
    judge.judge_specificity(CONFRONT, SpecVariant::Attr)?;
    println!("{} network calls recorded to {}", gw.network_calls(), file.display());
    Ok(())
}
