use valuescope_core::longform::{first_occurrence_positions, longform_preferences, IndexBase};
use valuescope_core::{AnnotatedResponse, Argument};

fn response(id: &str, args: &[&[&str]]) -> AnnotatedResponse {
    AnnotatedResponse {
        response_id: id.into(),
        source_record_id: "q1".into(),
        model_id: "m".into(),
        k_requested: args.len() as u32,
        temperature: 0.0,
        sample_idx: 0,
        full_text: String::new(),
        arguments: args
            .iter()
            .enumerate()
            .map(|(i, vs)| Argument {
                index: i as u32 + 1,
                text: format!("argument {}", i + 1),
                values: vs.iter().map(|s| s.to_string()).collect(),
                specificity_path: None,
                specificity_attr: None,
            })
            .collect(),
    }
}

#[test]
fn three_responses_enumerated_by_hand() {
    let rs = [
        response("r1", &[&["Privacy"], &["Safety", "Privacy"], &["Autonomy"], &[]]),
        response("r2", &[&["Safety"], &["Safety"]]),
        response("r3", &[&[], &["Autonomy", "Privacy"], &["Honesty"], &["Safety"], &["Privacy"]]),
    ];
    let pos = first_occurrence_positions(&rs, IndexBase::One);
    let got: Vec<(&str, &str, u32, u32, f64)> = pos
        .observations
        .iter()
        .map(|o| (o.value.as_str(), o.response_id.as_str(), o.first_index, o.m, o.normalized))
        .collect();
    let want = vec![
        ("Autonomy", "r1", 3, 4, 0.75),
        ("Autonomy", "r3", 2, 5, 0.4),
        ("Honesty", "r3", 3, 5, 0.6),
        ("Privacy", "r1", 1, 4, 0.25),
        ("Privacy", "r3", 2, 5, 0.4),
        ("Safety", "r1", 2, 4, 0.5),
        ("Safety", "r2", 1, 2, 0.5),
        ("Safety", "r3", 4, 5, 0.8),
    ];
    assert_eq!(got, want);

    let pv = longform_preferences(&pos.observations, 5).unwrap();
    assert_eq!(pv.get("Autonomy"), Some(-(0.75 + 0.4) / 2.0));
    assert_eq!(pv.get("Honesty"), Some(-0.6));
    assert_eq!(pv.get("Privacy"), Some(-(0.25 + 0.4) / 2.0));
    assert_eq!(pv.get("Safety"), Some(-(0.5 + 0.5 + 0.8) / 3.0));
    assert_eq!(pv.mode.to_string(), "long_form(k=5)");
}
