use std::collections::BTreeSet;

use anyhow::bail;
use valuescope_core::io::{assemble_responses, load_arguments, load_decisions, load_responses, read_jsonl, save_document};
use valuescope_core::longform::{first_occurrence_positions, longform_preferences};
use valuescope_core::trueskill::{preference_vector_from_beliefs, process_decisions, BeliefState};
use valuescope_core::validate::validate_corpus;
use valuescope_core::{AnnotatedResponse, DilemmaRecord, ResponseRecord};

use crate::args::{PrefsLongArgs, PrefsShortArgs};
use crate::common::{load_values, read_input, Ctx};
use crate::exit::Invalid;

pub fn short(ctx: &Ctx, args: &PrefsShortArgs) -> anyhow::Result<()> {
    let mut m = ctx.manifest("prefs-short");
    let records: Vec<DilemmaRecord> = read_jsonl(&args.dilemmas)?.records;
    m.input("dilemmas", read_input(&args.dilemmas)?.as_bytes());
    m.input("decisions", read_input(&args.decisions)?.as_bytes());
    if let Some(v) = &args.values {
        let (system, text) = load_values(v)?;
        m.input("values", text.as_bytes());
        let report = validate_corpus(&records, &system);
        if !report.is_ok() {
            for f in &report.errors {
                eprintln!("error: {f}");
            }
            bail!(Invalid(format!("{} validation error(s) in the dilemmas", report.errors.len())));
        }
    }
    let decisions = load_decisions(&args.decisions)?;
    let start = BeliefState::new(ctx.config.trueskill)?;
    let out = process_decisions(&start, &records, &decisions)?;
    if !out.skipped.is_empty() {
        log::warn!("{} unparsed decision(s) skipped", out.skipped.len());
    }
    save_document(&args.out, &out.state)?;
    m.output(args.out.display().to_string());
    if let Some(p) = &args.prefs {
        save_document(p, &preference_vector_from_beliefs(&out.state)?)?;
        m.output(p.display().to_string());
    }
    m.setting("applied", out.applied);
    m.setting("skipped", &out.skipped);
    ctx.write_manifest(m, &args.out)
}

/// Responses matching the model/sample filters, joined with their arguments.
pub fn select_responses(
    responses: &std::path::Path,
    arguments: &std::path::Path,
    model: Option<&str>,
    sample: Option<u32>,
) -> anyhow::Result<Vec<AnnotatedResponse>> {
    let keep = |r: &ResponseRecord| model.is_none_or(|m| r.model_id == m) && sample.is_none_or(|s| r.sample_idx == s);
    let rs: Vec<ResponseRecord> = load_responses(responses)?.into_iter().filter(|r| keep(r)).collect();
    let ids: BTreeSet<&str> = rs.iter().map(|r| r.response_id.as_str()).collect();
    let mut args = load_arguments(arguments)?;
    if model.is_some() || sample.is_some() {
        args.retain(|a| ids.contains(a.response_id.as_str()));
    }
    Ok(assemble_responses(&rs, args)?)
}

pub fn long(ctx: &Ctx, args: &PrefsLongArgs) -> anyhow::Result<()> {
    let responses = select_responses(&args.responses, &args.arguments, args.model.as_deref(), args.sample)?;
    if responses.is_empty() {
        bail!(Invalid("no responses match the filters".into()));
    }
    let k = match args.k {
        Some(k) => k,
        None => {
            let ks: BTreeSet<u32> = responses.iter().map(|r| r.k_requested).collect();
            if ks.len() != 1 {
                bail!(Invalid(format!("responses mix k values {ks:?}; pass --k")));
            }
            *ks.first().expect("non-empty")
        }
    };
    let pos = first_occurrence_positions(&responses, ctx.config.index_base);
    if !pos.skipped.is_empty() {
        log::warn!("{} response(s) without arguments skipped", pos.skipped.len());
    }
    let pv = longform_preferences(&pos.observations, k)?;
    save_document(&args.out, &pv)?;

    let mut m = ctx.manifest("prefs-long");
    m.k = Some(k);
    m.model_id = args.model.clone();
    m.input("responses", read_input(&args.responses)?.as_bytes());
    m.input("arguments", read_input(&args.arguments)?.as_bytes());
    m.setting("sample", args.sample);
    m.setting("skipped_responses", &pos.skipped);
    m.output(args.out.display().to_string());
    ctx.write_manifest(m, &args.out)
}
