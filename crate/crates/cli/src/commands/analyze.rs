use std::collections::BTreeSet;

use anyhow::{bail, Context};
use valuescope_core::attributes::value_attributes;
use valuescope_core::consistency::{
    agreement_fraction, attribute_preference_correlation, pairwise_sample_consistency, pearson, rollup_framework,
    spearman, ConsistencyReport, FrameworkMap, Statistic,
};
use valuescope_core::export::{attribute_csv, parse_attribute_csv, report_csv, rollup_csv};
use valuescope_core::io::{load_decisions, load_document, write_atomic};
use valuescope_core::PreferenceVector;

use crate::args::{ConsistencyArgs, MetricsArgs, RollupArgs, StatisticArg};
use crate::commands::prefs::select_responses;
use crate::common::{file_label, load_values, read_input, Ctx};
use crate::exit::Invalid;

pub fn metrics(ctx: &Ctx, args: &MetricsArgs) -> anyhow::Result<()> {
    let responses = select_responses(&args.responses, &args.arguments, args.model.as_deref(), None)?;
    let rows = value_attributes(&responses, ctx.config.compression_level)?;
    write_atomic(&args.out, attribute_csv(&rows)?.as_bytes())?;

    let mut m = ctx.manifest("metrics");
    m.model_id = args.model.clone();
    m.input("responses", read_input(&args.responses)?.as_bytes());
    m.input("arguments", read_input(&args.arguments)?.as_bytes());
    m.setting("missing_spec_path", rows.iter().map(|r| r.missing_path).sum::<usize>());
    m.setting("missing_spec_attr", rows.iter().map(|r| r.missing_attr).sum::<usize>());
    m.output(args.out.display().to_string());
    ctx.write_manifest(m, &args.out)
}

pub fn load_prefs(path: &std::path::Path) -> anyhow::Result<PreferenceVector> {
    load_document(path).with_context(|| format!("loading preferences {}", path.display()))
}

/// Mean pairwise Spearman of `vectors` as a report row; `n_common` counts
/// the values shared by every vector.
pub fn sample_row(vectors: &[PreferenceVector], pair: String) -> anyhow::Result<ConsistencyReport> {
    let sc = pairwise_sample_consistency(vectors)?;
    if sc.pairs_skipped > 0 {
        log::warn!("{pair}: {} degenerate sample pair(s) skipped", sc.pairs_skipped);
    }
    let mut shared: BTreeSet<&String> = vectors[0].scores.keys().collect();
    for v in &vectors[1..] {
        shared.retain(|k| v.scores.contains_key(*k));
    }
    Ok(ConsistencyReport {
        pair,
        statistic: Statistic::Spearman,
        value: sc.mean_spearman,
        n_common: shared.len(),
    })
}

pub fn consistency(ctx: &Ctx, args: &ConsistencyArgs) -> anyhow::Result<()> {
    let mut m = ctx.manifest("consistency");
    let mut rows: Vec<ConsistencyReport> = Vec::new();
    let label = |default: String| args.label.clone().unwrap_or(default);

    if let (Some(a), Some(b)) = (&args.a, &args.b) {
        let (va, vb) = (load_prefs(a)?, load_prefs(b)?);
        m.input("a", read_input(a)?.as_bytes());
        m.input("b", read_input(b)?.as_bytes());
        let r = match args.statistic {
            StatisticArg::Pearson => pearson(&va, &vb)?,
            StatisticArg::Spearman => spearman(&va, &vb)?,
        };
        rows.push(r.with_pair(label(format!("{} vs {}", file_label(a), file_label(b)))));
    }
    if !args.samples.is_empty() {
        let mut vectors = Vec::new();
        for (i, p) in args.samples.iter().enumerate() {
            m.input(format!("sample_{i:03}"), read_input(p)?.as_bytes());
            vectors.push(load_prefs(p)?);
        }
        rows.push(sample_row(&vectors, label(format!("samples(n={})", vectors.len())))?);
    }
    if let (Some(i), Some(e)) = (&args.implicit, &args.explicit) {
        m.input("implicit", read_input(i)?.as_bytes());
        m.input("explicit", read_input(e)?.as_bytes());
        let ag = agreement_fraction(&load_decisions(i)?, &load_decisions(e)?)?;
        rows.push(ConsistencyReport {
            pair: label(format!("{} vs {}", file_label(i), file_label(e))),
            statistic: Statistic::Agreement,
            value: ag.fraction,
            n_common: ag.joined,
        });
    }
    if let (Some(attrs), Some(prefs)) = (&args.attrs, &args.prefs) {
        let text = read_input(attrs)?;
        m.input("attrs", text.as_bytes());
        m.input("prefs", read_input(prefs)?.as_bytes());
        let table = parse_attribute_csv(&text)?;
        let r = attribute_preference_correlation(&table, &load_prefs(prefs)?, args.attribute.into())?;
        let pair = args.label.clone().unwrap_or(r.pair.clone());
        rows.push(r.with_pair(pair));
    }
    if rows.is_empty() {
        bail!(Invalid("nothing to compare: pass --a/--b, --samples, --implicit/--explicit or --attrs/--prefs".into()));
    }
    write_atomic(&args.out, report_csv(&rows)?.as_bytes())?;
    m.output(args.out.display().to_string());
    ctx.write_manifest(m, &args.out)
}

pub fn rollup(ctx: &Ctx, args: &RollupArgs) -> anyhow::Result<()> {
    let mut m = ctx.manifest("rollup");
    let fw_text = read_input(&args.framework)?;
    let fw: FrameworkMap = serde_json::from_str(&fw_text)
        .map_err(|e| Invalid(format!("{}: {e}", args.framework.display())))?;
    m.input("framework", fw_text.as_bytes());
    m.input("prefs", read_input(&args.prefs)?.as_bytes());
    if let Some(v) = &args.values {
        let (system, text) = load_values(v)?;
        m.input("values", text.as_bytes());
        let unknown = fw.unknown_members(&system);
        if let Some((g, name)) = unknown.first() {
            bail!(Invalid(format!(
                "framework `{}`: {} member(s) outside the value list, first `{name}` in `{g}`",
                fw.name,
                unknown.len()
            )));
        }
    }
    let prefs = load_prefs(&args.prefs)?;
    let table = rollup_framework(&prefs.scores, &fw);
    write_atomic(&args.out, rollup_csv(&fw.name, &table)?.as_bytes())?;
    m.output(args.out.display().to_string());
    ctx.write_manifest(m, &args.out)
}
