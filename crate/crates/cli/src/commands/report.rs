use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use valuescope_core::consistency::{
    agreement_fraction, attribute_preference_correlation, pearson, rollup_framework, Attribute, FrameworkMap,
};
use valuescope_core::export::{csv_string, parse_attribute_csv};
use valuescope_core::io::{load_decisions, write_atomic};
use valuescope_core::PreferenceVector;

use crate::args::ReportArgs;
use crate::commands::analyze::{load_prefs, sample_row};
use crate::common::{read_input, Ctx};
use crate::exit::Invalid;

/// Files produced for one model. Paths are relative to the plan file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub model_id: String,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub short: Option<PathBuf>,
    #[serde(default)]
    pub long: Vec<PathBuf>,
    #[serde(default)]
    pub samples: Vec<PathBuf>,
    #[serde(default)]
    pub attrs: Option<PathBuf>,
    #[serde(default)]
    pub implicit: Option<PathBuf>,
    #[serde(default)]
    pub explicit: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    pub models: Vec<ModelEntry>,
    #[serde(default)]
    pub frameworks: Vec<PathBuf>,
}

const ATTRIBUTES: [Attribute; 3] = [Attribute::SpecificityPath, Attribute::SpecificityAttr, Attribute::CompressionRatio];

struct Loaded {
    entry: ModelEntry,
    family: String,
    /// Short-form first, then long-form vectors in plan order.
    vectors: Vec<PreferenceVector>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// One CSV writer per table, plus the skipped-row log.
struct Tables<'a> {
    dir: &'a Path,
    skipped: Vec<String>,
    written: Vec<String>,
}

impl Tables<'_> {
    fn write(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> anyhow::Result<()> {
        write_atomic(&self.dir.join(name), csv_string(header, rows)?.as_bytes())?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn skip(&mut self, what: String, err: impl std::fmt::Display) {
        log::warn!("{what}: {err}");
        self.skipped.push(format!("{what}: {err}"));
    }
}

pub fn run(ctx: &Ctx, args: &ReportArgs) -> anyhow::Result<()> {
    let plan_text = read_input(&args.plan)?;
    let plan: Plan =
        serde_json::from_str(&plan_text).map_err(|e| Invalid(format!("{}: {e}", args.plan.display())))?;
    let base = args.plan.parent().unwrap_or(Path::new("."));
    let at = |p: &PathBuf| base.join(p);
    let mut m = ctx.manifest("report");
    m.input("plan", plan_text.as_bytes());

    let mut models = Vec::new();
    for e in &plan.models {
        let mut vectors = Vec::new();
        for p in e.short.iter().chain(&e.long) {
            m.input(format!("{}/{}", e.model_id, p.display()), read_input(&at(p))?.as_bytes());
            vectors.push(load_prefs(&at(p))?);
        }
        models.push(Loaded {
            family: e.family.clone().unwrap_or_else(|| e.model_id.clone()),
            entry: e.clone(),
            vectors,
        });
    }
    let mut t = Tables {
        dir: &args.out_dir,
        skipped: Vec::new(),
        written: Vec::new(),
    };

    // short vs long per model
    let mut rows = Vec::new();
    for ld in &models {
        let Some(short) = ld.entry.short.as_ref().map(|_| &ld.vectors[0]) else { continue };
        for long in &ld.vectors[1..] {
            match pearson(short, long) {
                Ok(r) => rows.push(vec![
                    ld.entry.model_id.clone(),
                    ld.family.clone(),
                    r.pair,
                    r.statistic.to_string(),
                    r.value.to_string(),
                    r.n_common.to_string(),
                ]),
                Err(e) => t.skip(format!("{} short vs {}", ld.entry.model_id, long.mode), e),
            }
        }
    }
    t.write("short_long.csv", &["model", "family", "pair", "statistic", "value", "n_common"], rows)?;

    // temperature-sample consistency
    let mut rows = Vec::new();
    for ld in &models {
        if ld.entry.samples.is_empty() {
            continue;
        }
        let mut vs = Vec::new();
        for p in &ld.entry.samples {
            m.input(format!("{}/{}", ld.entry.model_id, p.display()), read_input(&at(p))?.as_bytes());
            vs.push(load_prefs(&at(p))?);
        }
        match sample_row(&vs, String::new()) {
            Ok(r) => rows.push(vec![
                ld.entry.model_id.clone(),
                ld.family.clone(),
                r.value.to_string(),
                vs.len().to_string(),
                r.n_common.to_string(),
            ]),
            Err(e) => t.skip(format!("{} samples", ld.entry.model_id), e),
        }
    }
    t.write("sample_consistency.csv", &["model", "family", "mean_spearman", "n_samples", "n_common"], rows)?;

    // mode pairs, per model and averaged per family, over models and over families
    let mut per_model: BTreeMap<String, Vec<(String, String, f64)>> = BTreeMap::new();
    let mut rows = Vec::new();
    for ld in &models {
        for i in 0..ld.vectors.len() {
            for j in i + 1..ld.vectors.len() {
                let (a, b) = (&ld.vectors[i], &ld.vectors[j]);
                match pearson(a, b) {
                    Ok(r) => {
                        rows.push(vec![
                            "model".into(),
                            ld.entry.model_id.clone(),
                            r.pair.clone(),
                            r.value.to_string(),
                            "1".into(),
                        ]);
                        per_model.entry(r.pair).or_default().push((ld.family.clone(), ld.entry.model_id.clone(), r.value));
                    }
                    Err(e) => t.skip(format!("{} {} vs {}", ld.entry.model_id, a.mode, b.mode), e),
                }
            }
        }
    }
    for (pair, xs) in &per_model {
        let mut fam: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for (f, _, v) in xs {
            fam.entry(f.as_str()).or_default().push(*v);
        }
        for (f, vs) in &fam {
            rows.push(vec!["family".into(), f.to_string(), pair.clone(), mean(vs).to_string(), vs.len().to_string()]);
        }
        let all: Vec<f64> = xs.iter().map(|x| x.2).collect();
        rows.push(vec!["over_models".into(), "all".into(), pair.clone(), mean(&all).to_string(), all.len().to_string()]);
        let fam_means: Vec<f64> = fam.values().map(|v| mean(v)).collect();
        rows.push(vec![
            "over_families".into(),
            "all".into(),
            pair.clone(),
            mean(&fam_means).to_string(),
            fam_means.len().to_string(),
        ]);
    }
    t.write("mode_pairs.csv", &["grouping", "group", "pair", "value", "n"], rows)?;

    // implicit vs explicit decisions
    let mut rows = Vec::new();
    for ld in &models {
        let (Some(i), Some(e)) = (&ld.entry.implicit, &ld.entry.explicit) else { continue };
        m.input(format!("{}/{}", ld.entry.model_id, i.display()), read_input(&at(i))?.as_bytes());
        m.input(format!("{}/{}", ld.entry.model_id, e.display()), read_input(&at(e))?.as_bytes());
        match agreement_fraction(&load_decisions(&at(i))?, &load_decisions(&at(e))?) {
            Ok(a) => rows.push(vec![
                ld.entry.model_id.clone(),
                ld.family.clone(),
                a.fraction.to_string(),
                a.joined.to_string(),
                a.same.to_string(),
            ]),
            Err(err) => t.skip(format!("{} agreement", ld.entry.model_id), err),
        }
    }
    t.write("agreement.csv", &["model", "family", "fraction", "joined", "same"], rows)?;

    // generation attributes against preferences
    let mut rows = Vec::new();
    for ld in &models {
        let Some(p) = &ld.entry.attrs else { continue };
        let text = read_input(&at(p))?;
        m.input(format!("{}/{}", ld.entry.model_id, p.display()), text.as_bytes());
        let table = parse_attribute_csv(&text)?;
        for v in &ld.vectors {
            for attr in ATTRIBUTES {
                match attribute_preference_correlation(&table, v, attr) {
                    Ok(r) => rows.push(vec![
                        ld.entry.model_id.clone(),
                        ld.family.clone(),
                        attr.to_string(),
                        v.mode.to_string(),
                        r.value.to_string(),
                        r.n_common.to_string(),
                    ]),
                    Err(e) => t.skip(format!("{} {attr} vs {}", ld.entry.model_id, v.mode), e),
                }
            }
        }
    }
    t.write("attribute_correlations.csv", &["model", "family", "attribute", "prefs", "value", "n_common"], rows)?;

    if !plan.frameworks.is_empty() {
        let mut rows = Vec::new();
        for p in &plan.frameworks {
            let text = read_input(&at(p))?;
            m.input(p.display().to_string(), text.as_bytes());
            let fw: FrameworkMap =
                serde_json::from_str(&text).map_err(|e| Invalid(format!("{}: {e}", at(p).display())))?;
            for ld in &models {
                for v in &ld.vectors {
                    for (coarse, e) in rollup_framework(&v.scores, &fw) {
                        rows.push(vec![
                            ld.entry.model_id.clone(),
                            v.mode.to_string(),
                            fw.name.clone(),
                            coarse,
                            e.score.to_string(),
                            e.n_members_scored.to_string(),
                        ]);
                    }
                }
            }
        }
        t.write("rollup.csv", &["model", "prefs", "framework", "coarse_value", "score", "n_members_scored"], rows)?;
    }

    m.setting("skipped", &t.skipped);
    for w in &t.written {
        m.output(w.clone());
    }
    ctx.write_manifest(m, &args.out_dir)
}
