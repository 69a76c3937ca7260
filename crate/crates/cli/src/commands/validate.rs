use anyhow::bail;
use serde::Serialize;
use valuescope_core::io::{load_dilemmas, load_questions, save_document};
use valuescope_core::validate::ValidationReport;

use crate::args::ValidateArgs;
use crate::common::{load_values, read_input, Ctx};
use crate::exit::Invalid;

#[derive(Serialize)]
struct Report {
    dilemmas: Option<ValidationReport>,
    questions: Option<usize>,
    warnings: Vec<String>,
}

pub fn run(ctx: &Ctx, args: &ValidateArgs) -> anyhow::Result<()> {
    if args.dilemmas.is_none() && args.questions.is_none() {
        bail!(Invalid("nothing to validate: pass --dilemmas and/or --questions".into()));
    }
    let (system, values_text) = load_values(&args.values)?;
    let mut m = ctx.manifest("validate");
    m.input("values", values_text.as_bytes());
    let mut report = Report {
        dilemmas: None,
        questions: None,
        warnings: Vec::new(),
    };
    if let Some(path) = &args.dilemmas {
        m.input("dilemmas", read_input(path)?.as_bytes());
        let loaded = load_dilemmas(path, &system)?;
        for f in &loaded.report.errors {
            eprintln!("error: {f}");
        }
        for f in &loaded.report.warnings {
            eprintln!("warning: {f}");
        }
        report.warnings.extend(loaded.warnings);
        report.dilemmas = Some(loaded.report);
    }
    if let Some(path) = &args.questions {
        m.input("questions", read_input(path)?.as_bytes());
        let loaded = load_questions(path)?;
        report.warnings.extend(loaded.warnings);
        report.questions = Some(loaded.records.len());
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    save_document(&args.out, &report)?;
    m.output(args.out.display().to_string());
    ctx.write_manifest(m, &args.out)?;
    if let Some(d) = &report.dilemmas {
        if !d.is_ok() {
            bail!(Invalid(format!("{} validation error(s) in {} records", d.errors.len(), d.records)));
        }
    }
    Ok(())
}
