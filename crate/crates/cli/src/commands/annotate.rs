use valuescope_core::io::{load_responses, write_jsonl};
use valuescope_core::ArgumentRecord;
use valuescope_gateway::ops::{annotate_response, values_binding, AnnotateOptions, Annotation, Judge};
use valuescope_gateway::{GatewayError, TemplateId};

use crate::args::AnnotateArgs;
use crate::common::{load_values, read_input, record_templates, Ctx};

pub fn run(ctx: &Ctx, args: &AnnotateArgs) -> anyhow::Result<()> {
    let model = ctx.require_model("judge")?;
    let (system, values_text) = load_values(&args.values)?;
    let responses = load_responses(&args.responses)?;
    let gateway = ctx.gateway()?;
    let judge = Judge::new(&gateway, ctx.config.endpoint.clone(), model.clone());
    let opts = AnnotateOptions {
        specificity: args.specificity,
    };

    let results: Vec<Result<Annotation, GatewayError>> =
        ctx.bounded_map(&responses, |r| annotate_response(&judge, r, &system, opts))?;

    let mut arguments: Vec<ArgumentRecord> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut failed: Vec<String> = Vec::new();
    for (r, res) in responses.iter().zip(results) {
        match res {
            Ok(a) => {
                warnings.extend(a.warnings);
                arguments.extend(a.arguments);
            }
            // Unusable judge output is recorded against the response; anything
            // else (cache miss, HTTP, transport) aborts the run.
            Err(GatewayError::Malformed { what, .. }) => {
                failed.push(format!("{}: unparseable {what} after retry", r.response_id));
            }
            Err(e) => return Err(anyhow::Error::new(e).context(format!("annotating `{}`", r.response_id))),
        }
    }
    arguments.sort_by(|a, b| (&a.response_id, a.index).cmp(&(&b.response_id, b.index)));
    for w in warnings.iter().chain(&failed) {
        log::warn!("{w}");
    }
    write_jsonl(&args.out, &arguments)?;

    let mut m = ctx.manifest("annotate");
    m.model_id = Some(model);
    m.mode = Some(gateway.mode().to_string());
    m.temperature = Some(judge.temperature);
    m.input("responses", read_input(&args.responses)?.as_bytes());
    m.input("values", values_text.as_bytes());
    m.input("values_binding", values_binding(&system).as_bytes());
    let mut templates = vec![TemplateId::ExtractArguments, TemplateId::AssignValues, TemplateId::StandardizeValue];
    if args.specificity {
        templates.extend([TemplateId::SpecPath, TemplateId::SpecAttr]);
    }
    record_templates(&mut m, &templates);
    m.setting("specificity", args.specificity);
    m.setting("warnings", &warnings);
    m.setting("failed_responses", &failed);
    m.setting("network_calls", gateway.network_calls());
    m.output(args.out.display().to_string());
    ctx.write_manifest(m, &args.out)
}
