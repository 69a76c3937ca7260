use valuescope_core::io::{load_questions, read_jsonl, write_jsonl};
use valuescope_core::{Condition, DilemmaRecord};
use valuescope_gateway::ops::Generator;
use valuescope_gateway::{FewShot, TemplateId};

use crate::args::{ConditionArg, GenerateArgs};
use crate::common::{read_input, record_templates, Ctx};

pub fn run(ctx: &Ctx, args: &GenerateArgs) -> anyhow::Result<()> {
    let model = ctx.require_model("subject")?;
    let gateway = ctx.gateway()?;
    let few_shot: Vec<FewShot> = match &args.few_shot {
        Some(p) => serde_json::from_str(&read_input(p)?)?,
        None => Vec::new(),
    };
    let generator = Generator {
        gateway: &gateway,
        endpoint: ctx.config.endpoint.clone(),
        model_id: model.clone(),
        temperature: args.temperature,
        max_tokens: args.max_tokens,
        few_shot,
    };
    let mut m = ctx.manifest("generate");
    m.model_id = Some(model);
    m.mode = Some(gateway.mode().to_string());
    m.temperature = Some(args.temperature);
    m.n_samples = Some(args.samples);
    if let Some(p) = &args.few_shot {
        m.input("few_shot", read_input(p)?.as_bytes());
    }
    let samples: Vec<u32> = (0..args.samples).collect();

    if let Some(path) = &args.dilemmas {
        m.input("dilemmas", read_input(path)?.as_bytes());
        let records: Vec<DilemmaRecord> = read_jsonl(path)?.records;
        let condition = match args.condition {
            ConditionArg::Implicit => Condition::Implicit,
            ConditionArg::Explicit => Condition::Explicit,
        };
        let template = match condition {
            Condition::Implicit => TemplateId::ShortForm,
            Condition::Explicit => TemplateId::ShortFormWithValues,
        };
        record_templates(&mut m, &[template]);
        m.setting("condition", condition);
        let jobs: Vec<(&DilemmaRecord, u32)> = records.iter().flat_map(|r| samples.iter().map(move |&s| (r, s))).collect();
        let decisions = ctx
            .bounded_map(&jobs, |(r, s)| generator.short_form(r, condition, *s))?
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        let unparsed = decisions.iter().filter(|d| d.choice.is_none()).count();
        if unparsed > 0 {
            log::warn!("{unparsed} answer(s) did not match the expected grammar");
        }
        m.setting("unparsed_answers", unparsed);
        write_jsonl(&args.out, &decisions)?;
    } else if let Some(path) = &args.questions {
        m.input("questions", read_input(path)?.as_bytes());
        let questions = load_questions(path)?.records;
        record_templates(&mut m, &[TemplateId::LongForm]);
        m.k = Some(args.k);
        let jobs: Vec<(usize, u32)> = (0..questions.len()).flat_map(|q| samples.iter().map(move |&s| (q, s))).collect();
        let responses = ctx
            .bounded_map(&jobs, |&(q, s)| generator.long_form(&questions[q].id, &questions[q].question, args.k, s))?
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        write_jsonl(&args.out, &responses)?;
    }
    m.setting("network_calls", gateway.network_calls());
    m.output(args.out.display().to_string());
    ctx.write_manifest(m, &args.out)
}
