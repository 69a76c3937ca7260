use valuescope_core::io::{save_document, write_atomic, write_jsonl};
use valuescope_core::synth::{
    agent_decide, agent_longform, null_agent, ordered_weights, plant_anticorrelated_specificity, round_robin_corpus,
    synth_corpus, PlantedAgent,
};
use valuescope_core::{AnnotatedResponse, ArgumentRecord, ResponseRecord};

use crate::args::{CorpusKind, SynthArgs};
use crate::common::Ctx;

fn response_record(r: &AnnotatedResponse) -> ResponseRecord {
    ResponseRecord {
        response_id: r.response_id.clone(),
        source_record_id: r.source_record_id.clone(),
        model_id: r.model_id.clone(),
        mode: "long_form".into(),
        k: r.k_requested,
        temperature: r.temperature,
        sample_idx: r.sample_idx,
        text: r.full_text.clone(),
    }
}

pub fn run(ctx: &Ctx, args: &SynthArgs) -> anyhow::Result<()> {
    let weights = ordered_weights(args.n_values, 1.0);
    let values: Vec<String> = weights.keys().cloned().collect();
    let agent = if args.null {
        null_agent(&values, args.noise, args.seed)
    } else {
        PlantedAgent {
            weights,
            noise_sigma: args.noise,
            seed: args.seed,
        }
    };
    let corpus = match args.corpus {
        CorpusKind::RoundRobin => round_robin_corpus(args.n_dilemmas, &values, args.seed)?,
        CorpusKind::Random => synth_corpus(args.n_dilemmas, &values, args.max_set, args.seed)?,
    };
    let decisions = corpus.iter().map(|r| agent_decide(&agent, r)).collect::<Result<Vec<_>, _>>()?;
    let mut responses = Vec::new();
    for r in &corpus {
        for s in 0..args.samples {
            responses.push(agent_longform(&agent, r, args.k, s)?);
        }
    }
    if let Some(noise) = args.anticorrelated_specificity {
        plant_anticorrelated_specificity(&agent, &mut responses, noise)?;
    }
    let arguments: Vec<ArgumentRecord> = responses.iter().flat_map(|r| r.to_argument_records()).collect();

    let dir = &args.out_dir;
    let mut values_text = values.join("\n");
    values_text.push('\n');
    write_atomic(&dir.join("values.txt"), values_text.as_bytes())?;
    write_jsonl(&dir.join("dilemmas.jsonl"), &corpus)?;
    write_jsonl(&dir.join("decisions.jsonl"), &decisions)?;
    write_jsonl(&dir.join("responses.jsonl"), &responses.iter().map(response_record).collect::<Vec<_>>())?;
    write_jsonl(&dir.join("arguments.jsonl"), &arguments)?;
    save_document(&dir.join("planted.json"), &agent.planted_vector()?)?;

    let mut m = ctx.manifest("synth");
    m.k = Some(args.k);
    m.n_samples = Some(args.samples);
    m.setting("n_values", args.n_values)
        .setting("n_dilemmas", args.n_dilemmas)
        .setting("corpus", format!("{:?}", args.corpus))
        .setting("max_set", args.max_set)
        .setting("seed", args.seed)
        .setting("noise", args.noise)
        .setting("null", args.null)
        .setting("anticorrelated_specificity", args.anticorrelated_specificity);
    for f in ["values.txt", "dilemmas.jsonl", "decisions.jsonl", "responses.jsonl", "arguments.jsonl", "planted.json"] {
        m.output(f);
    }
    ctx.write_manifest(m, dir)
}
