use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use valuescope_core::consistency::Attribute;

#[derive(Debug, Parser)]
#[command(name = "valuescope", version, about = "Measure value preferences of language models and how consistent they are")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags mirroring the config file; flags win over `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Chat-completions base URL.
    #[arg(long, global = true, env = "VALUESCOPE_ENDPOINT")]
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the API key.
    #[arg(long, global = true)]
    pub api_key_env: Option<String>,
    #[arg(long, global = true)]
    pub judge_model: Option<String>,
    #[arg(long, global = true)]
    pub subject_model: Option<String>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Maximum number of requests in flight.
    #[arg(long, global = true)]
    pub concurrency: Option<usize>,
    #[arg(long, global = true)]
    pub requests_per_sec: Option<f64>,
    #[arg(long, global = true)]
    pub mu0: Option<f64>,
    #[arg(long, global = true)]
    pub sigma0: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub p_draw: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub index_base: Option<IndexBaseArg>,
    #[arg(long, global = true)]
    pub compression_level: Option<u32>,
    /// Where to write the run manifest (default: next to the main output).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Live,
    Record,
    Replay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexBaseArg {
    One,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionArg {
    Implicit,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttributeArg {
    SpecificityPath,
    SpecificityAttr,
    CompressionRatio,
}

impl From<AttributeArg> for Attribute {
    fn from(a: AttributeArg) -> Self {
        match a {
            AttributeArg::SpecificityPath => Attribute::SpecificityPath,
            AttributeArg::SpecificityAttr => Attribute::SpecificityAttr,
            AttributeArg::CompressionRatio => Attribute::CompressionRatio,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorpusKind {
    /// One-against-one dilemmas from shuffled round robins.
    RoundRobin,
    /// Random disjoint value sets of up to `--max-set` values per side.
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check dilemma and question files against a value list.
    Validate(ValidateArgs),
    /// Query the subject model for short-form decisions or long-form responses.
    Generate(GenerateArgs),
    /// Extract arguments and tag them with values (and optionally specificity).
    Annotate(AnnotateArgs),
    /// TrueSkill beliefs from short-form decisions.
    PrefsShort(PrefsShortArgs),
    /// Normalized-position preferences from annotated long-form responses.
    PrefsLong(PrefsLongArgs),
    /// Per-value specificity and compression ratio.
    Metrics(MetricsArgs),
    /// Correlations, sample consistency and decision agreement.
    Consistency(ConsistencyArgs),
    /// Aggregate fine-grained preferences into a coarse framework.
    Rollup(RollupArgs),
    /// Write a synthetic corpus from a planted agent.
    Synth(SynthArgs),
    /// Join preference, metric and consistency files into CSV tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub values: PathBuf,
    #[arg(long)]
    pub dilemmas: Option<PathBuf>,
    #[arg(long)]
    pub questions: Option<PathBuf>,
    /// JSON validation report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Dilemmas for short-form decisions.
    #[arg(long, conflicts_with = "questions", required_unless_present = "questions")]
    pub dilemmas: Option<PathBuf>,
    /// Open questions for long-form responses.
    #[arg(long)]
    pub questions: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "implicit")]
    pub condition: ConditionArg,
    /// Arguments requested per long-form response.
    #[arg(long, default_value_t = 10)]
    pub k: u32,
    #[arg(long, default_value_t = 1)]
    pub samples: u32,
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    /// JSON list of `{input, output}` demonstrations prepended to each prompt.
    #[arg(long)]
    pub few_shot: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long)]
    pub values: PathBuf,
    /// Also judge path- and attribute-based specificity.
    #[arg(long)]
    pub specificity: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PrefsShortArgs {
    #[arg(long)]
    pub dilemmas: PathBuf,
    #[arg(long)]
    pub decisions: PathBuf,
    /// Reject dilemmas with values outside this list.
    #[arg(long)]
    pub values: Option<PathBuf>,
    /// Belief snapshot.
    #[arg(long)]
    pub out: PathBuf,
    /// Preference vector (each value's mean).
    #[arg(long)]
    pub prefs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PrefsLongArgs {
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long)]
    pub arguments: PathBuf,
    /// Keep only responses of this model.
    #[arg(long)]
    pub model: Option<String>,
    /// Keep only responses with this sample index.
    #[arg(long)]
    pub sample: Option<u32>,
    /// Requested k recorded on the vector (default: the responses' k).
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long)]
    pub arguments: PathBuf,
    #[arg(long)]
    pub model: Option<String>,
    /// `value,n_arguments,mean_spec_path,mean_spec_attr,compression_ratio`
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[arg(long, requires = "b")]
    pub a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "pearson")]
    pub statistic: StatisticArg,
    /// Preference vectors from repeated samples; reports mean pairwise Spearman.
    #[arg(long, num_args = 2..)]
    pub samples: Vec<PathBuf>,
    #[arg(long, requires = "explicit")]
    pub implicit: Option<PathBuf>,
    #[arg(long, requires = "implicit")]
    pub explicit: Option<PathBuf>,
    /// Attribute table from `metrics`, correlated against `--prefs`.
    #[arg(long, requires = "prefs")]
    pub attrs: Option<PathBuf>,
    #[arg(long, requires = "attrs")]
    pub prefs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "specificity-path")]
    pub attribute: AttributeArg,
    /// Pair description for every row written.
    #[arg(long)]
    pub label: Option<String>,
    /// `pair,statistic,value,n_common`
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RollupArgs {
    #[arg(long)]
    pub prefs: PathBuf,
    #[arg(long)]
    pub framework: PathBuf,
    /// Reject frameworks naming values outside this list.
    #[arg(long)]
    pub values: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 20)]
    pub n_values: usize,
    #[arg(long, default_value_t = 500)]
    pub n_dilemmas: usize,
    #[arg(long, value_enum, default_value = "round-robin")]
    pub corpus: CorpusKind,
    #[arg(long, default_value_t = 3)]
    pub max_set: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standard deviation of the decision and ordering noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Plant all-equal weights instead of a strict order.
    #[arg(long)]
    pub null: bool,
    #[arg(long, default_value_t = 10)]
    pub k: u32,
    #[arg(long, default_value_t = 1)]
    pub samples: u32,
    /// Attach specificity that falls with planted weight, with this noise.
    #[arg(long)]
    pub anticorrelated_specificity: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON plan listing each model's files.
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}
