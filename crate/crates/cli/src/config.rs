use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use valuescope_core::longform::IndexBase;
use valuescope_core::trueskill::TrueSkillParams;
use valuescope_gateway::http::{API_KEY_ENV, DEFAULT_ENDPOINT};
use valuescope_gateway::Mode;

use crate::args::{GlobalArgs, IndexBaseArg, ModeArg};
use crate::exit::Invalid;

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub endpoint: Option<String>,
    pub api_key_env: Option<String>,
    pub judge_model: Option<String>,
    pub subject_model: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub mode: Option<ModeArg>,
    pub concurrency: Option<usize>,
    pub requests_per_sec: Option<f64>,
    #[serde(default)]
    pub trueskill: TrueSkillOverrides,
    pub index_base: Option<IndexBaseArg>,
    pub compression_level: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrueSkillOverrides {
    pub mu0: Option<f64>,
    pub sigma0: Option<f64>,
    pub beta: Option<f64>,
    pub tau: Option<f64>,
    pub p_draw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub endpoint: String,
    pub api_key_env: String,
    pub judge_model: Option<String>,
    pub subject_model: Option<String>,
    pub cache_dir: Option<PathBuf>,
    #[serde(serialize_with = "display")]
    pub mode: Mode,
    pub concurrency: usize,
    pub requests_per_sec: f64,
    pub trueskill: TrueSkillParams,
    pub index_base: IndexBase,
    pub compression_level: u32,
}

fn display<S: serde::Serializer>(m: &Mode, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(m)
}

impl Config {
    pub fn resolve(flags: &GlobalArgs) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(p) => load_file(p)?,
            None => ConfigFile::default(),
        };
        let ts = TrueSkillParams::default();
        let mode = match flags.mode.or(file.mode).unwrap_or(ModeArg::Live) {
            ModeArg::Live => Mode::Live,
            ModeArg::Record => Mode::Record,
            ModeArg::Replay => Mode::Replay,
        };
        let cfg = Config {
            endpoint: flags
                .endpoint
                .clone()
                .or(file.endpoint)
                .unwrap_or_else(|| DEFAULT_ENDPOINT.to_string()),
            api_key_env: flags
                .api_key_env
                .clone()
                .or(file.api_key_env)
                .unwrap_or_else(|| API_KEY_ENV.to_string()),
            judge_model: flags.judge_model.clone().or(file.judge_model),
            subject_model: flags.subject_model.clone().or(file.subject_model),
            cache_dir: flags.cache_dir.clone().or(file.cache_dir),
            mode,
            concurrency: flags.concurrency.or(file.concurrency).unwrap_or(4),
            requests_per_sec: flags.requests_per_sec.or(file.requests_per_sec).unwrap_or(2.0),
            trueskill: TrueSkillParams {
                mu0: flags.mu0.or(file.trueskill.mu0).unwrap_or(ts.mu0),
                sigma0: flags.sigma0.or(file.trueskill.sigma0).unwrap_or(ts.sigma0),
                beta: flags.beta.or(file.trueskill.beta).unwrap_or(ts.beta),
                tau: flags.tau.or(file.trueskill.tau).unwrap_or(ts.tau),
                p_draw: flags.p_draw.or(file.trueskill.p_draw).unwrap_or(ts.p_draw),
            },
            index_base: match flags.index_base.or(file.index_base).unwrap_or(IndexBaseArg::One) {
                IndexBaseArg::One => IndexBase::One,
                IndexBaseArg::Zero => IndexBase::Zero,
            },
            compression_level: flags.compression_level.or(file.compression_level).unwrap_or(6),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> anyhow::Result<()> {
        if self.concurrency < 1 {
            bail!(Invalid("concurrency must be at least 1".into()));
        }
        if !(self.requests_per_sec > 0.0) {
            bail!(Invalid("requests_per_sec must be positive".into()));
        }
        if self.mode != Mode::Live && self.cache_dir.is_none() {
            bail!(Invalid(format!("{} mode requires --cache-dir", self.mode)));
        }
        if self.compression_level > 9 {
            bail!(Invalid(format!("compression level {} outside 0..=9", self.compression_level)));
        }
        self.trueskill.validate().map_err(|e| Invalid(e.to_string()))?;
        Ok(())
    }
}

fn load_file(path: &Path) -> anyhow::Result<ConfigFile> {
    let text = valuescope_core::io::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Invalid(format!("{}: {e}", path.display())))
        .with_context(|| format!("loading config {}", path.display()))
}
