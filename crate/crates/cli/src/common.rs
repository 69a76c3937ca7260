use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chrono::{DateTime, SecondsFormat, Utc};
use rayon::prelude::*;
use valuescope_core::io::{read_to_string, save_document};
use valuescope_core::manifest::RunManifest;
use valuescope_core::ValueSystem;
use valuescope_gateway::http::{HttpBackend, HttpConfig};
use valuescope_gateway::{Cache, ChatBackend, Gateway, Mode, TemplateId};

use crate::config::Config;
use crate::exit::Invalid;

/// Builds the backend used outside replay mode. Tests and fixture scripts
/// substitute their own.
pub type BackendFactory = dyn Fn(&Config) -> anyhow::Result<Box<dyn ChatBackend>> + Send + Sync;

pub struct Ctx<'a> {
    pub config: Config,
    pub created_at: String,
    pub manifest_path: Option<PathBuf>,
    pub backend: Option<&'a BackendFactory>,
}

/// `SOURCE_DATE_EPOCH` when set, else the current time, as RFC 3339.
pub fn timestamp() -> anyhow::Result<String> {
    let at = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) => {
            let secs: i64 = s
                .trim()
                .parse()
                .map_err(|_| Invalid(format!("SOURCE_DATE_EPOCH `{s}` is not an integer")))?;
            DateTime::<Utc>::from_timestamp(secs, 0).ok_or_else(|| Invalid(format!("SOURCE_DATE_EPOCH {secs} out of range")))?
        }
        Err(_) => Utc::now(),
    };
    Ok(at.to_rfc3339_opts(SecondsFormat::Secs, true))
}

pub fn read_input(path: &Path) -> anyhow::Result<String> {
    Ok(read_to_string(path)?)
}

pub fn load_values(path: &Path) -> anyhow::Result<(ValueSystem, String)> {
    let text = read_input(path)?;
    let system = ValueSystem::parse(&text).with_context(|| format!("value list {}", path.display()))?;
    Ok((system, text))
}

pub fn file_label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

impl Ctx<'_> {
    pub fn manifest(&self, command: &str) -> RunManifest {
        let mut m = RunManifest::new(command);
        m.setting("config", &self.config);
        m
    }

    /// Finalizes and writes `m` to `--manifest` or `<primary>.manifest.json`.
    pub fn write_manifest(&self, m: RunManifest, primary: &Path) -> anyhow::Result<()> {
        let path = self.manifest_path.clone().unwrap_or_else(|| {
            if primary.extension().is_none() && !primary.is_file() {
                primary.join("manifest.json")
            } else {
                let mut s = primary.as_os_str().to_owned();
                s.push(".manifest.json");
                PathBuf::from(s)
            }
        });
        save_document(&path, &m.finish(self.created_at.clone())?)?;
        Ok(())
    }

    pub fn gateway(&self) -> anyhow::Result<Gateway> {
        let cfg = &self.config;
        let cache = match &cfg.cache_dir {
            Some(dir) => Some(Cache::open(dir)?),
            None => None,
        };
        let backend = if cfg.mode == Mode::Replay {
            None
        } else if let Some(factory) = self.backend {
            Some(factory(cfg)?)
        } else {
            let api_key = std::env::var(&cfg.api_key_env).ok();
            if api_key.is_none() {
                log::warn!("{} is not set; requests go out without a key", cfg.api_key_env);
            }
            Some(Box::new(HttpBackend::new(HttpConfig {
                api_key,
                requests_per_sec: cfg.requests_per_sec,
                ..HttpConfig::default()
            })?) as Box<dyn ChatBackend>)
        };
        Ok(Gateway::new(cfg.mode, cache, backend)?.with_created_at(self.created_at.clone()))
    }

    pub fn require_model(&self, which: &str) -> anyhow::Result<String> {
        let m = match which {
            "judge" => &self.config.judge_model,
            _ => &self.config.subject_model,
        };
        match m {
            Some(m) => Ok(m.clone()),
            None => bail!(Invalid(format!("--{which}-model is required"))),
        }
    }

    /// Maps `f` over `items` on at most `concurrency` threads, keeping order.
    pub fn bounded_map<T, R, F>(&self, items: &[T], f: F) -> anyhow::Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.concurrency)
            .build()
            .context("building worker pool")?;
        Ok(pool.install(|| items.par_iter().map(&f).collect()))
    }
}

pub fn record_templates(m: &mut RunManifest, ids: &[TemplateId]) {
    for id in ids {
        m.template(id.as_str(), id.body());
    }
}
