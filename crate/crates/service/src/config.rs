use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use blurcap_core::{Alphabet, ChallengeSpec};
use serde::{Deserialize, Serialize};

pub const ENV_LISTEN: &str = "BLURCAP_LISTEN";
pub const ENV_TTL_SECS: &str = "BLURCAP_TTL_SECS";
pub const TRIAL_TRANSCRIPT_FILE: &str = "trial.jsonl";

/// Service settings, read from a JSON file. Missing fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub ttl_secs: u64,
    pub default_radius: f64,
    /// Largest radius a client may request.
    pub max_radius: f64,
    pub scale: usize,
    pub padding: usize,
    pub exclude_confusables: bool,
    /// Whether a blank trial answer is recorded (scored as unreadable) or
    /// rejected with 400.
    pub allow_empty_answers: bool,
    /// Default output directory for `gen` and `eval run`.
    pub corpus_dir: PathBuf,
    /// The human-trial transcript lives here.
    pub transcript_dir: PathBuf,
    /// Default adapter list for `eval run`.
    pub adapters_path: Option<PathBuf>,
    /// Built trial UI, served under `/trial/`.
    pub static_dir: Option<PathBuf>,
    /// Allowed CORS origin; any origin when unset.
    pub trial_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            ttl_secs: 300,
            default_radius: 2.0,
            max_radius: 8.0,
            scale: 4,
            padding: 8,
            exclude_confusables: false,
            allow_empty_answers: true,
            corpus_dir: PathBuf::from("corpus"),
            transcript_dir: PathBuf::from("transcripts"),
            adapters_path: None,
            static_dir: None,
            trial_origin: None,
        }
    }
}

impl ServiceConfig {
    pub fn from_json(json: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(json).context("invalid service config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the file, then applies environment overrides.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> anyhow::Result<()> {
        if let Some(listen) = get(ENV_LISTEN) {
            self.listen = listen.parse().with_context(|| format!("{ENV_LISTEN}={listen}"))?;
        }
        if let Some(ttl) = get(ENV_TTL_SECS) {
            self.ttl_secs = ttl.parse().with_context(|| format!("{ENV_TTL_SECS}={ttl}"))?;
        }
        self.validate()
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.ttl_secs == 0 {
            bail!("ttl_secs must be positive");
        }
        if !(self.default_radius >= 0.0 && self.default_radius.is_finite()) {
            bail!("default_radius must be non-negative");
        }
        if !(self.max_radius >= self.default_radius && self.max_radius.is_finite()) {
            bail!("max_radius must be finite and at least default_radius");
        }
        if self.scale == 0 {
            bail!("scale must be at least 1");
        }
        Ok(())
    }

    pub fn ttl(&self) -> Duration {
        Duration::from_secs(self.ttl_secs)
    }

    pub fn transcript_path(&self) -> PathBuf {
        self.transcript_dir.join(TRIAL_TRANSCRIPT_FILE)
    }

    /// Rendering template for live challenges; seed and radius are filled
    /// per request.
    pub fn template(&self) -> ChallengeSpec {
        ChallengeSpec {
            seed: 0,
            radius: self.default_radius,
            scale: self.scale,
            padding: self.padding,
            alphabet: if self.exclude_confusables {
                Alphabet::without_confusables()
            } else {
                Alphabet::alphanumeric()
            },
        }
    }
}
