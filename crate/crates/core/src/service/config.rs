//! Service configuration: a TOML key-value file with environment overrides
//! for the listen address and storage path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dedup::{DEFAULT_GRAM_SIZE, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};

pub const ENV_LISTEN: &str = "REQFORUM_LISTEN";
pub const ENV_STORAGE: &str = "REQFORUM_STORAGE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupSettings {
    pub gram_size: usize,
    pub threshold: f64,
}

impl Default for DedupSettings {
    fn default() -> Self {
        Self {
            gram_size: DEFAULT_GRAM_SIZE,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Activity points and reputation increments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scoring {
    pub post: u64,
    pub vote: u64,
    pub response: u64,
    pub accepted_answer_reputation: u64,
    pub locked_reputation: u64,
}

impl Default for Scoring {
    fn default() -> Self {
        Self {
            post: 1,
            vote: 1,
            response: 1,
            accepted_answer_reputation: 1,
            locked_reputation: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub listen: String,
    /// Journal file; `None` keeps everything in memory.
    pub storage: Option<PathBuf>,
    /// Open new topics for suggestions right after creation.
    pub auto_open: bool,
    pub session_ttl_secs: u64,
    pub dedup: DedupSettings,
    pub scoring: Scoring,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".to_owned(),
            storage: None,
            auto_open: false,
            session_ttl_secs: 3600,
            dedup: DedupSettings::default(),
            scoring: Scoring::default(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Config =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_owned()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path`, applies environment overrides, then validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let mut config: Config =
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {}", path.display(), e.message())))?;
        config.apply_env();
        config.validate()?;
        Ok(config)
    }

    pub fn apply_env(&mut self) {
        if let Ok(listen) = std::env::var(ENV_LISTEN) {
            self.listen = listen;
        }
        if let Ok(storage) = std::env::var(ENV_STORAGE) {
            self.storage = Some(PathBuf::from(storage));
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.dedup.threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "dedup.threshold must be in (0, 1], got {t}"
            )));
        }
        if self.dedup.gram_size < 1 {
            return Err(Error::InvalidConfig("dedup.gram_size must be at least 1".into()));
        }
        if self.session_ttl_secs == 0 {
            return Err(Error::InvalidConfig("session_ttl_secs must be positive".into()));
        }
        Ok(())
    }
}
