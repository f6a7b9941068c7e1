use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("environment variable {name}={value:?} is invalid")]
    Env { name: &'static str, value: String },
}

/// Service settings. Loaded from an optional TOML file, then overridden by
/// `SCREENING_*` environment variables.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub port: u16,
    /// Origin allowed to call the API from a browser, e.g. the UI dev server.
    pub cors_origin: Option<String>,
    /// Idle sessions are dropped after this many seconds.
    pub session_ttl_secs: u64,
    /// Append-only session journal; replayed on start-up when present.
    pub journal_path: Option<PathBuf>,
    /// Directory of built UI assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1".into(),
            port: 8080,
            cors_origin: None,
            session_ttl_secs: 24 * 60 * 60,
            journal_path: None,
            static_dir: None,
        }
    }
}

impl ServiceConfig {
    pub fn session_ttl(&self) -> Duration {
        Duration::from_secs(self.session_ttl_secs)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    /// File (if any) then process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        config.apply_env(|name| std::env::var(name).ok())?;
        Ok(config)
    }

    pub fn apply_env(
        &mut self,
        lookup: impl Fn(&str) -> Option<String>,
    ) -> Result<(), ConfigError> {
        if let Some(v) = lookup("SCREENING_BIND") {
            self.bind = v;
        }
        if let Some(v) = lookup("SCREENING_PORT") {
            self.port = v.parse().map_err(|_| ConfigError::Env {
                name: "SCREENING_PORT",
                value: v,
            })?;
        }
        if let Some(v) = lookup("SCREENING_CORS_ORIGIN") {
            self.cors_origin = Some(v);
        }
        if let Some(v) = lookup("SCREENING_SESSION_TTL_SECS") {
            self.session_ttl_secs = v.parse().map_err(|_| ConfigError::Env {
                name: "SCREENING_SESSION_TTL_SECS",
                value: v,
            })?;
        }
        if let Some(v) = lookup("SCREENING_JOURNAL") {
            self.journal_path = Some(v.into());
        }
        if let Some(v) = lookup("SCREENING_STATIC_DIR") {
            self.static_dir = Some(v.into());
        }
        Ok(())
    }
}
