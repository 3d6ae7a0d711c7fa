//! Service configuration, read from TOML with an environment override for
//! the listen port.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use expertfind_core::{FusionMethod, PruneCandidates, Regime};
use serde::Deserialize;

use crate::ServiceError;

/// Environment variable that replaces the port of `listen`.
pub const PORT_ENV: &str = "EXPERTFIND_PORT";

const DEFAULT_TTL_SECS: u64 = 24 * 60 * 60;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    /// Index artifact written by `build-index`.
    pub index: PathBuf,
    /// Word vectors; required when the index carries the wmd regime.
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    /// Regime used when a query does not name one. Defaults to the best
    /// regime the index supports.
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default = "default_fusion")]
    pub fusion: FusionMethod,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_listen")]
    pub listen: SocketAddr,
    /// JSON-lines verdict log. Verdicts are kept in memory only when unset.
    #[serde(default)]
    pub feedback_log: Option<PathBuf>,
    #[serde(default = "default_ttl")]
    pub session_ttl_secs: u64,
    #[serde(default)]
    pub prune_candidates: PruneCandidates,
}

fn default_fusion() -> FusionMethod {
    FusionMethod::ReciprocalRank
}

fn default_top_k() -> usize {
    expertfind_core::expertrank::DEFAULT_TOP_K
}

fn default_listen() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}

fn default_ttl() -> u64 {
    DEFAULT_TTL_SECS
}

impl ServiceConfig {
    /// Config with defaults for everything but the index path.
    pub fn new(index: impl Into<PathBuf>) -> Self {
        Self {
            index: index.into(),
            embeddings: None,
            regime: None,
            fusion: default_fusion(),
            top_k: default_top_k(),
            listen: default_listen(),
            feedback_log: None,
            session_ttl_secs: DEFAULT_TTL_SECS,
            prune_candidates: PruneCandidates::default(),
        }
    }

    /// Parses TOML. Relative paths are resolved against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self, ServiceError> {
        let mut config: Self =
            toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        if let Some(base) = base {
            let resolve = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            resolve(&mut config.index);
            if let Some(p) = config.embeddings.as_mut() {
                resolve(p);
            }
            if let Some(p) = config.feedback_log.as_mut() {
                resolve(p);
            }
        }
        Ok(config)
    }

    /// Reads the file, applies the port override and validates.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text, path.parent())?;
        config.apply_port_override(std::env::var(PORT_ENV).ok().as_deref())?;
        config.validate()?;
        Ok(config)
    }

    pub fn apply_port_override(&mut self, port: Option<&str>) -> Result<(), ServiceError> {
        if let Some(port) = port {
            let port: u16 = port
                .trim()
                .parse()
                .map_err(|_| ServiceError::Config(format!("{PORT_ENV}={port:?} is not a port")))?;
            self.listen.set_port(port);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.top_k == 0 {
            return Err(ServiceError::Config("top_k must be at least 1".into()));
        }
        if !self.index.is_file() {
            return Err(ServiceError::MissingFile(self.index.clone()));
        }
        if let Some(p) = &self.embeddings {
            if !p.is_file() {
                return Err(ServiceError::MissingFile(p.clone()));
            }
        }
        Ok(())
    }

    pub fn session_ttl(&self) -> Duration {
        Duration::from_secs(self.session_ttl_secs)
    }
}
