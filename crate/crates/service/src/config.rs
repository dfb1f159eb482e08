//! Service configuration: JSON file plus `TRIP_*` environment overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trip_core::GroupId;

use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub bind: String,
    pub port: u16,
    pub ledger: Option<PathBuf>,
    /// Key file written by setup.
    pub keys: Option<PathBuf>,
    pub group: GroupId,
    /// Check-in ticket freshness window, seconds.
    pub t_delta: u64,
    /// Default envelope batch size.
    pub envelopes: usize,
    /// Idle seconds after which a session expires.
    pub idle_timeout: u64,
    /// Upper bound on trials for scenario requests.
    pub max_trials: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1".into(),
            port: 8080,
            ledger: None,
            keys: None,
            group: GroupId::ProductionCurve,
            t_delta: trip_protocol::officials::DEFAULT_T_DELTA,
            envelopes: 10,
            idle_timeout: 15 * 60,
            max_trials: 2_000,
        }
    }
}

impl ServiceConfig {
    /// Reads `file` if given, then applies process environment overrides.
    pub fn load(file: Option<&Path>) -> Result<Self, ServiceError> {
        let mut config = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?
            }
            None => Self::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        Ok(config)
    }

    /// Overrides from `TRIP_BIND`, `TRIP_PORT`, `TRIP_LEDGER`, `TRIP_KEYS`,
    /// `TRIP_GROUP`, `TRIP_T_DELTA`, `TRIP_ENVELOPES`, `TRIP_IDLE_TIMEOUT`.
    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ServiceError> {
        fn parse<T: std::str::FromStr>(name: &str, v: &str) -> Result<T, ServiceError> {
            v.trim().parse().map_err(|_| ServiceError::Config(format!("{name}: cannot parse {v:?}")))
        }
        if let Some(v) = var("TRIP_BIND") {
            self.bind = v;
        }
        if let Some(v) = var("TRIP_PORT") {
            self.port = parse("TRIP_PORT", &v)?;
        }
        if let Some(v) = var("TRIP_LEDGER") {
            self.ledger = Some(v.into());
        }
        if let Some(v) = var("TRIP_KEYS") {
            self.keys = Some(v.into());
        }
        if let Some(v) = var("TRIP_GROUP") {
            self.group = serde_json::from_value(serde_json::Value::String(v.clone()))
                .map_err(|_| ServiceError::Config(format!("TRIP_GROUP: unknown profile {v:?}")))?;
        }
        if let Some(v) = var("TRIP_T_DELTA") {
            self.t_delta = parse("TRIP_T_DELTA", &v)?;
        }
        if let Some(v) = var("TRIP_ENVELOPES") {
            self.envelopes = parse("TRIP_ENVELOPES", &v)?;
        }
        if let Some(v) = var("TRIP_IDLE_TIMEOUT") {
            self.idle_timeout = parse("TRIP_IDLE_TIMEOUT", &v)?;
        }
        Ok(())
    }
}
