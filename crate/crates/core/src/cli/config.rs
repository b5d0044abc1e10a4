//! JSON run configuration.
//!
//! Only `width` and `height` are required. Unknown keys are rejected so a
//! typo never silently falls back to a default.

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::agent::{AgentParams, PolicyMode};
use crate::engine::{SimConfig, DEFAULT_BIN_WIDTH, DEFAULT_MAX_TICKS};
use crate::gridworld::{GridError, GridWorld, Position, RefugeRect};

pub const DEFAULT_REFUGE: RefugeRect = RefugeRect::new(0, 0, 4, 4);
pub const DEFAULT_START: Position = Position::new(1, 1);
pub const DEFAULT_SEED: u64 = 42;

const KNOWN_KEYS: &[&str] = &[
    "width",
    "height",
    "refuge",
    "start",
    "fear_initial",
    "fear_decay",
    "w_explore",
    "w_fear",
    "mode",
    "bin_width",
    "max_ticks",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },
}

fn invalid(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::Validation {
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn field<T: DeserializeOwned>(
    map: &Map<String, Value>,
    key: &str,
) -> Result<Option<T>, ConfigError> {
    map.get(key)
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| invalid(key, e)))
        .transpose()
}

pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(ConfigError::Parse(
            "top-level value must be an object".into(),
        ));
    };
    if let Some(key) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(ConfigError::UnknownKey(key.clone()));
    }

    let width: usize = field(&map, "width")?.ok_or_else(|| invalid("width", "required"))?;
    let height: usize = field(&map, "height")?.ok_or_else(|| invalid("height", "required"))?;
    let refuge = field(&map, "refuge")?.unwrap_or(DEFAULT_REFUGE);
    let start = field::<(usize, usize)>(&map, "start")?
        .map(Position::from)
        .unwrap_or(DEFAULT_START);

    let world = GridWorld::new(width, height, refuge, start).map_err(|e| {
        let key = match e {
            GridError::EmptyGrid { width: 0, .. } => "width",
            GridError::EmptyGrid { .. } => "height",
            GridError::RefugeOutOfBounds(_) | GridError::NoArena => "refuge",
            GridError::StartOutsideRefuge(_) => "start",
        };
        invalid(key, e)
    })?;

    let defaults = AgentParams::default();
    let agent = AgentParams {
        fear_initial: field(&map, "fear_initial")?.unwrap_or(defaults.fear_initial),
        fear_decay: field(&map, "fear_decay")?.unwrap_or(defaults.fear_decay),
        w_explore: field(&map, "w_explore")?.unwrap_or(defaults.w_explore),
        w_fear: field(&map, "w_fear")?.unwrap_or(defaults.w_fear),
        mode: field::<PolicyMode>(&map, "mode")?.unwrap_or(defaults.mode),
    };
    agent.validate().map_err(|e| invalid(e.field, &e))?;

    let bin_width = field(&map, "bin_width")?.unwrap_or(DEFAULT_BIN_WIDTH);
    if bin_width == 0 {
        return Err(invalid("bin_width", "must be at least 1"));
    }
    let max_ticks = field(&map, "max_ticks")?.unwrap_or(DEFAULT_MAX_TICKS);
    if max_ticks == 0 {
        return Err(invalid("max_ticks", "must be at least 1"));
    }

    Ok(SimConfig {
        world,
        agent,
        bin_width,
        max_ticks,
        seed: field(&map, "seed")?.unwrap_or(DEFAULT_SEED),
    })
}
