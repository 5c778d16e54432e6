use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mpa::SolverConfig;
use crate::problem::InstanceConfig;

/// Instance plus solver settings, as read from a config or manifest file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub instance: InstanceConfig,
    pub solver: SolverConfig,
}

/// Keys a manifest carries besides `instance` and `solver`.
const MANIFEST_KEYS: [&str; 6] = ["version", "seed", "started_at", "finished_at", "outputs", "exit_code"];

/// Accepts a bare instance object, `{"instance": …, "solver": …}`, or a
/// manifest written by a previous run. A top-level `seed` overrides
/// `solver.seed`.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Object(mut map) = value else {
        return Err(Error::Config("config must be a JSON object".into()));
    };
    if !map.contains_key("instance") {
        let instance: InstanceConfig = serde_json::from_value(Value::Object(map))?;
        return Ok(RunConfig {
            instance,
            solver: SolverConfig::default(),
        });
    }
    let instance: InstanceConfig = serde_json::from_value(map.remove("instance").unwrap_or_default())?;
    let mut solver: SolverConfig = match map.remove("solver") {
        Some(v) => serde_json::from_value(v)?,
        None => SolverConfig::default(),
    };
    if let Some(seed) = map.remove("seed") {
        solver.seed = seed
            .as_u64()
            .ok_or_else(|| Error::Config(format!("seed must be a non-negative integer, got {seed}")))?;
    }
    if let Some(key) = map.keys().find(|k| !MANIFEST_KEYS.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown top-level key `{key}`")));
    }
    Ok(RunConfig { instance, solver })
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_run_config(&text)
}
