//! Flat TOML configs merged with command-line flags.
//!
//! Precedence: flag > config file > `TURBCLOUD_SEED` (seed only) > built-in
//! default. Unknown keys and type mismatches are errors naming the key.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "TURBCLOUD_SEED";

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved<C> {
    pub config: C,
    /// Keys whose value came from a flag.
    pub overrides: Vec<String>,
    /// One of "flag", "config", "env", "default", or "none" for commands
    /// without a seed.
    pub seed_source: &'static str,
}

fn read_file(path: &Path, command: &str) -> CliResult<Map<String, Value>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let table: toml::Table = toml::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let Value::Object(mut map) = serde_json::to_value(table)? else {
        unreachable!("a TOML table maps to a JSON object")
    };
    if let Some(kind) = map.remove("experiment") {
        if kind.as_str() != Some(command) {
            return Err(CliError::config(format!(
                "key `experiment`: config is for {kind}, not `{command}`"
            )));
        }
    }
    Ok(map)
}

/// Builds the config of `command` from an optional file and the flag struct
/// `flags`, whose `None` fields mean "not given".
pub fn resolve<C, F>(command: &str, file: Option<&Path>, flags: &F) -> CliResult<Resolved<C>>
where
    C: DeserializeOwned + Serialize + Default,
    F: Serialize,
{
    let seeded = serde_json::to_value(C::default())?.get("seed").is_some();
    let mut merged = match file {
        Some(p) => read_file(p, command)?,
        None => Map::new(),
    };
    let from_file = merged.contains_key("seed");
    let Value::Object(flag_map) = serde_json::to_value(flags)? else {
        unreachable!("flag structs serialize to objects")
    };
    let mut overrides = Vec::new();
    for (k, v) in flag_map {
        if !v.is_null() {
            overrides.push(k.clone());
            merged.insert(k, v);
        }
    }
    let seed_source = if !seeded {
        "none"
    } else if overrides.iter().any(|k| k == "seed") {
        "flag"
    } else if from_file {
        "config"
    } else if let Ok(s) = std::env::var(SEED_ENV) {
        let seed: u64 = s
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("{SEED_ENV}: `{s}` is not a 64-bit unsigned seed")))?;
        merged.insert("seed".into(), Value::from(seed));
        "env"
    } else {
        "default"
    };
    let config = serde_path_to_error::deserialize(Value::Object(merged)).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::config(e.into_inner().to_string())
        } else {
            CliError::config(format!("key `{path}`: {}", e.into_inner()))
        }
    })?;
    Ok(Resolved {
        config,
        overrides,
        seed_source,
    })
}
