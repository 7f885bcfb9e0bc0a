//! Merging a JSON config file under command-line flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub fn load(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Config(format!("{}: config must be a JSON object", path.display()))),
        Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
    }
}

/// Flags that were given (non-null, and `true` for switches) replace config values.
/// Config keys that are not options of the command are rejected.
pub fn merge<T>(flags: &T, config: Option<&Map<String, Value>>) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned + Default,
{
    let Some(config) = config else {
        return Ok(clone_via_json(flags));
    };
    let known = to_map(&T::default());
    if let Some(unknown) = config.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::Config(format!("unknown config key {unknown:?}")));
    }
    let mut merged = config.clone();
    for (key, value) in to_map(flags) {
        if !matches!(value, Value::Null | Value::Bool(false)) {
            merged.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("config: {e}")))
}

fn to_map<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v).expect("arguments serialize") {
        Value::Object(m) => m,
        _ => unreachable!("argument structs serialize to objects"),
    }
}

fn clone_via_json<T: Serialize + DeserializeOwned>(v: &T) -> T {
    serde_json::from_value(serde_json::to_value(v).expect("arguments serialize")).expect("round trip")
}
