use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything needed to re-run a command. Output paths are not recorded, so
/// a replay prints to stdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    /// `args` must serialize to a flat JSON object whose keys are the long
    /// flag names in snake case.
    pub fn new<A: Serialize>(command: &str, args: &A, seed: u64) -> Result<Self, CliError> {
        let value = serde_json::to_value(args)?;
        let object = value
            .as_object()
            .ok_or_else(|| CliError::Failure("arguments are not a flat record".into()))?;
        let mut parameters = BTreeMap::new();
        for (key, v) in object {
            let text = match v {
                serde_json::Value::Null => continue,
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|i| {
                        i.as_str()
                            .map(str::to_owned)
                            .unwrap_or_else(|| i.to_string())
                    })
                    .collect::<Vec<_>>()
                    .join(" "),
                other => other.to_string(),
            };
            parameters.insert(key.clone(), text);
        }
        Ok(RunManifest {
            command: command.to_owned(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }

    /// Command line equivalent to the recorded run.
    pub fn argv(&self) -> Vec<String> {
        let mut argv = vec!["bmhull".to_owned(), self.command.clone()];
        for (key, value) in &self.parameters {
            match (key.as_str(), value.as_str()) {
                ("names", names) => argv.extend(names.split_whitespace().map(str::to_owned)),
                (_, "false") => {}
                (k, "true") => argv.push(format!("--{}", k.replace('_', "-"))),
                (k, v) => {
                    argv.push(format!("--{}", k.replace('_', "-")));
                    argv.push(v.to_owned());
                }
            }
        }
        argv
    }
}

/// Loads a manifest from disk. Accepts either a bare manifest or any JSON
/// object carrying one under a `manifest` key (such as a simulate summary).
pub fn load(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("manifest is not JSON: {e}")))?;
    let inner = value.get("manifest").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| CliError::Usage(format!("malformed manifest: {e}")))
}

pub fn replay_argv(path: &Path) -> Result<Vec<String>, CliError> {
    Ok(load(path)?.argv())
}

/// Writes `manifest` as pretty JSON next to `output`.
pub fn write_sidecar(output: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    std::fs::write(&name, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(())
}
