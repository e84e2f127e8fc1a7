use std::collections::BTreeMap;
use std::path::Path;

use parisian_core::{DerivedConstants, ModelParams};
use serde::{Deserialize, Serialize};

use crate::args::Command;
use crate::error::CliError;

pub const TOOL: &str = "parisian";

/// Provenance attached to every output: enough to re-run the command and get the same bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub params: ModelParams,
    pub constants: DerivedConstants,
    pub seeds: Vec<u64>,
    /// Wall-clock seconds per phase; only present with `--timings`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl RunManifest {
    pub fn new(command: Command, params: ModelParams, seeds: Vec<u64>) -> Result<Self, CliError> {
        let params = params.validate()?;
        let constants = DerivedConstants::new(&params)?;
        Ok(Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            params,
            constants,
            seeds,
            timings: None,
        })
    }

    /// Reads a manifest from a sidecar file or from a JSON output that embeds one.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: not JSON: {e}", path.display())))?;
        if let Some(inner) = doc.get_mut("manifest") {
            doc = inner.take();
        }
        let m: Self = serde_json::from_value(doc)
            .map_err(|e| CliError::Input(format!("{}: not a manifest: {e}", path.display())))?;
        if m.tool != TOOL {
            return Err(CliError::Input(format!("{}: written by '{}', not {TOOL}", path.display(), m.tool)));
        }
        Ok(m)
    }
}

/// Collects phase timings when asked to, and nothing otherwise.
pub struct Stopwatch {
    enabled: bool,
    start: std::time::Instant,
    laps: BTreeMap<String, f64>,
}

impl Stopwatch {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            start: std::time::Instant::now(),
            laps: BTreeMap::new(),
        }
    }

    pub fn lap(&mut self, name: &str) {
        if self.enabled {
            let now = std::time::Instant::now();
            self.laps.insert(format!("{name}_s"), (now - self.start).as_secs_f64());
            self.start = now;
        }
    }

    pub fn finish(self, manifest: &mut RunManifest) {
        if self.enabled {
            manifest.timings = Some(self.laps);
        }
    }
}
