use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::args::{Command, Global};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Echo {
    /// Canonical configuration text of the input, when there is one.
    pub config: Option<String>,
    pub command: Command,
    pub flags: Global,
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub format: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub mode: Option<String>,
    pub echo: Echo,
    pub verdicts: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub constants: BTreeMap<String, Value>,
    pub artifacts: Vec<Artifact>,
    /// Verdicts that came out unknown or undetermined.
    pub undecided: Vec<String>,
    pub warnings: Vec<String>,
    pub timing_ms: f64,
}

impl RunReport {
    pub fn new(command: &Command, flags: &Global) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "selfaffine",
            version: env!("CARGO_PKG_VERSION"),
            command: command.name(),
            mode: None,
            echo: Echo {
                config: None,
                command: command.clone(),
                flags: flags.clone(),
            },
            verdicts: BTreeMap::new(),
            results: BTreeMap::new(),
            constants: BTreeMap::new(),
            artifacts: Vec::new(),
            undecided: Vec::new(),
            warnings: Vec::new(),
            timing_ms: 0.0,
        }
    }

    pub fn verdict(&mut self, key: &str, value: impl Serialize) {
        self.verdicts.insert(key.into(), to_value(value));
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), to_value(value));
    }

    pub fn constant(&mut self, key: &str, value: impl Serialize) {
        self.constants.insert(key.into(), to_value(value));
    }

    pub fn undecided(&mut self, what: impl Into<String>) {
        self.undecided.push(what.into());
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}
