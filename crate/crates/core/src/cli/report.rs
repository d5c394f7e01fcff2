use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    /// Metric keys whose values this assertion tests.
    pub metrics: Vec<String>,
}

/// Self-describing record of one command run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub config_hash: String,
    pub seed: u64,
    pub metrics: Map<String, Value>,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

/// SHA-256 of the compact JSON encoding of `config`. Object keys are sorted,
/// so equal configurations hash equally.
pub fn config_hash(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("json value serializes");
    hex::encode(Sha256::digest(&bytes))
}

impl RunReport {
    pub fn new(command: &str, args: Value, seed: u64, strict: bool) -> Self {
        let config = json!({
            "command": command,
            "args": args,
            "seed": seed,
            "strict": strict,
        });
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_hash: config_hash(&config),
            config,
            seed,
            metrics: Map::new(),
            assertions: Vec::new(),
            pass: true,
            wall_time: None,
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("metric serializes");
        self.metrics.insert(key.to_string(), v);
    }

    pub fn assert(&mut self, name: &str, pass: bool, detail: impl Into<String>, metrics: &[&str]) {
        self.assertions.push(Assertion {
            name: name.to_string(),
            pass,
            detail: detail.into(),
            metrics: metrics.iter().map(|m| m.to_string()).collect(),
        });
    }

    pub fn finish(&mut self, wall_time: Option<f64>) {
        self.pass = self.assertions.iter().all(|a| a.pass);
        self.wall_time = wall_time;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
