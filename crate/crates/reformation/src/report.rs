//! Structured JSON reports for command-line runs.
//!
//! Every command emits one [`RunReport`]: what ran, with which inputs and
//! scheme, the seed, wall time, and the numeric outputs. Numeric fields are
//! rounded to 9 significant digits — below every tolerance this crate
//! states, above double-precision noise — so reruns with the same seed and
//! inputs produce byte-identical `outputs`. Infinities, which JSON cannot
//! carry as numbers, are reported as the strings `"+inf"` / `"-inf"`.

use serde_json::{json, Map, Value};

/// Report of one command-line invocation.
#[derive(Debug, Clone)]
pub struct RunReport {
    /// Subcommand name.
    pub command: String,
    /// Input files and parameters.
    pub inputs: Map<String, Value>,
    /// Numeric results (scalars and per-atom arrays), rounded via [`sig9`].
    pub outputs: Map<String, Value>,
    /// Neighborhood scheme in its `knn:<k>` / `radius:<h>` form, when one
    /// was used.
    pub scheme: Option<String>,
    /// Seed governing all randomness of the run.
    pub seed: u64,
    /// Wall-clock duration.
    pub wall_time_ms: u64,
}

impl RunReport {
    /// Empty report for a command.
    pub fn new(command: &str, seed: u64) -> Self {
        RunReport {
            command: command.to_string(),
            inputs: Map::new(),
            outputs: Map::new(),
            scheme: None,
            seed,
            wall_time_ms: 0,
        }
    }

    /// Records an input parameter.
    pub fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    /// Records an output value (round numerics through [`sig9`] /
    /// [`sig9_slice`] first).
    pub fn output(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.outputs.insert(key.to_string(), value.into());
        self
    }

    /// Renders the report as pretty JSON.
    pub fn to_json(&self) -> String {
        let v = json!({
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "scheme": self.scheme,
            "seed": self.seed,
            "wall_time_ms": self.wall_time_ms,
        });
        serde_json::to_string_pretty(&v).expect("report serializes")
    }
}

/// Rounds to 9 significant digits and wraps as JSON; non-finite values
/// become strings.
pub fn sig9(v: f64) -> Value {
    if v.is_nan() {
        return Value::String("nan".into());
    }
    if v.is_infinite() {
        return Value::String(if v > 0.0 { "+inf" } else { "-inf" }.into());
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("scientific form parses");
    serde_json::Number::from_f64(rounded).map(Value::Number).expect("finite after rounding")
}

/// Rounds a slice via [`sig9`].
pub fn sig9_slice(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| sig9(v)).collect())
}
