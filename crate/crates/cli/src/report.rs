//! Machine-readable report shared by every command.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::InputError => 2,
        }
    }
}

/// Counts of zero verdicts found anywhere in a result tree.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProbeStatistics {
    pub probes_per_verdict: usize,
    pub proven_zero: usize,
    pub probably_zero: usize,
    pub non_zero: usize,
    /// Largest residual seen among `probably_zero` verdicts.
    pub max_probable_residual: f64,
}

impl ProbeStatistics {
    pub fn collect(probes: usize, v: &Value) -> ProbeStatistics {
        let mut s = ProbeStatistics { probes_per_verdict: probes, ..ProbeStatistics::default() };
        s.walk(v);
        s
    }

    fn walk(&mut self, v: &Value) {
        match v {
            Value::Object(map) => {
                if let Some(Value::String(tag)) = map.get("verdict") {
                    match tag.as_str() {
                        "proven_zero" => self.proven_zero += 1,
                        "probably_zero" => {
                            self.probably_zero += 1;
                            if let Some(m) = map.get("max_abs").and_then(Value::as_f64) {
                                self.max_probable_residual = self.max_probable_residual.max(m);
                            }
                        }
                        "non_zero" => self.non_zero += 1,
                        _ => {}
                    }
                }
                map.values().for_each(|x| self.walk(x));
            }
            Value::Array(items) => items.iter().for_each(|x| self.walk(x)),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub probes: usize,
    pub tol: f64,
    pub numeric_only: bool,
    pub status: Status,
    pub exit_code: i32,
    pub message: Option<String>,
    pub probe_statistics: ProbeStatistics,
    pub result: Value,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report documents always serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn statistics_count_nested_verdicts() {
        let v = json!({
            "a": {"verdict": "proven_zero"},
            "b": [{"verdict": {"verdict": "probably_zero", "probes": 32, "max_abs": 1e-12}},
                  {"verdict": "non_zero", "value": 1.0}],
            "name": "verdict"
        });
        let s = ProbeStatistics::collect(32, &v);
        assert_eq!((s.proven_zero, s.probably_zero, s.non_zero), (1, 1, 1));
        assert_eq!(s.max_probable_residual, 1e-12);
    }
}
