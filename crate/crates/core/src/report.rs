//! Versioned JSON report envelope shared by all commands.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA: &str = "kms-graph-lab/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub input: Value,
    #[serde(flatten)]
    pub sections: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &str, input: Value) -> Self {
        Self {
            schema: SCHEMA.into(),
            command: command.into(),
            input,
            sections: BTreeMap::new(),
        }
    }

    /// Adds a section. Non-finite floats become `null`.
    pub fn insert(&mut self, key: &str, value: impl Serialize) -> Result<&mut Self> {
        let v =
            serde_json::to_value(value).map_err(|e| Error::InvalidArgument(format!("report section {key}: {e}")))?;
        self.sections.insert(key.into(), v);
        Ok(self)
    }

    pub fn section(&self, key: &str) -> Option<&Value> {
        self.sections.get(key)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are plain JSON");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text).map_err(|e| Error::Parse(format!("report: {e}")))?;
        if r.schema != SCHEMA {
            return Err(Error::Parse(format!("unsupported report schema {}", r.schema)));
        }
        Ok(r)
    }

    /// One `path = value` line per leaf, in key order.
    pub fn to_text(&self) -> String {
        let mut out = format!("schema = {}\ncommand = {}\n", self.schema, self.command);
        flatten("input", &self.input, &mut out);
        for (k, v) in &self.sections {
            flatten(k, v, &mut out);
        }
        out
    }
}

fn flatten(path: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, x) in map {
                flatten(&format!("{path}.{k}"), x, out);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{path}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{path} = {s}\n")),
        other => out.push_str(&format!("{path} = {other}\n")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip_is_byte_identical() {
        let mut r = Report::new("beta0", json!({"family": "rose", "params": {"n": 2}}));
        r.insert("beta0", json!({"value": 0.30000000000000004, "tiny": 1e-300}))
            .unwrap()
            .insert("nan", f64::NAN)
            .unwrap();
        let a = r.to_json();
        let b = Report::from_json(&a).unwrap().to_json();
        assert_eq!(a, b);
        assert!(a.contains("\"nan\": null"));
    }

    #[test]
    fn rejects_other_schema() {
        let text = r#"{"schema": "other/2", "command": "x", "input": null}"#;
        assert!(Report::from_json(text).is_err());
    }

    #[test]
    fn text_lines() {
        let mut r = Report::new("x", json!({"family": "ladder"}));
        r.insert("a", json!({"b": [1, 2]})).unwrap();
        let t = r.to_text();
        assert!(t.contains("input.family = ladder\n"));
        assert!(t.contains("a.b[1] = 2\n"));
    }
}
