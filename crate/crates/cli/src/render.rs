//! Reports are built once as JSON values and rendered either as JSON or as
//! plain `key: value` text, so both forms carry the same numbers.

use serde_json::{json, Map, Value};

/// Version tag carried by every JSON report.
pub const SCHEMA: &str = "spencer-report/1";

/// A command's result before rendering.
pub struct Report {
    pub command: &'static str,
    pub system: Option<String>,
    pub result: Map<String, Value>,
    /// Printed verbatim before the fields in text mode (e.g. a DSL document).
    pub preamble: Option<String>,
}

impl Report {
    pub fn new(command: &'static str, system: Option<String>) -> Self {
        Report { command, system, result: Map::new(), preamble: None }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.result.insert(key.to_string(), value.into());
        self
    }

    pub fn json(&self) -> Value {
        let mut result = self.result.clone();
        if let Some(p) = &self.preamble {
            result.insert("document".into(), Value::String(p.clone()));
        }
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "system": self.system,
            "result": result,
        })
    }

    /// Text form. When a preamble is present the fields become `#` comments so
    /// the output still parses as a document.
    pub fn text(&self) -> String {
        let mut out = String::new();
        let prefix = if self.preamble.is_some() { "# " } else { "" };
        for (k, v) in &self.result {
            field(&mut out, prefix, k, v);
        }
        if let Some(p) = &self.preamble {
            out.push_str(p);
        }
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Compact one-line form of any value.
fn inline(v: &Value) -> String {
    if let Some(s) = scalar(v) {
        return s;
    }
    match v {
        Value::Array(a) => format!("[{}]", a.iter().map(inline).collect::<Vec<_>>().join(", ")),
        Value::Object(o) => o.iter().map(|(k, v)| format!("{k}={}", inline(v))).collect::<Vec<_>>().join(" "),
        _ => unreachable!(),
    }
}

fn field(out: &mut String, prefix: &str, key: &str, v: &Value) {
    match v {
        // Numbers and flags fit on one line; strings may themselves contain commas.
        Value::Array(a) if a.iter().all(|x| scalar(x).is_some() && !x.is_string()) => {
            let items: Vec<String> = a.iter().filter_map(scalar).collect();
            out.push_str(&format!("{prefix}{key}: {}\n", items.join(", ")));
        }
        Value::Array(a) => {
            out.push_str(&format!("{prefix}{key}:\n"));
            for item in a {
                out.push_str(&format!("{prefix}  - {}\n", inline(item)));
            }
        }
        Value::Object(o) => {
            for (k, v) in o {
                field(out, prefix, &format!("{key}.{k}"), v);
            }
        }
        _ => out.push_str(&format!("{prefix}{key}: {}\n", scalar(v).expect("scalar"))),
    }
}
