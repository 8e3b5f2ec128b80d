//! Tables with a self-describing header, rendered as CSV or JSON.

use pdtp_core::csv::{fmt_real, record};
use serde_json::{json, Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever a column layout or header key changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => fmt_real(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Real(v) if v.is_finite() => json!(v),
            Cell::Real(v) => json!(v.to_string()),
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    /// Parameter echo; keys are flag names.
    pub params: Vec<(&'static str, String)>,
    /// Derived facts about the run (route taken, sampler size, ...).
    pub info: Vec<(&'static str, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(command: &'static str, params: Vec<(&'static str, String)>, columns: &[&str]) -> Self {
        Report {
            command,
            params,
            info: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn info(&mut self, key: &'static str, value: impl ToString) {
        self.info.push((key, value.to_string()));
    }

    pub fn schema(&self) -> String {
        format!("pdtp-{}/{}", self.command, SCHEMA_VERSION)
    }

    /// `# key=value` lines are the parameter echo and can be fed back through
    /// `--config`; `# info key: value` lines are never read back.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# pdtp {VERSION}\n");
        out.push_str(&format!("# version={VERSION}\n"));
        out.push_str(&format!("# schema={}\n", self.schema()));
        out.push_str(&format!("# command={}\n", self.command));
        for (k, v) in &self.params {
            out.push_str(&format!("# {k}={v}\n"));
        }
        for (k, v) in &self.info {
            out.push_str(&format!("# info {k}: {v}\n"));
        }
        out.push_str(&record(&self.columns));
        for row in &self.rows {
            out.push_str(&record(row.iter().map(Cell::csv)));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let pairs = |kv: &[(&'static str, String)]| -> Map<String, Value> {
            kv.iter().map(|(k, v)| (k.to_string(), json!(v))).collect()
        };
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = json!({
            "version": VERSION,
            "schema": self.schema(),
            "command": self.command,
            "params": pairs(&self.params),
            "info": pairs(&self.info),
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new(
            "states",
            vec![("alpha", "1".into()), ("t", "3".into())],
            &["t", "n", "probability"],
        );
        r.info("resolved_route", "oracle");
        r.rows.push(vec![Cell::Int(3), Cell::Int(0), Cell::Real(0.125)]);
        r.rows.push(vec![Cell::Int(3), Cell::Int(1), Cell::Real(0.1 + 0.2)]);
        r
    }

    #[test]
    fn csv_layout() {
        let text = sample().to_csv();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# pdtp {VERSION}"));
        assert!(lines.contains(&"# schema=pdtp-states/1"));
        assert!(lines.contains(&"# alpha=1"));
        assert!(lines.contains(&"# info resolved_route: oracle"));
        assert_eq!(lines[lines.len() - 3], "t,n,probability");
        let last: Vec<&str> = lines[lines.len() - 1].split(',').collect();
        assert_eq!(last[2].parse::<f64>().unwrap(), 0.1 + 0.2);
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["schema"], "pdtp-states/1");
        assert_eq!(v["params"]["t"], "3");
        assert_eq!(v["rows"][1][2].as_f64().unwrap(), 0.1 + 0.2);
    }
}
