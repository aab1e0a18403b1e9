use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::data::Dataset;
use crate::CliError;

pub const SCHEMA_VERSION: &str = "1.0.0";

/// A finite number, or the string "failed".
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("failed")
    }
}

/// 17 significant digits, or "failed".
pub fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "failed".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotBlock {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PlotBlock {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        PlotBlock {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(|&v| num(v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub input: Option<Value>,
    pub sections: Map<String, Value>,
    pub plots: Vec<PlotBlock>,
}

impl Report {
    pub fn new(command: &str, args: &[String], seed: Option<u64>) -> Self {
        Report {
            command: command.into(),
            args: args.to_vec(),
            seed,
            input: None,
            sections: Map::new(),
            plots: Vec::new(),
        }
    }

    pub fn set_input(&mut self, data: &Dataset) {
        self.input = Some(json!({
            "file": data.file,
            "n": data.values.len(),
            "sha256": data.sha256,
        }));
    }

    pub fn section(&mut self, key: &str, value: Value) {
        self.sections.insert(key.into(), value);
    }

    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        root.insert("schema_version".into(), json!(SCHEMA_VERSION));
        root.insert(
            "tool".into(),
            json!({"name": "gmopg", "version": env!("CARGO_PKG_VERSION")}),
        );
        root.insert(
            "command".into(),
            json!({"name": self.command, "args": self.args}),
        );
        root.insert("seed".into(), self.seed.map_or(Value::Null, |s| json!(s)));
        root.insert("input".into(), self.input.clone().unwrap_or(Value::Null));
        for (k, v) in &self.sections {
            root.insert(k.clone(), v.clone());
        }
        root.insert(
            "plots".into(),
            Value::Array(self.plots.iter().map(PlotBlock::to_json).collect()),
        );
        Value::Object(root)
    }

    pub fn to_pretty(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        text.push('\n');
        text
    }

    /// Plot blocks as CSV sections separated by "# block: name" lines.
    pub fn plots_csv(&self) -> String {
        let mut out = String::new();
        for block in &self.plots {
            let _ = writeln!(out, "# block: {}", block.name);
            let _ = writeln!(out, "{}", block.columns.join(","));
            for row in &block.rows {
                let cells: Vec<String> = row.iter().map(|&v| csv_number(v)).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
            out.push('\n');
        }
        out
    }

    pub fn emit(&self, out: Option<&Path>, plot_csv: Option<&Path>) -> Result<(), CliError> {
        let text = self.to_pretty();
        match out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        if let Some(path) = plot_csv {
            std::fs::write(path, self.plots_csv())
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}
