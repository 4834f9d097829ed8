//! Deterministic CSV/JSON emission.
//!
//! Floats are always written with 17 significant digits so that reruns are
//! byte-identical.

use serde_json::{Map, Number, Value};

use super::config::{Format, RunConfig};

pub const SCHEMA: &str = "friedrichs/1";

/// `x` with 17 significant digits; `inf`, `-inf`, `nan` for the rest.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt_f64(x).parse::<Number>().expect("finite float"))
    } else {
        Value::String(fmt_f64(x))
    }
}

/// Rewrite every float in a JSON tree to the fixed 17-digit form.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.replace([',', '\n', '\r'], ";"),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) => json_f64(*x),
            Cell::I(i) => Value::from(*i),
            Cell::S(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, reference: f64, tolerance: f64, pass: bool) -> Self {
        Self { name: name.into(), value, reference, tolerance, pass }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    /// Derived scalars such as the resolved μ and μ₀.
    pub resolved: Vec<(String, f64)>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.into(),
            config: config.clone(),
            resolved: vec![],
            tables: vec![],
            checks: vec![],
            warnings: vec![],
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn checks_table(&self) -> Table {
        let mut t = Table::new("checks", &["check", "value", "reference", "tolerance", "pass"]);
        for c in &self.checks {
            t.push(vec![
                c.name.as_str().into(),
                c.value.into(),
                c.reference.into(),
                c.tolerance.into(),
                (if c.pass { "pass" } else { "fail" }).into(),
            ]);
        }
        t
    }

    fn config_json(&self) -> Value {
        canonical(serde_json::to_value(&self.config).expect("config serializes"))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema: {SCHEMA}\n# command: {}\n", self.command));
        out.push_str(&format!("# config: {}\n", self.config_json()));
        for (k, v) in &self.resolved {
            out.push_str(&format!("# {k}: {}\n", fmt_f64(*v)));
        }
        for w in &self.warnings {
            out.push_str(&format!("# warning: {w}\n"));
        }
        let mut tables: Vec<Table> = self.tables.clone();
        if !self.checks.is_empty() {
            tables.push(self.checks_table());
        }
        for (i, t) in tables.iter().enumerate() {
            if tables.len() > 1 {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&format!("# table: {}\n", t.name));
            }
            out.push_str(&t.columns.join(","));
            out.push('\n');
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    fn render_json(&self) -> String {
        let mut root = Map::new();
        root.insert("schema".into(), Value::from(SCHEMA));
        root.insert("command".into(), Value::from(self.command.clone()));
        root.insert("config".into(), self.config_json());
        let resolved: Map<String, Value> = self.resolved.iter().map(|(k, v)| (k.clone(), json_f64(*v))).collect();
        root.insert("resolved".into(), Value::Object(resolved));
        let mut tables = Map::new();
        for t in &self.tables {
            let mut obj = Map::new();
            obj.insert("columns".into(), Value::from(t.columns.clone()));
            let rows: Vec<Value> = t.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
            obj.insert("rows".into(), Value::Array(rows));
            tables.insert(t.name.clone(), Value::Object(obj));
        }
        root.insert("tables".into(), Value::Object(tables));
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                let mut o = Map::new();
                o.insert("name".into(), Value::from(c.name.clone()));
                o.insert("value".into(), json_f64(c.value));
                o.insert("reference".into(), json_f64(c.reference));
                o.insert("tolerance".into(), json_f64(c.tolerance));
                o.insert("pass".into(), Value::Bool(c.pass));
                Value::Object(o)
            })
            .collect();
        root.insert("checks".into(), Value::Array(checks));
        root.insert("warnings".into(), Value::from(self.warnings.clone()));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("json");
        s.push('\n');
        s
    }
}
