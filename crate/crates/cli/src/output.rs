//! `#` metadata header plus CSV rows, or a JSON document.

use serde::Serialize;
use serde_json::{Map, Value};

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("FRACFLIGHT_GIT_DESCRIBE"), ")");

/// Round-trip safe rendering: 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() { format!("{v:.16e}") } else { v.to_string() }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => num(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

pub struct Table {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Header echoing `command`, the version and every field of `params`.
    pub fn new(command: &str, params: &impl Serialize, seed: u64) -> Self {
        let mut meta = vec![
            ("command".to_string(), command.to_string()),
            ("version".to_string(), VERSION.to_string()),
            ("seed".to_string(), seed.to_string()),
        ];
        if let Ok(Value::Object(m)) = serde_json::to_value(params) {
            flatten("", &m, &mut meta);
        }
        Self { meta, columns: Vec::new(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn columns(&mut self, names: &[&str]) {
        self.columns = names.iter().map(|s| s.to_string()).collect();
    }

    pub fn row(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|v| Cell::Num(*v)).collect());
    }

    pub fn cells(&mut self, cells: Vec<Cell>) {
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        if !self.columns.is_empty() {
            out.push_str(&self.columns.join(","));
            out.push('\n');
        }
        for r in &self.rows {
            out.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// `{"meta": {...}, "columns": [...], "rows": [[...]]}`.
    pub fn render_json(&self) -> String {
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        let doc = serde_json::json!({ "meta": meta, "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }
}

fn flatten(prefix: &str, m: &Map<String, Value>, out: &mut Vec<(String, String)>) {
    for (k, v) in m {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(inner) => flatten(&key, inner, out),
            Value::Null => {}
            Value::String(s) => out.push((key, s.clone())),
            Value::Number(n) => out.push((key, number(n))),
            Value::Array(a) => {
                let cells: Vec<String> = a
                    .iter()
                    .map(|x| match x {
                        Value::Number(n) => number(n),
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                out.push((key, cells.join(";")));
            }
            other => out.push((key, other.to_string())),
        }
    }
}

fn number(n: &serde_json::Number) -> String {
    if n.is_f64() { num(n.as_f64().unwrap_or(f64::NAN)) } else { n.to_string() }
}

/// Midpoints of `n` equal cells of `(a, b)`; never touches the endpoints.
pub fn midpoints(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    (0..n).map(|i| a + h * (i as f64 + 0.5)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.2795853023360673, -1e-300, 6.02e23] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn midpoints_are_symmetric() {
        let m = midpoints(-2.0, 2.0, 401);
        assert_eq!(m.len(), 401);
        assert!(m[200].abs() < 1e-15);
        assert!(m[0] > -2.0 && m[400] < 2.0);
    }

    #[test]
    fn header_echoes_parameters() {
        #[derive(Serialize)]
        struct P {
            alpha: f64,
            name: &'static str,
            grid: usize,
        }
        let mut t = Table::new("demo", &P { alpha: 0.5, name: "x", grid: 401 }, 7);
        t.columns(&["a"]);
        t.row(&[1.0]);
        let s = t.render();
        assert!(s.contains("# alpha=5.0000000000000000e-1\n"));
        assert!(s.contains("# name=x\n"));
        assert!(s.contains("# grid=401\n"));
        assert!(s.contains("# seed=7\n"));
        assert!(s.ends_with("a\n1.0000000000000000e0\n"));
    }
}
