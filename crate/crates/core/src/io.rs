//! CSV and JSON output.
//!
//! CSV files have a header row and write every number with 17 significant
//! digits. JSON documents are a single object `{schema, config, result}`.
//! Neither format carries timestamps, so identical inputs give identical bytes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levelset::LevelCurve;
use crate::orbits::Trajectory;
use crate::systems::ConfigPoint;

/// Version tag written into every JSON document.
pub const SCHEMA: &str = "syzygy/1";

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.push(values.iter().map(|&v| format_f64(v)).collect());
    }

    /// Pushes pre-formatted cells; the row length must match the header.
    /// Cells containing separators or quotes are quoted.
    pub fn push(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width differs from header");
        self.rows.push(cells.into_iter().map(quote).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn quote(cell: String) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell
    }
}

pub fn points_csv(points: &[ConfigPoint]) -> String {
    let mut t = CsvTable::new(&["q1", "q2"]);
    for p in points {
        t.push_numbers(&[p.q1, p.q2]);
    }
    t.render()
}

/// Several curves in one table, distinguished by a `curve` index column.
pub fn curves_csv(curves: &[LevelCurve]) -> String {
    let mut t = CsvTable::new(&["curve", "q1", "q2"]);
    for (k, c) in curves.iter().enumerate() {
        for p in &c.vertices {
            t.push(vec![k.to_string(), format_f64(p.q1), format_f64(p.q2)]);
        }
    }
    t.render()
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut t = CsvTable::new(&["t", "q1", "q2", "v1", "v2"]);
    for (time, s) in &traj.nodes {
        t.push_numbers(&[*time, s.q.q1, s.q.q2, s.v[0], s.v[1]]);
    }
    t.render()
}

#[derive(Serialize)]
struct Envelope<'a, C, R> {
    schema: &'a str,
    config: &'a C,
    result: &'a R,
}

/// Pretty-printed `{schema, config, result}` document with a trailing newline.
pub fn json_envelope<C: Serialize, R: Serialize>(config: &C, result: &R) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { schema: SCHEMA, config, result })
        .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -1.7283981120430765, 1e-300, 3.0, std::f64::consts::PI] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn csv_layout() {
        let s = points_csv(&[ConfigPoint::new(1.0, -0.5)]);
        assert_eq!(s, "q1,q2\n1.0000000000000000e0,-5.0000000000000000e-1\n");
    }

    #[test]
    fn cells_with_separators_are_quoted() {
        let mut t = CsvTable::new(&["name", "value"]);
        t.push(vec!["a, \"b\"".into(), "1".into()]);
        assert_eq!(t.render(), "name,value\n\"a, \"\"b\"\"\",1\n");
    }

    #[test]
    fn envelope_fields() {
        let s = json_envelope(&serde_json::json!({"mu": 0.5}), &[1, 2]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["config"]["mu"], 0.5);
        assert_eq!(v["result"][1], 2);
    }
}
