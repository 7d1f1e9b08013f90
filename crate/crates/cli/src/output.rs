//! Result tables and their CSV and JSON encodings.

use crate::error::{CliError, Result};
use serde_json::{Map, Number, Value};
use std::io::Write;

/// Significant digits of every emitted real.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
}

/// One output record. Columns keep insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row {
    cells: Vec<(String, Cell)>,
}

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(mut self, name: &str, cell: Cell) -> Self {
        debug_assert!(self.get(name).is_none(), "duplicate column {name}");
        self.cells.push((name.to_string(), cell));
        self
    }

    pub fn real(self, name: &str, value: f64) -> Self {
        self.push(name, Cell::Real(value))
    }

    pub fn real_opt(self, name: &str, value: Option<f64>) -> Self {
        match value {
            Some(v) => self.real(name, v),
            None => self,
        }
    }

    pub fn int(self, name: &str, value: u64) -> Self {
        self.push(name, Cell::Int(value))
    }

    pub fn text(self, name: &str, value: impl Into<String>) -> Self {
        self.push(name, Cell::Text(value.into()))
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.cells.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    /// Numeric value of a column, integers included.
    pub fn number(&self, name: &str) -> Option<f64> {
        match self.get(name)? {
            Cell::Real(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }

    pub fn text_of(&self, name: &str) -> Option<&str> {
        match self.get(name)? {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.cells.iter().map(|(n, _)| n.as_str())
    }
}

/// Rows plus the parameters that produced them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub invocation: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(invocation: Vec<(String, String)>, rows: Vec<Row>) -> Self {
        Self { invocation, rows }
    }

    /// Union of all row columns in order of first appearance.
    pub fn columns(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for row in &self.rows {
            for c in row.columns() {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Values of one numeric column over all rows that carry it.
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.number(name)).collect()
    }

    pub fn check_finite(&self) -> Result<()> {
        for row in &self.rows {
            for (name, cell) in &row.cells {
                if let Cell::Real(v) = cell {
                    if !v.is_finite() {
                        return Err(CliError::NonFinite {
                            column: name.clone(),
                            value: *v,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// `%.12g`-style formatting: shortest of fixed or scientific notation with
/// trailing zeros removed.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Real(v) => format_real(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

pub fn write_csv(table: &Table, w: &mut dyn Write) -> std::io::Result<()> {
    for (key, value) in &table.invocation {
        writeln!(w, "# {key}: {value}")?;
    }
    let columns = table.columns();
    writeln!(w, "{}", columns.join(","))?;
    for row in &table.rows {
        let fields: Vec<String> = columns
            .iter()
            .map(|c| row.get(c).map(cell_text).unwrap_or_default())
            .collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

fn cell_json(cell: &Cell) -> Value {
    match cell {
        // round through the text form so both encodings carry the same digits
        Cell::Real(v) => format_real(*v)
            .parse::<f64>()
            .ok()
            .and_then(Number::from_f64)
            .map_or(Value::Null, Value::Number),
        Cell::Int(v) => Value::from(*v),
        Cell::Text(s) => Value::String(s.clone()),
    }
}

/// `{"invocation": {...}, "rows": [{...}, ...]}`
pub fn to_json(table: &Table) -> Value {
    let invocation: Map<String, Value> = table
        .invocation
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Object(r.cells.iter().map(|(k, c)| (k.clone(), cell_json(c))).collect()))
        .collect();
    let mut out = Map::new();
    out.insert("invocation".into(), Value::Object(invocation));
    out.insert("rows".into(), Value::Array(rows));
    Value::Object(out)
}

pub fn write_json(table: &Table, w: &mut dyn Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, &to_json(table))?;
    writeln!(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_real(0.1), "0.1");
        assert_eq!(format_real(2.053872151503e-3), "0.0020538721515");
        assert_eq!(format_real(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_real(123456.789), "123456.789");
        assert_eq!(format_real(1e-7), "1e-7");
        assert_eq!(format_real(-2.5e-9), "-2.5e-9");
        assert_eq!(format_real(1e12), "1e12");
        assert_eq!(format_real(1e8), "100000000");
        assert_eq!(format_real(0.5), "0.5");
    }

    #[test]
    fn missing_columns_stay_empty() {
        let table = Table::new(
            vec![("command".into(), "exponent".into())],
            vec![
                Row::new().real("mu", 0.1).real("c_mu", 0.5),
                Row::new().real("mu", 0.2).real("c_mu_delta", 0.25),
            ],
        );
        let mut buf = Vec::new();
        write_csv(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# command: exponent\nmu,c_mu,c_mu_delta\n0.1,0.5,\n0.2,,0.25\n");
        let json = to_json(&table);
        assert!(json["rows"][0].get("c_mu_delta").is_none());
        assert_eq!(json["rows"][1]["c_mu_delta"], 0.25);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let table = Table::new(vec![], vec![Row::new().real("x", f64::NAN)]);
        assert!(matches!(table.check_finite(), Err(CliError::NonFinite { .. })));
    }
}
