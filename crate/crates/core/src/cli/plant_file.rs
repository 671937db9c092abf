//! Plant files: JSON documents with keys `A`, `B1`, `B2`, `C1` (row-major
//! nested arrays) and an optional `label`, or a plain whitespace format
//! with the four matrices separated by blank lines.

use std::fmt;

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::matrix::RealMatrix;
use crate::plant::Plant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlantFormat {
    #[default]
    Json,
    Plain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantFile {
    pub label: Option<String>,
    pub plant: Plant,
}

/// A parse failure with as much position information as is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ParseError {
    fn field(field: &str, message: impl Into<String>) -> ParseError {
        ParseError {
            line: None,
            column: None,
            field: Some(field.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: ")?,
            (Some(l), None) => write!(f, "line {l}: ")?,
            _ => {}
        }
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ParseError {}

pub fn parse_plant(text: &str, format: PlantFormat) -> Result<PlantFile, ParseError> {
    match format {
        PlantFormat::Json => parse_json(text),
        PlantFormat::Plain => parse_plain(text),
    }
}

/// The canonical JSON form of a plant: full-precision numbers, nested
/// arrays, `B1`/`B2` as columns. Parsing it back yields the same plant.
pub fn plant_to_json(plant: &Plant) -> Value {
    json!({
        "A": rows(plant.a()),
        "B1": rows(plant.b1()),
        "B2": rows(plant.b2()),
        "C1": rows(plant.c1()),
    })
}

fn rows(m: &RealMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn parse_json(text: &str) -> Result<PlantFile, ParseError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ParseError {
        line: Some(e.line()),
        column: Some(e.column()),
        field: None,
        message: e.to_string(),
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| ParseError::field("document", "expected a JSON object"))?;
    let matrix = |key: &str| -> Result<Vec<Vec<f64>>, ParseError> {
        let v = obj.get(key).ok_or_else(|| ParseError::field(key, "missing"))?;
        json_matrix(key, v)
    };
    let a = matrix("A")?;
    let b1 = column(matrix("B1")?);
    let b2 = column(matrix("B2")?);
    let c1 = matrix("C1")?;
    let label = match obj.get("label") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(ParseError::field("label", "expected a string")),
    };
    let plant = build(&a, &b1, &b2, &c1)?;
    Ok(PlantFile { label, plant })
}

/// Accepts `[[..], ..]` or a flat `[..]`, which is read as one row.
fn json_matrix(key: &str, v: &Value) -> Result<Vec<Vec<f64>>, ParseError> {
    let outer = v
        .as_array()
        .ok_or_else(|| ParseError::field(key, "expected an array"))?;
    let number = |x: &Value, at: String| {
        x.as_f64()
            .ok_or_else(|| ParseError::field(&at, format!("expected a number, found {x}")))
    };
    if outer.iter().all(|x| !x.is_array()) {
        let row = outer
            .iter()
            .enumerate()
            .map(|(j, x)| number(x, format!("{key}[{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(vec![row]);
    }
    outer
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row
                .as_array()
                .ok_or_else(|| ParseError::field(&format!("{key}[{i}]"), "expected an array"))?;
            row.iter()
                .enumerate()
                .map(|(j, x)| number(x, format!("{key}[{i}][{j}]")))
                .collect()
        })
        .collect()
}

/// Input vectors may be written as a row; store them as a column.
fn column(m: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    if m.len() == 1 && m[0].len() > 1 {
        m[0].iter().map(|&v| vec![v]).collect()
    } else {
        m
    }
}

fn to_matrix(key: &str, rows: &[Vec<f64>]) -> Result<RealMatrix, ParseError> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(ParseError::field(key, "matrix is empty"));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(ParseError::field(
            key,
            format!("row {i} has {} entries, expected {ncols}", r.len()),
        ));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn build(a: &[Vec<f64>], b1: &[Vec<f64>], b2: &[Vec<f64>], c1: &[Vec<f64>]) -> Result<Plant, ParseError> {
    let a = to_matrix("A", a)?;
    let b1 = to_matrix("B1", b1)?;
    let b2 = to_matrix("B2", b2)?;
    let c1 = to_matrix("C1", c1)?;
    Plant::new(a, b1, b2, c1).map_err(|e| ParseError::field("plant", e.to_string()))
}

fn parse_plain(text: &str) -> Result<PlantFile, ParseError> {
    let mut blocks: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut current: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        let mut row = Vec::new();
        for (col, token) in line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .enumerate()
        {
            let v = token.parse::<f64>().map_err(|_| ParseError {
                line: Some(idx + 1),
                column: None,
                field: Some(format!("entry {}", col + 1)),
                message: format!("'{token}' is not a number"),
            })?;
            row.push(v);
        }
        current.push(row);
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    if blocks.len() != 4 {
        return Err(ParseError::field(
            "document",
            format!("expected 4 matrices (A, B1, B2, C1), found {}", blocks.len()),
        ));
    }
    let b1 = column(blocks[1].clone());
    let b2 = column(blocks[2].clone());
    let plant = build(&blocks[0], &b1, &b2, &blocks[3])?;
    Ok(PlantFile { label: None, plant })
}
