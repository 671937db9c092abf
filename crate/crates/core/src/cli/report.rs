//! JSON report values with fixed precision.

use nalgebra::Complex;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::plant_file::{plant_to_json, PlantFile};
use crate::matrix::RealMatrix;

/// A real number serialized with 12 significant digits; non-finite values
/// become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn rounded(self) -> Option<f64> {
        self.0.is_finite().then(|| round12(self.0))
    }
}

pub fn round12(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.rounded() {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_none(),
        }
    }
}

/// 12-significant-digit text for CSV cells; empty for non-finite values.
pub fn format_num(v: f64) -> String {
    Num(v).rounded().map_or_else(String::new, |r| r.to_string())
}

pub fn num(v: f64) -> Value {
    json!(Num(v))
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

pub fn matrix(m: &RealMatrix) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&v| num(v)).collect()))
            .collect(),
    )
}

pub fn spectrum(eigs: &[Complex<f64>]) -> Value {
    Value::Array(
        eigs.iter()
            .map(|l| json!({ "re": Num(l.re), "im": Num(l.im) }))
            .collect(),
    )
}

pub fn reals(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

/// `label`, SHA-256 of the canonical plant text, and the canonical plant
/// itself at full precision.
pub fn input_block(file: &PlantFile) -> Value {
    let plant = plant_to_json(&file.plant);
    let digest = Sha256::digest(plant.to_string().as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    json!({
        "label": file.label,
        "digest": format!("sha256:{hex}"),
        "plant": plant,
    })
}

/// Indented JSON with arrays of scalars and small flat objects kept on one
/// line, so matrices read row by row.
pub fn render(report: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, report, 0);
    out.push('\n');
    out
}

fn is_scalar(v: &Value) -> bool {
    !(v.is_array() || v.is_object())
}

fn inline(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(is_scalar),
        Value::Object(map) => map.len() <= 4 && map.values().all(is_scalar),
        _ => true,
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    if inline(v) {
        let scalar = |x: &Value| serde_json::to_string(x).expect("report values serialize");
        let text = match v {
            Value::Array(items) => format!("[{}]", items.iter().map(scalar).collect::<Vec<_>>().join(", ")),
            Value::Object(map) => format!(
                "{{{}}}",
                map.iter()
                    .map(|(k, x)| format!("{}: {}", scalar(&Value::String(k.clone())), scalar(x)))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            _ => scalar(v),
        };
        out.push_str(&text);
        return;
    }
    let pad = "  ".repeat(depth + 1);
    match v {
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                out.push_str(&pad);
                write_value(out, item, depth + 1);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(depth));
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(key).expect("string keys serialize"));
                out.push_str(": ");
                write_value(out, item, depth + 1);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(depth));
            out.push('}');
        }
        _ => unreachable!("scalars are inline"),
    }
}
