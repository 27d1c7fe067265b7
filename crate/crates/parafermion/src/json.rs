//! Deterministic JSON helpers: every float is written with 17 significant digits.

use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{Number, Value};

pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(format!("{x}"));
    }
    Value::Number(Number::from_str(&sci(x)).expect("scientific notation is valid JSON"))
}

/// `x` in scientific notation with 17 significant digits and a signed exponent.
pub fn sci(x: f64) -> String {
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

pub fn complex(z: Complex64) -> Value {
    serde_json::json!({ "re": num(z.re), "im": num(z.im) })
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num).collect())
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are always serialisable");
    s.push('\n');
    s
}
