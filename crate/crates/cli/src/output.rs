//! Report envelope and its JSON and text renderings.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::Result;

pub const REPORT_VERSION: &str = "regvar-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct Accounting {
    /// Primary samples processed (terms, points or trials, per command).
    pub samples: u64,
    /// Present only when timing was requested, so that reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: Value,
    pub result: Value,
    pub accounting: Accounting,
}

/// Writes floats with 17 significant digits.
struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// `%g`-style formatting with `digits` significant digits.
pub fn fmt_g(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn scalar(v: &Value) -> Option<String> {
    Some(match v {
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.to_string(),
            (_, Some(u)) => u.to_string(),
            _ => fmt_g(n.as_f64().expect("finite"), 12),
        },
        Value::String(s) => s.clone(),
        _ => return None,
    })
}

fn walk(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                walk(&key, child, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| scalar(i).is_some()) => {
            let parts: Vec<String> = items.iter().filter_map(scalar).collect();
            out.push_str(&format!("{prefix} = [{}]\n", parts.join(", ")));
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                walk(&format!("{prefix}[{i}]"), child, out);
            }
        }
        leaf => out.push_str(&format!("{prefix} = {}\n", scalar(leaf).expect("scalar"))),
    }
}

/// One `path = value` line per leaf, numbers with 12 significant digits.
pub fn to_text<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    walk("", &v, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(9.0, 12), "9");
        assert_eq!(fmt_g(1.7, 12), "1.7");
        assert_eq!(fmt_g(1.6999999999999975, 12), "1.7");
        assert_eq!(fmt_g(-0.000123456, 12), "-0.000123456");
        assert_eq!(fmt_g(2.5e-9, 12), "2.5e-09");
        assert_eq!(fmt_g(1e15, 12), "1e+15");
        assert_eq!(fmt_g(123456.789, 12), "123456.789");
    }

    #[test]
    fn json_uses_seventeen_digits() {
        let s = to_json(&serde_json::json!({"a": 0.1, "b": [1.0, 2], "c": f64::NAN})).unwrap();
        assert_eq!(s, "{\"a\":1.0000000000000001e-1,\"b\":[1.0000000000000000e0,2],\"c\":null}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn text_flattens() {
        let s = to_text(&serde_json::json!({"r": {"k": 1.5, "v": [1, 2]}, "rows": [{"s": 0.5}]})).unwrap();
        assert_eq!(s, "r.k = 1.5\nr.v = [1, 2]\nrows[0].s = 0.5\n");
    }
}
