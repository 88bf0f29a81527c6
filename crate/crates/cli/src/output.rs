//! Deterministic JSON and CSV rendering of reports.

use serde_json::{Number, Value};

/// Shortest decimal form of `x` rounded to 17 significant digits.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if (-5..17).contains(&exp) {
        let (int, frac) = if exp >= 0 {
            let split = (exp as usize + 1).min(digits.len());
            let mut int = digits[..split].to_string();
            int.extend(std::iter::repeat_n('0', exp as usize + 1 - split));
            (int, digits[split..].to_string())
        } else {
            ("0".to_string(), format!("{}{}", "0".repeat((-exp - 1) as usize), digits))
        };
        let frac = if frac.is_empty() { "0".to_string() } else { frac };
        format!("{sign}{int}.{frac}")
    } else {
        let (head, tail) = digits.split_at(1);
        let tail = if tail.is_empty() { "0" } else { tail };
        format!("{sign}{head}.{tail}e{exp}")
    }
}

fn number(n: &Number) -> String {
    if n.is_i64() || n.is_u64() {
        n.to_string()
    } else {
        format_float(n.as_f64().unwrap_or(f64::NAN))
    }
}

fn is_scalar_array(items: &[Value]) -> bool {
    items.iter().all(|v| !v.is_array() && !v.is_object())
}

fn write_json(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number(n)),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if is_scalar_array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_json(item, indent, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_json(item, indent + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, 0, &mut out);
    out.push('\n');
    out
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match v {
        Value::Array(items) => {
            for (k, item) in items.iter().enumerate() {
                flatten(&join(&k.to_string()), item, rows);
            }
        }
        Value::Object(map) => {
            for (key, item) in map {
                flatten(&join(key), item, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Number(n) => rows.push((prefix.to_string(), number(n))),
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
    }
}

/// Two-column `key,value` table with dotted paths as keys.
pub fn to_csv(v: &Value) -> csv::Result<String> {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"])?;
    for (key, value) in rows {
        w.write_record([key, value])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(-1.0), "-1.0");
        assert_eq!(format_float(1.5), "1.5");
        assert_eq!(format_float(0.1), "0.10000000000000001");
        assert_eq!(format_float(1e-20), "9.9999999999999995e-21");
        assert_eq!(format_float(1.2246467991473532e-16), "1.2246467991473532e-16");
        assert_eq!(format_float(123456.0), "123456.0");
        assert_eq!(format_float(2.5e-3), "0.0025000000000000001");
        assert_eq!(format_float(1e20), "1.0e20");
        assert_eq!(format_float(-3e30), "-2.9999999999999998e30");
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -3.25, 1e-300, 6.02214076e23, std::f64::consts::PI, -0.0] {
            let back: f64 = format_float(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn json_keeps_field_order() {
        let v: Value = serde_json::from_str(r#"{"b":[1.0,0.0],"a":{"z":true,"y":[[1,2],[3,4]]}}"#).unwrap();
        let text = to_json(&v);
        assert!(text.find("\"b\"").unwrap() < text.find("\"a\"").unwrap());
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn csv_rows() {
        let v: Value = serde_json::from_str(r#"{"chi":[-1.0,0.0],"id":"a,b"}"#).unwrap();
        assert_eq!(to_csv(&v).unwrap(), "key,value\nchi.0,-1.0\nchi.1,0.0\nid,\"a,b\"\n");
    }
}
