//! Output formatting. JSON keeps full doubles; text and CSV round floats to
//! six decimals.

use serde_json::Value;

use crate::Format;

pub fn render(report: &Value, format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        Format::Text => {
            let mut out = String::new();
            text(report, 0, &mut out);
            Ok(out)
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
    }
}

/// Rows with fixed columns, e.g. the bound table.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.to_string(),
            (_, Some(u)) => u.to_string(),
            _ => format!("{:.6}", n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => format!("[{}]", items.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        Value::Object(_) => "{..}".into(),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(is_flat),
        Value::Object(_) => false,
        _ => true,
    }
}

fn text(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                if is_flat(item) {
                    out.push_str(&format!("{pad}{k}: {}\n", scalar(item)));
                } else {
                    out.push_str(&format!("{pad}{k}:\n"));
                    text(item, depth + 1, out);
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                if is_flat(item) {
                    out.push_str(&format!("{pad}- {}\n", scalar(item)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    text(item, depth + 1, out);
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                flatten(&join(k), item, rows);
            }
        }
        Value::Array(items) if !is_flat(v) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), item, rows);
            }
        }
        other => rows.push((prefix.to_string(), scalar(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn six_decimals_in_text() {
        let v = json!({"upsilon": std::f64::consts::SQRT_2, "n": 3, "tags": ["a", "b"]});
        let t = render(&v, Format::Text).unwrap();
        assert!(t.contains("upsilon: 1.414214\n"));
        assert!(t.contains("n: 3\n"));
        assert!(t.contains("tags: [a, b]\n"));
        let j = render(&v, Format::Json).unwrap();
        assert!(j.contains("1.4142135623730951"));
    }

    #[test]
    fn csv_flattens_nested_values() {
        let v = json!({"a": {"b": 0.5}, "rows": [{"x": 1}]});
        let c = render(&v, Format::Csv).unwrap();
        assert_eq!(c, "key,value\na.b,0.500000\nrows.0.x,1\n");
    }
}
