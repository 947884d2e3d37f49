//! Plain-text rendering of a JSON report.

use serde_json::Value;

use crate::json::format_f64;

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) if n.is_f64() => n.as_f64().map(format_f64),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flat_list(v: &Value) -> Option<String> {
    let items: Option<Vec<String>> = v.as_array()?.iter().map(scalar).collect();
    Some(format!("[{}]", items?.join(", ")))
}

fn write(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if let Some(s) = scalar(x).or_else(|| flat_list(x)) {
                    out.push_str(&format!("{pad}{k}: {s}\n"));
                } else {
                    out.push_str(&format!("{pad}{k}:\n"));
                    write(out, x, depth + 1);
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                if let Some(s) = scalar(x).or_else(|| flat_list(x)) {
                    out.push_str(&format!("{pad}- {s}\n"));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    write(out, x, depth + 1);
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    write(&mut out, v, 0);
    out
}
