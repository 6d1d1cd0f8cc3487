use serde_json::Value;

/// Line-per-leaf rendering: `path: value`, scalar arrays inline.
pub fn text(value: &Value) -> String {
    let mut out = String::new();
    walk(value, String::new(), &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items
                .iter()
                .map(|i| match i {
                    Value::Array(_) => scalar(i),
                    Value::Object(_) => None,
                    _ => scalar(i),
                })
                .collect();
            parts.map(|p| format!("[{}]", p.join(", ")))
        }
        Value::Object(m) if m.is_empty() => Some("{}".into()),
        Value::Object(_) => None,
    }
}

fn walk(v: &Value, path: String, out: &mut String) {
    if let Some(s) = scalar(v) {
        let key = if path.is_empty() { "value" } else { &path };
        out.push_str(&format!("{key}: {s}\n"));
        return;
    }
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                walk(child, join(k), out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                walk(child, join(&i.to_string()), out);
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}
