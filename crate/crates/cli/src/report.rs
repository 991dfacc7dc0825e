use autoweight_core::fmt_num;
use serde_json::{Map, Value as Json};

/// A number rounded to the report precision; non-finite values become strings.
pub fn num(x: f64) -> Json {
    if !x.is_finite() {
        return Json::String(fmt_num(x));
    }
    let r: f64 = fmt_num(x).parse().expect("formatted number parses");
    serde_json::Number::from_f64(r).map(Json::Number).unwrap_or(Json::Null)
}

/// Ordered key/value report.
#[derive(Default)]
pub struct Report {
    root: Map<String, Json>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn set(&mut self, key: &str, v: impl Into<Json>) -> &mut Self {
        self.root.insert(key.to_string(), v.into());
        self
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(&Json::Object(self.root.clone())).expect("serializable");
            s.push('\n');
            return s;
        }
        let mut out = String::new();
        text_object(&self.root, 0, &mut out);
        out
    }
}

fn scalar(v: &Json) -> String {
    match v {
        Json::Null => "-".into(),
        Json::Bool(b) => b.to_string(),
        Json::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => i.to_string(),
            (_, Some(u), _) => u.to_string(),
            (_, _, Some(f)) => fmt_num(f),
            _ => n.to_string(),
        },
        Json::String(s) => s.clone(),
        Json::Array(a) if a.is_empty() => "-".into(),
        Json::Array(a) => a.iter().map(scalar).collect::<Vec<_>>().join(" "),
        Json::Object(_) => "{..}".into(),
    }
}

fn is_scalar(v: &Json) -> bool {
    match v {
        Json::Array(_) | Json::Object(_) => false,
        Json::String(s) => !s.contains('\n'),
        _ => true,
    }
}

fn text_object(m: &Map<String, Json>, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let width = m.iter().filter(|(_, v)| is_scalar(v)).map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in m {
        match v {
            Json::Object(inner) => {
                out.push_str(&format!("{pad}{k}:\n"));
                text_object(inner, depth + 1, out);
            }
            Json::Array(items) if items.iter().all(is_scalar) => {
                out.push_str(&format!("{pad}{k}: {}\n", scalar(v)));
            }
            Json::Array(items) => {
                out.push_str(&format!("{pad}{k}:\n"));
                for item in items {
                    match item {
                        Json::Object(inner) => {
                            let line: Vec<String> = inner.iter().map(|(k, v)| format!("{k}={}", scalar(v))).collect();
                            out.push_str(&format!("{pad}  - {}\n", line.join(" ")));
                        }
                        other => out.push_str(&format!("{pad}  {}\n", scalar(other))),
                    }
                }
            }
            Json::String(s) if s.contains('\n') => {
                out.push_str(&format!("{pad}{k}:\n"));
                for line in s.lines() {
                    out.push_str(&format!("{pad}  {line}\n"));
                }
            }
            _ => {
                let key = format!("{k}:");
                out.push_str(&format!("{pad}{key:<w$} {}\n", scalar(v), w = width + 1));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn numbers_are_rounded() {
        assert_eq!(num(1.0 / 3.0), json!(0.333333333333));
        assert_eq!(num(f64::INFINITY), json!("inf"));
    }

    #[test]
    fn text_layout() {
        let mut r = Report::new();
        r.set("a", 1).set("long", json!({"x": num(0.5)})).set("rows", json!([[1, 2], [3, 4]]));
        r.set("bb", "y");
        assert_eq!(r.render(false), "a:  1\nlong:\n  x: 0.5\nrows:\n  1 2\n  3 4\nbb: y\n");
        assert!(r.render(true).contains("\"rows\""));
    }
}
