//! JSON-lines records with fixed field order and 17 significant digits.

use std::fmt::Write as _;

/// `x` with 17 significant digits, or `null` when not finite.
pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// One JSON object, written field by field in insertion order.
#[derive(Debug, Clone)]
pub struct Record {
    buf: String,
}

impl Record {
    /// Starts an object whose first field is `"record": kind`.
    pub fn new(kind: &str) -> Self {
        Self {
            buf: format!("{{\"record\":{}", quoted(kind)),
        }
    }

    fn key(&mut self, key: &str) {
        let _ = write!(self.buf, ",{}:", quoted(key));
    }

    pub fn str(mut self, key: &str, value: &str) -> Self {
        self.key(key);
        self.buf.push_str(&quoted(value));
        self
    }

    pub fn num(mut self, key: &str, value: f64) -> Self {
        self.key(key);
        self.buf.push_str(&number(value));
        self
    }

    pub fn opt_num(mut self, key: &str, value: Option<f64>) -> Self {
        self.key(key);
        self.buf.push_str(&value.map_or_else(|| "null".to_string(), number));
        self
    }

    pub fn int(mut self, key: &str, value: u64) -> Self {
        self.key(key);
        let _ = write!(self.buf, "{value}");
        self
    }

    pub fn bool(mut self, key: &str, value: bool) -> Self {
        self.key(key);
        self.buf.push_str(if value { "true" } else { "false" });
        self
    }

    pub fn opt_bool(mut self, key: &str, value: Option<bool>) -> Self {
        self.key(key);
        self.buf.push_str(match value {
            Some(true) => "true",
            Some(false) => "false",
            None => "null",
        });
        self
    }

    pub fn nums(mut self, key: &str, values: &[f64]) -> Self {
        self.key(key);
        let items: Vec<String> = values.iter().map(|&v| number(v)).collect();
        let _ = write!(self.buf, "[{}]", items.join(","));
        self
    }

    pub fn ints(mut self, key: &str, values: &[usize]) -> Self {
        self.key(key);
        let items: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        let _ = write!(self.buf, "[{}]", items.join(","));
        self
    }

    pub fn strs(mut self, key: &str, values: &[String]) -> Self {
        self.key(key);
        let items: Vec<String> = values.iter().map(|v| quoted(v)).collect();
        let _ = write!(self.buf, "[{}]", items.join(","));
        self
    }

    /// `{"<id>": value, ...}` in the given order.
    pub fn vertex_map(mut self, key: &str, values: impl IntoIterator<Item = (usize, f64)>) -> Self {
        self.key(key);
        let items: Vec<String> = values
            .into_iter()
            .map(|(id, v)| format!("\"{id}\":{}", number(v)))
            .collect();
        let _ = write!(self.buf, "{{{}}}", items.join(","));
        self
    }

    pub fn finish(mut self) -> String {
        self.buf.push('}');
        self.buf
    }
}
