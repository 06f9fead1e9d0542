//! Report documents. Keys are sorted (`serde_json::Map` is a `BTreeMap`),
//! numbers carry at most 12 significant digits and non-finite numbers are
//! written as the strings `"inf"`, `"-inf"` and `"nan"`.

use serde_json::{Map, Value};

/// `x` rounded to 12 significant digits.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        return Value::String("nan".into());
    }
    if x.is_infinite() {
        return Value::String(if x > 0.0 { "inf" } else { "-inf" }.into());
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    // Avoid printing negative zero.
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn strs<S: AsRef<str>>(xs: &[S]) -> Value {
    Value::Array(xs.iter().map(|s| Value::String(s.as_ref().to_string())).collect())
}

/// Ordered key/value builder for JSON objects.
#[derive(Default)]
pub struct Obj(Map<String, Value>);

impl Obj {
    pub fn new() -> Self {
        Obj(Map::new())
    }

    pub fn put(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn num(self, key: &str, x: f64) -> Self {
        self.put(key, num(x))
    }

    pub fn insert(&mut self, key: &str, value: impl Into<Value>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn build(self) -> Value {
        Value::Object(self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report(pub Value);

impl Report {
    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.0).expect("report values always serialize");
        text.push('\n');
        text
    }

    pub fn parse(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text).map(Report)
    }

    pub fn outputs(&self) -> &Value {
        &self.0["outputs"]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0 / 3.0).to_string(), "0.333333333333");
        assert_eq!(num(2.0).to_string(), "2.0");
        assert_eq!(num(-0.0).to_string(), "0.0");
        assert_eq!(num(123456789.12345679).to_string(), "123456789.123");
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
    }

    #[test]
    fn keys_sorted_and_round_trip() {
        let r = Report(
            Obj::new()
                .num("zeta", 0.1)
                .num("alpha", 1e-20)
                .put("mid", nums(&[1.5, 2.0 / 3.0]))
                .build(),
        );
        let text = r.render();
        assert!(text.find("alpha").unwrap() < text.find("mid").unwrap());
        assert!(text.find("mid").unwrap() < text.find("zeta").unwrap());
        let back = Report::parse(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.render(), text);
    }
}
