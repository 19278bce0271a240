//! Flat JSON run reports.

use std::time::Duration;

use serde::Serialize;
use serde_json::{Map, Value};

/// Significant digits kept for every floating-point number printed.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every non-integer number in `v` to [`SIGNIFICANT_DIGITS`].
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// One subcommand result: `subcommand`, echoed `parameters`, then result keys.
pub struct Report {
    fields: Map<String, Value>,
}

impl Report {
    pub fn new(subcommand: &str, parameters: Value) -> Self {
        let mut fields = Map::new();
        fields.insert("subcommand".into(), subcommand.into());
        fields.insert("parameters".into(), parameters);
        Report { fields }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("serializable result");
        self.fields.insert(key.into(), v);
        self
    }

    /// Merges the fields of a serializable struct at top level.
    pub fn extend(&mut self, value: impl Serialize) -> &mut Self {
        if let Value::Object(map) = serde_json::to_value(value).expect("serializable result") {
            self.fields.extend(map);
        }
        self
    }

    pub fn render(&self, wall_time: Option<Duration>) -> String {
        let mut v = Value::Object(self.fields.clone());
        if let (Some(t), Value::Object(map)) = (wall_time, &mut v) {
            map.insert("wall_time".into(), t.as_secs_f64().into());
        }
        round_floats(&mut v);
        serde_json::to_string(&v).expect("JSON value")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-2.5e-300), -2.5e-300);
        let mut v = serde_json::json!({"a": [1, 2.000000000000001], "b": {"c": 7}});
        round_floats(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[1,2.0],"b":{"c":7}}"#);
    }
}
