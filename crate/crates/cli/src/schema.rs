//! A validator for the JSON Schema subset used by the shipped report schema:
//! `type`, `enum`, `required`, `properties`, `additionalProperties`, `items`,
//! `minLength`, `maxLength`, `minimum`, `maximum`. Annotations are ignored.

use serde_json::Value;

pub const RUN_REPORT_SCHEMA: &str = include_str!("../../../schema/run_report.schema.json");

pub fn run_report_schema() -> Value {
    serde_json::from_str(RUN_REPORT_SCHEMA).expect("shipped schema is valid JSON")
}

fn type_matches(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64() || v.as_f64().is_some_and(|f| f.fract() == 0.0),
        _ => false,
    }
}

/// All violations, each prefixed by a JSON pointer to the offending value.
pub fn validate(schema: &Value, instance: &Value) -> Vec<String> {
    let mut errors = Vec::new();
    check(schema, instance, "", &mut errors);
    errors
}

fn check(schema: &Value, v: &Value, path: &str, errors: &mut Vec<String>) {
    let Some(s) = schema.as_object() else {
        if schema == &Value::Bool(false) {
            errors.push(format!("{path}: not allowed"));
        }
        return;
    };
    let at = if path.is_empty() { "/" } else { path };
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(t) => type_matches(t, v),
            Value::Array(ts) => ts.iter().filter_map(Value::as_str).any(|t| type_matches(t, v)),
            _ => true,
        };
        if !ok {
            errors.push(format!("{at}: expected type {t}"));
            return;
        }
    }
    if let Some(Value::Array(opts)) = s.get("enum") {
        if !opts.contains(v) {
            errors.push(format!("{at}: {v} not in enum"));
        }
    }
    if let Value::String(text) = v {
        let n = text.chars().count() as u64;
        if s.get("minLength").and_then(Value::as_u64).is_some_and(|m| n < m) {
            errors.push(format!("{at}: string shorter than minLength"));
        }
        if s.get("maxLength").and_then(Value::as_u64).is_some_and(|m| n > m) {
            errors.push(format!("{at}: string longer than maxLength"));
        }
    }
    if let Some(x) = v.as_f64() {
        if s.get("minimum").and_then(Value::as_f64).is_some_and(|m| x < m) {
            errors.push(format!("{at}: {x} below minimum"));
        }
        if s.get("maximum").and_then(Value::as_f64).is_some_and(|m| x > m) {
            errors.push(format!("{at}: {x} above maximum"));
        }
    }
    if let Value::Array(items) = v {
        if let Some(item) = s.get("items") {
            for (i, x) in items.iter().enumerate() {
                check(item, x, &format!("{path}/{i}"), errors);
            }
        }
    }
    if let Value::Object(map) = v {
        if let Some(Value::Array(req)) = s.get("required") {
            for k in req.iter().filter_map(Value::as_str) {
                if !map.contains_key(k) {
                    errors.push(format!("{at}: missing required `{k}`"));
                }
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, x) in map {
            let child = format!("{path}/{k}");
            match props.and_then(|p| p.get(k)) {
                Some(sub) => check(sub, x, &child, errors),
                None => match s.get("additionalProperties") {
                    Some(Value::Bool(false)) => errors.push(format!("{at}: unexpected property `{k}`")),
                    Some(sub @ Value::Object(_)) => check(sub, x, &child, errors),
                    _ => {}
                },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn subset_keywords() {
        let s = json!({
            "type": "object",
            "required": ["a"],
            "additionalProperties": false,
            "properties": {
                "a": {"type": "integer", "minimum": 0, "maximum": 3},
                "b": {"type": ["string", "null"], "minLength": 2},
                "c": {"type": "array", "items": {"enum": [1, 2]}}
            }
        });
        assert!(validate(&s, &json!({"a": 1, "b": null, "c": [1, 2]})).is_empty());
        assert_eq!(validate(&s, &json!({"b": "x"})).len(), 2);
        assert_eq!(validate(&s, &json!({"a": 4, "c": [3], "d": 0})).len(), 3);
        assert_eq!(validate(&s, &json!({"a": 1.5})).len(), 1);
        assert_eq!(validate(&s, &json!([])).len(), 1);
    }

    #[test]
    fn shipped_schema_loads() {
        let s = run_report_schema();
        assert_eq!(s["type"], "object");
    }
}
