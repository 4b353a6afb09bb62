#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

pub fn armpose(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_armpose"))
        .args(args)
        .current_dir(cwd)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

/// Run and require exit 0; returns stdout.
pub fn ok(args: &[&str], cwd: &Path) -> String {
    let out = armpose(args, cwd);
    assert!(
        out.status.success(),
        "armpose {args:?} exited {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("not JSON ({e}):\n{text}"))
}

pub fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    json(&std::fs::read_to_string(path).unwrap())
}

/// Panics with every violation if `value` does not match the named schema.
pub fn assert_schema(name: &str, value: &Value) {
    let mut errors = Vec::new();
    check(&schema(name), value, "$", &mut errors);
    assert!(errors.is_empty(), "{name} schema violations:\n{}", errors.join("\n"));
}

/// Validator for the keyword subset the published schemas use.
pub fn check(s: &Value, v: &Value, at: &str, errors: &mut Vec<String>) {
    let Some(s) = s.as_object() else { return };
    if let Some(t) = s.get("type").and_then(Value::as_str) {
        let good = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            "integer" => v.is_i64() || v.is_u64(),
            "number" => v.is_number(),
            other => panic!("unsupported type {other}"),
        };
        if !good {
            errors.push(format!("{at}: expected {t}, got {v}"));
            return;
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            errors.push(format!("{at}: expected {c}, got {v}"));
        }
    }
    if let Some(options) = s.get("enum").and_then(Value::as_array) {
        if !options.contains(v) {
            errors.push(format!("{at}: {v} not in {options:?}"));
        }
    }
    if let Some(branches) = s.get("anyOf").and_then(Value::as_array) {
        let matched = branches.iter().any(|b| {
            let mut e = Vec::new();
            check(b, v, at, &mut e);
            e.is_empty()
        });
        if !matched {
            errors.push(format!("{at}: no anyOf branch matches {v}"));
        }
    }
    if let Some(x) = v.as_f64() {
        if let Some(m) = s.get("minimum").and_then(Value::as_f64) {
            if x < m {
                errors.push(format!("{at}: {x} < {m}"));
            }
        }
        if let Some(m) = s.get("maximum").and_then(Value::as_f64) {
            if x > m {
                errors.push(format!("{at}: {x} > {m}"));
            }
        }
        if let Some(m) = s.get("exclusiveMinimum").and_then(Value::as_f64) {
            if x <= m {
                errors.push(format!("{at}: {x} <= {m}"));
            }
        }
    }
    if let Some(items) = v.as_array() {
        if let Some(n) = s.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < n {
                errors.push(format!("{at}: {} items, want at least {n}", items.len()));
            }
        }
        if let Some(n) = s.get("maxItems").and_then(Value::as_u64) {
            if items.len() as u64 > n {
                errors.push(format!("{at}: {} items, want at most {n}", items.len()));
            }
        }
        if let Some(item) = s.get("items") {
            for (i, x) in items.iter().enumerate() {
                check(item, x, &format!("{at}[{i}]"), errors);
            }
        }
    }
    if let Some(map) = v.as_object() {
        let props = s.get("properties").and_then(Value::as_object);
        for key in s.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = key.as_str().unwrap();
            if !map.contains_key(key) {
                errors.push(format!("{at}: missing {key}"));
            }
        }
        for (k, x) in map {
            let path = format!("{at}.{k}");
            match (props.and_then(|p| p.get(k)), s.get("additionalProperties")) {
                (Some(sub), _) => check(sub, x, &path, errors),
                (None, Some(Value::Bool(false))) => errors.push(format!("{path}: unexpected")),
                (None, Some(sub)) if sub.is_object() => check(sub, x, &path, errors),
                _ => {}
            }
        }
    }
}
