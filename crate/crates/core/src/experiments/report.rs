//! JSON and CSV rendering shared by every command.
//!
//! Complex numbers are `[re, im]`, paths are bit-strings and distributions map outcome
//! bit-strings to probabilities. Every report carries `"schema"` and a `"digest"`: the
//! SHA-256 of the compact JSON of all other fields (keys sorted).

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::density::Matrix2c;
use crate::oracle::Distribution;

pub const SCHEMA: u64 = 1;

pub fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn complexes(zs: &[C64]) -> Value {
    Value::Array(zs.iter().map(|z| complex(*z)).collect())
}

pub fn matrix2(m: &Matrix2c) -> Value {
    json!([
        [complex(m[(0, 0)]), complex(m[(0, 1)])],
        [complex(m[(1, 0)]), complex(m[(1, 1)])]
    ])
}

/// Finite floats as numbers, anything else as a string (`"inf"`, `"NaN"`).
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

pub fn distribution(d: &Distribution) -> Value {
    let map: Map<String, Value> = d.to_map().into_iter().map(|(k, v)| (k, json!(v))).collect();
    Value::Object(map)
}

/// Adds `schema`, `command` and `digest` to an object body.
pub fn finish(command: &str, body: Value) -> Value {
    let mut map = match body {
        Value::Object(map) => map,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("schema".into(), json!(SCHEMA));
    map.insert("command".into(), json!(command));
    map.remove("digest");
    let compact = serde_json::to_string(&map).expect("reports serialize");
    let digest = hex::encode(Sha256::digest(compact.as_bytes()));
    map.insert("digest".into(), json!(digest));
    Value::Object(map)
}

pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Minimal CSV: fields containing commas or quotes are quoted.
pub fn render_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let field = |s: &str| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|s| field(s)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn distribution_rows(d: &Distribution) -> Vec<Vec<String>> {
    d.to_map()
        .into_iter()
        .map(|(k, v)| vec![k, v.to_string()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_excludes_itself() {
        let a = finish("x", json!({"b": 1, "a": [1.5, 2]}));
        let b = finish("x", json!({"a": [1.5, 2], "b": 1}));
        assert_eq!(a, b);
        let again = finish("x", a.clone());
        assert_eq!(again["digest"], a["digest"]);
        assert_eq!(a["schema"], 1);
    }

    #[test]
    fn csv_quoting() {
        let s = render_csv(&["p", "q"], &[vec!["0|1".into(), "a,b".into()]]);
        assert_eq!(s, "p,q\n0|1,\"a,b\"\n");
    }

    #[test]
    fn non_finite_reals_become_strings() {
        assert_eq!(real(f64::INFINITY), json!("inf"));
        assert_eq!(real(0.25), json!(0.25));
    }
}
