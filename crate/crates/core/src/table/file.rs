//! Table file format: a single JSON object
//! `{"k":..,"m":..,"l":..,"t":..,"q":int|null,"alpha_p":[..],"beta_p":[..],"alpha_s":[..],"beta_s":[..]}`.
//! The canonical writer emits exactly that key order with no whitespace and
//! a trailing newline.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::{DegreeTable, TableParams};
use crate::error::{Error, Result};

const KEYS: [&str; 9] = ["k", "m", "l", "t", "q", "alpha_p", "beta_p", "alpha_s", "beta_s"];

#[derive(Serialize)]
struct Canonical<'a> {
    k: usize,
    m: usize,
    l: usize,
    t: usize,
    q: Option<u64>,
    alpha_p: &'a [u64],
    beta_p: &'a [u64],
    alpha_s: &'a [u64],
    beta_s: &'a [u64],
}

pub fn save_table(table: &DegreeTable) -> String {
    let TableParams { k, m, l, t } = table.params();
    let doc = Canonical {
        k,
        m,
        l,
        t,
        q: table.q(),
        alpha_p: table.alpha_p(),
        beta_p: table.beta_p(),
        alpha_s: table.alpha_s(),
        beta_s: table.beta_s(),
    };
    let mut s = serde_json::to_string(&doc).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn load_table(doc: &str) -> Result<DegreeTable> {
    let value: Value = serde_json::from_str(doc).map_err(|e| Error::Malformed(e.to_string()))?;
    let Value::Object(obj) = value else {
        return Err(Error::Malformed("expected a JSON object".into()));
    };
    if let Some(extra) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(Error::schema(extra.as_str(), "unknown field"));
    }
    let params = TableParams {
        k: dimension(&obj, "k")?,
        m: dimension(&obj, "m")?,
        l: dimension(&obj, "l")?,
        t: dimension(&obj, "t")?,
    };
    let q = match required(&obj, "q")? {
        Value::Null => None,
        v => Some(
            v.as_u64()
                .ok_or_else(|| Error::schema("q", "expected a nonnegative integer or null"))?,
        ),
    };
    DegreeTable::new(
        params,
        degrees(&obj, "alpha_p")?,
        degrees(&obj, "beta_p")?,
        degrees(&obj, "alpha_s")?,
        degrees(&obj, "beta_s")?,
        q,
    )
}

pub fn load_table_file(path: impl AsRef<Path>) -> Result<DegreeTable> {
    load_table(&std::fs::read_to_string(path)?)
}

pub fn save_table_file(table: &DegreeTable, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, save_table(table))?;
    Ok(())
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(key, "missing required field"))
}

fn dimension(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    required(obj, key)?
        .as_u64()
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| Error::schema(key, "expected a nonnegative integer"))
}

fn degrees(obj: &Map<String, Value>, key: &str) -> Result<Vec<u64>> {
    let Value::Array(items) = required(obj, key)? else {
        return Err(Error::schema(key, "expected an array of integers"));
    };
    items
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_u64()
                .ok_or_else(|| Error::schema(key, format!("entry {i} is not a nonnegative integer")))
        })
        .collect()
}
