//! Parameter sweeps over `(K, M, L, T)` grids with CSV output.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::construction::{build_from_params, grid_cat_params, theorem2_bound};
use crate::error::{Error, Result};
use crate::extension::{check_theorem1_bounds, extend, ExtensionMode};
use crate::table::{load_table_file, validate, DegreeTable, TableParams};

pub const CSV_HEADER: &str = "k,m,l,t,scheme,n,valid,bound";

/// Inclusive integer range written `a..b` or a single value `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ParamRange {
    pub lo: usize,
    pub hi: usize,
}

impl ParamRange {
    pub fn single(v: usize) -> Self {
        ParamRange { lo: v, hi: v }
    }

    pub fn values(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

impl FromStr for ParamRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Malformed(format!("range `{s}`: {why}"));
        let num = |p: &str| {
            let p = p.trim();
            if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad("expected nonnegative integers"));
            }
            p.parse::<usize>().map_err(|_| bad("number too large"))
        };
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b)?),
            None => {
                let v = num(s)?;
                (v, v)
            }
        };
        if lo == 0 {
            return Err(bad("parameters start at 1"));
        }
        if lo > hi {
            return Err(bad("empty range"));
        }
        Ok(ParamRange { lo, hi })
    }
}

impl fmt::Display for ParamRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepRanges {
    pub k: ParamRange,
    pub m: ParamRange,
    pub l: ParamRange,
    pub t: ParamRange,
}

impl SweepRanges {
    /// Every tuple in lexicographic `(K, M, L, T)` order.
    pub fn tuples(&self) -> Vec<TableParams> {
        let mut out = Vec::new();
        for k in self.k.values() {
            for m in self.m.values() {
                for l in self.l.values() {
                    for t in self.t.values() {
                        out.push(TableParams::new(k, m, l, t));
                    }
                }
            }
        }
        out
    }
}

/// A scheme as written on the command line:
/// `construction1`, `ext-<mode>:<path>` or `table:<path>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeSpec {
    Construction1,
    Extension { mode: ExtensionMode, path: PathBuf },
    TableFile(PathBuf),
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "construction1" {
            return Ok(SchemeSpec::Construction1);
        }
        let nonempty = |p: &str| {
            if p.is_empty() {
                Err(Error::Malformed(format!("scheme `{s}` has an empty path")))
            } else {
                Ok(PathBuf::from(p))
            }
        };
        if let Some(path) = s.strip_prefix("table:") {
            return Ok(SchemeSpec::TableFile(nonempty(path)?));
        }
        if let Some(rest) = s.strip_prefix("ext-") {
            let (mode, path) = rest
                .split_once(':')
                .ok_or_else(|| Error::Malformed(format!("scheme `{s}` lacks `:<path>`")))?;
            let mode = mode.parse().map_err(|e: Error| Error::Malformed(e.to_string()))?;
            return Ok(SchemeSpec::Extension {
                mode,
                path: nonempty(path)?,
            });
        }
        Err(Error::Malformed(format!(
            "unknown scheme `{s}` (expected construction1, ext-<mode>:<path> or table:<path>)"
        )))
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSpec::Construction1 => f.write_str("construction1"),
            SchemeSpec::Extension { mode, path } => write!(f, "ext-{mode}:{}", path.display()),
            SchemeSpec::TableFile(path) => write!(f, "table:{}", path.display()),
        }
    }
}

/// Comma-separated scheme list; `none` or an empty string selects nothing.
pub fn parse_schemes(s: &str) -> Result<Vec<SchemeSpec>> {
    let s = s.trim();
    if s.is_empty() || s == "none" {
        return Ok(Vec::new());
    }
    s.split(',').map(str::parse).collect()
}

/// A scheme with its table files loaded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SweepScheme {
    Construction1,
    Extension {
        name: String,
        mode: ExtensionMode,
        source: DegreeTable,
    },
    Table {
        name: String,
        table: DegreeTable,
    },
}

impl SweepScheme {
    pub fn name(&self) -> &str {
        match self {
            SweepScheme::Construction1 => "construction1",
            SweepScheme::Extension { name, .. } | SweepScheme::Table { name, .. } => name,
        }
    }
}

pub fn load_schemes(specs: &[SchemeSpec]) -> Result<Vec<SweepScheme>> {
    specs
        .iter()
        .map(|spec| {
            Ok(match spec {
                SchemeSpec::Construction1 => SweepScheme::Construction1,
                SchemeSpec::Extension { mode, path } => SweepScheme::Extension {
                    name: spec.to_string(),
                    mode: *mode,
                    source: load_table_file(path)?,
                },
                SchemeSpec::TableFile(path) => SweepScheme::Table {
                    name: spec.to_string(),
                    table: load_table_file(path)?,
                },
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub t: usize,
    pub scheme: String,
    /// Worker count; empty when the scheme does not apply to the tuple.
    pub n: Option<usize>,
    pub valid: bool,
    /// Worker bound for the scheme, when it has one.
    pub bound: Option<u64>,
}

fn evaluate(p: TableParams, scheme: &SweepScheme) -> SweepRow {
    let mut row = SweepRow {
        k: p.k,
        m: p.m,
        l: p.l,
        t: p.t,
        scheme: scheme.name().to_string(),
        n: None,
        valid: false,
        bound: None,
    };
    match scheme {
        SweepScheme::Construction1 => {
            let Ok(cp) = grid_cat_params(p.k, p.m, p.l, p.t) else {
                return row;
            };
            let table = build_from_params(&cp).expect("parameters were accepted");
            let report = validate(&table);
            row.n = Some(report.n);
            row.valid = report.is_valid();
            row.bound = Some(theorem2_bound(&cp));
        }
        SweepScheme::Extension { mode, source, .. } => {
            let s = source.params();
            if s.l != p.l || s.t != p.t || s.k != p.k * p.m {
                return row;
            }
            let Ok(ext) = extend(source, *mode, p.m) else {
                return row;
            };
            let report = validate(&ext);
            row.n = Some(report.n);
            row.valid = report.is_valid();
            row.bound = Some(check_theorem1_bounds(source, &ext, *mode).upper_bound as u64);
        }
        SweepScheme::Table { table, .. } => {
            if table.params() != p {
                return row;
            }
            let report = validate(table);
            row.n = Some(report.n);
            row.valid = report.is_valid();
        }
    }
    row
}

/// One row per tuple and scheme, tuples in lexicographic order and schemes
/// in the given order. Tuples are evaluated in parallel.
pub fn sweep(ranges: &SweepRanges, schemes: &[SweepScheme]) -> Vec<SweepRow> {
    if schemes.is_empty() {
        return Vec::new();
    }
    ranges
        .tuples()
        .into_par_iter()
        .flat_map_iter(|p| schemes.iter().map(move |s| evaluate(p, s)))
        .collect()
}

pub fn write_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            r.k.to_string(),
            r.m.to_string(),
            r.l.to_string(),
            r.t.to_string(),
            r.scheme.clone(),
            opt(r.n.map(|n| n.to_string())),
            r.valid.to_string(),
            opt(r.bound.map(|b| b.to_string())),
        ])?;
    }
    w.flush()?;
    Ok(())
}
