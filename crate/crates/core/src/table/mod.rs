//! Degree tables for grid-partitioned PDMM.
//!
//! A table is the addition table of `alpha = alpha_p || alpha_s` against
//! `beta = beta_p || beta_s`. With a cyclic modulus `q` every sum is reduced
//! into `Z_q` (a cyclic-addition table); without one the entries are plain
//! nonnegative integers.
//!
//! Indices are 0-based in the Rust API and 1-based in [`Position`], which is
//! what ends up in reports.

mod file;
mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use file::{load_table, load_table_file, save_table, save_table_file};
pub use validate::{
    check_condition_iv, validate, ConditionIv, IvMode, Status, ValidationReport, Verdict, Witness,
    IV_SEARCH_SEED,
};
pub(crate) use validate::{IV_RANDOM_CANDIDATES, IV_SUBSET_LIMIT};

/// Largest degree accepted in a plain table; keeps every sum inside `u64`.
pub const MAX_DEGREE: u64 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableParams {
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub t: usize,
}

impl TableParams {
    pub fn new(k: usize, m: usize, l: usize, t: usize) -> Self {
        TableParams { k, m, l, t }
    }
}

impl std::fmt::Display for TableParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", self.k, self.m, self.l, self.t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DegreeTable {
    params: TableParams,
    alpha_p: Vec<u64>,
    beta_p: Vec<u64>,
    alpha_s: Vec<u64>,
    beta_s: Vec<u64>,
    q: Option<u64>,
}

impl DegreeTable {
    /// Checks vector lengths and entry ranges. With `q` present every entry
    /// must already be a canonical residue.
    pub fn new(
        params: TableParams,
        alpha_p: Vec<u64>,
        beta_p: Vec<u64>,
        alpha_s: Vec<u64>,
        beta_s: Vec<u64>,
        q: Option<u64>,
    ) -> Result<Self> {
        let TableParams { k, m, l, t } = params;
        for (name, v) in [("k", k), ("m", m), ("l", l), ("t", t)] {
            if v == 0 {
                return Err(Error::schema(name, "must be at least 1"));
            }
        }
        if q == Some(0) {
            return Err(Error::schema("q", "must be at least 1"));
        }
        let bound = q.unwrap_or(MAX_DEGREE);
        for (name, v, len) in [
            ("alpha_p", &alpha_p, k.checked_mul(m)),
            ("beta_p", &beta_p, l.checked_mul(m)),
            ("alpha_s", &alpha_s, Some(t)),
            ("beta_s", &beta_s, Some(t)),
        ] {
            if Some(v.len()) != len {
                return Err(Error::schema(
                    name,
                    format!("expected {} entries, found {}", len.unwrap_or(usize::MAX), v.len()),
                ));
            }
            if let Some(bad) = v.iter().find(|&&d| d >= bound) {
                let msg = match q {
                    Some(q) => format!("entry {bad} is not a residue mod {q}"),
                    None => format!("entry {bad} exceeds 2^62"),
                };
                return Err(Error::schema(name, msg));
            }
        }
        Ok(DegreeTable {
            params,
            alpha_p,
            beta_p,
            alpha_s,
            beta_s,
            q,
        })
    }

    /// Like [`DegreeTable::new`], reducing every entry mod `q` first.
    pub fn new_reduced(
        params: TableParams,
        alpha_p: Vec<u64>,
        beta_p: Vec<u64>,
        alpha_s: Vec<u64>,
        beta_s: Vec<u64>,
        q: u64,
    ) -> Result<Self> {
        if q == 0 {
            return Err(Error::schema("q", "must be at least 1"));
        }
        let r = |v: Vec<u64>| v.into_iter().map(|d| d % q).collect();
        Self::new(params, r(alpha_p), r(beta_p), r(alpha_s), r(beta_s), Some(q))
    }

    pub fn params(&self) -> TableParams {
        self.params
    }

    pub fn q(&self) -> Option<u64> {
        self.q
    }

    pub fn is_cyclic(&self) -> bool {
        self.q.is_some()
    }

    pub fn alpha_p(&self) -> &[u64] {
        &self.alpha_p
    }

    pub fn beta_p(&self) -> &[u64] {
        &self.beta_p
    }

    pub fn alpha_s(&self) -> &[u64] {
        &self.alpha_s
    }

    pub fn beta_s(&self) -> &[u64] {
        &self.beta_s
    }

    /// `alpha_p || alpha_s`
    pub fn alpha(&self) -> Vec<u64> {
        [self.alpha_p.as_slice(), &self.alpha_s].concat()
    }

    /// `beta_p || beta_s`
    pub fn beta(&self) -> Vec<u64> {
        [self.beta_p.as_slice(), &self.beta_s].concat()
    }

    /// The `k`th length-`M` slice of `alpha_p` (0-based).
    pub fn alpha_block(&self, k: usize) -> &[u64] {
        let m = self.params.m;
        &self.alpha_p[k * m..(k + 1) * m]
    }

    pub fn beta_block(&self, l: usize) -> &[u64] {
        let m = self.params.m;
        &self.beta_p[l * m..(l + 1) * m]
    }

    /// Table addition, reduced mod `q` when present.
    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        match self.q {
            Some(q) => (a + b) % q,
            None => a + b,
        }
    }

    /// `(params, alpha_p, beta_p, alpha_s, beta_s, q)`.
    #[allow(clippy::type_complexity)]
    pub fn into_parts(self) -> (TableParams, Vec<u64>, Vec<u64>, Vec<u64>, Vec<u64>, Option<u64>) {
        (
            self.params,
            self.alpha_p,
            self.beta_p,
            self.alpha_s,
            self.beta_s,
            self.q,
        )
    }

    /// Every table cell with its position and value.
    pub fn cells(&self) -> Vec<Cell> {
        let TableParams { k, m, l, t } = self.params;
        let mut out = Vec::with_capacity((k * m + t) * (l * m + t));
        for (r, &a) in self.alpha_p.iter().enumerate() {
            for (c, &b) in self.beta_p.iter().enumerate() {
                out.push(Cell {
                    position: Position::TopLeft {
                        k: r / m + 1,
                        l: c / m + 1,
                        i: r % m + 1,
                        j: c % m + 1,
                    },
                    value: self.add(a, b),
                });
            }
            for (c, &b) in self.beta_s.iter().enumerate() {
                out.push(Cell {
                    position: Position::TopRight { row: r + 1, col: c + 1 },
                    value: self.add(a, b),
                });
            }
        }
        for (r, &a) in self.alpha_s.iter().enumerate() {
            for (c, &b) in self.beta_p.iter().enumerate() {
                out.push(Cell {
                    position: Position::BottomLeft { row: r + 1, col: c + 1 },
                    value: self.add(a, b),
                });
            }
            for (c, &b) in self.beta_s.iter().enumerate() {
                out.push(Cell {
                    position: Position::BottomRight { row: r + 1, col: c + 1 },
                    value: self.add(a, b),
                });
            }
        }
        out
    }

    /// The distinct table entries in increasing order.
    pub fn sumset(&self) -> Vec<u64> {
        let beta = self.beta();
        let set: BTreeSet<u64> = self
            .alpha()
            .iter()
            .flat_map(|&a| beta.iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.add(a, b))
            .collect();
        set.into_iter().collect()
    }
}

/// Location of a table entry, or of a degree inside `alpha` / `beta`.
/// All indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Position {
    /// Entry `(i, j)` of block `(k, l)` in the top-left quadrant.
    TopLeft { k: usize, l: usize, i: usize, j: usize },
    /// `alpha_p[row] + beta_s[col]`
    TopRight { row: usize, col: usize },
    /// `alpha_s[row] + beta_p[col]`
    BottomLeft { row: usize, col: usize },
    /// `alpha_s[row] + beta_s[col]`
    BottomRight { row: usize, col: usize },
    /// Degree `index` of `alpha_p || alpha_s`.
    Alpha { index: usize },
    /// Degree `index` of `beta_p || beta_s`.
    Beta { index: usize },
}

impl Position {
    /// Whether a top-left entry sits on the main antidiagonal of its block.
    pub fn on_antidiagonal(&self, m: usize) -> bool {
        matches!(*self, Position::TopLeft { i, j, .. } if i + j == m + 1)
    }

    pub fn block(&self) -> Option<(usize, usize)> {
        match *self {
            Position::TopLeft { k, l, .. } => Some((k, l)),
            _ => None,
        }
    }
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Position::TopLeft { k, l, i, j } => write!(f, "TL block ({k},{l}) entry ({i},{j})"),
            Position::TopRight { row, col } => write!(f, "TR alpha_p[{row}] + beta_s[{col}]"),
            Position::BottomLeft { row, col } => write!(f, "BL alpha_s[{row}] + beta_p[{col}]"),
            Position::BottomRight { row, col } => write!(f, "BR alpha_s[{row}] + beta_s[{col}]"),
            Position::Alpha { index } => write!(f, "alpha[{index}]"),
            Position::Beta { index } => write!(f, "beta[{index}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub position: Position,
    pub value: u64,
}

/// The entry sets of a table. Block-indexed vectors are `[k][l]`, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub tl_blocks: Vec<Vec<BTreeSet<u64>>>,
    /// Main antidiagonal of each block.
    pub u: Vec<Vec<BTreeSet<u64>>>,
    /// Strictly above the antidiagonal (`i + j < M + 1`).
    pub a: Vec<Vec<BTreeSet<u64>>>,
    /// Strictly below the antidiagonal (`i + j > M + 1`).
    pub b: Vec<Vec<BTreeSet<u64>>>,
    /// `a ∪ b`
    pub tl_off: Vec<Vec<BTreeSet<u64>>>,
    pub tr: BTreeSet<u64>,
    pub bl: BTreeSet<u64>,
    pub br: BTreeSet<u64>,
    /// `{alpha_s} + beta_p_l[1]`
    pub c: Vec<BTreeSet<u64>>,
    /// `{alpha_s} + {beta_p_l[j] : j >= 2}`
    pub d: Vec<BTreeSet<u64>>,
}

pub fn decompose(table: &DegreeTable) -> BlockDecomposition {
    let TableParams { k: kk, m, l: ll, .. } = table.params;
    let empty = || vec![vec![BTreeSet::new(); ll]; kk];
    let mut tl_blocks = empty();
    let mut u = empty();
    let mut a = empty();
    let mut b = empty();
    for k in 0..kk {
        let ak = table.alpha_block(k);
        for l in 0..ll {
            let bl = table.beta_block(l);
            for (i, &ai) in ak.iter().enumerate() {
                for (j, &bj) in bl.iter().enumerate() {
                    let v = table.add(ai, bj);
                    tl_blocks[k][l].insert(v);
                    // 0-based antidiagonal: i + j = M - 1
                    match (i + j).cmp(&(m - 1)) {
                        std::cmp::Ordering::Less => a[k][l].insert(v),
                        std::cmp::Ordering::Equal => u[k][l].insert(v),
                        std::cmp::Ordering::Greater => b[k][l].insert(v),
                    };
                }
            }
        }
    }
    let tl_off = a
        .iter()
        .zip(&b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x | y).collect())
        .collect();
    let sums = |xs: &[u64], ys: &[u64]| -> BTreeSet<u64> {
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .map(|(x, y)| table.add(x, y))
            .collect()
    };
    let c = (0..ll)
        .map(|l| sums(&table.alpha_s, &table.beta_block(l)[..1]))
        .collect();
    let d = (0..ll)
        .map(|l| sums(&table.alpha_s, &table.beta_block(l)[1..]))
        .collect();
    BlockDecomposition {
        tl_blocks,
        u,
        a,
        b,
        tl_off,
        tr: sums(&table.alpha_p, &table.beta_s),
        bl: sums(&table.alpha_s, &table.beta_p),
        br: sums(&table.alpha_s, &table.beta_s),
        c,
        d,
    }
}

/// Number of distinct entries of the table, i.e. the number of workers.
pub fn worker_count(table: &DegreeTable) -> usize {
    table.sumset().len()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn fig2a() -> DegreeTable {
        DegreeTable::new(
            TableParams::new(6, 1, 3, 2),
            (0..6).collect(),
            vec![0, 22, 15],
            vec![6, 28],
            vec![7, 8],
            Some(29),
        )
        .unwrap()
    }

    pub fn fig2b() -> DegreeTable {
        DegreeTable::new(
            TableParams::new(2, 3, 3, 2),
            (0..6).collect(),
            vec![0, 1, 2, 22, 23, 24, 15, 16, 17],
            vec![6, 28],
            vec![7, 8],
            Some(29),
        )
        .unwrap()
    }

    pub fn tiny_dt() -> DegreeTable {
        DegreeTable::new(
            TableParams::new(2, 1, 1, 1),
            vec![0, 1],
            vec![0],
            vec![2],
            vec![3],
            None,
        )
        .unwrap()
    }
}
