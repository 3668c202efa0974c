//! Exhaustive search for minimum-`N` tables at toy sizes.
//!
//! Degrees are enumerated lexicographically over the concatenation
//! `alpha_p || beta_p || alpha_s || beta_s` with `alpha_p[1] = beta_p[1] = 0`
//! (sumsets are translation invariant). A branch is cut when it repeats a
//! degree inside `alpha` or `beta`, or when the partial sumset is already as
//! large as the best table found, so the first minimum-`N` table reached is
//! the lexicographically smallest one.

use std::collections::BTreeSet;

use serde::Serialize;

use super::brute_validate;
use crate::error::{Error, Result};
use crate::table::{DegreeTable, TableParams, MAX_DEGREE};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    /// Largest degree tried.
    pub max_exponent: u64,
    /// Cyclic moduli to search, in order; `None` searches plain tables.
    pub q_candidates: Option<Vec<u64>>,
    /// Cap on visited search-tree nodes.
    pub node_limit: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub best: Option<DegreeTable>,
    pub n: Option<usize>,
    /// False when the node limit stopped the search early.
    pub complete: bool,
    pub nodes: u64,
}

pub fn search_min_table(params: TableParams, budget: &SearchBudget) -> Result<SearchOutcome> {
    let TableParams { k, m, l, t } = params;
    if [k, m, l, t].contains(&0) {
        return Err(Error::Precondition("K, M, L, T must be at least 1".into()));
    }
    if budget.max_exponent == 0 || budget.node_limit == 0 {
        return Err(Error::Precondition("max exponent and node limit must be positive".into()));
    }
    if budget.max_exponent >= MAX_DEGREE / 2 {
        return Err(Error::Precondition("max exponent too large".into()));
    }
    let qs: Vec<Option<u64>> = match &budget.q_candidates {
        None => vec![None],
        Some(list) if list.is_empty() || list.contains(&0) => {
            return Err(Error::Precondition("q candidates must be a nonempty list of positive moduli".into()))
        }
        Some(list) => list.iter().copied().map(Some).collect(),
    };
    let mut s = Search {
        params,
        q: None,
        hi: 0,
        limit: budget.node_limit,
        nodes: 0,
        aborted: false,
        best: None,
    };
    for q in qs {
        s.q = q;
        s.hi = match q {
            Some(q) => budget.max_exponent.min(q - 1),
            None => budget.max_exponent,
        };
        let mut vals = Vec::with_capacity(k * m + l * m + 2 * t);
        s.dfs(&mut vals);
        if s.aborted {
            break;
        }
    }
    let (n, best) = s.best.map_or((None, None), |(n, t)| (Some(n), Some(t)));
    Ok(SearchOutcome {
        best,
        n,
        complete: !s.aborted,
        nodes: s.nodes,
    })
}

struct Search {
    params: TableParams,
    q: Option<u64>,
    hi: u64,
    limit: u64,
    nodes: u64,
    aborted: bool,
    best: Option<(usize, DegreeTable)>,
}

impl Search {
    fn lens(&self) -> [usize; 4] {
        let TableParams { k, m, l, t } = self.params;
        [k * m, l * m, t, t]
    }

    /// Splits an assignment prefix into its (alpha, beta) parts.
    fn sides(&self, vals: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let [ap, bp, as_, _] = self.lens();
        let take = |from: usize, len: usize| vals.iter().skip(from).take(len).copied();
        let alpha = take(0, ap).chain(take(ap + bp, as_)).collect();
        let beta = take(ap, bp).chain(take(ap + bp + as_, usize::MAX)).collect();
        (alpha, beta)
    }

    fn partial_n(&self, vals: &[u64]) -> usize {
        let (alpha, beta) = self.sides(vals);
        let set: BTreeSet<u64> = alpha
            .iter()
            .flat_map(|&a| beta.iter().map(move |&b| a + b))
            .map(|s| self.q.map_or(s, |q| s % q))
            .collect();
        set.len()
    }

    fn dfs(&mut self, vals: &mut Vec<u64>) {
        let [ap, bp, as_, bs] = self.lens();
        let pos = vals.len();
        if pos == ap + bp + as_ + bs {
            self.leaf(vals);
            return;
        }
        let fixed_zero = pos == 0 || pos == ap;
        let in_alpha = pos < ap || (ap + bp..ap + bp + as_).contains(&pos);
        let hi = if fixed_zero { 0 } else { self.hi };
        for v in 0..=hi {
            if self.nodes >= self.limit {
                self.aborted = true;
                return;
            }
            self.nodes += 1;
            let (alpha, beta) = self.sides(vals);
            if (if in_alpha { &alpha } else { &beta }).contains(&v) {
                continue;
            }
            vals.push(v);
            let bound = self.best.as_ref().map_or(usize::MAX, |(n, _)| *n);
            if self.partial_n(vals) < bound {
                self.dfs(vals);
            }
            vals.pop();
            if self.aborted {
                return;
            }
        }
    }

    fn leaf(&mut self, vals: &[u64]) {
        let [ap, bp, as_, _] = self.lens();
        let table = DegreeTable::new(
            self.params,
            vals[..ap].to_vec(),
            vals[ap..ap + bp].to_vec(),
            vals[ap + bp..ap + bp + as_].to_vec(),
            vals[ap + bp + as_..].to_vec(),
            self.q,
        )
        .expect("entries are in range by construction");
        let report = brute_validate(&table);
        if report.is_valid() && self.best.as_ref().is_none_or(|(n, _)| report.n < *n) {
            self.best = Some((report.n, table));
        }
    }
}
