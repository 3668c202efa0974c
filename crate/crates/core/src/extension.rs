//! Lifting outer-product tables (`M = 1`) to the grid partition.
//!
//! All three operations keep `alpha_p`, `alpha_s` and `beta_s` and replace
//! `beta_p` by `beta_p ⊕ (alpha_p[1..M] - alpha_p[1])`, where `⊕` runs the
//! outer index over `beta_p` and the inner index over the offsets. The source
//! must have an arithmetic-progression `alpha_p` whose length is divisible by
//! the new grid parameter `M`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::gcd;
use crate::table::{decompose, validate, worker_count, DegreeTable, TableParams};

/// `gap(len, step, chain)`: runs of `chain` consecutive integers starting at
/// `0, step, 2 step, ..`, truncated to `len` entries.
pub fn gap(len: usize, step: u64, chain: u64) -> Result<Vec<u64>> {
    if len == 0 || step == 0 || chain == 0 {
        return Err(Error::Precondition("gap parameters must be at least 1".into()));
    }
    if chain > step {
        return Err(Error::Precondition(format!(
            "chain length {chain} exceeds step {step}; the progression would not be increasing"
        )));
    }
    Ok((0..len as u64).map(|n| (n / chain) * step + n % chain).collect())
}

/// Common difference of an integer sequence, `None` if it is not an
/// arithmetic progression. A single entry is a progression with step 1.
pub fn is_arithmetic_progression(v: &[u64]) -> Result<Option<i64>> {
    match v {
        [] => Err(Error::Precondition("empty sequence".into())),
        [_] => Ok(Some(1)),
        [a, b, ..] => {
            let d = *b as i128 - *a as i128;
            let ok = v.windows(2).all(|w| w[1] as i128 - w[0] as i128 == d);
            Ok(ok.then_some(d as i64))
        }
    }
}

/// Common difference mod `q`, or `None`.
fn cyclic_progression(v: &[u64], q: u64) -> Option<u64> {
    match v {
        [] => None,
        [_] => Some(1),
        [a, b, ..] => {
            let d = (b + q - a) % q;
            v.windows(2).all(|w| (w[1] + q - w[0]) % q == d).then_some(d)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ExtensionMode {
    DtToDt,
    CatToCat,
    DtToCat,
}

impl fmt::Display for ExtensionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtensionMode::DtToDt => "dt-dt",
            ExtensionMode::CatToCat => "cat-cat",
            ExtensionMode::DtToCat => "dt-cat",
        })
    }
}

impl FromStr for ExtensionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dt-dt" => Ok(ExtensionMode::DtToDt),
            "cat-cat" => Ok(ExtensionMode::CatToCat),
            "dt-cat" => Ok(ExtensionMode::DtToCat),
            other => Err(Error::Precondition(format!(
                "unknown extension mode `{other}` (expected dt-dt, cat-cat or dt-cat)"
            ))),
        }
    }
}

pub fn extend(opp: &DegreeTable, mode: ExtensionMode, grid_m: usize) -> Result<DegreeTable> {
    match mode {
        ExtensionMode::DtToDt => extend_dt_to_dt(opp, grid_m),
        ExtensionMode::CatToCat => extend_cat_to_cat(opp, grid_m),
        ExtensionMode::DtToCat => extend_dt_to_cat(opp, grid_m),
    }
}

fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

/// Shape and validity premises shared by the three operations.
fn check_source(opp: &DegreeTable, grid_m: usize) -> Result<TableParams> {
    let p = opp.params();
    if p.m != 1 {
        return Err(precondition(format!("source must be an outer-product table (M = 1), has M = {}", p.m)));
    }
    if grid_m == 0 || !p.k.is_multiple_of(grid_m) {
        return Err(precondition(format!(
            "grid M = {grid_m} must divide the source K = {}",
            p.k
        )));
    }
    let report = validate(opp);
    if !report.is_valid() {
        return Err(Error::InvalidTable(Box::new(report)));
    }
    Ok(TableParams::new(p.k / grid_m, grid_m, p.l, p.t))
}

fn not_a_progression() -> Error {
    precondition(
        "alpha_p is not an arithmetic progression (generalized-progression extensions are not supported)",
    )
}

pub fn extend_dt_to_dt(opp: &DegreeTable, grid_m: usize) -> Result<DegreeTable> {
    if opp.is_cyclic() {
        return Err(precondition("DT->DT expects a plain table without q"));
    }
    let step = is_arithmetic_progression(opp.alpha_p())?.ok_or_else(not_a_progression)?;
    if step < 0 && grid_m > 1 {
        return Err(precondition("alpha_p is decreasing; extended degrees would be negative"));
    }
    let params = check_source(opp, grid_m)?;
    let a0 = opp.alpha_p()[0];
    let offsets: Vec<u64> = opp.alpha_p()[..grid_m].iter().map(|&a| a - a0).collect();
    let beta_p = opp
        .beta_p()
        .iter()
        .flat_map(|&b| offsets.iter().map(move |&o| b + o))
        .collect();
    DegreeTable::new(
        params,
        opp.alpha_p().to_vec(),
        beta_p,
        opp.alpha_s().to_vec(),
        opp.beta_s().to_vec(),
        None,
    )
}

pub fn extend_cat_to_cat(opp: &DegreeTable, grid_m: usize) -> Result<DegreeTable> {
    let q = opp
        .q()
        .ok_or_else(|| precondition("CAT->CAT expects a cyclic table with q"))?;
    cyclic_progression(opp.alpha_p(), q).ok_or_else(not_a_progression)?;
    let params = check_source(opp, grid_m)?;
    let beta_p = extended_beta(opp, grid_m, q);
    DegreeTable::new(
        params,
        opp.alpha_p().to_vec(),
        beta_p,
        opp.alpha_s().to_vec(),
        opp.beta_s().to_vec(),
        Some(q),
    )
}

fn extended_beta(opp: &DegreeTable, grid_m: usize, q: u64) -> Vec<u64> {
    let a0 = opp.alpha_p()[0] % q;
    let offsets: Vec<u64> = opp.alpha_p()[..grid_m]
        .iter()
        .map(|&a| (a % q + q - a0) % q)
        .collect();
    opp.beta_p()
        .iter()
        .flat_map(|&b| offsets.iter().map(move |&o| (b % q + o) % q))
        .collect()
}

/// The cyclic modulus chosen by the DT->CAT extension:
/// `max(alpha ⊕ beta_ext) - M + 2 + gamma` with the least `gamma >= 0` making it
/// coprime to both secret steps.
pub fn dt_to_cat_modulus(opp: &DegreeTable, grid_m: usize, step_a: u64, step_b: u64) -> u64 {
    // Maximum over the extended beta (beta_p shifted by up to M-1), so every
    // wrap-around lands in 0..M-1, i.e. above the antidiagonal of block (1,1).
    let beta_p_top = opp.beta_p().iter().max().unwrap() + grid_m as u64 - 1;
    let beta_top = opp.beta_s().iter().copied().max().map_or(beta_p_top, |b| b.max(beta_p_top));
    let max_sum = opp.alpha().iter().max().unwrap() + beta_top;
    let mut q = (max_sum + 2).saturating_sub(grid_m as u64).max(1);
    while gcd(q, step_a) != 1 || gcd(q, step_b) != 1 {
        q += 1;
    }
    q
}

pub fn extend_dt_to_cat(opp: &DegreeTable, grid_m: usize) -> Result<DegreeTable> {
    if opp.is_cyclic() {
        return Err(precondition("DT->CAT expects a plain table without q"));
    }
    match is_arithmetic_progression(opp.alpha_p())? {
        Some(1) => {}
        Some(_) => return Err(precondition("the common difference of alpha_p must be 1")),
        None => return Err(not_a_progression()),
    }
    if opp.alpha_p()[0] != 0 || opp.beta_p()[0] != 0 {
        return Err(precondition("alpha_p[1] = beta_p[1] = 0 is required"));
    }
    let step_a = is_arithmetic_progression(opp.alpha_s())?
        .ok_or_else(|| precondition("alpha_s is not an arithmetic progression"))?;
    let step_b = is_arithmetic_progression(opp.beta_s())?
        .ok_or_else(|| precondition("beta_s is not an arithmetic progression"))?;
    let params = check_source(opp, grid_m)?;
    let q = dt_to_cat_modulus(opp, grid_m, step_a.unsigned_abs(), step_b.unsigned_abs());
    let beta_p = extended_beta(opp, grid_m, q);
    DegreeTable::new_reduced(
        params,
        opp.alpha_p().to_vec(),
        beta_p,
        opp.alpha_s().to_vec(),
        opp.beta_s().to_vec(),
        q,
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtensionReport {
    pub mode: ExtensionMode,
    pub n_prime: usize,
    pub n: usize,
    pub m: usize,
    pub upper_bound: usize,
    pub lower_bound: usize,
    /// Common difference of the source `alpha_p` (mod `q` for cyclic sources).
    pub zeta: i64,
    pub within_bounds: bool,
}

/// Worker counts of an extension and its source against
/// `N' <= N <= N' + (M-1)(K+T)L` (lower bound `N' - M + 1` for DT->CAT).
pub fn check_theorem1_bounds(
    source: &DegreeTable,
    extended: &DegreeTable,
    mode: ExtensionMode,
) -> ExtensionReport {
    let TableParams { k, m, l, t } = extended.params();
    let n_prime = worker_count(source);
    let n = worker_count(extended);
    let upper_bound = n_prime + (m - 1) * (k + t) * l;
    let lower_bound = match mode {
        ExtensionMode::DtToCat => (n_prime + 1).saturating_sub(m),
        _ => n_prime,
    };
    let zeta = match source.q() {
        Some(q) => cyclic_progression(source.alpha_p(), q).map(|d| d as i64),
        None => is_arithmetic_progression(source.alpha_p()).ok().flatten(),
    }
    .unwrap_or(0);
    ExtensionReport {
        mode,
        n_prime,
        n,
        m,
        upper_bound,
        lower_bound,
        zeta,
        within_bounds: lower_bound <= n && n <= upper_bound,
    }
}

/// First violated constraint found by [`check_lemma2_constraints`]. Blocks
/// are 1-based `(k, l)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lemma2Violation {
    AboveMeetsTopRight { block: (usize, usize), value: u64 },
    AboveMeetsBottomRight { block: (usize, usize), value: u64 },
    AboveBlocksMeet { block: (usize, usize), other: (usize, usize), value: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma2Check {
    pub holds: bool,
    pub violation: Option<Lemma2Violation>,
}

/// Constraints every extended table satisfies: the above-antidiagonal sets of
/// distinct blocks are disjoint, and each avoids TR and BR.
///
/// Blocks are scanned in row-major order; for each block the TR check comes
/// first, then BR, then later blocks, reporting the smallest shared value.
pub fn check_lemma2_constraints(gp: &DegreeTable) -> Result<Lemma2Check> {
    let TableParams { k, m, l, .. } = gp.params();
    if m < 2 {
        return Err(precondition("the above-antidiagonal sets are empty when M = 1"));
    }
    let d = decompose(gp);
    let first = |x: &BTreeSet<u64>, y: &BTreeSet<u64>| x.intersection(y).next().copied();
    let blocks: Vec<(usize, usize)> = (0..k).flat_map(|a| (0..l).map(move |b| (a, b))).collect();
    for (n, &(bk, bl)) in blocks.iter().enumerate() {
        let above = &d.a[bk][bl];
        let block = (bk + 1, bl + 1);
        let violation = if let Some(value) = first(above, &d.tr) {
            Some(Lemma2Violation::AboveMeetsTopRight { block, value })
        } else if let Some(value) = first(above, &d.br) {
            Some(Lemma2Violation::AboveMeetsBottomRight { block, value })
        } else {
            blocks[n + 1..].iter().find_map(|&(ok, ol)| {
                first(above, &d.a[ok][ol]).map(|value| Lemma2Violation::AboveBlocksMeet {
                    block,
                    other: (ok + 1, ol + 1),
                    value,
                })
            })
        };
        if violation.is_some() {
            return Ok(Lemma2Check {
                holds: false,
                violation,
            });
        }
    }
    Ok(Lemma2Check {
        holds: true,
        violation: None,
    })
}

/// Whether every top-left block has entry `(i, j)` depending only on `i + j`.
pub fn check_constant_antidiagonals(gp: &DegreeTable) -> bool {
    let TableParams { k, m, l, .. } = gp.params();
    (0..k).all(|bk| {
        let a = gp.alpha_block(bk);
        (0..l).all(|bl| {
            let b = gp.beta_block(bl);
            // compare each entry with its up-right neighbour on the same antidiagonal
            (1..m).all(|i| (0..m - 1).all(|j| gp.add(a[i], b[j]) == gp.add(a[i - 1], b[j + 1])))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{validate, DegreeTable, TableParams};

    fn fig2a() -> DegreeTable {
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

    fn tiny() -> DegreeTable {
        DegreeTable::new(TableParams::new(2, 1, 1, 1), vec![0, 1], vec![0], vec![2], vec![3], None).unwrap()
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap(8, 15, 4).unwrap(), vec![0, 1, 2, 3, 15, 16, 17, 18]);
        assert_eq!(gap(5, 10, 2).unwrap(), vec![0, 1, 10, 11, 20]);
        assert_eq!(gap(6, 5, 4).unwrap(), vec![0, 1, 2, 3, 5, 6]);
        assert!(gap(3, 2, 3).is_err());
    }

    #[test]
    fn progression_detection() {
        assert_eq!(is_arithmetic_progression(&[0, 1, 2, 3]).unwrap(), Some(1));
        assert_eq!(is_arithmetic_progression(&[0, 22, 15]).unwrap(), None);
        assert_eq!(is_arithmetic_progression(&[2]).unwrap(), Some(1));
        assert_eq!(is_arithmetic_progression(&[6, 4, 2]).unwrap(), Some(-2));
        assert!(is_arithmetic_progression(&[]).is_err());
    }

    #[test]
    fn cat_to_cat_reproduces_fig2b() {
        let ext = extend_cat_to_cat(&fig2a(), 3).unwrap();
        assert_eq!(ext.params(), TableParams::new(2, 3, 3, 2));
        assert_eq!(ext.beta_p(), &[0, 1, 2, 22, 23, 24, 15, 16, 17]);
        assert_eq!(ext.q(), Some(29));
        assert!(validate(&ext).is_valid());
    }

    #[test]
    fn cat_to_cat_m2() {
        let ext = extend_cat_to_cat(&fig2a(), 2).unwrap();
        assert_eq!(ext.params(), TableParams::new(3, 2, 3, 2));
        assert_eq!(ext.beta_p(), &[0, 1, 22, 23, 15, 16]);
        assert!(validate(&ext).is_valid());
    }

    #[test]
    fn identity_extensions() {
        assert_eq!(extend_cat_to_cat(&fig2a(), 1).unwrap(), fig2a());
        assert_eq!(extend_dt_to_dt(&tiny(), 1).unwrap(), tiny());
    }

    #[test]
    fn dt_to_dt_tiny() {
        let ext = extend_dt_to_dt(&tiny(), 2).unwrap();
        assert_eq!(ext.params(), TableParams::new(1, 2, 1, 1));
        assert_eq!(ext.beta_p(), &[0, 1]);
        assert!(validate(&ext).is_valid());
    }

    #[test]
    fn dt_to_dt_rejects_non_progression() {
        let src = DegreeTable::new(
            TableParams::new(4, 1, 1, 1),
            vec![0, 2, 5, 9],
            vec![0],
            vec![20],
            vec![30],
            None,
        )
        .unwrap();
        let err = extend_dt_to_dt(&src, 2).unwrap_err();
        assert!(err.to_string().contains("arithmetic progression"), "{err}");
    }

    #[test]
    fn dt_to_cat_tiny() {
        let ext = extend_dt_to_cat(&tiny(), 2).unwrap();
        assert_eq!(ext.q(), Some(5));
        assert_eq!(ext.beta_p(), &[0, 1]);
        let r = validate(&ext);
        assert!(r.is_valid());
        assert_eq!(r.n, 5);
        let rep = check_theorem1_bounds(&tiny(), &ext, ExtensionMode::DtToCat);
        assert_eq!((rep.n_prime, rep.n, rep.lower_bound), (6, 5, 5));
        assert!(rep.within_bounds);
    }

    #[test]
    fn dt_to_cat_with_m1_picks_q6() {
        let ext = extend_dt_to_cat(&tiny(), 1).unwrap();
        assert_eq!(ext.q(), Some(6));
        assert_eq!(ext.beta_p(), tiny().beta_p());
    }

    #[test]
    fn dt_to_cat_modulus_covers_shifted_beta() {
        // max over the unshifted source gives q=63, where 34+30 wraps onto U[1][1]
        let src =
            DegreeTable::new(TableParams::new(2, 1, 2, 1), vec![0, 1], vec![0, 29], vec![34], vec![22], None).unwrap();
        assert!(validate(&src).is_valid());
        let ext = extend_dt_to_cat(&src, 2).unwrap();
        assert_eq!(ext.q(), Some(64));
        assert!(validate(&ext).is_valid());
        assert!(check_theorem1_bounds(&src, &ext, ExtensionMode::DtToCat).within_bounds);
    }

    #[test]
    fn dt_to_cat_can_break_extension_constraints() {
        let src = DegreeTable::new(TableParams::new(6, 1, 1, 1), (0..6).collect(), vec![0], vec![22], vec![26], None)
            .unwrap();
        let ext = extend_dt_to_cat(&src, 2).unwrap();
        assert_eq!(ext.q(), Some(48));
        assert!(validate(&ext).is_valid());
        let c = check_lemma2_constraints(&ext).unwrap();
        assert_eq!(c.violation, Some(Lemma2Violation::AboveMeetsBottomRight { block: (1, 1), value: 0 }));
    }

    #[test]
    fn dt_to_cat_requires_zero_starts() {
        let src = DegreeTable::new(TableParams::new(2, 1, 1, 1), vec![0, 1], vec![5], vec![2], vec![3], None)
            .unwrap();
        let err = extend_dt_to_cat(&src, 2).unwrap_err();
        assert!(err.to_string().contains("beta_p[1] = 0"), "{err}");
    }

    #[test]
    fn grid_must_divide_k() {
        assert!(extend_cat_to_cat(&fig2a(), 4).is_err());
    }

    #[test]
    fn golden_extension_bounds() {
        let ext = extend_cat_to_cat(&fig2a(), 3).unwrap();
        let rep = check_theorem1_bounds(&fig2a(), &ext, ExtensionMode::CatToCat);
        assert_eq!((rep.n_prime, rep.n, rep.upper_bound, rep.lower_bound), (29, 29, 53, 29));
        assert!(rep.within_bounds);
        assert_eq!(rep.zeta, 1);
    }

    #[test]
    fn lemma2_on_fig2b() {
        let ext = extend_cat_to_cat(&fig2a(), 3).unwrap();
        assert!(check_lemma2_constraints(&ext).unwrap().holds);
        assert!(check_lemma2_constraints(&fig2a()).is_err());
    }

    #[test]
    fn antidiagonal_structure() {
        let ext = extend_cat_to_cat(&fig2a(), 3).unwrap();
        assert!(check_constant_antidiagonals(&ext));
        let t = DegreeTable::new(TableParams::new(1, 2, 1, 1), vec![0, 1], vec![0, 5], vec![10], vec![20], None)
            .unwrap();
        assert!(!check_constant_antidiagonals(&t));
    }
}
