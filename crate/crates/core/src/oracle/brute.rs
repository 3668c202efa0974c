//! A deliberately naive second implementation of the table properties, kept
//! independent of `table::validate` so the two can be cross-checked.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ffield::{binomial, find_field, rank, vandermonde, FieldSpec, DEFAULT_MIN_P};
use crate::table::{
    DegreeTable, Position, Status, TableParams, ValidationReport, Witness, IV_RANDOM_CANDIDATES,
    IV_SEARCH_SEED, IV_SUBSET_LIMIT,
};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Region {
    Tl { k: usize, l: usize, anti: bool },
    Tr,
    Bl,
    Br,
}

struct Entry {
    value: u64,
    region: Region,
    position: Position,
}

fn sum(a: u64, b: u64, q: Option<u64>) -> u64 {
    match q {
        Some(q) => (a + b) % q,
        None => a + b,
    }
}

fn entries(table: &DegreeTable) -> Vec<Entry> {
    let TableParams { k: kk, m, l: ll, t } = table.params();
    let q = table.q();
    let (ap, bp, as_, bs) = (table.alpha_p(), table.beta_p(), table.alpha_s(), table.beta_s());
    let mut out = Vec::new();
    for k in 1..=kk {
        for l in 1..=ll {
            for i in 1..=m {
                for j in 1..=m {
                    out.push(Entry {
                        value: sum(ap[(k - 1) * m + i - 1], bp[(l - 1) * m + j - 1], q),
                        region: Region::Tl { k, l, anti: i + j == m + 1 },
                        position: Position::TopLeft { k, l, i, j },
                    });
                }
            }
        }
    }
    for r in 1..=kk * m {
        for c in 1..=t {
            out.push(Entry {
                value: sum(ap[r - 1], bs[c - 1], q),
                region: Region::Tr,
                position: Position::TopRight { row: r, col: c },
            });
        }
    }
    for r in 1..=t {
        for c in 1..=ll * m {
            out.push(Entry {
                value: sum(as_[r - 1], bp[c - 1], q),
                region: Region::Bl,
                position: Position::BottomLeft { row: r, col: c },
            });
        }
        for c in 1..=t {
            out.push(Entry {
                value: sum(as_[r - 1], bs[c - 1], q),
                region: Region::Br,
                position: Position::BottomRight { row: r, col: c },
            });
        }
    }
    out
}

fn fail(value: u64, first: Position, second: Position) -> Status {
    Status::Fail {
        witness: Witness { value, first, second },
    }
}

/// Recomputes every property with plain nested loops.
pub fn brute_validate(table: &DegreeTable) -> ValidationReport {
    let all = entries(table);
    let n = all.iter().map(|e| e.value).collect::<BTreeSet<_>>().len();

    let mut ii = [Status::Pass, Status::Pass, Status::Pass, Status::Pass, Status::Pass];
    for u in &all {
        let Region::Tl { k, l, anti: true } = u.region else {
            continue;
        };
        for o in &all {
            if o.value != u.value {
                continue;
            }
            let slot = match o.region {
                Region::Tl { anti: true, k: k2, l: l2 } if (k2, l2) != (k, l) => 0,
                Region::Tl { anti: true, .. } => continue,
                Region::Tr => 1,
                Region::Bl => 2,
                Region::Br => 3,
                Region::Tl { anti: false, .. } => 4,
            };
            if ii[slot].is_pass() {
                ii[slot] = fail(u.value, u.position, o.position);
            }
        }
    }

    let alpha = table.alpha();
    let beta = table.beta();
    let mut iii = Status::Pass;
    'outer: for (v, at) in [(&alpha, 0), (&beta, 1)] {
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if v[i] == v[j] {
                    let pos = |index| if at == 0 { Position::Alpha { index } } else { Position::Beta { index } };
                    iii = fail(v[i], pos(i + 1), pos(j + 1));
                    break 'outer;
                }
            }
        }
    }

    let iv = brute_iv(table, iii.is_pass());
    let [ii_a, ii_b, ii_c, ii_d, ii_e] = ii;
    ValidationReport {
        n,
        property_i: Status::Pass,
        property_ii_a: ii_a,
        property_ii_b: ii_b,
        property_ii_c: ii_c,
        property_ii_d: ii_d,
        property_ii_e: ii_e,
        property_iii: iii,
        property_iv: iv,
        iv_field: None,
        iv_rho: None,
    }
}

fn has_duplicate(v: &[u64]) -> Option<(usize, usize)> {
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] == v[j] {
                return Some((i, j));
            }
        }
    }
    None
}

fn coprime_step(v: &[u64], q: u64) -> bool {
    if v.len() < 2 {
        return true;
    }
    let d = (v[1] + q - v[0]) % q;
    let ap = (1..v.len()).all(|i| (v[i] + q - v[i - 1]) % q == d);
    let (mut a, mut b) = (d, q);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    ap && a == 1
}

fn brute_iv(table: &DegreeTable, iii_holds: bool) -> Status {
    let Some(q) = table.q() else {
        return Status::Pass;
    };
    let t = table.params().t;
    let (na, nb) = (table.alpha_p().len(), table.beta_p().len());
    if t >= 2 {
        if let Some((i, j)) = has_duplicate(table.alpha_s()) {
            let v = table.alpha_s()[i];
            return fail(v, Position::Alpha { index: na + i + 1 }, Position::Alpha { index: na + j + 1 });
        }
        if let Some((i, j)) = has_duplicate(table.beta_s()) {
            let v = table.beta_s()[i];
            return fail(v, Position::Beta { index: nb + i + 1 }, Position::Beta { index: nb + j + 1 });
        }
    }
    if iii_holds && coprime_step(table.alpha_s(), q) && coprime_step(table.beta_s(), q) {
        return Status::Pass;
    }

    let inconclusive = |reason: &str| Status::Inconclusive { reason: reason.into() };
    let gamma: Vec<u64> = {
        let mut g: Vec<u64> = entries(table).iter().map(|e| e.value).collect();
        g.sort_unstable();
        g.dedup();
        g
    };
    let n = gamma.len();
    if binomial(n as u64, t as u64) > IV_SUBSET_LIMIT {
        return inconclusive("subset count over limit");
    }
    let Ok(field) = find_field(q, DEFAULT_MIN_P) else {
        return inconclusive("no field");
    };
    let roots = field.roots_of_unity();
    let mut rng = ChaCha8Rng::seed_from_u64(IV_SEARCH_SEED);
    let tries = if n as u64 == q { 1 } else { 1 + IV_RANDOM_CANDIDATES };
    for attempt in 0..tries {
        let idx: Vec<usize> = if attempt == 0 {
            (0..n).collect()
        } else {
            let mut s = rand::seq::index::sample(&mut rng, q as usize, n).into_vec();
            s.sort_unstable();
            s
        };
        let rho: Vec<u64> = idx.iter().map(|&i| roots[i]).collect();
        if points_work(table, &rho, &gamma, &field) {
            return Status::Pass;
        }
    }
    inconclusive("no admissible points")
}

fn points_work(table: &DegreeTable, rho: &[u64], gamma: &[u64], field: &FieldSpec) -> bool {
    if rank(&vandermonde(rho, gamma, field), field) != gamma.len() {
        return false;
    }
    let t = table.params().t;
    let va = vandermonde(rho, table.alpha_s(), field);
    let vb = vandermonde(rho, table.beta_s(), field);
    // odometer over increasing T-subsets of the workers
    let n = rho.len();
    if t > n {
        return false;
    }
    let mut idx: Vec<usize> = (0..t).collect();
    loop {
        if rank(&va.select_rows(&idx), field) != t || rank(&vb.select_rows(&idx), field) != t {
            return false;
        }
        let Some(pos) = (0..t).rev().find(|&p| idx[p] < n - t + p) else {
            return true;
        };
        idx[pos] += 1;
        for p in pos + 1..t {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::fixtures::{fig2a, fig2b, tiny_dt};
    use crate::table::validate;

    #[test]
    fn golden_tables_agree() {
        for t in [fig2a(), fig2b(), tiny_dt()] {
            let (b, v) = (brute_validate(&t), validate(&t));
            assert_eq!(b.verdicts(), v.verdicts());
            assert_eq!(b.n, v.n);
            assert!(b.is_valid());
        }
    }

    #[test]
    fn first_witness_is_row_major() {
        let t = DegreeTable::new(TableParams::new(1, 1, 1, 1), vec![0], vec![0], vec![1], vec![0], None).unwrap();
        let r = brute_validate(&t);
        let w = r.property_ii_b.witness().unwrap();
        assert_eq!((w.first, w.second), (Position::TopLeft { k: 1, l: 1, i: 1, j: 1 }, Position::TopRight { row: 1, col: 1 }));
    }

    #[test]
    fn odometer_covers_all_subsets() {
        // with T = N the only subset is everything
        let f = find_field(29, 2).unwrap();
        let w = f.omega().unwrap();
        let t = fig2b();
        assert!(points_work(&t, &f.roots_of_unity(), &(0..29).collect::<Vec<_>>(), &f));
        assert!(!points_work(&t, &[1, w, w], &[0, 1, 2], &f));
    }
}
