#![no_main]

use gridcat::oracle::brute_validate;
use gridcat::table::validate;
use gridcat::{DegreeTable, TableParams};
use libfuzzer_sys::fuzz_target;

// First bytes pick (K, M, L, T, q); the rest fill the vectors.
fuzz_target!(|data: &[u8]| {
    let [k, m, l, t, q, rest @ ..] = data else { return };
    let (k, m, l, t) = (1 + *k as usize % 3, 1 + *m as usize % 3, 1 + *l as usize % 3, 1 + *t as usize % 2);
    let q = (*q >= 128).then_some(2 + *q as u64 % 64);
    let hi = q.unwrap_or(64);
    let mut bytes = rest.iter().map(|b| *b as u64 % hi);
    let mut take = |n: usize| -> Option<Vec<u64>> { (0..n).map(|_| bytes.next()).collect() };
    let (Some(ap), Some(bp), Some(as_), Some(bs)) = (take(k * m), take(l * m), take(t), take(t)) else {
        return;
    };
    let table = DegreeTable::new(TableParams::new(k, m, l, t), ap, bp, as_, bs, q).unwrap();
    let (fast, slow) = (validate(&table), brute_validate(&table));
    assert_eq!(fast.verdicts(), slow.verdicts());
    assert_eq!(fast.n, slow.n);
});
