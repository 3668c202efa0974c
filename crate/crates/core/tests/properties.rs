use gridcat::extension::{check_constant_antidiagonals, extend, gap, ExtensionMode};
use gridcat::ffield::{is_prime, FieldSpec};
use gridcat::oracle::brute_validate;
use gridcat::sim::{end_to_end, Scheme, SimConfig};
use gridcat::table::{load_table, save_table, validate, worker_count};
use gridcat::{DegreeTable, TableParams};
use proptest::prelude::*;

/// Small tables with entries in range; most are invalid, some are not.
fn small_table() -> impl Strategy<Value = DegreeTable> {
    (1usize..=3, 1usize..=2, 1usize..=2, 1usize..=2, prop::option::of(5u64..40)).prop_flat_map(
        |(k, m, l, t, q)| {
            let hi = q.unwrap_or(40);
            (
                prop::collection::vec(0..hi, k * m),
                prop::collection::vec(0..hi, l * m),
                prop::collection::vec(0..hi, t),
                prop::collection::vec(0..hi, t),
            )
                .prop_map(move |(ap, bp, as_, bs)| {
                    DegreeTable::new(TableParams::new(k, m, l, t), ap, bp, as_, bs, q).unwrap()
                })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn file_round_trip(table in small_table()) {
        let text = save_table(&table);
        let back = load_table(&text).unwrap();
        prop_assert_eq!(&back, &table);
        prop_assert_eq!(save_table(&back), text);
    }

    #[test]
    fn validator_agrees_with_oracle(table in small_table()) {
        let (fast, slow) = (validate(&table), brute_validate(&table));
        prop_assert_eq!(fast.verdicts(), slow.verdicts());
        prop_assert_eq!(fast.n, slow.n);
        prop_assert_eq!(fast.n, worker_count(&table));
    }

    #[test]
    fn gap_is_increasing_with_chains(len in 1usize..40, step in 1u64..10, chain in 1u64..10) {
        prop_assume!(chain <= step);
        let v = gap(len, step, chain).unwrap();
        prop_assert_eq!(v.len(), len);
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(v.iter().all(|x| x % step < chain));
    }

    #[test]
    fn field_inverse(p in (3u64..5000).prop_filter("prime", |&p| is_prime(p)), a in 1u64..5000) {
        let f = FieldSpec::prime(p).unwrap();
        let a = f.reduce(a);
        prop_assume!(a != 0);
        prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn construction_tables_decode(k in 2usize..=4, m in 2usize..=3, l in 1usize..=4, t in 1usize..=3, seed: u64) {
        prop_assume!(l <= k);
        let scheme = Scheme::Construction1(TableParams::new(k, m, l, t));
        let cfg = SimConfig { seed, min_p: 1000, ..SimConfig::default() };
        let r = end_to_end(&scheme, &cfg).unwrap();
        prop_assert!(r.decode_ok && r.product_check);
        prop_assert_eq!(r.audit_passed, r.audit_checked);
    }

    #[test]
    fn dt_extension_of_valid_source(
        kp in prop::sample::select(vec![2usize, 4, 6]),
        l in 1usize..=3,
        t in 1usize..=2,
        starts in (0u64..60, 0u64..60),
        steps in (1u64..6, 1u64..6),
    ) {
        let n_tl = (kp * l) as u64;
        let src = DegreeTable::new(
            TableParams::new(kp, 1, l, t),
            (0..kp as u64).collect(),
            (0..l as u64).map(|i| i * kp as u64).collect(),
            (0..t as u64).map(|j| n_tl + starts.0 + j * steps.0).collect(),
            (0..t as u64).map(|j| n_tl + starts.1 + j * steps.1).collect(),
            None,
        )
        .unwrap();
        prop_assume!(brute_validate(&src).is_valid());
        for m in (2..=kp).filter(|m| kp % m == 0) {
            let ext = extend(&src, ExtensionMode::DtToDt, m).unwrap();
            prop_assert!(validate(&ext).is_valid());
            prop_assert!(check_constant_antidiagonals(&ext));
            prop_assert!(worker_count(&ext) >= worker_count(&src));
        }
    }
}
