use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{worker_count, Cell, DegreeTable, Position};
use crate::ffield::{
    audit_row_subsets, binomial, find_field, gcd, is_invertible, vandermonde, FieldSpec,
    SubsetPolicy, DEFAULT_MIN_P,
};

/// Seed for the random root-subset candidates of the constructive search.
pub const IV_SEARCH_SEED: u64 = 0x6772_6964_6361_7434;

/// Random root subsets tried after the contiguous window.
pub(crate) const IV_RANDOM_CANDIDATES: usize = 1000;

/// Largest `C(N, T)` the constructive search will enumerate.
pub(crate) const IV_SUBSET_LIMIT: u128 = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub value: u64,
    pub first: Position,
    pub second: Position,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail { witness: Witness },
    Inconclusive { reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn verdict(&self) -> Verdict {
        match self {
            Status::Pass => Verdict::Pass,
            Status::Fail { .. } => Verdict::Fail,
            Status::Inconclusive { .. } => Verdict::Inconclusive,
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Status::Pass)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Status::Fail { witness } => Some(witness),
            _ => None,
        }
    }

    fn from_min(pairs: impl IntoIterator<Item = Witness>) -> Status {
        pairs
            .into_iter()
            .min_by(|a, b| (a.first, a.second).cmp(&(b.first, b.second)))
            .map_or(Status::Pass, |witness| Status::Fail { witness })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub property_i: Status,
    /// Antidiagonals of distinct blocks are disjoint.
    pub property_ii_a: Status,
    /// Antidiagonals avoid TR.
    pub property_ii_b: Status,
    /// Antidiagonals avoid BL.
    pub property_ii_c: Status,
    /// Antidiagonals avoid BR.
    pub property_ii_d: Status,
    /// Antidiagonals avoid every off-antidiagonal TL entry.
    pub property_ii_e: Status,
    /// Degrees within `alpha` and within `beta` are distinct.
    pub property_iii: Status,
    pub property_iv: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iv_field: Option<FieldSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iv_rho: Option<Vec<u64>>,
}

impl ValidationReport {
    pub fn statuses(&self) -> [(&'static str, &Status); 8] {
        [
            ("I", &self.property_i),
            ("II.a", &self.property_ii_a),
            ("II.b", &self.property_ii_b),
            ("II.c", &self.property_ii_c),
            ("II.d", &self.property_ii_d),
            ("II.e", &self.property_ii_e),
            ("III", &self.property_iii),
            ("IV", &self.property_iv),
        ]
    }

    pub fn verdicts(&self) -> [Verdict; 8] {
        self.statuses().map(|(_, s)| s.verdict())
    }

    pub fn is_valid(&self) -> bool {
        self.statuses().iter().all(|(_, s)| s.is_pass())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IvMode {
    /// Property III plus arithmetic-progression secrets with steps coprime to `q`.
    Sufficient,
    /// Search for explicit roots of unity and check the matrices.
    Constructive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionIv {
    pub status: Status,
    pub field: Option<FieldSpec>,
    pub rho: Option<Vec<u64>>,
}

impl ConditionIv {
    fn bare(status: Status) -> Self {
        ConditionIv {
            status,
            field: None,
            rho: None,
        }
    }
}

pub fn validate(table: &DegreeTable) -> ValidationReport {
    let m = table.params().m;
    let cells = table.cells();
    let mut by_value: HashMap<u64, Vec<usize>> = HashMap::new();
    for (idx, cell) in cells.iter().enumerate() {
        by_value.entry(cell.value).or_default().push(idx);
    }

    let mut ii: [Vec<Witness>; 5] = Default::default();
    for cell in cells.iter().filter(|c| c.position.on_antidiagonal(m)) {
        let Cell { position: u_pos, value } = *cell;
        for &other_idx in &by_value[&value] {
            let other = cells[other_idx].position;
            let slot = match other {
                Position::TopLeft { .. } if other.on_antidiagonal(m) => {
                    if other.block() == u_pos.block() {
                        continue;
                    }
                    0
                }
                Position::TopRight { .. } => 1,
                Position::BottomLeft { .. } => 2,
                Position::BottomRight { .. } => 3,
                Position::TopLeft { .. } => 4,
                _ => unreachable!("cells are table entries"),
            };
            let (first, second) = if slot == 0 {
                (u_pos.min(other), u_pos.max(other))
            } else {
                (u_pos, other)
            };
            ii[slot].push(Witness {
                value,
                first,
                second,
            });
        }
    }
    let [ii_a, ii_b, ii_c, ii_d, ii_e] = ii.map(Status::from_min);

    let property_iii = Status::from_min(
        duplicate_pairs(&table.alpha(), |index| Position::Alpha { index })
            .chain(duplicate_pairs(&table.beta(), |index| Position::Beta { index })),
    );

    let mut iv = check_condition_iv(table, IvMode::Sufficient);
    if matches!(iv.status, Status::Inconclusive { .. }) {
        iv = check_condition_iv(table, IvMode::Constructive);
    }

    ValidationReport {
        n: worker_count(table),
        property_i: Status::Pass,
        property_ii_a: ii_a,
        property_ii_b: ii_b,
        property_ii_c: ii_c,
        property_ii_d: ii_d,
        property_ii_e: ii_e,
        property_iii,
        property_iv: iv.status,
        iv_field: iv.field,
        iv_rho: iv.rho,
    }
}

/// All equal-value index pairs `(i < j)`, reported through `pos` (1-based).
fn duplicate_pairs<'a>(
    v: &'a [u64],
    pos: impl Fn(usize) -> Position + 'a,
) -> impl Iterator<Item = Witness> + 'a {
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, &x) in v.iter().enumerate() {
        seen.entry(x).or_default().push(i);
    }
    seen.into_iter().flat_map(move |(value, idx)| {
        let pos = &pos;
        idx.iter()
            .enumerate()
            .flat_map(|(n, &i)| idx[n + 1..].iter().map(move |&j| (i, j)))
            .map(|(i, j)| Witness {
                value,
                first: pos(i + 1),
                second: pos(j + 1),
            })
            .collect::<Vec<_>>()
    })
}

/// Common difference of `v` read as residues mod `q`; a single entry counts
/// as a progression with step 1.
pub(crate) fn cyclic_step(v: &[u64], q: u64) -> Option<u64> {
    match v {
        [] => None,
        [_] => Some(1),
        [a, b, ..] => {
            let d = (b + q - a) % q;
            v.windows(2)
                .all(|w| (w[1] + q - w[0]) % q == d)
                .then_some(d)
        }
    }
}

pub fn check_condition_iv(table: &DegreeTable, mode: IvMode) -> ConditionIv {
    let Some(q) = table.q() else {
        // plain tables: generic evaluation points exist over a large field
        return ConditionIv::bare(Status::Pass);
    };

    // A repeated secret degree gives V(rho, alpha_s) two equal columns, so
    // no choice of rho can work.
    let t = table.params().t;
    let alpha_len = table.alpha_p().len();
    let beta_len = table.beta_p().len();
    let dup = Status::from_min(
        duplicate_pairs(table.alpha_s(), |i| Position::Alpha { index: alpha_len + i }).chain(
            duplicate_pairs(table.beta_s(), |i| Position::Beta { index: beta_len + i }),
        ),
    );
    if t >= 2 && !dup.is_pass() {
        return ConditionIv::bare(dup);
    }

    let distinct = |v: Vec<u64>| {
        let n = v.len();
        let mut s = v;
        s.sort_unstable();
        s.dedup();
        s.len() == n
    };
    let sufficient = distinct(table.alpha())
        && distinct(table.beta())
        && [table.alpha_s(), table.beta_s()]
            .iter()
            .all(|v| cyclic_step(v, q).is_some_and(|d| gcd(d, q) == 1));

    match mode {
        IvMode::Sufficient if sufficient => ConditionIv::bare(Status::Pass),
        IvMode::Sufficient => ConditionIv::bare(Status::Inconclusive {
            reason: "secret degrees are not progressions with steps coprime to q".into(),
        }),
        IvMode::Constructive => constructive_search(table, q),
    }
}

fn constructive_search(table: &DegreeTable, q: u64) -> ConditionIv {
    let field = match find_field(q, DEFAULT_MIN_P) {
        Ok(f) => f,
        Err(e) => {
            return ConditionIv::bare(Status::Inconclusive {
                reason: e.to_string(),
            })
        }
    };
    let gamma = table.sumset();
    let n = gamma.len();
    let t = table.params().t;
    if binomial(n as u64, t as u64) > IV_SUBSET_LIMIT {
        return ConditionIv::bare(Status::Inconclusive {
            reason: format!("C({n}, {t}) subsets exceed the search limit"),
        });
    }
    let roots = field.roots_of_unity();
    let mut rng = ChaCha8Rng::seed_from_u64(IV_SEARCH_SEED);
    let random = (0..IV_RANDOM_CANDIDATES).map(|_| {
        let mut idx = rand::seq::index::sample(&mut rng, q as usize, n).into_vec();
        idx.sort_unstable();
        idx
    });
    let window: Vec<usize> = (0..n).collect();
    let candidates: Box<dyn Iterator<Item = Vec<usize>>> = if n as u64 == q {
        Box::new(std::iter::once(window))
    } else {
        Box::new(std::iter::once(window).chain(random))
    };
    for idx in candidates {
        let rho: Vec<u64> = idx.iter().map(|&i| roots[i]).collect();
        if let Some(true) = rho_admissible(table, &rho, &gamma, &field) {
            return ConditionIv {
                status: Status::Pass,
                field: Some(field),
                rho: Some(rho),
            };
        }
    }
    ConditionIv::bare(Status::Inconclusive {
        reason: "no admissible roots of unity found within the search policy".into(),
    })
}

/// Checks both parts of condition IV for explicit points. `None` when the
/// subset audit could not be exhaustive.
pub(crate) fn rho_admissible(
    table: &DegreeTable,
    rho: &[u64],
    gamma: &[u64],
    field: &FieldSpec,
) -> Option<bool> {
    let v = vandermonde(rho, gamma, field);
    if !is_invertible(&v, field).expect("square by construction") {
        return Some(false);
    }
    let va = vandermonde(rho, table.alpha_s(), field);
    let vb = vandermonde(rho, table.beta_s(), field);
    let t = table.params().t;
    let audit = audit_row_subsets(&[&va, &vb], t, field, SubsetPolicy::Exhaustive);
    audit.exhaustive.then_some(audit.all_passed())
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::TableParams;
    use super::*;

    #[test]
    fn golden_tables_validate() {
        for t in [fig2a(), fig2b()] {
            let r = validate(&t);
            assert!(r.is_valid(), "{r:?}");
            assert_eq!(r.n, 29);
        }
    }

    #[test]
    fn duplicated_secret_fails_iii() {
        let (p, ap, bp, _, bs, q) = fig2a().into_parts();
        let t = DegreeTable::new(p, ap, bp, vec![6, 6], bs, q).unwrap();
        let r = validate(&t);
        let w = r.property_iii.witness().expect("III must fail");
        assert_eq!(w.value, 6);
        // 6 also appears in alpha_p? no: alpha_p = 0..5, so the pair is the two secrets
        assert_eq!(w.first, Position::Alpha { index: 7 });
        assert_eq!(w.second, Position::Alpha { index: 8 });
        assert_eq!(r.property_iv.verdict(), Verdict::Fail);
        assert!(!r.is_valid());
    }

    #[test]
    fn sufficient_mode_on_fig2a() {
        let iv = check_condition_iv(&fig2a(), IvMode::Sufficient);
        assert_eq!(iv.status, Status::Pass);
    }

    #[test]
    fn t1_is_trivially_sufficient() {
        let t = DegreeTable::new(TableParams::new(1, 1, 1, 1), vec![0], vec![0], vec![1], vec![2], Some(5))
            .unwrap();
        assert_eq!(check_condition_iv(&t, IvMode::Sufficient).status, Status::Pass);
    }

    #[test]
    fn constructive_mode_finds_all_roots_when_n_equals_q() {
        let iv = check_condition_iv(&fig2b(), IvMode::Constructive);
        assert_eq!(iv.status, Status::Pass);
        assert_eq!(iv.rho.unwrap().len(), 29);
    }

    #[test]
    fn plain_tables_pass_iv() {
        assert_eq!(check_condition_iv(&tiny_dt(), IvMode::Constructive).status, Status::Pass);
    }

    #[test]
    fn antidiagonal_collision_with_tr_is_reported() {
        // alpha = (0 | 1), beta = (0 | 0): U = {0}, TR = {0}
        let t = DegreeTable::new(TableParams::new(1, 1, 1, 1), vec![0], vec![0], vec![1], vec![0], None)
            .unwrap();
        let r = validate(&t);
        let w = r.property_ii_b.witness().unwrap();
        assert_eq!(w.value, 0);
        assert_eq!(w.first, Position::TopLeft { k: 1, l: 1, i: 1, j: 1 });
        assert_eq!(w.second, Position::TopRight { row: 1, col: 1 });
        // and III fails on beta
        assert_eq!(r.property_iii.verdict(), Verdict::Fail);
    }

    #[test]
    fn own_block_off_antidiagonal_is_checked() {
        // single block [[0,0],[1,1]]: antidiagonal {0, 1}, off-antidiagonal {0, 1}
        let t = DegreeTable::new(TableParams::new(1, 2, 1, 1), vec![0, 1], vec![0, 0], vec![10], vec![20], None)
            .unwrap();
        let r = validate(&t);
        assert_eq!(r.property_ii_e.verdict(), Verdict::Fail);
        assert_eq!(r.property_ii_a.verdict(), Verdict::Pass);
    }

    #[test]
    fn cyclic_steps() {
        assert_eq!(cyclic_step(&[28, 4, 9, 14, 19], 29), Some(5));
        assert_eq!(cyclic_step(&[6, 28], 29), Some(22));
        assert_eq!(cyclic_step(&[3], 29), Some(1));
        assert_eq!(cyclic_step(&[0, 1, 3], 29), None);
    }
}
