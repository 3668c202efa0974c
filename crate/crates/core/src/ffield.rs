//! Prime-field arithmetic, prime and root-of-unity discovery, and dense
//! linear algebra over `F_p`.
//!
//! Elements are plain `u64` residues in `[0, p)`. Primes are capped at
//! 2^40, so every product fits in a `u128` before reduction.

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Upper limit for the prime search in [`find_field`].
pub const PRIME_CAP: u64 = 1 << 40;

/// Default lower bound on the field size used by simulations.
pub const DEFAULT_MIN_P: u64 = 1 << 20;

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Distinct prime factors of `n` by trial division.
fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A prime field together with an optional cyclic order `q | p - 1` and an
/// element `omega` of multiplicative order exactly `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldSpec {
    p: u64,
    q: Option<u64>,
    omega: Option<u64>,
}

impl FieldSpec {
    /// A bare prime field without a distinguished root of unity.
    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime(p) || p >= PRIME_CAP {
            return Err(Error::Precondition(format!("{p} is not a prime below 2^40")));
        }
        Ok(FieldSpec {
            p,
            q: None,
            omega: None,
        })
    }

    /// Builds a field with a root of unity, checking that `omega` has order
    /// exactly `q`.
    pub fn with_root(p: u64, q: u64, omega: u64) -> Result<Self> {
        let mut field = FieldSpec::prime(p)?;
        if q == 0 || !(p - 1).is_multiple_of(q) {
            return Err(Error::Precondition(format!("{q} does not divide p - 1 = {}", p - 1)));
        }
        let omega = omega % p;
        if !field.has_order(omega, q) {
            return Err(Error::Precondition(format!("{omega} does not have order {q} mod {p}")));
        }
        field.q = Some(q);
        field.omega = Some(omega);
        Ok(field)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> Option<u64> {
        self.q
    }

    pub fn omega(&self) -> Option<u64> {
        self.omega
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    /// `a^e` with the convention `0^0 = 1`.
    pub fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.p)
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.p) {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    fn has_order(&self, a: u64, q: u64) -> bool {
        if self.pow(a, q) != 1 {
            return false;
        }
        prime_factors(q).into_iter().all(|r| self.pow(a, q / r) != 1)
    }

    /// The `q` distinct powers `omega^0, .., omega^(q-1)`.
    pub fn roots_of_unity(&self) -> Vec<u64> {
        match (self.q, self.omega) {
            (Some(q), Some(w)) => {
                let mut out = Vec::with_capacity(q as usize);
                let mut acc = 1;
                for _ in 0..q {
                    out.push(acc);
                    acc = self.mul(acc, w);
                }
                out
            }
            _ => Vec::new(),
        }
    }
}

/// Smallest prime `p >= min_p` with `p = 1 (mod q)`, with `omega = g^((p-1)/q)`
/// for the smallest generator `g` of `F_p^*`.
pub fn find_field(q: u64, min_p: u64) -> Result<FieldSpec> {
    if q == 0 {
        return Err(Error::Precondition("cyclic order q must be at least 1".into()));
    }
    let not_found = || Error::SearchLimitExceeded { q, min_p };
    let start = min_p.max(2);
    // first candidate >= start that is 1 mod q
    let rem = (start + q - 1) % q; // (start - 1) mod q
    let mut p = if rem == 0 {
        start
    } else {
        start.checked_add(q - rem).ok_or_else(not_found)?
    };
    while p < PRIME_CAP {
        if is_prime(p) {
            let g = generator(p);
            let omega = pow_mod(g, (p - 1) / q, p);
            return FieldSpec::with_root(p, q, omega);
        }
        p = p.checked_add(q).ok_or_else(not_found)?;
    }
    Err(not_found())
}

/// Smallest prime `>= n`, below [`PRIME_CAP`].
pub fn next_prime(n: u64) -> Result<u64> {
    (n.max(2)..PRIME_CAP)
        .find(|&c| is_prime(c))
        .ok_or(Error::SearchLimitExceeded { q: 1, min_p: n })
}

fn generator(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&r| pow_mod(g, (p - 1) / r, p) != 1))
        .expect("every prime field has a generator")
}

/// Dense row-major matrix of field residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl FieldMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FieldMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from rows, reducing every entry mod `p`.
    pub fn from_rows(rows: &[Vec<u64>], field: &FieldSpec) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(FieldMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().map(|&v| field.reduce(v)).collect(),
        })
    }

    pub(crate) fn from_vec(rows: usize, cols: usize, data: Vec<u64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        FieldMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn mul(&self, other: &FieldMatrix, field: &FieldSpec) -> Result<FieldMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = field.p() as u128;
        let mut out = FieldMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: u128 = 0;
                for k in 0..self.cols {
                    acc += self.get(i, k) as u128 * other.get(k, j) as u128;
                    // each term is below 2^80, so reduce well before overflow
                    if k % 1024 == 1023 {
                        acc %= p;
                    }
                }
                out.set(i, j, (acc % p) as u64);
            }
        }
        Ok(out)
    }

    /// Accumulates `scalar * other` into `self`.
    pub fn add_scaled(&mut self, other: &FieldMatrix, scalar: u64, field: &FieldSpec) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = field.add(*a, field.mul(b, scalar));
        }
    }

    /// Square submatrix made of the given rows and every column.
    pub fn select_rows(&self, rows: &[usize]) -> FieldMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        FieldMatrix::from_vec(rows.len(), self.cols, data)
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> FieldMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for r in row0..row0 + rows {
            data.extend_from_slice(&self.data[r * self.cols + col0..r * self.cols + col0 + cols]);
        }
        FieldMatrix::from_vec(rows, cols, data)
    }
}

/// Generalized Vandermonde matrix with entry `(i, j) = points[i]^exponents[j]`.
pub fn vandermonde(points: &[u64], exponents: &[u64], field: &FieldSpec) -> FieldMatrix {
    let mut data = Vec::with_capacity(points.len() * exponents.len());
    for &x in points {
        data.extend(exponents.iter().map(|&e| field.pow(x, e)));
    }
    FieldMatrix::from_vec(points.len(), exponents.len(), data)
}

/// Row-reduces `work` in place over its first `pivot_cols` columns and
/// returns the rank.
fn eliminate(work: &mut FieldMatrix, pivot_cols: usize, field: &FieldSpec) -> usize {
    let (rows, cols) = (work.rows, work.cols);
    let mut rank = 0;
    for c in 0..pivot_cols {
        let Some(pivot) = (rank..rows).find(|&r| work.get(r, c) != 0) else {
            continue;
        };
        if pivot != rank {
            for j in 0..cols {
                work.data.swap(pivot * cols + j, rank * cols + j);
            }
        }
        let inv = field.inv(work.get(rank, c)).expect("pivot is nonzero");
        for j in 0..cols {
            let v = work.get(rank, j);
            work.set(rank, j, field.mul(v, inv));
        }
        for r in 0..rows {
            if r == rank {
                continue;
            }
            let f = work.get(r, c);
            if f == 0 {
                continue;
            }
            for j in 0..cols {
                let v = field.sub(work.get(r, j), field.mul(f, work.get(rank, j)));
                work.set(r, j, v);
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

pub fn rank(mat: &FieldMatrix, field: &FieldSpec) -> usize {
    let mut work = mat.clone();
    eliminate(&mut work, mat.cols, field)
}

/// Solves `mat * X = rhs` by Gauss-Jordan elimination.
pub fn solve(mat: &FieldMatrix, rhs: &FieldMatrix, field: &FieldSpec) -> Result<FieldMatrix> {
    if mat.rows != mat.cols {
        return Err(Error::NonSquare {
            rows: mat.rows,
            cols: mat.cols,
        });
    }
    if rhs.rows != mat.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, matrix has {}",
            rhs.rows, mat.rows
        )));
    }
    let n = mat.rows;
    let width = n + rhs.cols;
    let mut work = FieldMatrix::zeros(n, width);
    for r in 0..n {
        work.data[r * width..r * width + n].copy_from_slice(mat.row(r));
        work.data[r * width + n..(r + 1) * width].copy_from_slice(rhs.row(r));
    }
    let rank = eliminate(&mut work, n, field);
    if rank < n {
        return Err(Error::SingularMatrix { rank, size: n });
    }
    Ok(work.submatrix(0, n, n, rhs.cols))
}

pub fn is_invertible(mat: &FieldMatrix, field: &FieldSpec) -> Result<bool> {
    if mat.rows != mat.cols {
        return Err(Error::NonSquare {
            rows: mat.rows,
            cols: mat.cols,
        });
    }
    Ok(rank(mat, field) == mat.rows)
}

/// How many row subsets to examine in [`audit_row_subsets`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SubsetPolicy {
    /// Every subset, regardless of count.
    Exhaustive,
    /// Every subset when there are at most `exhaustive_limit` of them,
    /// otherwise `samples` uniformly random subsets drawn from `seed`.
    Auto {
        exhaustive_limit: u64,
        samples: usize,
        seed: u64,
    },
}

impl Default for SubsetPolicy {
    fn default() -> Self {
        SubsetPolicy::Auto {
            exhaustive_limit: 100_000,
            samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetAudit {
    pub checked: u64,
    pub passed: u64,
    pub exhaustive: bool,
    /// Lowest failing row subset in examination order, 0-based.
    pub first_failure: Option<Vec<usize>>,
}

impl SubsetAudit {
    pub fn all_passed(&self) -> bool {
        self.checked == self.passed
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

/// Checks, for row subsets of size `size`, that the square submatrix of every
/// matrix in `mats` on those rows is invertible. All matrices must share a
/// row count and have exactly `size` columns.
pub fn audit_row_subsets(
    mats: &[&FieldMatrix],
    size: usize,
    field: &FieldSpec,
    policy: SubsetPolicy,
) -> SubsetAudit {
    let n = mats.first().map_or(0, |m| m.rows);
    assert!(mats.iter().all(|m| m.rows == n && m.cols == size));
    let total = binomial(n as u64, size as u64);
    let mut audit = SubsetAudit {
        checked: 0,
        passed: 0,
        exhaustive: true,
        first_failure: None,
    };
    let mut check = |rows: &[usize]| {
        audit.checked += 1;
        let ok = mats
            .iter()
            .all(|m| rank(&m.select_rows(rows), field) == size);
        if ok {
            audit.passed += 1;
        } else if audit.first_failure.is_none() {
            audit.first_failure = Some(rows.to_vec());
        }
    };
    match policy {
        SubsetPolicy::Auto {
            exhaustive_limit,
            samples,
            seed,
        } if total > exhaustive_limit as u128 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let mut rows = rand::seq::index::sample(&mut rng, n, size).into_vec();
                rows.sort_unstable();
                check(&rows);
            }
            audit.exhaustive = false;
        }
        _ => {
            for rows in (0..n).combinations(size) {
                check(&rows);
            }
        }
    }
    audit
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        for n in 0..5000 {
            assert_eq!(is_prime(n), naive_is_prime(n), "n = {n}");
        }
        assert!(is_prime((1 << 61) - 1));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
    }

    #[test]
    fn find_field_q29_above_30() {
        let f = find_field(29, 30).unwrap();
        assert_eq!(f.p(), 59);
        let w = f.omega().unwrap();
        assert_eq!(f.pow(w, 29), 1);
        assert_ne!(w, 1);
    }

    #[test]
    fn find_field_trivial_order() {
        let f = find_field(1, 2).unwrap();
        assert_eq!(f.p(), 2);
        assert_eq!(f.omega(), Some(1));
    }

    #[test]
    fn next_prime_examples() {
        assert_eq!(next_prime(0).unwrap(), 2);
        assert_eq!(next_prime(24).unwrap(), 29);
        assert_eq!(next_prime(29).unwrap(), 29);
        assert_eq!(next_prime(1 << 20).unwrap(), 1_048_583);
    }

    #[test]
    fn find_field_above_2_20() {
        let f = find_field(29, 1 << 20).unwrap();
        // trial-division oracle
        let expected = ((1u64 << 20)..)
            .find(|&p| p % 29 == 1 && naive_is_prime(p))
            .unwrap();
        assert_eq!(f.p(), expected);
        let roots = f.roots_of_unity();
        let distinct: std::collections::BTreeSet<_> = roots.iter().collect();
        assert_eq!(distinct.len(), 29);
    }

    #[test]
    fn find_field_rejects_zero_order() {
        assert!(find_field(0, 10).is_err());
    }

    #[test]
    fn find_field_cap() {
        assert!(matches!(
            find_field(7, PRIME_CAP),
            Err(Error::SearchLimitExceeded { .. })
        ));
    }

    #[test]
    fn vandermonde_small() {
        let f = FieldSpec::prime(7).unwrap();
        assert_eq!(vandermonde(&[1], &[0], &f), FieldMatrix::identity(1));
        let v = vandermonde(&[3, 2], &[0, 1], &f);
        assert_eq!(v, FieldMatrix::from_rows(&[vec![1, 3], vec![1, 2]], &f).unwrap());
        // 0^0 = 1
        assert_eq!(vandermonde(&[0], &[0, 1], &f).as_slice(), &[1, 0]);
    }

    #[test]
    fn dft_matrix_is_invertible() {
        let f = find_field(29, 30).unwrap();
        let exps: Vec<u64> = (0..29).collect();
        let v = vandermonde(&f.roots_of_unity(), &exps, &f);
        assert!(is_invertible(&v, &f).unwrap());
    }

    #[test]
    fn two_by_two_roots() {
        let f = find_field(29, 30).unwrap();
        let w = f.omega().unwrap();
        let v = vandermonde(&[1, w], &[6, 28], &f);
        assert!(is_invertible(&v, &f).unwrap());
    }

    #[test]
    fn solve_small_system() {
        let f = FieldSpec::prime(7).unwrap();
        let a = FieldMatrix::from_rows(&[vec![1, 3], vec![1, 2]], &f).unwrap();
        let b = FieldMatrix::from_rows(&[vec![4], vec![3]], &f).unwrap();
        let x = solve(&a, &b, &f).unwrap();
        assert_eq!(x.as_slice(), &[1, 1]);
        let id = FieldMatrix::identity(2);
        assert_eq!(solve(&id, &b, &f).unwrap(), b);
    }

    #[test]
    fn solve_singular() {
        let f = FieldSpec::prime(7).unwrap();
        let a = FieldMatrix::from_rows(&[vec![1, 3], vec![1, 3]], &f).unwrap();
        let b = FieldMatrix::zeros(2, 1);
        assert!(matches!(
            solve(&a, &b, &f),
            Err(Error::SingularMatrix { rank: 1, size: 2 })
        ));
    }

    #[test]
    fn invertibility_edge_cases() {
        let f = FieldSpec::prime(7).unwrap();
        assert!(!is_invertible(&FieldMatrix::zeros(1, 1), &f).unwrap());
        let five = FieldMatrix::from_rows(&[vec![5]], &f).unwrap();
        assert!(is_invertible(&five, &f).unwrap());
        assert!(is_invertible(&FieldMatrix::zeros(1, 2), &f).is_err());
    }

    #[test]
    fn audit_detects_duplicate_rows() {
        let f = FieldSpec::prime(59).unwrap();
        let v = vandermonde(&[2, 3, 2], &[0, 1], &f);
        let audit = audit_row_subsets(&[&v], 2, &f, SubsetPolicy::Exhaustive);
        assert_eq!(audit.checked, 3);
        assert_eq!(audit.passed, 2);
        assert_eq!(audit.first_failure, Some(vec![0, 2]));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(29, 2), 406);
        assert_eq!(binomial(29, 5), 118_755);
        assert_eq!(binomial(3, 5), 0);
    }
}
