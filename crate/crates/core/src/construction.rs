//! The grid-partition cyclic-addition family: parameters, builder, worker
//! bound and the residue invariants of the antidiagonal entries.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::gap;
use crate::table::{DegreeTable, TableParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConstructionParams {
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub t: usize,
    pub x: u64,
    pub z_tr: u64,
    pub z_bl: u64,
    pub z_br: u64,
    pub z: u64,
    pub y: u64,
    pub q: u64,
}

impl ConstructionParams {
    pub fn table_params(&self) -> TableParams {
        TableParams::new(self.k, self.m, self.l, self.t)
    }
}

pub fn grid_cat_params(k: usize, m: usize, l: usize, t: usize) -> Result<ConstructionParams> {
    if l == 0 || t == 0 {
        return Err(Error::Precondition("L and T must be at least 1".into()));
    }
    if k < l {
        return Err(Error::Precondition(format!("requires K >= L, got K = {k}, L = {l}")));
    }
    if m < 2 {
        return Err(Error::Precondition(format!("requires M >= 2, got M = {m}")));
    }
    let (kk, mm, ll, tt) = (k as u64, m as u64, l as u64, t as u64);
    let x = mm + 1;
    let z_tr = ll + (kk + tt).div_ceil(kk * mm + kk);
    let z_bl = (ll + tt - 1).div_ceil(kk);
    let z_br = if tt <= kk * mm {
        (ll + tt - 1) / (kk * mm - tt + 1) + 1
    } else {
        ll + tt - 1 + (kk + tt) / (kk * mm + kk)
    };
    let z = (ll + 1).max(z_tr).max(z_bl).max(z_br);
    let y = z * x;
    Ok(ConstructionParams {
        k,
        m,
        l,
        t,
        x,
        z_tr,
        z_bl,
        z_br,
        z,
        y,
        q: kk * y - 1,
    })
}

pub fn build_grid_cat(k: usize, m: usize, l: usize, t: usize) -> Result<DegreeTable> {
    let p = grid_cat_params(k, m, l, t)?;
    build_from_params(&p)
}

pub fn build_from_params(p: &ConstructionParams) -> Result<DegreeTable> {
    let q = p.q;
    let mm = p.m as u64;
    let alpha_p = gap(p.k * p.m, p.y, mm)?;
    let beta_p = gap(p.l * p.m, p.x, mm)?;
    // x*t - 1 with t = 0 wraps to q - 1
    let alpha_s = (0..p.t as u64).map(|t| (p.x * t + q - 1) % q).collect();
    let beta_s = (0..p.t as u64).map(|t| p.l as u64 * p.x + p.y * t).collect();
    DegreeTable::new_reduced(p.table_params(), alpha_p, beta_p, alpha_s, beta_s, q)
}

/// Worker bound `K(M+1)z - 1`; algebraically equal to `q`.
pub fn theorem2_bound(p: &ConstructionParams) -> u64 {
    p.k as u64 * (p.m as u64 + 1) * p.z - 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma3Report {
    pub k: usize,
    pub l: usize,
    pub u: u64,
    /// Every block entry `(k-1)y + (l-1)x + mu`, `mu < 2M - 1`, lies below `q - 1`.
    pub block_range: bool,
    pub reduced_is_identity: bool,
    pub mod_x: bool,
    /// `u mod y == (l-1)x + M - 1`
    pub mod_y: bool,
    /// The variant without the factor `x`: `u mod y == (l-1) + M - 1`.
    pub mod_y_unscaled: bool,
}

impl Lemma3Report {
    pub fn holds(&self) -> bool {
        self.block_range && self.reduced_is_identity && self.mod_x && self.mod_y
    }
}

/// Residues of the antidiagonal entry `u = (k-1)y + (l-1)x + M - 1` of
/// block `(k, l)` (1-based).
pub fn lemma3_check(p: &ConstructionParams, k: usize, l: usize) -> Result<Lemma3Report> {
    if k == 0 || k > p.k || l == 0 || l > p.l {
        return Err(Error::IndexOutOfRange(format!(
            "block ({k}, {l}) outside 1..={} x 1..={}",
            p.k, p.l
        )));
    }
    let mm = p.m as u64;
    let base = (k as u64 - 1) * p.y + (l as u64 - 1) * p.x;
    let u = base + mm - 1;
    Ok(Lemma3Report {
        k,
        l,
        u,
        block_range: base + 2 * mm - 2 < p.q - 1,
        reduced_is_identity: u % p.q == u,
        mod_x: u % p.x == mm - 1,
        mod_y: u % p.y == (l as u64 - 1) * p.x + mm - 1,
        mod_y_unscaled: u % p.y == (l as u64 - 1) + mm - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{check_constant_antidiagonals, check_lemma2_constraints, Lemma2Violation};
    use crate::table::{decompose, validate, worker_count};

    #[test]
    fn fig3_parameters() {
        let p = grid_cat_params(2, 4, 2, 5).unwrap();
        assert_eq!((p.x, p.z, p.y, p.q), (5, 3, 15, 29));
        assert_eq!((p.z_tr, p.z_bl, p.z_br), (3, 3, 2));
        assert_eq!(theorem2_bound(&p), 29);
    }

    #[test]
    fn small_parameters() {
        let p = grid_cat_params(2, 3, 2, 2).unwrap();
        assert_eq!((p.z_tr, p.z_bl, p.z_br), (3, 2, 1));
        assert_eq!((p.x, p.z, p.y, p.q), (4, 3, 12, 23));
        assert_eq!(theorem2_bound(&p), 23);
    }

    #[test]
    fn domain_errors() {
        assert!(grid_cat_params(1, 2, 2, 1).is_err());
        assert!(grid_cat_params(2, 1, 2, 1).is_err());
    }

    #[test]
    fn z_br_large_t_branch() {
        // T > KM
        let p = grid_cat_params(2, 2, 1, 6).unwrap();
        assert_eq!(p.z_br, 1 + 6 - 1 + 8 / 6);
    }

    #[test]
    fn built_vectors() {
        let t = build_grid_cat(2, 4, 2, 5).unwrap();
        assert_eq!(t.alpha_p(), &[0, 1, 2, 3, 15, 16, 17, 18]);
        assert_eq!(t.beta_p(), &[0, 1, 2, 3, 5, 6, 7, 8]);
        assert_eq!(t.alpha_s(), &[28, 4, 9, 14, 19]);
        assert_eq!(t.beta_s(), &[10, 25, 11, 26, 12]);
        assert_eq!(t.q(), Some(29));
        let r = validate(&t);
        assert!(r.is_valid(), "{r:?}");
        assert!(worker_count(&t) <= 29);

        let t = build_grid_cat(2, 3, 2, 2).unwrap();
        assert_eq!(t.alpha_p(), &[0, 1, 2, 12, 13, 14]);
        assert_eq!(t.beta_p(), &[0, 1, 2, 4, 5, 6]);
        assert_eq!(t.alpha_s(), &[22, 3]);
        assert_eq!(t.beta_s(), &[8, 20]);
        assert!(validate(&t).is_valid());
    }

    #[test]
    fn lemma3_examples() {
        let p = grid_cat_params(2, 4, 2, 5).unwrap();
        let r = lemma3_check(&p, 1, 1).unwrap();
        assert_eq!(r.u, 3);
        assert!(r.holds());
        let r = lemma3_check(&p, 2, 2).unwrap();
        assert_eq!(r.u, 23);
        assert!(r.holds());
        assert!(!r.mod_y_unscaled);
        let r = lemma3_check(&p, 1, 2).unwrap();
        assert_eq!(r.u % p.y, 8);
        assert!(lemma3_check(&p, 3, 1).is_err());
    }

    #[test]
    fn antidiagonal_singletons() {
        let p = grid_cat_params(2, 4, 2, 5).unwrap();
        let d = decompose(&build_from_params(&p).unwrap());
        for k in 1..=2 {
            for l in 1..=2 {
                let u = lemma3_check(&p, k, l).unwrap().u;
                assert_eq!(d.u[k - 1][l - 1].iter().copied().collect::<Vec<_>>(), vec![u]);
            }
        }
    }

    #[test]
    fn lemma2_witness() {
        let t = build_grid_cat(2, 4, 2, 5).unwrap();
        assert!(check_constant_antidiagonals(&t));
        let c = check_lemma2_constraints(&t).unwrap();
        assert!(!c.holds);
        assert_eq!(
            c.violation,
            Some(Lemma2Violation::AboveMeetsTopRight { block: (1, 1), value: 0 })
        );
    }
}
