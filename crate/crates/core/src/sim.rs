//! End-to-end simulation of the masked polynomial-code protocol over `F_p`.
//!
//! `A` is split into a `K x M` block grid and `B` into `M x L`. Worker `n`
//! receives `F(rho_n)` and `G(rho_n)` where
//!
//! ```text
//! F(x) = sum_{k,m} A_{k,m} x^{alpha_p[(k-1)M + m]} + sum_t R_t x^{alpha_s[t]}
//! G(x) = sum_{l,m} B_{m,l} x^{beta_p[(l-1)M + M - m + 1]} + sum_t S_t x^{beta_s[t]}
//! ```
//!
//! so block `(k, l)` of `AB` collects on the antidiagonal degrees of block
//! `(k, l)` of the table. Decoding interpolates `H = FG` on the distinct
//! table entries and sums the coefficients at those degrees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::construction::build_grid_cat;
use crate::error::{Error, Result};
use crate::ffield::{
    audit_row_subsets, find_field, is_invertible, next_prime, solve, vandermonde, FieldMatrix,
    FieldSpec, SubsetAudit, SubsetPolicy, DEFAULT_MIN_P,
};
use crate::table::{validate, DegreeTable, TableParams, IV_RANDOM_CANDIDATES};

/// Name of the generator recorded in reports.
pub const RNG_NAME: &str = "ChaCha8Rng";

const MATRIX_STREAM: u64 = 0;
const POINT_STREAM: u64 = 1;
const MASK_STREAM: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A matrix cut into a grid of equally sized blocks, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMatrix {
    grid: (usize, usize),
    block_shape: (usize, usize),
    blocks: Vec<FieldMatrix>,
}

impl BlockMatrix {
    pub fn from_blocks(grid: (usize, usize), blocks: Vec<FieldMatrix>) -> Result<Self> {
        if blocks.len() != grid.0 * grid.1 || blocks.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks for a {}x{} grid",
                blocks.len(),
                grid.0,
                grid.1
            )));
        }
        let block_shape = (blocks[0].rows(), blocks[0].cols());
        if blocks.iter().any(|b| (b.rows(), b.cols()) != block_shape) {
            return Err(Error::DimensionMismatch("blocks differ in shape".into()));
        }
        Ok(BlockMatrix {
            grid,
            block_shape,
            blocks,
        })
    }

    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    pub fn block_shape(&self) -> (usize, usize) {
        self.block_shape
    }

    /// Block `(i, j)`, 0-based.
    pub fn block(&self, i: usize, j: usize) -> &FieldMatrix {
        &self.blocks[i * self.grid.1 + j]
    }

    pub fn assemble(&self) -> FieldMatrix {
        let (br, bc) = self.block_shape;
        let mut out = FieldMatrix::zeros(self.grid.0 * br, self.grid.1 * bc);
        for i in 0..self.grid.0 {
            for j in 0..self.grid.1 {
                let b = self.block(i, j);
                for r in 0..br {
                    for c in 0..bc {
                        out.set(i * br + r, j * bc + c, b.get(r, c));
                    }
                }
            }
        }
        out
    }
}

pub fn split_matrix(mat: &FieldMatrix, row_blocks: usize, col_blocks: usize) -> Result<BlockMatrix> {
    for (dimension, size, blocks) in [("rows", mat.rows(), row_blocks), ("columns", mat.cols(), col_blocks)] {
        if blocks == 0 || size % blocks != 0 || size == 0 {
            return Err(Error::Divisibility {
                dimension,
                size,
                blocks,
            });
        }
    }
    let (br, bc) = (mat.rows() / row_blocks, mat.cols() / col_blocks);
    let blocks = (0..row_blocks)
        .flat_map(|i| (0..col_blocks).map(move |j| (i, j)))
        .map(|(i, j)| mat.submatrix(i * br, j * bc, br, bc))
        .collect();
    Ok(BlockMatrix {
        grid: (row_blocks, col_blocks),
        block_shape: (br, bc),
        blocks,
    })
}

pub fn random_matrix(rows: usize, cols: usize, field: &FieldSpec, rng: &mut impl Rng) -> FieldMatrix {
    let data = (0..rows * cols).map(|_| rng.random_range(0..field.p())).collect();
    FieldMatrix::from_vec(rows, cols, data)
}

/// Evaluation points `rho` and the sorted distinct table entries `gamma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationPoints {
    pub rho: Vec<u64>,
    pub gamma: Vec<u64>,
}

/// Picks `N` points so that `V(rho, gamma)` is invertible and the mask
/// submatrices pass the audit under `policy`.
///
/// Cyclic tables draw from the `q`-th roots of unity (the contiguous window
/// `omega^0..omega^(N-1)` first, then seeded random subsets); plain tables
/// draw distinct nonzero field elements.
pub fn choose_evaluation_points(
    table: &DegreeTable,
    field: &FieldSpec,
    seed: u64,
    policy: SubsetPolicy,
) -> Result<EvaluationPoints> {
    select_points(table, field, seed, policy).map(|(pts, _)| pts)
}

fn select_points(
    table: &DegreeTable,
    field: &FieldSpec,
    seed: u64,
    policy: SubsetPolicy,
) -> Result<(EvaluationPoints, SubsetAudit)> {
    if table.params().t == 0 {
        return Err(Error::Precondition("at least one mask is required".into()));
    }
    let gamma = table.sumset();
    let n = gamma.len();
    let mut rng = stream(seed, POINT_STREAM);
    let candidates: Box<dyn Iterator<Item = Vec<u64>>> = match table.q() {
        Some(q) => {
            if field.q() != Some(q) {
                return Err(Error::Precondition(format!(
                    "field carries roots of order {:?}, table needs {q}",
                    field.q()
                )));
            }
            let roots = field.roots_of_unity();
            let window = roots[..n].to_vec();
            if n as u64 == q {
                Box::new(std::iter::once(window))
            } else {
                let random = (0..IV_RANDOM_CANDIDATES).map(move |_| {
                    let mut idx = rand::seq::index::sample(&mut rng, q as usize, n).into_vec();
                    idx.sort_unstable();
                    idx.into_iter().map(|i| roots[i]).collect()
                });
                Box::new(std::iter::once(window).chain(random))
            }
        }
        None => {
            if field.p() - 1 < n as u64 {
                return Err(Error::Precondition(format!(
                    "F_{} has fewer than {n} nonzero elements",
                    field.p()
                )));
            }
            let p = field.p();
            Box::new((0..IV_RANDOM_CANDIDATES).map(move |_| {
                rand::seq::index::sample(&mut rng, (p - 1) as usize, n)
                    .into_iter()
                    .map(|i| i as u64 + 1)
                    .collect()
            }))
        }
    };
    for rho in candidates {
        if !is_invertible(&vandermonde(&rho, &gamma, field), field)? {
            continue;
        }
        let audit = privacy_audit(&rho, table, field, policy);
        if audit.all_passed() {
            return Ok((EvaluationPoints { rho, gamma }, audit));
        }
    }
    Err(Error::PointsNotFound(format!(
        "{IV_RANDOM_CANDIDATES} candidate point sets exhausted"
    )))
}

/// Everything the main node generates while encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingState {
    pub points: EvaluationPoints,
    pub r_masks: Vec<FieldMatrix>,
    pub s_masks: Vec<FieldMatrix>,
    pub shares_f: Vec<FieldMatrix>,
    pub shares_g: Vec<FieldMatrix>,
}

pub fn encode_shares(
    a: &BlockMatrix,
    b: &BlockMatrix,
    table: &DegreeTable,
    field: &FieldSpec,
    points: EvaluationPoints,
    seed: u64,
) -> Result<EncodingState> {
    let TableParams { k, m, l, t } = table.params();
    if a.grid != (k, m) || b.grid != (m, l) {
        return Err(Error::DimensionMismatch(format!(
            "A grid {:?} and B grid {:?} do not match K={k}, M={m}, L={l}",
            a.grid, b.grid
        )));
    }
    if a.block_shape.1 != b.block_shape.0 {
        return Err(Error::DimensionMismatch(format!(
            "A blocks {:?} cannot multiply B blocks {:?}",
            a.block_shape, b.block_shape
        )));
    }
    let mut rng = stream(seed, MASK_STREAM);
    let (ar, ac) = a.block_shape;
    let (br, bc) = b.block_shape;
    let r_masks: Vec<_> = (0..t).map(|_| random_matrix(ar, ac, field, &mut rng)).collect();
    let s_masks: Vec<_> = (0..t).map(|_| random_matrix(br, bc, field, &mut rng)).collect();

    // (block, exponent) pairs of F and G
    let f_terms: Vec<(&FieldMatrix, u64)> = (0..k)
        .flat_map(|kk| (0..m).map(move |mm| (kk, mm)))
        .map(|(kk, mm)| (a.block(kk, mm), table.alpha_p()[kk * m + mm]))
        .chain(r_masks.iter().zip(table.alpha_s().iter().copied()))
        .collect();
    let g_terms: Vec<(&FieldMatrix, u64)> = (0..l)
        .flat_map(|ll| (0..m).map(move |j| (ll, j)))
        .map(|(ll, j)| (b.block(m - 1 - j, ll), table.beta_p()[ll * m + j]))
        .chain(s_masks.iter().zip(table.beta_s().iter().copied()))
        .collect();
    let eval = |terms: &[(&FieldMatrix, u64)], x: u64, shape: (usize, usize)| {
        let mut acc = FieldMatrix::zeros(shape.0, shape.1);
        for &(blk, e) in terms {
            acc.add_scaled(blk, field.pow(x, e), field);
        }
        acc
    };
    let shares_f = points.rho.iter().map(|&x| eval(&f_terms, x, a.block_shape)).collect();
    let shares_g = points.rho.iter().map(|&x| eval(&g_terms, x, b.block_shape)).collect();
    Ok(EncodingState {
        points,
        r_masks,
        s_masks,
        shares_f,
        shares_g,
    })
}

pub fn worker_compute(share_f: &FieldMatrix, share_g: &FieldMatrix, field: &FieldSpec) -> Result<FieldMatrix> {
    share_f.mul(share_g, field)
}

/// Answers of every worker, computed in parallel and returned in worker order.
pub fn compute_all(state: &EncodingState, field: &FieldSpec) -> Result<Vec<FieldMatrix>> {
    state
        .shares_f
        .par_iter()
        .zip(&state.shares_g)
        .map(|(f, g)| worker_compute(f, g, field))
        .collect()
}

/// Interpolates `H` on `gamma` and reads off the `K x L` block product.
pub fn decode(
    answers: &[FieldMatrix],
    points: &EvaluationPoints,
    table: &DegreeTable,
    field: &FieldSpec,
) -> Result<BlockMatrix> {
    let EvaluationPoints { rho, gamma } = points;
    let n = gamma.len();
    if answers.len() != n || rho.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} answers and {} points for {n} table entries",
            answers.len(),
            rho.len()
        )));
    }
    let (r, c) = (answers[0].rows(), answers[0].cols());
    if answers.iter().any(|x| (x.rows(), x.cols()) != (r, c)) {
        return Err(Error::DimensionMismatch("answers differ in shape".into()));
    }
    let rhs = FieldMatrix::from_vec(n, r * c, answers.iter().flat_map(|x| x.as_slice()).copied().collect());
    let coeffs = solve(&vandermonde(rho, gamma, field), &rhs, field)?;

    let TableParams { k, m, l, .. } = table.params();
    let mut blocks = Vec::with_capacity(k * l);
    for kk in 0..k {
        let a = table.alpha_block(kk);
        for ll in 0..l {
            let b = table.beta_block(ll);
            let mut u: Vec<u64> = (0..m).map(|i| table.add(a[i], b[m - 1 - i])).collect();
            u.sort_unstable();
            u.dedup();
            let mut acc = vec![0u64; r * c];
            for v in u {
                let idx = gamma.binary_search(&v).map_err(|_| {
                    Error::DimensionMismatch(format!("antidiagonal degree {v} missing from gamma"))
                })?;
                for (x, &y) in acc.iter_mut().zip(coeffs.row(idx)) {
                    *x = field.add(*x, y);
                }
            }
            blocks.push(FieldMatrix::from_vec(r, c, acc));
        }
    }
    BlockMatrix::from_blocks((k, l), blocks)
}

/// T x T invertibility of both mask Vandermonde matrices on worker subsets.
pub fn privacy_audit(rho: &[u64], table: &DegreeTable, field: &FieldSpec, policy: SubsetPolicy) -> SubsetAudit {
    let va = vandermonde(rho, table.alpha_s(), field);
    let vb = vandermonde(rho, table.beta_s(), field);
    audit_row_subsets(&[&va, &vb], table.params().t, field, policy)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scheme {
    Construction1(TableParams),
    Table(DegreeTable),
}

impl Scheme {
    pub fn table(&self) -> Result<DegreeTable> {
        match self {
            Scheme::Construction1(p) => build_grid_cat(p.k, p.m, p.l, p.t),
            Scheme::Table(t) => Ok(t.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub block_size: usize,
    pub seed: u64,
    /// Lower bound for the field prime.
    pub min_p: u64,
    pub policy: SubsetPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            block_size: 2,
            seed: 0,
            min_p: DEFAULT_MIN_P,
            policy: SubsetPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimulationReport {
    pub schema: u32,
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub t: usize,
    pub n: usize,
    pub p: u64,
    pub q: Option<u64>,
    pub decode_ok: bool,
    pub product_check: bool,
    pub audit_checked: u64,
    pub audit_passed: u64,
    pub audit_exhaustive: bool,
    pub seed: u64,
    pub rng: &'static str,
}

impl SimulationReport {
    pub fn success(&self) -> bool {
        self.decode_ok && self.audit_checked == self.audit_passed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// The field a table is simulated over: the smallest prime `>= min_p` with
/// `q`-th roots of unity for cyclic tables, else the smallest prime above
/// both `min_p` and `N`.
pub fn simulation_field(table: &DegreeTable, min_p: u64) -> Result<FieldSpec> {
    match table.q() {
        Some(q) => find_field(q, min_p),
        None => FieldSpec::prime(next_prime(min_p.max(table.sumset().len() as u64 + 1))?),
    }
}

pub fn end_to_end(scheme: &Scheme, config: &SimConfig) -> Result<SimulationReport> {
    simulate_table(&scheme.table()?, config)
}

/// Validates, encodes seeded random matrices, decodes, and compares with the
/// schoolbook product.
pub fn simulate_table(table: &DegreeTable, config: &SimConfig) -> Result<SimulationReport> {
    let report = validate(table);
    if !report.is_valid() {
        return Err(Error::InvalidTable(Box::new(report)));
    }
    let TableParams { k, m, l, t } = table.params();
    let bs = config.block_size;
    if bs == 0 {
        return Err(Error::Precondition("block size must be at least 1".into()));
    }
    let field = simulation_field(table, config.min_p)?;
    let (points, audit) = select_points(table, &field, config.seed, config.policy)?;
    let n = points.gamma.len();

    let mut rng = stream(config.seed, MATRIX_STREAM);
    let a = random_matrix(k * bs, m * bs, &field, &mut rng);
    let b = random_matrix(m * bs, l * bs, &field, &mut rng);
    let expected = a.mul(&b, &field)?;

    let state = encode_shares(
        &split_matrix(&a, k, m)?,
        &split_matrix(&b, m, l)?,
        table,
        &field,
        points,
        config.seed,
    )?;
    let answers = compute_all(&state, &field)?;
    let product_check = match decode(&answers, &state.points, table, &field) {
        Ok(prod) => prod.assemble() == expected,
        Err(Error::SingularMatrix { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok(SimulationReport {
        schema: 1,
        k,
        m,
        l,
        t,
        n,
        p: field.p(),
        q: table.q(),
        decode_ok: product_check,
        product_check,
        audit_checked: audit.checked,
        audit_passed: audit.passed,
        audit_exhaustive: audit.exhaustive,
        seed: config.seed,
        rng: RNG_NAME,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::fixtures::{fig2b, tiny_dt};

    fn f7() -> FieldSpec {
        FieldSpec::prime(7).unwrap()
    }

    #[test]
    fn split_shapes() {
        let f = f7();
        let mat = FieldMatrix::from_rows(&vec![vec![1; 6]; 4], &f).unwrap();
        let b = split_matrix(&mat, 2, 3).unwrap();
        assert_eq!(b.block_shape(), (2, 2));
        assert_eq!(b.assemble(), mat);
        match split_matrix(&mat, 3, 2) {
            Err(Error::Divisibility { dimension, size, blocks }) => {
                assert_eq!((dimension, size, blocks), ("rows", 4, 3))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn split_identity() {
        let b = split_matrix(&FieldMatrix::identity(6), 3, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_eq!(b.block(i, j), &FieldMatrix::identity(2));
                } else {
                    assert!(b.block(i, j).is_zero());
                }
            }
        }
    }

    #[test]
    fn worker_product_example() {
        let f = f7();
        let x = FieldMatrix::from_rows(&[vec![1, 2]], &f).unwrap();
        let y = FieldMatrix::from_rows(&[vec![3], vec![4]], &f).unwrap();
        assert_eq!(worker_compute(&x, &y, &f).unwrap().get(0, 0), 4);
    }

    #[test]
    fn fig2b_uses_every_root() {
        let f = find_field(29, 2).unwrap();
        assert_eq!(f.p(), 59);
        let pts = choose_evaluation_points(&fig2b(), &f, 7, SubsetPolicy::Exhaustive).unwrap();
        assert_eq!(pts.gamma, (0..29).collect::<Vec<_>>());
        let mut rho = pts.rho.clone();
        rho.sort_unstable();
        let mut roots = f.roots_of_unity();
        roots.sort_unstable();
        assert_eq!(rho, roots);
        let audit = privacy_audit(&pts.rho, &fig2b(), &f, SubsetPolicy::Exhaustive);
        assert_eq!((audit.checked, audit.passed), (406, 406));
    }

    #[test]
    fn field_mismatch_is_rejected() {
        let f = find_field(23, 2).unwrap();
        assert!(choose_evaluation_points(&fig2b(), &f, 0, SubsetPolicy::Exhaustive).is_err());
    }

    #[test]
    fn audit_detects_duplicate_points() {
        let f = find_field(29, 2).unwrap();
        let w = f.omega().unwrap();
        let audit = privacy_audit(&[1, w, w], &fig2b(), &f, SubsetPolicy::Exhaustive);
        assert!(!audit.all_passed());
        assert_eq!(audit.first_failure, Some(vec![1, 2]));
        let single = privacy_audit(&[1, w], &fig2b(), &f, SubsetPolicy::Exhaustive);
        assert_eq!((single.checked, single.passed), (1, 1));
    }

    fn run(table: &DegreeTable, a: &FieldMatrix, b: &FieldMatrix, field: &FieldSpec, seed: u64) -> FieldMatrix {
        let TableParams { k, m, l, .. } = table.params();
        let pts = choose_evaluation_points(table, field, seed, SubsetPolicy::default()).unwrap();
        let state = encode_shares(
            &split_matrix(a, k, m).unwrap(),
            &split_matrix(b, m, l).unwrap(),
            table,
            field,
            pts,
            seed,
        )
        .unwrap();
        let answers = compute_all(&state, field).unwrap();
        decode(&answers, &state.points, table, field).unwrap().assemble()
    }

    #[test]
    fn masks_cancel_for_zero_b() {
        let f = find_field(29, 2).unwrap();
        let mut rng = stream(3, 9);
        let a = random_matrix(4, 6, &f, &mut rng);
        for seed in 0..5 {
            let prod = run(&fig2b(), &a, &FieldMatrix::zeros(6, 6), &f, seed);
            assert!(prod.is_zero());
        }
    }

    #[test]
    fn zero_a_gives_pure_mask_shares() {
        let f = find_field(29, 2).unwrap();
        let t = fig2b();
        let pts = choose_evaluation_points(&t, &f, 1, SubsetPolicy::default()).unwrap();
        let zero_a = split_matrix(&FieldMatrix::zeros(4, 6), 2, 3).unwrap();
        let b = split_matrix(&FieldMatrix::identity(6), 3, 3).unwrap();
        let state = encode_shares(&zero_a, &b, &t, &f, pts, 1).unwrap();
        for (x, share) in state.points.rho.iter().zip(&state.shares_f) {
            let mut want = FieldMatrix::zeros(2, 2);
            for (r, &e) in state.r_masks.iter().zip(t.alpha_s()) {
                want.add_scaled(r, f.pow(*x, e), &f);
            }
            assert_eq!(share, &want);
        }
    }

    #[test]
    fn plain_table_round_trip() {
        let t = tiny_dt();
        let f = simulation_field(&t, 2).unwrap();
        let mut rng = stream(5, 9);
        let a = random_matrix(2, 1, &f, &mut rng);
        let b = random_matrix(1, 3, &f, &mut rng);
        assert_eq!(run(&t, &a, &b, &f, 5), a.mul(&b, &f).unwrap());
    }

    #[test]
    fn deterministic_reports() {
        let cfg = SimConfig {
            seed: 7,
            min_p: 2,
            ..SimConfig::default()
        };
        let s = Scheme::Table(fig2b());
        let r1 = end_to_end(&s, &cfg).unwrap();
        assert!(r1.success());
        assert_eq!(r1.p, 59);
        assert_eq!(r1, end_to_end(&s, &cfg).unwrap());
        assert_eq!(r1.to_json(), end_to_end(&s, &cfg).unwrap().to_json());
    }

    #[test]
    fn construction_pipeline() {
        let cfg = SimConfig {
            seed: 7,
            ..SimConfig::default()
        };
        let r = end_to_end(&Scheme::Construction1(TableParams::new(2, 4, 2, 5)), &cfg).unwrap();
        assert!(r.decode_ok && r.product_check);
        assert!(r.n <= 29);
    }

    #[test]
    fn invalid_table_is_refused() {
        let (p, ap, bp, _, bs, q) = fig2b().into_parts();
        let bad = DegreeTable::new(p, ap, bp, vec![6, 6], bs, q).unwrap();
        assert!(matches!(
            simulate_table(&bad, &SimConfig::default()),
            Err(Error::InvalidTable(_))
        ));
    }
}
