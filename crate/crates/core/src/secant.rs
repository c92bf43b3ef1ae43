//! Dimensions of secant varieties of the Grassmannian G(n, m).
//!
//! By Terracini's lemma the affine dimension of the cone over the variety
//! spanned by `l` generic points of G(n, m) equals the rank of the stacked
//! tangent spaces of the affine cone at those points. Everything here
//! reports `l` = number of points; the projective variety is the
//! (l-1)-th secant in the "S_{l-1}" indexing.

use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::lower_bound_new;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{self, modp, normalize_columns, orthogonal_complement, CMat};
use crate::multivector::{check_shape, wedge_refs, Multivector, VectorM, WedgeTables};
use crate::rng::{complex_gaussian_vec, derive_seed, rng_from_seed, DEFAULT_SEED};
use crate::subset::{binom, AppendTable};

/// Largest C(m, n) a secant computation accepts.
pub const DESK_CAP: usize = 100_000;
/// Largest tangent matrix, in entries.
pub const MATRIX_CAP: usize = 1 << 24;
/// Factor-matrix rank tolerance used to reject dependent factors.
const INDEPENDENCE_TOL: f64 = 1e-10;

/// A point of G(n, m), given by independent factors.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    m: usize,
    factors: Vec<VectorM>,
}

impl GrassmannPoint {
    pub fn new(m: usize, factors: Vec<VectorM>) -> Result<Self> {
        for f in &factors {
            if f.m() != m {
                return Err(Error::DimensionMismatch { expected: m, found: f.m() });
            }
        }
        if factors.len() > m {
            return Err(Error::GradeOverflow { grade: factors.len(), m });
        }
        if !factors.is_empty() {
            let rank = linalg::numeric_rank(linalg::columns_to_mat(&factors).as_ref(), INDEPENDENCE_TOL)?;
            if rank.rank < factors.len() {
                return Err(Error::DependentFactors);
            }
        }
        Ok(Self { m, factors })
    }

    /// Factors drawn i.i.d. standard complex Gaussian.
    pub fn random<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Self> {
        loop {
            let factors = (0..n).map(|_| VectorM(complex_gaussian_vec(rng, m))).collect();
            match Self::new(m, factors) {
                Err(Error::DependentFactors) => continue,
                other => return other,
            }
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[VectorM] {
        &self.factors
    }

    pub fn to_multivector(&self) -> Result<Multivector> {
        let refs: Vec<&VectorM> = self.factors.iter().collect();
        Multivector::from_coeffs(self.m, self.n(), wedge_refs(self.m, &refs))
    }
}

/// The C(m,n) × m matrix of `v ↦ f_1 ∧ … ∧ v ∧ … ∧ f_n` with `v` in slot
/// `slot`, given the wedge `omega` of the other factors in order.
///
/// Moving `v` from slot `k` to the end passes `n-1-k` vectors, hence the sign.
pub(crate) fn slot_matrix(table: &AppendTable, omega: &[Complex64], slot: usize) -> CMat {
    let (m, n) = (table.m, table.grade + 1);
    let mut out = Mat::zeros(binom(m, n), m);
    let flip = (n - 1 - slot) % 2 == 1;
    for (t, w) in omega.iter().enumerate() {
        if *w == Complex64::new(0.0, 0.0) {
            continue;
        }
        for e in table.row(t) {
            let neg = e.negative ^ flip;
            let cell = &mut out[(e.target as usize, e.vector_index as usize)];
            if neg {
                *cell -= w;
            } else {
                *cell += w;
            }
        }
    }
    out
}

fn others(factors: &[VectorM], skip: usize) -> Vec<&VectorM> {
    factors.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, v)| v).collect()
}

/// The n·m multivectors obtained by substituting each standard basis
/// vector into each factor slot. Their span is the tangent space of the
/// affine cone over G(n, m) at `p`, of dimension n(m-n)+1, and contains `p`.
pub fn tangent_cone_basis(p: &GrassmannPoint) -> Result<Vec<Multivector>> {
    let (m, n) = (p.m(), p.n());
    if n == 0 {
        return Ok(vec![p.to_multivector()?]);
    }
    let tables = WedgeTables::new(m, n);
    let mut out = Vec::with_capacity(n * m);
    for k in 0..n {
        let omega = tables.wedge(others(&p.factors, k));
        let mat = slot_matrix(tables.table(n - 1), &omega, k);
        for i in 0..m {
            let col = (0..mat.nrows()).map(|r| mat[(r, i)]).collect();
            out.push(Multivector::from_coeffs(m, n, col)?);
        }
    }
    Ok(out)
}

/// A basis (exactly n(m-n)+1 columns) of the same tangent space: the point
/// itself plus, per slot, substitutions by an orthonormal basis of the
/// complement of the factor span.
pub fn tangent_space_matrix(p: &GrassmannPoint) -> Result<CMat> {
    tangent_space_with(&WedgeTables::new(p.m(), p.n()), p)
}

fn tangent_space_with(tables: &WedgeTables, p: &GrassmannPoint) -> Result<CMat> {
    let (m, n) = (p.m(), p.n());
    let point = Multivector::from_coeffs(m, n, tables.wedge(&p.factors))?;
    let rows = point.coeffs().len();
    let dim = n * (m - n) + 1;
    let mut out = Mat::zeros(rows, dim);
    for (r, c) in point.coeffs().iter().enumerate() {
        out[(r, 0)] = *c;
    }
    if n == 0 || n == m {
        return Ok(out);
    }
    let complement = orthogonal_complement(&p.factors);
    let w = linalg::columns_to_mat(&complement);
    for k in 0..n {
        let omega = tables.wedge(others(&p.factors, k));
        let block = slot_matrix(tables.table(n - 1), &omega, k) * &w;
        let offset = 1 + k * (m - n);
        for j in 0..(m - n) {
            for r in 0..rows {
                out[(r, offset + j)] = block[(r, j)];
            }
        }
    }
    Ok(out)
}

/// Expected dimension `min(l(n(m-n)+1) - 1, C(m,n) - 1)`.
pub fn expected_dim(m: usize, n: usize, l: usize) -> usize {
    (l * (n * (m - n) + 1) - 1).min(binom(m, n) - 1)
}

/// Smallest number of points whose expected secant dimension fills the
/// ambient projective space, found by direct search.
pub fn min_filling_l(m: usize, n: usize) -> Result<u64> {
    if n == 0 || n >= m {
        return Err(Error::DegenerateGrade { m, n });
    }
    let total = crate::subset::binomial(m as u64, n as u64)
        .ok_or_else(|| Error::TooLarge(format!("C({m},{n})")))?;
    let cone = (n * (m - n) + 1) as u128;
    let mut l: u128 = 1;
    while l * cone - 1 < total - 1 {
        l += 1;
    }
    Ok(l as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecantOptions {
    pub trials: usize,
    pub tol: f64,
    pub certify: bool,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for SecantOptions {
    fn default() -> Self {
        Self { trials: 3, tol: 1e-8, certify: false, seed: DEFAULT_SEED, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecantReport {
    pub m: usize,
    pub n: usize,
    /// Number of points.
    pub l: usize,
    pub affine_rank: usize,
    pub projective_dim: usize,
    pub expected_dim: usize,
    pub defect: usize,
    /// Trials actually run: stops early once the largest possible rank is seen.
    pub trials: usize,
    pub tol: f64,
    /// An exact rank over GF(p) on an integer sample matched `affine_rank`.
    pub certified: bool,
    pub modular_rank: Option<usize>,
    /// A singular value landed within a factor 10 of the cut in some trial.
    pub ambiguous: bool,
    pub seed: u64,
}

fn check_sizes(m: usize, n: usize, l: usize) -> Result<usize> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    let rows = check_shape(m, n)?;
    if rows > DESK_CAP {
        return Err(Error::TooLarge(format!("C({m},{n}) = {rows} exceeds {DESK_CAP}")));
    }
    let cols = l * (n * (m - n) + 1);
    if rows.saturating_mul(cols) > MATRIX_CAP {
        return Err(Error::TooLarge(format!("tangent matrix {rows}x{cols} exceeds {MATRIX_CAP} entries")));
    }
    Ok(rows)
}

/// Numeric rank of the stacked tangent spaces at `l` random points for one
/// seeded trial.
fn trial_rank(m: usize, n: usize, l: usize, tol: f64, seed: u64) -> Result<linalg::NumericRank> {
    let mut rng = rng_from_seed(seed);
    let rows = binom(m, n);
    let d = n * (m - n) + 1;
    let mut a = Mat::zeros(rows, l * d);
    let tables = WedgeTables::new(m, n);
    for j in 0..l {
        let p = GrassmannPoint::random(m, n, &mut rng)?;
        let block = tangent_space_with(&tables, &p)?;
        a.as_mut().subcols_mut(j * d, d).copy_from(&block);
    }
    normalize_columns(&mut a);
    linalg::numeric_rank(a.as_ref(), tol)
}

/// Exact rank modulo a random 62-bit prime of the full substitution
/// tangent vectors at `l` points with integer entries in [-10^6, 10^6].
fn modular_trial_rank(m: usize, n: usize, l: usize, seed: u64) -> usize {
    let mut rng = rng_from_seed(seed);
    let p = modp::random_prime_62(&mut rng);
    let mut rows = Vec::with_capacity(l * n * m);
    let tables: Vec<AppendTable> = (0..n).map(|g| AppendTable::new(m, g)).collect();
    for _ in 0..l {
        let factors: Vec<Vec<u64>> = (0..n)
            .map(|_| (0..m).map(|_| modp::from_i64(rng.gen_range(-1_000_000..=1_000_000), p)).collect())
            .collect();
        if n == 0 {
            rows.push(vec![1]);
            continue;
        }
        let table = &tables[n - 1];
        for k in 0..n {
            let mut omega = vec![1u64];
            for (g, f) in factors.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, f)| f).enumerate() {
                omega = append_mod(&tables[g], &omega, f, p);
            }
            let flip = (n - 1 - k) % 2 == 1;
            let mut slot_rows = vec![vec![0u64; binom(m, n)]; m];
            for (t, &w) in omega.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                for e in table.row(t) {
                    let row = &mut slot_rows[e.vector_index as usize][e.target as usize];
                    let val = if e.negative ^ flip { p - w } else { w };
                    *row = (*row + val) % p;
                }
            }
            rows.extend(slot_rows);
        }
    }
    modp::rank(rows, p)
}

fn append_mod(table: &AppendTable, omega: &[u64], v: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; binom(table.m, table.grade + 1)];
    for (t, &w) in omega.iter().enumerate() {
        if w == 0 {
            continue;
        }
        for e in table.row(t) {
            let term = modp::mul(w, v[e.vector_index as usize], p);
            let val = if e.negative { (p - term) % p } else { term };
            let cell = &mut out[e.target as usize];
            *cell = (*cell + val) % p;
        }
    }
    out
}

/// Measured dimension of the variety swept by sums of `l` points of
/// G(n, m): max numeric rank over `opts.trials` random draws.
pub fn secant_dim(m: usize, n: usize, l: usize, opts: &SecantOptions) -> Result<SecantReport> {
    if n > m {
        return Err(Error::GradeOverflow { grade: n, m });
    }
    check_sizes(m, n, l)?;
    if opts.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let key = [m as u64, n as u64, l as u64];
    let trial = |t: usize| trial_rank(m, n, l, opts.tol, derive_seed(opts.seed, &[key[0], key[1], key[2], t as u64]));
    // A trial at the largest possible rank cannot be beaten; skip the rest.
    let ceiling = binom(m, n).min(l * (n * (m - n) + 1));
    let mut ranks = vec![trial(0)?];
    if ranks[0].rank < ceiling {
        let rest = opts.exec.map_range(opts.trials - 1, |t| trial(t + 1));
        ranks.extend(rest.into_iter().collect::<Result<Vec<_>>>()?);
    }
    let affine_rank = ranks.iter().map(|r| r.rank).max().unwrap_or(0);
    let ambiguous = ranks.iter().any(|r| r.ambiguous);
    let projective_dim = affine_rank.saturating_sub(1);
    let expected = expected_dim(m, n, l);
    let modular_rank = opts
        .certify
        .then(|| modular_trial_rank(m, n, l, derive_seed(opts.seed, &[key[0], key[1], key[2], u64::MAX])));
    Ok(SecantReport {
        m,
        n,
        l,
        affine_rank,
        projective_dim,
        expected_dim: expected,
        defect: expected - projective_dim,
        trials: ranks.len(),
        tol: opts.tol,
        certified: modular_rank == Some(affine_rank),
        modular_rank,
        ambiguous,
        seed: opts.seed,
    })
}

/// Grid scan output; cells over the size caps are listed in `skipped`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    pub reports: Vec<SecantReport>,
    pub skipped: Vec<String>,
}

/// All (m, n, l) with n in `ns`, n < m <= `m_max`, 1 <= l <= `l_max`,
/// ordered by (m, n, l).
pub fn defect_scan(m_max: usize, ns: &[usize], l_max: usize, opts: &SecantOptions) -> Result<ScanOutcome> {
    let mut cells = Vec::new();
    for &n in ns {
        for m in (n + 1).max(2)..=m_max {
            for l in 1..=l_max {
                cells.push((m, n, l));
            }
        }
    }
    defect_scan_cells(cells, opts)
}

/// Scans an explicit list of cells. Each cell derives its own generators
/// from `(seed, m, n, l)`, so the result does not depend on scheduling.
pub fn defect_scan_cells(mut cells: Vec<(usize, usize, usize)>, opts: &SecantOptions) -> Result<ScanOutcome> {
    if cells.is_empty() {
        return Err(Error::InvalidArgument("empty scan grid".into()));
    }
    cells.sort_unstable();
    cells.dedup();
    let inner = SecantOptions { exec: Exec::Sequential, ..*opts };
    let results = opts.exec.map(cells.clone(), |(m, n, l)| secant_dim(m, n, l, &inner));
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for ((m, n, l), r) in cells.into_iter().zip(results) {
        match r {
            Ok(rep) => reports.push(rep),
            Err(Error::TooLarge(msg)) => skipped.push(format!("skipped (m={m}, n={n}, l={l}): {msg}")),
            Err(e) => return Err(e),
        }
    }
    Ok(ScanOutcome { reports, skipped })
}

pub const CSV_HEADER: &str = "m,n,l,projective_dim,expected_dim,defect,certified,tol,seed";

pub fn to_csv(reports: &[SecantReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{:e},{}",
            r.m, r.n, r.l, r.projective_dim, r.expected_dim, r.defect, r.certified, r.tol, r.seed
        )
        .unwrap();
    }
    s
}

/// `min_filling_l` must agree with the lower bound computed by the bounds
/// module; exposed for cross-checks.
pub fn filling_matches_bound(m: usize, n: usize) -> Result<bool> {
    Ok(min_filling_l(m, n)? == lower_bound_new(m, n)?)
}
