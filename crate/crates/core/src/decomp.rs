//! Decomposability, support rank, and exact length of 2-vectors.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{self, numeric_rank};
use crate::multivector::{Multivector, VectorM, WedgeTables};
use crate::subset::{binom, lex_masks, mask_members, rank_mask};

/// Default relative tolerance for numeric ranks.
pub const RANK_TOL: f64 = 1e-8;

/// One decomposable summand `v_1 ∧ … ∧ v_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompTerm {
    pub vectors: Vec<VectorM>,
}

impl DecompTerm {
    pub fn new(vectors: Vec<VectorM>) -> Result<Self> {
        if let Some(first) = vectors.first() {
            for v in &vectors {
                if v.m() != first.m() {
                    return Err(Error::DimensionMismatch { expected: first.m(), found: v.m() });
                }
            }
        }
        Ok(Self { vectors })
    }

    pub fn m(&self) -> usize {
        self.vectors.first().map_or(0, VectorM::m)
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    /// The summand as a multivector; requires at least one factor.
    pub fn to_multivector(&self) -> Result<Multivector> {
        crate::multivector::wedge_vectors(&self.vectors)
    }
}

/// Sum of the given decomposable terms as a grade-n multivector in C^m.
pub fn sum_terms(m: usize, n: usize, terms: &[DecompTerm]) -> Result<Multivector> {
    let mut acc = vec![Complex64::new(0.0, 0.0); crate::multivector::check_shape(m, n)?];
    let tables = WedgeTables::new(m, n);
    for t in terms {
        if t.n() != n {
            return Err(Error::WrongGrade { expected: n.to_string(), found: t.n() });
        }
        if n > 0 && t.m() != m {
            return Err(Error::DimensionMismatch { expected: m, found: t.m() });
        }
        for (a, x) in acc.iter_mut().zip(tables.wedge(&t.vectors)) {
            *a += x;
        }
    }
    Multivector::from_coeffs(m, n, acc)
}

/// Support rank: dimension of the smallest subspace F with psi in ∧^n F.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    /// Orthonormal basis of F.
    pub support_basis: Vec<VectorM>,
    pub ambiguous: bool,
}

/// Alternating symbol `p_{I, j}` with `j` placed after the sorted set `I`.
#[inline]
fn alt_coeff(psi: &[Complex64], m: usize, n: usize, mask: u64, j: usize) -> Complex64 {
    let bit = 1u64 << j;
    if mask & bit != 0 {
        return Complex64::new(0.0, 0.0);
    }
    let c = psi[rank_mask(m, n, mask | bit)];
    if (mask >> j).count_ones() % 2 == 1 {
        -c
    } else {
        c
    }
}

/// Matrix whose columns are the full (n-1)-fold contractions of psi, one
/// column per (n-1)-subset; its column span is the support of psi.
fn contraction_matrix(psi: &Multivector) -> Mat<Complex64> {
    let (m, n) = (psi.m(), psi.n());
    let masks = lex_masks(m, n - 1);
    let c = psi.coeffs();
    Mat::from_fn(m, masks.len(), |i, t| alt_coeff(c, m, n, masks[t], i))
}

pub fn support_rank(psi: &Multivector, tol: f64) -> Result<RankReport> {
    if psi.is_zero() {
        return Err(Error::ZeroMultivector);
    }
    if psi.n() == 0 {
        return Ok(RankReport { rank: 0, support_basis: Vec::new(), ambiguous: false });
    }
    let a = contraction_matrix(psi);
    let svd = a.thin_svd().map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let sv: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let info = linalg::rank_from_singular_values(sv, tol);
    let u = svd.U();
    let support_basis =
        (0..info.rank).map(|r| VectorM((0..psi.m()).map(|i| u[(i, r)]).collect())).collect();
    Ok(RankReport { rank: info.rank, support_basis, ambiguous: info.ambiguous })
}

/// Sum of squared moduli of all Plücker quadrics
/// `sum_k (-1)^k p_{I ∪ j_k} p_{J \ j_k}` over every (n-1)-subset I and
/// (n+1)-subset J. Equivalent quadrics are not deduplicated.
pub fn plucker_residual(psi: &Multivector) -> f64 {
    plucker_residual_with(psi, Exec::default())
}

pub fn plucker_residual_with(psi: &Multivector, exec: Exec) -> f64 {
    let (m, n) = (psi.m(), psi.n());
    if n == 0 || n == m {
        return 0.0;
    }
    let c = psi.coeffs();
    let small = lex_masks(m, n - 1);
    let large = lex_masks(m, n + 1);
    // Partial sums per I, reduced in lexicographic order below.
    let partials = exec.map_range(small.len(), |t| {
        let imask = small[t];
        let mut acc = 0.0;
        for &jmask in &large {
            let mut q = Complex64::new(0.0, 0.0);
            for (k, j) in mask_members(jmask).enumerate() {
                let left = alt_coeff(c, m, n, imask, j);
                if left == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let right = c[rank_mask(m, n, jmask & !(1u64 << j))];
                if k % 2 == 1 {
                    q -= left * right;
                } else {
                    q += left * right;
                }
            }
            acc += q.norm_sqr();
        }
        acc
    });
    partials.into_iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposabilityReport {
    pub decomposable: bool,
    pub plucker_residual: f64,
    /// `plucker_residual / ‖psi‖^4`, invariant under scaling.
    pub relative_residual: f64,
    pub support_rank: usize,
    /// Whether `support_rank == n` agrees with the Plücker verdict.
    pub rank_agrees: bool,
}

/// Plücker test: decomposable iff `plucker_residual <= tol · ‖psi‖^4`,
/// cross-checked against the support rank.
pub fn is_decomposable(psi: &Multivector, tol: f64) -> Result<DecomposabilityReport> {
    if psi.is_zero() {
        return Err(Error::ZeroMultivector);
    }
    let residual = plucker_residual(psi);
    let relative = residual / psi.norm_sqr().powi(2);
    let decomposable = relative <= tol;
    let rank = support_rank(psi, RANK_TOL)?.rank;
    Ok(DecomposabilityReport {
        decomposable,
        plucker_residual: residual,
        relative_residual: relative,
        support_rank: rank,
        rank_agrees: decomposable == (rank == psi.n()),
    })
}

/// Exact length of a 2-vector with an explicit minimal decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtDecomposition {
    pub length: usize,
    pub terms: Vec<DecompTerm>,
    /// Weight of each plane, nonincreasing.
    pub singular_values: Vec<f64>,
    /// `‖psi - Σ terms‖ / ‖psi‖`.
    pub residual: f64,
    pub ambiguous: bool,
}

/// Skew-symmetric coefficient matrix of a 2-vector.
pub fn skew_matrix(psi: &Multivector) -> Result<Mat<Complex64>> {
    if psi.n() != 2 {
        return Err(Error::WrongGrade { expected: "2".into(), found: psi.n() });
    }
    let m = psi.m();
    let c = psi.coeffs();
    Ok(Mat::from_fn(m, m, |i, j| {
        if i < j {
            c[rank_mask(m, 2, (1u64 << i) | (1u64 << j))]
        } else if i > j {
            -c[rank_mask(m, 2, (1u64 << i) | (1u64 << j))]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Schmidt (Youla) decomposition of a 2-vector: `psi = Σ σ_k x_k ∧ y_k`
/// with all `x_k, y_k` orthonormal. Planes are extracted one at a time from
/// the top singular pair of the skew matrix and deflated.
pub fn schmidt_length(psi: &Multivector, tol: f64) -> Result<SchmidtDecomposition> {
    let mut a = skew_matrix(psi)?;
    let m = psi.m();
    let info = numeric_rank(a.as_ref(), tol)?;
    if info.rank % 2 == 1 {
        return Err(Error::OddSkewRank(info.rank));
    }
    let length = info.rank / 2;
    let mut terms = Vec::with_capacity(length);
    let mut weights = Vec::with_capacity(length);
    for _ in 0..length {
        let (sigma, x) = linalg::top_left_singular(a.as_ref())?;
        // y = conj(Aᴴx)/σ is a unit vector orthogonal to x; after the deflation
        // both lie in the left null space of A.
        let y: Vec<Complex64> = (0..m)
            .map(|j| {
                let ahx: Complex64 = (0..m).map(|i| a[(i, j)].conj() * x[i]).sum();
                ahx.conj() / sigma
            })
            .collect();
        for i in 0..m {
            for j in 0..m {
                a[(i, j)] -= (x[i] * y[j] - y[i] * x[j]) * sigma;
            }
        }
        let s = sigma.sqrt();
        terms.push(DecompTerm {
            vectors: vec![VectorM(x.iter().map(|z| z * s).collect()), VectorM(y.iter().map(|z| z * s).collect())],
        });
        weights.push(sigma);
    }
    let recon = sum_terms(m, 2, &terms)?;
    let norm = psi.norm();
    let residual = if norm > 0.0 { recon.distance(psi)? / norm } else { 0.0 };
    Ok(SchmidtDecomposition { length, terms, singular_values: weights, residual, ambiguous: info.ambiguous })
}

/// Number of (I, J) pairs enumerated by [`plucker_residual`].
pub fn plucker_pair_count(m: usize, n: usize) -> usize {
    if n == 0 || n >= m {
        0
    } else {
        binom(m, n - 1) * binom(m, n + 1)
    }
}
