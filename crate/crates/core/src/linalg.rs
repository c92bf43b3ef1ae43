//! Dense linear algebra helpers on top of faer, plus exact rank over a
//! prime field.

use faer::{Mat, MatRef};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::multivector::VectorM;

pub type CMat = Mat<Complex64>;

/// Outcome of singular-value thresholding.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericRank {
    pub rank: usize,
    /// Nonincreasing.
    pub singular_values: Vec<f64>,
    /// Some singular value sits within a factor 10 of the cut on either side.
    pub ambiguous: bool,
}

/// Counts singular values `>= tol * s_max`.
pub fn rank_from_singular_values(singular_values: Vec<f64>, tol: f64) -> NumericRank {
    let smax = singular_values.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return NumericRank { rank: 0, singular_values, ambiguous: false };
    }
    let cut = tol * smax;
    let rank = singular_values.iter().filter(|&&s| s >= cut).count();
    let ambiguous = singular_values.iter().any(|&s| s > 0.1 * cut && s < 10.0 * cut);
    NumericRank { rank, singular_values, ambiguous }
}

pub fn singular_values(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values().map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))
}

pub fn numeric_rank(a: MatRef<'_, Complex64>, tol: f64) -> Result<NumericRank> {
    Ok(rank_from_singular_values(singular_values(a)?, tol))
}

/// Scales every nonzero column to unit Euclidean norm.
pub fn normalize_columns(a: &mut CMat) {
    for j in 0..a.ncols() {
        let norm = (0..a.nrows()).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..a.nrows() {
                a[(i, j)] /= norm;
            }
        }
    }
}

/// Matrix whose columns are the given vectors.
pub fn columns_to_mat(cols: &[VectorM]) -> CMat {
    let rows = cols.first().map_or(0, VectorM::m);
    Mat::from_fn(rows, cols.len(), |i, j| cols[j].0[i])
}

/// Minimum-norm least-squares solution of `a x ≈ b`, discarding singular
/// values below `rcond * s_max`.
pub fn lstsq_min_norm(a: MatRef<'_, Complex64>, b: &[Complex64], rcond: f64) -> Result<Vec<Complex64>> {
    let svd = a.thin_svd().map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = s.nrows();
    let smax = if k > 0 { s[0].re } else { 0.0 };
    let mut x = vec![Complex64::new(0.0, 0.0); a.ncols()];
    if smax == 0.0 {
        return Ok(x);
    }
    for r in 0..k {
        let sr = s[r].re;
        if sr < rcond * smax {
            break;
        }
        let mut proj = Complex64::new(0.0, 0.0);
        for i in 0..a.nrows() {
            proj += u[(i, r)].conj() * b[i];
        }
        let coef = proj / sr;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += v[(j, r)] * coef;
        }
    }
    Ok(x)
}

/// Orthonormal basis of the orthogonal complement of the span of
/// `cols` (assumed linearly independent), from a full QR factorization.
pub fn orthogonal_complement(cols: &[VectorM]) -> Vec<VectorM> {
    let a = columns_to_mat(cols);
    let m = a.nrows();
    let q = a.qr().compute_Q();
    (cols.len()..m).map(|j| VectorM((0..m).map(|i| q[(i, j)]).collect())).collect()
}

/// Largest singular value with its left singular vector.
pub fn top_left_singular(a: MatRef<'_, Complex64>) -> Result<(f64, Vec<Complex64>)> {
    let svd = a.thin_svd().map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))?;
    let s0 = svd.S().column_vector()[0].re;
    let u = svd.U();
    Ok((s0, (0..a.nrows()).map(|i| u[(i, 0)]).collect()))
}

/// Arithmetic modulo a prime below 2^63.
pub mod modp {
    use super::*;

    pub fn mul(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    pub fn pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
        let mut acc = 1 % p;
        base %= p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul(acc, base, p);
            }
            base = mul(base, base, p);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(a: u64, p: u64) -> u64 {
        pow(a, p - 2, p)
    }

    /// Reduces a signed integer into `[0, p)`.
    pub fn from_i64(x: i64, p: u64) -> u64 {
        let r = (x as i128).rem_euclid(p as i128);
        r as u64
    }

    /// Deterministic Miller-Rabin for all 64-bit inputs.
    pub fn is_prime(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
        for &b in &BASES {
            if n % b == 0 {
                return n == b;
            }
        }
        let mut d = n - 1;
        let mut s = 0;
        while d % 2 == 0 {
            d /= 2;
            s += 1;
        }
        'witness: for &a in &BASES {
            let mut x = pow(a, d, n);
            if x == 1 || x == n - 1 {
                continue;
            }
            for _ in 1..s {
                x = mul(x, x, n);
                if x == n - 1 {
                    continue 'witness;
                }
            }
            return false;
        }
        true
    }

    /// Uniformly drawn prime in `[2^61, 2^62)`.
    pub fn random_prime_62<R: Rng + ?Sized>(rng: &mut R) -> u64 {
        loop {
            let candidate = rng.gen_range((1u64 << 61)..(1u64 << 62)) | 1;
            if is_prime(candidate) {
                return candidate;
            }
        }
    }

    /// Rank of a row-major matrix over GF(p) by Gaussian elimination.
    pub fn rank(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in 0..ncols {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let inv_pivot = inv(rows[rank][col], p);
            let pivot_row: Vec<u64> = rows[rank].iter().map(|&x| mul(x, inv_pivot, p)).collect();
            for r in (rank + 1)..rows.len() {
                let f = rows[r][col];
                if f == 0 {
                    continue;
                }
                for (x, &y) in rows[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x = (*x + p - mul(f, y, p)) % p;
                }
            }
            rows[rank] = pivot_row;
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }
}
