#![allow(dead_code)]

use grasslen::rng::{complex_gaussian_vec, rng_from_seed};
use grasslen::{Complex64, Multivector, VectorM};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_vectors(m: usize, count: usize, seed: u64) -> Vec<VectorM> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| VectorM(complex_gaussian_vec(&mut rng, m))).collect()
}

pub fn random_mv(m: usize, n: usize, seed: u64) -> Multivector {
    let len = grasslen::subset::binomial(m as u64, n as u64).unwrap() as usize;
    let mut rng = rng_from_seed(seed);
    Multivector::from_coeffs(m, n, complex_gaussian_vec(&mut rng, len)).unwrap()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut acc = c(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm())).unwrap();
        if a[piv][col].norm() == 0.0 {
            return c(0.0, 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            acc = -acc;
        }
        acc *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[r][k] -= f * v;
            }
        }
    }
    acc
}

/// Every n-subset of 1..=m in lexicographic order, by recursion.
pub fn subsets(m: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for x in start..=m {
            cur.push(x);
            go(x + 1, m, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, m, n, &mut Vec::new(), &mut out);
    out
}

/// Random unitary from Gram-Schmidt on Gaussian columns.
pub fn random_unitary(m: usize, seed: u64) -> Vec<VectorM> {
    let mut cols: Vec<VectorM> = Vec::new();
    for v in random_vectors(m, m, seed) {
        let mut w = v.0.clone();
        for q in &cols {
            let p: Complex64 = q.0.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wi, qi) in w.iter_mut().zip(&q.0) {
                *wi -= p * qi;
            }
        }
        let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(VectorM(w.into_iter().map(|z| z / nrm).collect()));
    }
    cols
}

pub fn rel_diff(a: &Multivector, b: &Multivector) -> f64 {
    a.distance(b).unwrap() / a.norm().max(b.norm()).max(1e-300)
}

pub fn binom(m: usize, k: usize) -> usize {
    if k > m {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (m - i) / (i + 1))
}
