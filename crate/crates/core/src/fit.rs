//! Numerical length estimation by alternating least squares over sums of
//! decomposable n-vectors.
//!
//! The objective `‖psi - Σ_j f^j_1 ∧ … ∧ f^j_n‖²` is linear in any single
//! factor, so each slot update is an exact linear least-squares solve and
//! the objective never increases within a restart. Each sweep ends with a
//! damped Gauss-Newton step on all factors at once, kept only when it
//! lowers the objective; plain sweeps crawl through long plateaus.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomp::{sum_terms, DecompTerm};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{lstsq_min_norm, CMat};
use crate::multivector::{Multivector, VectorM, WedgeTables};
use crate::rng::{complex_gaussian_vec, derive_seed, rng_from_seed, DEFAULT_SEED};
use crate::secant::{slot_matrix, MATRIX_CAP};

/// Singular-value cutoff of the per-slot least-squares solve.
const SLOT_RCOND: f64 = 1e-10;
/// Restarts run in fixed-size batches; the search stops after the first
/// batch that reaches `residual_tol`.
const RESTART_BATCH: usize = 4;
/// Factor norms beyond this multiple of ‖psi‖^(1/n) raise the divergence flag.
const DIVERGENCE_FACTOR: f64 = 1e6;
/// Initial damping of the joint step, relative to the largest squared
/// singular value of the Jacobian.
const LM_DAMPING: f64 = 1e-3;
/// Damped trial steps attempted after each sweep.
const LM_TRIES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Relative residual ‖psi - fit‖/‖psi‖ accepted as an exact fit.
    pub residual_tol: f64,
    /// Stop a restart once a sweep improves the residual by less than this
    /// relative amount.
    pub stall_tol: f64,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_sweeps: 500,
            residual_tol: 1e-8,
            stall_tol: 1e-10,
            seed: DEFAULT_SEED,
            exec: Exec::default(),
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("restarts and max_sweeps must be positive".into()));
        }
        if !(self.residual_tol > 0.0 && self.residual_tol < 1.0) {
            return Err(Error::InvalidArgument("residual_tol must lie in (0, 1)".into()));
        }
        if !(self.stall_tol > 0.0) {
            return Err(Error::InvalidArgument("stall_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub l: usize,
    /// ‖psi - Σ terms‖ / ‖psi‖, recomputed from `terms`.
    pub best_residual: f64,
    pub terms: Vec<DecompTerm>,
    pub sweeps_used: usize,
    pub restart_index: usize,
    /// Largest factor norm of the returned terms after balancing.
    pub max_factor_norm: f64,
    /// Factor norms blew past the divergence threshold (border phenomenon).
    pub diverging: bool,
    /// Σ‖term‖ / ‖psi‖. Far above 1 means the terms cancel each other,
    /// as near a border point.
    pub cancellation: f64,
    pub restarts_run: usize,
    /// Restarts dropped because of non-finite values.
    pub discarded_restarts: usize,
}

/// Random decomposable n-vector with its factors, redrawn while its norm
/// is negligible.
pub fn random_decomposable(m: usize, n: usize, seed: u64) -> Result<(DecompTerm, Multivector)> {
    if n == 0 || n > m {
        return Err(Error::GradeOverflow { grade: n, m });
    }
    let mut rng = rng_from_seed(seed);
    loop {
        let vectors: Vec<VectorM> = (0..n).map(|_| VectorM(complex_gaussian_vec(&mut rng, m))).collect();
        let term = DecompTerm::new(vectors)?;
        let mv = term.to_multivector()?;
        if mv.norm() > 1e-8 {
            return Ok((term, mv));
        }
    }
}

/// Sum of `l` independent random decomposables, with the planted terms.
pub fn planted_sum(m: usize, n: usize, l: usize, seed: u64) -> Result<(Multivector, Vec<DecompTerm>)> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    let mut terms = Vec::with_capacity(l);
    let mut acc = Multivector::zeros(m, n)?;
    for j in 0..l {
        let (t, mv) = random_decomposable(m, n, derive_seed(seed, &[j as u64]))?;
        acc = acc.add(&mv)?;
        terms.push(t);
    }
    Ok((acc, terms))
}

/// The C(m,n) × m matrix of the map taking a vector to the term with that
/// vector in slot `k`.
fn slot(tables: &WedgeTables, factors: &[VectorM], k: usize) -> CMat {
    let n = factors.len();
    let omega = tables.wedge(factors.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| v));
    slot_matrix(tables.table(n - 1), &omega, k)
}

fn sum_into(total: &mut [Complex64], terms: &[Vec<Complex64>]) {
    total.iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
    for t in terms {
        for (a, x) in total.iter_mut().zip(t) {
            *a += x;
        }
    }
}

/// One damped Gauss-Newton step on all factors jointly, kept only if it
/// lowers the objective. The wedge is complex multilinear, so the Jacobian
/// is the stacked slot matrices and the step is a complex least-squares
/// solve.
fn joint_step(
    tables: &WedgeTables,
    target: &[Complex64],
    factors: &mut [Vec<VectorM>],
    terms: &mut Vec<Vec<Complex64>>,
    total: &mut [Complex64],
    damping: &mut f64,
) -> Option<bool> {
    let n = factors[0].len();
    let m = tables.m();
    let rows = target.len();
    let mut jac = Mat::<Complex64>::zeros(rows, factors.len() * n * m);
    for (j, term) in factors.iter().enumerate() {
        for k in 0..n {
            let a = slot(tables, term, k);
            let off = (j * n + k) * m;
            for c in 0..m {
                for r in 0..rows {
                    jac[(r, off + c)] = a[(r, c)];
                }
            }
        }
    }
    let svd = jac.thin_svd().ok()?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let smax = s[0].re;
    if !(smax > 0.0) {
        return Some(false);
    }
    let resid: Vec<Complex64> = target.iter().zip(total.iter()).map(|(p, t)| p - t).collect();
    let current = dist_sqr(target, total);
    let proj: Vec<Complex64> = (0..s.nrows())
        .map(|q| (0..rows).map(|i| u[(i, q)].conj() * resid[i]).sum())
        .collect();
    for _ in 0..LM_TRIES {
        let lam = *damping * smax * smax;
        let mut delta = vec![Complex64::new(0.0, 0.0); jac.ncols()];
        for (q, pq) in proj.iter().enumerate() {
            let sq = s[q].re;
            let coef = pq * (sq / (sq * sq + lam));
            for (x, d) in delta.iter_mut().enumerate() {
                *d += v[(x, q)] * coef;
            }
        }
        let trial: Vec<Vec<VectorM>> = factors
            .iter()
            .enumerate()
            .map(|(j, term)| {
                term.iter()
                    .enumerate()
                    .map(|(k, f)| {
                        let off = (j * n + k) * m;
                        VectorM(f.0.iter().zip(&delta[off..off + m]).map(|(a, b)| a + b).collect())
                    })
                    .collect()
            })
            .collect();
        let trial_terms: Vec<Vec<Complex64>> = trial.iter().map(|f| tables.wedge(f.iter())).collect();
        let mut trial_total = vec![Complex64::new(0.0, 0.0); rows];
        sum_into(&mut trial_total, &trial_terms);
        let value = dist_sqr(target, &trial_total);
        if value.is_finite() && value < current {
            factors.clone_from_slice(&trial);
            *terms = trial_terms;
            total.copy_from_slice(&trial_total);
            *damping = (*damping / 3.0).max(1e-12);
            return Some(true);
        }
        *damping = (*damping * 4.0).min(1e6);
    }
    Some(false)
}

struct RestartOutcome {
    index: usize,
    factors: Vec<Vec<VectorM>>,
    residual: f64,
    sweeps: usize,
    max_factor_norm: f64,
    trace: Vec<f64>,
}

fn mat_vec(a: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

fn dist_sqr(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Rescales each term's factors to a common norm (the geometric mean),
/// leaving every term unchanged. Returns the largest factor norm.
fn balance(factors: &mut [Vec<VectorM>]) -> f64 {
    let mut largest = 0.0f64;
    for term in factors.iter_mut() {
        let norms: Vec<f64> = term.iter().map(VectorM::norm).collect();
        if norms.iter().any(|&r| r == 0.0) {
            continue;
        }
        let gm = norms.iter().map(|r| r.ln()).sum::<f64>() / norms.len() as f64;
        let target = gm.exp();
        for (v, r) in term.iter_mut().zip(&norms) {
            *v = v.scale(Complex64::new(target / r, 0.0));
        }
        largest = largest.max(target);
    }
    largest
}

fn run_restart(
    psi: &Multivector,
    l: usize,
    opts: &FitOptions,
    tables: &WedgeTables,
    index: usize,
    keep_trace: bool,
) -> Option<RestartOutcome> {
    let (m, n) = (psi.m(), psi.n());
    let target = psi.coeffs();
    let psi_norm = psi.norm();
    let mut rng = rng_from_seed(opts.seed.wrapping_add(index as u64));
    let mut factors: Vec<Vec<VectorM>> =
        (0..l).map(|_| (0..n).map(|_| VectorM(complex_gaussian_vec(&mut rng, m))).collect()).collect();
    let mut terms: Vec<Vec<Complex64>> = factors.iter().map(|f| tables.wedge(f.iter())).collect();
    let mut total = vec![Complex64::new(0.0, 0.0); target.len()];
    sum_into(&mut total, &terms);
    let mut damping = LM_DAMPING;
    let mut trace = Vec::new();
    if keep_trace {
        trace.push(dist_sqr(target, &total));
    }
    let mut prev = dist_sqr(target, &total).sqrt() / psi_norm;
    let mut residual = prev;
    let mut sweeps = 0;
    let mut max_factor_norm = 0.0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        for j in 0..l {
            for k in 0..n {
                let a = slot(tables, &factors[j], k);
                // Target for term j alone: psi minus every other term.
                let rhs: Vec<Complex64> =
                    target.iter().zip(&total).zip(&terms[j]).map(|((p, s), t)| p - (s - t)).collect();
                let v = lstsq_min_norm(a.as_ref(), &rhs, SLOT_RCOND).ok()?;
                let new_term = mat_vec(&a, &v);
                for ((s, old), new) in total.iter_mut().zip(&terms[j]).zip(&new_term) {
                    *s += new - old;
                }
                terms[j] = new_term;
                factors[j][k] = VectorM(v);
                if keep_trace {
                    trace.push(dist_sqr(target, &total));
                }
            }
        }
        if joint_step(tables, target, &mut factors, &mut terms, &mut total, &mut damping)? && keep_trace {
            trace.push(dist_sqr(target, &total));
        }
        max_factor_norm = balance(&mut factors);
        terms = factors.iter().map(|f| tables.wedge(f.iter())).collect();
        sum_into(&mut total, &terms);
        residual = dist_sqr(target, &total).sqrt() / psi_norm;
        if !residual.is_finite() || !max_factor_norm.is_finite() {
            return None;
        }
        if residual <= opts.residual_tol || prev - residual <= opts.stall_tol * prev {
            break;
        }
        prev = residual;
    }
    Some(RestartOutcome { index, factors, residual, sweeps, max_factor_norm, trace })
}

fn check_fit_input(psi: &Multivector, l: usize, opts: &FitOptions) -> Result<()> {
    opts.validate()?;
    if psi.is_zero() {
        return Err(Error::ZeroMultivector);
    }
    if psi.n() == 0 {
        return Err(Error::WrongGrade { expected: ">= 1".into(), found: 0 });
    }
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    if psi.coeffs().iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidArgument("non-finite coefficient".into()));
    }
    let cols = l.saturating_mul(psi.n()).saturating_mul(psi.m());
    if psi.coeffs().len().saturating_mul(cols) > MATRIX_CAP {
        return Err(Error::TooLarge(format!(
            "joint Jacobian {}x{cols} exceeds {MATRIX_CAP} entries",
            psi.coeffs().len()
        )));
    }
    Ok(())
}

/// Best fit of `psi` by a sum of `l` decomposables over `opts.restarts`
/// seeded restarts (restart `r` uses seed `opts.seed + r`). Ties go to the
/// lowest restart index.
pub fn als_fit(psi: &Multivector, l: usize, opts: &FitOptions) -> Result<FitReport> {
    check_fit_input(psi, l, opts)?;
    let tables = WedgeTables::new(psi.m(), psi.n());
    let mut best: Option<RestartOutcome> = None;
    let mut run = 0;
    let mut discarded = 0;
    while run < opts.restarts {
        let batch: Vec<usize> = (run..(run + RESTART_BATCH).min(opts.restarts)).collect();
        run += batch.len();
        let outcomes = opts.exec.map(batch, |idx| run_restart(psi, l, opts, &tables, idx, false));
        for o in outcomes {
            match o {
                None => discarded += 1,
                Some(o) => {
                    if best.as_ref().is_none_or(|b| o.residual < b.residual) {
                        best = Some(o);
                    }
                }
            }
        }
        if best.as_ref().is_some_and(|b| b.residual <= opts.residual_tol) {
            break;
        }
    }
    let best = best.ok_or_else(|| Error::Numerical("every restart produced non-finite values".into()))?;
    let terms: Vec<DecompTerm> = best.factors.into_iter().map(|vectors| DecompTerm { vectors }).collect();
    let recon = sum_terms(psi.m(), psi.n(), &terms)?;
    let best_residual = recon.distance(psi)? / psi.norm();
    let scale = psi.norm().powf(1.0 / psi.n() as f64);
    let mut term_norms = 0.0;
    for t in &terms {
        term_norms += t.to_multivector()?.norm();
    }
    Ok(FitReport {
        l,
        best_residual,
        terms,
        sweeps_used: best.sweeps,
        restart_index: best.index,
        max_factor_norm: best.max_factor_norm,
        diverging: best.max_factor_norm > DIVERGENCE_FACTOR * scale,
        cancellation: term_norms / psi.norm(),
        restarts_run: run,
        discarded_restarts: discarded,
    })
}

/// Squared objective after the initialization and after every slot update
/// of a single restart; nonincreasing up to rounding.
pub fn objective_trace(psi: &Multivector, l: usize, opts: &FitOptions, restart_index: usize) -> Result<Vec<f64>> {
    check_fit_input(psi, l, opts)?;
    let tables = WedgeTables::new(psi.m(), psi.n());
    run_restart(psi, l, opts, &tables, restart_index, true)
        .map(|o| o.trace)
        .ok_or_else(|| Error::Numerical("restart produced non-finite values".into()))
}

/// Numerical length at tolerance `residual_tol`: the smallest l <= l_max
/// whose best fit reaches it. An upper estimate; local minima can
/// overestimate and border effects can drive residuals toward zero without
/// an exact decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthEstimate {
    /// `None` when no l <= l_max reached the tolerance.
    pub length: Option<usize>,
    pub l_max: usize,
    pub residual_tol: f64,
    pub reports: Vec<FitReport>,
}

impl LengthEstimate {
    pub fn exceeds_l_max(&self) -> bool {
        self.length.is_none()
    }

    pub fn any_diverging(&self) -> bool {
        self.reports.iter().any(|r| r.diverging)
    }
}

pub fn estimate_length(psi: &Multivector, l_max: usize, opts: &FitOptions) -> Result<LengthEstimate> {
    if l_max == 0 {
        return Err(Error::InvalidArgument("l_max must be at least 1".into()));
    }
    let mut reports = Vec::new();
    let mut length = None;
    for l in 1..=l_max {
        let r = als_fit(psi, l, opts)?;
        let ok = r.best_residual <= opts.residual_tol;
        reports.push(r);
        if ok {
            length = Some(l);
            break;
        }
    }
    Ok(LengthEstimate { length, l_max, residual_tol: opts.residual_tol, reports })
}

/// Dense matrix with the given vectors as columns (for diagnostics).
pub fn factor_matrix(term: &DecompTerm) -> CMat {
    let m = term.m();
    Mat::from_fn(m, term.n(), |i, j| term.vectors[j].0[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{is_decomposable, support_rank, RANK_TOL};

    fn blade(m: usize, s: &[usize]) -> Multivector {
        Multivector::basis_blade(m, s).unwrap()
    }

    #[test]
    fn random_decomposable_is_decomposable_and_seeded() {
        let (t, mv) = random_decomposable(6, 3, 1).unwrap();
        assert_eq!(t.n(), 3);
        assert!(is_decomposable(&mv, 1e-10).unwrap().decomposable);
        assert_eq!(support_rank(&mv, RANK_TOL).unwrap().rank, 3);
        assert_eq!(random_decomposable(6, 3, 1).unwrap().1, mv);
        assert_ne!(random_decomposable(6, 3, 2).unwrap().1, mv);
    }

    #[test]
    fn planted_sum_basics() {
        let (psi, terms) = planted_sum(6, 3, 1, 5).unwrap();
        assert_eq!(terms.len(), 1);
        assert!(is_decomposable(&psi, 1e-10).unwrap().decomposable);
        let (psi, _) = planted_sum(4, 2, 2, 5).unwrap();
        assert!(psi.norm() > 0.0);
        assert!(crate::decomp::schmidt_length(&psi, RANK_TOL).unwrap().length <= 2);
    }

    #[test]
    fn decomposable_fits_with_one_term() {
        let opts = FitOptions::default();
        for seed in 0..20 {
            let (_, psi) = random_decomposable(6, 3, 100 + seed).unwrap();
            let r = als_fit(&psi, 1, &opts).unwrap();
            assert!(r.best_residual < 1e-8, "seed {seed}: {}", r.best_residual);
        }
    }

    #[test]
    fn single_term_cannot_fit_two_equal_planes() {
        // The best single plane captures one of the two orthogonal, equal
        // weight planes, leaving relative residual 1/sqrt(2).
        let psi = blade(4, &[1, 2]).add(&blade(4, &[3, 4])).unwrap();
        let r = als_fit(&psi, 1, &FitOptions::default()).unwrap();
        assert!((r.best_residual - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6, "{}", r.best_residual);
    }

    #[test]
    fn objective_never_increases() {
        let (psi, _) = planted_sum(6, 3, 2, 9).unwrap();
        let opts = FitOptions { max_sweeps: 30, ..FitOptions::default() };
        let trace = objective_trace(&psi, 2, &opts, 0).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-30, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn estimate_length_of_blade() {
        let est = estimate_length(&blade(5, &[1, 2]), 3, &FitOptions::default()).unwrap();
        assert_eq!(est.length, Some(1));
        assert_eq!(est.reports.len(), 1);
    }

    #[test]
    fn input_validation() {
        let opts = FitOptions::default();
        assert!(matches!(als_fit(&Multivector::zeros(4, 2).unwrap(), 1, &opts), Err(Error::ZeroMultivector)));
        assert!(als_fit(&blade(4, &[1, 2]), 0, &opts).is_err());
        let bad = FitOptions { residual_tol: 1.5, ..opts };
        assert!(als_fit(&blade(4, &[1, 2]), 1, &bad).is_err());
        assert!(estimate_length(&blade(4, &[1, 2]), 0, &opts).is_err());
    }

    #[test]
    fn sequential_and_parallel_restarts_agree() {
        let (psi, _) = planted_sum(6, 3, 2, 17).unwrap();
        let seq = als_fit(&psi, 2, &FitOptions { exec: Exec::Sequential, ..FitOptions::default() }).unwrap();
        let par = als_fit(&psi, 2, &FitOptions { exec: Exec::Parallel, ..FitOptions::default() }).unwrap();
        assert_eq!(seq, par);
    }
}
