//! Dense multivectors in the n-th exterior power of C^m.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::{self, binom, lex_masks, mask_members, rank_mask, AppendTable, SubsetIndex};

/// Coefficient field of a multivector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldTag {
    #[serde(rename = "C")]
    Complex,
    #[serde(rename = "R")]
    Real,
}

impl FieldTag {
    pub fn join(self, other: FieldTag) -> FieldTag {
        if self == FieldTag::Real && other == FieldTag::Real {
            FieldTag::Real
        } else {
            FieldTag::Complex
        }
    }
}

/// A vector in C^m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorM(pub Vec<Complex64>);

impl VectorM {
    pub fn zeros(m: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); m])
    }

    /// Standard basis vector `e_i`, 1-based.
    pub fn basis(m: usize, i: usize) -> Result<Self> {
        if i == 0 || i > m {
            return Err(Error::IndexOutOfRange { index: i, m });
        }
        let mut v = Self::zeros(m);
        v.0[i - 1] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn from_real(xs: &[f64]) -> Self {
        Self(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    /// Hermitian inner product, conjugate-linear in `self`.
    pub fn dot(&self, other: &VectorM) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }
}

impl std::ops::Add for &VectorM {
    type Output = VectorM;
    fn add(self, rhs: &VectorM) -> VectorM {
        VectorM(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// An element of the n-th exterior power of C^m, stored densely in the
/// lexicographic basis of sorted n-subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector {
    m: usize,
    n: usize,
    coeffs: Vec<Complex64>,
    field: FieldTag,
}

/// Dense storage cap, in coefficients.
pub const MAX_COEFFS: usize = 1 << 24;

pub(crate) fn check_shape(m: usize, n: usize) -> Result<usize> {
    if m > subset::MAX_DIM {
        return Err(Error::TooLarge(format!("m = {m} exceeds {}", subset::MAX_DIM)));
    }
    if n > m {
        return Err(Error::GradeOverflow { grade: n, m });
    }
    let total = subset::binomial(m as u64, n as u64)
        .filter(|&c| c <= u64::MAX as u128)
        .ok_or_else(|| Error::TooLarge(format!("C({m},{n}) overflows the ordinal type")))?;
    if total > MAX_COEFFS as u128 {
        return Err(Error::TooLarge(format!(
            "C({m},{n}) = {total} coefficients exceeds the dense cap {MAX_COEFFS}"
        )));
    }
    Ok(total as usize)
}

impl Multivector {
    pub fn zeros(m: usize, n: usize) -> Result<Self> {
        let len = check_shape(m, n)?;
        Ok(Self { m, n, coeffs: vec![Complex64::new(0.0, 0.0); len], field: FieldTag::Complex })
    }

    pub fn from_coeffs(m: usize, n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let len = check_shape(m, n)?;
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch { expected: len, found: coeffs.len() });
        }
        Ok(Self { m, n, coeffs, field: FieldTag::Complex })
    }

    pub fn from_real(m: usize, n: usize, coeffs: &[f64]) -> Result<Self> {
        let mv = Self::from_coeffs(m, n, coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())?;
        Ok(mv.with_field_unchecked(FieldTag::Real))
    }

    /// Basis element `e_{i1} ∧ … ∧ e_{in}` (members sorted, 1-based).
    pub fn basis_blade(m: usize, members: &[usize]) -> Result<Self> {
        let s = SubsetIndex::new(m, members.to_vec())?;
        let mut mv = Self::zeros(m, s.n())?;
        mv.coeffs[subset::subset_rank(&s) as usize] = Complex64::new(1.0, 0.0);
        Ok(mv.with_field_unchecked(FieldTag::Real))
    }

    /// Grade-0 element.
    pub fn scalar(m: usize, value: Complex64) -> Result<Self> {
        Self::from_coeffs(m, 0, vec![value])
    }

    /// Re-tags the field; `Real` requires every imaginary part to be zero.
    pub fn with_field(self, field: FieldTag) -> Result<Self> {
        if field == FieldTag::Real && self.coeffs.iter().any(|z| z.im != 0.0) {
            return Err(Error::NotReal);
        }
        Ok(self.with_field_unchecked(field))
    }

    pub(crate) fn with_field_unchecked(mut self, field: FieldTag) -> Self {
        self.field = field;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, s: &SubsetIndex) -> Result<Complex64> {
        if s.m() != self.m || s.n() != self.n {
            return Err(Error::InvalidSubset(format!(
                "subset {:?} does not index grade {} in dimension {}",
                s.members(),
                self.n,
                self.m
            )));
        }
        Ok(self.coeffs[subset::subset_rank(s) as usize])
    }

    /// Coefficient on a sorted member list, 1-based.
    pub fn get(&self, members: &[usize]) -> Result<Complex64> {
        self.coeff(&SubsetIndex::new(self.m, members.to_vec())?)
    }

    /// Nonzero entries as (sorted 1-based members, coefficient).
    pub fn terms(&self) -> Vec<(Vec<usize>, Complex64)> {
        lex_masks(self.m, self.n)
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(mask, c)| (SubsetIndex::from_mask(self.m, mask).members().to_vec(), *c))
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let field = if c.im == 0.0 { self.field } else { FieldTag::Complex };
        Self {
            m: self.m,
            n: self.n,
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
            field,
        }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: other.m });
        }
        if self.n != other.n {
            return Err(Error::WrongGrade { expected: self.n.to_string(), found: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            m: self.m,
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
            field: self.field.join(other.field),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)).with_field_unchecked(other.field))
    }

    /// Euclidean distance between coefficient vectors.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Image under the linear map of C^m with the given columns
    /// (`columns[i]` is the image of `e_{i+1}`), i.e. the induced map on
    /// the exterior power.
    pub fn transform(&self, columns: &[VectorM]) -> Result<Self> {
        if columns.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: columns.len() });
        }
        for c in columns {
            if c.m() != self.m {
                return Err(Error::DimensionMismatch { expected: self.m, found: c.m() });
            }
        }
        let tables = WedgeTables::new(self.m, self.n);
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for (mask, c) in lex_masks(self.m, self.n).into_iter().zip(&self.coeffs) {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let img = tables.wedge(mask_members(mask).map(|i| &columns[i]));
            for (o, x) in out.iter_mut().zip(&img) {
                *o += c * x;
            }
        }
        Multivector::from_coeffs(self.m, self.n, out)
    }
}

/// Wedge of a list of vectors, all in C^m. Coefficients are the maximal
/// minors of the m×k matrix whose columns are the vectors.
pub(crate) fn wedge_refs(m: usize, vs: &[&VectorM]) -> Vec<Complex64> {
    WedgeTables::new(m, vs.len()).wedge(vs.iter().copied())
}

/// Wedge machinery for up to `top` vectors in a fixed dimension, built once
/// and shared by many wedges. Coefficients come from chained appends, or
/// directly as maximal minors when the intermediate grades would be large.
pub(crate) struct WedgeTables {
    m: usize,
    by_grade: Vec<Option<AppendTable>>,
    minors: bool,
}

impl WedgeTables {
    pub fn new(m: usize, top: usize) -> Self {
        let chain_cost: usize = (0..top).map(|g| binom(m, g) * (m - g)).sum();
        let minor_cost = binom(m, top) * top.pow(3) / 3;
        let minors = top > 1 && minor_cost < chain_cost;
        let by_grade = (0..top)
            .map(|g| (!minors || g + 1 == top).then(|| AppendTable::new(m, g)))
            .collect();
        Self { m, by_grade, minors }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Table appending a vector to grade `grade`; always present for
    /// `top - 1`.
    pub fn table(&self, grade: usize) -> &AppendTable {
        self.by_grade[grade].as_ref().expect("append table not built for this grade")
    }

    pub fn wedge<'a>(&self, vs: impl IntoIterator<Item = &'a VectorM>) -> Vec<Complex64> {
        if self.minors {
            let vs: Vec<&VectorM> = vs.into_iter().collect();
            return wedge_minors(self.m, &vs);
        }
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for (g, v) in vs.into_iter().enumerate() {
            acc = append_vector(self.table(g), &acc, &v.0);
        }
        acc
    }
}

/// Wedge coefficients as determinants of the k×k row selections.
fn wedge_minors(m: usize, vs: &[&VectorM]) -> Vec<Complex64> {
    let k = vs.len();
    let mut block = vec![Complex64::new(0.0, 0.0); k * k];
    lex_masks(m, k)
        .into_iter()
        .map(|mask| {
            for (r, i) in mask_members(mask).enumerate() {
                for (c, v) in vs.iter().enumerate() {
                    block[r * k + c] = v.0[i];
                }
            }
            det_in_place(&mut block, k)
        })
        .collect()
}

/// Determinant by elimination with partial pivoting; clobbers `a`.
fn det_in_place(a: &mut [Complex64], k: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&x, &y| a[x * k + col].norm_sqr().total_cmp(&a[y * k + col].norm_sqr()))
            .unwrap();
        let p = a[piv * k + col];
        if p == Complex64::new(0.0, 0.0) {
            return p;
        }
        if piv != col {
            for c in 0..k {
                a.swap(piv * k + c, col * k + c);
            }
            det = -det;
        }
        det *= p;
        for r in col + 1..k {
            let f = a[r * k + col] / p;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..k {
                let v = a[col * k + c];
                a[r * k + c] -= f * v;
            }
        }
    }
    det
}

pub(crate) fn append_vector(table: &AppendTable, omega: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); binom(table.m, table.grade + 1)];
    for (t, w) in omega.iter().enumerate() {
        if *w == Complex64::new(0.0, 0.0) {
            continue;
        }
        for e in table.row(t) {
            let term = w * v[e.vector_index as usize];
            if e.negative {
                out[e.target as usize] -= term;
            } else {
                out[e.target as usize] += term;
            }
        }
    }
    out
}

/// `v_1 ∧ … ∧ v_k` for `1 <= k <= m`.
pub fn wedge_vectors(vs: &[VectorM]) -> Result<Multivector> {
    let first = vs.first().ok_or_else(|| Error::InvalidArgument("wedge of zero vectors".into()))?;
    let m = first.m();
    for v in vs {
        if v.m() != m {
            return Err(Error::DimensionMismatch { expected: m, found: v.m() });
        }
    }
    if vs.len() > m {
        return Err(Error::GradeOverflow { grade: vs.len(), m });
    }
    check_shape(m, vs.len())?;
    let refs: Vec<&VectorM> = vs.iter().collect();
    let real = vs.iter().all(|v| v.0.iter().all(|z| z.im == 0.0));
    let mv = Multivector::from_coeffs(m, vs.len(), wedge_refs(m, &refs))?;
    Ok(if real { mv.with_field_unchecked(FieldTag::Real) } else { mv })
}

/// Number of pairs (i in a, j in b) with i > j: the parity of the shuffle
/// that sorts the concatenation (a, b).
fn shuffle_inversions(a: u64, b: u64) -> u32 {
    mask_members(b).map(|j| (a >> j).count_ones()).sum()
}

/// Exterior product of a grade-p and a grade-q multivector.
pub fn wedge(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    if a.m != b.m {
        return Err(Error::DimensionMismatch { expected: a.m, found: b.m });
    }
    let m = a.m;
    let grade = a.n + b.n;
    if grade > m {
        return Err(Error::GradeOverflow { grade, m });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); check_shape(m, grade)?];
    let bm = lex_masks(m, b.n);
    for (ia, ca) in lex_masks(m, a.n).into_iter().zip(&a.coeffs) {
        if *ca == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (&ib, cb) in bm.iter().zip(&b.coeffs) {
            if ia & ib != 0 || *cb == Complex64::new(0.0, 0.0) {
                continue;
            }
            let target = rank_mask(m, grade, ia | ib);
            let prod = ca * cb;
            if shuffle_inversions(ia, ib) % 2 == 1 {
                out[target] -= prod;
            } else {
                out[target] += prod;
            }
        }
    }
    Ok(Multivector::from_coeffs(m, grade, out)?.with_field_unchecked(a.field.join(b.field)))
}

/// Interior product with the j-th dual basis covector (1-based): the
/// coefficient on J is `(-1)^pos · psi[J ∪ {j}]`, where `pos` is the 0-based
/// position of j inside the sorted set J ∪ {j}.
pub fn contract(psi: &Multivector, j: usize) -> Result<Multivector> {
    if psi.n == 0 {
        return Err(Error::WrongGrade { expected: ">= 1".into(), found: 0 });
    }
    if j == 0 || j > psi.m {
        return Err(Error::IndexOutOfRange { index: j, m: psi.m });
    }
    let m = psi.m;
    let bit = 1u64 << (j - 1);
    let below = bit - 1;
    let masks = lex_masks(m, psi.n - 1);
    let coeffs = masks
        .into_iter()
        .map(|mask| {
            if mask & bit != 0 {
                return Complex64::new(0.0, 0.0);
            }
            let c = psi.coeffs[rank_mask(m, psi.n, mask | bit)];
            if (mask & below).count_ones() % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .collect();
    Ok(Multivector::from_coeffs(m, psi.n - 1, coeffs)?.with_field_unchecked(psi.field))
}

/// Sign of the permutation (I, I^c) of (1..m): parity of sum_k (i_k - k).
fn complement_sign_negative(mask: u64) -> bool {
    let inv: usize = mask_members(mask).enumerate().map(|(k, i)| i - k).sum();
    inv % 2 == 1
}

/// Particle-hole duality map from grade n to grade m-n. No complex
/// conjugation is applied.
pub fn hodge_dual(psi: &Multivector) -> Multivector {
    let m = psi.m;
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut out = vec![Complex64::new(0.0, 0.0); psi.coeffs.len()];
    for (mask, c) in lex_masks(m, psi.n).into_iter().zip(&psi.coeffs) {
        let target = rank_mask(m, m - psi.n, full & !mask);
        out[target] = if complement_sign_negative(mask) { -c } else { *c };
    }
    Multivector { m, n: m - psi.n, coeffs: out, field: psi.field }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minors_agree_with_chained_appends() {
        let mut rng = crate::rng::rng_from_seed(3);
        for (m, k) in [(5, 2), (9, 7), (12, 10), (6, 6), (7, 1)] {
            let vs: Vec<VectorM> = (0..k).map(|_| VectorM(crate::rng::complex_gaussian_vec(&mut rng, m))).collect();
            let refs: Vec<&VectorM> = vs.iter().collect();
            let mut chained = vec![Complex64::new(1.0, 0.0)];
            for (g, v) in vs.iter().enumerate() {
                chained = append_vector(&AppendTable::new(m, g), &chained, &v.0);
            }
            let direct = wedge_minors(m, &refs);
            let scale: f64 = vs.iter().map(VectorM::norm).product();
            for (a, b) in chained.iter().zip(&direct) {
                assert!((a - b).norm() < 1e-12 * scale, "m={m} k={k}");
            }
        }
        assert!(WedgeTables::new(20, 18).minors);
        assert!(!WedgeTables::new(17, 4).minors);
    }

    fn e(m: usize, i: usize) -> VectorM {
        VectorM::basis(m, i).unwrap()
    }

    fn blade(m: usize, s: &[usize]) -> Multivector {
        Multivector::basis_blade(m, s).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn wedge_vectors_examples() {
        let w = wedge_vectors(&[e(4, 1), e(4, 2)]).unwrap();
        assert_eq!(w, blade(4, &[1, 2]));
        let w = wedge_vectors(&[e(4, 2), e(4, 1)]).unwrap();
        assert_eq!(w.get(&[1, 2]).unwrap(), -one());
        assert_eq!(w.terms().len(), 1);
        let s = &e(4, 1) + &e(4, 2);
        assert!(wedge_vectors(&[s.clone(), s]).unwrap().is_zero());
    }

    #[test]
    fn wedge_vectors_errors() {
        assert!(matches!(
            wedge_vectors(&[e(4, 1), e(3, 1)]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            wedge_vectors(&[e(2, 1), e(2, 2), e(2, 1)]),
            Err(Error::GradeOverflow { .. })
        ));
    }

    #[test]
    fn wedge_examples() {
        let w = wedge(&blade(4, &[1]), &blade(4, &[2, 3])).unwrap();
        assert_eq!(w, blade(4, &[1, 2, 3]));
        assert!(wedge(&blade(4, &[1, 2]), &blade(4, &[1, 3])).unwrap().is_zero());
        let ab = wedge(&blade(4, &[1, 2]), &blade(4, &[3, 4])).unwrap();
        let ba = wedge(&blade(4, &[3, 4]), &blade(4, &[1, 2])).unwrap();
        assert_eq!(ab, ba);
        assert!(matches!(
            wedge(&blade(4, &[1, 2]), &blade(4, &[1, 2, 3])),
            Err(Error::GradeOverflow { .. })
        ));
    }

    #[test]
    fn contract_examples() {
        assert_eq!(contract(&blade(4, &[1, 2]), 1).unwrap(), blade(4, &[2]));
        assert_eq!(contract(&blade(4, &[1, 2]), 2).unwrap().get(&[1]).unwrap(), -one());
        assert!(contract(&blade(4, &[1, 2]), 3).unwrap().is_zero());
        assert!(contract(&Multivector::scalar(4, one()).unwrap(), 1).is_err());
    }

    #[test]
    fn dual_examples() {
        assert_eq!(hodge_dual(&blade(4, &[1, 2])), blade(4, &[3, 4]));
        assert_eq!(hodge_dual(&blade(4, &[1, 3])).get(&[2, 4]).unwrap(), -one());
        assert_eq!(hodge_dual(&hodge_dual(&blade(4, &[1, 2]))), blade(4, &[1, 2]));
    }

    #[test]
    fn field_tag_rules() {
        let r = blade(3, &[1]);
        assert_eq!(r.field(), FieldTag::Real);
        let c = r.scale(Complex64::new(0.0, 1.0));
        assert_eq!(c.field(), FieldTag::Complex);
        assert!(c.clone().with_field(FieldTag::Real).is_err());
        assert_eq!(wedge(&r, &blade(3, &[2])).unwrap().field(), FieldTag::Real);
    }

    #[test]
    fn grade_zero_and_full_are_scalars() {
        assert_eq!(Multivector::zeros(5, 0).unwrap().coeffs().len(), 1);
        assert_eq!(Multivector::zeros(5, 5).unwrap().coeffs().len(), 1);
        assert!(Multivector::zeros(5, 6).is_err());
        assert!(matches!(Multivector::zeros(64, 32), Err(Error::TooLarge(_))));
    }
}
