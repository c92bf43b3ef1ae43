//! Lexicographic indexing of n-subsets of {1..m}.
//!
//! Member lists are 1-based and strictly increasing; ordinals are 0-based.
//! Internally subsets are `u64` bitmasks (bit `i` = member `i + 1`), which
//! caps the ambient dimension at 64.

use crate::error::{Error, Result};

/// Largest ambient dimension representable by the bitmask encoding.
pub const MAX_DIM: usize = 64;

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial(m: u64, k: u64) -> Option<u128> {
    if k > m {
        return Some(0);
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc = C(m, i) here; C(m, i) * (m - i) is divisible by (i + 1).
        acc = acc.checked_mul((m - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `C(m, k)` as a `usize`, for sizes already known to fit in memory.
pub(crate) fn binom(m: usize, k: usize) -> usize {
    binomial(m as u64, k as u64).expect("binomial overflow") as usize
}

/// A strictly increasing list of `n` members of `{1..m}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetIndex {
    m: usize,
    members: Vec<usize>,
}

impl SubsetIndex {
    pub fn new(m: usize, members: Vec<usize>) -> Result<Self> {
        if m > MAX_DIM {
            return Err(Error::TooLarge(format!("ambient dimension {m} exceeds {MAX_DIM}")));
        }
        for (pos, &x) in members.iter().enumerate() {
            if x == 0 || x > m {
                return Err(Error::InvalidSubset(format!(
                    "member {x} out of range 1..={m} in {members:?}"
                )));
            }
            if pos > 0 && members[pos - 1] >= x {
                return Err(Error::InvalidSubset(format!(
                    "members not strictly increasing: {members:?}"
                )));
            }
        }
        Ok(Self { m, members })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub(crate) fn mask(&self) -> u64 {
        self.members.iter().fold(0u64, |acc, &x| acc | (1u64 << (x - 1)))
    }

    pub(crate) fn from_mask(m: usize, mask: u64) -> Self {
        Self { m, members: mask_members(mask).map(|i| i + 1).collect() }
    }
}

/// Lexicographic ordinal of `s` among all `n`-subsets of `{1..m}`.
pub fn subset_rank(s: &SubsetIndex) -> u64 {
    rank_mask(s.m, s.n(), s.mask()) as u64
}

/// Inverse of [`subset_rank`].
pub fn subset_unrank(m: usize, n: usize, ordinal: u64) -> Result<SubsetIndex> {
    if m > MAX_DIM || n > m {
        return Err(Error::InvalidSubset(format!("no {n}-subsets of a {m}-set")));
    }
    let total = binomial(m as u64, n as u64).unwrap_or(u128::MAX);
    if ordinal as u128 >= total {
        return Err(Error::InvalidSubset(format!(
            "ordinal {ordinal} out of range for C({m},{n}) = {total}"
        )));
    }
    let mut rest = ordinal as u128;
    let mut members = Vec::with_capacity(n);
    let mut next = 0usize;
    for slot in 0..n {
        let remaining = n - slot - 1;
        loop {
            let block = binomial((m - next - 1) as u64, remaining as u64).unwrap();
            if rest < block {
                break;
            }
            rest -= block;
            next += 1;
        }
        members.push(next + 1);
        next += 1;
    }
    Ok(SubsetIndex { m, members })
}

/// 0-based positions of the set bits, ascending.
pub(crate) fn mask_members(mask: u64) -> impl Iterator<Item = usize> {
    let mut rest = mask;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        }
    })
}

/// Lexicographic rank of an `n`-bit mask via the complemented combinadic:
/// rank = C(m,n) - 1 - sum_i C(m-1-a_i, n-i).
pub(crate) fn rank_mask(m: usize, n: usize, mask: u64) -> usize {
    let mut acc = 0usize;
    for (i, a) in mask_members(mask).enumerate() {
        acc += binom(m - 1 - a, n - i);
    }
    binom(m, n) - 1 - acc
}

/// All `n`-subset masks of `{0..m}` in lexicographic order.
pub(crate) fn lex_masks(m: usize, n: usize) -> Vec<u64> {
    let total = binom(m, n);
    let mut out = Vec::with_capacity(total);
    if n == 0 {
        out.push(0);
        return out;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        out.push(idx.iter().fold(0u64, |acc, &i| acc | (1u64 << i)));
        // advance to next combination in lex order
        let mut pos = n;
        while pos > 0 && idx[pos - 1] == m - n + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for q in pos..n {
            idx[q] = idx[q - 1] + 1;
        }
    }
    out
}

/// Index tables for appending one basis vector to a grade-`g` subset:
/// `T ∧ e_i = sign · e_{T ∪ {i}}` with sign `(-1)^{#{t ∈ T : t > i}}`.
#[derive(Debug, Clone)]
pub(crate) struct AppendTable {
    pub m: usize,
    pub grade: usize,
    /// For subset `t`, entries `[t * (m - grade) .. (t + 1) * (m - grade)]`.
    pub entries: Vec<AppendEntry>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AppendEntry {
    pub vector_index: u32,
    pub target: u32,
    pub negative: bool,
}

impl AppendTable {
    pub fn new(m: usize, grade: usize) -> Self {
        assert!(grade < m);
        let masks = lex_masks(m, grade);
        let width = m - grade;
        let mut entries = Vec::with_capacity(masks.len() * width);
        for &mask in &masks {
            for i in 0..m {
                if mask & (1u64 << i) != 0 {
                    continue;
                }
                let above = (mask >> i).count_ones() as usize;
                entries.push(AppendEntry {
                    vector_index: i as u32,
                    target: rank_mask(m, grade + 1, mask | (1u64 << i)) as u32,
                    negative: above % 2 == 1,
                });
            }
        }
        Self { m, grade, entries }
    }

    pub fn width(&self) -> usize {
        self.m - self.grade
    }

    pub fn row(&self, t: usize) -> &[AppendEntry] {
        let w = self.width();
        &self.entries[t * w..(t + 1) * w]
    }
}
