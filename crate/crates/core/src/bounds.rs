//! Bounds on the maximal length N(K, m, n) of an n-vector in K^m.
//!
//! All binomials are exact (`u128`); the only floating-point quantity is
//! the asymptotic upper-bound order, which is not a certified bound.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::binomial;

/// Field over which an exact value is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldScope {
    /// Any field of characteristic zero.
    AnyCharZero,
    Complex,
}

impl FieldScope {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldScope::AnyCharZero => "any-char-0",
            FieldScope::Complex => "complex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactValue {
    pub value: u64,
    pub field_scope: FieldScope,
    pub source: &'static str,
}

fn check_range(m: usize, n: usize) -> Result<()> {
    if n > m {
        return Err(Error::GradeOverflow { grade: n, m });
    }
    if n == 0 || n == m {
        return Err(Error::DegenerateGrade { m, n });
    }
    Ok(())
}

fn choose(m: usize, n: usize) -> Result<u128> {
    binomial(m as u64, n as u64).ok_or_else(|| Error::TooLarge(format!("C({m},{n}) overflows u128")))
}

/// `n <- min(n, m - n)`.
pub fn dual_reduce(m: usize, n: usize) -> usize {
    n.min(m - n)
}

/// The real lower bound `C(m,n) / (n(m-n)+1)` as an exact fraction
/// `(numerator, denominator)`.
pub fn lower_bound_new_raw(m: usize, n: usize) -> Result<(u128, u128)> {
    check_range(m, n)?;
    Ok((choose(m, n)?, (n * (m - n) + 1) as u128))
}

/// Dimension-count lower bound `⌈C(m,n) / (n(m-n)+1)⌉`: a length-l sum of
/// decomposables ranges over a set of dimension at most l(n(m-n)+1), which
/// must reach C(m,n). Symmetric under n <-> m-n.
pub fn lower_bound_new(m: usize, n: usize) -> Result<u64> {
    let (num, den) = lower_bound_new_raw(m, n)?;
    u64::try_from(num.div_ceil(den)).map_err(|_| Error::TooLarge(format!("bound for ({m},{n})")))
}

/// Classical lower bound `⌊(m-n+2)/2⌋`, evaluated after duality reduction.
/// The formula is for n >= 2; a reduced grade of 1 returns the exact value 1.
pub fn lower_bound_old(m: usize, n: usize) -> Result<u64> {
    check_range(m, n)?;
    let n = dual_reduce(m, n);
    if n == 1 {
        return Ok(1);
    }
    Ok(((m - n + 2) / 2) as u64)
}

/// Order of the known upper bound, `m^(n-1) / (2 n!)`, after duality
/// reduction. An asymptotic order only, never a certified bound.
pub fn upper_bound_order(m: usize, n: usize) -> Result<f64> {
    check_range(m, n)?;
    let n = dual_reduce(m, n);
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    Ok((m as f64).powi(n as i32 - 1) / (2.0 * factorial))
}

/// Known exact values of the maximal length, after duality reduction.
pub fn exact_value(m: usize, n: usize) -> Result<Option<ExactValue>> {
    check_range(m, n)?;
    let n = dual_reduce(m, n);
    Ok(match (m, n) {
        (_, 1) => Some(ExactValue { value: 1, field_scope: FieldScope::AnyCharZero, source: "N(m,1)=1" }),
        (_, 2) => Some(ExactValue {
            value: (m / 2) as u64,
            field_scope: FieldScope::AnyCharZero,
            source: "N(m,2)=floor(m/2) (Schmidt)",
        }),
        (6, 3) => Some(ExactValue { value: 3, field_scope: FieldScope::AnyCharZero, source: "Glassco" }),
        (7, 3) => Some(ExactValue { value: 4, field_scope: FieldScope::Complex, source: "Westwick" }),
        (8, 3) => Some(ExactValue { value: 5, field_scope: FieldScope::Complex, source: "Westwick" }),
        _ => None,
    })
}

/// One row of the bounds table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRecord {
    pub m: usize,
    pub n: usize,
    /// `None` only when n > m (the exterior power is zero).
    pub lower_old: Option<u64>,
    pub lower_new: Option<u64>,
    /// Order term only; `None` for degenerate or empty rows.
    pub upper_order: Option<f64>,
    pub exact: Option<ExactValue>,
    /// n = 0 or n = m: length is trivially 1.
    pub degenerate: bool,
}

impl BoundsRecord {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if n > m {
            return Ok(Self { m, n, lower_old: None, lower_new: None, upper_order: None, exact: None, degenerate: false });
        }
        if n == 0 || n == m {
            return Ok(Self {
                m,
                n,
                lower_old: Some(1),
                lower_new: Some(1),
                upper_order: None,
                exact: Some(ExactValue { value: 1, field_scope: FieldScope::AnyCharZero, source: "trivial (n=0 or n=m)" }),
                degenerate: true,
            });
        }
        Ok(Self {
            m,
            n,
            lower_old: Some(lower_bound_old(m, n)?),
            lower_new: Some(lower_bound_new(m, n)?),
            upper_order: Some(upper_bound_order(m, n)?),
            exact: exact_value(m, n)?,
            degenerate: false,
        })
    }
}

/// One record per (m, n), m ascending then n ascending.
pub fn bounds_table(ms: &[usize], ns: &[usize]) -> Result<Vec<BoundsRecord>> {
    if ms.is_empty() || ns.is_empty() {
        return Err(Error::InvalidArgument("empty m or n range".into()));
    }
    let mut ms = ms.to_vec();
    let mut ns = ns.to_vec();
    ms.sort_unstable();
    ms.dedup();
    ns.sort_unstable();
    ns.dedup();
    let mut out = Vec::with_capacity(ms.len() * ns.len());
    for &m in &ms {
        for &n in &ns {
            out.push(BoundsRecord::new(m, n)?);
        }
    }
    Ok(out)
}

pub const CSV_HEADER: &str = "m,n,lower_old,lower_new,upper_order,exact,exact_field,source";

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Fixed 6-decimal rendering keeps the CSV byte-stable.
fn fmt_order(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn to_csv(records: &[BoundsRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let (exact, field, source) = match &r.exact {
            Some(e) => (e.value.to_string(), e.field_scope.as_str().to_string(), e.source.to_string()),
            None => Default::default(),
        };
        let source = if r.n > r.m { "empty (n>m)".to_string() } else { source };
        writeln!(
            s,
            "{},{},{},{},{},{},{},\"{}\"",
            r.m,
            r.n,
            opt(r.lower_old),
            opt(r.lower_new),
            fmt_order(r.upper_order),
            exact,
            field,
            source
        )
        .unwrap();
    }
    s
}

/// Plot-ready series, one block per n (gnuplot `index` compatible: blocks
/// separated by two blank lines).
pub fn to_plot_data(records: &[BoundsRecord]) -> String {
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut s = String::new();
    for (k, n) in ns.iter().enumerate() {
        if k > 0 {
            s.push_str("\n\n");
        }
        writeln!(s, "# series n={n}").unwrap();
        s.push_str("m,lower_old,lower_new,exact\n");
        for r in records.iter().filter(|r| r.n == *n && r.n <= r.m) {
            writeln!(
                s,
                "{},{},{},{}",
                r.m,
                opt(r.lower_old),
                opt(r.lower_new),
                opt(r.exact.as_ref().map(|e| e.value))
            )
            .unwrap();
        }
    }
    s
}
