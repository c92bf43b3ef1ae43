//! JSON documents.
//!
//! Multivector document:
//! `{"m": 4, "n": 2, "field": "C", "terms": [[[1, 2], 1.0, 0.0], ...]}`.
//! Index arrays are sorted and 1-based; omitted subsets are zero.
//!
//! Term-list document (a decomposable sum):
//! `{"m": 4, "n": 2, "terms": [[[[re, im], ...m], ...n], ...]}`, one
//! factor matrix per summand.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::decomp::DecompTerm;
use crate::error::{Error, Result};
use crate::multivector::{check_shape, FieldTag, Multivector, VectorM};
use crate::subset::{subset_rank, SubsetIndex};

fn field_str(f: FieldTag) -> &'static str {
    match f {
        FieldTag::Complex => "C",
        FieldTag::Real => "R",
    }
}

/// Serializes a multivector, listing only nonzero coefficients.
pub fn to_value(psi: &Multivector) -> Value {
    let terms: Vec<Value> = psi
        .terms()
        .into_iter()
        .map(|(members, c)| json!([members, c.re, c.im]))
        .collect();
    json!({
        "m": psi.m(),
        "n": psi.n(),
        "field": field_str(psi.field()),
        "terms": terms,
    })
}

pub fn serialize(psi: &Multivector) -> String {
    serde_json::to_string_pretty(&to_value(psi)).expect("json serialization") + "\n"
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn get_usize(obj: &Value, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(format!("missing or non-integer field \"{key}\"")))
}

fn get_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| parse_err(format!("{what} is not a number")))
}

pub fn from_value(doc: &Value) -> Result<Multivector> {
    let m = get_usize(doc, "m")?;
    let n = get_usize(doc, "n")?;
    let field = match doc.get("field").and_then(Value::as_str) {
        Some("C") => FieldTag::Complex,
        Some("R") => FieldTag::Real,
        Some(other) => return Err(parse_err(format!("unknown field tag \"{other}\""))),
        None => return Err(parse_err("missing field \"field\"")),
    };
    let len = check_shape(m, n)?;
    let terms = doc
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("missing array \"terms\""))?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
    let mut seen = HashSet::with_capacity(terms.len());
    for (k, entry) in terms.iter().enumerate() {
        let parts = entry
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| parse_err(format!("term {k} is not [indices, re, im]")))?;
        let members = parts[0]
            .as_array()
            .ok_or_else(|| parse_err(format!("term {k}: indices are not an array")))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|v| v as usize)
                    .ok_or_else(|| parse_err(format!("term {k}: non-integer index")))
            })
            .collect::<Result<Vec<_>>>()?;
        if members.len() != n {
            return Err(parse_err(format!("term {k}: expected {n} indices, got {}", members.len())));
        }
        let subset = SubsetIndex::new(m, members.clone())?;
        let ord = subset_rank(&subset) as usize;
        if !seen.insert(ord) {
            return Err(Error::DuplicateIndex(members));
        }
        coeffs[ord] = Complex64::new(get_f64(&parts[1], "re")?, get_f64(&parts[2], "im")?);
    }
    Multivector::from_coeffs(m, n, coeffs)?.with_field(field)
}

pub fn parse(text: &str) -> Result<Multivector> {
    let doc: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    from_value(&doc)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermListDoc {
    m: usize,
    n: usize,
    terms: Vec<Vec<VectorM>>,
}

/// Serializes a decomposable sum as a list of factor matrices.
pub fn serialize_terms(m: usize, n: usize, terms: &[DecompTerm]) -> String {
    let doc = TermListDoc { m, n, terms: terms.iter().map(|t| t.vectors.clone()).collect() };
    serde_json::to_string_pretty(&doc).expect("json serialization") + "\n"
}

pub fn parse_terms(text: &str) -> Result<(usize, usize, Vec<DecompTerm>)> {
    let doc: TermListDoc = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    let terms = doc
        .terms
        .into_iter()
        .map(|vectors| {
            if vectors.len() != doc.n {
                return Err(parse_err(format!("factor matrix with {} vectors, expected {}", vectors.len(), doc.n)));
            }
            DecompTerm::new(vectors)
        })
        .collect::<Result<Vec<_>>>()?;
    for t in &terms {
        if t.m() != doc.m {
            return Err(Error::DimensionMismatch { expected: doc.m, found: t.m() });
        }
    }
    Ok((doc.m, doc.n, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian_vec, rng_from_seed};
    use proptest::prelude::*;

    #[test]
    fn basis_blade_document() {
        let psi = Multivector::basis_blade(4, &[1, 2]).unwrap();
        let v = to_value(&psi);
        assert_eq!(v["m"], 4);
        assert_eq!(v["n"], 2);
        assert_eq!(v["field"], "R");
        assert_eq!(v["terms"], json!([[[1, 2], 1.0, 0.0]]));
    }

    #[test]
    fn unsorted_indices_rejected() {
        let err = parse(r#"{"m":4,"n":2,"field":"C","terms":[[[2,1],1.0,0.0]]}"#).unwrap_err();
        assert!(matches!(err, Error::InvalidSubset(_)), "{err}");
    }

    #[test]
    fn malformed_documents_rejected() {
        let cases = [
            r#"{"m":4,"n":2,"field":"C","terms":[[[1,2],1.0,0.0],[[1,2],2.0,0.0]]}"#,
            r#"{"m":4,"n":2,"field":"C","terms":[[[1,5],1.0,0.0]]}"#,
            r#"{"m":4,"n":2,"field":"C","terms":[[[1,2,3],1.0,0.0]]}"#,
            r#"{"m":4,"n":2,"field":"Q","terms":[]}"#,
            r#"{"m":4,"n":2,"field":"R","terms":[[[1,2],1.0,0.5]]}"#,
            r#"{"m":4,"n":5,"field":"C","terms":[]}"#,
            r#"{"m":64,"n":32,"field":"C","terms":[]}"#,
            r#"{"m":4,"field":"C","terms":[]}"#,
            r#"not json"#,
        ];
        for c in cases {
            assert!(parse(c).is_err(), "accepted: {c}");
        }
        assert!(matches!(
            parse(cases[0]).unwrap_err(),
            Error::DuplicateIndex(ref v) if v == &vec![1, 2]
        ));
    }

    proptest! {
        #[test]
        fn roundtrip_is_lossless(seed in any::<u64>(), m in 1usize..8, pick in 0usize..8) {
            let n = pick % (m + 1);
            let len = crate::subset::binom(m, n);
            let mut rng = rng_from_seed(seed);
            let psi = Multivector::from_coeffs(m, n, complex_gaussian_vec(&mut rng, len)).unwrap();
            let back = parse(&serialize(&psi)).unwrap();
            prop_assert_eq!(back, psi);
        }
    }

    #[test]
    fn term_list_roundtrip() {
        let mut rng = rng_from_seed(3);
        let terms: Vec<DecompTerm> = (0..2)
            .map(|_| {
                DecompTerm::new((0..3).map(|_| VectorM(complex_gaussian_vec(&mut rng, 5))).collect())
                    .unwrap()
            })
            .collect();
        let text = serialize_terms(5, 3, &terms);
        let (m, n, back) = parse_terms(&text).unwrap();
        assert_eq!((m, n), (5, 3));
        assert_eq!(back, terms);
    }
}
