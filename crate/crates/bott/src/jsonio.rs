//! Canonical JSON for every wire type.
//!
//! All output goes through `serde_json::Value` with the default BTreeMap
//! object representation, so keys come out sorted and byte equality of the
//! rendered strings coincides with structural equality. Integers are
//! emitted as plain JSON numbers at arbitrary precision.

use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::invariants::Fingerprint;
use crate::iso::{IsoCandidate, IsoVerdict, NonIsoReason};
use crate::matrix::BottMatrix;
use crate::moves::{MoveKind, MoveTrace};
use crate::ring::DegreeTwoClass;

pub fn to_canonical_string(v: &Value) -> String {
    serde_json::to_string(v).expect("value serialization cannot fail")
}

pub fn parse_value(s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

/// FNV-1a over the canonical rendering; stable across runs and platforms.
pub fn canonical_hash(v: &Value) -> String {
    let bytes = to_canonical_string(v).into_bytes();
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn bigint_value(b: &BigInt) -> Value {
    Value::Number(Number::from_str(&b.to_string()).expect("integer literal"))
}

pub fn parse_bigint(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            let s = n.to_string();
            BigInt::from_str(&s).map_err(|_| Error::Parse(format!("expected integer, got {s}")))
        }
        other => Err(Error::Parse(format!("expected integer, got {other}"))),
    }
}

pub fn parse_usize(v: &Value) -> Result<usize> {
    let b = parse_bigint(v)?;
    usize::try_from(&b)
        .map_err(|_| Error::Parse(format!("expected small nonnegative integer, got {b}")))
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing key {key:?}")))
}

fn as_object(v: &Value) -> Result<&Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::Parse(format!("expected object, got {v}")))
}

fn as_array(v: &Value) -> Result<&Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("expected array, got {v}")))
}

fn as_str(v: &Value) -> Result<&str> {
    v.as_str()
        .ok_or_else(|| Error::Parse(format!("expected string, got {v}")))
}

/// `{"cols": [[A12], [A13, A23], ...], "n": n}`
pub fn matrix_value(m: &BottMatrix) -> Value {
    let cols: Vec<Value> = (2..=m.n())
        .map(|j| Value::Array((1..j).map(|i| bigint_value(m.entry(i, j))).collect()))
        .collect();
    let mut obj = Map::new();
    obj.insert("cols".into(), Value::Array(cols));
    obj.insert("n".into(), Value::Number(Number::from(m.n() as u64)));
    Value::Object(obj)
}

pub fn parse_matrix(v: &Value) -> Result<BottMatrix> {
    let obj = as_object(v)?;
    let n = parse_usize(get(obj, "n")?)?;
    let cols_v = as_array(get(obj, "cols")?)?;
    let mut cols = Vec::with_capacity(cols_v.len());
    for col in cols_v {
        cols.push(
            as_array(col)?
                .iter()
                .map(parse_bigint)
                .collect::<Result<Vec<_>>>()?,
        );
    }
    BottMatrix::from_cols(n, cols)
}

/// A degree-two class as a plain coefficient array of the given length.
pub fn class_value(u: &DegreeTwoClass, len: usize) -> Value {
    Value::Array((1..=len).map(|i| bigint_value(u.coeff(i))).collect())
}

/// Parse a coefficient array, zero-padding up to `dim` entries.
pub fn parse_class(v: &Value, dim: usize) -> Result<DegreeTwoClass> {
    let arr = as_array(v)?;
    if arr.len() > dim {
        return Err(Error::Parse(format!(
            "class has {} coefficients, ring has {dim}",
            arr.len()
        )));
    }
    let mut coeffs = arr.iter().map(parse_bigint).collect::<Result<Vec<_>>>()?;
    coeffs.resize(dim, BigInt::from(0));
    Ok(DegreeTwoClass::new(coeffs))
}

pub fn fingerprint_value(f: &Fingerprint) -> Value {
    let mut obj = Map::new();
    obj.insert(
        "mod2SquareZeroCount".into(),
        Value::Number(Number::from(f.mod2_square_zero_count)),
    );
    obj.insert("n".into(), Value::Number(Number::from(f.n as u64)));
    obj.insert(
        "productDivisors".into(),
        Value::Array(f.product_divisors.iter().map(bigint_value).collect()),
    );
    obj.insert("spanIndex".into(), bigint_value(&f.span_index));
    obj.insert("t".into(), Value::Number(Number::from(f.t as u64)));
    Value::Object(obj)
}

/// `{"P": [[rows]], "source": matrix, "target": matrix}`
pub fn candidate_value(c: &IsoCandidate) -> Value {
    let p = Value::Array(
        c.matrix_p()
            .iter()
            .map(|row| Value::Array(row.iter().map(bigint_value).collect()))
            .collect(),
    );
    let mut obj = Map::new();
    obj.insert("P".into(), p);
    obj.insert("source".into(), matrix_value(c.source()));
    obj.insert("target".into(), matrix_value(c.target()));
    Value::Object(obj)
}

/// Parse and re-verify a candidate; the returned flag is the iso_check
/// outcome, never trusted from the file.
pub fn parse_candidate(v: &Value) -> Result<(IsoCandidate, bool)> {
    let obj = as_object(v)?;
    let source = parse_matrix(get(obj, "source")?)?;
    let target = parse_matrix(get(obj, "target")?)?;
    let rows_v = as_array(get(obj, "P")?)?;
    let mut p = Vec::with_capacity(rows_v.len());
    for row in rows_v {
        p.push(
            as_array(row)?
                .iter()
                .map(parse_bigint)
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let mut cand = IsoCandidate::new(source, target, p)?;
    let ok = cand.verify()?;
    Ok((cand, ok))
}

pub fn move_kind_value(kind: &MoveKind) -> Value {
    let mut obj = Map::new();
    match kind {
        MoveKind::StageSwap { j } => {
            obj.insert("j".into(), Value::Number(Number::from(*j as u64)));
            obj.insert("kind".into(), Value::String("swap".into()));
        }
        MoveKind::BundleChange { j, u } => {
            obj.insert("j".into(), Value::Number(Number::from(*j as u64)));
            obj.insert("kind".into(), Value::String("bundle".into()));
            obj.insert(
                "u".into(),
                Value::Array((1..*j).map(|i| bigint_value(u.coeff(i))).collect()),
            );
        }
    }
    Value::Object(obj)
}

pub fn parse_move_kind(v: &Value, dim: usize) -> Result<MoveKind> {
    let obj = as_object(v)?;
    let j = parse_usize(get(obj, "j")?)?;
    match as_str(get(obj, "kind")?)? {
        "swap" => Ok(MoveKind::StageSwap { j }),
        "bundle" => {
            if j < 1 || j > dim {
                return Err(Error::IndexOutOfRange { index: j, n: dim });
            }
            let arr = as_array(get(obj, "u")?)?;
            if arr.len() + 1 != j {
                return Err(Error::Parse(format!(
                    "bundle change at stage {j} needs {} coefficients, got {}",
                    j - 1,
                    arr.len()
                )));
            }
            let mut coeffs = arr.iter().map(parse_bigint).collect::<Result<Vec<_>>>()?;
            coeffs.resize(dim, BigInt::from(0));
            Ok(MoveKind::BundleChange {
                j,
                u: DegreeTwoClass::new(coeffs),
            })
        }
        other => Err(Error::Parse(format!("unknown move kind {other:?}"))),
    }
}

/// `{"end": matrix, "start": matrix, "steps": [kind...]}`
pub fn trace_value(t: &MoveTrace) -> Value {
    let mut obj = Map::new();
    obj.insert("end".into(), matrix_value(t.end()));
    obj.insert("start".into(), matrix_value(t.start()));
    obj.insert(
        "steps".into(),
        Value::Array(
            t.steps()
                .iter()
                .map(|m| move_kind_value(m.kind()))
                .collect(),
        ),
    );
    Value::Object(obj)
}

/// Rebuild a trace from its serialized form, re-validating every step and
/// checking the recorded end matrix.
pub fn parse_trace(v: &Value) -> Result<MoveTrace> {
    let obj = as_object(v)?;
    let start = parse_matrix(get(obj, "start")?)?;
    let end = parse_matrix(get(obj, "end")?)?;
    let steps_v = as_array(get(obj, "steps")?)?;
    let specs = steps_v
        .iter()
        .map(|s| parse_move_kind(s, start.n()))
        .collect::<Result<Vec<_>>>()?;
    let trace = MoveTrace::from_specs(start, &specs)?;
    if trace.end() != &end {
        return Err(Error::EndpointMismatch);
    }
    Ok(trace)
}

pub fn verdict_value(v: &IsoVerdict) -> Value {
    let mut obj = Map::new();
    match v {
        IsoVerdict::Iso {
            candidate,
            diffeomorphic,
        } => {
            obj.insert("certificate".into(), candidate_value(candidate));
            obj.insert("diffeomorphic".into(), Value::Bool(*diffeomorphic));
            obj.insert("status".into(), Value::String("ISO".into()));
        }
        IsoVerdict::NonIso { reason } => {
            let mut r = Map::new();
            match reason {
                NonIsoReason::Fingerprint(field) => {
                    r.insert("field".into(), Value::String(field.name().into()));
                    r.insert("kind".into(), Value::String("fingerprint".into()));
                }
                NonIsoReason::ExhaustedCompleteFamily => {
                    r.insert(
                        "kind".into(),
                        Value::String("exhaustedCompleteFamily".into()),
                    );
                }
            }
            obj.insert("reason".into(), Value::Object(r));
            obj.insert("status".into(), Value::String("NON_ISO".into()));
        }
        IsoVerdict::Unknown { coeff_bound } => {
            obj.insert(
                "coeffBound".into(),
                Value::Number(Number::from(*coeff_bound)),
            );
            obj.insert("status".into(), Value::String("UNKNOWN".into()));
        }
    }
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moves;

    #[test]
    fn matrix_roundtrip_and_sorted_keys() {
        let m = BottMatrix::from_cols_i64(3, &[&[4], &[-1, 7]]).unwrap();
        let v = matrix_value(&m);
        let s = to_canonical_string(&v);
        assert_eq!(s, r#"{"cols":[[4],[-1,7]],"n":3}"#);
        assert_eq!(parse_matrix(&parse_value(&s).unwrap()).unwrap(), m);
    }

    #[test]
    fn big_entries_roundtrip() {
        let huge = BigInt::from_str("123456789012345678901234567890123").unwrap();
        let m = BottMatrix::validate(2, [(1, 2, huge.clone())]).unwrap();
        let s = to_canonical_string(&matrix_value(&m));
        let back = parse_matrix(&parse_value(&s).unwrap()).unwrap();
        assert_eq!(back.entry(1, 2), &huge);
    }

    #[test]
    fn float_entries_are_rejected() {
        let v = parse_value(r#"{"cols":[[1.5]],"n":2}"#).unwrap();
        assert!(matches!(parse_matrix(&v), Err(Error::Parse(_))));
    }

    #[test]
    fn trace_roundtrip_checks_end() {
        let sigma = BottMatrix::hirzebruch(5);
        let u = DegreeTwoClass::from_i64(&[2, 0]);
        let (_, mv) = moves::bundle_change(&sigma, 2, &u).unwrap();
        let mut trace = MoveTrace::identity(sigma);
        trace.push(mv).unwrap();
        let v = trace_value(&trace);
        let back = parse_trace(&v).unwrap();
        assert_eq!(back.end(), trace.end());

        // tamper with the recorded end
        let mut tampered = v.clone();
        tampered["end"] = matrix_value(&BottMatrix::hirzebruch(0));
        assert!(parse_trace(&tampered).is_err());
    }

    #[test]
    fn candidate_verification_is_recomputed() {
        let m = BottMatrix::hirzebruch(1);
        let id = IsoCandidate::identity(&m);
        let v = candidate_value(&id);
        let (_, ok) = parse_candidate(&v).unwrap();
        assert!(ok);
        // perturb one entry of P
        let mut bad = v.clone();
        bad["P"][0][1] = Value::Number(Number::from(1));
        let (_, ok2) = parse_candidate(&bad).unwrap();
        assert!(!ok2);
    }

    #[test]
    fn search_certificates_survive_serialization() {
        // a certificate found by the search still verifies after a trip
        // through its wire form
        let a = BottMatrix::hirzebruch(1);
        let b = BottMatrix::hirzebruch(3);
        let verdict = crate::iso::are_isomorphic(&a, &b, 4).unwrap();
        let cand = verdict.candidate().expect("parity pair is isomorphic");
        let wire = to_canonical_string(&candidate_value(cand));
        let (back, ok) = parse_candidate(&parse_value(&wire).unwrap()).unwrap();
        assert!(ok);
        assert_eq!(back.source(), &a);
        assert_eq!(back.target(), &b);
        assert_eq!(back.matrix_p(), cand.matrix_p());
    }

    #[test]
    fn fingerprint_byte_equality_is_structural_equality() {
        let mats = [
            BottMatrix::hirzebruch(0),
            BottMatrix::hirzebruch(1),
            BottMatrix::hirzebruch(2),
            BottMatrix::from_cols_i64(3, &[&[1], &[0, 1]]).unwrap(),
            BottMatrix::from_cols_i64(3, &[&[1], &[2, 1]]).unwrap(),
            BottMatrix::from_cols_i64(4, &[&[1], &[0, 2], &[0, -1, 1]]).unwrap(),
        ];
        let fps: Vec<_> = mats.iter().map(crate::invariants::fingerprint).collect();
        for (i, fi) in fps.iter().enumerate() {
            for (j, fj) in fps.iter().enumerate() {
                let bi = to_canonical_string(&fingerprint_value(fi));
                let bj = to_canonical_string(&fingerprint_value(fj));
                assert_eq!(fi == fj, bi == bj, "{i} vs {j}");
            }
        }
    }
}
