//! JSON and CSV encodings of counting, sieve and experiment results.
//!
//! Integers beyond `2^53` become decimal strings, rationals become
//! `{"num", "den", "approx"}` objects with string numerator and denominator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde_json::{json, Map, Value};

use crate::counting::{CountResult, CountSeries};
use crate::sieve::SieveReport;

const SAFE_INTEGER: i128 = 1 << 53;

pub fn json_int(v: impl Into<i128>) -> Value {
    let v: i128 = v.into();
    if v.abs() <= SAFE_INTEGER {
        Value::from(v as i64)
    } else {
        Value::String(v.to_string())
    }
}

pub fn json_bigint(v: &BigInt) -> Value {
    if v.abs() <= BigInt::from(SAFE_INTEGER) {
        Value::from(v.to_i64().expect("fits"))
    } else {
        Value::String(v.to_string())
    }
}

/// Finite floats as numbers, everything else as `null`.
pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn round7(x: f64) -> f64 {
    (x * 1e7).round() / 1e7
}

pub fn json_rational(r: &BigRational) -> Value {
    let approx = r.to_f64().map(round7).unwrap_or(f64::NAN);
    json!({
        "num": r.numer().to_string(),
        "den": r.denom().to_string(),
        "approx": json_f64(approx),
    })
}

/// Numeric reading of a value written by this module: numbers, decimal
/// strings and rational objects.
pub fn value_to_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.parse().ok(),
        Value::Object(m) => {
            let num: BigInt = m.get("num")?.as_str()?.parse().ok()?;
            let den: BigInt = m.get("den")?.as_str()?.parse().ok()?;
            BigRational::new(num, den).to_f64()
        }
        _ => None,
    }
}

/// Exact integer reading of a number or decimal string.
pub fn value_to_i128(v: &Value) -> Option<i128> {
    match v {
        Value::Number(n) => n.as_i64().map(i128::from).or_else(|| n.as_u64().map(i128::from)),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

pub fn value_to_rational(v: &Value) -> Option<BigRational> {
    match v {
        Value::Object(m) => {
            let num: BigInt = m.get("num")?.as_str()?.parse().ok()?;
            let den: BigInt = m.get("den")?.as_str()?.parse().ok()?;
            if den.is_positive() {
                Some(BigRational::new(num, den))
            } else {
                None
            }
        }
        other => value_to_i128(other).map(|i| BigRational::from_integer(BigInt::from(i))),
    }
}

fn wall_time(t: f64, timings: bool) -> Value {
    if timings {
        json_f64(t)
    } else {
        Value::Null
    }
}

pub fn count_result_json(r: &CountResult, timings: bool) -> Value {
    json!({
        "mode": r.mode.as_str(),
        "B": json_int(r.b),
        "count": json_int(r.count),
        "identically_zero_fibers": json_int(r.identically_zero_fibers),
        "wall_time_s": wall_time(r.wall_time_s, timings),
    })
}

pub fn series_json(s: &CountSeries, timings: bool) -> Value {
    json!({
        "mode": s.mode.as_str(),
        "series": s.entries.iter().map(|e| count_result_json(e, timings)).collect::<Vec<_>>(),
    })
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// `B,count,wall_time_s`, one row per grid point.
pub fn series_csv(s: &CountSeries, timings: bool) -> String {
    let header = ["B", "count", "wall_time_s"].map(String::from);
    let rows: Vec<Vec<String>> = s
        .entries
        .iter()
        .map(|e| {
            let t = if timings { format!("{:.6}", e.wall_time_s) } else { String::new() };
            vec![e.b.to_string(), e.count.to_string(), t]
        })
        .collect();
    csv_text(&header, &rows)
}

pub fn sieve_report_json(r: &SieveReport) -> Value {
    let densities: Vec<Value> = r
        .densities
        .iter()
        .map(|d| {
            json!({
                "p": json_int(d.p),
                "np": json_int(d.np),
                "pn": json_bigint(&d.pn),
                "omega": json_rational(&d.omega),
                "ratio": d.ratio.as_ref().map_or(Value::Null, json_rational),
            })
        })
        .collect();
    json!({
        "B": json_int(r.b),
        "Q": json_int(r.q),
        "n": json_int(r.n as i64),
        "L_mode": r.mode.as_str(),
        "L": r.l.as_ref().map_or(Value::Null, json_rational),
        "bound": json_rational(&r.bound),
        "exact_zero_certificate": r.exact_zero_certificate.map_or(Value::Null, json_int),
        "skipped_primes": r.skipped_primes.iter().map(|&p| json_int(p)).collect::<Vec<_>>(),
        "residue_filter": r.residue_filter.map_or(Value::Null, |(a, m)| json!({"a": json_int(a), "m": json_int(m)})),
        "densities": densities,
    })
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Object(m) if m.contains_key("num") && m.contains_key("den") => {
            let num = m["num"].as_str().unwrap_or_default();
            let den = m["den"].as_str().unwrap_or_default();
            if den == "1" {
                num.to_string()
            } else {
                format!("{num}/{den}")
            }
        }
        other => other.to_string(),
    }
}

/// Flat CSV of table rows; the columns are the keys of the first row.
pub fn rows_csv(rows: &[Map<String, Value>]) -> String {
    let Some(first) = rows.first() else {
        return String::new();
    };
    let header: Vec<String> = first.keys().cloned().collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| header.iter().map(|k| r.get(k).map_or(String::new(), cell)).collect())
        .collect();
    csv_text(&header, &body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::CountMode;

    #[test]
    fn rational_encoding() {
        let r = BigRational::new(BigInt::from(13), BigInt::from(6));
        assert_eq!(json_rational(&r).to_string(), r#"{"num":"13","den":"6","approx":2.1666667}"#);
        assert_eq!(value_to_rational(&json_rational(&r)), Some(r));
    }

    #[test]
    fn large_integers_are_strings() {
        assert_eq!(json_int(1i64 << 53), json!(9007199254740992i64));
        assert_eq!(json_int((1i64 << 53) + 1), json!("9007199254740993"));
        assert_eq!(json_bigint(&BigInt::from(-(1i128 << 60))), json!("-1152921504606846976"));
        assert_eq!(value_to_i128(&json!("9007199254740993")), Some((1 << 53) + 1));
    }

    #[test]
    fn singleton_series_csv() {
        let s = CountSeries {
            mode: CountMode::Cov,
            entries: vec![CountResult {
                count: 10,
                b: 2,
                mode: CountMode::Cov,
                identically_zero_fibers: 0,
                wall_time_s: 0.5,
            }],
        };
        assert_eq!(series_csv(&s, false), "B,count,wall_time_s\n2,10,\n");
        assert_eq!(series_json(&s, false)["series"][0]["wall_time_s"], Value::Null);
    }

    #[test]
    fn empty_map_is_object() {
        assert_eq!(Value::Object(Map::new()).to_string(), "{}");
    }
}
