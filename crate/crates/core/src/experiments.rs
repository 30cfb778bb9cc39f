//! Named, parameterized experiments over the counters and the sieve.
//!
//! Each experiment produces an [`ExperimentReport`]: its parameters, a table
//! of rows, derived statistics and a verdict. The verdict is computed from
//! the parameters and rows alone, so [`ExperimentReport::recompute_verdict`]
//! reproduces it from a stored report.

use std::f64::consts::PI;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::arith::{self, ArithError, KVariant};
use crate::counting::{self, CountError, CountOptions, CountSeries, CountSpec, RestrictedCount, Solvability};
use crate::parse::parse_poly;
use crate::poly::{format_poly, MPoly};
use crate::report::{json_f64, json_int, json_rational, rows_csv, value_to_f64, value_to_i128, value_to_rational};
use crate::sieve::{self, SieveError, SieveParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("exponent fit needs at least 3 grid points, got {0}")]
    ShortGrid(usize),
    #[error("exponent fit needs positive heights and counts, got count {count} at B = {b}")]
    NonPositivePoint { b: u64, count: u64 },
    #[error("exponent fit needs at least two distinct heights")]
    DegenerateGrid,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("B = {b} is below ceil(sqrt({k})) = {min}")]
    HeightBelowRoot { k: u64, b: u64, min: u64 },
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute vertical deviation from the fitted line.
    pub max_residual: f64,
    pub grid: Vec<u64>,
}

/// Least-squares line through `(log2 x, log2 y)`: `(slope, intercept, max_residual)`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<(f64, f64, f64), ExperimentError> {
    if points.len() < 3 {
        return Err(ExperimentError::ShortGrid(points.len()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.log2(), y.log2())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::DegenerateGrid);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = logs
        .iter()
        .map(|&(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    Ok((slope, intercept, max_residual))
}

pub fn fit_points(points: &[(u64, u64)]) -> Result<FitResult, ExperimentError> {
    if points.len() < 3 {
        return Err(ExperimentError::ShortGrid(points.len()));
    }
    if let Some(&(b, count)) = points.iter().find(|&&(b, c)| b == 0 || c == 0) {
        return Err(ExperimentError::NonPositivePoint { b, count });
    }
    let real: Vec<(f64, f64)> = points.iter().map(|&(b, c)| (b as f64, c as f64)).collect();
    let (slope, intercept, max_residual) = fit_log_log(&real)?;
    Ok(FitResult {
        slope,
        intercept,
        max_residual,
        grid: points.iter().map(|p| p.0).collect(),
    })
}

/// Slope of `log2 count` against `log2 B`.
pub fn fit_exponent(series: &CountSeries) -> Result<FitResult, ExperimentError> {
    fit_points(&series.points())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub rule: String,
    /// `None` when the data cannot decide the rule, e.g. a one-point grid.
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: Map<String, Value>,
    pub rows: Vec<Map<String, Value>>,
    pub statistics: Map<String, Value>,
    pub verdict: Verdict,
}

impl ExperimentReport {
    fn build(name: &str, parameters: Value, rows: Vec<Map<String, Value>>, statistics: Map<String, Value>) -> Self {
        let parameters = into_map(parameters);
        let verdict = verdict_for(name, &parameters, &rows);
        ExperimentReport {
            name: name.to_string(),
            parameters,
            rows,
            statistics,
            verdict,
        }
    }

    pub fn recompute_verdict(&self) -> Verdict {
        verdict_for(&self.name, &self.parameters, &self.rows)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "parameters": self.parameters,
            "rows": self.rows,
            "statistics": self.statistics,
            "verdict": {"rule": self.verdict.rule, "passed": self.verdict.passed},
        })
    }

    pub fn from_json(v: &Value) -> Option<Self> {
        let verdict = v.get("verdict")?;
        Some(ExperimentReport {
            name: v.get("name")?.as_str()?.to_string(),
            parameters: v.get("parameters")?.as_object()?.clone(),
            rows: v
                .get("rows")?
                .as_array()?
                .iter()
                .map(|r| r.as_object().cloned())
                .collect::<Option<_>>()?,
            statistics: v.get("statistics")?.as_object()?.clone(),
            verdict: Verdict {
                rule: verdict.get("rule")?.as_str()?.to_string(),
                passed: verdict.get("passed")?.as_bool(),
            },
        })
    }

    pub fn to_csv(&self) -> String {
        rows_csv(&self.rows)
    }

    /// `<name>-<params>`, usable as a file name.
    pub fn file_stem(&self) -> String {
        let mut stem = self.name.clone();
        for (k, v) in &self.parameters {
            stem.push('-');
            stem.push_str(&sanitize(k));
            stem.push_str(&param_text(v));
        }
        stem
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .filter_map(|c| match c {
            '+' => Some('p'),
            '-' => Some('m'),
            c if c.is_ascii_alphanumeric() || c == '.' => Some(c),
            _ => None,
        })
        .collect()
}

fn param_text(v: &Value) -> String {
    match v {
        Value::Array(items) => items.iter().map(param_text).collect::<Vec<_>>().join("_"),
        Value::String(s) => sanitize(s),
        Value::Null => "none".to_string(),
        other => sanitize(&other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExperimentOptions {
    pub count: CountOptions,
    /// Record wall-clock times; otherwise `wall_time_s` is `null`.
    pub timings: bool,
}

impl ExperimentOptions {
    fn time(&self, start: Instant) -> Value {
        if self.timings {
            json_f64(start.elapsed().as_secs_f64())
        } else {
            Value::Null
        }
    }
}

fn into_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn grid_json(grid: &[u64]) -> Value {
    Value::Array(grid.iter().map(|&b| json_int(b)).collect())
}

fn check_grid(grid: &[u64]) -> Result<(), ExperimentError> {
    if grid.is_empty() {
        return Err(CountError::EmptyGrid.into());
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CountError::GridNotIncreasing.into());
    }
    Ok(())
}

fn poly(text: &str, n: usize) -> MPoly {
    parse_poly(text, n).expect("generated polynomial text is well formed")
}

fn x_sum(from: usize, to: usize) -> String {
    (from..=to).map(|i| format!("X{i}")).collect::<Vec<_>>().join(" + ")
}

fn fit_json(fit: &Result<FitResult, ExperimentError>) -> Value {
    match fit {
        Ok(f) => json!({
            "slope": json_f64(f.slope),
            "intercept": json_f64(f.intercept),
            "max_residual": json_f64(f.max_residual),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn param_u64(params: &Map<String, Value>, key: &str) -> Option<u64> {
    params.get(key).and_then(value_to_i128).and_then(|v| u64::try_from(v).ok())
}

fn row_u64(row: &Map<String, Value>, key: &str) -> Option<u64> {
    row.get(key).and_then(value_to_i128).and_then(|v| u64::try_from(v).ok())
}

fn fit_rows(rows: &[Map<String, Value>]) -> Result<FitResult, ExperimentError> {
    let points: Option<Vec<(u64, u64)>> = rows.iter().map(|r| Some((row_u64(r, "B")?, row_u64(r, "count")?))).collect();
    fit_points(&points.ok_or_else(|| ExperimentError::InvalidParameter("rows lack B or count".into()))?)
}

fn series_rows(series: &CountSeries, opts: &ExperimentOptions) -> Vec<Map<String, Value>> {
    series
        .entries
        .iter()
        .map(|e| {
            into_map(json!({
                "B": json_int(e.b),
                "count": json_int(e.count),
                "identically_zero_fibers": json_int(e.identically_zero_fibers),
                "wall_time_s": if opts.timings { json_f64(e.wall_time_s) } else { Value::Null },
            }))
        })
        .collect()
}

/// Rows ordered by B with counts `c_i / B_i^2` strictly increasing.
fn strictly_increasing_over_b2(rows: &[Map<String, Value>], key: &str) -> Option<bool> {
    let vals: Option<Vec<(u128, u128)>> = rows
        .iter()
        .map(|r| Some((u128::from(row_u64(r, "B")?), u128::from(row_u64(r, key)?))))
        .collect();
    let vals = vals?;
    Some(vals.windows(2).all(|w| w[0].1 * w[1].0 * w[1].0 < w[1].1 * w[0].0 * w[0].0))
}

// ---------------------------------------------------------------------------
// Verdicts

fn verdict_for(name: &str, params: &Map<String, Value>, rows: &[Map<String, Value>]) -> Verdict {
    match name {
        "cov-lower" => {
            let theory = match (param_u64(params, "d"), param_u64(params, "n")) {
                (Some(d), Some(n)) => n as f64 - 1.0 + 1.0 / d as f64,
                _ => f64::NAN,
            };
            slope_bracket(theory, rows)
        }
        "affine-lower" => {
            let theory = match (param_u64(params, "d"), param_u64(params, "n")) {
                (Some(d), Some(n)) => n as f64 - 2.0 + 1.0 / d as f64,
                _ => f64::NAN,
            };
            slope_bracket(theory, rows)
        }
        "quadric" => quadric_verdict(rows),
        "two-squares" => two_squares_verdict(rows),
        "multidim" => multidim_verdict(rows),
        "uniformity-sweep" => uniformity_verdict(rows),
        "reducible-fibers" => reducible_verdict(params, rows),
        "sieve-growth" => sieve_growth_verdict(params, rows),
        _ => Verdict {
            rule: "unknown experiment".into(),
            passed: None,
        },
    }
}

fn slope_bracket(theory: f64, rows: &[Map<String, Value>]) -> Verdict {
    Verdict {
        rule: format!("fitted slope within 0.1 of {theory:.6}"),
        passed: fit_rows(rows).ok().map(|f| (f.slope - theory).abs() <= 0.1),
    }
}

fn quadric_verdict(rows: &[Map<String, Value>]) -> Verdict {
    let rule = "count/B^2 and divisor_sum/B^2 strictly increase across the grid".to_string();
    if rows.len() < 2 {
        return Verdict { rule, passed: None };
    }
    let counts = strictly_increasing_over_b2(rows, "count");
    let divisors = strictly_increasing_over_b2(rows, "divisor_sum");
    Verdict {
        rule,
        passed: counts.zip(divisors).map(|(a, b)| a && b),
    }
}

fn two_squares_verdict(rows: &[Map<String, Value>]) -> Verdict {
    let passed = rows.first().and_then(|r| {
        let k = row_u64(r, "k")?;
        let count = row_u64(r, "count")?;
        let square = u64::from(k.sqrt() * k.sqrt() == k);
        Some(count == arith::r2(k) / 2 + square)
    });
    Verdict {
        rule: "count == r2(k)/2 + [k is a square]".into(),
        passed,
    }
}

fn multidim_verdict(rows: &[Map<String, Value>]) -> Verdict {
    let rule = "|sum_r2/prediction - 1| <= 0.1 at the largest B; sum_r2 == fiber_pair_sum and count == count_from_r2 where computed"
        .to_string();
    let last = rows.last().and_then(|r| {
        let sum = value_to_f64(r.get("sum_r2")?)?;
        let pred = value_to_f64(r.get("prediction")?)?;
        Some(pred > 0.0 && (sum / pred - 1.0).abs() <= 0.1)
    });
    let consistent = rows.iter().all(|r| {
        let same = |a: &str, b: &str| match (r.get(a).and_then(value_to_i128), r.get(b).and_then(value_to_i128)) {
            (Some(x), Some(y)) => x == y,
            _ => true,
        };
        same("sum_r2", "fiber_pair_sum") && same("count", "count_from_r2")
    });
    Verdict {
        rule,
        passed: last.map(|ok| ok && consistent),
    }
}

fn uniformity_verdict(rows: &[Map<String, Value>]) -> Verdict {
    let rule = "count strictly increases along the k list; count == expected where given".to_string();
    let counts: Option<Vec<u64>> = rows.iter().map(|r| row_u64(r, "count")).collect();
    let passed = counts.map(|c| {
        let growth = c.windows(2).all(|w| w[0] < w[1]);
        let exact = rows.iter().all(|r| match r.get("expected").and_then(value_to_i128) {
            Some(e) => row_u64(r, "count").map(i128::from) == Some(e),
            None => true,
        });
        growth && exact
    });
    Verdict {
        rule,
        passed: if rows.len() < 2 { None } else { passed },
    }
}

fn reducible_slope_cap(n: u64) -> f64 {
    match n {
        1 => 0.52,
        2 => 1.6,
        _ => n as f64 - 0.4,
    }
}

fn reducible_verdict(params: &Map<String, Value>, rows: &[Map<String, Value>]) -> Verdict {
    let n = param_u64(params, "n").unwrap_or(0);
    let cap = reducible_slope_cap(n);
    let contained = rows.iter().all(|r| match (row_u64(r, "cov"), row_u64(r, "count")) {
        (Some(c), Some(red)) => c <= red,
        _ => false,
    });
    let passed = if contained {
        fit_rows(rows).ok().map(|f| f.slope <= cap)
    } else {
        Some(false)
    };
    Verdict {
        rule: format!("fitted slope <= {cap}; cov <= count at every B"),
        passed,
    }
}

/// `bound / (B^(n - 1/2) ln B)`, undefined for `B < 2`.
pub fn sieve_normalized(bound: f64, b: u64, n: u64) -> Option<f64> {
    if b < 2 {
        return None;
    }
    let bf = b as f64;
    Some(bound / (bf.powf(n as f64 - 0.5) * bf.ln()))
}

fn sieve_growth_verdict(params: &Map<String, Value>, rows: &[Map<String, Value>]) -> Verdict {
    let cap = params.get("cap").and_then(value_to_f64).unwrap_or(f64::NAN);
    let n = param_u64(params, "n").unwrap_or(0);
    let rule = format!("normalized <= {cap} at every B; no later value exceeds twice an earlier one; bound >= exact where computed");
    let mut normalized = Vec::new();
    let mut sound = true;
    for r in rows {
        let (Some(b), Some(bound)) = (row_u64(r, "B"), r.get("bound").and_then(value_to_rational)) else {
            return Verdict { rule, passed: None };
        };
        if let Some(exact) = r.get("exact").and_then(value_to_i128) {
            sound &= bound >= BigRational::from_integer(BigInt::from(exact));
        }
        if let Some(v) = sieve_normalized(bound.to_f64().unwrap_or(f64::INFINITY), b, n) {
            normalized.push(v);
        }
    }
    let capped = normalized.iter().all(|&v| v <= cap);
    let steady = normalized
        .iter()
        .enumerate()
        .all(|(i, &a)| normalized[i + 1..].iter().all(|&later| later <= 2.0 * a));
    Verdict {
        rule,
        passed: Some(sound && capped && steady),
    }
}

// ---------------------------------------------------------------------------
// Experiments

/// `count_cov` of `Y^d - (X1 + ... + Xn)`; the fitted slope is compared with
/// `n - 1 + 1/d`.
pub fn exp_cov_lower(d: u32, n: usize, grid: &[u64], opts: &ExperimentOptions) -> Result<ExperimentReport, ExperimentError> {
    if d < 2 || n < 1 {
        return Err(ExperimentError::InvalidParameter("need d >= 2 and n >= 1".into()));
    }
    check_grid(grid)?;
    let f = poly(&format!("Y^{d} - ({})", x_sum(1, n)), n);
    let spec = CountSpec::Cov {
        poly: f.clone(),
        solvability: Solvability::Integral,
    };
    let series = counting::count_series(&spec, grid, opts.count)?;
    let fit = fit_exponent(&series);
    let mut stats = Map::new();
    stats.insert("poly".into(), json!(format_poly(&f)));
    stats.insert("fit".into(), fit_json(&fit));
    stats.insert("theory_exponent".into(), json_f64(n as f64 - 1.0 + 1.0 / d as f64));
    stats.insert("exponent_n_minus_1_over_d".into(), json_f64(n as f64 - 1.0 / d as f64));
    Ok(ExperimentReport::build(
        "cov-lower",
        json!({"d": d, "n": n, "B": grid_json(grid)}),
        series_rows(&series, opts),
        stats,
    ))
}

/// `count_aff` of `X1^d - (X2 + ... + Xn)`; the fitted slope is compared
/// with `n - 2 + 1/d`.
pub fn exp_affine_lower(d: u32, n: usize, grid: &[u64], opts: &ExperimentOptions) -> Result<ExperimentReport, ExperimentError> {
    if d < 2 || n < 3 {
        return Err(ExperimentError::InvalidParameter("need d >= 2 and n >= 3".into()));
    }
    check_grid(grid)?;
    let f = poly(&format!("X1^{d} - ({})", x_sum(2, n)), n);
    let series = counting::count_series(&CountSpec::Aff { poly: f.clone() }, grid, opts.count)?;
    let fit = fit_exponent(&series);
    let mut stats = Map::new();
    stats.insert("poly".into(), json!(format_poly(&f)));
    stats.insert("fit".into(), fit_json(&fit));
    stats.insert("theory_exponent".into(), json_f64(n as f64 - 2.0 + 1.0 / d as f64));
    Ok(ExperimentReport::build(
        "affine-lower",
        json!({"d": d, "n": n, "B": grid_json(grid)}),
        series_rows(&series, opts),
        stats,
    ))
}

pub const QUADRIC_MAX_HEIGHT: u64 = 512;

/// Projective points on `X1 X2 = X3 X4`, with `count / B^2` tracked against
/// the divisor sum `sum_{z <= B^2} tau(z)`.
pub fn exp_quadric(grid: &[u64], opts: &ExperimentOptions) -> Result<ExperimentReport, ExperimentError> {
    check_grid(grid)?;
    if let Some(&b) = grid.iter().find(|&&b| b == 0 || b > QUADRIC_MAX_HEIGHT) {
        return Err(ExperimentError::InvalidParameter(format!(
            "quadric heights must lie in 1..={QUADRIC_MAX_HEIGHT}, got {b}"
        )));
    }
    let f = poly("X1*X2 - X3*X4", 4);
    let mut rows = Vec::new();
    let mut log_points = Vec::new();
    for &b in grid {
        let start = Instant::now();
        let r = counting::count_proj(&f, b, opts.count)?;
        let b2 = (b * b) as f64;
        let dsum = arith::divisor_sum(b * b);
        log_points.push(((b as f64).ln(), dsum as f64 / b2));
        rows.push(into_map(json!({
            "B": json_int(b),
            "count": json_int(r.count),
            "count_over_B2": json_f64(r.count as f64 / b2),
            "divisor_sum": json_int(dsum),
            "divisor_sum_over_B2": json_f64(dsum as f64 / b2),
            "wall_time_s": opts.time(start),
        })));
    }
    let mut stats = Map::new();
    stats.insert("poly".into(), json!(format_poly(&f)));
    stats.insert("divisor_sum_slope_vs_ln_B".into(), linear_slope(&log_points).map_or(Value::Null, json_f64));
    Ok(ExperimentReport::build("quadric", json!({"B": grid_json(grid)}), rows, stats))
}

/// Ordinary least-squares slope of `y` on `x`.
fn linear_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn ceil_sqrt(k: u64) -> u64 {
    let s = k.sqrt();
    if s * s == k {
        s
    } else {
        s + 1
    }
}

fn is_square(k: u64) -> bool {
    let s = k.sqrt();
    s * s == k
}

/// Number of `x1` in `[-B, B]` with `k - x1^2` a square, against `r2(k)/2`.
pub fn exp_two_squares(k: u64, b: u64, opts: &ExperimentOptions) -> Result<ExperimentReport, ExperimentError> {
    if k == 0 {
        return Err(ExperimentError::InvalidParameter("k must be at least 1".into()));
    }
    let min = ceil_sqrt(k);
    if b < min {
        return Err(ExperimentError::HeightBelowRoot { k, b, min });
    }
    let start = Instant::now();
    let f = poly(&format!("Y^2 + X1^2 - {k}"), 1);
    let count = counting::count_cov(&f, b, Solvability::Integral, opts.count)?.count;
    let r = arith::r2(k);
    let omega = arith::omega(k)?;
    let row = into_map(json!({
        "k": json_int(k),
        "B": json_int(b),
        "count": json_int(count),
        "r2": json_int(r),
        "r2_half": json_int(r / 2),
        "k_is_square": is_square(k),
        "omega": omega,
        "two_pow_omega": json_int(1u64 << omega),
        "wall_time_s": opts.time(start),
    }));
    let mut stats = Map::new();
    stats.insert("poly".into(), json!(format_poly(&f)));
    stats.insert("equals_r2_half".into(), json!(count == r / 2));
    Ok(ExperimentReport::build("two-squares", json!({"k": k, "B": b}), vec![row], stats))
}

/// `sum_{d | k} mu(d) chi(d) r2(k/d) / d`, exactly.
pub fn main_term_factor(k: u64) -> Result<BigRational, ArithError> {
    let mut s = BigRational::zero();
    for d in arith::factorize(k)?.divisors() {
        let sign = arith::mu(d)? * arith::chi4(d)?;
        if sign != 0 {
            s += BigRational::new(BigInt::from(i64::from(sign) * arith::r2(k / d) as i64), BigInt::from(d));
        }
    }
    Ok(s)
}

const FIBER_SCAN_BUDGET: u64 = 50_000_000;

/// Pairs `(y, x1)` with `y^2 + x1^2 = k z`, summed over `0 <= z <= Z` by
/// running the restricted counter on each `z`-fiber.
fn fiber_pair_sum(k: u64, z_max: u64, opts: CountOptions) -> Result<u64, ExperimentError> {
    let mut total = 0;
    for z in 0..=z_max {
        let m = k * z;
        let f = poly(&format!("Y^2 + X1^2 - {m}"), 1);
        let s = m.sqrt();
        total += counting::count_cov_restricted(&f, s, s, RestrictedCount::Pairs, opts)?.count;
    }
    Ok(total)
}

/// `count_cov` of `Y^2 + X1^2 - k (X2 + ... + Xn)` against the sum
/// `sum_{0 <= z <= (n-1)B} r2(kz)` and its main term
/// `(pi Z / 4) sum_{d | k} mu(d) chi(d) r2(k/d) / d` with `Z = (n-1)B`.
/// Negative `z` give no solutions, so only `z >= 0` enters the sum.
pub fn exp_multidim(k: u64, n: usize, grid: &[u64], opts: &ExperimentOptions) -> Result<ExperimentReport, ExperimentError> {
    if n < 2 || k == 0 {
        return Err(ExperimentError::InvalidParameter("need n >= 2 and k >= 1".into()));
    }
    check_grid(grid)?;
    let f = poly(&format!("Y^2 + X1^2 - {k}*({})", x_sum(2, n)), n);
    let factor = main_term_factor(k)?;
    let factor_f = factor.to_f64().unwrap_or(f64::NAN);
    let rk = arith::r2(k);
    let mut rows = Vec::new();
    for &b in grid {
        let start = Instant::now();
        let count = counting::count_cov(&f, b, Solvability::Integral, opts.count)?.count;
        let z_max = (n as u64 - 1) * b;
        let m_max = k.checked_mul(z_max).ok_or(ArithError::Overflow)?;
        let sum_r2: u64 = (0..=z_max).map(|z| arith::r2(k * z)).sum();
        let prediction = PI * z_max as f64 / 4.0 * factor_f;
        let prediction_literal = PI * b as f64 * factor_f;
        let fiber_pairs = if z_max.saturating_mul(m_max.sqrt() + 1) <= FIBER_SCAN_BUDGET {
            json_int(fiber_pair_sum(k, z_max, opts.count)?)
        } else {
            Value::Null
        };
        // With n = 2 and k <= B every solution x1 lies in the box, and each
        // z = x2 > 0 contributes r2(kz)/2 + [kz square] values of x1.
        let from_r2 = if n == 2 && k <= b {
            let s: u64 = (1..=b).map(|z| arith::r2(k * z) / 2 + u64::from(is_square(k * z))).sum();
            json_int(1 + s)
        } else {
            Value::Null
        };
        let scale = (b as f64).powi(n as i32 - 1) * rk as f64;
        rows.push(into_map(json!({
            "B": json_int(b),
            "Z": json_int(z_max),
            "count": json_int(count),
            "sum_r2": json_int(sum_r2),
            "prediction": json_f64(prediction),
            "prediction_literal": json_f64(prediction_literal),
            "sum_over_prediction": json_f64(sum_r2 as f64 / prediction),
            "count_over_scale": if rk > 0 { json_f64(count as f64 / scale) } else { Value::Null },
            "fiber_pair_sum": fiber_pairs,
            "count_from_r2": from_r2,
            "wall_time_s": opts.time(start),
        })));
    }
    let mut stats = Map::new();
    stats.insert("poly".into(), json!(format_poly(&f)));
    stats.insert("r2_k".into(), json_int(rk));
    stats.insert("main_term_factor".into(), json_rational(&factor));
    stats.insert(
        "z_range".into(),
        json!("0 <= z <= (n-1)B; z = x2 + ... + xn < 0 has no solutions"),
    );
    Ok(ExperimentReport::build(
        "multidim",
        json!({"k": k, "n": n, "B": grid_json(grid)}),
        rows,
        stats,
    ))
}

/// Counts for a list of `k` at fixed `B`: `Y^2 + X1^2 - k` when `n = 1`,
/// `Y^2 + X1^2 - k (X2 + ... + Xn)` otherwise.
pub fn exp_uniformity_sweep(n: usize, b: u64, ks: &[u64], opts: &ExperimentOptions) -> Result<ExperimentReport, ExperimentError> {
    if n < 1 {
        return Err(ExperimentError::InvalidParameter("need n >= 1".into()));
    }
    if ks.is_empty() || ks.contains(&0) {
        return Err(ExperimentError::InvalidParameter("k list must be nonempty with every k >= 1".into()));
    }
    let mut rows = Vec::new();
    for &k in ks {
        let start = Instant::now();
        let f = if n == 1 {
            poly(&format!("Y^2 + X1^2 - {k}"), 1)
        } else {
            poly(&format!("Y^2 + X1^2 - {k}*({})", x_sum(2, n)), n)
        };
        let count = counting::count_cov(&f, b, Solvability::Integral, opts.count)?.count;
        let omega = arith::omega(k)?;
        let r = arith::r2(k);
        let expected = if n == 1 && b >= ceil_sqrt(k) {
            json_int(r / 2 + u64::from(is_square(k)))
        } else {
            Value::Null
        };
        rows.push(into_map(json!({
            "k": json_int(k),
            "count": json_int(count),
            "ratio": json_f64(count as f64 / (b as f64).powi(n as i32 - 1)),
            "omega": omega,
            "two_pow_omega": json_int(1u64 << omega),
            "r2": json_int(r),
            "expected": expected,
            "wall_time_s": opts.time(start),
        })));
    }
    let mut stats = Map::new();
    if b >= 3 {
        let full = arith::construct_k(b, KVariant::FullRange)?;
        let dyadic = arith::construct_k(b, KVariant::Dyadic)?;
        stats.insert("log_threshold".into(), json_int(full.threshold));
        stats.insert("k_full_range".into(), json_int(full.k));
        stats.insert("k_dyadic".into(), json_int(dyadic.k));
    }
    Ok(ExperimentReport::build(
        "uniformity-sweep",
        json!({"n": n, "B": b, "k": ks.iter().map(|&k| json_int(k)).collect::<Vec<_>>()}),
        rows,
        stats,
    ))
}

/// `count_reducible_fibers` with the containment `count_cov <= count` at
/// every height.
pub fn exp_reducible_fibers(f: &MPoly, grid: &[u64], opts: &ExperimentOptions) -> Result<ExperimentReport, ExperimentError> {
    check_grid(grid)?;
    let series = counting::count_series(&CountSpec::ReducibleFibers { poly: f.clone() }, grid, opts.count)?;
    let mut rows = series_rows(&series, opts);
    for row in &mut rows {
        let b = row_u64(row, "B").expect("B was written");
        let cov = counting::count_cov(f, b, Solvability::Integral, opts.count)?.count;
        let time = row.remove("wall_time_s").unwrap_or(Value::Null);
        row.insert("cov".into(), json_int(cov));
        row.insert("wall_time_s".into(), time);
    }
    let mut stats = Map::new();
    stats.insert("fit".into(), fit_json(&fit_exponent(&series)));
    stats.insert("theory_exponent".into(), json_f64(f.nvars() as f64 - 0.5));
    Ok(ExperimentReport::build(
        "reducible-fibers",
        json!({"poly": format_poly(f), "n": f.nvars(), "B": grid_json(grid)}),
        rows,
        stats,
    ))
}

pub const DEFAULT_SIEVE_CAP: f64 = 50.0;
pub const DEFAULT_EXACT_LIMIT: u64 = 500_000_000;

/// Large-sieve bound at each height, normalized by `B^(n - 1/2) ln B`, with
/// the exact count where the box has at most `exact_limit` points.
pub fn exp_sieve_growth(
    f: &MPoly,
    grid: &[u64],
    cap: f64,
    exact_limit: u64,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport, ExperimentError> {
    check_grid(grid)?;
    if !(cap > 0.0) {
        return Err(ExperimentError::InvalidParameter("cap must be positive".into()));
    }
    let n = f.nvars() as u64;
    let mut rows = Vec::new();
    for &b in grid {
        let start = Instant::now();
        let report = sieve::large_sieve_bound(f, b, &SieveParams::default(), opts.count)?;
        let points = (2 * b + 1).checked_pow(n as u32);
        let exact = match points {
            Some(p) if p <= exact_limit => {
                Some(counting::count_cov(f, b, Solvability::Integral, opts.count)?.count)
            }
            _ => None,
        };
        let bound_f = report.bound.to_f64().unwrap_or(f64::INFINITY);
        rows.push(into_map(json!({
            "B": json_int(b),
            "Q": json_int(report.q),
            "L_mode": report.mode.as_str(),
            "bound": json_rational(&report.bound),
            "exact": exact.map_or(Value::Null, json_int),
            "sound": exact.map(|e| report.bound >= BigRational::from_integer(BigInt::from(e))),
            "normalized": sieve_normalized(bound_f, b, n).map_or(Value::Null, json_f64),
            "wall_time_s": opts.time(start),
        })));
    }
    let mut stats = Map::new();
    stats.insert("degree_one_control".into(), json!(f.deg_y() == Some(1)));
    Ok(ExperimentReport::build(
        "sieve-growth",
        json!({"poly": format_poly(f), "n": n, "B": grid_json(grid), "cap": json_f64(cap), "exact_limit": json_int(exact_limit)}),
        rows,
        stats,
    ))
}
