//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thinlab::arith;
use thinlab::counting::{self, CountOptions, RestrictedCount, Solvability};
use thinlab::experiments::{self, ExperimentOptions};
use thinlab::parse::parse_poly;
use thinlab::poly::MPoly;
use thinlab::report;
use thinlab::sieve::{self, SieveParams};
use thinlab::upoly::{factor_over_z, UPoly};

type Outcome = Result<String, String>;

fn poly(s: &str, n: usize) -> MPoly {
    parse_poly(s, n).unwrap()
}

fn opts(workers: usize) -> CountOptions {
    CountOptions { workers }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn worker_count() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get()).min(16)
}

/// Squarefree products of 1 to 4 distinct primes `= 1 mod 4`, all `<= 10^6`.
fn generated_ks(count: usize, seed: u64) -> Vec<u64> {
    let primes = arith::primes_in_class(1000, 1, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ks = Vec::new();
    while ks.len() < count {
        let size = rng.gen_range(1..=4);
        let mut chosen: Vec<u64> = Vec::new();
        while chosen.len() < size {
            let p = primes[rng.gen_range(0..primes.len())];
            if !chosen.contains(&p) {
                chosen.push(p);
            }
        }
        let k = chosen.iter().try_fold(1u64, |acc, &p| acc.checked_mul(p)).unwrap_or(u64::MAX);
        if k <= 1_000_000 && !ks.contains(&k) {
            ks.push(k);
        }
    }
    ks
}

fn qualifies(k: u64) -> bool {
    let f = arith::factorize(k).unwrap();
    f.factors.iter().all(|&(p, e)| e == 1 && p % 4 == 1)
}

fn two_squares_identity() -> Outcome {
    let ks = generated_ks(50, 1);
    for &k in &ks {
        let b = {
            let s = k.sqrt();
            if s * s == k { s } else { s + 1 }
        };
        let count = counting::count_cov(&poly(&format!("Y^2 + X1^2 - {k}"), 1), b, Solvability::Integral, opts(1))
            .map_err(|e| e.to_string())?
            .count;
        ensure(count == arith::r2(k) / 2, || format!("k = {k}: count {count}, r2/2 = {}", arith::r2(k) / 2))?;
    }
    Ok(format!("{} values of k, largest {}", ks.len(), ks.iter().max().unwrap()))
}

fn r2_formula() -> Outcome {
    let mut qualifying = 0;
    for k in 1..=10_000u64 {
        let r = arith::r2(k);
        ensure(r == arith::r2_bruteforce(k), || format!("r2({k}) = {r} disagrees with enumeration"))?;
        if qualifies(k) {
            qualifying += 1;
            let w = arith::omega(k).unwrap();
            ensure(r == 4 << w, || format!("r2({k}) = {r} != 4 * 2^{w}"))?;
        }
    }
    Ok(format!("k <= 10000, {qualifying} qualifying squarefree k"))
}

fn busche_ramanujan() -> Outcome {
    for m1 in 1..=300 {
        for m2 in 1..=300 {
            let c = arith::busche_ramanujan_check(m1, m2).map_err(|e| e.to_string())?;
            ensure(c.holds_normalized, || format!("normalized identity fails at ({m1}, {m2})"))?;
        }
    }
    let c = arith::busche_ramanujan_check(1, 1).map_err(|e| e.to_string())?;
    ensure(c.lhs as i64 != c.rhs_literal, || "literal form unexpectedly holds at (1, 1)".into())?;
    Ok(format!("90000 pairs; literal form at (1,1): r(1) = {} vs {}", c.lhs, c.rhs_literal))
}

fn gauss_circle() -> Outcome {
    let mut worst = 0.0f64;
    for x in [1_000u64, 10_000, 100_000, 1_000_000] {
        let g = arith::gauss_circle_sum(x).map_err(|e| e.to_string())?;
        let limit = 10.0 * (x as f64).sqrt();
        ensure(g.error.abs() <= limit, || format!("X = {x}: |error| = {} > {limit}", g.error.abs()))?;
        worst = worst.max(g.error.abs() / (x as f64).sqrt());
    }
    Ok(format!("max |error|/sqrt(X) = {worst:.3}"))
}

/// Fixed suite: degrees 2 to 4 in Y, one to three X variables.
fn suite() -> Vec<(&'static str, usize)> {
    vec![
        ("Y^2 - X1", 1),
        ("Y^3 - X1", 1),
        ("Y^4 - X1^2 - 1", 1),
        ("Y^2 - (X1^3 + X1 + 1)", 1),
        ("Y^2 - (X1 + X2)", 2),
        ("Y^2 + X1^2 - 5*X2", 2),
        ("Y^3 - X1*X2", 2),
        ("Y^4 - X1 - X2^2", 2),
        ("Y^2 - (X1 + X2 + X3)", 3),
        ("Y^3 - X1 - X2*X3", 3),
    ]
}

fn sieve_soundness() -> Outcome {
    let w = worker_count();
    let mut checked = 0;
    for (text, n) in suite() {
        let f = poly(text, n);
        for b in [100u64, 1_000, 10_000] {
            let points = (2 * b + 1).pow(n as u32);
            if points > 500_000_000 {
                continue;
            }
            let bound = sieve::large_sieve_bound(&f, b, &SieveParams::default(), opts(w))
                .map_err(|e| e.to_string())?
                .bound;
            let exact = counting::count_cov(&f, b, Solvability::Integral, opts(w)).map_err(|e| e.to_string())?.count;
            ensure(bound >= BigRational::from_integer(BigInt::from(exact)), || {
                format!("{text} at B = {b}: bound {bound} < exact {exact}")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (polynomial, B) pairs, zero violations"))
}

fn sieve_growth() -> Outcome {
    let f = poly("Y^2 - (X1 + X2)", 2);
    let grid = [100u64, 1_000, 10_000];
    let r = experiments::exp_sieve_growth(&f, &grid, 50.0, 0, &ExperimentOptions { count: opts(worker_count()), timings: false })
        .map_err(|e| e.to_string())?;
    let normalized: Vec<f64> = r.rows.iter().map(|row| row["normalized"].as_f64().unwrap_or(f64::NAN)).collect();
    ensure(normalized.iter().all(|&v| v <= 50.0), || format!("normalized {normalized:?} exceeds 50"))?;
    let steady = (0..normalized.len()).all(|i| normalized[i + 1..].iter().all(|&v| v <= 2.0 * normalized[i]));
    ensure(steady, || format!("normalized {normalized:?} more than doubles"))?;
    ensure(r.verdict.passed == Some(true), || format!("verdict {:?}", r.verdict))?;
    Ok(format!("normalized {}", normalized.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", ")))
}

fn exponent_brackets() -> Outcome {
    let grid: Vec<u64> = (4..=10).map(|e| 1u64 << e).collect();
    let o = opts(worker_count());
    let cov = counting::count_series(
        &counting::CountSpec::Cov { poly: poly("Y^2 - (X1 + X2)", 2), solvability: Solvability::Integral },
        &grid,
        o,
    )
    .map_err(|e| e.to_string())?;
    let aff = counting::count_series(&counting::CountSpec::Aff { poly: poly("X1^2 - (X2 + X3)", 3) }, &grid, o)
        .map_err(|e| e.to_string())?;
    let s_cov = experiments::fit_exponent(&cov).map_err(|e| e.to_string())?.slope;
    let s_aff = experiments::fit_exponent(&aff).map_err(|e| e.to_string())?.slope;
    ensure((1.4..=1.6).contains(&s_cov), || format!("cov slope {s_cov}"))?;
    ensure((1.4..=1.6).contains(&s_aff), || format!("aff slope {s_aff}"))?;
    Ok(format!("cov slope {s_cov:.4}, aff slope {s_aff:.4}"))
}

fn quadric_signature() -> Outcome {
    let r = experiments::exp_quadric(&[8, 16, 32, 64], &ExperimentOptions { count: opts(worker_count()), timings: false })
        .map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = r.rows.iter().map(|row| row["count_over_B2"].as_f64().unwrap()).collect();
    let increasing = r
        .rows
        .windows(2)
        .all(|w| {
            let (b0, c0) = (w[0]["B"].as_u64().unwrap() as u128, w[0]["count"].as_u64().unwrap() as u128);
            let (b1, c1) = (w[1]["B"].as_u64().unwrap() as u128, w[1]["count"].as_u64().unwrap() as u128);
            c0 * b1 * b1 < c1 * b0 * b0
        });
    ensure(increasing, || format!("count/B^2 = {ratios:?}"))?;
    Ok(format!("count/B^2 = {}", ratios.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")))
}

fn reducible_scaling() -> Outcome {
    let f = poly("Y^2 - X1", 1);
    let o = opts(worker_count());
    let mut points = Vec::new();
    for b in [100u64, 1_000, 10_000, 100_000, 1_000_000] {
        let c = counting::count_reducible_fibers(&f, b, o).map_err(|e| e.to_string())?.count;
        ensure(c == b.sqrt() + 1, || format!("B = {b}: {c} != floor(sqrt(B)) + 1"))?;
        points.push((b, c));
    }
    let slope = experiments::fit_points(&points).map_err(|e| e.to_string())?.slope;
    ensure((slope - 0.5).abs() <= 0.02, || format!("slope {slope}"))?;
    for (text, n) in suite() {
        let b = if n == 3 { 20 } else { 100 };
        let c = counting::containment_check(&poly(text, n), b, o).map_err(|e| e.to_string())?;
        ensure(c.holds, || format!("{text} at B = {b}: cov {} > reducible {}", c.cov, c.reducible))?;
    }
    Ok(format!("slope {slope:.4}; containment on {} polynomials", suite().len()))
}

/// Irreducibility over Z of a primitive polynomial of degree at most 4 by
/// searching for linear and quadratic factors directly.
fn brute_irreducible(c: &[i64]) -> bool {
    let d = c.len() - 1;
    if d <= 1 {
        return true;
    }
    let (c0, lc) = (c[0], c[d]);
    if c0 == 0 {
        return false;
    }
    let divisors = |v: i64| -> Vec<i64> { (1..=v.abs()).filter(|q| v % q == 0).collect() };
    let eval = |num: i64, den: i64| -> i128 {
        // den^d f(num/den)
        c.iter()
            .enumerate()
            .map(|(i, &ci)| ci as i128 * (num as i128).pow(i as u32) * (den as i128).pow((d - i) as u32))
            .sum()
    };
    for a in divisors(lc) {
        for r in divisors(c0) {
            if eval(r, a) == 0 || eval(-r, a) == 0 {
                return false;
            }
        }
    }
    if d < 4 {
        return true;
    }
    // quadratic factor a Y^2 + m Y + s with a | lc, s | c0
    let norm = (c.iter().map(|&x| (x as f64).powi(2)).sum::<f64>()).sqrt();
    let mb = (2.0 * norm).ceil() as i64 + 1;
    for a in divisors(lc) {
        for s0 in divisors(c0) {
            for s in [s0, -s0] {
                for m in -mb..=mb {
                    if divides_quadratic(c, a, m, s) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn divides_quadratic(c: &[i64], a: i64, m: i64, s: i64) -> bool {
    // long division from the top, exact over Z
    let mut rem: Vec<i128> = c.iter().map(|&x| x as i128).collect();
    let (a, m, s) = (a as i128, m as i128, s as i128);
    for top in (2..rem.len()).rev() {
        if rem[top] % a != 0 {
            return false;
        }
        let q = rem[top] / a;
        rem[top] = 0;
        rem[top - 1] -= q * m;
        rem[top - 2] -= q * s;
    }
    rem[0] == 0 && rem[1] == 0
}

fn random_irreducible(rng: &mut ChaCha8Rng) -> Vec<i64> {
    loop {
        let d = rng.gen_range(1..=4);
        let mut c: Vec<i64> = (0..=d).map(|_| rng.gen_range(-20..=20)).collect();
        if c[d] == 0 {
            continue;
        }
        if c[d] < 0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        let g = c.iter().fold(0i64, |g, &x| num_integer::Integer::gcd(&g, &x));
        if g != 1 {
            continue;
        }
        if brute_irreducible(&c) {
            return c;
        }
    }
}

fn factor_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..1000 {
        let mut expected: BTreeMap<UPoly, u32> = BTreeMap::new();
        let mut product = UPoly::constant(1);
        for _ in 0..rng.gen_range(1..=4) {
            let f = UPoly::from_i64s(&random_irreducible(&mut rng));
            product = product.mul(&f);
            *expected.entry(f).or_default() += 1;
        }
        let got = factor_over_z(&product).map_err(|e| e.to_string())?;
        ensure(got.expand() == product, || format!("trial {trial}: reconstruction differs for {product}"))?;
        let mut found: BTreeMap<UPoly, u32> = BTreeMap::new();
        for (f, m) in &got.factors {
            *found.entry(f.clone()).or_default() += m;
        }
        ensure(found == expected && got.content == BigInt::from(1), || {
            format!("trial {trial}: {product} factored as {found:?}, expected {expected:?}")
        })?;
    }
    Ok("1000 products".into())
}

fn schwartz_zippel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let primes = arith::primes_upto(97);
    let mut worst = 0.0f64;
    for trial in 0..500 {
        let p = primes[rng.gen_range(0..primes.len())];
        let n = rng.gen_range(1..=3usize);
        let deg = rng.gen_range(1..=5u32);
        let f = loop {
            let terms = (0..rng.gen_range(1..=6)).map(|_| {
                let mut e = vec![0u32; n + 1];
                let mut budget = rng.gen_range(0..=deg);
                for slot in e.iter_mut().skip(1) {
                    let take = rng.gen_range(0..=budget);
                    *slot = take;
                    budget -= take;
                }
                (e, BigInt::from(rng.gen_range(1..p)))
            });
            let f = MPoly::from_terms(n, terms);
            if !f.reduce_mod_p(p).unwrap().is_zero() {
                break f;
            }
        };
        let s = counting::schwartz_zippel_check(&f, p, opts(1)).map_err(|e| e.to_string())?;
        ensure(s.holds, || format!("trial {trial}: {f} mod {p} has {} zeros > {}", s.zeros, s.bound))?;
        if s.bound > 0 {
            worst = worst.max(s.zeros as f64 / s.bound as f64);
        }
    }
    Ok(format!("500 polynomials, max zeros/bound = {worst:.3}"))
}

fn hasse_check() -> Outcome {
    let f = poly("Y^2 - (X1^3 + X1 + 1)", 1);
    let scan = counting::lang_weil_scan(&f, 500, opts(1)).map_err(|e| e.to_string())?;
    ensure(!scan.rows.is_empty(), || "no good primes".into())?;
    for row in &scan.rows {
        let limit = 2.0 * (row.p as f64).sqrt();
        ensure((row.error as f64).abs() <= limit, || format!("p = {}: |Mp - p| = {} > {limit}", row.p, row.error.abs()))?;
    }
    let skipped: Vec<u64> = scan.skipped.iter().map(|s| s.0).collect();
    Ok(format!("{} good primes, skipped {skipped:?}", scan.rows.len()))
}

fn uniformity() -> Outcome {
    let ks = [5u64, 65, 1105, 32045, 1185665];
    let r = experiments::exp_uniformity_sweep(1, 10_000, &ks, &ExperimentOptions::default()).map_err(|e| e.to_string())?;
    let counts: Vec<u64> = r.rows.iter().map(|row| row["count"].as_u64().unwrap()).collect();
    for (i, (&k, &c)) in ks.iter().zip(&counts).enumerate() {
        let w = arith::omega(k).unwrap();
        ensure(w as usize == i + 1, || format!("omega({k}) = {w}"))?;
        ensure(c == arith::r2(k) / 2 && c == 2 << w, || format!("k = {k}: count {c}, expected {}", 2 << w))?;
    }
    ensure(counts.windows(2).all(|p| p[1] == 2 * p[0]), || format!("counts {counts:?} do not double"))?;
    Ok(format!("counts {counts:?}"))
}

fn determinism() -> Outcome {
    let run = |w: usize| -> Result<String, String> {
        let o = opts(w);
        let e = |e: &dyn std::fmt::Display| e.to_string();
        let mut out = Vec::new();
        for (text, n) in suite() {
            let f = poly(text, n);
            let b = if n == 3 { 12 } else { 60 };
            out.push(report::count_result_json(&counting::count_cov(&f, b, Solvability::Integral, o).map_err(|x| e(&x))?, false));
            out.push(report::count_result_json(&counting::count_cov(&f, b, Solvability::Rational, o).map_err(|x| e(&x))?, false));
            out.push(report::count_result_json(
                &counting::count_cov_restricted(&f, b, b, RestrictedCount::Pairs, o).map_err(|x| e(&x))?,
                false,
            ));
            out.push(report::count_result_json(&counting::count_reducible_fibers(&f, b, o).map_err(|x| e(&x))?, false));
            let mc = counting::np_mp(&f, 13, o).map_err(|x| e(&x))?;
            out.push(serde_json::json!([mc.np, mc.mp, mc.np_nonvanishing, mc.identically_zero_fibers]));
            out.push(report::sieve_report_json(&sieve::large_sieve_bound(&f, b, &SieveParams::default(), o).map_err(|x| e(&x))?));
        }
        out.push(report::count_result_json(&counting::count_aff(&poly("X1^2 - (X2 + X3)", 3), 20, o).map_err(|x| e(&x))?, false));
        out.push(report::count_result_json(&counting::count_proj(&poly("X1*X2 - X3*X4", 4), 10, o).map_err(|x| e(&x))?, false));
        serde_json::to_string(&out).map_err(|x| e(&x))
    };
    let base = run(1)?;
    for w in [2, 8] {
        let other = run(w)?;
        ensure(other == base, || format!("output differs between 1 and {w} workers"))?;
    }
    Ok(format!("{} bytes identical for workers 1, 2, 8", base.len()))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("two-squares identity", two_squares_identity),
        ("r2 formula", r2_formula),
        ("normalized Busche-Ramanujan", busche_ramanujan),
        ("Gauss circle", gauss_circle),
        ("sieve soundness", sieve_soundness),
        ("sieve growth", sieve_growth),
        ("exponent brackets", exponent_brackets),
        ("quadric log signature", quadric_signature),
        ("reducible-fiber scaling", reducible_scaling),
        ("factorization round-trip", factor_round_trip),
        ("Schwartz-Zippel", schwartz_zippel),
        ("Hasse bound", hasse_check),
        ("uniformity counterexample", uniformity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
