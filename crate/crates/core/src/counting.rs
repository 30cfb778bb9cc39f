//! Exact point counts: integer points in boxes `[-B, B]^n` and points over
//! prime fields.
//!
//! Every box counter slices `F` into univariate fibers in one variable and
//! enumerates the remaining coordinates. Fibers are evaluated in `i128`
//! whenever an a-priori bound on the fiber coefficients allows it, with a
//! big-integer path otherwise.

use std::ops::AddAssign;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::is_prime;
use crate::poly::{MPoly, PolyError};
use crate::upoly::{self, fp::FpPoly, UPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("polynomial is zero")]
    ZeroPolynomial,
    #[error("polynomial does not involve Y")]
    NoYDependence,
    #[error("polynomial must not involve Y")]
    DependsOnY,
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("leading coefficient in Y is not constant")]
    NonConstantLeading,
    #[error("degree in Y must be at least {min}, found {found}")]
    DegreeTooLow { min: u32, found: u32 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("polynomial vanishes identically modulo {0}")]
    BadPrime(u64),
    #[error("modulus {0} is too large (must be below 2^32)")]
    ModulusTooLarge(u64),
    #[error("height {0} is too large for enumeration")]
    HeightTooLarge(u64),
    #[error("height grid is empty")]
    EmptyGrid,
    #[error("height grid must be strictly increasing")]
    GridNotIncreasing,
    #[error("count decreased at B = {0}")]
    NotMonotone(u64),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountMode {
    Cov,
    CovRestricted,
    Aff,
    Proj,
    ReducibleFibers,
    Np,
    Mp,
}

impl CountMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CountMode::Cov => "cov",
            CountMode::CovRestricted => "cov-restricted",
            CountMode::Aff => "aff",
            CountMode::Proj => "proj",
            CountMode::ReducibleFibers => "reducible-fibers",
            CountMode::Np => "np",
            CountMode::Mp => "mp",
        }
    }
}

/// Whether a fiber counts as solvable when it has an integer root or merely
/// a rational one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solvability {
    #[default]
    Integral,
    Rational,
}

/// The restricted count either counts pairs `(y, x)` or the points `x`
/// admitting at least one bounded `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RestrictedCount {
    #[default]
    Pairs,
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountOptions {
    /// Number of slices of the outermost coordinate counted concurrently.
    pub workers: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { workers: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub count: u64,
    pub b: u64,
    pub mode: CountMode,
    /// Fibers on which the specialization vanishes identically; these are
    /// included in `count`.
    pub identically_zero_fibers: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    pub mode: CountMode,
    pub entries: Vec<CountResult>,
}

impl CountSeries {
    pub fn points(&self) -> Vec<(u64, u64)> {
        self.entries.iter().map(|e| (e.b, e.count)).collect()
    }
}

/// Which box counter to run, with its fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum CountSpec {
    Cov { poly: MPoly, solvability: Solvability },
    CovRestricted { poly: MPoly, y_bound: u64, variant: RestrictedCount },
    Aff { poly: MPoly },
    Proj { poly: MPoly },
    ReducibleFibers { poly: MPoly },
}

const MAX_HEIGHT: u64 = 1 << 31;
/// Fiber coefficients below this bound keep every intermediate of the fast
/// root tests (discriminants included) inside `i128`.
const SMALL_COEFF_BITS: u64 = 60;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    count: u64,
    zero: u64,
    extra: u64,
    aux: u64,
}

impl AddAssign for Tally {
    fn add_assign(&mut self, o: Tally) {
        self.count += o.count;
        self.zero += o.zero;
        self.extra += o.extra;
        self.aux += o.aux;
    }
}

/// Sums `slice_fn` over contiguous slices of `[lo, hi]`, one per worker.
fn sum_slices<F>(lo: i64, hi: i64, workers: usize, slice_fn: F) -> Tally
where
    F: Fn(i64, i64) -> Tally + Sync,
{
    let len = (hi - lo + 1) as u64;
    let w = (workers.max(1) as u64).min(len.max(1));
    if w <= 1 {
        return slice_fn(lo, hi);
    }
    let ranges: Vec<(i64, i64)> = (0..w)
        .map(|i| {
            let a = lo + (len * i / w) as i64;
            let b = lo + (len * (i + 1) / w) as i64 - 1;
            (a, b)
        })
        .collect();
    let parts: Vec<Tally> = std::thread::scope(|s| {
        let handles: Vec<_> = ranges
            .iter()
            .map(|&(a, b)| {
                let f = &slice_fn;
                s.spawn(move || f(a, b))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("counting worker panicked")).collect()
    });
    let mut total = Tally::default();
    for t in parts {
        total += t;
    }
    total
}

fn check_height(b: u64, dims: usize) -> Result<(), CountError> {
    if b > MAX_HEIGHT {
        return Err(CountError::HeightTooLarge(b));
    }
    let side = 2 * b + 1;
    let mut total: u64 = 1;
    for _ in 0..dims {
        total = total.checked_mul(side).ok_or(CountError::HeightTooLarge(b))?;
    }
    Ok(())
}

enum Fiber<'a> {
    Small(&'a [i128]),
    Big(&'a UPoly),
}

struct Term {
    j: usize,
    coef: i128,
    exps: Vec<u32>,
}

/// `g` viewed as a polynomial in its position-0 variable with coefficients
/// in the remaining `nbox` variables.
struct Kernel {
    nbox: usize,
    deg: usize,
    terms: Vec<Term>,
    max_exp: Vec<u32>,
    poly: MPoly,
    small: bool,
}

impl Kernel {
    fn new(g: &MPoly, b: u64) -> Kernel {
        let nbox = g.nvars();
        let deg = g.deg_y().unwrap_or(0) as usize;
        let mut max_exp = vec![0u32; nbox];
        let mut bounds = vec![BigInt::zero(); deg + 1];
        let bb = BigInt::from(b);
        let mut terms = Vec::new();
        let mut small = true;
        for (m, c) in g.terms() {
            let e = m.exponents();
            let j = e[0] as usize;
            let exps = e[1..].to_vec();
            for (k, &x) in exps.iter().enumerate() {
                max_exp[k] = max_exp[k].max(x);
            }
            let tdeg: u32 = exps.iter().sum();
            bounds[j] += c.abs() * num_traits::pow(bb.clone(), tdeg as usize);
            match c.to_i128() {
                Some(coef) => terms.push(Term { j, coef, exps }),
                None => small = false,
            }
        }
        let cap = BigInt::one() << SMALL_COEFF_BITS;
        if bounds.iter().any(|v| *v > cap) {
            small = false;
        }
        Kernel {
            nbox,
            deg,
            terms,
            max_exp,
            poly: g.clone(),
            small,
        }
    }

    /// Visits every fiber whose first box coordinate lies in `[lo, hi]` (all
    /// other coordinates range over `[-b, b]`). With no box coordinates the
    /// single fiber is visited once.
    fn for_each_fiber(&self, b: i64, lo: i64, hi: i64, mut visit: impl FnMut(&[i64], Fiber<'_>)) {
        let n = self.nbox;
        if n == 0 {
            if self.small {
                let mut a = vec![0i128; self.deg + 1];
                for t in &self.terms {
                    a[t.j] += t.coef;
                }
                visit(&[], Fiber::Small(&a));
            } else {
                let g = self.poly.specialize_x_i64(&[]).expect("dimension");
                visit(&[], Fiber::Big(&g));
            }
            return;
        }
        if lo > hi {
            return;
        }
        let mut x = vec![-b; n];
        x[0] = lo;
        if !self.small {
            loop {
                let g = self.poly.specialize_x_i64(&x).expect("dimension");
                visit(&x, Fiber::Big(&g));
                if !advance(&mut x, b, hi, n) {
                    return;
                }
            }
        }
        let last = n - 1;
        let fill = |p: &mut [i128], v: i64| {
            let mut acc = 1i128;
            for slot in p.iter_mut() {
                *slot = acc;
                acc *= v as i128;
            }
        };
        let mut pows: Vec<Vec<i128>> = (0..n).map(|i| vec![0i128; self.max_exp[i] as usize + 1]).collect();
        for i in 0..n {
            fill(&mut pows[i], x[i]);
        }
        let mut outer = vec![0i128; self.terms.len()];
        let mut a = vec![0i128; self.deg + 1];
        let (inner_lo, inner_hi) = if last == 0 { (lo, hi) } else { (-b, b) };
        loop {
            for (o, t) in outer.iter_mut().zip(&self.terms) {
                let mut v = t.coef;
                for i in 0..last {
                    v *= pows[i][t.exps[i] as usize];
                }
                *o = v;
            }
            for xl in inner_lo..=inner_hi {
                x[last] = xl;
                fill(&mut pows[last], xl);
                a.iter_mut().for_each(|v| *v = 0);
                let pl = &pows[last];
                for (o, t) in outer.iter().zip(&self.terms) {
                    a[t.j] += o * pl[t.exps[last] as usize];
                }
                visit(&x, Fiber::Small(&a));
            }
            if last == 0 {
                return;
            }
            // advance the outer coordinates
            let mut i = last;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                let top = if i == 0 { hi } else { b };
                if x[i] < top {
                    x[i] += 1;
                    fill(&mut pows[i], x[i]);
                    for k in i + 1..last {
                        x[k] = -b;
                        fill(&mut pows[k], -b);
                    }
                    break;
                }
            }
        }
    }
}

/// Odometer step over `x[0] <= hi0`, `|x[i]| <= b`.
fn advance(x: &mut [i64], b: i64, hi0: i64, n: usize) -> bool {
    let mut i = n;
    while i > 0 {
        i -= 1;
        let top = if i == 0 { hi0 } else { b };
        if x[i] < top {
            x[i] += 1;
            for v in &mut x[i + 1..] {
                *v = -b;
            }
            return true;
        }
    }
    false
}

fn trimmed(a: &[i128]) -> &[i128] {
    let mut n = a.len();
    while n > 0 && a[n - 1] == 0 {
        n -= 1;
    }
    &a[..n]
}

fn to_upoly(a: &[i128]) -> UPoly {
    UPoly::new(a.iter().map(|&c| BigInt::from(c)).collect())
}

fn exact_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    if n < 1 << 52 {
        let mut s = (n as f64).sqrt() as i128;
        while s * s > n {
            s -= 1;
        }
        while (s + 1) * (s + 1) <= n {
            s += 1;
        }
        return (s * s == n).then_some(s);
    }
    let s = (n as u128).sqrt() as i128;
    (s * s == n).then_some(s)
}

fn residue<const Q: u64>(c: i128) -> u64 {
    match i64::try_from(c) {
        Ok(v) => v.rem_euclid(Q as i64) as u64,
        Err(_) => c.rem_euclid(Q as i128) as u64,
    }
}

fn has_root_mod<const Q: u64>(a: &[i128]) -> bool {
    let mut buf = [0u64; 16];
    let mut heap = Vec::new();
    let r: &mut [u64] = if a.len() <= buf.len() {
        &mut buf[..a.len()]
    } else {
        heap.resize(a.len(), 0);
        &mut heap
    };
    for (s, &c) in r.iter_mut().zip(a) {
        *s = residue::<Q>(c);
    }
    if r[0] == 0 {
        return true;
    }
    if a.len() <= 11 {
        // Q^11 < 2^64 for Q <= 47, so Horner needs no intermediate reduction
        (1..Q).any(|y| r.iter().rev().fold(0, |acc, &c| acc * y + c) % Q == 0)
    } else {
        (1..Q).any(|y| r.iter().rev().fold(0, |acc, &c| (acc * y + c) % Q) == 0)
    }
}

const FILTER_PRIMES: [u64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];

fn has_root_mod_index(i: usize, a: &[i128]) -> bool {
    macro_rules! dispatch {
        ($($i:literal => $q:literal),*) => {
            match i {
                $($i => has_root_mod::<$q>(a),)*
                _ => unreachable!(),
            }
        };
    }
    dispatch!(0 => 2, 1 => 3, 2 => 5, 3 => 7, 4 => 11, 5 => 13, 6 => 17, 7 => 19,
        8 => 23, 9 => 29, 10 => 31, 11 => 37, 12 => 41, 13 => 43, 14 => 47)
}

/// Order in which the filter primes are tried, adapted to how often each
/// one rejects a fiber of the current polynomial.
struct FilterOrder {
    order: [usize; 15],
    rejects: [u32; 15],
    calls: u32,
}

thread_local! {
    static FILTER_ORDER: std::cell::RefCell<FilterOrder> = const {
        std::cell::RefCell::new(FilterOrder {
            order: [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14],
            rejects: [0; 15],
            calls: 0,
        })
    };
}

/// True when `a` has no root modulo some prime up to 47. With
/// `skip_lc_divisors`, primes dividing the leading coefficient are not used.
fn rootless_mod_small_prime(a: &[i128], skip_lc_divisors: bool) -> bool {
    let lc = a[a.len() - 1];
    FILTER_ORDER.with_borrow_mut(|f| {
        f.calls += 1;
        if f.calls % 1024 == 0 {
            let score = |i: usize| u64::from(f.rejects[i]) * 4096 / FILTER_PRIMES[i];
            let mut order = f.order;
            order.sort_by_key(|&i| std::cmp::Reverse(score(i)));
            f.order = order;
            f.rejects.iter_mut().for_each(|r| *r /= 2);
        }
        for k in 0..f.order.len() {
            let i = f.order[k];
            if skip_lc_divisors && lc % FILTER_PRIMES[i] as i128 == 0 {
                continue;
            }
            if !has_root_mod_index(i, a) {
                f.rejects[i] += 1;
                return true;
            }
        }
        false
    })
}

fn eval_checked(a: &[i128], y: i128) -> Option<i128> {
    let mut acc = 0i128;
    for &c in a.iter().rev() {
        acc = acc.checked_mul(y)?.checked_add(c)?;
    }
    Some(acc)
}

/// Distinct integer roots of a nonzero fiber with small coefficients.
fn integer_roots_small(a: &[i128], out: &mut Vec<i128>) {
    let mut a = trimmed(a);
    if a.len() <= 1 {
        return;
    }
    if a[0] == 0 {
        out.push(0);
        let shift = a.iter().position(|&c| c != 0).expect("nonzero");
        a = &a[shift..];
    }
    match a.len() - 1 {
        0 => {}
        1 => {
            if a[0] % a[1] == 0 {
                out.push(-a[0] / a[1]);
            }
        }
        2 => {
            let Some(s) = exact_sqrt(a[1] * a[1] - 4 * a[2] * a[0]) else { return };
            let den = 2 * a[2];
            for num in [-a[1] + s, -a[1] - s] {
                if num % den == 0 && !out.contains(&(num / den)) {
                    out.push(num / den);
                }
            }
        }
        d => {
            if rootless_mod_small_prime(a, false) {
                return;
            }
            let lc = a[d].abs();
            let cauchy = 1 + a[..d].iter().map(|c| c.abs()).max().unwrap_or(0) / lc;
            let lim = cauchy.min(a[0].abs());
            if lim <= 256 {
                for y in 1..=lim {
                    if a[0] % y != 0 {
                        continue;
                    }
                    for s in [y, -y] {
                        let zero = match eval_checked(a, s) {
                            Some(v) => v == 0,
                            None => to_upoly(a).eval(&BigInt::from(s)).is_zero(),
                        };
                        if zero {
                            out.push(s);
                        }
                    }
                }
            } else {
                let roots = upoly::integer_roots(&to_upoly(a)).expect("nonzero");
                out.extend(roots.iter().filter_map(ToPrimitive::to_i128));
            }
        }
    }
}

fn has_integer_root_small(a: &[i128]) -> bool {
    let a = trimmed(a);
    if a.len() >= 2 && a[0] == 0 {
        return true;
    }
    let mut roots = Vec::new();
    integer_roots_small(a, &mut roots);
    !roots.is_empty()
}

fn has_rational_root_small(a: &[i128]) -> bool {
    let a = trimmed(a);
    let Some(d) = a.len().checked_sub(1) else { return true };
    match d {
        0 => false,
        _ if a[0] == 0 => true,
        1 => true,
        2 => exact_sqrt(a[1] * a[1] - 4 * a[2] * a[0]).is_some(),
        _ => {
            if rootless_mod_small_prime(a, true) {
                return false;
            }
            if a[d].abs() == 1 {
                return has_integer_root_small(a);
            }
            upoly::has_rational_root(&to_upoly(a)).expect("nonzero")
        }
    }
}

fn reducible_small(a: &[i128]) -> bool {
    let a = trimmed(a);
    match a.len() {
        0..=2 => false,
        3 => exact_sqrt(a[1] * a[1] - 4 * a[2] * a[0]).is_some(),
        4 => has_rational_root_small(a),
        _ => a[0] == 0 || upoly::is_reducible_over_q(&to_upoly(a)).expect("degree >= 2"),
    }
}

impl Fiber<'_> {
    fn is_zero(&self) -> bool {
        match self {
            Fiber::Small(a) => a.iter().all(|&c| c == 0),
            Fiber::Big(g) => g.is_zero(),
        }
    }

    fn solvable(&self, mode: Solvability) -> bool {
        match (self, mode) {
            (Fiber::Small(a), Solvability::Integral) => has_integer_root_small(a),
            (Fiber::Small(a), Solvability::Rational) => has_rational_root_small(a),
            (Fiber::Big(g), Solvability::Integral) => upoly::has_integer_root(g).expect("nonzero"),
            (Fiber::Big(g), Solvability::Rational) => upoly::has_rational_root(g).expect("nonzero"),
        }
    }

    fn reducible(&self) -> bool {
        match self {
            Fiber::Small(a) => reducible_small(a),
            Fiber::Big(g) => upoly::is_reducible_over_q(g).unwrap_or(false),
        }
    }

    fn integer_roots(&self, out: &mut Vec<i128>) {
        out.clear();
        match self {
            Fiber::Small(a) => integer_roots_small(a, out),
            Fiber::Big(g) => {
                let roots = upoly::integer_roots(g).expect("nonzero");
                out.extend(roots.iter().filter_map(ToPrimitive::to_i128));
            }
        }
    }
}

fn finish(t: Tally, b: u64, mode: CountMode, start: Instant) -> CountResult {
    CountResult {
        count: t.count,
        b,
        mode,
        identically_zero_fibers: t.zero,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

fn require_y(f: &MPoly, min_deg: u32) -> Result<(), CountError> {
    if f.is_zero() {
        return Err(CountError::ZeroPolynomial);
    }
    let d = f.deg_y().unwrap_or(0);
    if d == 0 {
        return Err(CountError::NoYDependence);
    }
    if d < min_deg {
        return Err(CountError::DegreeTooLow { min: min_deg, found: d });
    }
    Ok(())
}

/// Runs `per_fiber` over the box and sums.
fn box_tally<F>(g: &MPoly, b: u64, opts: CountOptions, per_fiber: F) -> Tally
where
    F: Fn(&[i64], Fiber<'_>) -> Tally + Sync,
{
    let kernel = Kernel::new(g, b);
    let bi = b as i64;
    let run = |lo: i64, hi: i64| {
        let mut t = Tally::default();
        kernel.for_each_fiber(bi, lo, hi, |x, fib| t += per_fiber(x, fib));
        t
    };
    if kernel.nbox == 0 {
        run(0, 0)
    } else {
        sum_slices(-bi, bi, opts.workers, run)
    }
}

/// Number of `x` in `[-B, B]^n` such that `F(Y, x)` has an integer (or
/// rational) root. Fibers vanishing identically count as solvable.
pub fn count_cov(f: &MPoly, b: u64, mode: Solvability, opts: CountOptions) -> Result<CountResult, CountError> {
    let start = Instant::now();
    require_y(f, 1)?;
    check_height(b, f.nvars())?;
    let t = box_tally(f, b, opts, |_, fib| {
        if fib.is_zero() {
            Tally { count: 1, zero: 1, ..Tally::default() }
        } else {
            Tally { count: fib.solvable(mode) as u64, ..Tally::default() }
        }
    });
    Ok(finish(t, b, CountMode::Cov, start))
}

fn restricted_tally(g: &MPoly, b: u64, y_bound: u64, variant: RestrictedCount, opts: CountOptions) -> Tally {
    let yb = y_bound as i128;
    box_tally(g, b, opts, |_, fib| {
        if fib.is_zero() {
            let count = match variant {
                RestrictedCount::Pairs => 2 * y_bound + 1,
                RestrictedCount::Projection => 1,
            };
            return Tally { count, zero: 1, ..Tally::default() };
        }
        let mut roots = Vec::new();
        fib.integer_roots(&mut roots);
        let inside = roots.iter().filter(|r| r.abs() <= yb).count() as u64;
        let count = match variant {
            RestrictedCount::Pairs => inside,
            RestrictedCount::Projection => (inside > 0) as u64,
        };
        Tally { count, ..Tally::default() }
    })
}

/// Pairs `(y, x)` with `|y| <= y_bound`, `x` in the box and `F(y, x) = 0`;
/// or, with [`RestrictedCount::Projection`], the number of such `x`.
pub fn count_cov_restricted(
    f: &MPoly,
    b: u64,
    y_bound: u64,
    variant: RestrictedCount,
    opts: CountOptions,
) -> Result<CountResult, CountError> {
    let start = Instant::now();
    require_y(f, 1)?;
    check_height(b, f.nvars())?;
    if y_bound > MAX_HEIGHT {
        return Err(CountError::HeightTooLarge(y_bound));
    }
    let t = restricted_tally(f, b, y_bound, variant, opts);
    Ok(finish(t, b, CountMode::CovRestricted, start))
}

/// The X variable (1-based) used as fiber variable: smallest positive
/// degree, ties broken by index.
fn fiber_variable(f: &MPoly) -> Option<usize> {
    (1..=f.nvars())
        .filter_map(|v| f.degree_in(v).filter(|&d| d > 0).map(|d| (d, v)))
        .min()
        .map(|(_, v)| v)
}

/// Moves `X_v` to the fiber position and drops the (unused) Y slot.
fn relabel(f: &MPoly, v: usize) -> MPoly {
    let n = f.nvars();
    MPoly::from_terms(
        n - 1,
        f.terms().map(|(m, c)| {
            let e = m.exponents();
            let mut out = Vec::with_capacity(n);
            out.push(e[v]);
            out.extend((1..=n).filter(|&i| i != v).map(|i| e[i]));
            (out, c.clone())
        }),
    )
}

/// Integer zeros of `f(X1..Xn)` in `[-B, B]^n`.
pub fn count_aff(f: &MPoly, b: u64, opts: CountOptions) -> Result<CountResult, CountError> {
    let start = Instant::now();
    if f.is_zero() {
        return Err(CountError::ZeroPolynomial);
    }
    if f.depends_on_y() {
        return Err(CountError::DependsOnY);
    }
    check_height(b, f.nvars())?;
    let Some(v) = fiber_variable(f) else {
        // nonzero constant
        return Ok(finish(Tally::default(), b, CountMode::Aff, start));
    };
    let g = relabel(f, v);
    let t = restricted_tally(&g, b, b, RestrictedCount::Pairs, opts);
    Ok(finish(t, b, CountMode::Aff, start))
}

fn gcd_vec(v: &[i128]) -> i128 {
    v.iter().fold(0i128, |g, &c| g.gcd(&c))
}

fn normalized_primitive(v: &[i128]) -> bool {
    gcd_vec(v) == 1 && v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Projective zeros of a homogeneous `f(X1..Xn)` of height at most `B`,
/// one primitive representative (first nonzero coordinate positive) per
/// point. The zero polynomial counts every point.
pub fn count_proj(f: &MPoly, b: u64, opts: CountOptions) -> Result<CountResult, CountError> {
    let start = Instant::now();
    if f.depends_on_y() {
        return Err(CountError::DependsOnY);
    }
    if !f.is_homogeneous() {
        return Err(CountError::NotHomogeneous);
    }
    let n = f.nvars();
    check_height(b, n)?;
    if n == 0 {
        return Ok(finish(Tally::default(), b, CountMode::Proj, start));
    }
    let v = fiber_variable(f).unwrap_or(1);
    let g = relabel(f, v);
    let bi = b as i128;
    let t = box_tally(&g, b, opts, |x, fib| {
        let mut full = vec![0i128; n];
        let place = |t: i128, full: &mut Vec<i128>| {
            let mut k = 0;
            for (i, slot) in full.iter_mut().enumerate() {
                if i + 1 == v {
                    *slot = t;
                } else {
                    *slot = x[k] as i128;
                    k += 1;
                }
            }
        };
        let mut tally = Tally::default();
        if fib.is_zero() {
            tally.zero = 1;
            for t in -bi..=bi {
                place(t, &mut full);
                tally.count += normalized_primitive(&full) as u64;
            }
            return tally;
        }
        let mut roots = Vec::new();
        fib.integer_roots(&mut roots);
        for &t in roots.iter().filter(|r| r.abs() <= bi) {
            place(t, &mut full);
            tally.count += normalized_primitive(&full) as u64;
        }
        tally
    });
    Ok(finish(t, b, CountMode::Proj, start))
}

fn require_constant_leading(f: &MPoly) -> Result<(), CountError> {
    require_y(f, 2)?;
    if !f.degree_info()?.constant_leading_in_y {
        return Err(CountError::NonConstantLeading);
    }
    Ok(())
}

/// Number of `x` in the box where `F(Y, x)` is reducible over Q. Requires
/// `deg_Y F >= 2` with a constant leading coefficient in Y.
pub fn count_reducible_fibers(f: &MPoly, b: u64, opts: CountOptions) -> Result<CountResult, CountError> {
    let start = Instant::now();
    require_constant_leading(f)?;
    check_height(b, f.nvars())?;
    let t = box_tally(f, b, opts, |_, fib| Tally {
        count: fib.reducible() as u64,
        ..Tally::default()
    });
    Ok(finish(t, b, CountMode::ReducibleFibers, start))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Containment {
    pub cov: u64,
    pub reducible: u64,
    pub holds: bool,
}

/// Solvable fibers are reducible when `deg_Y F >= 2`, so the cover count
/// never exceeds the reducible-fiber count.
pub fn containment_check(f: &MPoly, b: u64, opts: CountOptions) -> Result<Containment, CountError> {
    require_constant_leading(f)?;
    let cov = count_cov(f, b, Solvability::Integral, opts)?.count;
    let reducible = count_reducible_fibers(f, b, opts)?.count;
    Ok(Containment {
        cov,
        reducible,
        holds: cov <= reducible,
    })
}

pub fn run_count(spec: &CountSpec, b: u64, opts: CountOptions) -> Result<CountResult, CountError> {
    match spec {
        CountSpec::Cov { poly, solvability } => count_cov(poly, b, *solvability, opts),
        CountSpec::CovRestricted { poly, y_bound, variant } => count_cov_restricted(poly, b, *y_bound, *variant, opts),
        CountSpec::Aff { poly } => count_aff(poly, b, opts),
        CountSpec::Proj { poly } => count_proj(poly, b, opts),
        CountSpec::ReducibleFibers { poly } => count_reducible_fibers(poly, b, opts),
    }
}

/// Counts at every height of a strictly increasing grid.
pub fn count_series(spec: &CountSpec, grid: &[u64], opts: CountOptions) -> Result<CountSeries, CountError> {
    if grid.is_empty() {
        return Err(CountError::EmptyGrid);
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CountError::GridNotIncreasing);
    }
    let mut entries: Vec<CountResult> = Vec::with_capacity(grid.len());
    for &b in grid {
        let r = run_count(spec, b, opts)?;
        if entries.last().is_some_and(|prev| prev.count > r.count) {
            return Err(CountError::NotMonotone(b));
        }
        entries.push(r);
    }
    Ok(CountSeries {
        mode: entries[0].mode,
        entries,
    })
}

// ---------------------------------------------------------------------------
// Counts over F_p

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModCounts {
    pub p: u64,
    /// `x` in `F_p^n` whose fiber has a root.
    pub np: u64,
    /// Points `(y, x)` on `F = 0`.
    pub mp: u64,
    /// Solvable `x` whose fiber has nonzero constant term.
    pub np_nonvanishing: u64,
    pub identically_zero_fibers: u64,
}

fn check_modulus(p: u64) -> Result<(), CountError> {
    if !is_prime(p) {
        return Err(CountError::NotPrime(p));
    }
    if p >= 1 << 32 {
        return Err(CountError::ModulusTooLarge(p));
    }
    Ok(())
}

/// Enumerates `x` in `F_p^n`. The tally holds solvable fibers (`count`),
/// total roots (`extra`), zero fibers (`zero`) and solvable fibers with
/// nonzero constant term (`aux`).
struct ModKernel {
    p: u64,
    n: usize,
    deg: usize,
    terms: Vec<(usize, u64, Vec<u32>)>,
    pow_table: Vec<Vec<u64>>,
    y_pows: Option<Vec<Vec<u64>>>,
}

/// Below this modulus fibers are solved by evaluating at every residue.
const DIRECT_EVAL_LIMIT: u64 = 4096;

impl ModKernel {
    fn new(f: &MPoly, p: u64) -> ModKernel {
        let n = f.nvars();
        let deg = f.deg_y().unwrap_or(0) as usize;
        let pm = BigInt::from(p);
        let mut max_e = 0u32;
        let terms: Vec<(usize, u64, Vec<u32>)> = f
            .terms()
            .filter_map(|(m, c)| {
                let c = c.mod_floor(&pm).to_u64().expect("reduced");
                let e = m.exponents();
                max_e = max_e.max(e[1..].iter().copied().max().unwrap_or(0));
                (c != 0).then(|| (e[0] as usize, c, e[1..].to_vec()))
            })
            .collect();
        let pow_table = (0..p)
            .map(|v| {
                let mut row = Vec::with_capacity(max_e as usize + 1);
                let mut acc = 1 % p;
                for _ in 0..=max_e {
                    row.push(acc);
                    acc = acc * v % p;
                }
                row
            })
            .collect();
        let y_pows = (p <= DIRECT_EVAL_LIMIT).then(|| {
            (0..p)
                .map(|y| {
                    let mut row = Vec::with_capacity(deg + 1);
                    let mut acc = 1 % p;
                    for _ in 0..=deg {
                        row.push(acc);
                        acc = acc * y % p;
                    }
                    row
                })
                .collect()
        });
        ModKernel {
            p,
            n,
            deg,
            terms,
            pow_table,
            y_pows,
        }
    }

    fn roots(&self, a: &[u64]) -> u64 {
        match &self.y_pows {
            Some(tab) => tab
                .iter()
                .filter(|row| a.iter().zip(row.iter()).fold(0u64, |s, (c, y)| (s + c * y) % self.p) == 0)
                .count() as u64,
            None => FpPoly::new(self.p, a.to_vec()).count_distinct_roots().unwrap_or(self.p),
        }
    }

    fn slice(&self, lo: u64, hi: u64) -> Tally {
        let mut t = Tally::default();
        let n = self.n;
        let mut x = vec![0u64; n];
        if n > 0 {
            x[0] = lo;
        }
        let mut a = vec![0u64; self.deg + 1];
        loop {
            a.iter_mut().for_each(|v| *v = 0);
            for (j, c, e) in &self.terms {
                let mut v = *c;
                for i in 0..n {
                    v = v * self.pow_table[x[i] as usize][e[i] as usize] % self.p;
                }
                a[*j] = (a[*j] + v) % self.p;
            }
            if a.iter().all(|&c| c == 0) {
                t.zero += 1;
                t.count += 1;
                t.extra += self.p;
            } else {
                let r = self.roots(&a);
                if r > 0 {
                    t.count += 1;
                    t.extra += r;
                    if a[0] != 0 {
                        t.aux += 1;
                    }
                }
            }
            // odometer over [lo, hi] x [0, p)^(n-1)
            let mut i = n;
            let mut moved = false;
            while i > 0 {
                i -= 1;
                let top = if i == 0 { hi } else { self.p - 1 };
                if x[i] < top {
                    x[i] += 1;
                    for v in &mut x[i + 1..] {
                        *v = 0;
                    }
                    moved = true;
                    break;
                }
            }
            if !moved {
                return t;
            }
        }
    }
}

fn mod_tally(f: &MPoly, p: u64, opts: CountOptions) -> Tally {
    let kernel = ModKernel::new(f, p);
    if kernel.n == 0 {
        return kernel.slice(0, 0);
    }
    sum_slices(0, p as i64 - 1, opts.workers, |lo, hi| kernel.slice(lo as u64, hi as u64))
}

/// `N_p(F)` and `M_p(F)` by enumeration of `F_p^n`.
pub fn np_mp(f: &MPoly, p: u64, opts: CountOptions) -> Result<ModCounts, CountError> {
    check_modulus(p)?;
    if f.reduce_mod_p(p)?.is_zero() {
        return Err(CountError::BadPrime(p));
    }
    let t = mod_tally(f, p, opts);
    Ok(ModCounts {
        p,
        np: t.count,
        mp: t.extra,
        np_nonvanishing: t.aux,
        identically_zero_fibers: t.zero,
    })
}

pub fn np(f: &MPoly, p: u64, opts: CountOptions) -> Result<u64, CountError> {
    Ok(np_mp(f, p, opts)?.np)
}

pub fn mp(f: &MPoly, p: u64, opts: CountOptions) -> Result<u64, CountError> {
    Ok(np_mp(f, p, opts)?.mp)
}

/// Zeros of `f(X1..Xn)` in `F_p^n`.
pub fn affine_zeros_mod_p(f: &MPoly, p: u64, opts: CountOptions) -> Result<u64, CountError> {
    if f.depends_on_y() {
        return Err(CountError::DependsOnY);
    }
    check_modulus(p)?;
    if f.reduce_mod_p(p)?.is_zero() {
        return Err(CountError::BadPrime(p));
    }
    // with no Y the fiber is a constant: zero fibers are exactly the zeros
    Ok(mod_tally(f, p, opts).zero)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchwartzZippel {
    pub p: u64,
    pub zeros: u64,
    pub degree: u64,
    /// `degree * p^(n-1)`
    pub bound: u64,
    pub holds: bool,
}

pub fn schwartz_zippel_check(f: &MPoly, p: u64, opts: CountOptions) -> Result<SchwartzZippel, CountError> {
    let zeros = affine_zeros_mod_p(f, p, opts)?;
    let degree = f.reduce_mod_p(p)?.total_degree().unwrap_or(0);
    let n = f.nvars() as u32;
    let bound = if n == 0 { 0 } else { degree * p.pow(n - 1) };
    Ok(SchwartzZippel {
        p,
        zeros,
        degree,
        bound,
        holds: zeros <= bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LangWeilRow {
    pub p: u64,
    pub mp: u64,
    /// `M_p - p^(k-1)` with `k` the number of variables including Y.
    pub error: i128,
    /// `error / p^(k - 3/2)`
    pub normalized_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LangWeilScan {
    pub n_vars: usize,
    pub rows: Vec<LangWeilRow>,
    pub skipped: Vec<(u64, String)>,
}

/// `M_p(F)` against `p^(k-1)` over the primes `p <= p_max` where `F`
/// keeps its degrees. Absolute irreducibility of `F` is the caller's
/// responsibility.
pub fn lang_weil_scan(f: &MPoly, p_max: u64, opts: CountOptions) -> Result<LangWeilScan, CountError> {
    if f.is_zero() {
        return Err(CountError::ZeroPolynomial);
    }
    if p_max >= 1 << 32 {
        return Err(CountError::ModulusTooLarge(p_max));
    }
    let k = f.nvars() + 1;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for p in crate::arith::primes_upto(p_max) {
        let r = f.reduce_mod_p(p)?;
        if r.is_zero() {
            skipped.push((p, "vanishes identically".to_string()));
            continue;
        }
        if r.total_degree() != f.total_degree() || r.deg_y() != f.deg_y() {
            skipped.push((p, "degree drops".to_string()));
            continue;
        }
        let mp = np_mp(f, p, opts)?.mp;
        let main = (p as i128).pow(k as u32 - 1);
        let error = mp as i128 - main;
        let normalized_error = error as f64 / (p as f64).powf(k as f64 - 1.5);
        rows.push(LangWeilRow {
            p,
            mp,
            error,
            normalized_error,
        });
    }
    Ok(LangWeilScan {
        n_vars: k,
        rows,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicityCheck {
    pub p: u64,
    pub m: u64,
    /// Whether `p = 1 mod m`, the hypothesis under which the inequality is
    /// guaranteed.
    pub applicable: bool,
    pub mp: u64,
    pub np_nonvanishing: u64,
    /// `m * np_nonvanishing <= mp`
    pub holds: bool,
}

/// For `F` a polynomial in `Y^m`, each nonzero root `y` comes with its `m`
/// rotations by `m`-th roots of unity when `p = 1 mod m`.
pub fn multiplicity_check(f: &MPoly, p: u64, m: u64, opts: CountOptions) -> Result<MultiplicityCheck, CountError> {
    let c = np_mp(f, p, opts)?;
    Ok(MultiplicityCheck {
        p,
        m,
        applicable: m >= 1 && p % m == 1,
        mp: c.mp,
        np_nonvanishing: c.np_nonvanishing,
        holds: m * c.np_nonvanishing <= c.mp,
    })
}
