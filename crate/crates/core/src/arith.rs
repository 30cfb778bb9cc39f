//! Machine-integer number theory: primality, sieves, factorization and the
//! multiplicative functions behind the sums-of-two-squares counterexamples.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("argument must be a positive integer")]
    NonPositive,
    #[error("product overflows 64 bits")]
    Overflow,
    #[error("height B must be at least {min}, got {found}")]
    HeightTooSmall { min: u64, found: u64 },
}

/// Prime factorization `value = prod p^e`, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| u64::from(e) + 1).product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn mu(&self) -> i32 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are a complete
/// witness set below 3.3 * 10^24, covering all of `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Sieve of Eratosthenes.
pub fn primes_upto(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = usize::try_from(n).expect("sieve bound exceeds address space");
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes `p <= n` with `p ≡ a (mod m)`.
pub fn primes_in_class(n: u64, a: u64, m: u64) -> Vec<u64> {
    assert!(m > 0 && a < m, "residue class requires 0 <= a < m");
    primes_upto(n).into_iter().filter(|p| p % m == a).collect()
}

const TRIAL_LIMIT: u64 = 1_000_000;

fn trial_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_upto(TRIAL_LIMIT))
}

fn pollard_brent(n: u64, c: u64) -> Option<u64> {
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let (mut y, m) = (2u64, 128u64);
    let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
    let (mut x, mut ys) = (0u64, 0u64);
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = (1..)
        .find_map(|c| pollard_brent(n, c))
        .expect("pollard rho eventually splits a composite");
    split_large(d, out);
    split_large(n / d, out);
}

/// Complete factorization: trial division by primes up to 10^6, then
/// Pollard-rho (Brent) on whatever composite cofactor remains.
pub fn factorize(n: u64) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::NonPositive);
    }
    let mut rest = n;
    let mut primes = Vec::new();
    for (i, &p) in trial_primes().iter().enumerate() {
        if p * p > rest {
            break;
        }
        while rest.is_multiple_of(p) {
            primes.push(p);
            rest /= p;
        }
        // Once the small primes are gone, a prime cofactor ends the search early.
        if i == 168 && is_prime(rest) {
            break;
        }
    }
    if rest > 1 {
        if rest < TRIAL_LIMIT * TRIAL_LIMIT || is_prime(rest) {
            primes.push(rest);
        } else {
            split_large(rest, &mut primes);
        }
    }
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(Factorization { value: n, factors })
}

pub fn mu(n: u64) -> Result<i32, ArithError> {
    Ok(factorize(n)?.mu())
}

pub fn omega(n: u64) -> Result<u32, ArithError> {
    Ok(factorize(n)?.omega())
}

pub fn tau(n: u64) -> Result<u64, ArithError> {
    Ok(factorize(n)?.tau())
}

/// The non-principal character modulo 4.
pub fn chi4(n: u64) -> Result<i32, ArithError> {
    match n % 4 {
        _ if n == 0 => Err(ArithError::NonPositive),
        1 => Ok(1),
        3 => Ok(-1),
        _ => Ok(0),
    }
}

/// Number of ordered pairs `(a, b)` with `a^2 + b^2 = k`; `r2(0) = 1`.
///
/// Zero if a prime `≡ 3 (mod 4)` divides `k` to an odd power, otherwise
/// `4 * prod_{p ≡ 1 (mod 4)} (e_p + 1)`.
pub fn r2(k: u64) -> u64 {
    if k == 0 {
        return 1;
    }
    let fac = factorize(k).expect("k > 0");
    let mut r = 4u64;
    for &(p, e) in &fac.factors {
        match p % 4 {
            1 => r *= u64::from(e) + 1,
            3 if e % 2 == 1 => return 0,
            _ => {}
        }
    }
    r
}

/// `r2` by direct enumeration over `|a| <= sqrt(k)`.
pub fn r2_bruteforce(k: u64) -> u64 {
    let s = k.sqrt();
    let mut count = 0;
    for a in 0..=s {
        let rest = k - a * a;
        let b = rest.sqrt();
        if b * b == rest {
            let a_signs = if a == 0 { 1 } else { 2 };
            let b_signs = if b == 0 { 1 } else { 2 };
            count += a_signs * b_signs;
        }
    }
    count
}

/// Which primes `p ≡ 1 (mod 4)` enter the product defining `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KVariant {
    /// `p <= log B`
    FullRange,
    /// `log B / 2 <= p <= log B`
    Dyadic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KConstruction {
    /// `floor(ln B)`
    pub threshold: u64,
    pub variant: KVariant,
    pub primes: Vec<u64>,
    pub k: u64,
    /// No prime fell in the range, so `k = 1`.
    pub range_empty: bool,
}

/// `floor(ln b)`, corrected against floating-point rounding at the boundary.
pub fn log_threshold(b: u64) -> u64 {
    let mut t = (b as f64).ln().floor() as u64;
    while t > 0 && (t as f64).exp() > b as f64 {
        t -= 1;
    }
    while ((t + 1) as f64).exp() <= b as f64 {
        t += 1;
    }
    t
}

/// Product of primes `≡ 1 (mod 4)` in the variant's range below `threshold`.
pub fn construct_k_from_threshold(threshold: u64, variant: KVariant) -> Result<KConstruction, ArithError> {
    let primes: Vec<u64> = primes_in_class(threshold, 1, 4)
        .into_iter()
        .filter(|&p| match variant {
            KVariant::FullRange => true,
            KVariant::Dyadic => 2 * p >= threshold,
        })
        .collect();
    let mut k = 1u64;
    for &p in &primes {
        k = k.checked_mul(p).ok_or(ArithError::Overflow)?;
    }
    Ok(KConstruction {
        threshold,
        variant,
        range_empty: primes.is_empty(),
        primes,
        k,
    })
}

pub fn construct_k(b: u64, variant: KVariant) -> Result<KConstruction, ArithError> {
    if b < 3 {
        return Err(ArithError::HeightTooSmall { min: 3, found: b });
    }
    construct_k_from_threshold(log_threshold(b), variant)
}

/// Both sides of `r(m1 m2) = sum_{d | (m1, m2)} mu(d) chi(d) r(m1/d) r(m2/d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuscheRamanujan {
    pub m1: u64,
    pub m2: u64,
    /// `r(m1 m2)`
    pub lhs: u64,
    /// The sum with `s = r/4` in place of `r`.
    pub rhs_normalized: i64,
    /// The sum with `r` itself.
    pub rhs_literal: i64,
    /// `lhs / 4 == rhs_normalized`
    pub holds_normalized: bool,
}

pub fn busche_ramanujan_check(m1: u64, m2: u64) -> Result<BuscheRamanujan, ArithError> {
    if m1 == 0 || m2 == 0 {
        return Err(ArithError::NonPositive);
    }
    let lhs = r2(m1.checked_mul(m2).ok_or(ArithError::Overflow)?);
    let g = m1.gcd(&m2);
    let (mut normalized, mut literal) = (0i64, 0i64);
    for d in factorize(g)?.divisors() {
        let sign = i64::from(mu(d)? * chi4(d)?);
        if sign == 0 {
            continue;
        }
        let (a, b) = (r2(m1 / d) as i64, r2(m2 / d) as i64);
        literal += sign * a * b;
        normalized += sign * (a / 4) * (b / 4);
    }
    Ok(BuscheRamanujan {
        m1,
        m2,
        lhs,
        rhs_normalized: normalized,
        rhs_literal: literal,
        holds_normalized: lhs.is_multiple_of(4) && (lhs / 4) as i64 == normalized,
    })
}

/// pi to 30 significant digits as an exact rational.
pub fn pi_rational() -> BigRational {
    let num: BigInt = "314159265358979323846264338328".parse().expect("digits");
    let den: BigInt = num_traits::pow(BigInt::from(10), 29);
    BigRational::new(num, den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussCircle {
    pub x: u64,
    /// `sum_{1 <= n <= X} r2(n)`
    pub sum: u64,
    /// Lattice points with `1 <= a^2 + b^2 <= X`, counted directly.
    pub lattice_count: u64,
    pub pi_x: BigRational,
    /// `sum - pi X`
    pub error: f64,
}

impl GaussCircle {
    pub fn paths_agree(&self) -> bool {
        self.sum == self.lattice_count
    }
}

pub fn gauss_circle_sum(x: u64) -> Result<GaussCircle, ArithError> {
    if x == 0 {
        return Err(ArithError::NonPositive);
    }
    let sum: u64 = (1..=x).map(r2).sum();
    let s = x.sqrt();
    let mut lattice = 0u64;
    for a in 0..=s {
        let column = 2 * (x - a * a).sqrt() + 1;
        lattice += if a == 0 { column } else { 2 * column };
    }
    lattice -= 1;
    let pi_x = pi_rational() * BigRational::from_integer(BigInt::from(x));
    let error = (BigRational::from_integer(BigInt::from(sum)) - &pi_x)
        .to_f64()
        .unwrap_or(f64::NAN);
    Ok(GaussCircle {
        x,
        sum,
        lattice_count: lattice,
        pi_x,
        error,
    })
}

/// `sum_{1 <= z <= n} tau(z)`, by the hyperbola count of pairs `(a, b)` with `ab <= n`.
pub fn divisor_sum(n: u64) -> u64 {
    let s = n.sqrt();
    let partial: u64 = (1..=s).map(|a| n / a).sum();
    2 * partial - s * s
}
