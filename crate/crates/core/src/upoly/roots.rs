//! Real-root isolation by Sturm sequences, integer and rational roots,
//! and root counts modulo a prime.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::fp::FpPoly;
use super::{UPoly, UPolyError};
use crate::arith::is_prime;

/// The dyadic rational `num / 2^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub num: BigInt,
    pub exp: u32,
}

impl Dyadic {
    pub fn integer(v: BigInt) -> Self {
        Dyadic { num: v, exp: 0 }
    }

    fn normalized(mut self) -> Self {
        while self.exp > 0 && self.num.is_even() {
            self.num >>= 1;
            self.exp -= 1;
        }
        self
    }

    fn at_exp(&self, exp: u32) -> BigInt {
        &self.num << (exp - self.exp)
    }

    pub fn midpoint(&self, other: &Dyadic) -> Dyadic {
        let e = self.exp.max(other.exp) + 1;
        let s = self.at_exp(e - 1) + other.at_exp(e - 1);
        Dyadic { num: s, exp: e }.normalized()
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp)
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigInt::one() << self.exp)
        }
    }
}

/// Holds exactly one real root: in the open interval `(lo, hi)`, or equal
/// to `lo` when `lo == hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolatingInterval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl IsolatingInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        if self.is_exact() {
            return *x == self.lo.to_rational();
        }
        self.lo.to_rational() < *x && *x < self.hi.to_rational()
    }
}

/// Sign of `g(num / 2^exp)` computed without division, via
/// `sum c_i num^i 2^(exp (d - i))`.
fn sign_at(g: &UPoly, x: &Dyadic) -> i8 {
    let Some(d) = g.degree() else { return 0 };
    let mut acc = BigInt::zero();
    for (i, c) in g.coeffs().iter().enumerate().rev() {
        acc = acc * &x.num + (c << (x.exp as usize * (d - i)));
    }
    sign_of(&acc)
}

fn sign_of(v: &BigInt) -> i8 {
    match v.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

fn sign_at_int(g: &UPoly, x: &BigInt) -> i8 {
    sign_of(&g.eval(x))
}

/// Remainder sequence `g, g', -rem(g, g'), ...` with positive scalings only,
/// so signs agree with the rational Sturm sequence.
pub fn sturm_sequence(g: &UPoly) -> Vec<UPoly> {
    let mut seq = vec![g.clone()];
    if g.degree().unwrap_or(0) == 0 {
        return seq;
    }
    seq.push(g.derivative());
    loop {
        let n = seq.len();
        let (a, b) = (&seq[n - 2], &seq[n - 1]);
        if b.degree().unwrap_or(0) == 0 {
            break;
        }
        let mut r = a.pseudo_rem(b);
        let k = a.degree().unwrap_or(0) + 1 - b.degree().unwrap_or(0);
        let lc_negative = b.lc().is_some_and(Signed::is_negative);
        // prem multiplies by lc(b)^k; flip when that factor is negative
        if !(lc_negative && k % 2 == 1) {
            r = r.neg();
        }
        if r.is_zero() {
            break;
        }
        let c = r.content();
        r = UPoly::new(r.coeffs().iter().map(|v| v / &c).collect());
        seq.push(r);
    }
    seq
}

fn variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0;
    let mut v = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            v += 1;
        }
        last = s;
    }
    v
}

fn variations_at(seq: &[UPoly], x: &Dyadic) -> usize {
    variations(seq.iter().map(|p| sign_at(p, x)))
}

fn variations_at_int(seq: &[UPoly], x: &BigInt) -> usize {
    variations(seq.iter().map(|p| sign_at_int(p, x)))
}

/// Smallest power of two strictly above every root modulus:
/// `1 + max|c_i| / |lc|` rounded up.
fn cauchy_bound(g: &UPoly) -> BigInt {
    let lc = g.lc().expect("nonzero").abs();
    let d = g.degree().unwrap_or(0);
    let m = g.coeffs()[..d].iter().map(|c| c.abs()).max().unwrap_or_default();
    let bound = m.div_ceil(&lc) + 1u32;
    let mut p = BigInt::one();
    while p <= bound {
        p <<= 1;
    }
    p
}

fn nonzero_squarefree(g: &UPoly) -> Result<UPoly, UPolyError> {
    if g.is_zero() {
        return Err(UPolyError::IdenticallyZero);
    }
    Ok(g.squarefree_part())
}

/// Disjoint isolating intervals for the real roots of `g`, in increasing
/// order, each of width at most 1/2.
pub fn real_root_isolation(g: &UPoly) -> Result<Vec<IsolatingInterval>, UPolyError> {
    let f = nonzero_squarefree(g)?;
    if f.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let seq = sturm_sequence(&f);
    let m = cauchy_bound(&f);
    let lo = Dyadic::integer(-m.clone());
    let hi = Dyadic::integer(m);
    let mut out = Vec::new();
    let mut stack = vec![(lo.clone(), variations_at(&seq, &lo), hi.clone(), variations_at(&seq, &hi))];
    while let Some((a, va, b, vb)) = stack.pop() {
        let count = va - vb;
        if count == 0 {
            continue;
        }
        let narrow = {
            let e = a.exp.max(b.exp);
            // width <= 1/2  <=>  (b - a) * 2^e <= 2^(e-1)
            let w = b.at_exp(e) - a.at_exp(e);
            e >= 1 && w <= (BigInt::one() << (e - 1))
        };
        if count == 1 && narrow {
            if sign_at(&f, &b) == 0 {
                out.push(IsolatingInterval { lo: b.clone(), hi: b });
            } else {
                out.push(IsolatingInterval { lo: a, hi: b });
            }
            continue;
        }
        let mid = a.midpoint(&b);
        let vm = variations_at(&seq, &mid);
        // push the right half first so the left half is processed first
        stack.push((mid.clone(), vm, b, vb));
        stack.push((a, va, mid, vm));
    }
    Ok(out)
}

/// Distinct integer roots in increasing order. Bisection runs on integer
/// endpoints only, so each surviving unit interval `(a, a+1]` needs one
/// exact evaluation.
pub fn integer_roots(g: &UPoly) -> Result<Vec<BigInt>, UPolyError> {
    integer_roots_impl(g, false)
}

pub fn has_integer_root(g: &UPoly) -> Result<bool, UPolyError> {
    Ok(!integer_roots_impl(g, true)?.is_empty())
}

fn integer_roots_impl(g: &UPoly, first_only: bool) -> Result<Vec<BigInt>, UPolyError> {
    let mut f = nonzero_squarefree(g)?;
    let mut out = Vec::new();
    // zero is handled apart; every other integer root divides the constant term
    if f.degree().unwrap_or(0) >= 1 && f.coeff(0).is_zero() {
        out.push(BigInt::zero());
        if first_only {
            return Ok(out);
        }
        f = UPoly::new(f.coeffs()[1..].to_vec());
    }
    let d = f.degree().expect("nonzero");
    if d == 0 {
        return Ok(out);
    }
    if d == 1 {
        let (q, r) = (-f.coeff(0)).div_rem(&f.coeff(1));
        if r.is_zero() {
            out.push(q);
            out.sort();
        }
        return Ok(out);
    }
    let c0 = f.coeff(0);
    let seq = sturm_sequence(&f);
    let m = cauchy_bound(&f).min(c0.abs());
    let lo = -m.clone() - 1u32;
    let mut stack = vec![(lo.clone(), variations_at_int(&seq, &lo), m.clone(), variations_at_int(&seq, &m))];
    let mut found = Vec::new();
    while let Some((a, va, b, vb)) = stack.pop() {
        if va == vb {
            continue;
        }
        if &b - &a == BigInt::one() {
            if !b.is_zero() && f.eval(&b).is_zero() {
                found.push(b);
                if first_only {
                    break;
                }
            }
            continue;
        }
        let mid: BigInt = (&a + &b).div_floor(&BigInt::from(2));
        let vm = variations_at_int(&seq, &mid);
        stack.push((mid.clone(), vm, b, vb));
        stack.push((a, va, mid, vm));
    }
    out.extend(found);
    out.sort();
    Ok(out)
}

/// `h(Z) = lc^(d-1) g(Z / lc)`: monic with integer coefficients; the roots
/// of `g` are those of `h` divided by `lc`.
fn monic_transform(g: &UPoly) -> UPoly {
    let d = g.degree().expect("nonzero");
    let lc = g.lc().expect("nonzero").clone();
    let mut coeffs = Vec::with_capacity(d + 1);
    let mut scale = BigInt::one();
    let mut rev = Vec::with_capacity(d + 1);
    rev.push(BigInt::one());
    for i in (0..d).rev() {
        rev.push(g.coeff(i) * &scale);
        scale *= &lc;
    }
    coeffs.extend(rev.into_iter().rev());
    UPoly::new(coeffs)
}

/// Distinct rational roots in increasing order.
pub fn rational_roots(g: &UPoly) -> Result<Vec<BigRational>, UPolyError> {
    rational_roots_impl(g, false)
}

pub fn has_rational_root(g: &UPoly) -> Result<bool, UPolyError> {
    Ok(!rational_roots_impl(g, true)?.is_empty())
}

fn rational_roots_impl(g: &UPoly, first_only: bool) -> Result<Vec<BigRational>, UPolyError> {
    let f = nonzero_squarefree(g)?;
    if f.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let lc = f.lc().expect("nonzero").clone();
    if lc.is_one() {
        return Ok(integer_roots_impl(&f, first_only)?
            .into_iter()
            .map(BigRational::from_integer)
            .collect());
    }
    let h = monic_transform(&f);
    let mut roots: Vec<BigRational> = integer_roots_impl(&h, first_only)?
        .into_iter()
        .map(|z| BigRational::new(z, lc.clone()))
        .collect();
    roots.sort();
    Ok(roots)
}

/// Number of distinct roots of `g` in `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootsModP {
    pub count: u64,
    /// `g` reduces to zero mod p; `count` is then `p`.
    pub identically_zero: bool,
}

pub fn roots_mod_p(g: &UPoly, p: u64) -> Result<RootsModP, UPolyError> {
    if !is_prime(p) {
        return Err(UPolyError::NotPrime(p));
    }
    if p >= 1 << 32 {
        return Err(UPolyError::ModulusTooLarge(p));
    }
    let r = FpPoly::from_upoly(g, p);
    Ok(match r.count_distinct_roots() {
        None => RootsModP {
            count: p,
            identically_zero: true,
        },
        Some(count) => RootsModP {
            count,
            identically_zero: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn u(c: &[i64]) -> UPoly {
        UPoly::from_i64s(c)
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(big(n), big(d))
    }

    #[test]
    fn isolation_examples() {
        let iv = real_root_isolation(&u(&[-4, 0, 1])).unwrap();
        assert_eq!(iv.len(), 2);
        assert!(iv[0].contains(&rat(-2, 1)));
        assert!(iv[1].contains(&rat(2, 1)));
        assert!(real_root_isolation(&u(&[1, 0, 1])).unwrap().is_empty());
        let iv = real_root_isolation(&u(&[-2, 0, 0, 1])).unwrap();
        assert_eq!(iv.len(), 1);
        assert!(iv[0].lo.to_rational() >= rat(1, 1));
        assert!(iv[0].hi.to_rational() <= rat(3, 2));
        assert_eq!(real_root_isolation(&UPoly::zero()), Err(UPolyError::IdenticallyZero));
    }

    #[test]
    fn isolation_counts_clustered_roots() {
        // (Y - 1/3)(Y - 1/4)(Y - 10)(Y + 7)^2
        let g = u(&[-1, 3]).mul(&u(&[-1, 4])).mul(&u(&[-10, 1])).mul(&u(&[7, 1]).pow(2));
        let iv = real_root_isolation(&g).unwrap();
        assert_eq!(iv.len(), 4);
        let roots = [rat(-7, 1), rat(1, 4), rat(1, 3), rat(10, 1)];
        for (i, r) in iv.iter().zip(roots.iter()) {
            assert!(i.contains(r), "{i:?} misses {r}");
        }
    }

    #[test]
    fn integer_root_examples() {
        assert_eq!(integer_roots(&u(&[-4, 0, 1])).unwrap(), vec![big(-2), big(2)]);
        assert!(integer_roots(&u(&[-5, 0, 1])).unwrap().is_empty());
        assert_eq!(integer_roots(&u(&[-1, -1, 2])).unwrap(), vec![big(1)]);
        assert!(has_integer_root(&u(&[-4, 0, 1])).unwrap());
        assert!(!has_integer_root(&u(&[1, 0, 1])).unwrap());
        assert!(!has_integer_root(&u(&[-1105, 0, 0, 1])).unwrap());
        assert_eq!(has_integer_root(&UPoly::zero()), Err(UPolyError::IdenticallyZero));
        assert_eq!(integer_roots(&u(&[0, 0, 1, 1])).unwrap(), vec![big(-1), big(0)]);
    }

    #[test]
    fn rational_root_examples() {
        assert_eq!(rational_roots(&u(&[-1, -1, 2])).unwrap(), vec![rat(-1, 2), rat(1, 1)]);
        assert!(!has_rational_root(&u(&[-2, 0, 1])).unwrap());
        assert_eq!(rational_roots(&u(&[-1, 0, 9])).unwrap(), vec![rat(-1, 3), rat(1, 3)]);
    }

    #[test]
    fn roots_mod_p_examples() {
        assert_eq!(roots_mod_p(&u(&[-1, 0, 1]), 5).unwrap().count, 2);
        assert_eq!(roots_mod_p(&u(&[-2, 0, 1]), 5).unwrap().count, 0);
        assert_eq!(roots_mod_p(&u(&[0, 0, 1]), 5).unwrap().count, 1);
        let z = roots_mod_p(&u(&[5, 10]), 5).unwrap();
        assert!(z.identically_zero);
        assert_eq!(z.count, 5);
        assert_eq!(roots_mod_p(&u(&[1, 1]), 6), Err(UPolyError::NotPrime(6)));
    }

    fn poly_strategy(max_deg: usize, max_coef: i64) -> impl Strategy<Value = UPoly> {
        prop::collection::vec(-max_coef..=max_coef, 1..=max_deg + 1)
            .prop_filter("nonconstant", |c| c.len() > 1 && *c.last().unwrap() != 0)
            .prop_map(|c| UPoly::from_i64s(&c))
    }

    /// Random polynomials with some planted small integer roots.
    fn rooted_strategy() -> impl Strategy<Value = UPoly> {
        (poly_strategy(4, 30), prop::collection::vec(-20i64..=20, 0..3)).prop_map(|(g, roots)| {
            roots.iter().fold(g, |acc, &r| acc.mul(&UPoly::linear_root(r)))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn integer_roots_match_cauchy_scan(g in rooted_strategy()) {
            let lc = g.lc().unwrap().abs();
            let m = g.coefficient_norm();
            let bound: i64 = (BigInt::one() + m / lc).try_into().unwrap();
            let brute: Vec<BigInt> = (-bound..=bound).map(BigInt::from).filter(|y| g.eval(y).is_zero()).collect();
            prop_assert_eq!(integer_roots(&g).unwrap(), brute.clone());
            prop_assert_eq!(has_integer_root(&g).unwrap(), !brute.is_empty());
        }

        #[test]
        fn rational_roots_match_rational_root_theorem(g in rooted_strategy(), a in 1i64..6, b in -6i64..6) {
            let g = g.mul(&u(&[b, a]));
            prop_assume!(!g.coeff(0).is_zero());
            // candidates p/q with p | g(0), q | lc
            let c0: i64 = g.coeff(0).abs().try_into().unwrap_or(i64::MAX);
            let lc: i64 = g.lc().unwrap().abs().try_into().unwrap();
            prop_assume!(c0 < 1_000_000);
            let mut brute = Vec::new();
            for p in (1..=c0).filter(|p| c0 % p == 0) {
                for q in (1..=lc).filter(|q| lc % q == 0) {
                    for s in [-1, 1] {
                        let r = rat(s * p, q);
                        let val = g.coeffs().iter().rev().fold(BigRational::zero(), |acc, c| acc * &r + BigRational::from_integer(c.clone()));
                        if val.is_zero() && !brute.contains(&r) {
                            brute.push(r);
                        }
                    }
                }
            }
            brute.sort();
            let found = rational_roots(&g).unwrap();
            prop_assert_eq!(&found, &brute);
            let ints: Vec<BigInt> = found.iter().filter(|r| r.is_integer()).map(|r| r.to_integer()).collect();
            prop_assert_eq!(integer_roots(&g).unwrap(), ints);
        }

        #[test]
        fn isolation_intervals_are_disjoint_and_complete(g in rooted_strategy()) {
            let iv = real_root_isolation(&g).unwrap();
            for w in iv.windows(2) {
                prop_assert!(w[0].hi.to_rational() <= w[1].lo.to_rational());
            }
            let seq = sturm_sequence(&g.squarefree_part());
            let m = cauchy_bound(&g.squarefree_part());
            let total = variations_at_int(&seq, &-m.clone()) - variations_at_int(&seq, &m);
            prop_assert_eq!(iv.len(), total);
            for i in &iv {
                if !i.is_exact() {
                    prop_assert!(sign_at(&g.squarefree_part(), &i.lo) * sign_at(&g.squarefree_part(), &i.hi) <= 0);
                }
            }
        }

        #[test]
        fn discriminant_vanishes_iff_common_root(g in poly_strategy(6, 20)) {
            let shared = g.gcd(&g.derivative()).degree().unwrap_or(0) > 0;
            prop_assert_eq!(g.discriminant().unwrap().is_zero(), shared);
        }

        #[test]
        fn roots_mod_p_match_exhaustive(g in poly_strategy(6, 1000), pi in 0usize..25) {
            let primes = crate::arith::primes_upto(100);
            let p = primes[pi];
            let pm = BigInt::from(p);
            let brute = (0..p).filter(|&y| g.eval(&BigInt::from(y)).mod_floor(&pm).is_zero()).count() as u64;
            let r = roots_mod_p(&g, p).unwrap();
            prop_assert_eq!(r.count, brute);
        }
    }
}
