//! Factorization over Z (Zassenhaus) and reducibility over Q.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fp::FpPoly;
use super::{has_rational_root, UPoly, UPolyError};

/// `content * prod f^m` equals the factored polynomial; every `f` is
/// primitive, irreducible, with positive leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorList {
    pub content: BigInt,
    pub factors: Vec<(UPoly, u32)>,
}

impl FactorList {
    pub fn expand(&self) -> UPoly {
        self.factors
            .iter()
            .fold(UPoly::constant(self.content.clone()), |acc, (f, m)| acc.mul(&f.pow(*m)))
    }

    /// Number of irreducible factors counted with multiplicity.
    pub fn total_multiplicity(&self) -> u32 {
        self.factors.iter().map(|(_, m)| m).sum()
    }
}

pub fn factor_over_z(g: &UPoly) -> Result<FactorList, UPolyError> {
    if g.is_zero() {
        return Err(UPolyError::IdenticallyZero);
    }
    let mut content = g.content();
    if g.lc().is_some_and(Signed::is_negative) {
        content = -content;
    }
    let mut factors = Vec::new();
    for (part, mult) in g.squarefree_decomposition() {
        for f in factor_squarefree(&part) {
            factors.push((f, mult));
        }
    }
    factors.sort_by(|a, b| (a.0.degree(), &a.0).cmp(&(b.0.degree(), &b.0)));
    Ok(FactorList { content, factors })
}

/// Reducible means at least two non-unit factors counted with multiplicity.
/// Degrees 0 and 1 are reported as not applicable.
pub fn is_reducible_over_q(g: &UPoly) -> Result<bool, UPolyError> {
    let d = g.degree().unwrap_or(0);
    if d < 2 {
        return Err(UPolyError::NotApplicable(d));
    }
    let f = g.primitive_part();
    let sqf = f.squarefree_part();
    if sqf.degree() != f.degree() {
        return Ok(true);
    }
    if d <= 3 {
        return has_rational_root(&f);
    }
    if degree_patterns_forbid_split(&f) {
        return Ok(false);
    }
    Ok(factor_squarefree(&f).len() > 1)
}

/// Intersects the possible factor degrees implied by the factorizations
/// modulo a handful of good primes; true when only the trivial split
/// survives, which proves irreducibility.
fn degree_patterns_forbid_split(f: &UPoly) -> bool {
    let d = f.degree().expect("nonzero");
    let mut allowed: BTreeSet<usize> = (1..d).collect();
    let mut used = 0;
    for p in crate::arith::primes_upto(1000).into_iter().filter(|&p| p >= 5) {
        let Some(fp) = good_reduction(f, p) else { continue };
        let degs = fp.factor_degrees();
        let mut sums = BTreeSet::from([0usize]);
        for k in degs {
            let next: Vec<usize> = sums.iter().map(|s| s + k).collect();
            sums.extend(next);
        }
        allowed.retain(|s| sums.contains(s));
        if allowed.is_empty() {
            return true;
        }
        used += 1;
        if used == 5 {
            break;
        }
    }
    false
}

/// `f mod p`, monic, when `p` does not divide `lc(f)` and the reduction
/// stays squarefree.
fn good_reduction(f: &UPoly, p: u64) -> Option<FpPoly> {
    if (f.lc().expect("nonzero") % BigInt::from(p)).is_zero() {
        return None;
    }
    let r = FpPoly::from_upoly(f, p);
    r.is_squarefree().then(|| r.monic())
}

/// Irreducible factors of a squarefree primitive polynomial with positive
/// leading coefficient.
fn factor_squarefree(f: &UPoly) -> Vec<UPoly> {
    let d = f.degree().expect("nonzero");
    if d <= 1 {
        return vec![f.clone()];
    }
    let (p, fp) = (5u64..)
        .filter(|&p| crate::arith::is_prime(p))
        .find_map(|p| good_reduction(f, p).map(|r| (p, r)))
        .expect("a squarefree polynomial has good primes");
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a55_e7 ^ p);
    let modular = fp.factor_squarefree(&mut rng);
    if modular.len() == 1 {
        return vec![f.clone()];
    }
    let lc = f.lc().expect("nonzero").clone();
    let norm2: BigInt = f.coeffs().iter().map(|c| c * c).sum();
    let bound = (BigInt::one() << d) * (norm2.sqrt() + 1u32) * lc.abs();
    let pm = BigInt::from(p);
    let mut k = 1u32;
    let mut modulus = pm.clone();
    while modulus <= &bound * 2u32 {
        modulus *= &pm;
        k += 1;
    }
    let lifted: Vec<UPoly> = (0..modular.len())
        .map(|i| {
            let cofactor = modular
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(FpPoly::new(p, vec![1]), |acc, (_, g)| acc.mul(g));
            hensel_lift(f, &modular[i], &cofactor, k)
        })
        .collect();
    recombine(f, lifted, &modulus)
}

/// Lifts `f = lc * g * h (mod p)` with `g` monic to a factorization modulo
/// `p^k`; returns the lifted monic `g`.
fn hensel_lift(f: &UPoly, g: &FpPoly, h_monic: &FpPoly, k: u32) -> UPoly {
    let p = g.modulus();
    let pm = BigInt::from(p);
    let lc = f.lc().expect("nonzero").clone();
    let (one, s, t) = g.ext_gcd(h_monic);
    debug_assert_eq!(one.coeffs(), &[1]);
    // s*g + t*h_monic = 1, so s*g + (t/lc)*h = 1 with h = lc*h_monic
    let lc_inv = super::fp::inv_mod(lc.mod_floor(&pm).try_into().expect("below p"), p);
    let t = t.scale(lc_inv);
    let mut gz = g.to_upoly();
    let mut hz = {
        let h = h_monic.scale(lc.mod_floor(&pm).try_into().expect("below p")).to_upoly();
        let mut c = h.coeffs().to_vec();
        *c.last_mut().expect("nonzero") = lc.clone();
        UPoly::new(c)
    };
    let mut m = pm.clone();
    for _ in 1..k {
        let diff = f.sub(&gz.mul(&hz));
        let e = FpPoly::from_upoly(&UPoly::new(diff.coeffs().iter().map(|c| c / &m).collect()), p);
        let (q, dg) = e.mul(&t).div_rem(g);
        let dh = e.mul(&s).add(&q.mul(&h_monic.scale(lc.mod_floor(&pm).try_into().expect("below p"))));
        gz = gz.add(&dg.to_upoly().scale(&m));
        hz = hz.add(&dh.to_upoly().scale(&m));
        m *= &pm;
    }
    gz
}

fn symmetric(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2u32 > *m {
        r - m
    } else {
        r
    }
}

fn recombine(f: &UPoly, mut lifted: Vec<UPoly>, modulus: &BigInt) -> Vec<UPoly> {
    let mut out = Vec::new();
    let mut rest = f.clone();
    let mut size = 1;
    'sizes: while 2 * size <= lifted.len() {
        let lc = rest.lc().expect("nonzero").clone();
        let target = rest.scale(&lc);
        let target0 = target.coeff(0);
        for subset in Combinations::new(lifted.len(), size) {
            let prod = subset
                .iter()
                .fold(UPoly::constant(lc.clone()), |acc, &i| acc.mul(&lifted[i]));
            let cand = UPoly::new(prod.coeffs().iter().map(|c| symmetric(c, modulus)).collect());
            if !target0.is_zero() && (cand.coeff(0).is_zero() || !(&target0 % cand.coeff(0)).is_zero()) {
                continue;
            }
            if cand.degree().unwrap_or(0) == 0 || target.div_exact(&cand).is_none() {
                continue;
            }
            let factor = cand.primitive_part();
            rest = rest.div_exact(&factor).expect("factor divides").primitive_part();
            out.push(factor);
            let mut idx = 0;
            lifted.retain(|_| {
                idx += 1;
                !subset.contains(&(idx - 1))
            });
            continue 'sizes;
        }
        size += 1;
    }
    if rest.degree().unwrap_or(0) >= 1 {
        out.push(rest.primitive_part());
    }
    out
}

/// Lexicographic `size`-subsets of `0..n`.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, size: usize) -> Self {
        Combinations {
            n,
            idx: (0..size).collect(),
            done: size > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(item)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn u(c: &[i64]) -> UPoly {
        UPoly::from_i64s(c)
    }

    #[test]
    fn factor_examples() {
        let fl = factor_over_z(&u(&[-1, 0, 1])).unwrap();
        assert_eq!(fl.content, BigInt::one());
        assert_eq!(fl.factors, vec![(u(&[-1, 1]), 1), (u(&[1, 1]), 1)]);
        let fl = factor_over_z(&u(&[4, 0, 0, 0, 1])).unwrap();
        assert_eq!(fl.factors, vec![(u(&[2, -2, 1]), 1), (u(&[2, 2, 1]), 1)]);
        let fl = factor_over_z(&u(&[-6, 0, 6])).unwrap();
        assert_eq!(fl.content, BigInt::from(6));
        assert_eq!(fl.factors, vec![(u(&[-1, 1]), 1), (u(&[1, 1]), 1)]);
        assert_eq!(factor_over_z(&UPoly::zero()), Err(UPolyError::IdenticallyZero));
    }

    #[test]
    fn factors_needing_recombination() {
        // Y^4 + 1 splits into quadratics modulo every prime
        let fl = factor_over_z(&u(&[1, 0, 0, 0, 1])).unwrap();
        assert_eq!(fl.factors, vec![(u(&[1, 0, 0, 0, 1]), 1)]);
        // Swinnerton-Dyer polynomial for sqrt2, sqrt3
        let fl = factor_over_z(&u(&[1, 0, -10, 0, 1])).unwrap();
        assert_eq!(fl.factors.len(), 1);
        let g = u(&[1, 0, -10, 0, 1]).mul(&u(&[-3, 0, 2])).mul(&u(&[7, -1, 0, 5]).pow(2));
        let fl = factor_over_z(&g.scale(&BigInt::from(-4))).unwrap();
        assert_eq!(fl.content, BigInt::from(-4));
        assert_eq!(fl.expand(), g.scale(&BigInt::from(-4)));
        assert_eq!(fl.total_multiplicity(), 4);
    }

    #[test]
    fn reducibility_examples() {
        assert!(is_reducible_over_q(&u(&[-4, 0, 1])).unwrap());
        assert!(!is_reducible_over_q(&u(&[1, 0, 1])).unwrap());
        assert!(!is_reducible_over_q(&u(&[9, 0, 1])).unwrap());
        assert!(is_reducible_over_q(&u(&[1, -2, 1])).unwrap());
        assert!(!is_reducible_over_q(&u(&[2, 0, 2])).unwrap());
        assert!(is_reducible_over_q(&u(&[4, 0, 0, 0, 1])).unwrap());
        assert!(!is_reducible_over_q(&u(&[1, 0, -10, 0, 1])).unwrap());
        assert_eq!(is_reducible_over_q(&u(&[1, 1])), Err(UPolyError::NotApplicable(1)));
        assert_eq!(is_reducible_over_q(&u(&[3])), Err(UPolyError::NotApplicable(0)));
    }

    fn poly(max_deg: usize, max_coef: i64) -> impl Strategy<Value = UPoly> {
        prop::collection::vec(-max_coef..=max_coef, 1..=max_deg + 1)
            .prop_filter("nonzero", |c| c.iter().any(|&v| v != 0))
            .prop_map(|c| UPoly::from_i64s(&c))
    }

    /// Irreducibility oracle for degree <= 4 independent of Zassenhaus:
    /// no rational root, and for degree 4 no quadratic factor found by
    /// bounded search over monic-transformed coefficient pairs.
    fn brute_irreducible(f: &UPoly) -> bool {
        let f = f.primitive_part();
        let d = f.degree().unwrap();
        if d <= 1 {
            return d == 1;
        }
        if has_rational_root(&f).unwrap() {
            return false;
        }
        if d <= 3 {
            return true;
        }
        // a quadratic factor a Y^2 + b Y + c has a | lc, c | f(0) and |b|
        // bounded by the Mignotte bound
        let lc: i64 = f.lc().unwrap().try_into().unwrap();
        let c0: i64 = f.coeff(0).try_into().unwrap();
        let norm2: BigInt = f.coeffs().iter().map(|c| c * c).sum();
        let bmax = BigInt::from(4) * (norm2.sqrt() + 1) * BigInt::from(lc.abs());
        let bmax: i64 = i64::try_from(&bmax).unwrap();
        for a in (1..=lc.abs()).filter(|a| lc % a == 0) {
            for c in (1..=c0.abs()).filter(|c| c0 % c == 0) {
                for c in [c, -c] {
                    for b in -bmax..=bmax {
                        if f.div_exact(&u(&[c, b, a])).is_some() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn factorization_reconstructs_input(g in poly(8, 1000)) {
            let fl = factor_over_z(&g).unwrap();
            prop_assert_eq!(fl.expand(), g);
            for (f, m) in &fl.factors {
                prop_assert!(*m >= 1);
                prop_assert!(f.lc().unwrap().is_positive());
                prop_assert!(f.content().is_one());
            }
        }

        #[test]
        fn round_trip_random_irreducibles(parts in prop::collection::vec(poly(4, 12), 1..4)) {
            let parts: Vec<UPoly> = parts
                .into_iter()
                .map(|p| p.primitive_part())
                .filter(|p| p.degree().unwrap_or(0) >= 1 && p.coeff(0).abs() <= BigInt::from(12) && brute_irreducible(p))
                .collect();
            prop_assume!(!parts.is_empty());
            let g = parts.iter().fold(UPoly::constant(1), |acc, p| acc.mul(p));
            let fl = factor_over_z(&g).unwrap();
            let mut expected: Vec<UPoly> = parts.clone();
            expected.sort_by(|a, b| (a.degree(), a).cmp(&(b.degree(), b)));
            let mut got: Vec<UPoly> = fl
                .factors
                .iter()
                .flat_map(|(f, m)| std::iter::repeat_n(f.clone(), *m as usize))
                .collect();
            got.sort_by(|a, b| (a.degree(), a).cmp(&(b.degree(), b)));
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn reducibility_agrees_with_factor_count(g in poly(6, 50)) {
            prop_assume!(g.degree().unwrap_or(0) >= 2);
            let fl = factor_over_z(&g).unwrap();
            prop_assert_eq!(is_reducible_over_q(&g).unwrap(), fl.total_multiplicity() > 1);
        }
    }
}
