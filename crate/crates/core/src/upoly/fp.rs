//! Polynomials over a prime field `F_p`, `p < 2^32`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::UPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpPoly {
    p: u64,
    c: Vec<u64>,
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

impl FpPoly {
    pub fn new(p: u64, mut c: Vec<u64>) -> Self {
        assert!((2..(1 << 32)).contains(&p), "modulus out of range");
        for v in &mut c {
            *v %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { p, c }
    }

    pub fn from_upoly(g: &UPoly, p: u64) -> Self {
        let m = BigInt::from(p);
        FpPoly::new(
            p,
            g.coeffs()
                .iter()
                .map(|c| c.mod_floor(&m).to_u64().expect("reduced"))
                .collect(),
        )
    }

    /// Lifts coefficients to `[0, p)` integers.
    pub fn to_upoly(&self) -> UPoly {
        UPoly::new(self.c.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn zero_like(&self) -> Self {
        FpPoly { p: self.p, c: Vec::new() }
    }

    fn one_like(&self) -> Self {
        FpPoly { p: self.p, c: vec![1] }
    }

    /// `Y`
    pub fn x(p: u64) -> Self {
        FpPoly::new(p, vec![0, 1])
    }

    pub fn eval(&self, y: u64) -> u64 {
        let mut acc = 0;
        for &c in self.c.iter().rev() {
            acc = (acc * y + c) % self.p;
        }
        acc
    }

    pub fn monic(&self) -> Self {
        match self.c.last() {
            None => self.clone(),
            Some(&lc) => self.scale(inv_mod(lc, self.p)),
        }
    }

    pub fn scale(&self, k: u64) -> Self {
        FpPoly::new(self.p, self.c.iter().map(|&v| v * (k % self.p) % self.p).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let get = |v: &Vec<u64>, i: usize| v.get(i).copied().unwrap_or(0);
        FpPoly::new(self.p, (0..n).map(|i| (get(&self.c, i) + get(&o.c, i)) % self.p).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let get = |v: &Vec<u64>, i: usize| v.get(i).copied().unwrap_or(0);
        FpPoly::new(
            self.p,
            (0..n).map(|i| (get(&self.c, i) + self.p - get(&o.c, i)) % self.p).collect(),
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return self.zero_like();
        }
        let mut out = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = (out[i + j] + a * b) % self.p;
            }
        }
        FpPoly::new(self.p, out)
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        let inv = inv_mod(*d.c.last().expect("nonzero"), self.p);
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (self.zero_like(), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd];
        for k in (0..q.len()).rev() {
            let t = r[k + dd] * inv % self.p;
            q[k] = t;
            if t == 0 {
                continue;
            }
            for (i, &c) in d.c.iter().enumerate() {
                r[k + i] = (r[k + i] + self.p - t * c % self.p) % self.p;
            }
        }
        r.truncate(dd);
        (FpPoly::new(self.p, q), FpPoly::new(self.p, r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s*self + t*o = g`, `g` monic.
    pub fn ext_gcd(&self, o: &Self) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (self.one_like(), self.zero_like());
        let (mut t0, mut t1) = (self.zero_like(), self.one_like());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        match r0.c.last() {
            None => (r0, s0, t0),
            Some(&lc) => {
                let k = inv_mod(lc, self.p);
                (r0.scale(k), s0.scale(k), t0.scale(k))
            }
        }
    }

    pub fn derivative(&self) -> Self {
        FpPoly::new(
            self.p,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &v)| (i as u64 % self.p) * v % self.p)
                .collect(),
        )
    }

    /// `self^e mod m`
    pub fn pow_mod(&self, mut e: u64, m: &Self) -> Self {
        let mut base = self.rem(m);
        let mut acc = self.one_like().rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    /// `Y^(p^k) mod m` by k successive p-th powers.
    fn frobenius_power(&self, k: usize, m: &Self) -> Self {
        let mut acc = FpPoly::x(self.p).rem(m);
        for _ in 0..k {
            acc = acc.pow_mod(self.p, m);
        }
        acc
    }

    pub fn is_squarefree(&self) -> bool {
        self.degree().is_some_and(|d| d == 0 || self.gcd(&self.derivative()).degree() == Some(0))
    }

    /// Number of distinct roots in `F_p`; `None` for the zero polynomial.
    pub fn count_distinct_roots(&self) -> Option<u64> {
        let d = self.degree()?;
        if d == 0 {
            return Some(0);
        }
        if d == 1 {
            return Some(1);
        }
        if self.p <= 32 * d as u64 {
            return Some((0..self.p).filter(|&y| self.eval(y) == 0).count() as u64);
        }
        let f = self.monic();
        let xp = FpPoly::x(self.p).pow_mod(self.p, &f);
        let g = f.gcd(&xp.sub(&FpPoly::x(self.p)));
        Some(g.degree().unwrap_or(0) as u64)
    }

    /// Distinct-degree factorization of a monic squarefree polynomial:
    /// `(product of all irreducible factors of degree d, d)`.
    pub fn distinct_degree(&self) -> Vec<(FpPoly, usize)> {
        let mut out = Vec::new();
        let mut f = self.monic();
        let mut h = FpPoly::x(self.p).rem(&f);
        let mut d = 0;
        while let Some(deg) = f.degree() {
            if deg < 2 * (d + 1) {
                break;
            }
            d += 1;
            h = h.pow_mod(self.p, &f);
            let g = f.gcd(&h.sub(&FpPoly::x(self.p)));
            if g.degree().unwrap_or(0) > 0 {
                f = f.div_rem(&g).0;
                h = h.rem(&f);
                out.push((g, d));
            }
        }
        if let Some(deg) = f.degree() {
            if deg > 0 {
                out.push((f, deg));
            }
        }
        out
    }

    /// Cantor-Zassenhaus equal-degree splitting (odd `p`): `self` is monic,
    /// squarefree, a product of irreducibles of degree `d`.
    pub fn equal_degree(&self, d: usize, rng: &mut ChaCha8Rng) -> Vec<FpPoly> {
        let n = self.degree().unwrap_or(0);
        if n <= d {
            return vec![self.monic()];
        }
        assert!(self.p % 2 == 1, "equal-degree splitting needs odd p");
        let exp_half = {
            // (p^d - 1) / 2, as repeated powering when it exceeds u64
            let pd = (self.p as u128).checked_pow(d as u32);
            pd.and_then(|v| u64::try_from((v - 1) / 2).ok())
        };
        loop {
            let a = FpPoly::new(self.p, (0..n).map(|_| rng.gen_range(0..self.p)).collect());
            if a.degree().unwrap_or(0) < 1 {
                continue;
            }
            let g = a.gcd(self);
            if g.degree().unwrap_or(0) > 0 {
                let mut parts = g.equal_degree(d, rng);
                parts.extend(self.div_rem(&g).0.equal_degree(d, rng));
                return parts;
            }
            let b = match exp_half {
                Some(e) => a.pow_mod(e, self),
                None => {
                    // a^((p^d-1)/2) = prod_{i<d} a^(p^i * (p-1)/2)
                    let mut acc = self.one_like();
                    let mut ai = a.rem(self);
                    for _ in 0..d {
                        acc = acc.mul(&ai.pow_mod((self.p - 1) / 2, self)).rem(self);
                        ai = ai.pow_mod(self.p, self);
                    }
                    acc
                }
            };
            let g = self.gcd(&b.sub(&self.one_like()));
            let gd = g.degree().unwrap_or(0);
            if gd > 0 && gd < n {
                let mut parts = g.equal_degree(d, rng);
                parts.extend(self.div_rem(&g).0.equal_degree(d, rng));
                return parts;
            }
        }
    }

    /// Monic irreducible factors of a squarefree polynomial, sorted.
    pub fn factor_squarefree(&self, rng: &mut ChaCha8Rng) -> Vec<FpPoly> {
        let mut out = Vec::new();
        for (g, d) in self.distinct_degree() {
            out.extend(g.equal_degree(d, rng));
        }
        out.sort_by(|a, b| a.c.len().cmp(&b.c.len()).then_with(|| a.c.cmp(&b.c)));
        out
    }

    /// Degrees of the irreducible factors of a squarefree polynomial,
    /// read off the distinct-degree split.
    pub fn factor_degrees(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (g, d) in self.distinct_degree() {
            let count = g.degree().unwrap_or(0) / d;
            out.extend(std::iter::repeat_n(d, count));
        }
        out
    }

    #[allow(dead_code)]
    pub(crate) fn frobenius(&self, k: usize, m: &Self) -> Self {
        self.frobenius_power(k, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn fp(p: u64, c: &[u64]) -> FpPoly {
        FpPoly::new(p, c.to_vec())
    }

    #[test]
    fn root_counts() {
        assert_eq!(fp(5, &[4, 0, 1]).count_distinct_roots(), Some(2));
        assert_eq!(fp(5, &[3, 0, 1]).count_distinct_roots(), Some(0));
        assert_eq!(fp(5, &[0, 0, 1]).count_distinct_roots(), Some(1));
        // large p path via gcd with Y^p - Y
        let p = 1_000_003;
        let g = fp(p, &[p - 1, 1]).mul(&fp(p, &[p - 2, 1])).mul(&fp(p, &[1, 0, 1]));
        let brute = if (p % 4) == 1 { 4 } else { 2 };
        assert_eq!(g.count_distinct_roots(), Some(brute));
    }

    #[test]
    fn ddf_and_edf_recover_factors() {
        let p = 7;
        let a = fp(p, &[1, 1]);
        let b = fp(p, &[3, 1]);
        let c = fp(p, &[1, 0, 1]); // -1 is a non-residue mod 7
        let d = fp(p, &[3, 1, 0, 1]); // Y^3 + Y + 3
        let f = a.mul(&b).mul(&c).mul(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let factors = f.factor_squarefree(&mut rng);
        let product = factors.iter().fold(fp(p, &[1]), |acc, g| acc.mul(g));
        assert_eq!(product, f.monic());
        assert!(factors.iter().all(|g| g.degree().unwrap() >= 1));
        let mut degs = f.factor_degrees();
        degs.sort();
        assert_eq!(degs, factors.iter().map(|g| g.degree().unwrap()).collect::<Vec<_>>());
    }

    #[test]
    fn ext_gcd_bezout() {
        let p = 11;
        let a = fp(p, &[1, 2, 3]);
        let b = fp(p, &[1, 1]);
        let (g, s, t) = a.ext_gcd(&b);
        assert_eq!(g, fp(p, &[1]));
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
    }
}
