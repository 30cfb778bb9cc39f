//! Dense univariate polynomials over the integers.

mod factor;
pub mod fp;
mod roots;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::poly::MPoly;

pub use factor::{factor_over_z, is_reducible_over_q, FactorList};
pub use roots::{
    has_integer_root, has_rational_root, integer_roots, rational_roots, real_root_isolation,
    roots_mod_p, sturm_sequence, Dyadic, IsolatingInterval, RootsModP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UPolyError {
    /// The polynomial is identically zero; every value is a root.
    #[error("polynomial is identically zero")]
    IdenticallyZero,
    #[error("operation requires degree at least {min}, polynomial has degree {found}")]
    DegreeTooLow { min: usize, found: usize },
    /// Reducibility is only decided for degree >= 2.
    #[error("reducibility is not defined here for degree {0}")]
    NotApplicable(usize),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is too large (must be below 2^32)")]
    ModulusTooLarge(u64),
}

/// Coefficients constant-term first; the last entry is nonzero unless the
/// polynomial is zero (empty).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UPoly {
    coeffs: Vec<BigInt>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        UPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        UPoly::new(vec![c.into()])
    }

    /// `Y - a`
    pub fn linear_root(a: impl Into<BigInt>) -> Self {
        UPoly::new(vec![-a.into(), BigInt::one()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lc(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn eval(&self, y: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * y + c;
        }
        acc
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// Nonnegative gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// `self / content`, normalized to a positive leading coefficient.
    pub fn primitive_part(&self) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        let mut c = self.content();
        if self.lc().is_some_and(Signed::is_negative) {
            c = -c;
        }
        UPoly::new(self.coeffs.iter().map(|a| a / &c).collect())
    }

    pub fn scale(&self, k: &BigInt) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn neg(&self) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }

    pub fn pow(&self, e: u32) -> UPoly {
        (0..e).fold(UPoly::constant(1), |acc, _| acc.mul(self))
    }

    /// Pseudo-remainder: `lc(d)^(deg self - deg d + 1) * self mod d`.
    pub fn pseudo_rem(&self, d: &UPoly) -> UPoly {
        let dd = d.degree().expect("division by zero polynomial");
        let lc = d.lc().expect("nonzero").clone();
        let mut r = self.clone();
        let Some(mut steps) = self.degree().and_then(|n| (n + 1).checked_sub(dd)) else {
            return r;
        };
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let lr = r.lc().expect("nonzero").clone();
            let shift = rd - dd;
            let mut next: Vec<BigInt> = r.coeffs.iter().map(|c| c * &lc).collect();
            for (i, c) in d.coeffs.iter().enumerate() {
                next[i + shift] -= &lr * c;
            }
            r = UPoly::new(next);
            steps -= 1;
        }
        // Pad the remaining multiplications so the factor is exactly lc^(n-m+1).
        if steps > 0 {
            r = r.scale(&num_traits::pow(lc, steps));
        }
        r
    }

    /// Exact quotient over Z, or `None` when `d` does not divide `self` in Z[Y].
    pub fn div_exact(&self, d: &UPoly) -> Option<UPoly> {
        let dd = d.degree()?;
        if self.is_zero() {
            return Some(UPoly::zero());
        }
        let n = self.degree()?;
        if n < dd {
            return None;
        }
        let lc = d.lc()?;
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); n - dd + 1];
        for k in (0..=n - dd).rev() {
            let top = &r[k + dd];
            if top.is_zero() {
                continue;
            }
            let (quot, rem) = top.div_rem(lc);
            if !rem.is_zero() {
                return None;
            }
            for (i, c) in d.coeffs.iter().enumerate() {
                r[k + i] -= &quot * c;
            }
            q[k] = quot;
        }
        if r.iter().all(Zero::is_zero) {
            Some(UPoly::new(q))
        } else {
            None
        }
    }

    /// Gcd over Z (content gcd times the primitive gcd), positive leading
    /// coefficient. Computed by the primitive PRS.
    pub fn gcd(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            let g = if self.is_zero() { other } else { self };
            return if g.lc().is_some_and(Signed::is_negative) { g.neg() } else { g.clone() };
        }
        let content = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part().scale(&content)
    }

    /// `self / gcd(self, self')`, primitive.
    pub fn squarefree_part(&self) -> UPoly {
        let p = self.primitive_part();
        if p.degree().unwrap_or(0) < 1 {
            return p;
        }
        let g = p.gcd(&p.derivative()).primitive_part();
        p.div_exact(&g).expect("gcd divides").primitive_part()
    }

    /// Yun's square-free decomposition of the primitive part:
    /// `pp(self) = prod a_i^i` with each `a_i` squarefree and pairwise coprime.
    /// Returns the nonconstant `(a_i, i)`.
    pub fn squarefree_decomposition(&self) -> Vec<(UPoly, u32)> {
        let f = self.primitive_part();
        let mut out = Vec::new();
        if f.degree().unwrap_or(0) < 1 {
            return out;
        }
        let fp = f.derivative();
        let a0 = f.gcd(&fp).primitive_part();
        let mut b = f.div_exact(&a0).expect("gcd divides");
        // a0 is primitive, so quotients by it stay in Z[Y] (Gauss's lemma)
        let mut c = fp.div_exact(&a0).expect("gcd divides derivative");
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree().unwrap_or(0) >= 1 {
            let a = b.gcd(&d).primitive_part();
            if a.degree().unwrap_or(0) >= 1 {
                out.push((a.clone(), i));
            }
            let b_next = b.div_exact(&a).expect("gcd divides");
            c = d.div_exact(&a).expect("gcd divides");
            d = c.sub(&b_next.derivative());
            b = b_next;
            i += 1;
        }
        out
    }

    /// Embeds as an [`MPoly`] in `Y` with `nvars` unused X variables.
    pub fn to_mpoly(&self, nvars: usize) -> MPoly {
        MPoly::from_terms(
            nvars,
            self.coeffs.iter().enumerate().map(|(i, c)| {
                let mut e = vec![0; nvars + 1];
                e[0] = i as u32;
                (e, c.clone())
            }),
        )
    }

    /// Reads a polynomial in `Y` only.
    pub fn from_mpoly(f: &MPoly) -> Option<UPoly> {
        let mut coeffs = vec![BigInt::zero(); f.deg_y().unwrap_or(0) as usize + 1];
        for (m, c) in f.terms() {
            if m.exponents()[1..].iter().any(|&e| e > 0) {
                return None;
            }
            coeffs[m.y_degree() as usize] = c.clone();
        }
        Some(UPoly::new(coeffs))
    }

    pub fn coefficient_norm(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    /// Discriminant `(-1)^(d(d-1)/2) Res(g, g') / lc(g)`.
    pub fn discriminant(&self) -> Result<BigInt, UPolyError> {
        let d = self.degree().unwrap_or(0);
        if d < 1 {
            return Err(UPolyError::DegreeTooLow { min: 1, found: d });
        }
        if d == 1 {
            return Ok(BigInt::one());
        }
        let res = resultant(self, &self.derivative());
        let lc = self.lc().expect("nonzero");
        let q = res / lc;
        Ok(if (d * (d - 1) / 2) % 2 == 1 { -q } else { q })
    }
}

/// Resultant via the Sylvester determinant (fraction-free Bareiss elimination).
pub fn resultant(f: &UPoly, g: &UPoly) -> BigInt {
    let (Some(m), Some(n)) = (f.degree(), g.degree()) else {
        return BigInt::zero();
    };
    if m + n == 0 {
        return BigInt::one();
    }
    let size = m + n;
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    // rows hold coefficients highest degree first
    for r in 0..n {
        for (i, c) in f.coeffs.iter().rev().enumerate() {
            mat[r][r + i] = c.clone();
        }
    }
    for r in 0..m {
        for (i, c) in g.coeffs.iter().rev().enumerate() {
            mat[n + r][r + i] = c.clone();
        }
    }
    bareiss_det(mat)
}

fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_mpoly(0))
    }
}
