//! Sparse integer polynomials in a covering variable `Y` and base variables
//! `X1..Xn`.
//!
//! Exponent vectors have length `nvars + 1`; position 0 is the exponent of `Y`.
//! Terms are kept in a map ordered graded-lexicographically, so iteration (and
//! therefore printing) is deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith;
use crate::upoly::UPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("expected {expected} values for the X variables, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("polynomials live in different variable sets ({0} vs {1} X variables)")]
    VariableMismatch(usize, usize),
}

/// An exponent vector compared in graded-lexicographic order: higher total
/// degree is greater, ties broken lexicographically with `Y` most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars + 1])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn y_degree(&self) -> u32 {
        self.0[0]
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| u64::from(e)).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_add(*b)?);
        }
        Some(Monomial(out))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with arbitrary-precision coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

/// Degree data returned by [`MPoly::degree_info`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeInfo {
    pub total: u64,
    pub deg_y: u32,
    pub deg_x: Vec<u32>,
    /// Coefficient of `Y^deg_y`, as a polynomial in the `X` variables.
    pub y_leading_coefficient: MPoly,
    pub constant_leading_in_y: bool,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = MPoly::zero(nvars);
        p.add_term(Monomial::one(nvars), c.into());
        p
    }

    pub fn y(nvars: usize) -> Self {
        let mut e = vec![0; nvars + 1];
        e[0] = 1;
        MPoly::monomial(nvars, e, BigInt::one())
    }

    /// The variable `X_i`, 1-based.
    pub fn x(nvars: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= nvars, "X{i} out of range for {nvars} variables");
        let mut e = vec![0; nvars + 1];
        e[i] = 1;
        MPoly::monomial(nvars, e, BigInt::one())
    }

    pub fn monomial(nvars: usize, exponents: Vec<u32>, c: impl Into<BigInt>) -> Self {
        assert_eq!(exponents.len(), nvars + 1);
        let mut p = MPoly::zero(nvars);
        p.add_term(Monomial(exponents), c.into());
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// exponent vectors are summed.
    pub fn from_terms<I, C>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
        C: Into<BigInt>,
    {
        let mut p = MPoly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars + 1, "exponent vector length must be nvars + 1");
            p.add_term(Monomial(e), c.into());
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> BigInt {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().next_back().map(Monomial::total_degree)
    }

    pub fn deg_y(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::y_degree).max()
    }

    /// Degree in exponent position `pos` (0 is `Y`).
    pub fn degree_in(&self, pos: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[pos]).max()
    }

    pub fn depends_on_y(&self) -> bool {
        self.deg_y().unwrap_or(0) > 0
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::total_degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    fn check_same_space(&self, other: &MPoly) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::VariableMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &MPoly) -> Result<MPoly, PolyError> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &MPoly) -> Result<MPoly, PolyError> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &MPoly) -> Result<MPoly, PolyError> {
        self.check_same_space(other)?;
        let mut out = MPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb).expect("exponent overflow in polynomial product");
                out.add_term(m, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    /// `self^e` by repeated squaring; `None` if an exponent would overflow.
    pub fn checked_pow(&self, mut e: u32) -> Option<MPoly> {
        if let Some(d) = self.total_degree() {
            if d.checked_mul(u64::from(e))? > u64::from(u32::MAX) {
                return None;
            }
        }
        // Coefficient growth cap: about 16M bits per coefficient.
        let norm_bits = self.coefficient_norm().bits() + (self.num_terms() as u64).max(1).ilog2() as u64 + 1;
        if self.num_terms() > 0 && !(self.num_terms() == 1 && self.coefficient_norm().is_one())
            && norm_bits.saturating_mul(u64::from(e)) > (1 << 24) {
                return None;
            }
        let mut base = self.clone();
        let mut acc = MPoly::constant(self.nvars, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.try_mul(&base).ok()?;
            }
            e >>= 1;
            if e > 0 {
                base = base.try_mul(&base).ok()?;
            }
        }
        Some(acc)
    }

    fn check_point(&self, x: &[BigInt]) -> Result<(), PolyError> {
        if x.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Exact value of `F(y, x)`.
    pub fn evaluate(&self, y: &BigInt, x: &[BigInt]) -> Result<BigInt, PolyError> {
        self.check_point(x)?;
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let v = if i == 0 { y } else { &x[i - 1] };
                    t *= num_traits::pow(v.clone(), e as usize);
                }
            }
            total += t;
        }
        Ok(total)
    }

    pub fn evaluate_i64(&self, y: i64, x: &[i64]) -> Result<BigInt, PolyError> {
        let xb: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        self.evaluate(&BigInt::from(y), &xb)
    }

    /// The univariate polynomial `F(Y, x)`.
    pub fn specialize_x(&self, x: &[BigInt]) -> Result<UPoly, PolyError> {
        self.check_point(x)?;
        let deg = self.deg_y().unwrap_or(0) as usize;
        let mut coeffs = vec![BigInt::zero(); deg + 1];
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate().skip(1) {
                if e > 0 {
                    t *= num_traits::pow(x[i - 1].clone(), e as usize);
                }
            }
            coeffs[m.0[0] as usize] += t;
        }
        Ok(UPoly::new(coeffs))
    }

    pub fn specialize_x_i64(&self, x: &[i64]) -> Result<UPoly, PolyError> {
        let xb: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        self.specialize_x(&xb)
    }

    /// `||F||`: the largest coefficient magnitude, 0 for the zero polynomial.
    pub fn coefficient_norm(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_default()
    }

    /// Coefficients of `Y^0, Y^1, ..., Y^deg_y`, each a polynomial in the X
    /// variables (same variable space, Y-exponent zero).
    pub fn y_coefficients(&self) -> Vec<MPoly> {
        let deg = self.deg_y().unwrap_or(0) as usize;
        let mut out = vec![MPoly::zero(self.nvars); deg + 1];
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let j = e[0] as usize;
            e[0] = 0;
            out[j].add_term(Monomial(e), c.clone());
        }
        out
    }

    pub fn degree_info(&self) -> Result<DegreeInfo, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let deg_y = self.deg_y().unwrap_or(0);
        let lead = self.y_coefficients().swap_remove(deg_y as usize);
        let constant_leading_in_y = lead.terms.keys().all(Monomial::is_constant);
        Ok(DegreeInfo {
            total: self.total_degree().unwrap_or(0),
            deg_y,
            deg_x: (1..=self.nvars)
                .map(|i| self.degree_in(i).unwrap_or(0))
                .collect(),
            y_leading_coefficient: lead,
            constant_leading_in_y,
        })
    }

    /// The homogeneous part of highest total degree.
    pub fn leading_form(&self) -> Result<MPoly, PolyError> {
        let top = self.total_degree().ok_or(PolyError::ZeroPolynomial)?;
        Ok(MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.total_degree() == top)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        })
    }

    /// Coefficient-wise reduction into `[0, p)`, dropping vanishing terms.
    pub fn reduce_mod_p(&self, p: u64) -> Result<MPoly, PolyError> {
        if !arith::is_prime(p) {
            return Err(PolyError::NotPrime(p));
        }
        let modulus = BigInt::from(p);
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.mod_floor(&modulus));
        }
        Ok(out)
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        if i == 0 {
            f.write_str("Y")?;
        } else {
            write!(f, "X{i}")?;
        }
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (idx, (m, c)) in self.terms().enumerate() {
            let negative = c.is_negative();
            match (idx, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            if m.is_constant() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write_monomial(f, m)?;
            }
        }
        Ok(())
    }
}

/// Canonical text form: graded-lex term order, `*` between factors, `^` for
/// powers. Round-trips through [`crate::parse::parse_poly`].
pub fn format_poly(f: &MPoly) -> String {
    f.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn p(s: &str, n: usize) -> MPoly {
        parse_poly(s, n).unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn format_examples() {
        assert_eq!(format_poly(&MPoly::zero(2)), "0");
        let f = MPoly::from_terms(1, [(vec![2, 0], 1), (vec![0, 1], -1)]);
        assert_eq!(format_poly(&f), "Y^2 - X1");
        assert_eq!(format_poly(&p("X2*X1", 2)), "X1*X2");
        assert_eq!(format_poly(&p("-3*X1^2 + 7 - Y", 1)), "-3*X1^2 - Y + 7");
    }

    #[test]
    fn evaluate_examples() {
        let f = p("Y^2 - (X1 + X2)", 2);
        assert_eq!(f.evaluate_i64(2, &[1, 3]).unwrap(), big(0));
        assert_eq!(f.evaluate_i64(0, &[0, 0]).unwrap(), big(0));
        assert_eq!(f.evaluate_i64(3, &[1, 3]).unwrap(), big(5));
        assert_eq!(
            f.evaluate_i64(3, &[1]).unwrap_err(),
            PolyError::DimensionMismatch { expected: 2, found: 1 }
        );
    }

    #[test]
    fn specialize_examples() {
        let f = p("Y^2 - (X1 + X2)", 2);
        assert_eq!(f.specialize_x_i64(&[1, 3]).unwrap(), UPoly::from_i64s(&[-4, 0, 1]));
        assert_eq!(f.specialize_x_i64(&[0, 0]).unwrap(), UPoly::from_i64s(&[0, 0, 1]));
        let g = p("Y^2 - X1*Y - X2", 2);
        assert_eq!(g.specialize_x_i64(&[2, 1]).unwrap(), UPoly::from_i64s(&[-1, -2, 1]));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(p("Y^2 - 3*X1", 1).coefficient_norm(), big(3));
        assert_eq!(MPoly::zero(3).coefficient_norm(), big(0));
        assert_eq!(
            p("Y^2 + X1^2 - 1105*(X2 + X3)", 3).coefficient_norm(),
            big(1105)
        );
    }

    #[test]
    fn degree_info_examples() {
        let d = p("Y^2 - (X1 + X2)", 2).degree_info().unwrap();
        assert_eq!((d.total, d.deg_y, d.constant_leading_in_y), (2, 2, true));
        assert!(!p("X1*Y^2 - 1", 1).degree_info().unwrap().constant_leading_in_y);
        let d = p("Y^3 + Y*X1^2 + X2^3", 2).degree_info().unwrap();
        assert_eq!((d.total, d.deg_y), (3, 3));
        assert_eq!(d.deg_x, vec![2, 3]);
        assert_eq!(MPoly::zero(1).degree_info().unwrap_err(), PolyError::ZeroPolynomial);
    }

    #[test]
    fn leading_form_examples() {
        assert_eq!(p("Y^2 - (X1 + X2)", 2).leading_form().unwrap(), p("Y^2", 2));
        assert_eq!(p("Y^2 + X1^2 - 5", 1).leading_form().unwrap(), p("Y^2 + X1^2", 1));
        let q = p("X1*X2 - X3*X4", 4);
        assert_eq!(q.leading_form().unwrap(), q);
        assert!(MPoly::zero(1).leading_form().is_err());
    }

    #[test]
    fn reduce_mod_p_examples() {
        assert_eq!(
            p("Y^2 - (X1 + X2)", 2).reduce_mod_p(5).unwrap(),
            p("Y^2 + 4*X1 + 4*X2", 2)
        );
        assert_eq!(p("5*X1 + Y", 1).reduce_mod_p(5).unwrap(), p("Y", 1));
        assert!(p("1105*X2", 2).reduce_mod_p(13).unwrap().is_zero());
        assert_eq!(p("Y", 0).reduce_mod_p(6).unwrap_err(), PolyError::NotPrime(6));
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let a = Monomial::new(vec![0, 1, 1]);
        let b = Monomial::new(vec![2, 0, 0]);
        let c = Monomial::new(vec![0, 3, 0]);
        assert!(b > a);
        assert!(c > b);
        assert!(Monomial::new(vec![0, 1, 0]) > Monomial::new(vec![0, 0, 1]));
    }
}
