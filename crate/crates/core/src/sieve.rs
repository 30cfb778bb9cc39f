//! Large-sieve upper bound for the number of solvable fibers:
//! `N <= 2^n (B^n + Q^(2n)) / L(Q)` with
//! `L(Q) = sum over squarefree q <= Q of prod_{p | q} w_p / (1 - w_p)` and
//! `1 - w_p = N_p / p^n`.

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::primes_upto;
use crate::counting::{self, CountError, CountOptions, Solvability};
use crate::poly::MPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SieveError {
    #[error(transparent)]
    Count(#[from] CountError),
    /// `N_p = 0`: no fiber is solvable modulo `p`, so none is over Z.
    #[error("no fiber is solvable modulo {0}")]
    ZeroCertificate(u64),
    #[error("{0} is a bad prime for this polynomial")]
    BadPrime(u64),
    #[error("height must be at least 1")]
    HeightTooSmall,
    #[error("sieve level Q must be at least 1")]
    LevelTooSmall,
    #[error("residue filter modulus must be positive")]
    BadResidueFilter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LMode {
    /// All squarefree `q <= Q`.
    Full,
    /// `1 + sum_{p <= Q} ratio_p`, a partial sum of the full `L(Q)`.
    PrimesOnly,
}

impl LMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LMode::Full => "full",
            LMode::PrimesOnly => "primes-only",
        }
    }

    /// Full up to `Q = 200`, primes only above.
    pub fn default_for(q: u64) -> LMode {
        if q <= 200 {
            LMode::Full
        } else {
            LMode::PrimesOnly
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDensity {
    pub p: u64,
    pub np: u64,
    /// `p^n`
    pub pn: BigInt,
    /// `1 - N_p / p^n`
    pub omega: BigRational,
    /// `(p^n - N_p) / N_p`; `None` when `N_p = 0`.
    pub ratio: Option<BigRational>,
}

impl LocalDensity {
    pub fn is_zero_certificate(&self) -> bool {
        self.ratio.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SieveReport {
    pub b: u64,
    pub q: u64,
    pub n: usize,
    pub mode: LMode,
    pub densities: Vec<LocalDensity>,
    /// `None` when a zero certificate ended the computation.
    pub l: Option<BigRational>,
    pub bound: BigRational,
    pub exact_zero_certificate: Option<u64>,
    /// Primes `<= Q` where `F` degenerates; left out of `L(Q)`.
    pub skipped_primes: Vec<u64>,
    /// Only primes `p = a mod m` enter `L(Q)` when set.
    pub residue_filter: Option<(u64, u64)>,
}

/// Reduction of `F` mod `p` vanishes or loses total degree or Y-degree.
pub fn is_bad_prime(f: &MPoly, p: u64) -> Result<bool, CountError> {
    let r = f.reduce_mod_p(p)?;
    Ok(r.is_zero() || r.total_degree() != f.total_degree() || r.deg_y() != f.deg_y())
}

pub fn local_density(f: &MPoly, p: u64, opts: CountOptions) -> Result<LocalDensity, SieveError> {
    if is_bad_prime(f, p).map_err(SieveError::Count)? {
        return Err(SieveError::BadPrime(p));
    }
    let np = counting::np(f, p, opts)?;
    let pn = num_traits::pow(BigInt::from(p), f.nvars());
    let npb = BigInt::from(np);
    let omega = BigRational::one() - BigRational::new(npb.clone(), pn.clone());
    let ratio = (np > 0).then(|| BigRational::new(&pn - &npb, npb));
    Ok(LocalDensity { p, np, pn, omega, ratio })
}

/// Terms `(q, prod_{p | q} ratio_p)` of `L(Q)` in increasing `q`, over the
/// squarefree `q <= Q` built from the given densities (primes absent from
/// `densities` never divide an included `q`).
pub fn l_terms(densities: &[LocalDensity], q_max: u64, mode: LMode) -> Result<Vec<(u64, BigRational)>, SieveError> {
    let mut primes: Vec<&LocalDensity> = densities.iter().filter(|d| d.p <= q_max).collect();
    primes.sort_by_key(|d| d.p);
    if let Some(d) = primes.iter().find(|d| d.is_zero_certificate()) {
        return Err(SieveError::ZeroCertificate(d.p));
    }
    let mut terms = vec![(1u64, BigRational::one())];
    match mode {
        LMode::PrimesOnly => {
            for d in &primes {
                terms.push((d.p, d.ratio.clone().expect("checked")));
            }
        }
        LMode::Full => {
            // depth-first over increasing primes
            let mut stack: Vec<(u64, usize, BigRational)> = vec![(1, 0, BigRational::one())];
            while let Some((q, start, prod)) = stack.pop() {
                for (i, d) in primes.iter().enumerate().skip(start) {
                    let Some(next) = q.checked_mul(d.p).filter(|&v| v <= q_max) else { break };
                    let r = &prod * d.ratio.as_ref().expect("checked");
                    terms.push((next, r.clone()));
                    stack.push((next, i + 1, r));
                }
            }
            terms.sort_by_key(|t| t.0);
        }
    }
    Ok(terms)
}

pub fn l_from_densities(densities: &[LocalDensity], q_max: u64, mode: LMode) -> Result<BigRational, SieveError> {
    Ok(l_terms(densities, q_max, mode)?
        .into_iter()
        .fold(BigRational::zero(), |acc, (_, t)| acc + t))
}

/// Local densities at every good prime `p <= q_max` (filtered by residue
/// class when requested), plus the skipped bad primes. Stops at the first
/// zero certificate, which is the last density returned.
fn densities_upto(
    f: &MPoly,
    q_max: u64,
    residue: Option<(u64, u64)>,
    opts: CountOptions,
) -> Result<(Vec<LocalDensity>, Vec<u64>), SieveError> {
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for p in primes_upto(q_max) {
        if let Some((a, m)) = residue {
            if p % m != a % m {
                continue;
            }
        }
        if is_bad_prime(f, p)? {
            skipped.push(p);
            continue;
        }
        let d = local_density(f, p, opts)?;
        let stop = d.is_zero_certificate();
        out.push(d);
        if stop {
            break;
        }
    }
    Ok((out, skipped))
}

pub fn l_of_q(f: &MPoly, q_max: u64, mode: LMode, opts: CountOptions) -> Result<BigRational, SieveError> {
    if q_max == 0 {
        return Err(SieveError::LevelTooSmall);
    }
    let (d, _) = densities_upto(f, q_max, None, opts)?;
    l_from_densities(&d, q_max, mode)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SieveParams {
    /// Defaults to `floor(sqrt(B))`.
    pub q: Option<u64>,
    /// Defaults to [`LMode::default_for`].
    pub mode: Option<LMode>,
    pub residue_filter: Option<(u64, u64)>,
}

pub fn large_sieve_bound(f: &MPoly, b: u64, params: &SieveParams, opts: CountOptions) -> Result<SieveReport, SieveError> {
    if f.is_zero() {
        return Err(CountError::ZeroPolynomial.into());
    }
    if f.deg_y().unwrap_or(0) == 0 {
        return Err(CountError::NoYDependence.into());
    }
    if b == 0 {
        return Err(SieveError::HeightTooSmall);
    }
    if params.residue_filter.is_some_and(|(_, m)| m == 0) {
        return Err(SieveError::BadResidueFilter);
    }
    let q = params.q.unwrap_or_else(|| b.sqrt());
    if q == 0 {
        return Err(SieveError::LevelTooSmall);
    }
    let mode = params.mode.unwrap_or(LMode::default_for(q));
    let n = f.nvars();
    let (densities, skipped_primes) = densities_upto(f, q, params.residue_filter, opts)?;
    let certificate = densities.iter().find(|d| d.is_zero_certificate()).map(|d| d.p);
    let (l, bound) = match certificate {
        Some(_) => (None, BigRational::zero()),
        None => {
            let l = l_from_densities(&densities, q, mode)?;
            let main = num_traits::pow(BigInt::from(b), n) + num_traits::pow(BigInt::from(q), 2 * n);
            let numer = (BigInt::one() << n) * main;
            let bound = BigRational::from_integer(numer) / &l;
            (Some(l), bound)
        }
    };
    Ok(SieveReport {
        b,
        q,
        n,
        mode,
        densities,
        l,
        bound,
        exact_zero_certificate: certificate,
        skipped_primes,
        residue_filter: params.residue_filter,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundComparison {
    pub b: u64,
    pub bound: BigRational,
    pub exact: u64,
    pub sound: bool,
    /// `bound / B^(n - 1/2)`
    pub ratio_to_b_pow: f64,
}

pub fn compare_bound_vs_exact(f: &MPoly, b: u64, opts: CountOptions) -> Result<BoundComparison, SieveError> {
    let report = large_sieve_bound(f, b, &SieveParams::default(), opts)?;
    let exact = counting::count_cov(f, b, Solvability::Integral, opts)?.count;
    let n = f.nvars() as f64;
    let ratio_to_b_pow = report.bound.to_f64().unwrap_or(f64::INFINITY) / (b as f64).powf(n - 0.5);
    Ok(BoundComparison {
        b,
        sound: report.bound >= BigRational::from_integer(BigInt::from(exact)),
        bound: report.bound,
        exact,
        ratio_to_b_pow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn poly(s: &str, n: usize) -> MPoly {
        parse_poly(s, n).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn opts() -> CountOptions {
        CountOptions::default()
    }

    #[test]
    fn local_density_examples() {
        let f = poly("Y^2 - X1", 1);
        let d = local_density(&f, 5, opts()).unwrap();
        assert_eq!((d.np, d.omega.clone(), d.ratio.clone()), (3, rat(2, 5), Some(rat(2, 3))));
        assert_eq!(BigRational::one() - d.omega, BigRational::new(BigInt::from(d.np), d.pn));
        let d = local_density(&f, 2, opts()).unwrap();
        assert_eq!((d.np, d.omega, d.ratio), (2, rat(0, 1), Some(rat(0, 1))));
        let d = local_density(&poly("Y^2 + 1 + 0*X1", 1), 3, opts()).unwrap();
        assert_eq!(d.np, 0);
        assert!(d.is_zero_certificate());
    }

    #[test]
    fn l_of_q_examples() {
        let f = poly("Y^2 - X1", 1);
        assert_eq!(l_of_q(&f, 2, LMode::Full, opts()).unwrap(), rat(1, 1));
        assert_eq!(l_of_q(&f, 6, LMode::Full, opts()).unwrap(), rat(13, 6));
        assert_eq!(l_of_q(&f, 1, LMode::Full, opts()).unwrap(), rat(1, 1));
        assert_eq!(l_of_q(&poly("Y^3 - X1*X2", 2), 1, LMode::Full, opts()).unwrap(), rat(1, 1));
        assert_eq!(
            l_of_q(&poly("Y^2 + 1 + 0*X1", 1), 5, LMode::Full, opts()),
            Err(SieveError::ZeroCertificate(3))
        );
    }

    #[test]
    fn bound_examples() {
        let f = poly("Y^2 - X1", 1);
        let r = large_sieve_bound(&f, 4, &SieveParams::default(), opts()).unwrap();
        assert_eq!((r.q, r.l.clone(), r.bound.clone()), (2, Some(rat(1, 1)), rat(16, 1)));
        let r = large_sieve_bound(&f, 36, &SieveParams::default(), opts()).unwrap();
        assert_eq!((r.q, r.l.clone(), r.bound.clone()), (6, Some(rat(13, 6)), rat(864, 13)));
        let g = poly("Y^2 + 1 + 0*X1", 1);
        let r = large_sieve_bound(&g, 100, &SieveParams::default(), opts()).unwrap();
        assert_eq!(r.exact_zero_certificate, Some(3));
        assert_eq!(r.bound, rat(0, 1));
        assert_eq!(counting::count_cov(&g, 100, Solvability::Integral, opts()).unwrap().count, 0);
    }

    #[test]
    fn comparison_examples() {
        let c = compare_bound_vs_exact(&poly("Y^2 - X1", 1), 4, opts()).unwrap();
        assert_eq!((c.bound.clone(), c.exact), (rat(16, 1), 3));
        assert!((c.ratio_to_b_pow - 8.0).abs() < 1e-12);
        let c = compare_bound_vs_exact(&poly("Y - X1", 1), 10, opts()).unwrap();
        assert_eq!(c.exact, 21);
        assert!(c.sound);
        let c = compare_bound_vs_exact(&poly("Y^2 - (X1 + X2)", 2), 100, opts()).unwrap();
        assert!(c.sound && c.ratio_to_b_pow.is_finite());
    }

    #[test]
    fn full_mode_dominates_primes_only_and_is_order_independent() {
        for (s, n) in [("Y^2 - X1", 1), ("Y^2 - (X1 + X2)", 2), ("Y^3 - X1 - 2", 1), ("Y^2 + X1^2 - 5*X2", 2)] {
            let f = poly(s, n);
            let (d, _) = densities_upto(&f, 40, None, opts()).unwrap();
            let full = l_from_densities(&d, 40, LMode::Full).unwrap();
            let primes = l_from_densities(&d, 40, LMode::PrimesOnly).unwrap();
            assert!(full >= primes, "{s}");
            assert!(full >= BigRational::one());
            let reversed = l_terms(&d, 40, LMode::Full)
                .unwrap()
                .into_iter()
                .rev()
                .fold(BigRational::zero(), |acc, (_, t)| acc + t);
            assert_eq!(reversed, full);
            for x in &d {
                assert!(x.omega >= BigRational::zero() && x.omega <= BigRational::one());
                assert!(x.np > 0);
            }
        }
    }

    #[test]
    fn residue_filter_weakens_bound() {
        let f = poly("Y^2 - X1 - 1", 1);
        let plain = large_sieve_bound(&f, 400, &SieveParams::default(), opts()).unwrap();
        let filtered = SieveParams {
            residue_filter: Some((1, 4)),
            ..SieveParams::default()
        };
        let r = large_sieve_bound(&f, 400, &filtered, opts()).unwrap();
        assert!(r.densities.iter().all(|d| d.p % 4 == 1));
        assert!(r.bound >= plain.bound);
    }

    #[test]
    fn bad_primes_are_skipped() {
        // 3Y^2 - X1 loses its Y-degree mod 3
        let f = poly("3*Y^2 - X1", 1);
        let r = large_sieve_bound(&f, 100, &SieveParams::default(), opts()).unwrap();
        assert_eq!(r.skipped_primes, vec![3]);
        assert_eq!(local_density(&f, 3, opts()), Err(SieveError::BadPrime(3)));
    }
}
