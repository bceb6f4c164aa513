//! Exact rational approximation by continued fractions.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// A reduced fraction `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn from_big(r: &BigRational) -> Result<Self> {
        let r = r.reduced();
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(num), Some(den)) => Ok(Rational { num, den }),
            _ => Err(Error::InvalidInput(format!("rational {r} does not fit in i64"))),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or(Error::Domain { what: "rational", value: x })
}

/// Continued-fraction convergents `p_k/q_k` of the exact binary value of `x`.
pub fn convergents(x: f64) -> Result<Vec<Rational>> {
    let mut rest = exact(x)?;
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (rest.floor().to_integer(), BigInt::one());
    let mut out = vec![Rational::from_big(&BigRational::new(p1.clone(), q1.clone()))?];
    rest = rest.clone() - rest.floor();
    while !rest.is_zero() {
        rest = rest.recip();
        let a = rest.floor().to_integer();
        rest = rest.clone() - BigRational::from_integer(a.clone());
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        match Rational::from_big(&BigRational::new(p1.clone(), q1.clone())) {
            Ok(r) => out.push(r),
            Err(_) => break,
        }
    }
    Ok(out)
}

/// The rational with the smallest denominator in the open interval
/// `(lo, hi)`, computed exactly (Stern–Brocot descent along the continued
/// fraction expansions of the endpoints).
pub fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    assert!(lo < hi, "empty interval");
    if lo.is_negative() && hi.is_positive() {
        return BigRational::zero();
    }
    if !hi.is_positive() {
        return -simplest_nonneg(&-hi, &-lo);
    }
    simplest_nonneg(lo, hi)
}

// 0 ≤ lo < hi
fn simplest_nonneg(lo: &BigRational, hi: &BigRational) -> BigRational {
    let fl = lo.floor();
    let next = &fl + BigRational::one();
    if &next < hi {
        return next;
    }
    let frac_hi = hi - &fl;
    if *lo == fl {
        let k = frac_hi.recip().floor() + BigRational::one();
        return fl + k.recip();
    }
    let frac_lo = lo - &fl;
    fl + simplest_nonneg(&frac_hi.recip(), &frac_lo.recip()).recip()
}

/// Minimal-denominator rational `q` with `|q − x| < tol`.
pub fn rationalize(x: f64, tol: f64) -> Result<Rational> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let centre = exact(x)?;
    let t = exact(tol)?;
    let q = simplest_between(&(&centre - &t), &(&centre + &t));
    Rational::from_big(&q)
}
