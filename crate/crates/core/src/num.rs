//! Exact rational scalars used throughout the crate.
//!
//! Every production verdict (central cell, degree, validity) is computed over
//! `Rat`, an arbitrary-precision rational. Floating point appears only in the
//! optional cross-check evaluator and in rendering.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `num/den`. Panics if `den == 0`; the result is auto-reduced.
pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn half() -> Rat {
    ratio(1, 2)
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

/// Sign of a rational as -1, 0, +1.
pub fn sign(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Render as "p" or "p/q" (used in reports and JSON documents).
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse "p" or "p/q".
pub fn rat_from_str(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<BigInt>().ok().map(Rat::from_integer),
        Some((p, q)) => {
            let p = p.trim().parse::<BigInt>().ok()?;
            let q = q.trim().parse::<BigInt>().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rat::new(p, q))
            }
        }
    }
}

/// The simplest rational (smallest denominator, then smallest numerator) in
/// the open interval `(lo, hi)`. Stern-Brocot descent; used to recognize
/// rational roots from isolating intervals.
pub fn simplest_rational_between(lo: &Rat, hi: &Rat) -> Rat {
    assert!(lo < hi, "empty interval");
    // Reduce to the case lo >= 0 by shifting/negating.
    if lo.is_negative() && hi.is_positive() {
        return rat_zero();
    }
    if hi.is_negative() || hi.is_zero() {
        return -simplest_rational_between(&-hi.clone(), &-lo.clone());
    }
    if lo.is_zero() {
        // Simplest rational in (0, hi): 1/ceil(1/hi + eps)-ish. Find the
        // smallest q with 1/q < hi, i.e. q > 1/hi.
        if hi > &rat_one() {
            return rat_one();
        }
        let inv = hi.recip();
        let q = inv.floor().numer() + BigInt::one();
        return Rat::new(BigInt::one(), q);
    }
    // 0 < lo < hi. Split off the integer part.
    let fl = lo.floor();
    if &fl >= lo {
        // lo is an integer; (lo, hi) contains lo+1? Only if hi > lo+1.
        let next = fl.clone() + rat_one();
        if hi > &next {
            return next;
        }
        // Interval within (n, n+1): recurse on fractional part.
        let f = simplest_rational_between(&(lo - &fl), &(hi - &fl));
        return f + fl;
    }
    let fh = hi.floor();
    if fh > fl {
        // An integer lies strictly inside or at hi.
        let cand = fl.clone() + rat_one();
        if &cand < hi {
            return cand;
        }
        // hi is exactly the integer fl+1: recurse within (frac(lo), 1).
        let f = simplest_rational_between(&(lo - &fl), &(hi - &fl));
        return f + fl;
    }
    // Same integer part: mediant descent via continued fractions.
    let f = simplest_rational_between(&(lo - &fl), &(hi - &fl));
    f + fl
}

/// f64 -> printable with fixed precision, for SVG output only.
pub fn f64_fmt(x: f64) -> String {
    format!("{:.3}", x)
}
