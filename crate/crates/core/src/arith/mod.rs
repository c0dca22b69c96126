//! Exact rational arithmetic and certified enclosures of `ln` and `exp`.
//!
//! Every measure, length and count in the crate is an exact [`Rational`].
//! Transcendental quantities are carried as [`BoundedReal`] enclosures with
//! rational endpoints, and inequalities between them are decided by
//! [`certify_leq`], which answers `Undecided` rather than guessing.

mod enclosure;

pub use enclosure::{
    certify_leq, certify_refining, enclose_exp, enclose_ln2, enclose_log, BoundedReal, Certified,
    Precision, Refinement, Verdict,
};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact ratio of arbitrary-precision integers, always in lowest terms.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn big(n: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n.clone()))
}

pub fn pow3(n: u32) -> BigUint {
    BigUint::from(3u32).pow(n)
}

/// `3^(-n)` as an exact rational.
pub fn third_pow(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(pow3(n)))
}

pub fn rpow(base: &Rational, exp: u32) -> Rational {
    Pow::pow(base, exp)
}

/// Parses `p/q`, a bare integer, or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::domain(format!("malformed fraction `{s}`"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::domain(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = match whole {
            "" | "-" | "+" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let frac_int: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = whole.abs() * &scale + frac_int;
        let num = if negative { -mag } else { mag };
        return Ok(Rational::new(num, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Level `n` such that the reduced denominator of `x` is exactly `3^n`, or
/// `None` when `x` is not a triadic rational.
pub fn triadic_level(x: &Rational) -> Option<u32> {
    let mut den = x.denom().clone();
    let three = BigInt::from(3u32);
    let mut level = 0;
    while !den.is_one() {
        let (q, r) = den.div_rem(&three);
        if !r.is_zero() {
            return None;
        }
        den = q;
        level += 1;
    }
    Some(level)
}

/// Fixed-point decimal rendering, truncated toward negative infinity at
/// `digits` places. Only ever used for labelled approximations.
pub fn to_decimal(x: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (x * Rational::from_integer(scale.clone()))
        .floor()
        .to_integer();
    let negative = scaled.sign() == Sign::Minus;
    let (whole, frac) = scaled.abs().div_rem(&scale);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    if digits > 0 {
        out.push('.');
        out.push_str(&format!("{:0>width$}", frac.to_string(), width = digits));
    }
    out
}

/// `num / base^exp` in lowest terms.
///
/// Only primes dividing `base` can cancel, so the reduction divides out
/// `gcd(num, base)` repeatedly instead of taking a full-width gcd.
pub fn reduce_over_power(mut num: BigUint, base: &BigUint, exp: u32) -> Rational {
    let mut den = base.pow(exp);
    if !num.is_zero() {
        loop {
            let g = (&num % base).gcd(base);
            let g = (&den % &g).gcd(&g);
            if g.is_one() {
                break;
            }
            num /= &g;
            den /= &g;
        }
    } else {
        den = BigUint::one();
    }
    Rational::new_raw(BigInt::from(num), BigInt::from(den))
}

/// Bit length of `|n|`.
pub(crate) fn bit_len(n: &BigInt) -> u64 {
    n.magnitude().bits()
}

/// `floor(log2 |x|)` for `x != 0`.
pub(crate) fn floor_log2(x: &Rational) -> i64 {
    let nb = bit_len(x.numer()) as i64;
    let db = bit_len(x.denom()) as i64;
    let mut e = nb - db;
    // 2^e <= |x| < 2^(e+1) after at most one correction step
    if pow2(e) > x.abs() {
        e -= 1;
    }
    e
}

pub(crate) fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs() as usize;
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Lossy conversion for labelled approximations and progress output.
pub fn approx_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
