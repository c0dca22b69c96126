use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{bit_len, floor_log2, int, pow2, ratio, Rational};
use crate::error::{Error, Result};

/// Extra working bits carried beyond the requested level.
const GUARD_BITS: u64 = 32;

/// Target exponent for enclosure widths: a log enclosure at level `p` has
/// width at most `2^-p`, and an exp enclosure has relative width at most
/// `2^-p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Precision {
    level: u32,
}

impl Precision {
    pub const DEFAULT: Precision = Precision { level: 64 };

    pub fn new(level: u32) -> Self {
        Precision {
            level: level.max(1),
        }
    }

    pub fn level(self) -> u32 {
        self.level
    }

    pub fn doubled(self) -> Self {
        Precision::new(self.level.saturating_mul(2))
    }

    fn working_bits(self) -> u64 {
        self.level as u64 + GUARD_BITS
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

/// Three-valued answer of a certified comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    True,
    False,
    Undecided,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Verdict::True
    }

    /// Conjunction: any `False` wins, then any `Undecided`.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::False, _) | (_, Verdict::False) => Verdict::False,
            (Verdict::Undecided, _) | (_, Verdict::Undecided) => Verdict::Undecided,
            _ => Verdict::True,
        }
    }
}

/// Certified enclosure `[lo, hi]` of a real number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundedReal {
    lo: Rational,
    hi: Rational,
}

impl BoundedReal {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::domain(format!("empty enclosure [{lo}, {hi}]")));
        }
        Ok(BoundedReal { lo, hi })
    }

    pub fn exact(x: Rational) -> Self {
        BoundedReal {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_int(n: i64) -> Self {
        BoundedReal::exact(int(n))
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_subset_of(&self, other: &BoundedReal) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            BoundedReal { lo: a, hi: b }
        } else {
            BoundedReal { lo: b, hi: a }
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::domain("reciprocal of an enclosure containing 0"));
        }
        Ok(BoundedReal {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    pub fn div(&self, other: &BoundedReal) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    /// Integer power of a non-negative enclosure.
    pub fn powi(&self, exp: u32) -> Result<Self> {
        if self.lo.is_negative() {
            return Err(Error::domain("powi of an enclosure with negative part"));
        }
        Ok(BoundedReal {
            lo: num_traits::Pow::pow(&self.lo, exp),
            hi: num_traits::Pow::pow(&self.hi, exp),
        })
    }

    pub fn exp(&self, p: Precision) -> Self {
        BoundedReal {
            lo: enclose_exp(&self.lo, p).lo,
            hi: enclose_exp(&self.hi, p).hi,
        }
    }

    pub fn ln(&self, p: Precision) -> Result<Self> {
        if !self.lo.is_positive() {
            return Err(Error::domain("logarithm of an enclosure reaching 0"));
        }
        Ok(BoundedReal {
            lo: enclose_log(&self.lo, p)?.lo,
            hi: enclose_log(&self.hi, p)?.hi,
        })
    }

    /// Widens outward onto a grid with `bits` significant bits, keeping
    /// endpoint sizes bounded through long computations.
    pub fn rounded(&self, p: Precision) -> Self {
        let bits = p.working_bits() as i64;
        BoundedReal {
            lo: round_rel(&self.lo, bits, Direction::Down),
            hi: round_rel(&self.hi, bits, Direction::Up),
        }
    }
}

impl fmt::Display for BoundedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add for &BoundedReal {
    type Output = BoundedReal;
    fn add(self, rhs: &BoundedReal) -> BoundedReal {
        BoundedReal {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Sub for &BoundedReal {
    type Output = BoundedReal;
    fn sub(self, rhs: &BoundedReal) -> BoundedReal {
        BoundedReal {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Mul for &BoundedReal {
    type Output = BoundedReal;
    fn mul(self, rhs: &BoundedReal) -> BoundedReal {
        let products = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = products
            .iter()
            .min()
            .cloned()
            .unwrap_or_else(Rational::zero);
        let hi = products
            .iter()
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero);
        BoundedReal { lo, hi }
    }
}

impl Neg for &BoundedReal {
    type Output = BoundedReal;
    fn neg(self) -> BoundedReal {
        BoundedReal {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for BoundedReal {
            type Output = BoundedReal;
            fn $method(self, rhs: BoundedReal) -> BoundedReal {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&BoundedReal> for BoundedReal {
            type Output = BoundedReal;
            fn $method(self, rhs: &BoundedReal) -> BoundedReal {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for BoundedReal {
    type Output = BoundedReal;
    fn neg(self) -> BoundedReal {
        -&self
    }
}

/// `True` iff `a.hi <= b.lo`, `False` iff `a.lo > b.hi`, else `Undecided`.
pub fn certify_leq(a: &BoundedReal, b: &BoundedReal) -> Verdict {
    if a.hi <= b.lo {
        Verdict::True
    } else if a.lo > b.hi {
        Verdict::False
    } else {
        Verdict::Undecided
    }
}

/// Precision schedule for [`certify_refining`]: start level, doubled on
/// every `Undecided`, never past `max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub start: Precision,
    pub max: Precision,
}

impl Default for Refinement {
    fn default() -> Self {
        Refinement {
            start: Precision::new(32),
            max: Precision::new(256),
        }
    }
}

impl Refinement {
    pub fn up_to(max: Precision) -> Self {
        Refinement {
            start: Precision::new(32.min(max.level())),
            max,
        }
    }
}

/// Outcome of a refined comparison, with the enclosures that decided it.
#[derive(Clone, Debug)]
pub struct Certified {
    pub verdict: Verdict,
    pub precision: Precision,
    pub lhs: BoundedReal,
    pub rhs: BoundedReal,
}

/// Evaluates `sides(p)` at increasing precision until `lhs <= rhs` is
/// decided or the cap is reached.
pub fn certify_refining<F>(policy: Refinement, mut sides: F) -> Result<Certified>
where
    F: FnMut(Precision) -> Result<(BoundedReal, BoundedReal)>,
{
    let mut p = policy.start.min(policy.max);
    loop {
        let (lhs, rhs) = sides(p)?;
        let verdict = certify_leq(&lhs, &rhs);
        if verdict != Verdict::Undecided || p >= policy.max {
            return Ok(Certified {
                verdict,
                precision: p,
                lhs,
                rhs,
            });
        }
        p = p.doubled().min(policy.max);
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Down,
    Up,
}

fn round_to_scale(x: &Rational, shift: i64, dir: Direction) -> Rational {
    let scaled = x * pow2(shift);
    let m = match dir {
        Direction::Down => scaled.floor(),
        Direction::Up => scaled.ceil(),
    };
    m * pow2(-shift)
}

/// Rounds onto the grid `2^-bits`.
fn round_abs(x: &Rational, bits: i64, dir: Direction) -> Rational {
    if x.denom().is_one() {
        return x.clone();
    }
    round_to_scale(x, bits, dir)
}

/// Rounds to `bits` significant bits.
fn round_rel(x: &Rational, bits: i64, dir: Direction) -> Rational {
    if x.is_zero() {
        return x.clone();
    }
    let shift = bits - floor_log2(x);
    // already representable: keep exact values exact
    let den_bits = bit_len(x.denom()) as i64;
    if x.denom().is_one() && bit_len(x.numer()) as i64 <= bits {
        return x.clone();
    }
    if den_bits <= shift && (x.denom() & (x.denom() - BigInt::one())).is_zero() {
        return x.clone();
    }
    round_to_scale(x, shift, dir)
}

fn abs_max(lo: &Rational, hi: &Rational) -> Rational {
    let a = lo.abs();
    let b = hi.abs();
    if a > b {
        a
    } else {
        b
    }
}

/// Certified enclosure of `e^x`; the lower endpoint is always positive.
pub fn enclose_exp(x: &Rational, p: Precision) -> BoundedReal {
    if x.is_zero() {
        return BoundedReal::from_int(1);
    }
    let half = ratio(1, 2);
    let squarings: u64 = if x.abs() <= half {
        0
    } else {
        bit_len(&x.abs().ceil().to_integer()) + 1
    };
    let bits = (p.working_bits() + 8 + 2 * squarings) as i64;
    let r = x * pow2(-(squarings as i64));

    // Taylor series of e^r with |r| <= 1/2; each term interval is rounded
    // outward on the grid 2^-(bits+8), the tail bounded by twice the first
    // omitted term.
    let eps_bits = bits + 8;
    let eps = pow2(-eps_bits);
    let mut sum = BoundedReal::from_int(1);
    let mut term = BoundedReal::from_int(1);
    let mut i: i64 = 1;
    loop {
        let next = term.scale(&(&r / int(i)));
        term = BoundedReal {
            lo: round_abs(&next.lo, eps_bits, Direction::Down),
            hi: round_abs(&next.hi, eps_bits, Direction::Up),
        };
        let mag = abs_max(&term.lo, &term.hi);
        if mag <= eps {
            let tail = mag * int(2);
            sum = BoundedReal {
                lo: &sum.lo - &tail,
                hi: &sum.hi + &tail,
            };
            break;
        }
        sum = &sum + &term;
        i += 1;
    }

    for _ in 0..squarings {
        sum = BoundedReal {
            lo: round_rel(&(&sum.lo * &sum.lo), bits, Direction::Down),
            hi: round_rel(&(&sum.hi * &sum.hi), bits, Direction::Up),
        };
    }
    BoundedReal {
        lo: round_rel(&sum.lo, p.working_bits() as i64, Direction::Down),
        hi: round_rel(&sum.hi, p.working_bits() as i64, Direction::Up),
    }
}

/// Enclosure of `atanh(z) = sum z^(2i+1)/(2i+1)` for `|z| <= 1/3`, absolute
/// error below `2^-bits`.
fn enclose_atanh(z: &Rational, bits: i64) -> BoundedReal {
    if z.is_zero() {
        return BoundedReal::from_int(0);
    }
    let eps_bits = bits + 8;
    let eps = pow2(-eps_bits);
    let z2 = z * z;
    let mut power = BoundedReal::exact(z.clone());
    let mut sum = BoundedReal::from_int(0);
    let mut k: i64 = 1;
    loop {
        let term = power.scale(&ratio(1, k));
        let mag = abs_max(&term.lo, &term.hi);
        if mag <= eps {
            // sum_{j>=i} |z|^(2j+1)/(2j+1) <= |term| / (1 - z^2) <= 2|term|
            let tail = mag * int(2);
            sum = BoundedReal {
                lo: &sum.lo - &tail,
                hi: &sum.hi + &tail,
            };
            return sum;
        }
        sum = &sum + &term;
        let next = power.scale(&z2);
        power = BoundedReal {
            lo: round_abs(&next.lo, eps_bits, Direction::Down),
            hi: round_abs(&next.hi, eps_bits, Direction::Up),
        };
        k += 2;
    }
}

/// Enclosure of `ln 2 = 2 atanh(1/3)`.
pub fn enclose_ln2(p: Precision) -> BoundedReal {
    let bits = p.working_bits() as i64;
    enclose_atanh(&ratio(1, 3), bits + 2).scale(&int(2))
}

/// Certified enclosure of `ln x` for `x > 0`, of width at most `2^-level`.
pub fn enclose_log(x: &Rational, p: Precision) -> Result<BoundedReal> {
    if !x.is_positive() {
        return Err(Error::domain(format!("logarithm of non-positive {x}")));
    }
    if x.is_one() {
        return Ok(BoundedReal::from_int(0));
    }
    // x = 2^m * y with y in [2/3, 4/3]
    let mut m = floor_log2(x);
    let mut y = x * pow2(-m);
    if y > ratio(4, 3) {
        y /= int(2);
        m += 1;
    }
    let m_bits = 64 - m.unsigned_abs().leading_zeros() as u64;
    let bits = (p.working_bits() + m_bits + 4) as i64;
    let one = Rational::one();
    let z = (&y - &one) / (&y + &one);
    let mut out = enclose_atanh(&z, bits + 1).scale(&int(2));
    if m != 0 {
        let ln2 = enclose_atanh(&ratio(1, 3), bits + 2).scale(&int(2));
        out = &out + &ln2.scale(&int(m));
    }
    let grid = p.working_bits() as i64;
    Ok(BoundedReal {
        lo: round_abs(&out.lo, grid, Direction::Down),
        hi: round_abs(&out.hi, grid, Direction::Up),
    })
}
