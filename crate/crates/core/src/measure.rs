//! The one-dimensional measure `mu` and the product measure `nu`.
//!
//! `mu` gives each unit interval `[j, j+1)` mass 1 and splits the mass of
//! every triadic interval among its three children in proportions
//! `delta : 1-2delta : delta`. A level-`n` atom with index `i` therefore has
//! mass `delta^(n-k) (1-2delta)^k`, `k` being the number of ternary digits of
//! `i mod 3^n` equal to 1.

use std::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{int, pow3, ratio, rpow, third_pow, triadic_level, Rational};
use crate::error::{Error, Result};

/// `delta` and the ambient dimension `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureParams {
    delta: Rational,
    dim: usize,
}

impl MeasureParams {
    pub fn new(delta: Rational, dim: usize) -> Result<Self> {
        if !delta.is_positive() || delta > ratio(1, 3) {
            return Err(Error::domain(format!(
                "delta = {delta} is outside (0, 1/3]"
            )));
        }
        if dim == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        Ok(MeasureParams { delta, dim })
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Share of the middle child, `1 - 2 delta`.
    pub fn middle(&self) -> Rational {
        Rational::one() - &self.delta * int(2)
    }

    /// Largest ratio between adjacent atoms of one level, `(1 - 2delta)/delta`.
    pub fn adjacent_ratio_bound(&self) -> Rational {
        self.middle() / &self.delta
    }

    /// Mass of an atom with `level` digits of which `ones` equal 1.
    pub fn atom_mass(&self, level: u32, ones: u32) -> Rational {
        rpow(&self.delta, level - ones) * rpow(&self.middle(), ones)
    }
}

/// The half-open interval `[index * 3^-level, (index+1) * 3^-level)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriadicInterval {
    pub level: u32,
    pub index: BigInt,
}

impl TriadicInterval {
    pub fn new(level: u32, index: impl Into<BigInt>) -> Self {
        TriadicInterval {
            level,
            index: index.into(),
        }
    }

    pub fn lo(&self) -> Rational {
        Rational::from_integer(self.index.clone()) * third_pow(self.level)
    }

    pub fn hi(&self) -> Rational {
        Rational::from_integer(&self.index + 1) * third_pow(self.level)
    }

    pub fn len(&self) -> Rational {
        third_pow(self.level)
    }

    pub fn midpoint(&self) -> Rational {
        (self.lo() + self.hi()) / int(2)
    }

    pub fn parent(&self) -> Option<TriadicInterval> {
        if self.level == 0 {
            return None;
        }
        Some(TriadicInterval {
            level: self.level - 1,
            index: self.index.div_floor(&BigInt::from(3)),
        })
    }

    pub fn children(&self) -> [TriadicInterval; 3] {
        let base = &self.index * 3;
        [0, 1, 2].map(|c| TriadicInterval {
            level: self.level + 1,
            index: &base + c,
        })
    }

    /// The `[0,1)` position of this interval: index reduced mod `3^level`.
    fn local_index(&self) -> BigUint {
        let modulus = BigInt::from(pow3(self.level));
        self.index
            .mod_floor(&modulus)
            .to_biguint()
            .unwrap_or_default()
    }
}

/// Product of per-axis triadic intervals; levels may differ between axes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TriadicBox {
    pub axes: Vec<TriadicInterval>,
}

impl TriadicBox {
    pub fn new(axes: Vec<TriadicInterval>) -> Self {
        TriadicBox { axes }
    }

    pub fn unit(dim: usize) -> Self {
        TriadicBox {
            axes: vec![TriadicInterval::new(0, 0); dim],
        }
    }
}

/// Most-significant-first base-3 digits of `i`, zero-padded to `n`.
pub fn ternary_digits(i: &BigUint, n: u32) -> Result<Vec<u8>> {
    if i >= &pow3(n) {
        return Err(Error::domain(format!("index {i} is not below 3^{n}")));
    }
    let mut digits = vec![0u8; n as usize];
    if i.is_zero() {
        return Ok(digits);
    }
    let raw = i.to_radix_be(3);
    let offset = n as usize - raw.len();
    digits[offset..].copy_from_slice(&raw);
    Ok(digits)
}

/// Number of ternary digits equal to 1 among the `n` digits of `i < 3^n`.
pub(crate) fn count_ones(i: &BigUint, n: u32) -> u32 {
    if let Some(mut v) = i.to_u64() {
        let mut ones = 0;
        for _ in 0..n {
            if v % 3 == 1 {
                ones += 1;
            }
            v /= 3;
        }
        return ones;
    }
    if i.is_zero() {
        return 0;
    }
    i.to_radix_le(3).iter().filter(|&&d| d == 1).count() as u32
}

/// Exact `mu(I)` for any triadic interval, integer translates included.
pub fn mu(params: &MeasureParams, interval: &TriadicInterval) -> Rational {
    let local = interval.local_index();
    let ones = count_ones(&local, interval.level);
    params.atom_mass(interval.level, ones)
}

/// Exact `mu([a, b))` for triadic-rational endpoints.
pub fn mu_interval(params: &MeasureParams, a: &Rational, b: &Rational) -> Result<Rational> {
    if a > b {
        return Err(Error::domain(format!("interval [{a}, {b}) has a > b")));
    }
    let la = triadic_level(a).ok_or_else(|| Error::UnsupportedEndpoint(a.to_string()))?;
    let lb = triadic_level(b).ok_or_else(|| Error::UnsupportedEndpoint(b.to_string()))?;
    let level = la.max(lb);
    let scale = Rational::from_integer(BigInt::from(pow3(level)));
    let mut cur = (a * &scale).to_integer();
    let end = (b * &scale).to_integer();
    let mut total = Rational::zero();
    let three = BigInt::from(3);

    // Greedy decomposition into maximal aligned triadic intervals.
    while cur < end {
        let mut m = 0u32;
        let mut block = BigInt::one();
        while m < level {
            let next = &block * &three;
            if !cur.is_multiple_of(&next) || &cur + &next > end {
                break;
            }
            block = next;
            m += 1;
        }
        if m == level {
            // whole unit intervals, mass 1 each
            let units = (&end - &cur).div_floor(&block);
            total += Rational::from_integer(units.clone());
            cur += units * &block;
        } else {
            let atom = TriadicInterval::new(level - m, cur.div_floor(&block));
            total += mu(params, &atom);
            cur += block;
        }
    }
    Ok(total)
}

/// Exact `nu(B)`: the product of per-axis `mu` values.
pub fn nu(params: &MeasureParams, b: &TriadicBox) -> Result<Rational> {
    if b.axes.len() != params.dim() {
        return Err(Error::domain(format!(
            "box has {} axes but the measure has dimension {}",
            b.axes.len(),
            params.dim()
        )));
    }
    Ok(b.axes
        .iter()
        .fold(Rational::one(), |acc, axis| acc * mu(params, axis)))
}

/// The periodic switch `h`: 2 on `[1/3, 2/3) + Z`, -1 elsewhere.
fn switch(y: &Rational) -> Rational {
    let frac = y - y.floor();
    if frac >= ratio(1, 3) && frac < ratio(2, 3) {
        int(2)
    } else {
        int(-1)
    }
}

/// Exact value at `x` of the level-`n` product density
/// `prod_{j<n} [1 + (1 - 3delta) h(3^j x)]`.
pub fn density_oracle(params: &MeasureParams, n: u32, x: &Rational) -> Rational {
    let amp = Rational::one() - &params.delta * int(3);
    let mut density = Rational::one();
    let mut y = x.clone();
    for _ in 0..n {
        density *= Rational::one() + &amp * switch(&y);
        y *= int(3);
    }
    density
}

/// Maximum over adjacent pairs `(i, i+1)` with both indices in `span` of
/// `max(mu(I_i)/mu(I_{i+1}), mu(I_{i+1})/mu(I_i))` at level `n`.
pub fn adjacent_ratio_max(params: &MeasureParams, n: u32, span: Range<BigInt>) -> Result<Rational> {
    if n == 0 {
        return Err(Error::domain("adjacent ratios need level n >= 1"));
    }
    if &span.end - &span.start < BigInt::from(2) {
        return Err(Error::domain("span must contain at least two indices"));
    }
    let mut best = Rational::one();
    let mut i = span.start.clone();
    let mut prev = mu(params, &TriadicInterval::new(n, i.clone()));
    i += 1;
    while i < span.end {
        let cur = mu(params, &TriadicInterval::new(n, i.clone()));
        let r = if cur > prev {
            &cur / &prev
        } else {
            &prev / &cur
        };
        if r > best {
            best = r;
        }
        prev = cur;
        i += 1;
    }
    Ok(best)
}

/// Sampled estimate of the ball doubling ratio `mu(B(x,2r)) / mu(B(x,r))`
/// over centers `i * 3^-level` in `[0, 1)` and radii `3^-j`, `1 <= j <= level`.
///
/// This is an estimate over a finite sample, not a certified doubling
/// constant.
pub fn sampled_ball_doubling(params: &MeasureParams, level: u32) -> Result<Rational> {
    let mut best = Rational::zero();
    let step = third_pow(level);
    let count = pow3(level).to_u64().unwrap_or(u64::MAX);
    for i in 0..count {
        let x = Rational::from_integer(BigInt::from(i)) * &step;
        for j in 1..=level {
            let r = third_pow(j);
            let small = mu_interval(params, &(&x - &r), &(&x + &r))?;
            let two_r = &r * int(2);
            let large = mu_interval(params, &(&x - &two_r), &(&x + &two_r))?;
            let q = large / small;
            if q > best {
                best = q;
            }
        }
    }
    Ok(best)
}
