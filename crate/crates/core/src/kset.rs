//! The heavy sets `K(n, k)` of `mu` and the binomial tail machinery that
//! bounds their measure and length.
//!
//! `K(n, k)` is the union of the level-`n` atoms of `[0, 1)` whose index has
//! at most `k` ternary digits different from 1. It is represented by
//! `(n, k)` alone; atoms are only produced on demand by [`enumerate_k`].

use std::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{
    big, enclose_exp, enclose_log, int, pow3, reduce_over_power, third_pow, BoundedReal, Precision,
    Rational, Refinement,
};
use crate::check::BoundCheck;
use crate::error::{Error, Result};
use crate::measure::ternary_digits;

/// Default cap on materialized atoms.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KSetSpec {
    pub n: u32,
    pub k: u32,
    pub delta: Rational,
}

impl KSetSpec {
    pub fn new(n: u32, k: u32, delta: Rational) -> Self {
        KSetSpec { n, k, delta }
    }

    /// `2 delta n <= k <= 2n/3`, the range where the tail bounds are claimed.
    pub fn in_strict_regime(&self) -> bool {
        let n = int(self.n as i64);
        let k = int(self.k as i64);
        &self.delta * int(2) * &n <= k && k * int(3) <= n * int(2)
    }

    fn budget(&self) -> u32 {
        self.k.min(self.n)
    }
}

/// Whether atom `i` of level `n` belongs to `K(n, k)`.
pub fn member(i: &BigUint, spec: &KSetSpec) -> Result<bool> {
    let digits = ternary_digits(i, spec.n)?;
    let non_ones = digits.iter().filter(|&&d| d != 1).count() as u32;
    Ok(non_ones <= spec.k)
}

/// Strictly increasing member indices, generated digit-wise without
/// scanning all `3^n` atoms.
#[derive(Clone, Debug)]
pub struct KSetIter {
    digits: Vec<u8>,
    budget: u32,
    started: bool,
    done: bool,
}

impl KSetIter {
    fn fill_smallest(&mut self, from: usize, mut remaining: u32) {
        for d in &mut self.digits[from..] {
            if remaining > 0 {
                *d = 0;
                remaining -= 1;
            } else {
                *d = 1;
            }
        }
    }

    fn advance(&mut self) -> bool {
        let mut prefix_cost: Vec<u32> = Vec::with_capacity(self.digits.len() + 1);
        let mut acc = 0;
        prefix_cost.push(0);
        for &d in &self.digits {
            acc += u32::from(d != 1);
            prefix_cost.push(acc);
        }
        for j in (0..self.digits.len()).rev() {
            for c in (self.digits[j] + 1)..=2 {
                let cost = prefix_cost[j] + u32::from(c != 1);
                if cost <= self.budget {
                    self.digits[j] = c;
                    self.fill_smallest(j + 1, self.budget - cost);
                    return true;
                }
            }
        }
        false
    }
}

impl Iterator for KSetIter {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        if self.done {
            return None;
        }
        if self.started {
            if !self.advance() {
                self.done = true;
                return None;
            }
        } else {
            self.started = true;
            self.fill_smallest(0, self.budget);
        }
        if self.digits.is_empty() {
            self.done = true;
            return Some(BigUint::zero());
        }
        BigUint::from_radix_be(&self.digits, 3)
    }
}

pub fn enumerate_k(spec: &KSetSpec) -> KSetIter {
    KSetIter {
        digits: vec![0; spec.n as usize],
        budget: spec.budget(),
        started: false,
        done: false,
    }
}

fn binomial(n: u32, m: u32) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    let m = m.min(n - m);
    let mut c = BigUint::one();
    for j in 0..m {
        c = c * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    c
}

/// `sum_{m in range} C(n, m) u^m w^(n-m)` over integers.
fn binomial_sum(n: u32, u: &BigUint, w: &BigUint, range: Range<u32>) -> BigUint {
    let lo = range.start;
    let hi = range.end.min(n + 1);
    if lo >= hi {
        return BigUint::zero();
    }
    if w.is_zero() {
        return if hi == n + 1 {
            u.pow(n)
        } else {
            BigUint::zero()
        };
    }
    let mut term = binomial(n, lo) * u.pow(lo) * w.pow(n - lo);
    let mut total = term.clone();
    for m in lo..hi - 1 {
        term = term * BigUint::from(n - m) * u / (BigUint::from(m + 1) * w);
        total += &term;
    }
    total
}

/// Splits a probability `p` in `[0, 1]` into integers `(u, v - u, v)`.
fn split_probability(p: &Rational) -> (BigUint, BigUint, BigUint) {
    let u = p.numer().to_biguint().unwrap_or_default();
    let v = p.denom().to_biguint().unwrap_or_default();
    let w = if v > u { &v - &u } else { BigUint::zero() };
    (u, w, v)
}

/// Exact `#` of atoms in `K(n, k)`: `sum_{m<=k} C(n, m) 2^m`.
pub fn count_k(spec: &KSetSpec) -> BigUint {
    binomial_sum(
        spec.n,
        &BigUint::from(2u32),
        &BigUint::one(),
        0..spec.budget() + 1,
    )
}

/// Exact `|K(n, k)| = 3^-n * count`.
pub fn length_k(spec: &KSetSpec) -> Rational {
    big(&count_k(spec)) * third_pow(spec.n)
}

/// Exact `mu(K(n, k)) = sum_{m<=k} C(n, m) (2delta)^m (1-2delta)^(n-m)`.
pub fn mu_k(spec: &KSetSpec) -> Rational {
    let (num, v) = mu_k_over_power(spec);
    reduce_over_power(num, &v, spec.n)
}

/// `(num, v)` with `mu(K(n, k)) = num / v^n`, `v` the denominator of `2 delta`.
pub(crate) fn mu_k_over_power(spec: &KSetSpec) -> (BigUint, BigUint) {
    let two_delta = &spec.delta * int(2);
    let (u, w, v) = split_probability(&two_delta);
    (binomial_sum(spec.n, &u, &w, 0..spec.budget() + 1), v)
}

/// Number of connected components of `K(n, k)`, in closed form.
///
/// A component starts at index 0 (when `k >= n`) or at an index of the form
/// `prefix . 1 . 0^t` whose prefix holds exactly `k - t` non-1 digits.
pub fn component_count(spec: &KSetSpec) -> BigUint {
    let (n, k) = (spec.n, spec.k);
    if k >= n {
        return BigUint::one();
    }
    let mut total = BigUint::zero();
    for t in 0..=k {
        let prefix_len = n - 1 - t;
        let need = k - t;
        if need <= prefix_len {
            total += binomial(prefix_len, need) * BigUint::from(2u32).pow(need);
        }
    }
    total
}

/// Number of gaps (bounded components of the complement of `K(n, k)`).
pub fn gap_count(spec: &KSetSpec) -> BigUint {
    component_count(spec) - BigUint::one()
}

/// A bounded gap `[lo, hi)` of `K(n, k)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Gap {
    pub lo: Rational,
    pub hi: Rational,
}

impl Gap {
    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GapList {
    pub gaps: Vec<Gap>,
}

impl GapList {
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn total_length(&self) -> Rational {
        self.gaps.iter().map(Gap::len).sum()
    }
}

fn ensure_cap(spec: &KSetSpec, cap: u64) -> Result<()> {
    let count = count_k(spec);
    if count > BigUint::from(cap) {
        return Err(Error::resource(
            format!("atoms of K({}, {})", spec.n, spec.k),
            count,
            cap,
        ));
    }
    Ok(())
}

/// Maximal runs of consecutive member indices, as index ranges.
pub fn components(spec: &KSetSpec, cap: u64) -> Result<Vec<Range<BigUint>>> {
    ensure_cap(spec, cap)?;
    let mut runs: Vec<Range<BigUint>> = Vec::new();
    for i in enumerate_k(spec) {
        match runs.last_mut() {
            Some(run) if run.end == i => run.end += 1u32,
            _ => {
                let end = &i + 1u32;
                runs.push(i..end);
            }
        }
    }
    Ok(runs)
}

/// The gaps of `K(n, k)`, sorted, for `count_k <= cap`.
pub fn gaps(spec: &KSetSpec, cap: u64) -> Result<GapList> {
    let runs = components(spec, cap)?;
    let scale = third_pow(spec.n);
    let gaps = runs
        .windows(2)
        .map(|w| Gap {
            lo: big(&w[0].end) * &scale,
            hi: big(&w[1].start) * &scale,
        })
        .collect();
    Ok(GapList { gaps })
}

/// All components of `[0, 1) \ K(n, k)`: the gaps plus the two end intervals
/// `[0, first)` and `[last, 1)` when non-empty.
pub fn bridged_gaps(spec: &KSetSpec, cap: u64) -> Result<GapList> {
    let runs = components(spec, cap)?;
    let scale = third_pow(spec.n);
    let (Some(first), Some(last)) = (runs.first(), runs.last()) else {
        return Ok(GapList {
            gaps: vec![Gap {
                lo: int(0),
                hi: int(1),
            }],
        });
    };
    let mut gaps = Vec::with_capacity(runs.len() + 1);
    if !first.start.is_zero() {
        gaps.push(Gap {
            lo: int(0),
            hi: big(&first.start) * &scale,
        });
    }
    gaps.extend(runs.windows(2).map(|w| Gap {
        lo: big(&w[0].end) * &scale,
        hi: big(&w[1].start) * &scale,
    }));
    if last.end != pow3(spec.n) {
        gaps.push(Gap {
            lo: big(&last.end) * &scale,
            hi: int(1),
        });
    }
    Ok(GapList { gaps })
}

/// Certified enclosure of `H(a, p) = a ln(a/p) + (1-a) ln((1-a)/(1-p))`
/// for `0 < p <= a < 1`.
pub fn entropy_h(a: &Rational, p: &Rational, prec: Precision) -> Result<BoundedReal> {
    let zero = Rational::zero();
    let one = Rational::one();
    if !(&zero < p && p <= a && a < &one) {
        return Err(Error::domain(format!(
            "entropy H(a, p) needs 0 < p <= a < 1, got a = {a}, p = {p}"
        )));
    }
    let first = enclose_log(&(a / p), prec)?.scale(a);
    let second = enclose_log(&((&one - a) / (&one - p)), prec)?.scale(&(&one - a));
    Ok(&first + &second)
}

/// Exact tail `sum_{m >= ceil(a n)} C(n, m) p^m (1-p)^(n-m)`.
pub fn binomial_tail(n: u32, a: &Rational, p: &Rational) -> Rational {
    let start = (a * int(n as i64)).ceil().to_integer();
    let start = start.max(BigInt::zero()).to_u32().unwrap_or(u32::MAX);
    let (u, w, v) = split_probability(p);
    let num = binomial_sum(n, &u, &w, start..n + 1);
    Rational::new(BigInt::from(num), BigInt::from(v.pow(n)))
}

/// `e^{-n H(a, p)}`, the Cramér bound on [`binomial_tail`].
pub fn cramer_bound(n: u32, a: &Rational, p: &Rational, prec: Precision) -> Result<BoundedReal> {
    let h = entropy_h(a, p, prec)?;
    Ok(h.scale(&int(-(n as i64))).exp(prec))
}

/// Enclosure of `k [1 + ln(1/delta)]`.
pub fn log_growth(k: u32, delta: &Rational, prec: Precision) -> Result<BoundedReal> {
    let ln_inv = enclose_log(&delta.recip(), prec)?;
    Ok((&ln_inv + &BoundedReal::from_int(1)).scale(&int(k as i64)))
}

/// Enclosure of `e^{k [1 + ln(1/delta)]}`.
pub fn growth_bound(k: u32, delta: &Rational, prec: Precision) -> Result<BoundedReal> {
    Ok(log_growth(k, delta, prec)?.exp(prec))
}

/// The three certified tail and size bounds on `K(n, k)`.
#[derive(Clone, Debug)]
pub struct Lemma22Report {
    pub spec: KSetSpec,
    pub mass_tail: BoundCheck,
    pub length: BoundCheck,
    pub gap_count: BoundCheck,
}

impl Lemma22Report {
    pub fn checks(&self) -> [&BoundCheck; 3] {
        [&self.mass_tail, &self.length, &self.gap_count]
    }

    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed())
    }
}

pub fn check_lemma22(spec: &KSetSpec, policy: Refinement) -> Result<Lemma22Report> {
    if !spec.in_strict_regime() {
        return Err(Error::precondition(format!(
            "(n, k) = ({}, {}) is outside 2 delta n <= k <= 2n/3 for delta = {}",
            spec.n, spec.k, spec.delta
        )));
    }
    let n = int(spec.n as i64);
    let gap_exponent = {
        let dev = int(spec.k as i64) / &n - &spec.delta * int(2);
        -(int(2) * &n * &dev * &dev)
    };
    let mass_tail = BoundCheck::at_most(
        "mass-tail",
        "1 - mu(K(n,k)) <= exp(-2n(k/n - 2 delta)^2)",
        Rational::one() - mu_k(spec),
        policy,
        |p| Ok(enclose_exp(&gap_exponent, p)),
    )?;
    let scale = third_pow(spec.n);
    let length = BoundCheck::at_most(
        "length",
        "|K(n,k)| <= 3^-n exp(k[1 + log(1/delta)])",
        length_k(spec),
        policy,
        |p| Ok(growth_bound(spec.k, &spec.delta, p)?.scale(&scale)),
    )?;
    let gaps = BoundCheck::at_most(
        "gap-count",
        "#gaps(n,k) <= exp(k[1 + log(1/delta)])",
        big(&gap_count(spec)),
        policy,
        |p| growth_bound(spec.k, &spec.delta, p),
    )?;
    Ok(Lemma22Report {
        spec: spec.clone(),
        mass_tail,
        length,
        gap_count: gaps,
    })
}

/// `2 (a - p)^2`, the quadratic lower bound on `H(a, p)`.
pub fn pinsker_floor(a: &Rational, p: &Rational) -> Rational {
    let d = a - p;
    int(2) * &d * &d
}
