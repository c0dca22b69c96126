//! The iterated cube families `K_l`, the finite stages of the curve, and the
//! certified length and mass bounds for the full construction.
//!
//! Stage `l` uses `n_l = l * n1` digits and budget `k_l = l * k1`. A stage-`l`
//! cube lives at composite level `N_l = n_1 + ... + n_l` and belongs to `K_l`
//! when every axis index, read in consecutive blocks of `n_1, ..., n_l`
//! ternary digits, has at most `k_j` non-1 digits in block `j`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{
    big, certify_refining, enclose_log, int, pow2, pow3, reduce_over_power, third_pow, BoundedReal,
    Precision, Rational, Refinement, Verdict,
};
use crate::error::{Error, Result};
use crate::geometry::{
    gamma_bridged, gamma_nk, lemma24_piece_sum, skeleton, AxisBox, SegmentSet, SegmentSetBuilder,
};
use crate::kset::{bridged_gaps, count_k, enumerate_k, growth_bound, mu_k_over_power, KSetSpec};
use crate::measure::{nu, ternary_digits, MeasureParams, TriadicBox, TriadicInterval};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `k1 = 3 delta n1`.
    Strict,
    /// Any `k1 >= 1`; geometry only, the bounds may not apply.
    Toy,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Toy => "toy",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeParams {
    measure: MeasureParams,
    n1: u32,
    k1: u32,
    mode: Mode,
}

impl CascadeParams {
    /// Parameters with `k1 = 3 delta n1`, which must be a positive integer.
    pub fn strict(delta: Rational, dim: usize, n1: u32) -> Result<Self> {
        let k1 = strict_k1(&delta, n1).ok_or_else(|| {
            Error::domain(format!("3 * {delta} * {n1} is not a positive integer"))
        })?;
        Self::build(delta, dim, n1, k1, Mode::Strict)
    }

    pub fn toy(delta: Rational, dim: usize, n1: u32, k1: u32) -> Result<Self> {
        Self::build(delta, dim, n1, k1, Mode::Toy)
    }

    fn build(delta: Rational, dim: usize, n1: u32, k1: u32, mode: Mode) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain("the cascade needs dimension d >= 2"));
        }
        if n1 == 0 || k1 == 0 {
            return Err(Error::domain("n1 and k1 must be positive"));
        }
        Ok(CascadeParams {
            measure: MeasureParams::new(delta, dim)?,
            n1,
            k1,
            mode,
        })
    }

    pub fn measure(&self) -> &MeasureParams {
        &self.measure
    }

    pub fn delta(&self) -> &Rational {
        self.measure.delta()
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn n1(&self) -> u32 {
        self.n1
    }

    pub fn k1(&self) -> u32 {
        self.k1
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n_at(&self, l: u32) -> u32 {
        l * self.n1
    }

    pub fn k_at(&self, l: u32) -> u32 {
        l * self.k1
    }

    /// `N_l = n_1 + ... + n_l`.
    pub fn composite_level(&self, l: u32) -> u32 {
        self.n1 * l * (l + 1) / 2
    }

    /// `k_1 + ... + k_l`.
    pub fn budget_sum(&self, l: u32) -> u32 {
        self.k1 * l * (l + 1) / 2
    }

    fn stage_spec(&self, l: u32) -> KSetSpec {
        KSetSpec::new(self.n_at(l), self.k_at(l), self.delta().clone())
    }
}

/// `3 delta n1` when it is a positive integer that fits in `u32`.
fn strict_k1(delta: &Rational, n1: u32) -> Option<u32> {
    let k = delta * int(3) * int(n1 as i64);
    if !k.is_integer() || k < Rational::one() {
        return None;
    }
    k.to_integer().to_u32()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    StrictValid,
    ToyOnly(String),
    Invalid(String),
}

impl Validity {
    pub fn label(&self) -> &'static str {
        match self {
            Validity::StrictValid => "StrictValid",
            Validity::ToyOnly(_) => "ToyOnly",
            Validity::Invalid(_) => "Invalid",
        }
    }
}

/// Enclosures of `18 d delta (1 + ln(1/delta))` and `ln 3` at `prec`.
pub fn strict_inequality(
    delta: &Rational,
    dim: usize,
    prec: Precision,
) -> Result<(BoundedReal, BoundedReal)> {
    let ln_inv = enclose_log(&delta.recip(), prec)?;
    let lhs = (&ln_inv + &BoundedReal::from_int(1)).scale(&(delta * int(18 * dim as i64)));
    Ok((lhs, enclose_log(&int(3), prec)?))
}

/// Classifies parameters by the integrality of `k1` and the certified
/// inequality `18 d [delta + delta ln(1/delta)] <= ln 3`.
pub fn validate(p: &CascadeParams, policy: Refinement) -> Result<Validity> {
    if strict_k1(p.delta(), p.n1) != Some(p.k1) {
        return Ok(Validity::ToyOnly(format!(
            "k1 = {} differs from 3 delta n1 = {}",
            p.k1,
            p.delta() * int(3) * int(p.n1 as i64)
        )));
    }
    let out = certify_refining(policy, |prec| strict_inequality(p.delta(), p.dim(), prec))?;
    match out.verdict {
        Verdict::True => Ok(Validity::StrictValid),
        Verdict::False => Ok(Validity::ToyOnly(format!(
            "18 d [delta + delta ln(1/delta)] in [{}, {}] exceeds ln 3",
            out.lhs.lo(),
            out.lhs.hi()
        ))),
        Verdict::Undecided => Err(Error::Precision(format!(
            "strict inequality undecided at precision {}",
            out.precision.level()
        ))),
    }
}

/// Classifies the schedule `k1 = 3 delta n1` for raw `(delta, d, n1)`.
pub fn validate_schedule(
    delta: &Rational,
    dim: usize,
    n1: u32,
    policy: Refinement,
) -> Result<Validity> {
    if strict_k1(delta, n1).is_none() {
        return Ok(Validity::Invalid(format!(
            "k1 = 3 delta n1 = {} is not a positive integer",
            delta * int(3) * int(n1 as i64)
        )));
    }
    match CascadeParams::strict(delta.clone(), dim, n1) {
        Ok(p) => validate(&p, policy),
        Err(e) => Ok(Validity::Invalid(e.to_string())),
    }
}

/// Smallest `n1` among multiples of the denominator of `3 delta` for which
/// the schedule is strictly valid, if any.
pub fn smallest_strict_n1(delta: &Rational, dim: usize, policy: Refinement) -> Result<Option<u32>> {
    let step = (delta * int(3))
        .denom()
        .to_u32()
        .ok_or_else(|| Error::domain(format!("denominator of 3 * {delta} is too large")))?;
    match validate_schedule(delta, dim, step, policy)? {
        Validity::StrictValid => Ok(Some(step)),
        _ => Ok(None),
    }
}

/// A cube of `K_l` at composite level `N_l`, one index per axis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StageCube {
    pub level: u32,
    pub axes: Vec<BigUint>,
}

impl StageCube {
    pub fn side(&self) -> Rational {
        third_pow(self.level)
    }

    pub fn corner(&self) -> Vec<Rational> {
        let side = self.side();
        self.axes.iter().map(|i| big(i) * &side).collect()
    }

    pub fn triadic_box(&self) -> TriadicBox {
        TriadicBox::new(
            self.axes
                .iter()
                .map(|i| TriadicInterval::new(self.level, BigInt::from(i.clone())))
                .collect(),
        )
    }
}

/// Whether `cube` belongs to `K_l`.
pub fn stage_membership(p: &CascadeParams, cube: &StageCube, l: u32) -> Result<bool> {
    let level = p.composite_level(l);
    if cube.level != level {
        return Err(Error::domain(format!(
            "stage {l} cubes live at level {level}, not {}",
            cube.level
        )));
    }
    if cube.axes.len() != p.dim() {
        return Err(Error::domain(
            "cube dimension does not match the parameters",
        ));
    }
    for axis in &cube.axes {
        let digits = ternary_digits(axis, level)?;
        let mut start = 0usize;
        for j in 1..=l {
            let block = &digits[start..start + p.n_at(j) as usize];
            let non_ones = block.iter().filter(|&&d| d != 1).count() as u32;
            if non_ones > p.k_at(j) {
                return Ok(false);
            }
            start += block.len();
        }
    }
    Ok(true)
}

/// Exact `#K_l = prod_j count_k(n_j, k_j)^d`.
pub fn cube_count(p: &CascadeParams, l: u32) -> BigUint {
    (1..=l).fold(BigUint::one(), |acc, j| {
        acc * count_k(&p.stage_spec(j)).pow(p.dim() as u32)
    })
}

/// Enclosure of `exp{(k_1 + ... + k_l) d [1 + ln(1/delta)]}`.
pub fn cube_count_bound(p: &CascadeParams, l: u32, prec: Precision) -> Result<BoundedReal> {
    growth_bound(p.budget_sum(l) * p.dim() as u32, p.delta(), prec)
}

/// Exact `nu(K_l) = prod_j mu(K(n_j, k_j))^d`.
pub fn nu_stage(p: &CascadeParams, l: u32) -> Rational {
    let d = p.dim() as u32;
    let mut num = BigUint::one();
    let mut base = BigUint::one();
    for j in 1..=l {
        let (m, v) = mu_k_over_power(&p.stage_spec(j));
        num *= m.pow(d);
        base = v;
    }
    reduce_over_power(num, &base, d * p.composite_level(l))
}

/// Sorted per-axis indices of the one-dimensional stage-`l` set, at level `N_l`.
pub fn stage_axis_indices(p: &CascadeParams, l: u32, cap: u64) -> Result<Vec<BigUint>> {
    let mut indices = vec![BigUint::from(0u32)];
    for j in 1..=l {
        let spec = p.stage_spec(j);
        let next_len = BigUint::from(indices.len()) * count_k(&spec);
        if next_len > BigUint::from(cap) {
            return Err(Error::resource(
                format!("axis indices of stage {j}"),
                next_len,
                cap,
            ));
        }
        let shift = pow3(spec.n);
        let local: Vec<BigUint> = enumerate_k(&spec).collect();
        let mut next = Vec::with_capacity(next_len.to_usize().unwrap_or(0));
        for i in &indices {
            let base = i * &shift;
            next.extend(local.iter().map(|j| &base + j));
        }
        indices = next;
    }
    Ok(indices)
}

/// All cubes of `K_l`, in lexicographic order of their axis indices.
pub fn stage_cubes(p: &CascadeParams, l: u32, cap: u64) -> Result<Vec<StageCube>> {
    let total = cube_count(p, l);
    if total > BigUint::from(cap) {
        return Err(Error::resource(format!("cubes of stage {l}"), total, cap));
    }
    let axis = stage_axis_indices(p, l, cap)?;
    let level = p.composite_level(l);
    let d = p.dim();
    let mut out = Vec::with_capacity(total.to_usize().unwrap_or(0));
    let mut idx = vec![0usize; d];
    loop {
        out.push(StageCube {
            level,
            axes: idx.iter().map(|&i| axis[i].clone()).collect(),
        });
        let mut j = d;
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < axis.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// `sum of nu(Q)` over the materialized cubes of `K_l`.
pub fn nu_stage_direct(p: &CascadeParams, l: u32, cap: u64) -> Result<Rational> {
    let mut total = Rational::from_integer(BigInt::from(0));
    for cube in stage_cubes(p, l, cap)? {
        total += nu(p.measure(), &cube.triadic_box())?;
    }
    Ok(total)
}

/// Which copies of `Gamma(n_l, k_l)` fill the cubes of `K_{l-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Joining {
    /// Gap boxes from the bounded gaps only; copies float inside their cubes.
    Literal,
    /// Gap boxes also from the end intervals of the complement, which attach
    /// every copy to the skeleton of its cube.
    Bridged,
}

/// Stages `0..=depth` of the curve: the unit-cube skeleton, then at stage `l`
/// a scaled copy of `Gamma(n_l, k_l)` inside every cube of `K_{l-1}`.
pub fn stage_curves(
    p: &CascadeParams,
    depth: u32,
    joining: Joining,
    cap: u64,
) -> Result<Vec<SegmentSet>> {
    let d = p.dim();
    let mut stages = vec![skeleton(&AxisBox::unit(d)?)];
    for l in 1..=depth {
        let gamma = match joining {
            Joining::Literal => gamma_nk(p.measure(), p.n_at(l), p.k_at(l), cap)?,
            Joining::Bridged => gamma_bridged(p.measure(), p.n_at(l), p.k_at(l), cap)?,
        }
        .segments;
        let copies = cube_count(p, l - 1);
        let pieces = &copies * BigUint::from(gamma.segment_count());
        if pieces > BigUint::from(cap) {
            return Err(Error::resource(
                format!("segments of stage {l}"),
                pieces,
                cap,
            ));
        }
        let mut builder = SegmentSetBuilder::new(d);
        builder.extend_from(&stages[stages.len() - 1]);
        for cube in stage_cubes(p, l - 1, cap)? {
            builder.extend_from(&gamma.affine(&cube.corner(), &cube.side()));
        }
        stages.push(builder.finish());
    }
    Ok(stages)
}

/// The bridged curve through stage `depth`.
pub fn stage_curve(p: &CascadeParams, depth: u32, cap: u64) -> Result<SegmentSet> {
    let mut stages = stage_curves(p, depth, Joining::Bridged, cap)?;
    Ok(stages.pop().expect("stage 0 is always present"))
}

/// How far a bound reaches: a finite stage or the whole construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    Finite(u32),
    Infinity,
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Finite(l) => write!(f, "{l}"),
            Horizon::Infinity => f.write_str("infinity"),
        }
    }
}

fn require_strict(p: &CascadeParams, policy: Refinement, what: &str) -> Result<()> {
    match validate(p, policy)? {
        Validity::StrictValid => Ok(()),
        other => Err(Error::precondition(format!(
            "{what} needs strictly valid parameters, got {}",
            other.label()
        ))),
    }
}

/// Terms of the length series: `d 2^(d-1)`, then for `l = 1..=depth`
/// `d 2^d 3^-N_{l-1} exp{(k_1+...+k_l) d [1 + ln(1/delta)]}`.
pub fn length_bound_terms(
    p: &CascadeParams,
    depth: u32,
    prec: Precision,
) -> Result<Vec<BoundedReal>> {
    let d = p.dim();
    let weight = int((d as i64) << d);
    let mut terms = vec![BoundedReal::from_int((d as i64) << (d - 1))];
    for l in 1..=depth {
        let growth = growth_bound(p.budget_sum(l) * d as u32, p.delta(), prec)?;
        terms.push(
            growth
                .scale(&(&weight * third_pow(p.composite_level(l - 1))))
                .rounded(prec),
        );
    }
    Ok(terms)
}

/// Length bound through stage `L` (the partial sum of
/// [`length_bound_terms`]); for `Infinity`,
/// `3 d 2^d exp{3 d n1 [delta + delta ln(1/delta)]}`.
pub fn length_bound(p: &CascadeParams, horizon: Horizon, prec: Precision) -> Result<BoundedReal> {
    let d = p.dim();
    let weight = int((d as i64) << d);
    match horizon {
        Horizon::Finite(depth) => Ok(length_bound_terms(p, depth, prec)?
            .iter()
            .fold(BoundedReal::from_int(0), |acc, t| (&acc + t).rounded(prec))),
        Horizon::Infinity => {
            require_strict(p, Refinement::default(), "the total length bound")?;
            let ln_inv = enclose_log(&p.delta().recip(), prec)?;
            let exponent = (&ln_inv + &BoundedReal::from_int(1))
                .scale(&(p.delta() * int(3 * d as i64 * p.n1 as i64)));
            Ok(exponent.exp(prec).scale(&(int(3) * weight)))
        }
    }
}

/// Exact length bound through stage `L` of the bridged curve, from piece
/// counts: `d 2^(d-1) + sum_l #K_{l-1} 3^-N_{l-1} S(n_l, k_l)`, with `S` the
/// cube-and-gap sum over the bridged gap family.
pub fn exact_length_sum(p: &CascadeParams, depth: u32, cap: u64) -> Result<Rational> {
    let d = p.dim();
    let mut total = int((d as i64) << (d - 1));
    for l in 1..=depth {
        let spec = p.stage_spec(l);
        let piece = lemma24_piece_sum(d, spec.n, &count_k(&spec), &bridged_gaps(&spec, cap)?);
        total += big(&cube_count(p, l - 1)) * third_pow(p.composite_level(l - 1)) * piece;
    }
    Ok(total)
}

/// `Z = exp(-2 delta^2 n1)`.
pub fn mass_ratio(p: &CascadeParams, prec: Precision) -> Result<BoundedReal> {
    let x = p.delta() * p.delta() * int(-2 * p.n1 as i64);
    Ok(BoundedReal::exact(x).exp(prec))
}

/// Mass lower bound: `prod_{j<=l} [1 - exp(-2 delta^2 n_j)]^d`, or
/// `exp{-d Z / (1 - Z)^2}` for `Infinity`, reported as `[0, 2^-level]` once
/// it falls below that.
pub fn measure_bound(p: &CascadeParams, horizon: Horizon, prec: Precision) -> Result<BoundedReal> {
    let d = p.dim();
    let one = BoundedReal::from_int(1);
    match horizon {
        Horizon::Finite(l) => {
            let mut total = one.clone();
            for j in 1..=l {
                let x = p.delta() * p.delta() * int(-2 * p.n_at(j) as i64);
                let factor = (&one - &BoundedReal::exact(x).exp(prec)).powi(d as u32)?;
                total = (&total * &factor).rounded(prec);
            }
            Ok(total)
        }
        Horizon::Infinity => {
            let z = mass_ratio(p, prec)?;
            if z.hi() >= &Rational::one() {
                return Err(Error::Precision(format!(
                    "Z = exp(-2 delta^2 n1) not separated from 1 at precision {}",
                    prec.level()
                )));
            }
            let gap = &one - &z;
            let exponent = (&z.scale(&int(-(d as i64)))).div(&(&gap * &gap))?;
            // below 2^-level the exact endpoints would be astronomically long
            if exponent.hi() <= &int(-(prec.level() as i64)) {
                return BoundedReal::new(Rational::zero(), pow2(-(prec.level() as i64)));
            }
            Ok(exponent.rounded(prec).exp(prec))
        }
    }
}
