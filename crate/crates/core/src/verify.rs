//! Verification suites: each runs a family of exact or certified checks and
//! returns one [`CheckRecord`] per check, in a fixed order.

use std::fmt;
use std::str::FromStr;
use std::thread;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::arith::{
    big, certify_leq, int, pow3, ratio, third_pow, Precision, Rational, Refinement,
};
use crate::cascade::{
    cube_count, cube_count_bound, exact_length_sum, length_bound, measure_bound, nu_stage,
    nu_stage_direct, stage_curves, validate, CascadeParams, Horizon, Joining, Validity,
};
use crate::check::{BoundCheck, Relation};
use crate::error::{Error, Result};
use crate::geometry::{
    gamma_nk, is_connected, lemma24_bound, lemma24_piece_sum, union_length, SegmentSet,
};
use crate::kset::{binomial_tail, check_lemma22, cramer_bound, entropy_h, pinsker_floor, KSetSpec};
use crate::measure::{adjacent_ratio_max, density_oracle, mu, MeasureParams, TriadicInterval};
use crate::report::{elapsed_ms, CheckRecord, Interval, ParamsEcho, Report};
use crate::traverse::euler_tour;

/// The `(n, k)` pairs on which `Gamma(n, k)` is built and checked.
pub const GAMMA_CASES: [(u32, u32); 5] = [(1, 0), (2, 1), (3, 1), (3, 2), (4, 2)];

/// Levels swept by the tail checks.
pub const TAIL_LEVELS: [u32; 11] = [10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60];

/// Sample sizes for the Cramér tail checks.
pub const CRAMER_SIZES: [u32; 4] = [5, 10, 20, 40];

/// Highest level of the Lebesgue checks at `delta = 1/3`.
pub const LEBESGUE_LEVEL: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Doubling,
    Oracle,
    Tails,
    Gamma,
    Cascade,
    Tour,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Doubling,
        Suite::Oracle,
        Suite::Tails,
        Suite::Gamma,
        Suite::Cascade,
        Suite::Tour,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Doubling => "doubling",
            Suite::Oracle => "oracle",
            Suite::Tails => "tails",
            Suite::Gamma => "gamma",
            Suite::Cascade => "cascade",
            Suite::Tour => "tour",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub delta: Rational,
    pub dim: usize,
    /// Strict-schedule `n1`; defaults to the denominator of `3 delta`.
    pub n1: Option<u32>,
    pub levels: u32,
    pub max_level: u32,
    pub policy: Refinement,
    pub toy_n1: u32,
    pub toy_k1: u32,
    pub toy_levels: u32,
    pub cap: u64,
}

impl VerifyConfig {
    pub fn new(delta: Rational, dim: usize) -> Self {
        VerifyConfig {
            delta,
            dim,
            n1: None,
            levels: 3,
            max_level: 7,
            policy: Refinement::up_to(Precision::new(256)),
            toy_n1: 2,
            toy_k1: 1,
            toy_levels: 2,
            cap: 1_000_000,
        }
    }

    fn measure(&self) -> Result<MeasureParams> {
        MeasureParams::new(self.delta.clone(), self.dim)
    }

    /// `n1` for the strict schedule.
    pub fn strict_n1(&self) -> Result<u32> {
        match self.n1 {
            Some(n1) => Ok(n1),
            None => {
                let den = (&self.delta * int(3)).denom().clone();
                u32::try_from(den).map_err(|_| Error::domain("denominator of 3 delta is too large"))
            }
        }
    }

    pub fn toy_params(&self) -> Result<CascadeParams> {
        CascadeParams::toy(self.delta.clone(), self.dim, self.toy_n1, self.toy_k1)
    }

    /// Parameter echo for a report covering `suite`.
    pub fn echo(&self, suite: &str) -> ParamsEcho {
        let n1 = self.strict_n1().ok();
        let k1 = n1
            .and_then(|n1| CascadeParams::strict(self.delta.clone(), self.dim, n1).ok())
            .map(|p| p.k1());
        ParamsEcho {
            suite: suite.to_string(),
            delta: self.delta.to_string(),
            d: self.dim,
            n1,
            k1,
            mode: if k1.is_some() { "strict" } else { "toy" }.to_string(),
            levels: self.levels,
            max_level: self.max_level,
            prec: self.policy.max.level(),
            toy_n1: self.toy_n1,
            toy_k1: self.toy_k1,
            toy_levels: self.toy_levels,
        }
    }

    fn top_precision(&self) -> Precision {
        self.policy.max
    }
}

/// Runs one suite.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    match suite {
        Suite::Doubling => doubling_suite(cfg),
        Suite::Oracle => oracle_suite(cfg),
        Suite::Tails => tails_suite(cfg),
        Suite::Gamma => gamma_suite(cfg),
        Suite::Cascade => cascade_suite(cfg),
        Suite::Tour => tour_suite(cfg),
    }
}

/// Runs `suites` and assembles the report; `label` names the selection.
pub fn verify(suites: &[Suite], label: &str, cfg: &VerifyConfig) -> Result<Report> {
    Ok(Report::new(cfg.echo(label), run_suites(suites, cfg)?))
}

/// Runs suites concurrently; records come back grouped in `suites` order.
pub fn run_suites(suites: &[Suite], cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let results: Vec<Result<Vec<CheckRecord>>> = thread::scope(|scope| {
        let handles: Vec<_> = suites
            .iter()
            .map(|&suite| scope.spawn(move || run_suite(suite, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, u64)> {
    let start = Instant::now();
    let value = f()?;
    Ok((value, elapsed_ms(start)))
}

fn bound_record(name: String, f: impl FnOnce() -> Result<BoundCheck>) -> Result<CheckRecord> {
    let (check, ms) = timed(f)?;
    Ok(CheckRecord::from_bound(name, &check, ms))
}

fn doubling_suite(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let params = cfg.measure()?;
    let bound = params.adjacent_ratio_bound();
    let mut out = Vec::new();
    for n in 1..=cfg.max_level {
        let (worst, ms) =
            timed(|| adjacent_ratio_max(&params, n, BigInt::zero()..BigInt::from(pow3(n))))?;
        let at_most = BoundCheck::exact(
            format!("doubling/level-{n}/ratio"),
            "mu(I)/mu(J) <= (1 - 2 delta)/delta for adjacent level-n I, J in [0,1)",
            worst.clone(),
            Relation::AtMost,
            bound.clone(),
        );
        out.push(CheckRecord::from_bound(at_most.name.clone(), &at_most, ms));
        let attained = BoundCheck::exact(
            format!("doubling/level-{n}/attained"),
            "max adjacent ratio = (1 - 2 delta)/delta",
            worst,
            Relation::AtLeast,
            bound.clone(),
        );
        out.push(CheckRecord::from_bound(attained.name.clone(), &attained, 0));
    }
    Ok(out)
}

fn oracle_suite(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let params = cfg.measure()?;
    let mut out = Vec::new();
    for n in 0..=cfg.max_level {
        let (defect, ms) = timed(|| Ok(oracle_defect(&params, n)))?;
        let check = BoundCheck::exact(
            format!("oracle/level-{n}"),
            "sum over level-n atoms of |mu(I) - 3^-n density(I)| = 0",
            defect,
            Relation::AtMost,
            Rational::zero(),
        );
        out.push(CheckRecord::from_bound(check.name.clone(), &check, ms));
    }
    if cfg.delta == ratio(1, 3) {
        for n in 0..=LEBESGUE_LEVEL {
            let (defect, ms) = timed(|| Ok(lebesgue_defect(&params, n)))?;
            let check = BoundCheck::exact(
                format!("lebesgue/level-{n}"),
                "delta = 1/3: sum over level-n atoms of |mu(I) - 3^-n| = 0",
                defect,
                Relation::AtMost,
                Rational::zero(),
            );
            out.push(CheckRecord::from_bound(check.name.clone(), &check, ms));
        }
    }
    Ok(out)
}

/// `sum_i |mu(I_i) - 3^-n density(midpoint of I_i)|` over level-`n` atoms.
pub fn oracle_defect(params: &MeasureParams, n: u32) -> Rational {
    let side = third_pow(n);
    let mut total = Rational::zero();
    let mut i = BigUint::zero();
    let end = pow3(n);
    while i < end {
        let atom = TriadicInterval::new(n, BigInt::from(i.clone()));
        let diff = mu(params, &atom) - density_oracle(params, n, &atom.midpoint()) * &side;
        total += if diff < Rational::zero() { -diff } else { diff };
        i += 1u32;
    }
    total
}

/// `sum_i |mu(I_i) - 3^-n|` over level-`n` atoms.
pub fn lebesgue_defect(params: &MeasureParams, n: u32) -> Rational {
    let side = third_pow(n);
    let mut total = Rational::zero();
    let mut i = BigUint::zero();
    let end = pow3(n);
    while i < end {
        let diff = mu(params, &TriadicInterval::new(n, BigInt::from(i.clone()))) - &side;
        total += if diff < Rational::zero() { -diff } else { diff };
        i += 1u32;
    }
    total
}

/// The rational grid `{1/10, ..., 9/10}`.
pub fn tenths() -> Vec<Rational> {
    (1..=9).map(|i| ratio(i, 10)).collect()
}

/// All `k` with `2 delta n <= k <= 2n/3`.
pub fn strict_budgets(delta: &Rational, n: u32) -> Vec<u32> {
    (0..=n)
        .filter(|&k| KSetSpec::new(n, k, delta.clone()).in_strict_regime())
        .collect()
}

fn tails_suite(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for n in TAIL_LEVELS {
        for k in strict_budgets(&cfg.delta, n) {
            let spec = KSetSpec::new(n, k, cfg.delta.clone());
            let (report, ms) = timed(|| check_lemma22(&spec, cfg.policy))?;
            for check in report.checks() {
                out.push(CheckRecord::from_bound(
                    format!("tails/n-{n}/k-{k}/{}", check.name),
                    check,
                    ms,
                ));
            }
        }
    }
    let grid = tenths();
    for a in &grid {
        for p in grid.iter().filter(|p| *p <= a) {
            out.push(bound_record(format!("entropy/a-{a}/p-{p}"), || {
                BoundCheck::at_most(
                    format!("entropy/a-{a}/p-{p}"),
                    "2(a - p)^2 <= H(a, p)",
                    pinsker_floor(a, p),
                    cfg.policy,
                    |prec| entropy_h(a, p, prec),
                )
            })?);
        }
    }
    for n in CRAMER_SIZES {
        for a in &grid {
            for p in grid.iter().filter(|p| *p <= a) {
                let name = format!("cramer/n-{n}/a-{a}/p-{p}");
                out.push(bound_record(name.clone(), || {
                    BoundCheck::at_most(
                        name,
                        "P(Bin(n, p) >= an) <= exp(-n H(a, p))",
                        binomial_tail(n, a, p),
                        cfg.policy,
                        |prec| cramer_bound(n, a, p, prec),
                    )
                })?);
            }
        }
    }
    Ok(out)
}

/// Gamma checks: connectivity, the exact piece sum and the closed form.
fn gamma_suite(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let params = cfg.measure()?;
    let d = cfg.dim;
    let mut out = Vec::new();
    for (n, k) in GAMMA_CASES {
        let tag = format!("gamma/n-{n}/k-{k}");
        let (gamma, build_ms) = timed(|| gamma_nk(&params, n, k, cfg.cap))?;
        let length = union_length(&gamma.segments);
        let (connected, ms) = timed(|| Ok(is_connected(&gamma.segments)))?;
        out.push(CheckRecord::flag(
            format!("{tag}/connected"),
            "Gamma(n,k) is connected",
            connected,
            None,
            build_ms + ms,
        ));
        let piece = lemma24_piece_sum(d, n, &BigUint::from(gamma.atom_count), &gamma.gaps);
        let exact = BoundCheck::exact(
            format!("{tag}/piece-sum"),
            "H1(Gamma(n,k)) <= d 2^(d-1) 3^-n #cubes + d 2^(d-1) #gaps^(d-1) sum|gap|",
            length.clone(),
            Relation::AtMost,
            piece,
        );
        out.push(CheckRecord::from_bound(exact.name.clone(), &exact, 0));
        out.push(bound_record(format!("{tag}/closed-form"), || {
            BoundCheck::at_most(
                format!("{tag}/closed-form"),
                "H1(Gamma(n,k)) <= d 2^d exp(dk[1 + log(1/delta)])",
                length,
                cfg.policy,
                |prec| lemma24_bound(k, d, &cfg.delta, prec),
            )
        })?);
    }
    Ok(out)
}

fn cascade_suite(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let mut out = toy_cascade_checks(cfg)?;
    out.extend(strict_cascade_checks(cfg)?);
    Ok(out)
}

fn toy_cascade_checks(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let p = cfg.toy_params()?;
    let mut out = Vec::new();
    for l in 0..=cfg.toy_levels {
        let (direct, ms) = timed(|| nu_stage_direct(&p, l, cfg.cap))?;
        let product = nu_stage(&p, l);
        out.push(CheckRecord {
            name: format!("toy/nu-stage/l-{l}/direct-sum"),
            anchor: "prod_j mu(K(n_j,k_j))^d = sum of nu(Q) over Q in K_l".into(),
            lhs: Some(product.to_string()),
            bound: Some(Interval {
                lo: direct.to_string(),
                hi: direct.to_string(),
            }),
            verdict: (product == direct).into(),
            ms,
        });
        out.push(bound_record(
            format!("toy/nu-stage/l-{l}/mass-bound"),
            || {
                BoundCheck::at_least(
                    format!("toy/nu-stage/l-{l}/mass-bound"),
                    "nu(K_l) >= prod_j [1 - exp(-2 delta^2 n_j)]^d",
                    nu_stage(&p, l),
                    cfg.policy,
                    |pr| measure_bound(&p, Horizon::Finite(l), pr),
                )
            },
        )?);
    }
    let (stages, build_ms) = timed(|| stage_curves(&p, cfg.toy_levels, Joining::Bridged, cfg.cap))?;
    for (l, stage) in stages.iter().enumerate() {
        let l = l as u32;
        let tag = format!("toy/stage-curve/l-{l}");
        let (connected, ms) = timed(|| Ok(is_connected(stage)))?;
        out.push(CheckRecord::flag(
            format!("{tag}/connected"),
            "skeleton of [0,1]^d with bridged Gamma copies through stage l is connected",
            connected,
            None,
            if l == 0 { build_ms + ms } else { ms },
        ));
        if l > 0 {
            let (mono, ms) = timed(|| Ok(stages[l as usize - 1].is_subset_of(stage)))?;
            out.push(CheckRecord::flag(
                format!("{tag}/monotone"),
                "stage l-1 is contained in stage l",
                mono,
                None,
                ms,
            ));
        }
        let length = union_length(stage);
        let (exact, ms) = timed(|| exact_length_sum(&p, l, cfg.cap))?;
        let check = BoundCheck::exact(
            format!("{tag}/exact-sum"),
            "H1(stage l) <= d 2^(d-1) + sum_j #K_(j-1) 3^-N_(j-1) S(n_j,k_j)",
            length.clone(),
            Relation::AtMost,
            exact,
        );
        out.push(CheckRecord::from_bound(check.name.clone(), &check, ms));
        out.push(bound_record(format!("{tag}/length-bound"), || {
            BoundCheck::at_most(
                format!("{tag}/length-bound"),
                "H1(stage l) <= d 2^(d-1) + d 2^d sum_j 3^-N_(j-1) exp((k_1+...+k_j) d [1 + log(1/delta)])",
                length,
                cfg.policy,
                |pr| length_bound(&p, Horizon::Finite(l), pr),
            )
        })?);
    }
    Ok(out)
}

fn strict_cascade_checks(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let n1 = cfg.strict_n1()?;
    let delta = &cfg.delta;
    let start = Instant::now();
    let params = match CascadeParams::strict(delta.clone(), cfg.dim, n1) {
        Ok(p) => Some(p),
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    let validity = match &params {
        Some(p) => validate(p, cfg.policy)?,
        None => Validity::Invalid(format!(
            "3 delta n1 with n1 = {n1} is not a positive integer"
        )),
    };
    let mut out = vec![CheckRecord {
        name: format!("strict/n1-{n1}/classified"),
        anchor: format!(
            "18 d [delta + delta log(1/delta)] <= log 3 and 3 delta n1 a positive integer: {}",
            validity.label()
        ),
        lhs: None,
        bound: None,
        verdict: true.into(),
        ms: elapsed_ms(start),
    }];
    let (Validity::StrictValid, Some(p)) = (&validity, params) else {
        return Ok(out);
    };
    let prec = cfg.top_precision();
    let ((inf_bound, finite_bound), bound_ms) = timed(|| {
        Ok((
            measure_bound(&p, Horizon::Infinity, prec)?,
            measure_bound(&p, Horizon::Finite(cfg.levels), prec)?,
        ))
    })?;
    out.push(CheckRecord {
        name: format!("strict/n1-{n1}/mass-bound-ordering"),
        anchor: format!(
            "exp(-d Z/(1-Z)^2) <= prod_(j<={}) [1 - Z^j]^d, Z = exp(-2 delta^2 n1)",
            cfg.levels
        ),
        lhs: None,
        bound: Some((&finite_bound).into()),
        verdict: certify_leq(&inf_bound, &finite_bound).into(),
        ms: bound_ms,
    });
    for l in 0..=cfg.levels {
        let (nu, nu_ms) = timed(|| Ok(nu_stage(&p, l)))?;
        let tag = format!("strict/n1-{n1}/l-{l}");
        out.push(bound_record(format!("{tag}/mass-bound"), || {
            BoundCheck::at_least(
                format!("{tag}/mass-bound"),
                "nu(K_l) >= prod_j [1 - exp(-2 delta^2 n_j)]^d",
                nu.clone(),
                cfg.policy,
                |pr| measure_bound(&p, Horizon::Finite(l), pr),
            )
        })?);
        let check = BoundCheck::at_least(
            format!("{tag}/mass-bound-infinity"),
            "nu(K_l) >= exp(-d Z/(1-Z)^2)",
            nu,
            cfg.policy,
            |pr| measure_bound(&p, Horizon::Infinity, pr),
        )?;
        out.push(CheckRecord::from_bound(check.name.clone(), &check, nu_ms));
        out.push(bound_record(format!("{tag}/cube-count"), || {
            BoundCheck::at_most(
                format!("{tag}/cube-count"),
                "#K_l <= exp((k_1+...+k_l) d [1 + log(1/delta)])",
                big(&cube_count(&p, l)),
                cfg.policy,
                |pr| cube_count_bound(&p, l, pr),
            )
        })?);
        let (partial, ms) = timed(|| length_bound(&p, Horizon::Finite(l), prec))?;
        let (total, _) = timed(|| length_bound(&p, Horizon::Infinity, prec))?;
        out.push(CheckRecord {
            name: format!("{tag}/length-partial-sum"),
            anchor:
                "partial length sum through l <= 3 d 2^d exp(3 d n1 [delta + delta log(1/delta)])"
                    .into(),
            lhs: None,
            bound: Some((&total).into()),
            verdict: certify_leq(&partial, &total).into(),
            ms,
        });
    }
    Ok(out)
}

fn tour_record(name: String, set: &SegmentSet) -> Result<CheckRecord> {
    let start = Instant::now();
    let tour = euler_tour(set)?;
    let length = tour.length()?;
    let total = union_length(set);
    let covered = tour.trace(set.dim())? == set.canonical();
    let ok = tour.is_closed() && covered && total <= length && length <= &total * int(2);
    Ok(CheckRecord {
        name,
        anchor: "closed walk covering S with H1(S) <= length <= 2 H1(S)".into(),
        lhs: Some(length.to_string()),
        bound: Some(Interval {
            lo: total.to_string(),
            hi: (&total * int(2)).to_string(),
        }),
        verdict: ok.into(),
        ms: elapsed_ms(start),
    })
}

fn tour_suite(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let params = cfg.measure()?;
    let mut out = Vec::new();
    for (n, k) in GAMMA_CASES {
        let gamma = gamma_nk(&params, n, k, cfg.cap)?;
        out.push(tour_record(
            format!("tour/gamma/n-{n}/k-{k}"),
            &gamma.segments,
        )?);
    }
    let p = cfg.toy_params()?;
    let stages = stage_curves(&p, cfg.toy_levels, Joining::Bridged, cfg.cap)?;
    for (l, stage) in stages.iter().enumerate() {
        out.push(tour_record(format!("tour/toy-stage/l-{l}"), stage)?);
    }
    Ok(out)
}
