//! Acceptance criteria, one line per criterion.

use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigInt;

use doubling_core::arith::{
    certify_leq, certify_refining, int, ratio, third_pow, BoundedReal, Precision, Rational,
    Refinement, Verdict,
};
use doubling_core::cascade::{
    exact_length_sum, length_bound, measure_bound, nu_stage, nu_stage_direct, stage_curves,
    validate, CascadeParams, Horizon, Joining, Validity,
};
use doubling_core::check::BoundCheck;
use doubling_core::geometry::{
    gamma_nk, is_connected, lemma24_bound, lemma24_piece_sum, union_length, SegmentSet,
};
use doubling_core::kset::{
    binomial_tail, check_lemma22, count_k, cramer_bound, entropy_h, KSetSpec,
};
use doubling_core::measure::{density_oracle, mu, MeasureParams, TriadicInterval};
use doubling_core::traverse::euler_tour;

const CAP: u64 = 1_000_000;
const GAMMA_CASES: [(u32, u32); 5] = [(1, 0), (2, 1), (3, 1), (3, 2), (4, 2)];

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fmt_err(e: doubling_core::Error) -> String {
    e.to_string()
}

fn tenths() -> Vec<Rational> {
    (1..=9).map(|i| ratio(i, 10)).collect()
}

fn oracle_equivalence() -> Outcome {
    let mut atoms = 0u64;
    for (p, q) in [(1, 5), (1, 4), (3, 10), (1, 3)] {
        let params = MeasureParams::new(ratio(p, q), 1).map_err(fmt_err)?;
        for n in 0..=7u32 {
            for i in 0..3u64.pow(n) {
                let iv = TriadicInterval::new(n, i);
                let via_density = density_oracle(&params, n, &iv.midpoint()) * third_pow(n);
                ensure(mu(&params, &iv) == via_density, || {
                    format!("delta = {p}/{q}, level {n}, index {i}")
                })?;
                atoms += 1;
            }
        }
    }
    Ok(format!("{atoms} atoms, zero defect"))
}

fn lebesgue_degeneracy() -> Outcome {
    let params = MeasureParams::new(ratio(1, 3), 1).map_err(fmt_err)?;
    let mut atoms = 0u64;
    for n in 0..=10u32 {
        let side = third_pow(n);
        for i in 0..3u64.pow(n) {
            ensure(mu(&params, &TriadicInterval::new(n, i)) == side, || {
                format!("level {n}, index {i}")
            })?;
            atoms += 1;
        }
    }
    Ok(format!("{atoms} atoms equal 3^-n"))
}

fn triadic_doubling() -> Outcome {
    for (p, q) in [(1, 5), (1, 4)] {
        let params = MeasureParams::new(ratio(p, q), 1).map_err(fmt_err)?;
        let bound = (Rational::from_integer(1.into()) - ratio(2 * p, q)) / ratio(p, q);
        for n in 1..=8u32 {
            let masses: Vec<Rational> = (0..3u64.pow(n))
                .map(|i| mu(&params, &TriadicInterval::new(n, i)))
                .collect();
            let mut attained = false;
            for w in masses.windows(2) {
                let r = if w[0] >= w[1] {
                    &w[0] / &w[1]
                } else {
                    &w[1] / &w[0]
                };
                ensure(r <= bound, || {
                    format!("delta = {p}/{q}, level {n}: ratio {r} > {bound}")
                })?;
                attained |= r == bound;
            }
            ensure(attained, || {
                format!("delta = {p}/{q}, level {n}: bound {bound} not attained")
            })?;
        }
    }
    Ok("levels 1..8, bound attained at each".into())
}

fn tail_sweep() -> Outcome {
    let delta = ratio(1, 5);
    let policy = Refinement::up_to(Precision::new(128));
    let mut pairs = 0;
    for n in (10..=60u32).step_by(5) {
        for k in 0..=n {
            let kr = int(k as i64);
            if kr < &delta * int(2 * n as i64) || kr * int(3) > int(2 * n as i64) {
                continue;
            }
            let report =
                check_lemma22(&KSetSpec::new(n, k, delta.clone()), policy).map_err(fmt_err)?;
            for c in report.checks() {
                ensure(c.verdict == Verdict::True, || {
                    format!(
                        "(n, k) = ({n}, {k}) {}: {:?} at level {}",
                        c.name,
                        c.verdict,
                        c.precision.level()
                    )
                })?;
                ensure(c.precision.level() <= 128, || {
                    format!("({n}, {k}) needed level {}", c.precision.level())
                })?;
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (n, k) pairs, 3 bounds each"))
}

/// `P(Bin(n, p) >= ceil(a n))`, summed term by term.
fn tail_oracle(n: u32, a: &Rational, p: &Rational) -> Rational {
    let one = Rational::from_integer(1.into());
    let start = (a * int(n as i64)).ceil().to_integer();
    let mut total = Rational::from_integer(0.into());
    let mut choose = BigInt::from(1);
    for m in 0..=n {
        if BigInt::from(m) >= start {
            let term = Rational::from_integer(choose.clone())
                * num_traits::pow(p.clone(), m as usize)
                * num_traits::pow(&one - p, (n - m) as usize);
            total += term;
        }
        choose = choose * BigInt::from(n - m) / BigInt::from(m + 1);
    }
    total
}

fn entropy_grid() -> Outcome {
    let policy = Refinement::up_to(Precision::new(256));
    let mut checks = 0;
    for a in tenths() {
        for p in tenths().into_iter().filter(|p| *p <= a) {
            let floor = int(2) * (&a - &p) * (&a - &p);
            let out = certify_refining(policy, |prec| {
                Ok((BoundedReal::exact(floor.clone()), entropy_h(&a, &p, prec)?))
            })
            .map_err(fmt_err)?;
            ensure(out.verdict == Verdict::True, || {
                format!("H({a}, {p}) >= 2(a-p)^2: {:?}", out.verdict)
            })?;
            checks += 1;
            for n in [5, 10, 20, 40] {
                let tail = binomial_tail(n, &a, &p);
                ensure(tail == tail_oracle(n, &a, &p), || {
                    format!("tail mismatch at n = {n}, a = {a}, p = {p}")
                })?;
                let check = BoundCheck::at_most("cramer", "", tail, policy, |prec| {
                    cramer_bound(n, &a, &p, prec)
                })
                .map_err(fmt_err)?;
                ensure(check.verdict == Verdict::True, || {
                    format!(
                        "tail <= e^(-nH) at n = {n}, a = {a}, p = {p}: {:?}",
                        check.verdict
                    )
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} certified inequalities"))
}

fn gamma_geometry() -> Outcome {
    let delta = ratio(1, 5);
    let params = MeasureParams::new(delta.clone(), 2).map_err(fmt_err)?;
    let policy = Refinement::up_to(Precision::new(256));
    for (n, k) in GAMMA_CASES {
        let g = gamma_nk(&params, n, k, CAP).map_err(fmt_err)?;
        ensure(is_connected(&g.segments), || {
            format!("Gamma({n}, {k}) is disconnected")
        })?;
        let len = union_length(&g.segments);
        let spec = KSetSpec::new(n, k, delta.clone());
        let sum = lemma24_piece_sum(2, n, &count_k(&spec), &g.gaps);
        ensure(len <= sum, || {
            format!("Gamma({n}, {k}): length {len} > piece sum {sum}")
        })?;
        let out = certify_refining(policy, |prec| {
            Ok((
                BoundedReal::exact(len.clone()),
                lemma24_bound(k, 2, &delta, prec)?,
            ))
        })
        .map_err(fmt_err)?;
        ensure(out.verdict == Verdict::True, || {
            format!("Gamma({n}, {k}): closed form {:?}", out.verdict)
        })?;
    }
    Ok(format!(
        "{} cases connected and within both bounds",
        GAMMA_CASES.len()
    ))
}

fn toy_params() -> CascadeParams {
    CascadeParams::toy(ratio(1, 5), 2, 2, 1).expect("toy parameters")
}

fn cascade_exactness(stages: &[SegmentSet]) -> Outcome {
    let p = toy_params();
    let prec = Precision::new(256);
    for l in 0..=2 {
        let (formula, direct) = (
            nu_stage(&p, l),
            nu_stage_direct(&p, l, CAP).map_err(fmt_err)?,
        );
        ensure(formula == direct, || {
            format!("l = {l}: product {formula} != direct {direct}")
        })?;
    }
    for (l, stage) in stages.iter().enumerate() {
        ensure(is_connected(stage), || format!("stage {l} is disconnected"))?;
        if l > 0 {
            ensure(stages[l - 1].is_subset_of(stage), || {
                format!("stage {} not inside stage {l}", l - 1)
            })?;
        }
        let len = union_length(stage);
        let exact = exact_length_sum(&p, l as u32, CAP).map_err(fmt_err)?;
        ensure(len <= exact, || {
            format!("stage {l}: length {len} > exact sum {exact}")
        })?;
        let bound = length_bound(&p, Horizon::Finite(l as u32), prec).map_err(fmt_err)?;
        ensure(
            certify_leq(&BoundedReal::exact(len.clone()), &bound) == Verdict::True,
            || format!("stage {l}: length {len} not certified below the partial sum"),
        )?;
    }
    Ok(format!(
        "stages 0..2, final length {}",
        union_length(&stages[2])
    ))
}

fn strict_bounds() -> Outcome {
    let prec = Precision::new(256);
    let mut limit = String::new();
    for (n1, k_cap) in [(250, 9), (25_000, 900)] {
        let p = CascadeParams::strict(ratio(1, 250), 2, n1).map_err(fmt_err)?;
        let validity = validate(&p, Refinement::up_to(prec)).map_err(fmt_err)?;
        ensure(validity == Validity::StrictValid, || {
            format!("n1 = {n1}: {}", validity.label())
        })?;
        let inf = measure_bound(&p, Horizon::Infinity, prec).map_err(fmt_err)?;
        for l in 0..=3 {
            ensure(p.k_at(l) <= k_cap, || {
                format!("n1 = {n1}: k_{l} = {}", p.k_at(l))
            })?;
            let nu = nu_stage(&p, l);
            let finite = measure_bound(&p, Horizon::Finite(l), prec).map_err(fmt_err)?;
            ensure(&nu >= finite.lo(), || {
                format!("n1 = {n1}, l = {l}: nu below the finite bound")
            })?;
            ensure(&nu >= inf.lo(), || {
                format!("n1 = {n1}, l = {l}: nu below the limit bound")
            })?;
        }
        if n1 == 25_000 {
            ensure(inf.lo() > &ratio(1, 20), || {
                format!("limit bound {} not above 0.05", inf.lo())
            })?;
            limit = format!(
                "limit bound lo = {} at n1 = {n1}",
                doubling_core::arith::to_decimal(inf.lo(), 6)
            );
        }
    }
    Ok(format!("n1 in {{250, 25000}}, l <= 3; {limit}"))
}

fn tours(stages: &[SegmentSet]) -> Outcome {
    let params = MeasureParams::new(ratio(1, 5), 2).map_err(fmt_err)?;
    let mut sets = Vec::new();
    for (n, k) in GAMMA_CASES {
        sets.push((
            format!("Gamma({n}, {k})"),
            gamma_nk(&params, n, k, CAP).map_err(fmt_err)?.segments,
        ));
    }
    for (l, s) in stages.iter().enumerate() {
        sets.push((format!("stage {l}"), s.clone()));
    }
    for (name, set) in &sets {
        let tour = euler_tour(set).map_err(fmt_err)?;
        ensure(tour.is_closed(), || format!("{name}: walk not closed"))?;
        ensure(
            tour.trace(set.dim()).map_err(fmt_err)? == set.canonical(),
            || format!("{name}: coverage differs"),
        )?;
        let (len, total) = (tour.length().map_err(fmt_err)?, union_length(set));
        ensure(total <= len && len <= &total * int(2), || {
            format!("{name}: length {len} vs {total}")
        })?;
    }
    Ok(format!("{} sets toured", sets.len()))
}

/// The report with every elapsed-time line removed.
fn without_timings(report: &[u8]) -> String {
    String::from_utf8_lossy(report)
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"ms\":"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_doubling"))
            .args(["verify", "--suite", "all"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success() && b.status.success(), || {
        format!("exit status {:?}", a.status.code())
    })?;
    let (a, b) = (without_timings(&a.stdout), without_timings(&b.stdout));
    ensure(a == b, || "reports differ outside the ms fields".into())?;
    Ok(format!("{} bytes identical", a.len()))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let stages = stage_curves(&toy_params(), 2, Joining::Bridged, CAP).expect("toy stages");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("Lebesgue degeneracy", Box::new(lebesgue_degeneracy)),
        ("triadic doubling", Box::new(triadic_doubling)),
        ("tail bound sweep", Box::new(tail_sweep)),
        ("entropy and Cramer grid", Box::new(entropy_grid)),
        ("Gamma(n, k) geometry", Box::new(gamma_geometry)),
        ("cascade exactness", Box::new(|| cascade_exactness(&stages))),
        ("strict-parameter bounds", Box::new(strict_bounds)),
        ("traversal", Box::new(|| tours(&stages))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: pass ({detail}; {secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why}; {secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
