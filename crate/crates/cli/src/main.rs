//! `doubling`: exact measure queries, geometry export, parameter checks and
//! verification reports.

mod export;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use doubling_core::arith::{
    int, parse_rational, to_decimal, BoundedReal, Precision, Rational, Refinement,
};
use doubling_core::cascade::{
    cube_count, length_bound, measure_bound, smallest_strict_n1, stage_curves, strict_inequality,
    validate_schedule, CascadeParams, Horizon, Joining, Validity,
};
use doubling_core::geometry::{gamma_bridged, gamma_nk, union_length, Gamma, SegmentSet};
use doubling_core::kset::{
    check_lemma22, component_count, count_k, enumerate_k, gap_count, gaps, length_k, mu_k, KSetSpec,
};
use doubling_core::measure::{mu_interval, MeasureParams};
use doubling_core::report::Outcome;
use doubling_core::traverse::euler_tour;
use doubling_core::verify::{verify, Suite, VerifyConfig};
use doubling_core::Error;

#[derive(Parser)]
#[command(
    name = "doubling",
    version,
    about = "Exact computations with a triadic doubling measure and a curve of positive measure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact measure of a triadic interval or box.
    Measure(MeasureArgs),
    /// Summary, listing, gaps or bound checks for K(n, k).
    Kset(KsetArgs),
    /// Export Gamma(n, k) or a stage of the curve.
    Curve(CurveArgs),
    /// Classify cascade parameters and print the length and mass bounds.
    Params(ParamsArgs),
    /// Run verification suites and print a JSON report.
    Verify(VerifyArgs),
}

fn fraction(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct MeasureArgs {
    /// Parameter delta as p/q with 0 < delta <= 1/3.
    #[arg(long, value_parser = fraction, default_value = "1/5")]
    delta: Rational,
    /// Dimension; defaults to the number of box axes.
    #[arg(long)]
    d: Option<usize>,
    /// Half-open interval `a:b` with triadic endpoints.
    #[arg(long, required_unless_present = "boxes", conflicts_with = "boxes")]
    interval: Option<String>,
    /// Box `a:b,c:d,...`, one interval per axis.
    #[arg(long = "box")]
    boxes: Option<String>,
    /// Also print a decimal approximation.
    #[arg(long)]
    approx: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("view").args(["summary", "list", "gaps", "verify"])))]
struct KsetArgs {
    #[arg(long, value_parser = fraction, default_value = "1/5")]
    delta: Rational,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    /// Count, length and measure (the default).
    #[arg(long)]
    summary: bool,
    /// One line per atom: index and interval.
    #[arg(long)]
    list: bool,
    /// One line per bounded gap.
    #[arg(long)]
    gaps: bool,
    /// Certified tail, length and gap-count bounds.
    #[arg(long)]
    verify: bool,
    /// Largest number of atoms to materialize.
    #[arg(long, default_value_t = 1_000_000)]
    cap: u64,
    /// Largest precision level for certified bounds.
    #[arg(long, default_value_t = 128)]
    prec: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Svg,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum JoiningArg {
    Literal,
    Bridged,
}

impl From<JoiningArg> for Joining {
    fn from(j: JoiningArg) -> Self {
        match j {
            JoiningArg::Literal => Joining::Literal,
            JoiningArg::Bridged => Joining::Bridged,
        }
    }
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, value_parser = fraction, default_value = "1/5")]
    delta: Rational,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Digits of the first stage.
    #[arg(long, required_unless_present = "gamma")]
    n1: Option<u32>,
    /// Budget of the first stage; omitted means `3 delta n1`.
    #[arg(long)]
    k1: Option<u32>,
    /// Last stage to build.
    #[arg(long, default_value_t = 1)]
    stages: u32,
    /// Export the single set Gamma(n, k), given as `n:k`.
    #[arg(long, conflicts_with_all = ["n1", "k1"])]
    gamma: Option<String>,
    /// Gap family: `literal` uses bounded gaps only, `bridged` adds the end
    /// intervals. Defaults to bridged for stages and literal for Gamma.
    #[arg(long, value_enum)]
    joining: Option<JoiningArg>,
    /// Include a closed covering walk.
    #[arg(long)]
    tour: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Decimal coordinates in CSV output.
    #[arg(long)]
    approx: bool,
    /// Multiplier for the SVG stroke width.
    #[arg(long, value_parser = fraction, default_value = "1")]
    stroke_scale: Rational,
    #[arg(long, default_value_t = 1_000_000)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long, value_parser = fraction)]
    delta: Rational,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, required_unless_present = "search", conflicts_with = "search")]
    n1: Option<u32>,
    /// Use the smallest strictly valid `n1`.
    #[arg(long)]
    search: bool,
    /// Precision level of the printed enclosures.
    #[arg(long, default_value_t = 128)]
    prec: u32,
}

#[derive(Args)]
struct VerifyArgs {
    /// doubling, oracle, tails, gamma, cascade, tour or all.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, value_parser = fraction, default_value = "1/5")]
    delta: Rational,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// `n1` of the strict schedule; defaults to the denominator of `3 delta`.
    #[arg(long)]
    n1: Option<u32>,
    /// Stages checked with the strict schedule.
    #[arg(long, default_value_t = 3)]
    levels: u32,
    /// Deepest triadic level for the doubling and oracle suites.
    #[arg(long, default_value_t = 7)]
    max_level: u32,
    /// Largest precision level for certified checks.
    #[arg(long, default_value_t = 256)]
    prec: u32,
    #[arg(long, default_value_t = 2)]
    toy_n1: u32,
    #[arg(long, default_value_t = 1)]
    toy_k1: u32,
    #[arg(long, default_value_t = 2)]
    toy_levels: u32,
    #[arg(long, default_value_t = 1_000_000)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => 2,
            Failure::Core(Error::Resource { .. }) => 3,
            Failure::Core(Error::Precision(_)) => 4,
            Failure::Core(_) => 2,
        }
    }
}

type CmdResult = Result<Outcome, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn exit_code(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Pass => 0,
        Outcome::Fail => 1,
        Outcome::Undecided => 4,
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Measure(a) => cmd_measure(a),
        Command::Kset(a) => cmd_kset(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Params(a) => cmd_params(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(outcome) => ExitCode::from(exit_code(outcome)),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn parse_span(s: &str) -> Result<(Rational, Rational), Failure> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("expected `a:b`, got `{s}`")))?;
    Ok((parse_rational(a.trim())?, parse_rational(b.trim())?))
}

fn cmd_measure(a: MeasureArgs) -> CmdResult {
    let spans = match (&a.interval, &a.boxes) {
        (Some(iv), _) => {
            if a.d.is_some_and(|d| d != 1) {
                return Err(usage(
                    "--interval measures in dimension 1; use --box for d > 1",
                ));
            }
            vec![parse_span(iv)?]
        }
        (None, Some(b)) => b
            .split(',')
            .map(parse_span)
            .collect::<Result<Vec<_>, _>>()?,
        (None, None) => return Err(usage("one of --interval or --box is required")),
    };
    let dim = a.d.unwrap_or(spans.len());
    if dim != spans.len() {
        return Err(usage(format!(
            "--d {dim} but the box has {} axes",
            spans.len()
        )));
    }
    let params = MeasureParams::new(a.delta, dim)?;
    let mut value = int(1);
    for (lo, hi) in &spans {
        value *= mu_interval(&params, lo, hi)?;
    }
    let mut text = format!("{value}\n");
    if a.approx {
        text.push_str(&format!("approx {}\n", to_decimal(&value, 12)));
    }
    emit(None, &text)?;
    Ok(Outcome::Pass)
}

fn cmd_kset(a: KsetArgs) -> CmdResult {
    MeasureParams::new(a.delta.clone(), 1)?;
    if a.n == 0 || a.k > a.n {
        return Err(usage(format!(
            "need 1 <= n and 0 <= k <= n, got n = {}, k = {}",
            a.n, a.k
        )));
    }
    let spec = KSetSpec::new(a.n, a.k, a.delta.clone());
    let policy = Refinement::up_to(Precision::new(a.prec));
    let mut text = String::new();
    let mut outcome = Outcome::Pass;
    if a.list {
        let count = count_k(&spec);
        if count > a.cap.into() {
            return Err(Error::Resource {
                what: format!("atoms of K({}, {})", a.n, a.k),
                count: count.to_string(),
                cap: a.cap,
            }
            .into());
        }
        let side = doubling_core::arith::third_pow(a.n);
        for i in enumerate_k(&spec) {
            let lo = doubling_core::arith::big(&i) * &side;
            let hi = &lo + &side;
            text.push_str(&format!("{i} [{lo}, {hi})\n"));
        }
    } else if a.gaps {
        let list = gaps(&spec, a.cap)?;
        text.push_str(&format!("gaps = {}\n", list.len()));
        for g in &list.gaps {
            text.push_str(&format!("[{}, {})\n", g.lo, g.hi));
        }
    } else if a.verify {
        let report = check_lemma22(&spec, policy)?;
        for check in report.checks() {
            let verdict: Outcome = check.verdict.into();
            text.push_str(&format!(
                "{} {}: {} (lhs = {}, bound in [{}, {}])\n",
                verdict_word(verdict),
                check.name,
                check.anchor,
                check.lhs,
                check.bound.lo(),
                check.bound.hi()
            ));
            outcome = worse(outcome, verdict);
        }
    } else {
        text.push_str(&format!("delta = {}\nn = {}\nk = {}\n", a.delta, a.n, a.k));
        text.push_str(&format!("count = {}\n", count_k(&spec)));
        text.push_str(&format!("length = {}\n", length_k(&spec)));
        text.push_str(&format!("mu = {}\n", mu_k(&spec)));
        text.push_str(&format!("components = {}\n", component_count(&spec)));
        text.push_str(&format!("gaps = {}\n", gap_count(&spec)));
        if spec.in_strict_regime() {
            let report = check_lemma22(&spec, policy)?;
            for check in report.checks() {
                let verdict: Outcome = check.verdict.into();
                text.push_str(&format!(
                    "check {} = {}\n",
                    check.name,
                    verdict_word(verdict)
                ));
                outcome = worse(outcome, verdict);
            }
        } else {
            text.push_str("bounds = not applicable (needs 2 delta n <= k <= 2n/3)\n");
        }
    }
    emit(None, &text)?;
    Ok(outcome)
}

fn verdict_word(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "fail",
        Outcome::Undecided => "undecided",
    }
}

fn worse(a: Outcome, b: Outcome) -> Outcome {
    match (a, b) {
        (Outcome::Fail, _) | (_, Outcome::Fail) => Outcome::Fail,
        (Outcome::Undecided, _) | (_, Outcome::Undecided) => Outcome::Undecided,
        _ => Outcome::Pass,
    }
}

fn parse_pair(s: &str) -> Result<(u32, u32), Failure> {
    let bad = || usage(format!("expected `n:k` with integers, got `{s}`"));
    let (n, k) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        n.trim().parse().map_err(|_| bad())?,
        k.trim().parse().map_err(|_| bad())?,
    ))
}

/// Piece counts of one stage (or of `Gamma(n, k)` alone).
fn piece_counts(
    stage: Option<u32>,
    copies: u64,
    gamma: &Gamma,
    bounded_gaps: u64,
    d: usize,
) -> Value {
    let bounded_boxes = bounded_gaps.pow(d as u32);
    let mut entry = json!({
        "copies": copies,
        "cubes": copies * gamma.cube_count,
        "gap_boxes": copies * bounded_boxes,
        "bridge_boxes": copies * (gamma.gap_box_count - bounded_boxes),
    });
    if let Some(l) = stage {
        entry["stage"] = json!(l);
    }
    entry
}

fn to_u64(n: &BigUint) -> u64 {
    n.to_u64().unwrap_or(u64::MAX)
}

fn cmd_curve(a: CurveArgs) -> CmdResult {
    if a.d < 2 {
        return Err(usage("curves need --d 2 or more"));
    }
    if matches!(a.format, Format::Svg) && a.d != 2 {
        return Err(usage(format!("svg output needs --d 2, got --d {}", a.d)));
    }
    if matches!(a.format, Format::Svg) && a.tour {
        return Err(usage("--tour is available with json and csv output"));
    }
    let measure = MeasureParams::new(a.delta.clone(), a.d)?;
    let mut params = json!({ "delta": a.delta.to_string(), "d": a.d });
    let (set, finest, counts): (SegmentSet, u32, Value) = if let Some(pair) = &a.gamma {
        let (n, k) = parse_pair(pair)?;
        if k > n {
            return Err(usage(format!("need k <= n, got {n}:{k}")));
        }
        let joining = a.joining.map(Joining::from).unwrap_or(Joining::Literal);
        let g = match joining {
            Joining::Literal => gamma_nk(&measure, n, k, a.cap)?,
            Joining::Bridged => gamma_bridged(&measure, n, k, a.cap)?,
        };
        let bounded = gap_count(&KSetSpec::new(n, k, a.delta.clone()));
        params["gamma"] = json!([n, k]);
        params["joining"] = json!(joining_name(joining));
        let counts = piece_counts(None, 1, &g, to_u64(&bounded), a.d);
        (g.segments, n, counts)
    } else {
        let n1 =
            a.n1.ok_or_else(|| usage("--n1 is required without --gamma"))?;
        let p = match a.k1 {
            Some(k1) => CascadeParams::toy(a.delta.clone(), a.d, n1, k1)?,
            None => CascadeParams::strict(a.delta.clone(), a.d, n1)?,
        };
        let joining = a.joining.map(Joining::from).unwrap_or(Joining::Bridged);
        let mut stages = stage_curves(&p, a.stages, joining, a.cap)?;
        let mut counts = Vec::new();
        for l in 1..=a.stages {
            let (n, k) = (p.n_at(l), p.k_at(l));
            let g = match joining {
                Joining::Literal => gamma_nk(&measure, n, k, a.cap)?,
                Joining::Bridged => gamma_bridged(&measure, n, k, a.cap)?,
            };
            let spec = KSetSpec::new(n, k, a.delta.clone());
            counts.push(piece_counts(
                Some(l),
                to_u64(&cube_count(&p, l - 1)),
                &g,
                to_u64(&gap_count(&spec)),
                a.d,
            ));
        }
        params["n1"] = json!(p.n1());
        params["k1"] = json!(p.k1());
        params["mode"] = json!(p.mode().to_string());
        params["stages"] = json!(a.stages);
        params["joining"] = json!(joining_name(joining));
        let set = stages.pop().expect("stage 0 is always present");
        (set, p.composite_level(a.stages), Value::Array(counts))
    };

    let tour = if a.tour || matches!(a.format, Format::Csv) {
        Some(euler_tour(&set)?)
    } else {
        None
    };
    let text = match a.format {
        Format::Svg => export::svg(&set, finest, &a.stroke_scale),
        Format::Csv => export::tour_csv(tour.as_ref().expect("csv output always tours"), a.approx),
        Format::Json => {
            let mut doc = json!({
                "version": env!("CARGO_PKG_VERSION"),
                "params": params,
                "unit_skeleton": a.gamma.is_none(),
                "counts": counts,
                "segment_count": set.segment_count(),
                "length": union_length(&set).to_string(),
                "segments": export::segments_json(&set),
            });
            if let Some(t) = &tour {
                doc["tour_length"] = json!(t.length()?.to_string());
                doc["tour"] = export::tour_json(t);
            }
            let mut s = serde_json::to_string_pretty(&doc).expect("json serialization cannot fail");
            s.push('\n');
            s
        }
    };
    emit(a.out.as_ref(), &text)?;
    Ok(Outcome::Pass)
}

fn joining_name(j: Joining) -> &'static str {
    match j {
        Joining::Literal => "literal",
        Joining::Bridged => "bridged",
    }
}

fn enclosure_lines(label: &str, b: &BoundedReal) -> String {
    format!(
        "{label} = [{}, {}]\n{label} approx = [{}, {}]\n",
        b.lo(),
        b.hi(),
        to_decimal(b.lo(), 12),
        export::decimal_ceil(b.hi(), 12)
    )
}

fn cmd_params(a: ParamsArgs) -> CmdResult {
    MeasureParams::new(a.delta.clone(), a.d)?;
    if a.d < 2 {
        return Err(usage("the cascade needs --d 2 or more"));
    }
    let prec = Precision::new(a.prec);
    let policy = Refinement::up_to(prec);
    let mut text = format!("delta = {}\nd = {}\n", a.delta, a.d);
    let n1 = match a.n1 {
        Some(n1) => n1,
        None => match smallest_strict_n1(&a.delta, a.d, policy)? {
            Some(n1) => n1,
            None => {
                text.push_str("n1 = not found\n");
                let (lhs, ln3) = strict_inequality(&a.delta, a.d, prec)?;
                text.push_str(&enclosure_lines("strict lhs", &lhs));
                text.push_str(&enclosure_lines("ln 3", &ln3));
                emit(None, &text)?;
                return Ok(Outcome::Pass);
            }
        },
    };
    text.push_str(&format!("n1 = {n1}\n"));
    let validity = validate_schedule(&a.delta, a.d, n1, policy)?;
    let strict = CascadeParams::strict(a.delta.clone(), a.d, n1).ok();
    match &strict {
        Some(p) => text.push_str(&format!("k1 = {}\n", p.k1())),
        None => text.push_str("k1 = none\n"),
    }
    text.push_str(&format!("validity = {}\n", validity.label()));
    match &validity {
        Validity::ToyOnly(why) | Validity::Invalid(why) => {
            text.push_str(&format!("reason = {why}\n"))
        }
        Validity::StrictValid => {}
    }
    let (lhs, ln3) = strict_inequality(&a.delta, a.d, prec)?;
    text.push_str(&enclosure_lines("strict lhs", &lhs));
    text.push_str(&enclosure_lines("ln 3", &ln3));
    match (&strict, &validity) {
        (Some(p), Validity::StrictValid) => {
            text.push_str(&enclosure_lines(
                "length bound",
                &length_bound(p, Horizon::Infinity, prec)?,
            ));
        }
        _ => text.push_str("length bound = unavailable (parameters are not strictly valid)\n"),
    }
    // the mass bound depends on (delta, d, n1) only
    let mass_params = match strict {
        Some(p) => p,
        None => CascadeParams::toy(a.delta.clone(), a.d, n1, 1)?,
    };
    match measure_bound(&mass_params, Horizon::Infinity, prec) {
        Ok(b) => text.push_str(&enclosure_lines("mass bound", &b)),
        Err(Error::Precision(why)) => text.push_str(&format!("mass bound = unavailable ({why})\n")),
        Err(e) => return Err(e.into()),
    }
    emit(None, &text)?;
    Ok(Outcome::Pass)
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let suites: Vec<Suite> = if a.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![a.suite.parse().map_err(|_| {
            usage(format!(
                "unknown suite `{}`; expected one of doubling, oracle, tails, gamma, cascade, tour, all",
                a.suite
            ))
        })?]
    };
    let mut cfg = VerifyConfig::new(a.delta, a.d);
    cfg.n1 = a.n1;
    cfg.levels = a.levels;
    cfg.max_level = a.max_level;
    cfg.policy = Refinement::up_to(Precision::new(a.prec));
    cfg.toy_n1 = a.toy_n1;
    cfg.toy_k1 = a.toy_k1;
    cfg.toy_levels = a.toy_levels;
    cfg.cap = a.cap;
    let report = verify(&suites, &a.suite, &cfg)?;
    let mut json = report.to_json();
    json.push('\n');
    emit(a.out.as_ref(), &json)?;
    Ok(report.outcome())
}
