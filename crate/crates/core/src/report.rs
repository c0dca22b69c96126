//! Machine-readable verification reports.

use std::time::Instant;

use serde::Serialize;

use crate::arith::{BoundedReal, Rational, Verdict};
use crate::check::BoundCheck;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Undecided,
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::True => Outcome::Pass,
            Verdict::False => Outcome::Fail,
            Verdict::Undecided => Outcome::Undecided,
        }
    }
}

impl From<bool> for Outcome {
    fn from(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub lo: String,
    pub hi: String,
}

impl From<&BoundedReal> for Interval {
    fn from(b: &BoundedReal) -> Self {
        Interval {
            lo: b.lo().to_string(),
            hi: b.hi().to_string(),
        }
    }
}

/// One line of a report. `lhs` and `bound` are exact fraction strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub lhs: Option<String>,
    pub bound: Option<Interval>,
    pub verdict: Outcome,
    pub ms: u64,
}

impl CheckRecord {
    pub fn from_bound(name: impl Into<String>, check: &BoundCheck, ms: u64) -> Self {
        CheckRecord {
            name: name.into(),
            anchor: check.anchor.clone(),
            lhs: Some(check.lhs.to_string()),
            bound: Some(Interval::from(&check.bound)),
            verdict: check.verdict.into(),
            ms,
        }
    }

    /// A yes/no property with an optional exact witness value.
    pub fn flag(
        name: impl Into<String>,
        anchor: impl Into<String>,
        ok: bool,
        lhs: Option<&Rational>,
        ms: u64,
    ) -> Self {
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            lhs: lhs.map(|r| r.to_string()),
            bound: None,
            verdict: ok.into(),
            ms,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Outcome::Pass
    }
}

/// Milliseconds since `start`.
pub(crate) fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Echo of the parameters a report was produced with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParamsEcho {
    pub suite: String,
    pub delta: String,
    pub d: usize,
    pub n1: Option<u32>,
    pub k1: Option<u32>,
    pub mode: String,
    pub levels: u32,
    pub max_level: u32,
    pub prec: u32,
    pub toy_n1: u32,
    pub toy_k1: u32,
    pub toy_levels: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub version: String,
    pub params: ParamsEcho,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(params: ParamsEcho, checks: Vec<CheckRecord>) -> Self {
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            params,
            checks,
        }
    }

    /// `Fail` if any check failed, else `Undecided` if any is undecided.
    pub fn outcome(&self) -> Outcome {
        let any = |o| self.checks.iter().any(|c| c.verdict == o);
        if any(Outcome::Fail) {
            Outcome::Fail
        } else if any(Outcome::Undecided) {
            Outcome::Undecided
        } else {
            Outcome::Pass
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
