//! One certified inequality between an exact rational and an enclosure.

use crate::arith::{
    certify_leq, certify_refining, BoundedReal, Precision, Rational, Refinement, Verdict,
};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `lhs <= bound`
    AtMost,
    /// `lhs >= bound`
    AtLeast,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundCheck {
    pub name: String,
    /// Human-readable statement of the inequality being checked.
    pub anchor: String,
    pub lhs: Rational,
    pub relation: Relation,
    pub bound: BoundedReal,
    pub verdict: Verdict,
    pub precision: Precision,
}

impl BoundCheck {
    /// Certifies `lhs <= bound(p)`, refining `p` per `policy`.
    pub fn at_most<F>(
        name: impl Into<String>,
        anchor: impl Into<String>,
        lhs: Rational,
        policy: Refinement,
        mut bound: F,
    ) -> Result<Self>
    where
        F: FnMut(Precision) -> Result<BoundedReal>,
    {
        let exact = BoundedReal::exact(lhs.clone());
        let out = certify_refining(policy, |p| Ok((exact.clone(), bound(p)?)))?;
        Ok(BoundCheck {
            name: name.into(),
            anchor: anchor.into(),
            lhs,
            relation: Relation::AtMost,
            bound: out.rhs,
            verdict: out.verdict,
            precision: out.precision,
        })
    }

    /// Certifies `lhs >= bound(p)`, refining `p` per `policy`.
    pub fn at_least<F>(
        name: impl Into<String>,
        anchor: impl Into<String>,
        lhs: Rational,
        policy: Refinement,
        mut bound: F,
    ) -> Result<Self>
    where
        F: FnMut(Precision) -> Result<BoundedReal>,
    {
        let exact = BoundedReal::exact(lhs.clone());
        let out = certify_refining(policy, |p| Ok((bound(p)?, exact.clone())))?;
        Ok(BoundCheck {
            name: name.into(),
            anchor: anchor.into(),
            lhs,
            relation: Relation::AtLeast,
            bound: out.lhs,
            verdict: out.verdict,
            precision: out.precision,
        })
    }

    /// Exact comparison against a rational bound.
    pub fn exact(
        name: impl Into<String>,
        anchor: impl Into<String>,
        lhs: Rational,
        relation: Relation,
        bound: Rational,
    ) -> Self {
        let b = BoundedReal::exact(bound);
        let l = BoundedReal::exact(lhs.clone());
        let verdict = match relation {
            Relation::AtMost => certify_leq(&l, &b),
            Relation::AtLeast => certify_leq(&b, &l),
        };
        BoundCheck {
            name: name.into(),
            anchor: anchor.into(),
            lhs,
            relation,
            bound: b,
            verdict,
            precision: Precision::new(1),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::True
    }
}
