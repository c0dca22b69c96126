//! Closed covering walks of connected segment sets.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::geometry::{components, Point, Segment, SegmentSet, SegmentSetBuilder, SpanTable};

/// A walk through axis-aligned steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyline {
    pub points: Vec<Point>,
}

impl Polyline {
    pub fn is_closed(&self) -> bool {
        self.points.first() == self.points.last()
    }

    pub fn steps(&self) -> impl Iterator<Item = Result<Segment>> + '_ {
        self.points
            .windows(2)
            .map(|w| Segment::between(&w[0], &w[1]))
    }

    pub fn length(&self) -> Result<Rational> {
        self.steps().map(|s| s.map(|s| s.len())).sum()
    }

    /// Union of the visited steps, canonicalized.
    pub fn trace(&self, dim: usize) -> Result<SegmentSet> {
        let mut b = SegmentSetBuilder::new(dim);
        for s in self.steps() {
            b.push(s?);
        }
        Ok(b.finish())
    }
}

/// Splits every segment at each point where another segment meets it.
pub fn planarize(set: &SegmentSet) -> SegmentSet {
    let table = SpanTable::new(set);
    let mut cuts: Vec<Vec<Rational>> = vec![Vec::new(); table.spans.len()];
    table.for_each_crossing(|i, j, ti, tj| {
        cuts[i].push(ti.clone());
        cuts[j].push(tj.clone());
    });
    let mut lines: BTreeMap<_, Vec<(Rational, Rational)>> = BTreeMap::new();
    for ((line, lo, hi), mut cut) in table.spans.iter().zip(cuts) {
        cut.retain(|t| t > *lo && t < *hi);
        cut.sort();
        cut.dedup();
        let pieces = lines.entry((*line).clone()).or_default();
        let mut start = (*lo).clone();
        for t in cut {
            pieces.push((start, t.clone()));
            start = t;
        }
        pieces.push((start, (*hi).clone()));
    }
    for pieces in lines.values_mut() {
        pieces.sort();
    }
    SegmentSet::from_lines(set.dim(), lines)
}

/// A closed walk covering the set, of length at most twice its length.
///
/// Every edge of the planarized graph is traversed twice unless all vertex
/// degrees are already even, in which case each edge is traversed once.
pub fn euler_tour(set: &SegmentSet) -> Result<Polyline> {
    if set.is_empty() {
        return Err(Error::domain("cannot tour an empty segment set"));
    }
    let comps = components(set);
    if comps.len() > 1 {
        return Err(Error::precondition(format!(
            "segment set is disconnected ({} components), e.g. one through {} and one through {}",
            comps.len(),
            fmt_point(&comps[0][0].endpoints().0),
            fmt_point(&comps[1][0].endpoints().0),
        )));
    }

    let planar = planarize(set);
    let scale = common_denominator(&planar);
    let key =
        |p: &Point| -> Vec<BigInt> { p.iter().map(|c| c.numer() * (&scale / c.denom())).collect() };
    let mut ends: Vec<(Vec<BigInt>, Vec<BigInt>)> = Vec::with_capacity(planar.segment_count());
    let mut keys: Vec<Vec<BigInt>> = Vec::with_capacity(2 * planar.segment_count());
    for seg in planar.segments() {
        let (a, b) = seg.endpoints();
        let (a, b) = (key(&a), key(&b));
        keys.push(a.clone());
        keys.push(b.clone());
        ends.push((a, b));
    }
    keys.sort_unstable();
    keys.dedup();
    let index = |k: &Vec<BigInt>| keys.binary_search(k).expect("endpoint was recorded");
    let mut degree = vec![0usize; keys.len()];
    let edges: Vec<(usize, usize)> = ends
        .iter()
        .map(|(a, b)| {
            let (u, v) = (index(a), index(b));
            degree[u] += 1;
            degree[v] += 1;
            (u, v)
        })
        .collect();
    let copies = if degree.iter().all(|d| d % 2 == 0) {
        1
    } else {
        2
    };

    // adjacency entries (neighbour, edge id), neighbours in lexicographic order
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); keys.len()];
    let mut id = 0;
    for &(u, v) in &edges {
        for _ in 0..copies {
            adj[u].push((v, id));
            adj[v].push((u, id));
            id += 1;
        }
    }
    for list in &mut adj {
        list.sort();
    }
    let mut used = vec![false; id];
    let mut next = vec![0usize; keys.len()];
    let mut stack = vec![0usize];
    let mut circuit: Vec<usize> = Vec::with_capacity(id + 1);
    while let Some(&u) = stack.last() {
        let list = &adj[u];
        while next[u] < list.len() && used[list[next[u]].1] {
            next[u] += 1;
        }
        if next[u] == list.len() {
            circuit.push(u);
            stack.pop();
        } else {
            let (v, e) = list[next[u]];
            used[e] = true;
            stack.push(v);
        }
    }
    circuit.reverse();
    let unscale = |k: &Vec<BigInt>| -> Point {
        k.iter()
            .map(|c| Rational::new(c.clone(), scale.clone()))
            .collect()
    };
    Ok(Polyline {
        points: circuit.into_iter().map(|i| unscale(&keys[i])).collect(),
    })
}

/// Least common denominator of every coordinate in the set.
fn common_denominator(set: &SegmentSet) -> BigInt {
    let mut lcm = BigInt::one();
    let mut absorb = |c: &Rational| {
        if !(&lcm % c.denom()).is_zero() {
            lcm = lcm.lcm(c.denom());
        }
    };
    for seg in set.segments() {
        seg.line.fixed.iter().for_each(&mut absorb);
        absorb(&seg.lo);
        absorb(&seg.hi);
    }
    lcm
}

fn fmt_point(p: &[Rational]) -> String {
    let coords: Vec<String> = p.iter().map(|c| c.to_string()).collect();
    format!("({})", coords.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ratio};
    use crate::geometry::{gamma_nk, skeleton, union_length, AxisBox, DEFAULT_SEGMENT_CAP};
    use crate::measure::MeasureParams;

    fn seg2(axis: usize, fixed: Rational, lo: Rational, hi: Rational) -> Segment {
        Segment::new(axis, vec![fixed], lo, hi).unwrap()
    }

    fn check_tour(set: &SegmentSet) -> Rational {
        let tour = euler_tour(set).unwrap();
        assert!(tour.is_closed());
        assert_eq!(tour.trace(set.dim()).unwrap(), set.canonical());
        let len = tour.length().unwrap();
        let total = union_length(set);
        assert!(total <= len && len <= &total * int(2));
        len
    }

    #[test]
    fn plus_sign_splits_in_four() {
        let plus = SegmentSet::from_segments(
            2,
            [
                seg2(0, ratio(1, 2), int(0), int(1)),
                seg2(1, ratio(1, 2), int(0), int(1)),
            ],
        );
        let p = planarize(&plus);
        assert_eq!(p.segment_count(), 4);
        assert_eq!(union_length(&p), int(2));
        assert_eq!(p.canonical(), plus);
    }

    #[test]
    fn square_is_unchanged() {
        let sq = skeleton(&AxisBox::unit(2).unwrap());
        assert_eq!(planarize(&sq), sq);
        assert_eq!(check_tour(&sq), int(4));
    }

    #[test]
    fn grid_planarizes_to_24_pieces() {
        let params = MeasureParams::new(ratio(1, 5), 2).unwrap();
        let grid = gamma_nk(&params, 1, 1, DEFAULT_SEGMENT_CAP)
            .unwrap()
            .segments;
        let p = planarize(&grid);
        assert_eq!(p.segment_count(), 24);
        assert_eq!(planarize(&p), p);
        check_tour(&grid);
    }

    #[test]
    fn tee_needs_doubling() {
        let tee = SegmentSet::from_segments(
            2,
            [
                seg2(0, int(1), int(0), int(1)),
                seg2(1, ratio(1, 2), int(0), int(1)),
            ],
        );
        assert_eq!(check_tour(&tee), int(4));
    }

    #[test]
    fn tour_is_deterministic_and_starts_at_least_vertex() {
        let sq = skeleton(&AxisBox::unit(2).unwrap());
        let a = euler_tour(&sq).unwrap();
        assert_eq!(a, euler_tour(&sq).unwrap());
        assert_eq!(a.points[0], vec![int(0), int(0)]);
        assert_eq!(a.points[1], vec![int(0), int(1)]);
    }

    #[test]
    fn disconnected_input_names_two_components() {
        let sq = skeleton(&AxisBox::unit(2).unwrap());
        let far = sq.affine(&[int(3), int(0)], &int(1));
        let err = euler_tour(&sq.union(&far)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let msg = err.to_string();
        assert!(msg.contains("(0, 0)") && msg.contains("(3, 0)"), "{msg}");
        assert!(euler_tour(&SegmentSet::empty(2)).is_err());
    }

    #[test]
    fn gamma_tours() {
        let params = MeasureParams::new(ratio(1, 5), 2).unwrap();
        for (n, k) in [(1, 0), (2, 1), (3, 1), (3, 2)] {
            let g = gamma_nk(&params, n, k, DEFAULT_SEGMENT_CAP).unwrap();
            check_tour(&g.segments);
        }
    }

    #[test]
    fn cube_skeleton_tour() {
        let cube = skeleton(&AxisBox::unit(3).unwrap());
        assert_eq!(check_tour(&cube), int(24));
    }
}
