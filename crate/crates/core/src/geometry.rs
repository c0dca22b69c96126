//! Axis-aligned segment families: box skeletons, the single-scale curve
//! pieces `Gamma(n, k)`, exact one-dimensional length, and connectivity.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use crate::arith::{big, int, third_pow, BoundedReal, Precision, Rational};
use crate::error::{Error, Result};
use crate::kset::{bridged_gaps, count_k, enumerate_k, gaps, growth_bound, GapList, KSetSpec};
use crate::measure::MeasureParams;

/// Default cap on materialized cubes or gap boxes.
pub const DEFAULT_SEGMENT_CAP: u64 = 1_000_000;

pub type Point = Vec<Rational>;

/// The affine line carrying a segment: its direction and the coordinates on
/// every other axis, in axis order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    pub axis: usize,
    pub fixed: Vec<Rational>,
}

impl Line {
    /// Coordinate of this line on axis `j != self.axis`.
    pub fn coord(&self, j: usize) -> &Rational {
        debug_assert_ne!(j, self.axis);
        if j < self.axis {
            &self.fixed[j]
        } else {
            &self.fixed[j - 1]
        }
    }

    pub fn point_at(&self, t: &Rational) -> Point {
        let mut p = self.fixed.clone();
        p.insert(self.axis, t.clone());
        p
    }
}

/// Closed axis-aligned segment `{fixed} x [lo, hi]`, `lo < hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub line: Line,
    pub lo: Rational,
    pub hi: Rational,
}

impl Segment {
    pub fn new(axis: usize, fixed: Vec<Rational>, lo: Rational, hi: Rational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::domain(format!(
                "degenerate segment span [{lo}, {hi}]"
            )));
        }
        Ok(Segment {
            line: Line { axis, fixed },
            lo,
            hi,
        })
    }

    /// The segment joining two points that differ in exactly one coordinate.
    pub fn between(a: &[Rational], b: &[Rational]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::domain("points of different dimension"));
        }
        let differing: Vec<usize> = (0..a.len()).filter(|&j| a[j] != b[j]).collect();
        let [axis] = differing[..] else {
            return Err(Error::domain(
                "points must differ in exactly one coordinate",
            ));
        };
        let mut fixed = a.to_vec();
        fixed.remove(axis);
        let (lo, hi) = if a[axis] < b[axis] {
            (a[axis].clone(), b[axis].clone())
        } else {
            (b[axis].clone(), a[axis].clone())
        };
        Segment::new(axis, fixed, lo, hi)
    }

    pub fn axis(&self) -> usize {
        self.line.axis
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn endpoints(&self) -> (Point, Point) {
        (self.line.point_at(&self.lo), self.line.point_at(&self.hi))
    }
}

/// Finite union of axis-aligned segments, stored per line as sorted spans
/// with pairwise disjoint interiors.
///
/// Sets built through [`SegmentSet::from_segments`] or [`SegmentSetBuilder`]
/// are canonical: spans that overlap or touch are merged into maximal ones,
/// so two canonical sets are equal exactly when their unions are.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentSet {
    dim: usize,
    lines: BTreeMap<Line, Vec<(Rational, Rational)>>,
}

#[derive(Clone, Debug)]
pub struct SegmentSetBuilder {
    dim: usize,
    lines: HashMap<Line, Vec<(Rational, Rational)>>,
}

impl SegmentSetBuilder {
    pub fn new(dim: usize) -> Self {
        SegmentSetBuilder {
            dim,
            lines: HashMap::new(),
        }
    }

    pub fn push(&mut self, seg: Segment) {
        debug_assert_eq!(seg.line.fixed.len() + 1, self.dim);
        self.lines
            .entry(seg.line)
            .or_default()
            .push((seg.lo, seg.hi));
    }

    pub fn extend_from(&mut self, set: &SegmentSet) {
        for (line, spans) in &set.lines {
            self.lines
                .entry(line.clone())
                .or_default()
                .extend(spans.iter().cloned());
        }
    }

    pub fn finish(self) -> SegmentSet {
        let lines = self
            .lines
            .into_iter()
            .map(|(line, spans)| (line, merge_spans(spans, true)))
            .collect();
        SegmentSet {
            dim: self.dim,
            lines,
        }
    }
}

/// Sorts spans and merges overlaps; touching spans merge only if `touching`.
fn merge_spans(mut spans: Vec<(Rational, Rational)>, touching: bool) -> Vec<(Rational, Rational)> {
    spans.sort();
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(spans.len());
    for (lo, hi) in spans {
        if let Some(last) = out.last_mut() {
            let joins = if touching { lo <= last.1 } else { lo < last.1 };
            if joins {
                if hi > last.1 {
                    last.1 = hi;
                }
                continue;
            }
        }
        out.push((lo, hi));
    }
    out
}

impl SegmentSet {
    pub fn empty(dim: usize) -> Self {
        SegmentSet {
            dim,
            lines: BTreeMap::new(),
        }
    }

    pub fn from_segments(dim: usize, segments: impl IntoIterator<Item = Segment>) -> Self {
        let mut b = SegmentSetBuilder::new(dim);
        for s in segments {
            b.push(s);
        }
        b.finish()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segment_count(&self) -> usize {
        self.lines.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Segments in canonical order: by line, then by span.
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.lines.iter().flat_map(|(line, spans)| {
            spans.iter().map(move |(lo, hi)| Segment {
                line: line.clone(),
                lo: lo.clone(),
                hi: hi.clone(),
            })
        })
    }

    /// Merges touching collinear spans into maximal ones.
    pub fn canonical(&self) -> SegmentSet {
        SegmentSet {
            dim: self.dim,
            lines: self
                .lines
                .iter()
                .map(|(l, s)| (l.clone(), merge_spans(s.clone(), true)))
                .collect(),
        }
    }

    pub fn union(&self, other: &SegmentSet) -> SegmentSet {
        let mut b = SegmentSetBuilder::new(self.dim);
        b.extend_from(self);
        b.extend_from(other);
        b.finish()
    }

    /// Image under `x -> corner + side * x`.
    pub fn affine(&self, corner: &[Rational], side: &Rational) -> SegmentSet {
        let lines = self
            .lines
            .iter()
            .map(|(line, spans)| {
                let fixed = line
                    .fixed
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let j = if i < line.axis { i } else { i + 1 };
                        &corner[j] + side * c
                    })
                    .collect();
                let origin = &corner[line.axis];
                let spans = spans
                    .iter()
                    .map(|(lo, hi)| (origin + side * lo, origin + side * hi))
                    .collect();
                (
                    Line {
                        axis: line.axis,
                        fixed,
                    },
                    spans,
                )
            })
            .collect();
        SegmentSet {
            dim: self.dim,
            lines,
        }
    }

    /// Whether every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &SegmentSet) -> bool {
        let other = other.canonical();
        self.lines
            .iter()
            .all(|(line, spans)| match other.lines.get(line) {
                None => false,
                Some(cover) => spans.iter().all(|(lo, hi)| {
                    let idx = cover.partition_point(|(clo, _)| clo <= lo);
                    idx > 0 && &cover[idx - 1].1 >= hi
                }),
            })
    }

    pub(crate) fn from_lines(dim: usize, lines: BTreeMap<Line, Vec<(Rational, Rational)>>) -> Self {
        SegmentSet { dim, lines }
    }
}

/// Exact one-dimensional measure of the union.
pub fn union_length(set: &SegmentSet) -> Rational {
    set.lines
        .values()
        .flat_map(|spans| spans.iter().map(|(lo, hi)| hi - lo))
        .sum()
}

/// Closed box `prod [lo_j, hi_j]` with non-degenerate sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxisBox {
    sides: Vec<(Rational, Rational)>,
}

impl AxisBox {
    pub fn new(sides: Vec<(Rational, Rational)>) -> Result<Self> {
        if sides.len() < 2 {
            return Err(Error::domain("boxes need dimension d >= 2"));
        }
        if let Some((lo, hi)) = sides.iter().find(|(lo, hi)| lo >= hi) {
            return Err(Error::domain(format!("degenerate box side [{lo}, {hi}]")));
        }
        Ok(AxisBox { sides })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        AxisBox::new(vec![(int(0), int(1)); dim])
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    /// The `d 2^(d-1)` edges of the box.
    pub fn edges(&self) -> Vec<Segment> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d << (d - 1));
        for axis in 0..d {
            for mask in 0..(1usize << (d - 1)) {
                let fixed = (0..d)
                    .filter(|&j| j != axis)
                    .enumerate()
                    .map(|(bit, j)| {
                        let (lo, hi) = &self.sides[j];
                        if mask >> bit & 1 == 1 {
                            hi.clone()
                        } else {
                            lo.clone()
                        }
                    })
                    .collect();
                let (lo, hi) = self.sides[axis].clone();
                out.push(Segment {
                    line: Line { axis, fixed },
                    lo,
                    hi,
                });
            }
        }
        out
    }
}

/// Union of the edges of a box.
pub fn skeleton(b: &AxisBox) -> SegmentSet {
    SegmentSet::from_segments(b.dim(), b.edges())
}

/// `Gamma(n, k)` together with the number of pieces that built it.
#[derive(Clone, Debug)]
pub struct Gamma {
    pub segments: SegmentSet,
    pub cube_count: u64,
    pub gap_box_count: u64,
    pub gaps: GapList,
    pub atom_count: u64,
}

/// Calls `f` on every `d`-tuple of indices into a list of length `len`.
fn for_each_tuple(len: usize, d: usize, mut f: impl FnMut(&[usize])) {
    if len == 0 {
        return;
    }
    let mut idx = vec![0usize; d];
    loop {
        f(&idx);
        let mut j = d;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < len {
                break;
            }
            idx[j] = 0;
        }
    }
}

fn checked_power(base: u64, d: usize, what: &str, cap: u64) -> Result<u64> {
    let total = BigUint::from(base).pow(d as u32);
    match total.to_u64() {
        Some(t) if t <= cap => Ok(t),
        _ => Err(Error::resource(what.to_string(), total, cap)),
    }
}

/// Skeletons of all cubes of `K(n, k)^d` and of all `d`-fold products of
/// gaps of `K(n, k)`, as closed boxes.
pub fn gamma_nk(params: &MeasureParams, n: u32, k: u32, cap: u64) -> Result<Gamma> {
    build_gamma(params, n, k, cap, gaps)
}

/// `Gamma(n, k)` with the end intervals `[0, first)` and `[last, 1)` of the
/// complement admitted as gaps, so that the family reaches the boundary of
/// the unit cube.
pub fn gamma_bridged(params: &MeasureParams, n: u32, k: u32, cap: u64) -> Result<Gamma> {
    build_gamma(params, n, k, cap, bridged_gaps)
}

fn build_gamma(
    params: &MeasureParams,
    n: u32,
    k: u32,
    cap: u64,
    gap_family: fn(&KSetSpec, u64) -> Result<GapList>,
) -> Result<Gamma> {
    let d = params.dim();
    if d < 2 {
        return Err(Error::domain("Gamma(n, k) needs dimension d >= 2"));
    }
    let spec = KSetSpec::new(n, k, params.delta().clone());
    let atoms = count_k(&spec).to_u64().unwrap_or(u64::MAX);
    let cube_count = checked_power(atoms, d, &format!("cubes of K({n}, {k})^{d}"), cap)?;
    let gap_list = gap_family(&spec, cap)?;
    let gap_box_count = checked_power(
        gap_list.len() as u64,
        d,
        &format!("gap boxes of K({n}, {k})"),
        cap,
    )?;

    let side = third_pow(n);
    let atom_lo: Vec<Rational> = enumerate_k(&spec)
        .map(|i| Rational::from_integer(BigInt::from(i)) * &side)
        .collect();
    let mut builder = SegmentSetBuilder::new(d);
    for_each_tuple(atom_lo.len(), d, |t| {
        let sides = t
            .iter()
            .map(|&i| (atom_lo[i].clone(), &atom_lo[i] + &side))
            .collect();
        for e in (AxisBox { sides }).edges() {
            builder.push(e);
        }
    });
    for_each_tuple(gap_list.len(), d, |t| {
        let sides = t
            .iter()
            .map(|&i| (gap_list.gaps[i].lo.clone(), gap_list.gaps[i].hi.clone()))
            .collect();
        for e in (AxisBox { sides }).edges() {
            builder.push(e);
        }
    });
    Ok(Gamma {
        segments: builder.finish(),
        cube_count,
        gap_box_count,
        gaps: gap_list,
        atom_count: atoms,
    })
}

/// The exact sum bounding the length of `Gamma(n, k)` piece by piece:
/// `d 2^(d-1) 3^-n #cubes + d 2^(d-1) #gaps^(d-1) * total gap length`.
pub fn lemma24_piece_sum(d: usize, n: u32, atom_count: &BigUint, gaps: &GapList) -> Rational {
    let weight = int((d as i64) << (d - 1));
    let cubes = big(&atom_count.pow(d as u32)) * third_pow(n);
    let gap_count = BigUint::from(gaps.len()).pow(d as u32 - 1);
    &weight * cubes + &weight * big(&gap_count) * gaps.total_length()
}

/// Enclosure of `d 2^d exp(d k [1 + ln(1/delta)])`.
pub fn lemma24_bound(k: u32, d: usize, delta: &Rational, prec: Precision) -> Result<BoundedReal> {
    let growth = growth_bound(k * d as u32, delta, prec)?;
    Ok(growth.scale(&int((d as i64) << d)))
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

/// Flat view of a segment set's spans, indexed for crossing queries.
pub(crate) struct SpanTable<'a> {
    pub(crate) spans: Vec<(&'a Line, &'a Rational, &'a Rational)>,
}

impl<'a> SpanTable<'a> {
    pub(crate) fn new(set: &'a SegmentSet) -> Self {
        let spans = set
            .lines
            .iter()
            .flat_map(|(line, spans)| spans.iter().map(move |(lo, hi)| (line, lo, hi)))
            .collect();
        SpanTable { spans }
    }

    /// Calls `f(i, j, t_i, t_j)` for every pair of perpendicular spans `i`,
    /// `j` that meet, where `t_i` and `t_j` are the parameters of the meeting
    /// point along each span.
    pub(crate) fn for_each_crossing(&self, mut f: impl FnMut(usize, usize, &Rational, &Rational)) {
        let d = self.spans.first().map_or(0, |(l, _, _)| l.fixed.len() + 1);
        // plane key: (a, b, coordinates on the remaining axes); within the
        // plane, spans along b are indexed by their a-coordinate.
        type PlaneKey = (usize, usize, Vec<Rational>);
        let mut along_b: HashMap<PlaneKey, BTreeMap<Rational, Vec<usize>>> = HashMap::new();
        for (idx, (line, _, _)) in self.spans.iter().enumerate() {
            let b = line.axis;
            for a in (0..d).filter(|&a| a != b) {
                let rest = (0..d)
                    .filter(|&j| j != a && j != b)
                    .map(|j| line.coord(j).clone())
                    .collect();
                along_b
                    .entry((a, b, rest))
                    .or_default()
                    .entry(line.coord(a).clone())
                    .or_default()
                    .push(idx);
            }
        }
        for (i, (line, lo, hi)) in self.spans.iter().enumerate() {
            let a = line.axis;
            for b in (0..d).filter(|&b| b != a) {
                let rest = (0..d)
                    .filter(|&j| j != a && j != b)
                    .map(|j| line.coord(j).clone())
                    .collect();
                let Some(columns) = along_b.get(&(a, b, rest)) else {
                    continue;
                };
                let y = line.coord(b);
                for (x, members) in columns.range((*lo).clone()..=(*hi).clone()) {
                    // spans on one line are sorted and disjoint
                    let pos = members.partition_point(|&j| self.spans[j].1 <= y);
                    if pos > 0 {
                        let j = members[pos - 1];
                        if self.spans[j].2 >= y {
                            f(i, j, x, y);
                        }
                    }
                    // a neighbouring span may start exactly at y
                    if pos < members.len() {
                        let j = members[pos];
                        if self.spans[j].1 == y {
                            f(i, j, x, y);
                        }
                    }
                }
            }
        }
    }
}

/// Whether the union of the closed segments is connected.
pub fn is_connected(set: &SegmentSet) -> bool {
    components(set).len() <= 1
}

/// Connected components, each as the list of its canonical segments.
pub fn components(set: &SegmentSet) -> Vec<Vec<Segment>> {
    let canonical = set.canonical();
    let table = SpanTable::new(&canonical);
    let mut uf = UnionFind::new(table.spans.len());
    table.for_each_crossing(|i, j, _, _| {
        uf.union(i, j);
    });
    let mut groups: BTreeMap<usize, Vec<Segment>> = BTreeMap::new();
    for (i, (line, lo, hi)) in table.spans.iter().enumerate() {
        let root = uf.find(i);
        groups.entry(root).or_default().push(Segment {
            line: (*line).clone(),
            lo: (*lo).clone(),
            hi: (*hi).clone(),
        });
    }
    let mut out: Vec<Vec<Segment>> = groups.into_values().collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{certify_leq, ratio, Verdict};

    fn seg2(axis: usize, fixed: Rational, lo: Rational, hi: Rational) -> Segment {
        Segment::new(axis, vec![fixed], lo, hi).unwrap()
    }

    fn unit_square() -> SegmentSet {
        skeleton(&AxisBox::unit(2).unwrap())
    }

    fn fifth(d: usize) -> MeasureParams {
        MeasureParams::new(ratio(1, 5), d).unwrap()
    }

    #[test]
    fn skeleton_sizes() {
        let sq = unit_square();
        assert_eq!(sq.segment_count(), 4);
        assert_eq!(union_length(&sq), int(4));
        let tall = skeleton(&AxisBox::new(vec![(int(0), int(1)), (int(0), int(2))]).unwrap());
        assert_eq!(union_length(&tall), int(6));
        let cube = skeleton(&AxisBox::unit(3).unwrap());
        assert_eq!(cube.segment_count(), 12);
        assert_eq!(union_length(&cube), int(12));
        assert!(AxisBox::new(vec![(int(0), int(1))]).is_err());
        assert!(AxisBox::new(vec![(int(0), int(1)), (int(1), int(1))]).is_err());
    }

    #[test]
    fn union_length_merges() {
        let s = seg2(0, int(0), int(0), int(1));
        let twice = SegmentSet::from_segments(2, [s.clone(), s.clone()]);
        assert_eq!(union_length(&twice), int(1));
        let overlap = SegmentSet::from_segments(2, [s, seg2(0, int(0), ratio(1, 2), ratio(3, 2))]);
        assert_eq!(union_length(&overlap), ratio(3, 2));
        let half = skeleton(&AxisBox::new(vec![(int(0), int(1)), (int(0), ratio(1, 2))]).unwrap());
        assert_eq!(union_length(&unit_square().union(&half)), int(5));
    }

    #[test]
    fn segment_between_points() {
        let s = Segment::between(&[int(1), int(2)], &[int(1), int(0)]).unwrap();
        assert_eq!(s.axis(), 1);
        assert_eq!((s.lo.clone(), s.hi.clone()), (int(0), int(2)));
        assert!(Segment::between(&[int(0), int(0)], &[int(1), int(1)]).is_err());
        assert!(Segment::between(&[int(0), int(0)], &[int(0), int(0)]).is_err());
    }

    #[test]
    fn connectivity() {
        assert!(is_connected(&unit_square()));
        assert!(is_connected(&skeleton(&AxisBox::unit(3).unwrap())));
        let far = unit_square().affine(&[int(2), int(0)], &int(1));
        assert!(!is_connected(&unit_square().union(&far)));
        let touching = unit_square().affine(&[int(1), int(1)], &int(1));
        assert!(is_connected(&unit_square().union(&touching)));
        // T junction: endpoint resting on an interior point
        let t = SegmentSet::from_segments(
            2,
            [
                seg2(0, int(0), int(0), int(2)),
                seg2(1, int(1), int(0), int(1)),
            ],
        );
        assert!(is_connected(&t));
        assert!(is_connected(&SegmentSet::empty(2)));
    }

    #[test]
    fn connectivity_in_three_dimensions() {
        // two skew unit segments are disjoint; a third joins them
        let a = Segment::new(0, vec![int(0), int(0)], int(0), int(1)).unwrap();
        let b = Segment::new(1, vec![int(0), int(1)], int(0), int(1)).unwrap();
        assert!(!is_connected(&SegmentSet::from_segments(
            3,
            [a.clone(), b.clone()]
        )));
        let c = Segment::new(2, vec![int(0), int(0)], int(0), int(1)).unwrap();
        assert!(is_connected(&SegmentSet::from_segments(3, [a, b, c])));
    }

    #[test]
    fn gamma_single_cube() {
        let g = gamma_nk(&fifth(2), 1, 0, DEFAULT_SEGMENT_CAP).unwrap();
        assert_eq!(g.cube_count, 1);
        assert_eq!(g.gap_box_count, 0);
        assert_eq!(g.segments.segment_count(), 4);
        assert_eq!(union_length(&g.segments), ratio(4, 3));
    }

    #[test]
    fn gamma_two_one() {
        let g = gamma_nk(&fifth(2), 2, 1, DEFAULT_SEGMENT_CAP).unwrap();
        assert_eq!(g.cube_count, 25);
        assert_eq!(g.gap_box_count, 4);
        assert!(is_connected(&g.segments));
    }

    #[test]
    fn gamma_full_grid() {
        let g = gamma_nk(&fifth(2), 1, 1, DEFAULT_SEGMENT_CAP).unwrap();
        assert_eq!(g.cube_count, 9);
        assert_eq!(union_length(&g.segments), int(8));
        assert_eq!(g.segments.segment_count(), 8);
    }

    #[test]
    fn gamma_connected_and_below_piece_sum() {
        for delta in [ratio(1, 5), ratio(1, 4)] {
            let params = MeasureParams::new(delta, 2).unwrap();
            for n in 1..=4 {
                for k in 0..=n {
                    let g = gamma_nk(&params, n, k, DEFAULT_SEGMENT_CAP).unwrap();
                    assert!(is_connected(&g.segments), "n={n} k={k}");
                    let sum = lemma24_piece_sum(2, n, &BigUint::from(g.atom_count), &g.gaps);
                    assert!(union_length(&g.segments) <= sum, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn bridged_gamma_reaches_the_boundary() {
        let params = fifth(2);
        let g = gamma_bridged(&params, 2, 1, DEFAULT_SEGMENT_CAP).unwrap();
        assert_eq!(g.gaps.len(), 4);
        assert_eq!(g.gap_box_count, 16);
        let sq = skeleton(&AxisBox::unit(2).unwrap());
        assert!(is_connected(&g.segments.union(&sq)));
        let plain = gamma_nk(&params, 2, 1, DEFAULT_SEGMENT_CAP).unwrap();
        assert!(plain.segments.is_subset_of(&g.segments));
        assert!(!is_connected(&plain.segments.union(&sq)));
        // K(1, 1) is all of [0, 1): no complement at all
        let full = gamma_bridged(&params, 1, 1, DEFAULT_SEGMENT_CAP).unwrap();
        assert!(full.gaps.is_empty());
    }

    #[test]
    fn gamma_cap_is_enforced() {
        let err = gamma_nk(&fifth(2), 4, 4, 1000).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
        assert!(gamma_nk(&fifth(1), 2, 1, 1000).is_err());
    }

    #[test]
    fn lemma24_closed_form() {
        let p = Precision::new(64);
        assert_eq!(
            lemma24_bound(0, 2, &ratio(1, 5), p).unwrap(),
            BoundedReal::from_int(8)
        );
        let b = lemma24_bound(2, 2, &ratio(1, 5), p).unwrap();
        let g = gamma_nk(&fifth(2), 4, 2, DEFAULT_SEGMENT_CAP).unwrap();
        assert_eq!(
            certify_leq(&BoundedReal::exact(union_length(&g.segments)), &b),
            Verdict::True
        );
        // 8 e^{2(1 + ln 5)} = 200 e^2 ~ 1477.81
        let one = lemma24_bound(1, 2, &ratio(1, 5), p).unwrap();
        assert!(one.lo() > &int(1477) && one.hi() < &int(1478));
    }

    #[test]
    fn subset_and_affine() {
        let sq = unit_square();
        let small = sq.affine(&[ratio(1, 3), ratio(1, 3)], &ratio(1, 3));
        assert_eq!(union_length(&small), ratio(4, 3));
        assert!(!small.is_subset_of(&sq));
        let grid = gamma_nk(&fifth(2), 1, 1, DEFAULT_SEGMENT_CAP)
            .unwrap()
            .segments;
        assert!(small.is_subset_of(&grid));
        assert!(sq.is_subset_of(&grid));
        assert!(!grid.is_subset_of(&sq));
    }

    #[test]
    fn canonical_is_idempotent() {
        let g = gamma_nk(&fifth(2), 3, 1, DEFAULT_SEGMENT_CAP)
            .unwrap()
            .segments;
        assert_eq!(g.canonical(), g);
        assert_eq!(g.canonical().canonical(), g.canonical());
    }
}
