//! Serialization of segment sets and tours: JSON, SVG and CSV.

use serde_json::{json, Value};

use doubling_core::arith::{int, to_decimal, Rational};
use doubling_core::geometry::SegmentSet;
use doubling_core::traverse::Polyline;

const VIEWPORT: i64 = 1000;
const DECIMALS: usize = 10;

/// `{axis, fixed: [...], span: [lo, hi]}` with fraction strings.
pub fn segments_json(set: &SegmentSet) -> Value {
    Value::Array(
        set.segments()
            .map(|s| {
                json!({
                    "axis": s.axis(),
                    "fixed": s.line.fixed.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                    "span": [s.lo.to_string(), s.hi.to_string()],
                })
            })
            .collect(),
    )
}

pub fn tour_json(tour: &Polyline) -> Value {
    Value::Array(
        tour.points
            .iter()
            .map(|p| Value::Array(p.iter().map(|c| Value::String(c.to_string())).collect()))
            .collect(),
    )
}

/// Decimal rendering rounded up, so `[floor, ceil]` brackets the value.
pub fn decimal_ceil(x: &Rational, digits: usize) -> String {
    let s = to_decimal(&-x, digits);
    match s.strip_prefix('-') {
        Some(pos) => pos.to_string(),
        None if s.chars().all(|c| c == '0' || c == '.') => s,
        None => format!("-{s}"),
    }
}

/// One `x,y[,z...]` row per tour vertex.
pub fn tour_csv(tour: &Polyline, approx: bool) -> String {
    let mut out = String::new();
    if approx {
        out.push_str("# approx\n");
    }
    for p in &tour.points {
        let row: Vec<String> = p
            .iter()
            .map(|c| {
                if approx {
                    to_decimal(c, DECIMALS)
                } else {
                    c.to_string()
                }
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Stroke width in viewport units for a finest side length of `3^-level`.
pub fn stroke_width(level: u32, scale: &Rational) -> Rational {
    let w = scale * int(VIEWPORT / 2) * doubling_core::arith::third_pow(level);
    let floor = Rational::new(1.into(), 4.into());
    if w < floor {
        floor
    } else {
        w
    }
}

/// Planar rendering of `[0,1]^2` onto a 1000-unit viewport, `y` pointing up.
/// One `<path>` per canonical segment, in canonical order.
pub fn svg(set: &SegmentSet, finest_level: u32, stroke_scale: &Rational) -> String {
    let view = int(VIEWPORT);
    let x = |c: &Rational| to_decimal(&(c * &view), 4);
    let y = |c: &Rational| to_decimal(&(&view - c * &view), 4);
    let width = stroke_width(finest_level, stroke_scale);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {VIEWPORT} {VIEWPORT}\" width=\"{VIEWPORT}\" height=\"{VIEWPORT}\">\n"
    ));
    out.push_str("<desc>approx: coordinates are decimal renderings of exact fractions</desc>\n");
    out.push_str(&format!(
        "<g fill=\"none\" stroke=\"black\" stroke-width=\"{}\" stroke-linecap=\"square\">\n",
        to_decimal(&width, 4)
    ));
    for s in set.segments() {
        let (a, b) = s.endpoints();
        out.push_str(&format!(
            "<path d=\"M {} {} L {} {}\"/>\n",
            x(&a[0]),
            y(&a[1]),
            x(&b[0]),
            y(&b[1])
        ));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use doubling_core::arith::ratio;
    use doubling_core::geometry::{skeleton, AxisBox};

    #[test]
    fn ceil_brackets_floor() {
        assert_eq!(decimal_ceil(&ratio(1, 3), 3), "0.334");
        assert_eq!(decimal_ceil(&ratio(-1, 3), 3), "-0.333");
        assert_eq!(decimal_ceil(&ratio(1, 2), 3), "0.500");
        assert_eq!(decimal_ceil(&int(0), 2), "0.00");
    }

    #[test]
    fn stroke_is_clamped() {
        assert_eq!(stroke_width(0, &int(1)), int(500));
        assert_eq!(stroke_width(12, &int(1)), ratio(1, 4));
    }

    #[test]
    fn square_svg_has_four_paths() {
        let sq = skeleton(&AxisBox::unit(2).unwrap());
        let doc = svg(&sq, 0, &int(1));
        assert_eq!(doc.matches("<path").count(), 4);
        assert!(doc.contains("M 0.0000 1000.0000 L 1000.0000 1000.0000"));
    }
}
