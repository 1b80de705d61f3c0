//! Planar primitives used by every swing metric.
//!
//! Coordinates follow the image convention: `+x` to the right, `+y` downward.
//! All angles leave this module in degrees.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn sub(self, other: Point2) -> (f64, f64) {
        (self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("angle is undefined: one of its rays has zero length")]
    DegenerateAngle,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
}

/// Interior angle at `b` between the rays `b→a` and `b→c`, in `[0, 180]`.
///
/// Uses `atan2(|cross|, dot)` which stays accurate near 0° and 180° where an
/// arccos formulation loses precision. Swapping `a` and `c` only flips the
/// sign of the cross product, so the result is exactly symmetric.
pub fn vertex_angle(a: Point2, b: Point2, c: Point2) -> Result<f64, GeometryError> {
    let (ux, uy) = a.sub(b);
    let (vx, vy) = c.sub(b);
    if (ux == 0.0 && uy == 0.0) || (vx == 0.0 && vy == 0.0) {
        return Err(GeometryError::DegenerateAngle);
    }
    let cross = ux * vy - uy * vx;
    let dot = ux * vx + uy * vy;
    Ok(cross.abs().atan2(dot).to_degrees())
}

/// Signed inclination of the line through `p` and `q` against the horizontal,
/// in `(-90, 90]`.
///
/// With `p` placed on the `+x` (target) side of `q`, the angle is positive
/// when `p` is higher in the world (smaller image `y`). Mirroring the inputs
/// across a vertical axis negates the result. A vertical segment reports `90`.
pub fn angle_from_horizontal(p: Point2, q: Point2) -> Result<f64, GeometryError> {
    let run = p.x - q.x;
    let rise = q.y - p.y;
    signed_inclination(rise, run)
}

/// Signed lean of the line through `p` and `q` away from the vertical, in
/// `(-90, 90]`.
///
/// Positive when the upper endpoint sits on the `+x` (target) side of the
/// lower one. The result does not depend on argument order. A horizontal
/// segment reports `90`.
pub fn angle_from_vertical(p: Point2, q: Point2) -> Result<f64, GeometryError> {
    let lateral = p.x - q.x;
    let drop = q.y - p.y;
    signed_inclination(lateral, drop)
}

// atan(num / den) folded into (-90, 90]
fn signed_inclination(num: f64, den: f64) -> Result<f64, GeometryError> {
    if num == 0.0 && den == 0.0 {
        return Err(GeometryError::DegenerateSegment);
    }
    if den == 0.0 {
        return Ok(90.0);
    }
    let deg = (num / den).atan().to_degrees();
    Ok(if deg <= -90.0 { 90.0 } else { deg })
}

pub fn midpoint(p: Point2, q: Point2) -> Point2 {
    Point2::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y))
}

pub fn distance(p: Point2, q: Point2) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    // law of cosines, independent of the atan2 route
    fn cosine_law_angle(a: Point2, b: Point2, c: Point2) -> f64 {
        let ab = distance(a, b);
        let cb = distance(c, b);
        let ac = distance(a, c);
        let cos = ((ab * ab + cb * cb - ac * ac) / (2.0 * ab * cb)).clamp(-1.0, 1.0);
        cos.acos().to_degrees()
    }

    #[test]
    fn vertex_angle_examples() {
        assert!((vertex_angle(pt(0.0, 1.0), pt(0.0, 0.0), pt(1.0, 0.0)).unwrap() - 90.0).abs() < 1e-12);
        assert!((vertex_angle(pt(-1.0, 0.0), pt(0.0, 0.0), pt(1.0, 0.0)).unwrap() - 180.0).abs() < 1e-12);
        let expected = cosine_law_angle(pt(1.0, 0.0), pt(0.0, 0.0), pt(1.0, 1.0));
        assert!((expected - 45.0).abs() < 1e-9);
        let got = vertex_angle(pt(1.0, 0.0), pt(0.0, 0.0), pt(1.0, 1.0)).unwrap();
        assert!((got - expected).abs() < 1e-9);
    }

    #[test]
    fn vertex_angle_degenerate() {
        assert_eq!(
            vertex_angle(pt(0.0, 0.0), pt(0.0, 0.0), pt(1.0, 0.0)),
            Err(GeometryError::DegenerateAngle)
        );
        assert_eq!(
            vertex_angle(pt(1.0, 0.0), pt(2.0, 2.0), pt(2.0, 2.0)),
            Err(GeometryError::DegenerateAngle)
        );
    }

    #[test]
    fn horizontal_examples() {
        assert_eq!(angle_from_horizontal(pt(0.0, 0.0), pt(1.0, 0.0)).unwrap(), 0.0);
        // rise/run = (-1 - 0) / (0 - 1) = 1
        let a = angle_from_horizontal(pt(0.0, 0.0), pt(1.0, -1.0)).unwrap();
        assert!((a - 45.0).abs() < 1e-12);
        // lead side higher gives a positive tilt
        let lead_high = angle_from_horizontal(pt(1.0, 0.0), pt(0.0, 1.0)).unwrap();
        assert!((lead_high - 45.0).abs() < 1e-12);
        assert_eq!(
            angle_from_horizontal(pt(2.0, 3.0), pt(2.0, 3.0)),
            Err(GeometryError::DegenerateSegment)
        );
        assert_eq!(angle_from_horizontal(pt(0.0, 0.0), pt(0.0, 1.0)).unwrap(), 90.0);
        assert_eq!(angle_from_horizontal(pt(0.0, 1.0), pt(0.0, 0.0)).unwrap(), 90.0);
    }

    #[test]
    fn vertical_examples() {
        assert_eq!(angle_from_vertical(pt(0.0, 1.0), pt(0.0, 0.0)).unwrap(), 0.0);
        let a = angle_from_vertical(pt(0.0, 1.0), pt(1.0, 0.0)).unwrap();
        assert!((a.abs() - 45.0).abs() < 1e-12);
        assert!(a > 0.0, "upper endpoint toward +x leans positive");
        assert_eq!(angle_from_vertical(pt(1.0, 0.0), pt(0.0, 1.0)).unwrap(), a);
        assert_eq!(
            angle_from_vertical(pt(0.5, 0.5), pt(0.5, 0.5)),
            Err(GeometryError::DegenerateSegment)
        );
    }

    #[test]
    fn midpoint_and_distance() {
        assert_eq!(midpoint(pt(0.0, 0.0), pt(2.0, 2.0)), pt(1.0, 1.0));
        assert_eq!(distance(pt(0.0, 0.0), pt(3.0, 4.0)), 5.0);
        assert_eq!(distance(pt(1.5, -2.0), pt(1.5, -2.0)), 0.0);
    }

    fn coord() -> impl Strategy<Value = f64> {
        -10.0f64..10.0
    }

    fn point() -> impl Strategy<Value = Point2> {
        (coord(), coord()).prop_map(|(x, y)| Point2::new(x, y))
    }

    proptest! {
        #[test]
        fn vertex_angle_is_symmetric(a in point(), b in point(), c in point()) {
            prop_assume!(distance(a, b) > 1e-6 && distance(c, b) > 1e-6);
            prop_assert_eq!(vertex_angle(a, b, c).unwrap(), vertex_angle(c, b, a).unwrap());
        }

        #[test]
        fn angles_invariant_under_similarity(
            a in point(), b in point(), c in point(),
            scale in 0.1f64..20.0, dx in coord(), dy in coord(),
        ) {
            prop_assume!(distance(a, b) > 1e-3 && distance(c, b) > 1e-3 && distance(a, c) > 1e-3);
            let t = |p: Point2| Point2::new(p.x * scale + dx, p.y * scale + dy);
            let v0 = vertex_angle(a, b, c).unwrap();
            let v1 = vertex_angle(t(a), t(b), t(c)).unwrap();
            prop_assert!((v0 - v1).abs() < 1e-9);
            let h0 = angle_from_horizontal(a, c).unwrap();
            let h1 = angle_from_horizontal(t(a), t(c)).unwrap();
            prop_assert!((h0 - h1).abs() < 1e-9 || (h0.abs() - 90.0).abs() < 1e-6);
            let w0 = angle_from_vertical(a, c).unwrap();
            let w1 = angle_from_vertical(t(a), t(c)).unwrap();
            prop_assert!((w0 - w1).abs() < 1e-9 || (w0.abs() - 90.0).abs() < 1e-6);
        }

        #[test]
        fn distance_obeys_triangle_inequality(a in point(), b in point(), c in point()) {
            prop_assert_eq!(distance(a, b), distance(b, a));
            prop_assert!(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12);
        }

        #[test]
        fn inclinations_stay_in_range(a in point(), c in point()) {
            prop_assume!(distance(a, c) > 0.0);
            let h = angle_from_horizontal(a, c).unwrap();
            let v = angle_from_vertical(a, c).unwrap();
            prop_assert!(h > -90.0 && h <= 90.0);
            prop_assert!(v > -90.0 && v <= 90.0);
        }
    }
}
