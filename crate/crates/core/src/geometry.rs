//! Points and straight segments in 2D or 3D.
//!
//! A [`Point`] always stores three coordinates; 2D points keep `z == 0` and
//! carry their dimension so that mixing 2D and 3D data can be detected.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{CcoError, Result};

#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    xyz: [f64; 3],
    dim: u8,
}

impl Point {
    pub fn new2(x: f64, y: f64) -> Self {
        Point {
            xyz: [x, y, 0.0],
            dim: 2,
        }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Point {
            xyz: [x, y, z],
            dim: 3,
        }
    }

    /// Builds a point from 2 or 3 finite coordinates.
    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CcoError::Usage(format!("non-finite coordinate in {coords:?}")));
        }
        match *coords {
            [x, y] => Ok(Point::new2(x, y)),
            [x, y, z] => Ok(Point::new3(x, y, z)),
            _ => Err(CcoError::Usage(format!(
                "a point needs 2 or 3 coordinates, got {}",
                coords.len()
            ))),
        }
    }

    /// Origin of the given dimension.
    pub fn zero(dim: usize) -> Self {
        Point {
            xyz: [0.0; 3],
            dim: dim as u8,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// The `dim` meaningful coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.xyz[..self.dim as usize]
    }

    /// All three stored coordinates (`z == 0` in 2D).
    pub fn xyz(&self) -> [f64; 3] {
        self.xyz
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.xyz[0] * other.xyz[0] + self.xyz[1] * other.xyz[1] + self.xyz[2] * other.xyz[2]
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.xyz.iter().all(|c| c.is_finite())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point {
            xyz: [
                self.xyz[0] + rhs.xyz[0],
                self.xyz[1] + rhs.xyz[1],
                self.xyz[2] + rhs.xyz[2],
            ],
            dim: self.dim.max(rhs.dim),
        }
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point {
            xyz: [
                self.xyz[0] - rhs.xyz[0],
                self.xyz[1] - rhs.xyz[1],
                self.xyz[2] - rhs.xyz[2],
            ],
            dim: self.dim.max(rhs.dim),
        }
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point {
            xyz: [self.xyz[0] * s, self.xyz[1] * s, self.xyz[2] * s],
            dim: self.dim,
        }
    }
}

/// A straight vessel segment, optionally with its radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentGeometry {
    pub proximal: Point,
    pub distal: Point,
    pub radius: Option<f64>,
}

impl SegmentGeometry {
    pub fn new(proximal: Point, distal: Point) -> Self {
        SegmentGeometry {
            proximal,
            distal,
            radius: None,
        }
    }

    pub fn with_radius(proximal: Point, distal: Point, radius: f64) -> Self {
        SegmentGeometry {
            proximal,
            distal,
            radius: Some(radius),
        }
    }

    pub fn length(&self) -> f64 {
        self.proximal.distance(&self.distal)
    }

    pub fn distance_to_point(&self, p: &Point) -> f64 {
        point_segment_distance(p, &self.proximal, &self.distal)
    }

    pub fn distance_to_segment(&self, other: &SegmentGeometry) -> f64 {
        segment_segment_distance(&self.proximal, &self.distal, &other.proximal, &other.distal)
    }

    /// Axis-aligned bounding box `(min, max)` of the axis.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let a = self.proximal.xyz();
        let b = self.distal.xyz();
        (
            [a[0].min(b[0]), a[1].min(b[1]), a[2].min(b[2])],
            [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])],
        )
    }
}

/// Exact Euclidean distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = *b - *a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = ((*p - *a).dot(&ab) / len_sq).clamp(0.0, 1.0);
    p.distance(&(*a + ab * t))
}

/// Exact distance between the closed segments `[p1, q1]` and `[p2, q2]`.
///
/// Closest-point computation on the two parametric lines with clamping,
/// handling parallel and degenerate inputs.
pub fn segment_segment_distance(p1: &Point, q1: &Point, p2: &Point, q2: &Point) -> f64 {
    let d1 = *q1 - *p1;
    let d2 = *q2 - *p2;
    let r = *p1 - *p2;
    let a = d1.norm_sq();
    let e = d2.norm_sq();
    let f = d2.dot(&r);
    let eps = f64::EPSILON;

    let (s, t);
    if a <= eps && e <= eps {
        return p1.distance(p2);
    }
    if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= eps {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > eps * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let c1 = *p1 + d1 * s;
    let c2 = *p2 + d2 * t;
    c1.distance(&c2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_to_segment_cases() {
        let a = Point::new2(0.0, 0.0);
        let b = Point::new2(1.0, 0.0);
        assert_eq!(point_segment_distance(&Point::new2(0.5, 0.3), &a, &b), 0.3);
        assert_eq!(point_segment_distance(&Point::new2(-3.0, 4.0), &a, &b), 5.0);
        assert_eq!(point_segment_distance(&Point::new2(4.0, 4.0), &a, &b), 5.0);
        assert_eq!(point_segment_distance(&Point::new2(4.0, 4.0), &a, &a), 32f64.sqrt());
    }

    #[test]
    fn segment_pairs() {
        let o = Point::new3(0.0, 0.0, 0.0);
        let x = Point::new3(1.0, 0.0, 0.0);
        // skew lines, closest points interior
        let p = Point::new3(0.5, -1.0, 2.0);
        let q = Point::new3(0.5, 1.0, 2.0);
        assert!((segment_segment_distance(&o, &x, &p, &q) - 2.0).abs() < 1e-15);
        // parallel, overlapping
        let p = Point::new3(0.2, 0.5, 0.0);
        let q = Point::new3(2.0, 0.5, 0.0);
        assert!((segment_segment_distance(&o, &x, &p, &q) - 0.5).abs() < 1e-15);
        // parallel, disjoint along the axis
        let p = Point::new3(4.0, 4.0, 0.0);
        let q = Point::new3(5.0, 4.0, 0.0);
        assert!((segment_segment_distance(&o, &x, &p, &q) - 5.0).abs() < 1e-15);
        // crossing
        let p = Point::new3(0.5, -1.0, 0.0);
        let q = Point::new3(0.5, 1.0, 0.0);
        assert_eq!(segment_segment_distance(&o, &x, &p, &q), 0.0);
    }

    fn brute(p1: &Point, q1: &Point, p2: &Point, q2: &Point) -> f64 {
        let n = 400;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            let a = *p1 + (*q1 - *p1) * (i as f64 / n as f64);
            best = best.min(point_segment_distance(&a, p2, q2));
        }
        best
    }

    proptest::proptest! {
        #[test]
        fn segment_distance_matches_sampling(
            c in proptest::collection::vec(-1.0f64..1.0, 12)
        ) {
            let p1 = Point::new3(c[0], c[1], c[2]);
            let q1 = Point::new3(c[3], c[4], c[5]);
            let p2 = Point::new3(c[6], c[7], c[8]);
            let q2 = Point::new3(c[9], c[10], c[11]);
            let exact = segment_segment_distance(&p1, &q1, &p2, &q2);
            let sampled = brute(&p1, &q1, &p2, &q2);
            // sampling overestimates by at most half a step along the first segment
            let step = p1.distance(&q1) / 400.0;
            proptest::prop_assert!(exact <= sampled + 1e-12);
            proptest::prop_assert!(sampled - exact <= step + 1e-12);
        }
    }
}
