//! Planar primitives: points, axis-aligned squares and segment clipping.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Point at parameter `t` on the segment `self -> other`.
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point {
            x: self.x + (other.x - self.x) * t,
            y: self.y + (other.y - self.y) * t,
        }
    }

    pub fn midpoint(self, other: Point) -> Point {
        self.lerp(other, 0.5)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Closed axis-aligned rectangle `[min.x, max.x] × [min.y, max.y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Rect { min, max }
    }

    pub fn square(origin: Point, side: f64) -> Self {
        Rect {
            min: origin,
            max: Point::new(origin.x + side, origin.y + side),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point {
        self.min.midpoint(self.max)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Largest distance from `p` to any point of the rectangle. The farthest
    /// point of a convex polygon is always one of its vertices.
    pub fn farthest_distance(&self, p: Point) -> f64 {
        self.corners()
            .iter()
            .map(|c| c.distance(p))
            .fold(0.0, f64::max)
    }

    /// Parameter interval `[t0, t1] ⊆ [0, 1]` of the closed segment `a -> b`
    /// that lies inside the closed rectangle (slab method), or `None` when the
    /// segment misses it.
    pub fn clip_segment(&self, a: Point, b: Point) -> Option<(f64, f64)> {
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        let slabs = [
            (a.x, b.x - a.x, self.min.x, self.max.x),
            (a.y, b.y - a.y, self.min.y, self.max.y),
        ];
        for (origin, dir, lo, hi) in slabs {
            if dir == 0.0 {
                if origin < lo || origin > hi {
                    return None;
                }
                continue;
            }
            let mut ta = (lo - origin) / dir;
            let mut tb = (hi - origin) / dir;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }

    pub fn intersects_segment(&self, a: Point, b: Point) -> bool {
        self.clip_segment(a, b).is_some()
    }
}

/// Euclidean length of a polyline.
pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_segment_crosses_square() {
        let cell = Rect::new(Point::new(0.5, 0.5), Point::new(1.5, 1.5));
        assert!(cell.intersects_segment(Point::new(0.0, 0.0), Point::new(2.0, 2.0)));
        let (t0, t1) = cell
            .clip_segment(Point::new(0.0, 0.0), Point::new(2.0, 2.0))
            .unwrap();
        assert!((t0 - 0.25).abs() < 1e-12 && (t1 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn disjoint_segment_misses() {
        let cell = Rect::new(Point::new(2.0, 0.0), Point::new(3.0, 1.0));
        assert!(!cell.intersects_segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0)));
    }

    #[test]
    fn endpoint_inside_counts() {
        let cell = Rect::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert!(cell.intersects_segment(Point::new(0.5, 0.5), Point::new(5.0, 7.0)));
        // degenerate segment
        assert!(cell.intersects_segment(Point::new(0.5, 0.5), Point::new(0.5, 0.5)));
        assert!(!cell.intersects_segment(Point::new(1.5, 0.5), Point::new(1.5, 0.5)));
    }

    #[test]
    fn touching_edge_is_covered() {
        let cell = Rect::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert!(cell.intersects_segment(Point::new(1.0, -1.0), Point::new(1.0, 2.0)));
        assert!(cell.intersects_segment(Point::new(2.0, 0.0), Point::new(0.0, 2.0)));
    }

    #[test]
    fn farthest_point_is_a_corner() {
        let cell = Rect::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        let d = cell.farthest_distance(Point::new(10.0, 0.5));
        assert!((d - (100.0f64 + 0.25).sqrt()).abs() < 1e-12);
        let d = cell.farthest_distance(cell.center());
        assert!((d - 2f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn polyline_out_and_back() {
        let pts = [Point::ORIGIN, Point::new(3.0, 4.0), Point::ORIGIN];
        assert_eq!(polyline_length(&pts), 10.0);
        assert_eq!(polyline_length(&[Point::ORIGIN, Point::ORIGIN]), 0.0);
    }
}
