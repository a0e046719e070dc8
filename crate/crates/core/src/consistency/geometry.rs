//! Planar convex polygons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

const EPS: f64 = 1e-12;

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

/// Convex polygon with counter-clockwise vertices and positive area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl TryFrom<Vec<Point>> for ConvexPolygon {
    type Error = Error;

    fn try_from(v: Vec<Point>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ConvexPolygon> for Vec<Point> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

impl ConvexPolygon {
    /// Validates convexity and area; clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegeneratePolygon(format!("{} vertices", vertices.len())));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::DegeneratePolygon("non-finite coordinate".into()));
        }
        let area = signed_area(&vertices);
        if area.abs() <= EPS {
            return Err(Error::DegeneratePolygon("zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            if cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) < -EPS {
                return Err(Error::DegeneratePolygon("not convex".into()));
            }
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    /// Axis-aligned square of side `side` centred on `c`.
    pub fn square(c: Point, side: f64) -> Result<Self> {
        let h = side / 2.0;
        Self::rect(c[0] - h, c[1] - h, c[0] + h, c[1] + h)
    }

    /// Circular sector with apex at the origin, facing +x, approximated by
    /// `segments` arc points (a regular polygon when the sector is full).
    pub fn sector(range: f64, half_angle: f64, segments: usize) -> Result<Self> {
        let segments = segments.max(2);
        if half_angle >= std::f64::consts::PI {
            let pts = (0..segments.max(3))
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / segments.max(3) as f64;
                    [range * a.cos(), range * a.sin()]
                })
                .collect();
            return Self::new(pts);
        }
        if half_angle > std::f64::consts::FRAC_PI_2 {
            return Err(Error::DegeneratePolygon("sector wider than 180 degrees is not convex".into()));
        }
        let mut pts = vec![[0.0, 0.0]];
        pts.extend((0..=segments).map(|k| {
            let a = -half_angle + 2.0 * half_angle * k as f64 / segments as f64;
            [range * a.cos(), range * a.sin()]
        }));
        Self::new(pts)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let v = &self.vertices;
        let n = v.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let w = a[0] * b[1] - b[0] * a[1];
            cx += (a[0] + b[0]) * w;
            cy += (a[1] + b[1]) * w;
        }
        let a6 = 6.0 * self.area();
        [cx / a6, cy / a6]
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut best = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                best = best.max(distance(v[i], v[j]));
            }
        }
        best
    }

    /// Point-in-polygon, boundary inclusive.
    pub fn contains(&self, p: Point) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= -1e-9)
    }

    /// Area of the intersection with `other` (Sutherland–Hodgman clipping).
    pub fn intersection_area(&self, other: &ConvexPolygon) -> f64 {
        let mut out: Vec<Point> = self.vertices.clone();
        let clip = &other.vertices;
        let m = clip.len();
        for i in 0..m {
            if out.is_empty() {
                return 0.0;
            }
            let (a, b) = (clip[i], clip[(i + 1) % m]);
            let input = std::mem::take(&mut out);
            let k = input.len();
            for j in 0..k {
                let (p, q) = (input[j], input[(j + 1) % k]);
                let (dp, dq) = (cross(a, b, p), cross(a, b, q));
                if dp >= 0.0 {
                    out.push(p);
                }
                if (dp >= 0.0) != (dq >= 0.0) {
                    let t = dp / (dp - dq);
                    out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                }
            }
        }
        if out.len() < 3 {
            0.0
        } else {
            signed_area(&out).abs()
        }
    }

    pub fn intersects(&self, other: &ConvexPolygon) -> bool {
        self.intersection_area(other) > 1e-9
    }

    pub fn iou(&self, other: &ConvexPolygon) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    /// Rigid transform: rotate by `heading` radians, then translate.
    pub fn transformed(&self, translation: Point, heading: f64) -> Self {
        let (s, c) = heading.sin_cos();
        let vertices = self
            .vertices
            .iter()
            .map(|p| [c * p[0] - s * p[1] + translation[0], s * p[0] + c * p[1] + translation[1]])
            .collect();
        Self { vertices }
    }
}
