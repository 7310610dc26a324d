//! Intervals and convex polygons in ℝ^d, d ∈ {1, 2}.

use serde::{Deserialize, Serialize};

use crate::linalg::LinearMap;

/// A point of ℝ^d stored in two coordinates; the second is 0 when d = 1.
pub type Point = [f64; 2];

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn scale(a: Point, k: f64) -> Point {
    [a[0] * k, a[1] * k]
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm_inf(a: Point) -> f64 {
    a[0].abs().max(a[1].abs())
}

pub fn norm2(a: Point) -> f64 {
    dot(a, a).sqrt()
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: Point,
    pub hi: Point,
}

impl Aabb {
    /// The cube [−r, r]^d.
    pub fn cube(dim: usize, r: f64) -> Self {
        if dim == 1 {
            Self { lo: [-r, 0.0], hi: [r, 0.0] }
        } else {
            Self { lo: [-r, -r], hi: [r, r] }
        }
    }

    pub fn intersects(&self, other: &Aabb, tol: f64) -> bool {
        (0..2).all(|k| self.lo[k] <= other.hi[k] + tol && other.lo[k] <= self.hi[k] + tol)
    }

    pub fn contains_box(&self, other: &Aabb, tol: f64) -> bool {
        (0..2).all(|k| other.lo[k] >= self.lo[k] - tol && other.hi[k] <= self.hi[k] + tol)
    }

    pub fn translate(&self, t: Point) -> Self {
        Self { lo: add(self.lo, t), hi: add(self.hi, t) }
    }
}

/// A compact convex support: an interval (d = 1) or a convex polygon with
/// counter-clockwise vertices (d = 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub dim: usize,
    pub vertices: Vec<Point>,
}

impl Support {
    pub fn interval(a: f64, b: f64) -> Self {
        Self { dim: 1, vertices: vec![[a.min(b), 0.0], [a.max(b), 0.0]] }
    }

    pub fn rectangle(lo: Point, hi: Point) -> Self {
        Self { dim: 2, vertices: vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]] }
    }

    /// Builds a polygon, reordering clockwise input to counter-clockwise.
    pub fn polygon(mut vertices: Vec<Point>) -> Self {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Self { dim: 2, vertices }
    }

    pub fn volume(&self) -> f64 {
        if self.dim == 1 {
            self.vertices[1][0] - self.vertices[0][0]
        } else {
            signed_area(&self.vertices)
        }
    }

    pub fn bbox(&self) -> Aabb {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Aabb { lo, hi }
    }

    pub fn translate(&self, t: Point) -> Self {
        Self { dim: self.dim, vertices: self.vertices.iter().map(|&v| add(v, t)).collect() }
    }

    pub fn transform(&self, l: &LinearMap) -> Self {
        let vs: Vec<Point> = self.vertices.iter().map(|&v| l.apply(v)).collect();
        if self.dim == 1 {
            Self::interval(vs[0][0], vs[1][0])
        } else {
            Self::polygon(vs)
        }
    }

    pub fn centroid(&self) -> Point {
        if self.dim == 1 {
            return [(self.vertices[0][0] + self.vertices[1][0]) / 2.0, 0.0];
        }
        let a = signed_area(&self.vertices);
        let n = self.vertices.len();
        let mut c = [0.0, 0.0];
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = cross(p, q);
            c[0] += (p[0] + q[0]) * w;
            c[1] += (p[1] + q[1]) * w;
        }
        scale(c, 1.0 / (6.0 * a))
    }

    /// Signed distance from `p` to the boundary, positive inside.
    pub fn margin(&self, p: Point) -> f64 {
        if self.dim == 1 {
            return (p[0] - self.vertices[0][0]).min(self.vertices[1][0] - p[0]);
        }
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let e = sub(b, a);
                cross(e, sub(p, a)) / norm2(e)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Closed membership with outward tolerance `tol`.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.margin(p) >= -tol
    }

    /// Every vertex of `other` lies in `self` up to `tol`.
    pub fn contains_support(&self, other: &Support, tol: f64) -> bool {
        other.vertices.iter().all(|&v| self.contains(v, tol))
    }

    /// Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(norm2(sub(*a, *b)));
            }
        }
        d
    }

    /// Radius of the largest inscribed ball.
    pub fn inradius(&self) -> f64 {
        if self.dim == 1 {
            return self.volume() / 2.0;
        }
        // The Chebyshev centre touches three edges; enumerate edge triples.
        let n = self.vertices.len();
        let lines: Vec<(Point, f64)> = (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let e = sub(b, a);
                let len = norm2(e);
                // Inward normal u with u·x ≥ u·a inside.
                let u = [-e[1] / len, e[0] / len];
                (u, dot(u, a))
            })
            .collect();
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    // Solve u·x − r = c for the three lines.
                    let rows = [lines[i], lines[j], lines[k]];
                    let a: Vec<Vec<f64>> = rows.iter().map(|(u, _)| vec![u[0], u[1], -1.0]).collect();
                    let b: Vec<f64> = rows.iter().map(|(_, c)| *c).collect();
                    let Ok(sol) = crate::linalg::solve(&a, &b) else { continue };
                    let (x, r) = ([sol[0], sol[1]], sol[2]);
                    if r > best && lines.iter().all(|(u, c)| dot(*u, x) - c >= r - 1e-12 * (1.0 + r)) {
                        best = r;
                    }
                }
            }
        }
        best
    }

    /// Whether the closed supports come within `tol` of each other.
    pub fn intersects(&self, other: &Support, tol: f64) -> bool {
        if self.dim == 1 {
            return self.vertices[0][0] <= other.vertices[1][0] + tol
                && other.vertices[0][0] <= self.vertices[1][0] + tol;
        }
        // Separating axis test over both edge normal sets.
        for poly in [self, other] {
            let n = poly.vertices.len();
            for i in 0..n {
                let e = sub(poly.vertices[(i + 1) % n], poly.vertices[i]);
                let len = norm2(e);
                let axis = [-e[1] / len, e[0] / len];
                let (a0, a1) = project(&self.vertices, axis);
                let (b0, b1) = project(&other.vertices, axis);
                if a1 < b0 - tol || b1 < a0 - tol {
                    return false;
                }
            }
        }
        true
    }

    /// Intersection with an axis-aligned box (Sutherland–Hodgman for
    /// polygons); `None` when the intersection has no interior.
    pub fn clip_to_box(&self, b: &Aabb) -> Option<Support> {
        if self.dim == 1 {
            let lo = self.vertices[0][0].max(b.lo[0]);
            let hi = self.vertices[1][0].min(b.hi[0]);
            return (hi > lo).then(|| Support::interval(lo, hi));
        }
        let mut poly = self.vertices.clone();
        let planes: [(usize, f64, bool); 4] =
            [(0, b.lo[0], true), (0, b.hi[0], false), (1, b.lo[1], true), (1, b.hi[1], false)];
        for (axis, value, keep_above) in planes {
            let inside = |p: &Point| if keep_above { p[axis] >= value } else { p[axis] <= value };
            let mut out = Vec::with_capacity(poly.len() + 2);
            let n = poly.len();
            for i in 0..n {
                let cur = poly[i];
                let prev = poly[(i + n - 1) % n];
                let (ci, pi) = (inside(&cur), inside(&prev));
                if ci != pi {
                    let t = (value - prev[axis]) / (cur[axis] - prev[axis]);
                    out.push(add(prev, scale(sub(cur, prev), t)));
                }
                if ci {
                    out.push(cur);
                }
            }
            poly = out;
            if poly.len() < 3 {
                return None;
            }
        }
        let s = Support { dim: 2, vertices: poly };
        (s.volume() > 0.0).then_some(s)
    }

    /// Convexity and orientation check for polygons; intervals must have
    /// positive length.
    pub fn check_convex(&self) -> Result<(), String> {
        if self.dim == 1 {
            return if self.volume() > 0.0 { Ok(()) } else { Err("interval has non-positive length".into()) };
        }
        let n = self.vertices.len();
        if n < 3 {
            return Err("polygon needs at least three vertices".into());
        }
        let scale = self.bbox().hi.iter().zip(self.bbox().lo.iter()).map(|(h, l)| h - l).fold(0.0, f64::max);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            if cross(sub(b, a), sub(c, b)) <= -1e-12 * scale * scale {
                return Err("polygon is not convex or not counter-clockwise".into());
            }
        }
        if self.volume() <= 0.0 {
            return Err("polygon has non-positive area".into());
        }
        Ok(())
    }
}

fn project(vs: &[Point], axis: Point) -> (f64, f64) {
    vs.iter()
        .map(|&v| dot(v, axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn signed_area(vs: &[Point]) -> f64 {
    let n = vs.len();
    (0..n).map(|i| cross(vs[i], vs[(i + 1) % n])).sum::<f64>() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_basics() {
        let s = Support::rectangle([0.0, 0.0], [2.0, 1.0]);
        assert_eq!(s.volume(), 2.0);
        assert_eq!(s.centroid(), [1.0, 0.5]);
        assert!((s.inradius() - 0.5).abs() < 1e-12);
        assert!(s.contains([2.0, 1.0], 0.0));
        assert!(!s.contains([2.1, 1.0], 1e-9));
        assert_eq!(s.margin([1.0, 0.25]), 0.25);
    }

    #[test]
    fn clipping_a_triangle() {
        let t = Support::polygon(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]);
        let c = t.clip_to_box(&Aabb { lo: [0.0, 0.0], hi: [1.0, 1.0] }).unwrap();
        assert!((c.volume() - 1.0).abs() < 1e-15);
        assert!(t.clip_to_box(&Aabb { lo: [1.5, 1.5], hi: [3.0, 3.0] }).is_none());
    }

    #[test]
    fn touching_polygons_intersect() {
        let a = Support::rectangle([0.0, 0.0], [1.0, 1.0]);
        let b = Support::rectangle([1.0, 1.0], [2.0, 2.0]);
        let c = Support::rectangle([1.0 + 1e-6, 0.0], [2.0, 1.0]);
        assert!(a.intersects(&b, 1e-9));
        assert!(!a.intersects(&c, 1e-9));
    }

    #[test]
    fn transform_keeps_orientation() {
        let s = Support::rectangle([0.0, 0.0], [1.0, 1.0]);
        let flip = LinearMap::new(2, [[-1.0, 0.0], [0.0, 2.0]]).unwrap();
        let t = s.transform(&flip);
        assert!((t.volume() - 2.0).abs() < 1e-15);
        assert!(t.check_convex().is_ok());
    }
}
