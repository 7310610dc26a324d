//! Composite Gauss–Legendre quadrature for oscillatory integrands on
//! intervals, boxes and convex polygons.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point, Support};

const COARSE: usize = 16;
const FINE: usize = 24;
const MAX_REFINEMENTS: usize = 10;
/// Successive refinements must agree to this fraction of ∫|g|.
pub const TOLERANCE: f64 = 1e-9;

fn rule(degree: usize) -> &'static [(f64, f64)] {
    static COARSE_RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static FINE_RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let build = || {
        GaussLegendre::new(NonZeroUsize::new(degree).expect("positive degree"))
            .as_node_weight_pairs()
            .to_vec()
    };
    match degree {
        COARSE => COARSE_RULE.get_or_init(build),
        FINE => FINE_RULE.get_or_init(build),
        _ => unreachable!("only two quadrature degrees are used"),
    }
}

/// Nodes and weights of a composite rule on [a, b] split at `breaks`.
fn composite(a: f64, b: f64, breaks: &[f64], frequency: f64, degree: usize, refine: usize) -> Vec<(f64, f64)> {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    let nodes = rule(degree);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let panels = (1 + (frequency * (hi - lo) / 2.0).floor() as usize) << refine;
        let h = (hi - lo) / panels as f64;
        for p in 0..panels {
            let left = lo + p as f64 * h;
            for &(x, wt) in nodes {
                out.push((left + 0.5 * h * (x + 1.0), 0.5 * h * wt));
            }
        }
    }
    out
}

fn converge(mut pass: impl FnMut(usize, usize) -> (Complex64, f64)) -> Result<Complex64> {
    for refine in 0..MAX_REFINEMENTS {
        let (coarse, _) = pass(COARSE, refine);
        let (fine, mass) = pass(FINE, refine);
        if (fine - coarse).norm() <= TOLERANCE * mass.max(f64::MIN_POSITIVE) || mass == 0.0 {
            return Ok(fine);
        }
    }
    Err(Error::Precision(format!("quadrature did not converge after {MAX_REFINEMENTS} refinements")))
}

/// ∫_a^b g with panels sized for oscillation frequency `frequency` and
/// splits at the kinks in `breaks`.
pub fn integrate_interval(
    a: f64,
    b: f64,
    breaks: &[f64],
    frequency: f64,
    g: impl Fn(f64) -> Complex64,
) -> Result<Complex64> {
    if b <= a {
        return Ok(Complex64::new(0.0, 0.0));
    }
    converge(|degree, refine| {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for (x, w) in composite(a, b, breaks, frequency, degree, refine) {
            let v = g(x);
            sum += v * w;
            mass += v.norm() * w;
        }
        (sum, mass)
    })
}

/// Tensor-product rule on a box with per-axis kinks and frequencies.
pub fn integrate_box(
    region: &Aabb,
    breaks: [&[f64]; 2],
    frequency: [f64; 2],
    g: impl Fn(Point) -> Complex64,
) -> Result<Complex64> {
    if region.hi[0] <= region.lo[0] || region.hi[1] <= region.lo[1] {
        return Ok(Complex64::new(0.0, 0.0));
    }
    converge(|degree, refine| {
        let xs = composite(region.lo[0], region.hi[0], breaks[0], frequency[0], degree, refine);
        let ys = composite(region.lo[1], region.hi[1], breaks[1], frequency[1], degree, refine);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for &(y, wy) in &ys {
            for &(x, wx) in &xs {
                let v = g([x, y]);
                sum += v * (wx * wy);
                mass += v.norm() * wx * wy;
            }
        }
        (sum, mass)
    })
}

/// Convex polygon: fan triangulation from the centroid, collapsed
/// (Duffy) map of each triangle onto a square, uniform subdivision.
pub fn integrate_polygon(support: &Support, frequency: f64, g: impl Fn(Point) -> Complex64) -> Result<Complex64> {
    let c = support.centroid();
    let verts = &support.vertices;
    let base_levels = (frequency * support.diameter() / 2.0).max(1.0).log2().ceil() as usize;
    converge(|degree, refine| {
        let nodes = rule(degree);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        let splits = 1usize << (base_levels + refine);
        for k in 0..verts.len() {
            let a = verts[k];
            let b = verts[(k + 1) % verts.len()];
            for tri in subdivide([c, a, b], splits) {
                let [p0, p1, p2] = tri;
                let e1 = [p1[0] - p0[0], p1[1] - p0[1]];
                let e2 = [p2[0] - p0[0], p2[1] - p0[1]];
                let area2 = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
                for &(u, wu) in nodes {
                    let u = 0.5 * (u + 1.0);
                    for &(v, wv) in nodes {
                        let v = 0.5 * (v + 1.0);
                        // (u, v) ∈ [0,1]² ↦ barycentric (u(1−v), uv).
                        let (s, t) = (u * (1.0 - v), u * v);
                        let p = [p0[0] + s * e1[0] + t * e2[0], p0[1] + s * e1[1] + t * e2[1]];
                        let w = 0.25 * wu * wv * u * area2;
                        let val = g(p);
                        sum += val * w;
                        mass += val.norm() * w;
                    }
                }
            }
        }
        (sum, mass)
    })
}

/// Splits a triangle into `n²` congruent pieces.
fn subdivide(tri: [Point; 3], n: usize) -> Vec<[Point; 3]> {
    let [a, b, c] = tri;
    let at = |i: usize, j: usize| {
        let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
        [a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]), a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1])]
    };
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n - i {
            out.push([at(i, j), at(i + 1, j), at(i, j + 1)]);
            if i + j + 1 < n {
                out.push([at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn oscillatory_interval() {
        let w = 37.3;
        let got = integrate_interval(0.0, 1.0, &[], w, |x| Complex64::cis(TAU * w * x)).unwrap();
        let want = (Complex64::cis(TAU * w) - 1.0) / Complex64::new(0.0, TAU * w);
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn hat_with_kink() {
        let got = integrate_interval(0.0, 1.0, &[0.5], 0.0, |x| Complex64::new(1.0 - (2.0 * x - 1.0).abs(), 0.0)).unwrap();
        assert!((got.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn box_and_polygon_agree() {
        let region = Aabb { lo: [0.0, 0.0], hi: [2.0, 1.0] };
        let g = |p: Point| Complex64::cis(TAU * (1.3 * p[0] - 0.7 * p[1])) * (p[0] * p[1]);
        let a = integrate_box(&region, [&[], &[]], [1.3, 0.7], g).unwrap();
        let poly = Support::rectangle([0.0, 0.0], [2.0, 1.0]);
        let b = integrate_polygon(&poly, 1.5, g).unwrap();
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn subdivision_preserves_area() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let area: f64 = subdivide(tri, 4)
            .iter()
            .map(|t| ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0])).abs() / 2.0)
            .sum();
        assert!((area - 0.5).abs() < 1e-15);
    }
}
