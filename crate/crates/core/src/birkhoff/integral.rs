use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{expi, structure_factor};
use crate::error::{Error, Result};
use crate::geometry::{dot, Aabb, Point};
use crate::quadrature::{integrate_box, integrate_interval, integrate_polygon};
use crate::tiling::rule::halton;
use crate::tiling::{patch_covering_cube, FixedPointTiling, Patch, PatchIndex, Selection, SubstitutionRule};

use super::profile::CylindricalFunction;

/// Point evaluation of a cylindrical function along a fixed patch.
pub struct Evaluator<'a> {
    rule: &'a SubstitutionRule,
    f: &'a CylindricalFunction,
    patch: &'a Patch,
    index: PatchIndex<'a>,
}

impl<'a> Evaluator<'a> {
    pub fn new(rule: &'a SubstitutionRule, f: &'a CylindricalFunction, patch: &'a Patch) -> Self {
        Self { rule, f, patch, index: PatchIndex::new(rule, patch) }
    }

    /// f(φ_s X): ψ of the tile containing `s`, lowest index on shared boundaries.
    pub fn value(&self, s: Point) -> Result<f64> {
        let i = self
            .index
            .locate(s)
            .ok_or_else(|| Error::Domain(format!("point {s:?} lies outside the patch")))?;
        let t = self.patch.tiles[i];
        Ok(self.f.profile_value(t.kind, [s[0] - t.translation[0], s[1] - t.translation[1]]))
    }

    pub fn rule(&self) -> &SubstitutionRule {
        self.rule
    }
}

pub fn evaluate(f: &CylindricalFunction, rule: &SubstitutionRule, patch: &Patch, s: Point) -> Result<Complex64> {
    Ok(Complex64::new(Evaluator::new(rule, f, patch).value(s)?, 0.0))
}

/// Σ_i ψ̂_i(ω)·Φ_i(P, ω) over the complete tiles of a patch.
pub fn twisted_integral_on(f: &CylindricalFunction, patch: &Patch, omega: Point) -> Result<Complex64> {
    let hats = f.psi_hats(omega)?;
    Ok(hats
        .iter()
        .enumerate()
        .filter(|(_, h)| h.norm() > 0.0)
        .map(|(i, h)| h * structure_factor(patch, i, omega))
        .sum())
}

/// S^f_R(X, ω) over the complete tiles ]C_R[ of the fixed-point tiling.
pub fn twisted_integral(rule: &SubstitutionRule, f: &CylindricalFunction, radius: f64, omega: Point) -> Result<Complex64> {
    let (patch, _) = patch_covering_cube(rule, radius)?;
    twisted_integral_on(f, &patch, omega)
}

/// Tile-by-tile quadrature of e[ω·s] f(φ_s X) in absolute coordinates, with
/// f located through the patch index rather than the factorization.
pub fn twisted_integral_oracle_on(
    rule: &SubstitutionRule,
    f: &CylindricalFunction,
    patch: &Patch,
    omega: Point,
) -> Result<Complex64> {
    let eval = Evaluator::new(rule, f, patch);
    let parts: Vec<Result<Complex64>> = patch
        .tiles
        .par_iter()
        .map(|t| {
            if f.profiles[t.kind].is_zero() {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let g = |s: Point| -> Complex64 {
                match eval.value(s) {
                    Ok(v) if v != 0.0 => expi(dot(omega, s)) * v,
                    _ => Complex64::new(0.0, 0.0),
                }
            };
            let support = rule.prototiles[t.kind].support.translate(t.translation);
            let b = support.bbox();
            let mid = [(b.lo[0] + b.hi[0]) / 2.0, (b.lo[1] + b.hi[1]) / 2.0];
            if rule.dim == 1 {
                integrate_interval(b.lo[0], b.hi[0], &[mid[0]], omega[0].abs(), |x| g([x, 0.0]))
            } else if support.vertices.len() == 4 && is_axis_box(&support.vertices, &b) {
                integrate_box(&b, [&[mid[0]], &[mid[1]]], [omega[0].abs(), omega[1].abs()], g)
            } else {
                integrate_polygon(&support, omega[0].hypot(omega[1]), g)
            }
        })
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in parts {
        acc += p?;
    }
    Ok(acc)
}

fn is_axis_box(vs: &[Point], b: &Aabb) -> bool {
    vs.iter().all(|v| (v[0] == b.lo[0] || v[0] == b.hi[0]) && (v[1] == b.lo[1] || v[1] == b.hi[1]))
}

pub fn twisted_integral_oracle(
    rule: &SubstitutionRule,
    f: &CylindricalFunction,
    radius: f64,
    omega: Point,
) -> Result<Complex64> {
    let (patch, _) = patch_covering_cube(rule, radius)?;
    twisted_integral_oracle_on(rule, f, &patch, omega)
}

/// Spatial-average estimate of G_R(f, ω).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrEstimate {
    pub omega: Point,
    pub radius: f64,
    pub estimate: f64,
    /// Sample standard deviation of |S|²/R^d over √(samples).
    pub std_error: f64,
    pub samples: usize,
    /// Half-width of the ambient cube holding all sample windows.
    pub ambient_radius: f64,
}

/// Half-width of the ambient cube: at least 4R, and large enough that the
/// sample centers sit about R/4 apart.
pub fn ambient_radius(dim: usize, radius: f64, samples: usize) -> f64 {
    let spread = radius / 4.0 * (samples.max(1) as f64).powf(1.0 / dim as f64);
    (4.0 * radius).max(radius + spread)
}

/// Sample centers in C_{T−R}: midpoints in d = 1, Halton points in d = 2.
pub(crate) fn sample_centers(dim: usize, half: f64, samples: usize) -> Vec<Point> {
    (0..samples)
        .map(|k| {
            if dim == 1 {
                [-half + 2.0 * half * (k as f64 + 0.5) / samples as f64, 0.0]
            } else {
                [-half + 2.0 * half * halton(k + 1, 2), -half + 2.0 * half * halton(k + 1, 3)]
            }
        })
        .collect()
}

/// Estimates G_R(f, ω) = R^{−d}‖S^f_R(·, ω)‖² by unique-ergodicity
/// averaging over windows t + [−R/2, R/2]^d of the fixed-point tiling.
///
/// With side-R windows the constant function gives |S|²/R^d = 𝔉^d_R(ω)
/// exactly, which calibrates the estimator against the Fejér kernel. Tiles
/// cut by a window boundary are integrated over their clipped part, so the
/// boundary term Δ is included.
pub fn g_r_estimate(
    rule: &SubstitutionRule,
    f: &CylindricalFunction,
    radius: f64,
    omega: Point,
    samples: usize,
) -> Result<GrEstimate> {
    if !(radius > 0.0) || samples == 0 {
        return Err(Error::Domain("G_R needs R > 0 and at least one sample".into()));
    }
    let d = rule.dim;
    let ambient = ambient_radius(d, radius, samples);
    let tiling = FixedPointTiling::new(rule)?;
    let (patch, _) = tiling.covering_patch(&Aabb::cube(d, ambient), Selection::Intersecting)?;
    let index = PatchIndex::new(rule, &patch);
    let hats = f.psi_hats(omega)?;
    let centers = sample_centers(d, ambient - radius, samples);
    let half = radius / 2.0;
    let tol = 1e-12 * ambient;
    let values: Vec<Result<f64>> = centers
        .par_iter()
        .map(|&t| {
            let window = if d == 1 {
                Aabb { lo: [t[0] - half, 0.0], hi: [t[0] + half, 0.0] }
            } else {
                Aabb { lo: [t[0] - half, t[1] - half], hi: [t[0] + half, t[1] + half] }
            };
            let mut s = Complex64::new(0.0, 0.0);
            for i in index.query(&window) {
                let tile = patch.tiles[i];
                if f.profiles[tile.kind].is_zero() {
                    continue;
                }
                let b = rule.prototiles[tile.kind].support.bbox().translate(tile.translation);
                let inside = (0..d).all(|k| b.lo[k] >= window.lo[k] - tol && b.hi[k] <= window.hi[k] + tol);
                s += if inside {
                    hats[tile.kind] * expi(dot(omega, tile.translation))
                } else {
                    f.twisted_tile_integral(tile.kind, tile.translation, omega, Some(&window))?
                };
            }
            Ok(s.norm_sqr() / radius.powi(d as i32))
        })
        .collect();
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let (estimate, std_error) = mean_and_error(&values);
    Ok(GrEstimate { omega, radius, estimate, std_error, samples, ambient_radius: ambient })
}

/// Sample mean and its standard error.
pub(crate) fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, (var / n).sqrt())
}

/// Estimated upper bound σ_f(C^ω_r) ≤ (π^{2d}/(4R)^d)·G_R with R = 1/2r.
/// G_R is itself a spatial-average estimate, so this is not a certified bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub omega: Point,
    pub r: f64,
    pub radius: f64,
    pub g_r: f64,
    pub g_r_std_error: f64,
    pub bound: f64,
    pub std_error: f64,
}

pub fn sigma_box_bound(
    rule: &SubstitutionRule,
    f: &CylindricalFunction,
    omega: Point,
    r: f64,
    samples: usize,
) -> Result<SpectralEstimate> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(Error::Domain(format!("box half-width r = {r} must lie in (0, 1/2]")));
    }
    let radius = 1.0 / (2.0 * r);
    let g = g_r_estimate(rule, f, radius, omega, samples)?;
    let d = rule.dim as i32;
    let factor = std::f64::consts::PI.powi(2 * d) / (4.0 * radius).powi(d);
    Ok(SpectralEstimate {
        omega,
        r,
        radius,
        g_r: g.estimate,
        g_r_std_error: g.std_error,
        bound: factor * g.estimate,
        std_error: factor * g.std_error,
    })
}
