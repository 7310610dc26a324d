//! Deformed averaging domains for self-affine expansions: the logarithm 𝔞
//! of L, the domains B_R = exp(σ log R·𝔞)C₁ and the deformed spectral boxes
//! M_r⁻¹C_r.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::birkhoff::integral::{mean_and_error, sample_centers};
use crate::birkhoff::{ambient_radius, twisted_integral_on, twisted_integral_oracle_on, CylindricalFunction, GrEstimate, SpectralEstimate};
use crate::cocycle::expi;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm_inf, scale, Aabb, Point, Support};
use crate::linalg::LinearMap;
use crate::tiling::{rule_power, FixedPointTiling, Patch, PatchIndex, Selection, SubstitutionRule};

/// Allowed ‖exp(𝔞) − L‖ relative to ‖L‖.
const ROUND_TRIP_TOL: f64 = 1e-9;

/// A real logarithm of the expansion and the exponent σ = d / log det L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeformationData {
    pub expansion: LinearMap,
    /// 𝔞 with exp(𝔞) = L.
    pub log_expansion: LinearMap,
    pub sigma: f64,
    /// ‖𝔞‖ in the operator norm induced by the sup norm.
    pub log_norm: f64,
}

impl DeformationData {
    pub fn dim(&self) -> usize {
        self.expansion.dim
    }

    /// g_t = exp(t𝔞).
    pub fn flow(&self, t: f64) -> LinearMap {
        matrix_exp(&self.log_expansion.scale(t))
    }

    /// g_{σ log R}, of determinant R^d.
    pub fn scaling(&self, radius: f64) -> LinearMap {
        self.flow(self.sigma * radius.ln())
    }
}

/// atanh(z)/z.
fn atanhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 + z2 / 3.0 + z2 * z2 / 5.0
    } else {
        z.atanh() / z
    }
}

/// sinh(z)/z.
fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        1.0 + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// Closed-form exponential. Writing A = mI + (A − mI) with m = tr A/2 and
/// δ² = m² − det A, exp(A) = e^m(cosh δ·I + sinh δ/δ·(A − mI)).
pub fn matrix_exp(a: &LinearMap) -> LinearMap {
    if a.dim == 1 {
        return LinearMap::scalar(a.m[0][0].exp());
    }
    let m = a.trace() / 2.0;
    let delta = Complex64::new(m * m - a.det(), 0.0).sqrt();
    let e = m.exp();
    let identity = LinearMap::identity(2);
    let shifted = a.add(&identity.scale(-m));
    identity.scale(e * delta.cosh().re).add(&shifted.scale(e * sinhc(delta).re))
}

fn has_nonpositive_real_eigenvalue(l: &LinearMap) -> bool {
    l.eigenvalues().iter().any(|z| z.im.abs() <= 1e-12 * (1.0 + z.re.abs()) && z.re <= 0.0)
}

/// Principal logarithm of an expansion with no eigenvalue on the closed
/// negative real axis.
///
/// In d = 2 the logarithm is ½ log det·I + κ(L − mI) with m = tr L/2 and κ
/// the divided difference of log over the two eigenvalues.
pub fn matrix_log(expansion: &LinearMap) -> Result<DeformationData> {
    let d = expansion.dim;
    if has_nonpositive_real_eigenvalue(expansion) {
        return Err(Error::Domain(format!(
            "eigenvalues {:?} include a nonpositive real one; pass to the square of the rule",
            expansion.eigenvalues()
        )));
    }
    if !expansion.is_diagonalizable() {
        return Err(Error::Domain("the expansion is not diagonalizable".into()));
    }
    let det = expansion.det();
    if !(det > 1.0) {
        return Err(Error::Domain(format!("det L = {det} is not expanding")));
    }
    let log_expansion = if d == 1 {
        LinearMap::scalar(expansion.m[0][0].ln())
    } else {
        let m = expansion.trace() / 2.0;
        let disc = m * m - det;
        let slope = if disc < 0.0 {
            let theta = (-disc).sqrt();
            theta.atan2(m) / theta
        } else {
            atanhc(disc.sqrt() / m) / m
        };
        let identity = LinearMap::identity(2);
        identity.scale(det.ln() / 2.0).add(&expansion.add(&identity.scale(-m)).scale(slope))
    };
    let miss = matrix_exp(&log_expansion).distance(expansion);
    if miss > ROUND_TRIP_TOL * expansion.norm_inf() {
        return Err(Error::Contract(format!("exp(log L) misses L by {miss:e}")));
    }
    Ok(DeformationData { expansion: *expansion, log_expansion, sigma: d as f64 / det.ln(), log_norm: log_expansion.norm_inf() })
}

/// A rule together with the logarithm of its expansion, squared first when
/// the expansion has a negative real eigenvalue.
#[derive(Debug, Clone)]
pub struct RuleDeformation {
    pub rule: SubstitutionRule,
    pub deformation: DeformationData,
    pub squared: bool,
}

pub fn deform_rule(rule: &SubstitutionRule) -> Result<RuleDeformation> {
    if has_nonpositive_real_eigenvalue(&rule.expansion) {
        let squared = rule_power(rule, 2)?;
        let deformation = matrix_log(&squared.expansion)?;
        return Ok(RuleDeformation { rule: squared, deformation, squared: true });
    }
    Ok(RuleDeformation { rule: rule.clone(), deformation: matrix_log(&rule.expansion)?, squared: false })
}

fn unit_cube(dim: usize) -> Support {
    if dim == 1 {
        Support::interval(-1.0, 1.0)
    } else {
        Support::rectangle([-1.0, -1.0], [1.0, 1.0])
    }
}

/// B_R = g_{σ log R}C₁ with C₁ = [−1, 1]^d.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformedDomain {
    pub radius: f64,
    pub map: LinearMap,
    pub support: Support,
    pub volume: f64,
}

pub fn domain_b(deformation: &DeformationData, radius: f64) -> Result<DeformedDomain> {
    if !(radius >= 1.0) {
        return Err(Error::Domain(format!("B_R needs R ≥ 1, got {radius}")));
    }
    let map = deformation.scaling(radius);
    let support = unit_cube(deformation.dim()).transform(&map);
    Ok(DeformedDomain { radius, map, volume: support.volume(), support })
}

fn containment_tol(domain: &Support) -> f64 {
    let b = domain.bbox();
    1e-9 * (1.0 + b.lo.iter().chain(b.hi.iter()).fold(0.0_f64, |m, x| m.max(x.abs())))
}

/// Tiles of the fixed-point tiling lying inside B_R.
pub fn complete_tiles(rule: &SubstitutionRule, domain: &DeformedDomain) -> Result<Patch> {
    let tiling = FixedPointTiling::new(rule)?;
    let (patch, _) = tiling.covering_patch(&domain.support.bbox(), Selection::Inside)?;
    let tol = containment_tol(&domain.support);
    Ok(patch.retain(|_, t| {
        domain.support.contains_support(&rule.prototiles[t.kind].support.translate(t.translation), tol)
    }))
}

/// S̃^f_R(X, ω) over the complete tiles inside B_R.
pub fn twisted_integral_deformed(
    rule: &SubstitutionRule,
    deformation: &DeformationData,
    f: &CylindricalFunction,
    radius: f64,
    omega: Point,
) -> Result<Complex64> {
    let domain = domain_b(deformation, radius)?;
    twisted_integral_on(f, &complete_tiles(rule, &domain)?, omega)
}

/// Tile-by-tile quadrature of the same integral.
pub fn twisted_integral_deformed_oracle(
    rule: &SubstitutionRule,
    deformation: &DeformationData,
    f: &CylindricalFunction,
    radius: f64,
    omega: Point,
) -> Result<Complex64> {
    let domain = domain_b(deformation, radius)?;
    twisted_integral_oracle_on(rule, f, &complete_tiles(rule, &domain)?, omega)
}

/// Estimates G̃_R(f, ω) = ‖S̃^f_R(·, ω)‖²/Vol(B_R) by averaging over
/// translates t + B_R in the fixed-point tiling, complete tiles only.
pub fn g_tilde(
    rule: &SubstitutionRule,
    deformation: &DeformationData,
    f: &CylindricalFunction,
    radius: f64,
    omega: Point,
    samples: usize,
) -> Result<GrEstimate> {
    if samples == 0 {
        return Err(Error::Domain("G̃_R needs at least one sample".into()));
    }
    let d = rule.dim;
    let domain = domain_b(deformation, radius)?;
    let b = domain.support.bbox();
    let reach = b.lo.iter().chain(b.hi.iter()).fold(0.0_f64, |m, x| m.max(x.abs()));
    let ambient = ambient_radius(d, reach, samples);
    let tiling = FixedPointTiling::new(rule)?;
    let (patch, _) = tiling.covering_patch(&Aabb::cube(d, ambient), Selection::Intersecting)?;
    let index = PatchIndex::new(rule, &patch);
    let hats = f.psi_hats(omega)?;
    let tol = containment_tol(&domain.support) * (1.0 + ambient / reach);
    let values: Vec<f64> = sample_centers(d, ambient - reach, samples)
        .par_iter()
        .map(|&t| {
            let window = domain.support.translate(t);
            let mut s = Complex64::new(0.0, 0.0);
            for i in index.query(&window.bbox()) {
                let tile = patch.tiles[i];
                if hats[tile.kind].norm() == 0.0 {
                    continue;
                }
                if window.contains_support(&rule.prototiles[tile.kind].support.translate(tile.translation), tol) {
                    s += hats[tile.kind] * expi(dot(omega, tile.translation));
                }
            }
            s.norm_sqr() / domain.volume
        })
        .collect();
    let (estimate, std_error) = mean_and_error(&values);
    Ok(GrEstimate { omega, radius, estimate, std_error, samples, ambient_radius: ambient })
}

/// Estimated bound σ_f(M_r⁻¹C_r) ≤ (π^{2d}/(4R)^d)·G̃_R(f, 0), R = 1/2r.
pub fn sigma_deformed_bound(
    rule: &SubstitutionRule,
    deformation: &DeformationData,
    f: &CylindricalFunction,
    r: f64,
    samples: usize,
) -> Result<SpectralEstimate> {
    check_half_width(r)?;
    let radius = 1.0 / (2.0 * r);
    let g = g_tilde(rule, deformation, f, radius, [0.0, 0.0], samples)?;
    let d = rule.dim as i32;
    let factor = PI.powi(2 * d) / (4.0 * radius).powi(d);
    Ok(SpectralEstimate {
        omega: [0.0, 0.0],
        r,
        radius,
        g_r: g.estimate,
        g_r_std_error: g.std_error,
        bound: factor * g.estimate,
        std_error: factor * g.std_error,
    })
}

fn check_half_width(r: f64) -> Result<()> {
    if r > 0.0 && r <= 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("box half-width r = {r} must lie in (0, 1/2]")))
    }
}

/// M_r = 2r·g_{−σ log 2r}ᵀ.
pub fn deformation_matrix(deformation: &DeformationData, r: f64) -> Result<LinearMap> {
    check_half_width(r)?;
    Ok(deformation.flow(-deformation.sigma * (2.0 * r).ln()).transpose().scale(2.0 * r))
}

/// The deformed box ω + M_r⁻¹C_r and the check that it contains the cube
/// of half-width r^{σ‖𝔞‖} around ω.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformedBox {
    pub omega: Point,
    pub r: f64,
    pub matrix: LinearMap,
    pub support: Support,
    pub inscribed_radius: f64,
    /// r − max ‖M_r v‖_∞ over the vertices v of the inscribed cube.
    pub slack: f64,
    pub contains_inscribed: bool,
}

pub fn deformed_box(deformation: &DeformationData, omega: Point, r: f64) -> Result<DeformedBox> {
    let matrix = deformation_matrix(deformation, r)?;
    let cube = unit_cube(deformation.dim());
    let support = cube.transform(&matrix.inverse()?.scale(r)).translate(omega);
    let inscribed_radius = r.powf(deformation.sigma * deformation.log_norm);
    let worst = cube
        .vertices
        .iter()
        .map(|&v| norm_inf(matrix.apply(scale(v, inscribed_radius))))
        .fold(0.0, f64::max);
    let slack = r - worst;
    Ok(DeformedBox { omega, r, matrix, support, inscribed_radius, slack, contains_inscribed: slack >= -1e-12 * r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::birkhoff::{twisted_integral, zero_mean_project};
    use crate::tiling::fixtures;

    /// Scaling and squaring with a long Taylor series.
    fn taylor_exp(a: &LinearMap) -> LinearMap {
        let squarings = a.norm_inf().max(1.0).log2().ceil() as i32 + 4;
        let small = a.scale(0.5f64.powi(squarings));
        let mut term = LinearMap::identity(a.dim);
        let mut sum = term;
        for k in 1..30 {
            term = term.compose(&small).scale(1.0 / k as f64);
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.compose(&sum);
        }
        sum
    }

    fn close(a: &LinearMap, b: &LinearMap, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn diagonal_logarithms() {
        let e = std::f64::consts::E;
        let data = matrix_log(&LinearMap::diag(2.0, e)).unwrap();
        assert!(close(&data.log_expansion, &LinearMap::diag(2f64.ln(), 1.0), 1e-15));
        let iso = matrix_log(&LinearMap::diag(2.0, 2.0)).unwrap();
        assert!((iso.sigma - 1.0 / 2f64.ln()).abs() < 1e-15);
        assert!(close(&iso.scaling(4.0), &LinearMap::diag(4.0, 4.0), 1e-12));
        let (l13, l21) = (fixtures::quadratic_root(3), fixtures::quadratic_root(5));
        let np = matrix_log(&fixtures::npprod().expansion).unwrap();
        assert!(close(&np.log_expansion, &LinearMap::diag(l13.ln(), l21.ln()), 1e-15));
        assert!((np.sigma - 2.0 / (l13 * l21).ln()).abs() < 1e-15);
    }

    #[test]
    fn round_trips_against_taylor_series() {
        let mut maps: Vec<LinearMap> = fixtures::all().into_iter().map(|(_, r)| r.expansion).collect();
        maps.push(LinearMap::new(2, [[1.0, -2.0], [2.0, 1.0]]).unwrap());
        maps.push(LinearMap::new(2, [[2.0, 1.0], [0.0, 3.0]]).unwrap());
        maps.push(LinearMap::new(2, [[-1.0, -3.0], [3.0, -1.0]]).unwrap());
        maps.push(LinearMap::new(2, [[3.0, 1.0], [1e-9, 3.0]]).unwrap());
        for l in maps {
            let data = matrix_log(&l).unwrap();
            assert!(close(&taylor_exp(&data.log_expansion), &l, 1e-9 * l.norm_inf()), "{l:?}");
            assert!(close(&matrix_exp(&data.log_expansion), &taylor_exp(&data.log_expansion), 1e-12 * l.norm_inf()));
            assert!(data.sigma * data.log_norm >= 1.0 - 1e-12, "{l:?}");
        }
    }

    #[test]
    fn negative_and_defective_expansions() {
        let phi = fixtures::golden();
        assert!(matches!(matrix_log(&LinearMap::scalar(-phi)), Err(Error::Domain(_))));
        assert!(matches!(matrix_log(&LinearMap::diag(-2.0, -3.0)), Err(Error::Domain(_))));
        assert!(matches!(matrix_log(&LinearMap::new(2, [[2.0, 1.0], [0.0, 2.0]]).unwrap()), Err(Error::Domain(_))));
        let deformed = deform_rule(&fixtures::fib_reflected()).unwrap();
        assert!(deformed.squared);
        assert!((deformed.deformation.expansion.m[0][0] - phi * phi).abs() < 1e-12);
        assert!(!deform_rule(&fixtures::np13()).unwrap().squared);
    }

    #[test]
    fn domains() {
        let iso = matrix_log(&LinearMap::diag(2.0, 2.0)).unwrap();
        let b = domain_b(&iso, 4.0).unwrap();
        let cube = Support::rectangle([-4.0, -4.0], [4.0, 4.0]);
        for (u, v) in b.support.vertices.iter().zip(&cube.vertices) {
            assert!(norm_inf([u[0] - v[0], u[1] - v[1]]) < 1e-12);
        }
        let one = domain_b(&iso, 1.0).unwrap();
        assert!(close(&one.map, &LinearMap::identity(2), 1e-15));
        let np = matrix_log(&fixtures::npprod().expansion).unwrap();
        for radius in [2.0, 4.0, 8.0, 16.0] {
            let b = domain_b(&np, radius).unwrap();
            assert!((b.volume - 4.0 * radius * radius).abs() <= 1e-9 * radius * radius);
        }
        let b8 = domain_b(&np, 8.0).unwrap();
        assert!(b8.map.m[0][1] == 0.0 && b8.map.m[1][0] == 0.0);
        let (l13, l21) = (fixtures::quadratic_root(3), fixtures::quadratic_root(5));
        let exponent = np.sigma * 8f64.ln();
        assert!((b8.map.m[0][0] / b8.map.m[1][1] - (l13 / l21).powf(exponent)).abs() < 1e-12);
        assert!(domain_b(&np, 0.5).is_err());
    }

    #[test]
    fn deformation_matrices() {
        let iso = matrix_log(&fixtures::fibprod().expansion).unwrap();
        for k in 1..=10 {
            let m = deformation_matrix(&iso, 0.5f64.powi(k)).unwrap();
            assert!(close(&m, &LinearMap::identity(2), 1e-12), "{m:?}");
        }
        let np = matrix_log(&fixtures::npprod().expansion).unwrap();
        assert!(close(&deformation_matrix(&np, 0.5).unwrap(), &LinearMap::identity(2), 1e-15));
        assert!(deformation_matrix(&np, 0.75).is_err());
        let b = deformed_box(&iso, [0.3, -0.2], 0.125).unwrap();
        let want = Support::rectangle([0.175, -0.325], [0.425, -0.075]);
        for (u, v) in b.support.vertices.iter().zip(&want.vertices) {
            assert!(norm_inf([u[0] - v[0], u[1] - v[1]]) < 1e-12);
        }
    }

    #[test]
    fn inscribed_cubes_fit() {
        for (name, rule) in fixtures::all().into_iter().chain([("fib_reflected", fixtures::fib_reflected())]) {
            let deformation = deform_rule(&rule).unwrap().deformation;
            for k in 1..=10 {
                let b = deformed_box(&deformation, [0.0, 0.0], 0.5f64.powi(k)).unwrap();
                assert!(b.contains_inscribed, "{name}, r = 2^-{k}: slack {}", b.slack);
            }
        }
    }

    #[test]
    fn deformed_integrals() {
        let iso = fixtures::fibprod();
        let data = matrix_log(&iso.expansion).unwrap();
        let f = CylindricalFunction::hats(&iso, &[1.0, -0.5, 0.25, 2.0]).unwrap();
        let omega = [0.3, 0.7];
        let deformed = twisted_integral_deformed(&iso, &data, &f, 5.0, omega).unwrap();
        let cube = twisted_integral(&iso, &f, 5.0, omega).unwrap();
        assert!((deformed - cube).norm() <= 1e-12 * (1.0 + cube.norm()));

        let rule = fixtures::npprod();
        let data = matrix_log(&rule.expansion).unwrap();
        let zero = CylindricalFunction::zero(&rule);
        assert_eq!(twisted_integral_deformed(&rule, &data, &zero, 6.0, omega).unwrap(), Complex64::new(0.0, 0.0));
        let weights: Vec<f64> = (0..rule.type_count()).map(|k| 1.0 - 0.3 * k as f64).collect();
        let f = CylindricalFunction::hats(&rule, &weights).unwrap();
        let fast = twisted_integral_deformed(&rule, &data, &f, 6.0, omega).unwrap();
        let slow = twisted_integral_deformed_oracle(&rule, &data, &f, 6.0, omega).unwrap();
        assert!((fast - slow).norm() <= 1e-5 * slow.norm(), "{fast} vs {slow}");
    }

    #[test]
    fn g_tilde_basics() {
        let rule = fixtures::npprod();
        let data = matrix_log(&rule.expansion).unwrap();
        let zero = CylindricalFunction::zero(&rule);
        assert_eq!(g_tilde(&rule, &data, &zero, 4.0, [0.0, 0.0], 8).unwrap().estimate, 0.0);
        let f = zero_mean_project(&CylindricalFunction::hat_on(&rule, 0, 1.0).unwrap(), &rule).unwrap();
        let g = g_tilde(&rule, &data, &f, 4.0, [0.0, 0.0], 16).unwrap();
        assert!(g.estimate > 0.0 && g.std_error >= 0.0);
        let s = sigma_deformed_bound(&rule, &data, &f, 0.125, 16).unwrap();
        assert_eq!(s.radius, 4.0);
        assert!((s.g_r - g.estimate).abs() < 1e-12 * g.estimate);
    }
}
