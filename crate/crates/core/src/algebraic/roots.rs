use num_complex::Complex64;
use serde::Serialize;

use super::poly::IntPolynomial;
use crate::error::{Error, Result};

/// A complex root with a certified inclusion disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootCluster {
    pub center: Complex64,
    /// Exactly one root of the square-free factor lies in the closed disk of this radius.
    pub radius: f64,
    pub multiplicity: usize,
}

impl RootCluster {
    pub fn modulus(&self) -> f64 {
        self.center.norm()
    }

    /// Certified comparison of |root| against `threshold`: `Some(Greater)` or
    /// `Some(Less)` when the inclusion disk is entirely on one side.
    pub fn compare_modulus(&self, threshold: f64) -> Option<std::cmp::Ordering> {
        let m = self.modulus();
        if m - self.radius > threshold {
            Some(std::cmp::Ordering::Greater)
        } else if m + self.radius < threshold {
            Some(std::cmp::Ordering::Less)
        } else {
            None
        }
    }

    pub fn is_real(&self) -> bool {
        self.center.im == 0.0
    }

    /// Whether two clusters certify the same root (overlapping disks).
    pub fn overlaps(&self, other: &RootCluster) -> bool {
        (self.center - other.center).norm() <= self.radius + other.radius
    }
}

const MAX_ITERATIONS: usize = 2000;

/// All complex roots of `p` with certified inclusion radii not exceeding `tol`.
///
/// Repeated roots are returned once with their multiplicity. Output is sorted
/// by (real, imag) and non-real roots come in exact conjugate pairs.
pub fn complex_roots(p: &IntPolynomial, tol: f64) -> Result<Vec<RootCluster>> {
    if p.is_zero() || p.degree() == 0 {
        return Err(Error::Domain("root finding needs a polynomial of degree at least 1".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let mut out = Vec::new();
    for (factor, mult) in p.squarefree_decomposition() {
        for (center, radius) in squarefree_roots(&factor, tol)? {
            out.push(RootCluster { center, radius, multiplicity: mult });
        }
    }
    sort_clusters(&mut out);
    Ok(out)
}

pub(crate) fn sort_clusters(v: &mut [RootCluster]) {
    v.sort_by(|a, b| {
        a.center
            .re
            .total_cmp(&b.center.re)
            .then(a.center.im.total_cmp(&b.center.im))
    });
}

/// Simple roots of a square-free integer polynomial with certified radii.
pub(crate) fn squarefree_roots(p: &IntPolynomial, tol: f64) -> Result<Vec<(Complex64, f64)>> {
    let coeffs = p.to_f64();
    if coeffs.iter().any(|c| !c.is_finite() || c.abs() > 2f64.powi(53)) {
        return Err(Error::Precision(format!("coefficients of {p} are not exactly representable")));
    }
    let n = p.degree();
    if n == 1 {
        let z = Complex64::new(-coeffs[0] / coeffs[1], 0.0);
        let radius = inclusion_radii(&coeffs, &[z])[0];
        return finish(vec![(z, radius)], tol, p);
    }
    let lead = coeffs[n];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let cauchy = 1.0 + monic[..n].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(cauchy, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect();

    let mut best: Option<(Vec<Complex64>, Vec<f64>)> = None;
    for iter in 0..MAX_ITERATIONS {
        // Aberth–Ehrlich update for all roots simultaneously.
        let mut moved = 0.0_f64;
        let previous = z.clone();
        for i in 0..n {
            let (val, der) = horner_with_derivative(&monic, previous[i]);
            if val == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = val / der;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (previous[i] - previous[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] = previous[i] - step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 || iter % 8 == 7 {
            let radii = inclusion_radii(&coeffs, &z);
            let worst = radii.iter().copied().fold(0.0, f64::max);
            if best.as_ref().is_none_or(|(_, r)| worst < r.iter().copied().fold(0.0, f64::max)) {
                best = Some((z.clone(), radii));
            }
            if worst <= tol * 1e-3 || moved < 1e-15 {
                break;
            }
        }
    }
    let (z, radii) = best.expect("at least one certification pass");
    let pairs = symmetrize(z.into_iter().zip(radii).collect());
    finish(pairs, tol, p)
}

fn finish(pairs: Vec<(Complex64, f64)>, tol: f64, p: &IntPolynomial) -> Result<Vec<(Complex64, f64)>> {
    let worst = pairs.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    if !worst.is_finite() || worst > tol {
        return Err(Error::Convergence {
            message: format!("roots of {p} not certified to {tol:e}"),
            residual: worst,
        });
    }
    for (i, a) in pairs.iter().enumerate() {
        for b in &pairs[i + 1..] {
            if (a.0 - b.0).norm() <= a.1 + b.1 {
                return Err(Error::Convergence {
                    message: format!("inclusion disks of {p} overlap near {}", a.0),
                    residual: worst,
                });
            }
        }
    }
    Ok(pairs)
}

/// Snaps certified-real roots onto the real axis and makes complex roots
/// come in exact conjugate pairs.
fn symmetrize(mut pairs: Vec<(Complex64, f64)>) -> Vec<(Complex64, f64)> {
    for pair in pairs.iter_mut() {
        if pair.0.im.abs() <= pair.1 {
            // The disk meets its mirror image; with isolated disks this means
            // the unique root inside is real.
            pair.1 += pair.0.im.abs();
            pair.0.im = 0.0;
        }
    }
    let mut used = vec![false; pairs.len()];
    let mut out = Vec::with_capacity(pairs.len());
    for i in 0..pairs.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (z, r) = pairs[i];
        if z.im == 0.0 {
            out.push((z, r));
            continue;
        }
        let partner = (0..pairs.len())
            .filter(|&j| !used[j] && pairs[j].0.im != 0.0)
            .min_by(|&a, &b| {
                (pairs[a].0 - z.conj()).norm().total_cmp(&(pairs[b].0 - z.conj()).norm())
            });
        match partner {
            Some(j) => {
                used[j] = true;
                let (upper, lower) = if z.im > 0.0 { (z, pairs[j].0) } else { (pairs[j].0, z) };
                let centre = (upper + lower.conj()) / 2.0;
                let radius = r.max(pairs[j].1) + (centre - upper).norm();
                out.push((centre, radius));
                out.push((centre.conj(), radius));
            }
            None => out.push((z, f64::INFINITY)),
        }
    }
    out
}

fn horner_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut val = Complex64::new(0.0, 0.0);
    let mut der = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        der = der * z + val;
        val = val * z + c;
    }
    (val, der)
}

/// Weierstrass inclusion radii n·|p(z_i)|/|a_n ∏_{j≠i}(z_i − z_j)|, inflated by a
/// rigorous bound on the rounding error of the Horner evaluation.
fn inclusion_radii(coeffs: &[f64], z: &[Complex64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n].abs();
    let gamma = {
        let u = f64::EPSILON / 2.0;
        let k = (4 * n + 4) as f64;
        k * u / (1.0 - k * u)
    };
    z.iter()
        .enumerate()
        .map(|(i, &zi)| {
            let val = coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * zi + c);
            let abs_sum: f64 = coeffs.iter().rev().fold(0.0, |acc, &c| acc * zi.norm() + c.abs());
            let residual = val.norm() + gamma * abs_sum;
            let denom: f64 = z
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &zj)| (zi - zj).norm())
                .product();
            let r = n as f64 * residual / (lead * denom);
            if n == 1 {
                residual / lead
            } else {
                r * (1.0 + 1e-12)
            }
        })
        .collect()
}
