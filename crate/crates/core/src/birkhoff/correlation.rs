use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point};
use crate::tiling::{FixedPointTiling, Patch, Selection, SubstitutionRule};

use super::integral::Evaluator;
use super::profile::CylindricalFunction;

/// Largest grid pitch allowed: a quarter of the smallest prototile inradius.
pub fn max_pitch(rule: &SubstitutionRule) -> f64 {
    rule.prototiles.iter().map(|p| p.support.inradius()).fold(f64::INFINITY, f64::min) / 4.0
}

fn ambient_patch(rule: &SubstitutionRule, half: f64) -> Result<Patch> {
    let tiling = FixedPointTiling::new(rule)?;
    Ok(tiling.covering_patch(&Aabb::cube(rule.dim, half), Selection::Intersecting)?.0)
}

/// Values on the grid lo + (n + offset)·h, n < count, per axis.
fn sample_grid(eval: &Evaluator<'_>, dim: usize, lo: f64, h: f64, offset: f64, count: usize) -> Result<Vec<f64>> {
    let at = |n: usize| lo + (n as f64 + offset) * h;
    let rows = if dim == 1 { 1 } else { count };
    let values: Vec<Result<Vec<f64>>> = (0..rows)
        .into_par_iter()
        .map(|j| {
            let y = if dim == 1 { 0.0 } else { at(j) };
            (0..count).map(|i| eval.value([at(i), y])).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(rows * count);
    for row in values {
        out.extend(row?);
    }
    Ok(out)
}

/// (1/|C_T|)∫_{C_T} f(φ_{s+t}X)·conj(g(φ_t X)) dt by the midpoint rule.
pub fn correlation(
    rule: &SubstitutionRule,
    f: &CylindricalFunction,
    g: &CylindricalFunction,
    s: Point,
    horizon: f64,
) -> Result<Complex64> {
    if !(horizon > 0.0) {
        return Err(Error::Domain("the averaging cube needs T > 0".into()));
    }
    let d = rule.dim;
    let reach = horizon + s[0].abs().max(if d == 2 { s[1].abs() } else { 0.0 }) + 1.0;
    let patch = ambient_patch(rule, reach)?;
    let ef = Evaluator::new(rule, f, &patch);
    let eg = Evaluator::new(rule, g, &patch);
    let count = (2.0 * horizon / max_pitch(rule)).ceil() as usize;
    let h = 2.0 * horizon / count as f64;
    let at = |n: usize| -horizon + (n as f64 + 0.5) * h;
    let rows = if d == 1 { 1 } else { count };
    let sums: Vec<Result<f64>> = (0..rows)
        .into_par_iter()
        .map(|j| {
            let y = if d == 1 { 0.0 } else { at(j) };
            let mut acc = 0.0;
            for i in 0..count {
                let t = [at(i), y];
                acc += ef.value([t[0] + s[0], t[1] + s[1]])? * eg.value(t)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = 0.0;
    for v in sums {
        total += v?;
    }
    Ok(Complex64::new(total / (count as f64).powi(d as i32), 0.0))
}

/// Cesàro mean of squared correlations with its discretization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CesaroEstimate {
    pub radius: f64,
    pub value: f64,
    pub pitch: f64,
    /// Half-width T of the averaging cube.
    pub horizon: f64,
}

/// Averaging cube half-width as a multiple of R.
pub const DEFAULT_HORIZON_FACTOR: usize = 8;

/// (1/R^d)∫_{C_R}|correlation(s)|² ds with all shifts on one grid, the
/// correlations computed at once by FFT cross-correlation.
pub fn cesaro_correlation(
    rule: &SubstitutionRule,
    f: &CylindricalFunction,
    g: &CylindricalFunction,
    radius: f64,
    horizon_factor: usize,
) -> Result<CesaroEstimate> {
    if !(radius > 0.0) || horizon_factor == 0 {
        return Err(Error::Domain("Cesàro means need R > 0 and a positive horizon factor".into()));
    }
    let d = rule.dim;
    let shifts = (2.0 * radius / max_pitch(rule)).ceil() as usize;
    let h = 2.0 * radius / shifts as f64;
    let horizon = radius * horizon_factor as f64;
    let starts = shifts * horizon_factor;
    let patch = ambient_patch(rule, horizon + radius + h)?;
    let ef = Evaluator::new(rule, f, &patch);
    let eg = Evaluator::new(rule, g, &patch);
    // f at −(T+R) + n·h, n = 1…; g at the midpoints −T + (k + 1/2)h.
    let f_len = starts + shifts - 1;
    let fv = sample_grid(&ef, d, -(horizon + radius), h, 1.0, f_len)?;
    let gv = sample_grid(&eg, d, -horizon, h, 0.5, starts)?;
    let size = (f_len + starts).next_power_of_two();
    let corr = cross_correlate(d, &fv, f_len, &gv, starts, size);
    let norm = (starts as f64).powi(d as i32);
    let mut total = 0.0;
    let rows = if d == 1 { 1 } else { shifts };
    for j in 0..rows {
        for i in 0..shifts {
            total += (corr[j * size + i] / norm).norm_sqr();
        }
    }
    let value = total * h.powi(d as i32) / radius.powi(d as i32);
    Ok(CesaroEstimate { radius, value, pitch: h, horizon })
}

/// c[m] = Σ_k a[k + m]·conj(b[k]) for m ≥ 0, on a zero-padded `size`^d grid.
fn cross_correlate(dim: usize, a: &[f64], a_len: usize, b: &[f64], b_len: usize, size: usize) -> Vec<Complex64> {
    let rows = if dim == 1 { 1 } else { size };
    let mut fa = vec![Complex64::new(0.0, 0.0); rows * size];
    let mut fb = fa.clone();
    let a_rows = if dim == 1 { 1 } else { a_len };
    let b_rows = if dim == 1 { 1 } else { b_len };
    for j in 0..a_rows {
        for i in 0..a_len {
            fa[j * size + i] = Complex64::new(a[j * a_len + i], 0.0);
        }
    }
    for j in 0..b_rows {
        for i in 0..b_len {
            fb[j * size + i] = Complex64::new(b[j * b_len + i], 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let transform = |data: &mut Vec<Complex64>, plan: &std::sync::Arc<dyn rustfft::Fft<f64>>| {
        for row in data.chunks_mut(size) {
            plan.process(row);
        }
        if dim == 2 {
            let mut column = vec![Complex64::new(0.0, 0.0); size];
            for i in 0..size {
                for j in 0..size {
                    column[j] = data[j * size + i];
                }
                plan.process(&mut column);
                for j in 0..size {
                    data[j * size + i] = column[j];
                }
            }
        }
    };
    transform(&mut fa, &forward);
    transform(&mut fb, &forward);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y.conj();
    }
    transform(&mut fa, &inverse);
    let scale = (size as f64).powi(dim as i32);
    fa.iter_mut().for_each(|x| *x /= scale);
    fa
}
