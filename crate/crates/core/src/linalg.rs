//! Small dense linear algebra for d ≤ 2 maps and Perron–Frobenius data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// A linear map of ℝ^d for d ∈ {1, 2}, stored as a 2×2 array whose unused
/// entries are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub dim: usize,
    pub m: [[f64; 2]; 2],
}

impl LinearMap {
    pub fn new(dim: usize, m: [[f64; 2]; 2]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Dimension(format!("only d = 1 and d = 2 are supported, got {dim}")));
        }
        let mut m = m;
        if dim == 1 {
            m[0][1] = 0.0;
            m[1][0] = 0.0;
            m[1][1] = 0.0;
        }
        Ok(Self { dim, m })
    }

    pub fn scalar(lambda: f64) -> Self {
        Self { dim: 1, m: [[lambda, 0.0], [0.0, 0.0]] }
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Self { dim: 2, m: [[a, 0.0], [0.0, b]] }
    }

    pub fn identity(dim: usize) -> Self {
        if dim == 1 {
            Self::scalar(1.0)
        } else {
            Self::diag(1.0, 1.0)
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        if self.dim == 1 {
            [self.m[0][0] * p[0], 0.0]
        } else {
            [
                self.m[0][0] * p[0] + self.m[0][1] * p[1],
                self.m[1][0] * p[0] + self.m[1][1] * p[1],
            ]
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate().take(self.dim) {
            for (j, cell) in row.iter_mut().enumerate().take(self.dim) {
                *cell = (0..self.dim).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Self { dim: self.dim, m: out }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity(self.dim);
        for _ in 0..n {
            out = out.compose(self);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self { dim: self.dim, m: [[self.m[0][0], self.m[1][0]], [self.m[0][1], self.m[1][1]]] }
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut m = self.m;
        for row in m.iter_mut() {
            for c in row.iter_mut() {
                *c *= k;
            }
        }
        Self { dim: self.dim, m }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.m;
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += other.m[i][j];
            }
        }
        Self { dim: self.dim, m }
    }

    pub fn det(&self) -> f64 {
        if self.dim == 1 {
            self.m[0][0]
        } else {
            self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
        }
    }

    pub fn trace(&self) -> f64 {
        if self.dim == 1 {
            self.m[0][0]
        } else {
            self.m[0][0] + self.m[1][1]
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Internal("singular linear map".into()));
        }
        Ok(if self.dim == 1 {
            Self::scalar(1.0 / det)
        } else {
            Self {
                dim: 2,
                m: [
                    [self.m[1][1] / det, -self.m[0][1] / det],
                    [-self.m[1][0] / det, self.m[0][0] / det],
                ],
            }
        })
    }

    /// Eigenvalues, sorted by (real, imag).
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.dim == 1 {
            return vec![Complex64::new(self.m[0][0], 0.0)];
        }
        let half_tr = self.trace() / 2.0;
        let disc = half_tr * half_tr - self.det();
        let mut out = if disc >= 0.0 {
            let s = disc.sqrt();
            vec![Complex64::new(half_tr - s, 0.0), Complex64::new(half_tr + s, 0.0)]
        } else {
            let s = (-disc).sqrt();
            vec![Complex64::new(half_tr, -s), Complex64::new(half_tr, s)]
        };
        out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        out
    }

    /// Whether the map is diagonalizable over ℂ.
    pub fn is_diagonalizable(&self) -> bool {
        if self.dim == 1 {
            return true;
        }
        let ev = self.eigenvalues();
        let scale = 1.0 + ev[0].norm().max(ev[1].norm());
        if (ev[0] - ev[1]).norm() > 1e-9 * scale {
            return true;
        }
        // Repeated eigenvalue: diagonalizable only when the map is scalar.
        self.m[0][1].abs() <= 1e-12 * scale && self.m[1][0].abs() <= 1e-12 * scale
    }

    /// Operator norm induced by the sup norm on ℝ^d (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.m[i][j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        (0..self.dim)
            .flat_map(|i| (0..self.dim).map(move |j| (i, j)))
            .map(|(i, j)| self.m[i][j].abs())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.add(&other.scale(-1.0)).max_abs_entry()
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
            || (self.m[0][1] == 0.0 && self.m[1][0] == 0.0 && self.m[0][0] == self.m[1][1])
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.m[i][..self.dim].to_vec()).collect()
    }
}

/// Perron–Frobenius data of a primitive nonnegative matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Perron {
    pub eigenvalue: f64,
    /// Right eigenvector, entries summing to 1.
    pub right: Vec<f64>,
    /// Left eigenvector, entries summing to 1.
    pub left: Vec<f64>,
}

/// Power iteration on a primitive nonnegative matrix.
pub fn perron(matrix: &[Vec<f64>]) -> Result<Perron> {
    let n = matrix.len();
    if n == 0 || matrix.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("Perron data needs a nonempty square matrix".into()));
    }
    let transpose: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| matrix[j][i]).collect()).collect();
    let (eigenvalue, right) = power_iteration(matrix)?;
    let (_, left) = power_iteration(&transpose)?;
    Ok(Perron { eigenvalue, right, left })
}

fn power_iteration(a: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let n = a.len();
    // Iterating with (I + A) keeps the iteration convergent for primitive
    // matrices whose other eigenvalues may have large modulus.
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let mut w: Vec<f64> = (0..n).map(|i| v[i] + (0..n).map(|j| a[i][j] * v[j]).sum::<f64>()).collect();
        let s: f64 = w.iter().sum();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::Domain("matrix is not primitive nonnegative".into()));
        }
        for x in w.iter_mut() {
            *x /= s;
        }
        let diff = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        lambda = s - 1.0;
        if diff < 1e-15 {
            break;
        }
    }
    // Rayleigh-type readoff on the converged vector.
    let av: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * v[j]).sum()).collect();
    let num: f64 = av.iter().sum();
    let den: f64 = v.iter().sum();
    if den > 0.0 {
        lambda = num / den;
    }
    Ok((lambda, v))
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &bi)| {
        let mut row = r.clone();
        row.push(bi);
        row
    }).collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .expect("nonempty");
        if m[p][c].abs() < 1e-300 {
            return Err(Error::Internal("singular linear system".into()));
        }
        m.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                if f != 0.0 {
                    for k in c..=n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    Ok((0..n).map(|i| m[i][n] / m[i][i]).collect())
}
