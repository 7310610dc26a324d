//! Structure factors, the spectral cocycle Π_n(ω) and its Riesz-product
//! decay bound.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::algebraic::IntMatrix;
use crate::error::{Error, Result};
use crate::geometry::{dot, Point};
use crate::tiling::{good_return_vectors, validate, GoodReturnVector, Patch, SubstitutionRule};

/// Arguments whose magnitude exceeds this lose all fractional precision in f64.
pub const PRECISION_LIMIT: f64 = 4_503_599_627_370_496.0; // 2^52

/// Distance from `tau` to the nearest integer.
pub fn torus_norm(tau: f64) -> f64 {
    (tau - tau.round()).abs()
}

/// e[τ] = exp(2πiτ), with τ reduced mod 1 first.
pub fn expi(tau: f64) -> Complex64 {
    let r = tau - tau.floor();
    Complex64::cis(TAU * r)
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexMatrix {
    pub size: usize,
    pub data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(size: usize) -> Self {
        Self { size, data: vec![Complex64::new(0.0, 0.0); size * size] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m.data[i * size + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.size + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.size;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn abs_rows(&self) -> Vec<Vec<f64>> {
        (0..self.size).map(|i| (0..self.size).map(|j| self.get(i, j).norm()).collect()).collect()
    }
}

/// Φ_i(P, ω): exponential sum over the punctures of type-`kind` tiles.
pub fn structure_factor(patch: &Patch, kind: usize, omega: Point) -> Complex64 {
    patch
        .tiles
        .iter()
        .filter(|t| t.kind == kind)
        .map(|t| expi(dot(omega, t.translation)))
        .sum()
}

/// 𝓜_q(ω) with entry (j, k) = Σ_l e[ω·L^q s^k_l(j)].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CocycleStep {
    pub omega: Point,
    pub level: usize,
    pub matrix: ComplexMatrix,
}

fn scaled_displacements(rule: &SubstitutionRule, level: usize) -> Result<Vec<Vec<(usize, Point)>>> {
    let lq = rule.expansion.pow(level as u32);
    let reach = lq.norm_inf() * rule.displacement_scale();
    if !(reach <= PRECISION_LIMIT) {
        return Err(Error::Precision(format!(
            "level {level}: ‖L^q‖·max|s| = {reach:.3e} exceeds 2^52"
        )));
    }
    Ok(rule
        .children
        .iter()
        .map(|list| list.iter().map(|c| (c.kind, lq.apply(c.displacement))).collect())
        .collect())
}

pub fn step_matrix(rule: &SubstitutionRule, level: usize, omega: Point) -> Result<CocycleStep> {
    let m = rule.type_count();
    let mut matrix = ComplexMatrix::zeros(m);
    for (j, list) in scaled_displacements(rule, level)?.into_iter().enumerate() {
        for (k, s) in list {
            matrix.data[j * m + k] += expi(dot(omega, s));
        }
    }
    Ok(CocycleStep { omega, level, matrix })
}

/// Π_n(ω) = 𝓜_{n−1}(ω)⋯𝓜_0(ω); entry (k, i) is Φ_i(ζ^n(T_k), ω).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CocycleProduct {
    pub omega: Point,
    pub n: usize,
    pub matrix: ComplexMatrix,
}

pub fn cocycle_product(rule: &SubstitutionRule, n: usize, omega: Point) -> Result<CocycleProduct> {
    let mut matrix = ComplexMatrix::identity(rule.type_count());
    for q in 0..n {
        matrix = step_matrix(rule, q, omega)?.matrix.mul(&matrix);
    }
    Ok(CocycleProduct { omega, n, matrix })
}

/// Products Π_1, …, Π_n in one pass.
pub fn cocycle_products(rule: &SubstitutionRule, n: usize, omega: Point) -> Result<Vec<ComplexMatrix>> {
    let mut matrix = ComplexMatrix::identity(rule.type_count());
    let mut out = Vec::with_capacity(n);
    for q in 0..n {
        matrix = step_matrix(rule, q, omega)?.matrix.mul(&matrix);
        out.push(matrix.clone());
    }
    Ok(out)
}

/// #ζ^n(T_j) for every j, as floats.
pub fn supertile_counts(rule: &SubstitutionRule, n: usize) -> Vec<f64> {
    let s = rule.substitution_matrix().pow(n);
    column_sums(&s)
}

fn column_sums(s: &IntMatrix) -> Vec<f64> {
    (0..s.cols())
        .map(|j| (0..s.rows()).map(|i| s[(i, j)].to_f64().unwrap_or(f64::INFINITY)).sum())
        .collect()
}

fn max_entry(s: &IntMatrix) -> f64 {
    s.max_abs().to_f64().unwrap_or(f64::INFINITY)
}

/// Ξ[x] for a witness coordinate.
pub fn xi(x: &[f64], witness: usize, max_substitution_entry: f64) -> f64 {
    let m = x.len() as f64;
    let top = x.iter().copied().fold(0.0, f64::max);
    x[witness] / (2.0 * m * max_substitution_entry * top)
}

/// The mass constant 𝔪 of the Riesz bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassConstant {
    pub mass: f64,
    /// inf_l Ξ[(𝒮ᵀ)^l 1] before clamping.
    pub infimum: f64,
    /// (‖L‖ − 1)/(‖L‖ + 1).
    pub clamp: f64,
    /// Ξ[(𝒮ᵀ)^l 1] for l = 0, 1, ….
    pub levels: Vec<f64>,
    /// Prototile types realizing some good return vector.
    pub witness_types: Vec<usize>,
}

fn witness_types(grv: &[GoodReturnVector]) -> Vec<usize> {
    let mut kinds: Vec<usize> = grv.iter().flat_map(|g| g.witness_types.iter().flatten().copied()).collect();
    kinds.sort_unstable();
    kinds.dedup();
    kinds
}

fn require_good_return_vectors(rule: &SubstitutionRule) -> Result<Vec<GoodReturnVector>> {
    let grv = good_return_vectors(rule);
    if grv.is_empty() {
        return Err(Error::Precondition(
            "the rule has no good return vectors; pass to a power of it with rule_power".into(),
        ));
    }
    Ok(grv)
}

const MAX_MASS_LEVELS: usize = 10_000;

pub fn mass_constant(rule: &SubstitutionRule) -> Result<MassConstant> {
    let grv = require_good_return_vectors(rule)?;
    let kinds = witness_types(&grv);
    let st = rule.substitution_matrix().transpose();
    let st_f = st.to_f64();
    let top = max_entry(&st);
    let m = rule.type_count();
    let level_xi = |x: &[f64]| kinds.iter().map(|&k| xi(x, k, top)).fold(f64::INFINITY, f64::min);
    let mut x = vec![1.0; m];
    let mut levels = vec![level_xi(&x)];
    for _ in 0..MAX_MASS_LEVELS {
        let mut next: Vec<f64> = (0..m).map(|j| (0..m).map(|l| st_f[j][l] * x[l]).sum()).collect();
        let norm = next.iter().copied().fold(0.0, f64::max);
        next.iter_mut().for_each(|v| *v /= norm);
        let change = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = next;
        levels.push(level_xi(&x));
        if change < 1e-10 {
            break;
        }
    }
    let infimum = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let l = rule.expansion.norm_inf();
    let clamp = (l - 1.0) / (l + 1.0);
    Ok(MassConstant { mass: infimum.min(clamp), infimum, clamp, levels, witness_types: kinds })
}

/// Scalar Riesz product ∏_{l<n} (1 − 𝔪 max_v ‖ω·L^l v‖²).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RieszBound {
    pub mass: f64,
    pub factors: Vec<f64>,
    pub product: f64,
}

impl RieszBound {
    /// Partial products F(0) = 1, F(1), …, F(n).
    pub fn partial_products(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.factors.len() + 1);
        let mut acc = 1.0;
        out.push(acc);
        for f in &self.factors {
            acc *= f;
            out.push(acc);
        }
        out
    }
}

/// max_v ‖ω·L^l v‖ over the given vectors.
pub fn max_torus_projection(rule: &SubstitutionRule, level: usize, omega: Point, vectors: &[Point]) -> f64 {
    let lq = rule.expansion.pow(level as u32);
    vectors.iter().map(|&v| torus_norm(dot(omega, lq.apply(v)))).fold(0.0, f64::max)
}

pub fn riesz_bound(rule: &SubstitutionRule, mass: f64, n: usize, omega: Point, vectors: &[Point]) -> RieszBound {
    let factors: Vec<f64> = (0..n)
        .map(|l| {
            let t = max_torus_projection(rule, l, omega, vectors);
            1.0 - mass * t * t
        })
        .collect();
    let product = factors.iter().product();
    RieszBound { mass, factors, product }
}

/// Outcome of the one-step domination check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepInequality {
    pub holds: bool,
    /// min_j (right side − left side).
    pub slack: f64,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// The maximizing good return vector.
    pub vector: Point,
}

/// Checks |𝓜_q|x(j) ≤ (1 − Ξ[x]‖ω·L^q v‖²)·𝒮ᵀx(j) for the maximizing good
/// return vector v, with Ξ taken at the witness type of v inside ζ(T_j).
pub fn step_inequality_check(rule: &SubstitutionRule, level: usize, omega: Point, x: &[f64]) -> Result<StepInequality> {
    let m = rule.type_count();
    if x.len() != m || x.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Precondition("x must be a positive vector with one entry per type".into()));
    }
    let grv = require_good_return_vectors(rule)?;
    let lq = rule.expansion.pow(level as u32);
    let (best, tau) = grv
        .iter()
        .map(|g| (g, torus_norm(dot(omega, lq.apply(g.vector)))))
        .fold((&grv[0], -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let step = step_matrix(rule, level, omega)?;
    let st = rule.substitution_matrix().transpose();
    let st_f = st.to_f64();
    let top = max_entry(&st);
    let abs = step.matrix.abs_rows();
    let mut lhs = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for j in 0..m {
        lhs.push((0..m).map(|l| abs[j][l] * x[l]).sum::<f64>());
        let witness = best.witness_types[j]
            .iter()
            .copied()
            .max_by(|&a, &b| x[a].total_cmp(&x[b]))
            .expect("good return vectors have witnesses in every parent");
        let sx: f64 = (0..m).map(|l| st_f[j][l] * x[l]).sum();
        rhs.push((1.0 - xi(x, witness, top) * tau * tau) * sx);
    }
    let slack = lhs.iter().zip(&rhs).map(|(l, r)| r - l).fold(f64::INFINITY, f64::min);
    let scale = rhs.iter().copied().fold(1.0, f64::max);
    Ok(StepInequality { holds: slack >= -1e-12 * scale, slack, lhs, rhs, vector: best.vector })
}

/// c₁ ≤ min_j #ζ^k(T_j)/θ^k ≤ max_j #ζ^k(T_j)/θ^k ≤ c₂ over k ≤ `levels`.
pub fn perron_sandwich(rule: &SubstitutionRule, theta: f64, levels: usize) -> (f64, f64) {
    let s = rule.substitution_matrix();
    let mut power = IntMatrix::identity(rule.type_count());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for k in 0..=levels {
        let scale = theta.powi(k as i32);
        for c in column_sums(&power) {
            lo = lo.min(c / scale);
            hi = hi.max(c / scale);
        }
        power = &s * &power;
    }
    (lo, hi)
}

/// An explicit bound C·(R^d F(N) + R^{d−1}) on |S^f_R| for an indicator
/// observable, with N = ⌊log_{‖L‖} R⌋.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorGrowthBound {
    pub constant: f64,
    pub order: usize,
    /// R^d F(N).
    pub leading: f64,
    /// R^{d−1}.
    pub boundary: f64,
    pub bound: f64,
}

/// Tower-counting bound on a twisted Birkhoff integral of a tile indicator.
///
/// The patch ]C_R[ splits into maximal supertiles R^k. Supertiles of order
/// k < top meet the boundary layer of width D_max‖L‖^{k+1} and each holds
/// volume at least V_min θ^k, which caps #R^k; every order is also capped by
/// the cube volume. Each order-k supertile contributes at most
/// max_j #ζ^k(T_j)·F(k), and F(k) ≤ ξ^{N−k}F(N) converts the sum to the
/// stated form. The constant is the ratio of this sum to the two terms.
pub fn factor_growth_bound(rule: &SubstitutionRule, radius: f64, sequence: &[f64]) -> Result<FactorGrowthBound> {
    if !(radius >= 2.0) {
        return Err(Error::Domain(format!("R = {radius} must be at least 2")));
    }
    let stats = validate(rule)?;
    let norm = rule.expansion.norm_inf();
    let xi_ratio = (norm + 1.0) / 2.0;
    for (n, w) in sequence.windows(2).enumerate() {
        let (now, next) = (w[0], w[1]);
        if !(now / xi_ratio <= next * (1.0 + 1e-12) && next <= now * (1.0 + 1e-12)) {
            return Err(Error::Contract(format!(
                "F({n}) = {now}, F({}) = {next} violate F(n)/ξ ≤ F(n+1) ≤ F(n) with ξ = {xi_ratio}",
                n + 1
            )));
        }
    }
    let d = rule.dim as i32;
    let cube = (2.0 * radius).powi(d);
    let theta = stats.theta;
    let top_order = ((cube / stats.v_min).ln() / theta.ln()).floor().max(0.0) as usize;
    if sequence.len() <= top_order {
        return Err(Error::Precondition(format!(
            "the sequence must extend to order {top_order}, got {} terms",
            sequence.len()
        )));
    }
    let layer = |width: f64| {
        let inner = (2.0 * radius - 2.0 * width).max(0.0);
        ((2.0 * radius + 2.0 * width).powi(d) - inner.powi(d)).min(cube)
    };
    let order = (radius.ln() / norm.ln()).floor() as usize;
    let f_at = |k: usize| sequence[k.min(sequence.len() - 1)];
    let s = rule.substitution_matrix();
    let mut power = IntMatrix::identity(rule.type_count());
    let mut tower_sum = 0.0;
    for k in 0..=top_order {
        let largest = column_sums(&power).into_iter().fold(0.0, f64::max);
        let width = stats.d_max * norm.powi(k as i32 + 1);
        // The top order is not confined to the boundary layer.
        let blocks = layer(width).max(if k == top_order { cube } else { 0.0 }) / (stats.v_min * theta.powi(k as i32));
        let decay = if k < order { xi_ratio.powi((order - k) as i32) } else { 1.0 };
        tower_sum += blocks.min(cube / (stats.v_min * theta.powi(k as i32))) * largest * decay;
        power = &s * &power;
    }
    let leading = radius.powi(d) * f_at(order);
    let boundary = radius.powi(d - 1);
    let main = stats.v_max * tower_sum * f_at(order);
    let delta = layer(stats.d_max);
    let constant = (main / leading).max(delta / boundary);
    Ok(FactorGrowthBound { constant, order, leading, boundary, bound: constant * (leading + boundary) })
}

/// Largest |Π_n(ω)(k, i)| / #ζ^n(T_k) across the matrix.
pub fn normalized_product_max(rule: &SubstitutionRule, product: &CocycleProduct) -> f64 {
    let counts = supertile_counts(rule, product.n);
    let m = rule.type_count();
    (0..m)
        .flat_map(|k| (0..m).map(move |i| (k, i)))
        .map(|(k, i)| product.matrix.get(k, i).norm() / counts[k])
        .fold(0.0, f64::max)
}

/// Maximum over a list of vectors of |ω·v|.
pub fn projection_norm(omega: Point, vectors: &[Point]) -> f64 {
    vectors.iter().map(|&v| dot(omega, v).abs()).fold(0.0, f64::max)
}
