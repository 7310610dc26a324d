//! ε-sequence diagnostics, the eigenvalue criterion and the weak-mixing
//! verdict for a substitution.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebraic::{classify_family, companion, group_spectrum, AlgebraicSpectrumReport};
use crate::error::{Error, Result};
use crate::geometry::{dot, Point};
use crate::tiling::{
    adjacency_differences, default_generators, generator_data, is_primitive, supertile, GeneratorData, Primitivity,
    SubstitutionRule,
};

/// Longest ε-trace accepted.
pub const MAX_TRACE_LENGTH: usize = 10_000;
/// Default Z in the window [n, Zn].
pub const DEFAULT_WINDOW_RATIO: usize = 4;
/// Trailing indices that must stay below [`CONVERGENCE_TOL`].
pub const CONVERGENCE_WINDOW: usize = 10;
pub const CONVERGENCE_TOL: f64 = 1e-3;
/// Trace length for eigenvalue searches. Rounding errors grow like ‖L‖ⁿ
/// along the expanding directions, so traces much longer than this stop
/// resolving an exact eigenvalue.
pub const SEARCH_STEPS: usize = 48;

/// x minus the nearest integer, in (−1/2, 1/2].
pub fn centered_frac(x: f64) -> f64 {
    x - (x - 0.5).ceil()
}

/// ‖ω‖_V = max_i |ω·v_i|.
pub fn omega_v_norm(omega: Point, vectors: &[Point]) -> f64 {
    vectors.iter().map(|&v| dot(omega, v).abs()).fold(0.0, f64::max)
}

/// Generators from the adjacency differences of all second-order supertiles.
pub fn rule_generator_data(rule: &SubstitutionRule) -> Result<GeneratorData> {
    let mut differences = Vec::new();
    for kind in 0..rule.type_count() {
        differences.extend(adjacency_differences(rule, &supertile(rule, kind, 2)?));
    }
    generator_data(rule, &default_generators(rule, &differences))
}

/// δ₀ of the companion matrix of the minimal polynomial of M.
pub fn delta0(data: &GeneratorData) -> Result<f64> {
    let c = companion(&data.m.min_poly()?)?;
    c.delta0.to_f64().ok_or_else(|| Error::Precision("δ₀ is not representable".into()))
}

/// ε_n, the centered fractional parts of Vᵀ(Lᵀ)ⁿω, from ε_{n+1} = {Mᵀε_n}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonTrace {
    pub omega: Point,
    /// Vᵀω.
    pub omega_tilde: Vec<f64>,
    pub eps: Vec<Vec<f64>>,
    /// ‖ε_n‖_∞.
    pub norms: Vec<f64>,
}

fn transpose_entries(data: &GeneratorData) -> Result<Vec<Vec<f64>>> {
    let m = data
        .m
        .to_i64()
        .ok_or_else(|| Error::Precision("generator matrix entries exceed 64 bits".into()))?;
    let n = data.count();
    Ok((0..n).map(|i| (0..n).map(|j| m[j][i] as f64).collect()).collect())
}

pub fn epsilon_trace(data: &GeneratorData, omega: Point, n_max: usize) -> Result<EpsilonTrace> {
    if n_max > MAX_TRACE_LENGTH {
        return Err(Error::Domain(format!("trace length {n_max} exceeds {MAX_TRACE_LENGTH}")));
    }
    let mt = transpose_entries(data)?;
    let tilde: Vec<Compensated> = data
        .vectors
        .iter()
        .map(|&v| Compensated::ZERO.add_product(omega[0], v[0], 0.0).add_product(omega[1], v[1], 0.0))
        .collect();
    let omega_tilde = tilde.iter().map(|c| c.hi).collect();
    let mut current: Vec<Compensated> = tilde.iter().map(|c| c.reduce()).collect();
    let mut eps = Vec::with_capacity(n_max + 1);
    for _ in 0..n_max {
        let next = mt
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&current)
                    .fold(Compensated::ZERO, |acc, (&a, e)| acc.add_product(a, e.hi, e.lo))
                    .reduce()
            })
            .collect();
        eps.push(current.iter().map(|c| c.hi).collect());
        current = next;
    }
    eps.push(current.iter().map(|c| c.hi).collect());
    let norms = eps.iter().map(|e: &Vec<f64>| e.iter().fold(0.0_f64, |m, x| m.max(x.abs()))).collect();
    Ok(EpsilonTrace { omega, omega_tilde, eps, norms })
}

/// hi + lo with |lo| at most half an ulp of hi. Residues carry the rounding
/// error of each step forward instead of letting it grow with ‖M‖ⁿ.
#[derive(Debug, Clone, Copy)]
struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Self { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    /// self + a·(hi + lo).
    fn add_product(self, a: f64, hi: f64, lo: f64) -> Self {
        let p = a * hi;
        let err = a.mul_add(hi, -p) + a * lo;
        let s = Self::two_sum(self.hi, p);
        Self::two_sum(s.hi, s.lo + self.lo + err)
    }

    /// Centered residue modulo 1; the integer shifts are exact.
    fn reduce(self) -> Self {
        let t = Self::two_sum(centered_frac(self.hi), self.lo);
        let hi = centered_frac(t.hi);
        Self::two_sum(hi, t.lo)
    }
}

/// The first n whose window [n, Zn] holds some ‖ε_m‖_∞ ≥ δ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowWitness {
    pub start: usize,
    pub index: usize,
    pub value: f64,
}

/// Scans windows that fit in the trace; `None` when no window reaches δ₀.
pub fn window_check(trace: &EpsilonTrace, delta0: f64, ratio: usize) -> Option<WindowWitness> {
    let ratio = ratio.max(1);
    let len = trace.norms.len();
    (0..len).take_while(|&n| n * ratio < len).find_map(|n| {
        (n..=n * ratio)
            .find(|&m| trace.norms[m] >= delta0)
            .map(|m| WindowWitness { start: n, index: m, value: trace.norms[m] })
    })
}

/// max_i |e[(Lᵀ)ⁿω·v_i] − 1| per n, read off the ε-trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueDiagnostic {
    pub omega: Point,
    pub deviations: Vec<f64>,
    /// Largest ‖ε_n‖_∞ over the trailing window.
    pub trailing_eps: f64,
    pub convergent: bool,
}

pub fn eigenvalue_criterion(data: &GeneratorData, omega: Point, n_max: usize) -> Result<EigenvalueDiagnostic> {
    if n_max + 1 < CONVERGENCE_WINDOW {
        return Err(Error::Domain(format!("the criterion needs at least {CONVERGENCE_WINDOW} trace entries")));
    }
    let trace = epsilon_trace(data, omega, n_max)?;
    let deviations: Vec<f64> = trace
        .eps
        .iter()
        .map(|e| e.iter().map(|x| 2.0 * (std::f64::consts::PI * x).sin().abs()).fold(0.0, f64::max))
        .collect();
    let tail = trace.norms.len() - CONVERGENCE_WINDOW;
    let trailing_eps = trace.norms[tail..].iter().fold(0.0_f64, |m, &x| m.max(x));
    let convergent = deviations[tail..].iter().all(|&x| x < CONVERGENCE_TOL);
    Ok(EigenvalueDiagnostic { omega, deviations, trailing_eps, convergent })
}

/// Outcome of running the eigenvalue criterion over a list of frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueSearch {
    pub tested: usize,
    /// Frequencies that passed, with their trailing ‖ε‖_∞.
    pub convergent: Vec<(Point, f64)>,
}

pub fn eigenvalue_search(data: &GeneratorData, omegas: &[Point], n_max: usize) -> Result<EigenvalueSearch> {
    let results: Vec<Result<EigenvalueDiagnostic>> =
        omegas.par_iter().map(|&w| eigenvalue_criterion(data, w, n_max)).collect();
    let mut convergent = Vec::new();
    for r in results {
        let r = r?;
        if r.convergent {
            convergent.push((r.omega, r.trailing_eps));
        }
    }
    Ok(EigenvalueSearch { tested: omegas.len(), convergent })
}

/// Hypotheses that cannot be decided by the library.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Assertions {
    pub aperiodic: bool,
    pub injective: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    WeaklyMixingByThm,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakMixingVerdict {
    pub algebraic: AlgebraicSpectrumReport,
    pub primitivity: Primitivity,
    pub diagonalizable: bool,
    pub assertions: Assertions,
    pub verdict: Verdict,
    /// Unmet hypotheses when the verdict is inconclusive.
    pub reasons: Vec<String>,
}

/// Classifies the spectrum of L through the generator matrix and checks the
/// weak-mixing hypotheses: primitive, injective (asserted),
/// aperiodic (asserted), L diagonalizable with a totally non-Pisot spectrum.
pub fn classify_substitution(rule: &SubstitutionRule, assertions: Assertions) -> Result<WeakMixingVerdict> {
    let data = rule_generator_data(rule)?;
    let groups = group_spectrum(&rule.expansion.eigenvalues(), &data.m.char_poly()?)?;
    let algebraic = classify_family(&groups)?;
    let primitivity = is_primitive(&rule.substitution_matrix());
    let diagonalizable = rule.expansion.is_diagonalizable();
    let mut reasons = Vec::new();
    if !primitivity.primitive {
        reasons.push("the substitution matrix is not primitive".to_string());
    }
    if !assertions.aperiodic {
        reasons.push("aperiodicity was not asserted".to_string());
    }
    if !assertions.injective {
        reasons.push("injectivity was not asserted".to_string());
    }
    if !diagonalizable {
        reasons.push("the expansion is not diagonalizable".to_string());
    }
    if !algebraic.verdict.is_totally_non_pisot() {
        reasons.push(format!("the spectrum is {:?}, not totally non-Pisot", algebraic.verdict));
    }
    let verdict = if reasons.is_empty() { Verdict::WeaklyMixingByThm } else { Verdict::Inconclusive };
    Ok(WeakMixingVerdict { algebraic, primitivity, diagonalizable, assertions, verdict, reasons })
}
