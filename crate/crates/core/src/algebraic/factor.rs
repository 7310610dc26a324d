use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::matrix::IntMatrix;
use super::poly::IntPolynomial;
use super::roots::squarefree_roots;
use crate::error::{Error, Result};

/// Largest degree accepted by [`irreducible_factors`].
pub const MAX_FACTOR_DEGREE: usize = 12;

/// Irreducible factorization over ℤ: `content · ∏ factor^multiplicity`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Factorization {
    /// Signed content, so the product of all parts reproduces the input.
    pub content: BigInt,
    /// Primitive irreducible factors with positive leading coefficient.
    pub factors: Vec<(IntPolynomial, usize)>,
}

impl Factorization {
    pub fn product(&self) -> IntPolynomial {
        self.factors
            .iter()
            .fold(IntPolynomial::constant(self.content.clone()), |acc, (f, m)| &acc * &f.pow(*m))
    }
}

/// Factors `p` into irreducibles by grouping certified complex roots into
/// conjugate-closed subsets, rounding the candidate factor coefficients and
/// checking each candidate by exact division.
pub fn irreducible_factors(p: &IntPolynomial) -> Result<Factorization> {
    if p.is_zero() {
        return Err(Error::Domain("cannot factor the zero polynomial".into()));
    }
    if p.degree() > MAX_FACTOR_DEGREE {
        return Err(Error::UnsupportedDegree { degree: p.degree(), limit: MAX_FACTOR_DEGREE });
    }
    let mut content = p.content();
    if p.leading().is_negative() {
        content = -content;
    }
    let mut factors = Vec::new();
    for (part, mult) in p.squarefree_decomposition() {
        for f in factor_squarefree(&part)? {
            factors.push((f, mult));
        }
    }
    factors.sort_by_key(|a| factor_key(&a.0));
    let out = Factorization { content, factors };
    if out.product() != *p {
        return Err(Error::Internal(format!("factorization of {p} does not reproduce the input")));
    }
    Ok(out)
}

pub(crate) fn factor_key(p: &IntPolynomial) -> (usize, BigInt, Vec<BigInt>) {
    (p.degree(), p.height(), p.coeffs().iter().rev().cloned().collect())
}

/// A root or a conjugate pair; candidate factors are unions of units.
#[derive(Clone, Copy)]
enum RootUnit {
    Real(f64),
    Pair(Complex64),
}

impl RootUnit {
    fn size(self) -> usize {
        match self {
            Self::Real(_) => 1,
            Self::Pair(_) => 2,
        }
    }
}

fn factor_squarefree(q: &IntPolynomial) -> Result<Vec<IntPolynomial>> {
    if q.degree() <= 1 {
        return Ok(vec![q.primitive_part()]);
    }
    let roots = squarefree_roots(q, 1e-8)?;
    let mut units: Vec<RootUnit> = roots
        .iter()
        .filter(|(z, _)| z.im >= 0.0)
        .map(|&(z, _)| if z.im == 0.0 { RootUnit::Real(z.re) } else { RootUnit::Pair(z) })
        .collect();
    let mut current = q.primitive_part();
    let mut out = Vec::new();
    'outer: while current.degree() > 1 {
        for size in 1..=current.degree() / 2 {
            for subset in subsets_of_size(&units, size) {
                let chosen: Vec<RootUnit> = subset.iter().map(|&i| units[i]).collect();
                if let Some(f) = try_candidate(&current, &chosen)? {
                    current = current.div_exact(&f).expect("verified divisor");
                    let mut keep = Vec::with_capacity(units.len());
                    for (i, u) in units.iter().enumerate() {
                        if !subset.contains(&i) {
                            keep.push(*u);
                        }
                    }
                    units = keep;
                    out.push(f);
                    continue 'outer;
                }
            }
        }
        break;
    }
    if current.degree() >= 1 {
        out.push(current.primitive_part());
    }
    Ok(out)
}

fn subsets_of_size(units: &[RootUnit], size: usize) -> Vec<Vec<usize>> {
    fn rec(units: &[RootUnit], start: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..units.len() {
            let s = units[i].size();
            if s <= left {
                cur.push(i);
                rec(units, i + 1, left - s, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(units, 0, size, &mut Vec::new(), &mut out);
    out
}

fn try_candidate(current: &IntPolynomial, chosen: &[RootUnit]) -> Result<Option<IntPolynomial>> {
    // Monic real polynomial with the chosen roots, built in f64.
    let mut g = vec![1.0_f64];
    for unit in chosen {
        let factor = match *unit {
            RootUnit::Real(x) => vec![-x, 1.0],
            RootUnit::Pair(z) => vec![z.norm_sqr(), -2.0 * z.re, 1.0],
        };
        let mut next = vec![0.0; g.len() + factor.len() - 1];
        for (i, a) in g.iter().enumerate() {
            for (j, b) in factor.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        g = next;
    }
    let lead = current.leading().abs();
    for c in divisors(&lead) {
        let cf = c.to_f64().unwrap_or(f64::INFINITY);
        let scaled: Vec<f64> = g.iter().map(|x| x * cf).collect();
        if scaled.iter().any(|x| !x.is_finite() || x.abs() > 2f64.powi(50)) {
            return Err(Error::Precision(format!(
                "candidate factor coefficients of {current} exceed the exactly representable range"
            )));
        }
        let rounded: Vec<BigInt> = scaled
            .iter()
            .map(|x| BigInt::from_f64(x.round()).expect("finite"))
            .collect();
        let cand = IntPolynomial::new(rounded);
        if cand.degree() + 1 != g.len() {
            continue;
        }
        if current.div_exact(&cand).is_some() {
            return Ok(Some(cand.primitive_part()));
        }
    }
    Ok(None)
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            small.push(d.clone());
            let other = &n / &d;
            if other != d {
                large.push(other);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Companion matrix and the threshold δ₀ = 1/(1 + Σ|c_i|) for a monic
/// polynomial x^t − c_{t−1}x^{t−1} − ⋯ − c₀.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompanionData {
    /// Ones on the superdiagonal, last row c₀ … c_{t−1}.
    pub matrix: IntMatrix,
    #[serde(serialize_with = "serialize_rational")]
    pub delta0: BigRational,
}

fn serialize_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn companion(p: &IntPolynomial) -> Result<CompanionData> {
    if p.degree() == 0 {
        return Err(Error::Domain("companion matrix needs degree at least 1".into()));
    }
    if !p.is_monic() {
        return Err(Error::Normalization(p.to_string()));
    }
    let t = p.degree();
    let cs: Vec<BigInt> = (0..t).map(|i| -p.coeff(i)).collect();
    let mut matrix = IntMatrix::zeros(t, t);
    for i in 0..t - 1 {
        matrix[(i, i + 1)] = BigInt::one();
    }
    for (j, c) in cs.iter().enumerate() {
        matrix[(t - 1, j)] = c.clone();
    }
    let sum: BigInt = cs.iter().map(|c| c.abs()).sum();
    let delta0 = BigRational::new(BigInt::one(), BigInt::one() + sum);
    Ok(CompanionData { matrix, delta0 })
}

/// Max |coefficient|.
pub fn height(p: &IntPolynomial) -> BigInt {
    p.height()
}
