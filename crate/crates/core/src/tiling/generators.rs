use num_bigint::BigInt;
use serde::Serialize;

use crate::algebraic::IntMatrix;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm_inf, sub, Aabb, Point};
use crate::linalg::solve;

use super::patch::{Patch, PatchIndex};
use super::rule::SubstitutionRule;

/// Sorts points lexicographically and merges those closer than `tol`.
fn dedup_points(mut v: Vec<Point>, tol: f64) -> Vec<Point> {
    v.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut out: Vec<Point> = Vec::with_capacity(v.len());
    for p in v {
        if !out.iter().rev().take(64).any(|q| norm_inf(sub(p, *q)) <= tol) {
            out.push(p);
        }
    }
    out
}

/// Puncture differences of tiles whose supports touch.
pub fn adjacency_differences(rule: &SubstitutionRule, patch: &Patch) -> Vec<Point> {
    if patch.len() < 2 {
        return Vec::new();
    }
    let tol = 1e-9;
    let index = PatchIndex::new(rule, patch);
    let supports: Vec<_> = (0..patch.len()).map(|i| patch.support_of(rule, i)).collect();
    let mut diffs = Vec::new();
    for (i, si) in supports.iter().enumerate() {
        let b = si.bbox();
        let grown = Aabb { lo: [b.lo[0] - tol, b.lo[1] - tol], hi: [b.hi[0] + tol, b.hi[1] + tol] };
        for j in index.query(&grown) {
            if j != i && si.intersects(&supports[j], tol) {
                diffs.push(sub(patch.tiles[j].translation, patch.tiles[i].translation));
            }
        }
    }
    dedup_points(diffs, 1e-9 * patch.extent())
}

/// A vector realized between two same-type children in every ζ(T_j).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodReturnVector {
    pub vector: Point,
    /// `witness_types[j]` lists the child types realizing the vector in ζ(T_j).
    pub witness_types: Vec<Vec<usize>>,
}

/// Good return vectors of the rule; empty when some ζ(T_j) has no repeated
/// type realizing a common difference (pass to a power of the rule).
pub fn good_return_vectors(rule: &SubstitutionRule) -> Vec<GoodReturnVector> {
    let tol = 1e-9 * rule.displacement_scale();
    let per_parent: Vec<Vec<(Point, usize)>> = rule
        .children
        .iter()
        .map(|list| {
            let mut v = Vec::new();
            for (a, ca) in list.iter().enumerate() {
                for (b, cb) in list.iter().enumerate() {
                    if a != b && ca.kind == cb.kind {
                        v.push((sub(cb.displacement, ca.displacement), ca.kind));
                    }
                }
            }
            v
        })
        .collect();
    let Some(first) = per_parent.first() else { return Vec::new() };
    let candidates = dedup_points(first.iter().map(|(p, _)| *p).collect(), tol);
    candidates
        .into_iter()
        .filter_map(|v| {
            let witness_types: Vec<Vec<usize>> = per_parent
                .iter()
                .map(|list| {
                    let mut kinds: Vec<usize> = list
                        .iter()
                        .filter(|(p, _)| norm_inf(sub(*p, v)) <= tol)
                        .map(|&(_, k)| k)
                        .collect();
                    kinds.sort_unstable();
                    kinds.dedup();
                    kinds
                })
                .collect();
            witness_types
                .iter()
                .all(|k| !k.is_empty())
                .then_some(GoodReturnVector { vector: v, witness_types })
        })
        .collect()
}

/// Generators V (columns) with an integer matrix M such that LV = VM.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorData {
    pub vectors: Vec<Point>,
    pub m: IntMatrix,
    /// ‖LV − VM‖_max.
    pub residual: f64,
}

impl GeneratorData {
    pub fn count(&self) -> usize {
        self.vectors.len()
    }
}

/// Largest free integer coefficient tried when writing L·v_i in the generators.
const COEFFICIENT_BOUND: i64 = 8;

/// Finds the integer matrix M with L·v_i = Σ_j M(j, i) v_j for every
/// generator. The d×d system on a well-conditioned basis subset is solved
/// for each choice of the remaining integer coefficients in a bounded box,
/// rounded and verified.
pub fn generator_data(rule: &SubstitutionRule, generators: &[Point]) -> Result<GeneratorData> {
    let d = rule.dim;
    let n = generators.len();
    if n < d {
        return Err(Error::NonIntegrality(format!("{n} generators cannot span R^{d}")));
    }
    if n - d > 6 {
        return Err(Error::NonIntegrality(format!("{n} generators exceed the search limit")));
    }
    let basis = best_basis(d, generators)
        .ok_or_else(|| Error::NonIntegrality("generators do not span the space".into()))?;
    let free: Vec<usize> = (0..n).filter(|i| !basis.contains(i)).collect();
    let l = rule.expansion;
    let v_max = generators.iter().map(|&v| norm_inf(v)).fold(0.0, f64::max);
    let limit = 1e-8 * l.norm_inf() * v_max;
    let mut m = IntMatrix::zeros(n, n);
    let mut residual: f64 = 0.0;
    for (i, &gen) in generators.iter().enumerate() {
        let target = l.apply(gen);
        let (col, res) = integer_column(d, generators, &basis, &free, target, limit).ok_or_else(|| {
            Error::NonIntegrality(format!("L·v_{i} is not an integer combination of the generators"))
        })?;
        for (j, c) in col.into_iter().enumerate() {
            m[(j, i)] = BigInt::from(c);
        }
        residual = residual.max(res);
    }
    Ok(GeneratorData { vectors: generators.to_vec(), m, residual })
}

fn best_basis(d: usize, gens: &[Point]) -> Option<Vec<usize>> {
    let n = gens.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut consider = |idx: Vec<usize>| {
        let cond = if d == 1 {
            gens[idx[0]][0].abs()
        } else {
            let (a, b) = (gens[idx[0]], gens[idx[1]]);
            (a[0] * b[1] - a[1] * b[0]).abs() / (norm_inf(a) * norm_inf(b)).max(1e-300)
        };
        if cond > 1e-9 && best.as_ref().is_none_or(|(c, _)| cond > *c + 1e-12) {
            best = Some((cond, idx));
        }
    };
    for i in 0..n {
        if d == 1 {
            consider(vec![i]);
        } else {
            for j in i + 1..n {
                consider(vec![i, j]);
            }
        }
    }
    best.map(|(_, idx)| idx)
}

fn integer_column(
    d: usize,
    gens: &[Point],
    basis: &[usize],
    free: &[usize],
    target: Point,
    limit: f64,
) -> Option<(Vec<i64>, f64)> {
    let n = gens.len();
    let a: Vec<Vec<f64>> = (0..d).map(|r| basis.iter().map(|&b| gens[b][r]).collect()).collect();
    let k = free.len();
    // Enumerate free coefficients by increasing max-norm for determinism.
    for radius in 0..=COEFFICIENT_BOUND {
        let side = 2 * radius + 1;
        let total = (side as usize).pow(k as u32);
        for code in 0..total {
            let mut rest = code;
            let mut coeffs = vec![0i64; k];
            for c in coeffs.iter_mut() {
                *c = (rest % side as usize) as i64 - radius;
                rest /= side as usize;
            }
            if k > 0 && coeffs.iter().map(|c| c.abs()).max() != Some(radius) {
                continue;
            }
            if k == 0 && radius > 0 {
                break;
            }
            let mut rhs = target;
            for (&c, &f) in coeffs.iter().zip(free) {
                rhs = sub(rhs, [c as f64 * gens[f][0], c as f64 * gens[f][1]]);
            }
            let Ok(sol) = solve(&a, &rhs[..d]) else { return None };
            let rounded: Vec<i64> = sol.iter().map(|x| x.round() as i64).collect();
            let mut col = vec![0i64; n];
            for (&b, &r) in basis.iter().zip(&rounded) {
                col[b] = r;
            }
            for (&f, &c) in free.iter().zip(&coeffs) {
                col[f] = c;
            }
            let mut recon = [0.0, 0.0];
            for (j, &c) in col.iter().enumerate() {
                recon[0] += c as f64 * gens[j][0];
                recon[1] += c as f64 * gens[j][1];
            }
            let res = norm_inf(sub(recon, target));
            if res <= limit {
                return Some((col, res));
            }
        }
    }
    None
}

/// Generators drawn from 𝒟: one vector per ± pair, shortest first, skipping
/// vectors that are small integer combinations of those already chosen.
pub fn default_generators(rule: &SubstitutionRule, differences: &[Point]) -> Vec<Point> {
    let mut reps: Vec<Point> = differences
        .iter()
        .filter(|p| p[0] > 1e-12 || (p[0].abs() <= 1e-12 && p[1] > 1e-12))
        .copied()
        .collect();
    reps.sort_by(|a, b| norm_inf(*a).total_cmp(&norm_inf(*b)).then(a[0].total_cmp(&b[0])).then(a[1].total_cmp(&b[1])));
    let tol = 1e-9 * rule.displacement_scale();
    let mut chosen: Vec<Point> = Vec::new();
    for v in reps {
        if !is_small_combination(&chosen, v, tol) {
            chosen.push(v);
        }
    }
    chosen
}

fn is_small_combination(chosen: &[Point], v: Point, tol: f64) -> bool {
    let k = chosen.len();
    if k == 0 {
        return false;
    }
    let bound = 3i64;
    let side = (2 * bound + 1) as usize;
    (0..side.pow(k as u32)).any(|code| {
        let mut rest = code;
        let mut acc = [0.0, 0.0];
        for c in chosen {
            let coeff = (rest % side) as i64 - bound;
            rest /= side;
            acc[0] += coeff as f64 * c[0];
            acc[1] += coeff as f64 * c[1];
        }
        norm_inf(sub(acc, v)) <= tol
    })
}

/// ω·v for every generator, the ingredients of ‖ω‖_V.
pub fn generator_projections(gens: &[Point], omega: Point) -> Vec<f64> {
    gens.iter().map(|&v| dot(omega, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearMap;
    use crate::tiling::{fixtures, patch::supertile, rule::rule_power};

    fn has(v: &[Point], p: Point) -> bool {
        v.iter().any(|q| norm_inf(sub(*q, p)) < 1e-9)
    }

    #[test]
    fn adjacency_of_np13_first_supertile() {
        let rule = fixtures::np13();
        let l = fixtures::quadratic_root(3);
        let d = adjacency_differences(&rule, &supertile(&rule, 0, 1).unwrap());
        for p in [[l, 0.0], [-l, 0.0], [1.0, 0.0], [-1.0, 0.0]] {
            assert!(has(&d, p), "{p:?} missing from {d:?}");
        }
        assert_eq!(d.len(), 4);
        assert!(adjacency_differences(&rule, &supertile(&rule, 0, 0).unwrap()).is_empty());
    }

    #[test]
    fn adjacency_of_fibonacci() {
        let rule = fixtures::fib();
        let phi = fixtures::golden();
        let d = adjacency_differences(&rule, &supertile(&rule, 0, 2).unwrap());
        for p in [[phi, 0.0], [-phi, 0.0], [1.0, 0.0], [-1.0, 0.0]] {
            assert!(has(&d, p));
        }
    }

    #[test]
    fn adjacency_in_the_plane_includes_corner_contacts() {
        let rule = fixtures::npprod();
        let d = adjacency_differences(&rule, &supertile(&rule, 0, 1).unwrap());
        let l13 = fixtures::quadratic_root(3);
        let l21 = fixtures::quadratic_root(5);
        assert!(has(&d, [l13, 0.0]) && has(&d, [0.0, l21]) && has(&d, [l13, l21]));
    }

    #[test]
    fn good_return_vectors_need_a_power() {
        assert!(good_return_vectors(&fixtures::np13()).is_empty());
        let g = good_return_vectors(&rule_power(&fixtures::np13(), 2).unwrap());
        let one = g.iter().find(|v| (v.vector[0] - 1.0).abs() < 1e-9).expect("1 is a good return vector");
        assert!(one.witness_types.iter().all(|k| k.contains(&1)));
        assert!(g.iter().any(|v| (v.vector[0] + 1.0).abs() < 1e-9));
    }

    #[test]
    fn generator_examples() {
        let l = fixtures::quadratic_root(3);
        let g = generator_data(&fixtures::np13(), &[[1.0, 0.0], [l, 0.0]]).unwrap();
        assert_eq!(g.m, IntMatrix::from_i64(&[vec![0, 3], vec![1, 1]]).unwrap());
        assert!(g.residual <= 1e-8);
        let phi = fixtures::golden();
        let g = generator_data(&fixtures::fib(), &[[1.0, 0.0], [phi, 0.0]]).unwrap();
        assert_eq!(g.m, IntMatrix::from_i64(&[vec![0, 1], vec![1, 1]]).unwrap());
        let mut two = fixtures::np13();
        two.expansion = LinearMap::scalar(2.0);
        let g = generator_data(&two, &[[1.0, 0.0]]).unwrap();
        assert_eq!(g.m, IntMatrix::from_i64(&[vec![2]]).unwrap());
    }

    #[test]
    fn inadequate_generators_are_rejected() {
        let r = generator_data(&fixtures::np13(), &[[1.0, 0.0]]);
        assert!(matches!(r, Err(Error::NonIntegrality(_))));
    }

    #[test]
    fn default_generators_of_the_product() {
        let rule = fixtures::npprod();
        let d = adjacency_differences(&rule, &supertile(&rule, 0, 2).unwrap());
        let gens = default_generators(&rule, &d);
        assert_eq!(gens.len(), 4);
        let g = generator_data(&rule, &gens).unwrap();
        let cp = g.m.char_poly().unwrap();
        let want = &crate::algebraic::IntPolynomial::from_i64(&[-3, -1, 1])
            * &crate::algebraic::IntPolynomial::from_i64(&[-5, -1, 1]);
        assert_eq!(cp, want);
    }
}
