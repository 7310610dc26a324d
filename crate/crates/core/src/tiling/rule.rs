use serde::Serialize;

use crate::algebraic::IntMatrix;
use crate::error::{Error, Result, ValidationIssue};
use crate::geometry::{add, norm_inf, sub, Point, Support};
use crate::linalg::{perron, LinearMap};

use super::patch::{supertile_with, GenerationLimits};

/// A prototile. Supports are stored relative to the puncture, so a tile
/// placed with translation `t` has puncture `t` and support `support + t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prototile {
    pub id: usize,
    pub name: String,
    pub support: Support,
    pub volume: f64,
}

/// A child tile of a parent image: type and displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Child {
    pub kind: usize,
    pub displacement: Point,
}

/// Prototile description before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPrototile {
    pub name: String,
    pub vertices: Vec<Point>,
    pub puncture: Point,
}

/// A substitution ζ(T_j) = ⋃ T_k + s^k_l(j) with expansion L.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubstitutionRule {
    pub dim: usize,
    pub expansion: LinearMap,
    pub prototiles: Vec<Prototile>,
    /// `children[j]` lists the tiles of ζ(T_j).
    pub children: Vec<Vec<Child>>,
    /// Prototile used to grow fixed-point patches.
    pub seed: usize,
}

impl SubstitutionRule {
    /// Builds a rule from raw prototiles whose punctures may sit anywhere in
    /// the support; displacements refer to the raw supports.
    pub fn new(
        dim: usize,
        expansion: LinearMap,
        raw: Vec<RawPrototile>,
        children: Vec<Vec<(usize, Point)>>,
        seed: usize,
    ) -> Result<Self> {
        if expansion.dim != dim {
            return Err(Error::Dimension(format!("expansion is {}-dimensional, rule is {dim}-dimensional", expansion.dim)));
        }
        if raw.is_empty() {
            return Err(Error::Dimension("a rule needs at least one prototile".into()));
        }
        if children.len() != raw.len() {
            return Err(Error::Dimension(format!(
                "{} prototiles but {} child lists",
                raw.len(),
                children.len()
            )));
        }
        if seed >= raw.len() {
            return Err(Error::Dimension(format!("seed {seed} is not a prototile index")));
        }
        let mut issues = Vec::new();
        for (j, list) in children.iter().enumerate() {
            for (l, &(k, _)) in list.iter().enumerate() {
                if k >= raw.len() {
                    issues.push(ValidationIssue::UnknownType { parent: j, child: l, kind: k });
                }
            }
        }
        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        let punctures: Vec<Point> = raw.iter().map(|r| flatten(dim, r.puncture)).collect();
        let prototiles = raw
            .iter()
            .enumerate()
            .map(|(id, r)| {
                let vs: Vec<Point> = r.vertices.iter().map(|&v| sub(flatten(dim, v), punctures[id])).collect();
                let support = if dim == 1 {
                    Support::interval(vs.first().map_or(0.0, |v| v[0]), vs.get(1).map_or(0.0, |v| v[0]))
                } else {
                    Support::polygon(vs)
                };
                let volume = support.volume();
                Prototile { id, name: r.name.clone(), support, volume }
            })
            .collect();
        let children = children
            .iter()
            .enumerate()
            .map(|(j, list)| {
                let lp = expansion.apply(punctures[j]);
                list.iter()
                    .map(|&(k, s)| Child { kind: k, displacement: sub(add(flatten(dim, s), punctures[k]), lp) })
                    .collect()
            })
            .collect();
        Ok(Self { dim, expansion, prototiles, children, seed })
    }

    pub fn type_count(&self) -> usize {
        self.prototiles.len()
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.prototiles.iter().position(|p| p.name == name)
    }

    /// 𝒮(i, j) = number of type-i children of parent j.
    pub fn substitution_matrix(&self) -> IntMatrix {
        let m = self.type_count();
        let mut s = IntMatrix::zeros(m, m);
        for (j, list) in self.children.iter().enumerate() {
            for c in list {
                s[(c.kind, j)] += 1;
            }
        }
        s
    }

    /// Same rule with punctures moved to the given points (in the current
    /// puncture-relative coordinates of each prototile).
    pub fn with_punctures(&self, punctures: &[Point]) -> Result<Self> {
        if punctures.len() != self.type_count() {
            return Err(Error::Dimension("one puncture per prototile is required".into()));
        }
        let raw = self
            .prototiles
            .iter()
            .zip(punctures)
            .map(|(p, &q)| RawPrototile { name: p.name.clone(), vertices: p.support.vertices.clone(), puncture: q })
            .collect();
        let children = self
            .children
            .iter()
            .map(|list| list.iter().map(|c| (c.kind, c.displacement)).collect())
            .collect();
        Self::new(self.dim, self.expansion, raw, children, self.seed)
    }

    /// Largest translation magnitude among the children, used for tolerances.
    pub fn displacement_scale(&self) -> f64 {
        self.children
            .iter()
            .flatten()
            .map(|c| norm_inf(c.displacement))
            .fold(1.0, f64::max)
    }
}

fn flatten(dim: usize, p: Point) -> Point {
    if dim == 1 {
        [p[0], 0.0]
    } else {
        p
    }
}

/// Primitivity verdict with the exponent of the first positive power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Primitivity {
    pub primitive: bool,
    pub exponent: Option<usize>,
}

/// Checks whether some power ≤ (m−1)² + 1 of a nonnegative matrix is
/// entrywise positive.
pub fn is_primitive(s: &IntMatrix) -> Primitivity {
    let m = s.rows();
    if m == 0 || !s.is_square() {
        return Primitivity { primitive: false, exponent: None };
    }
    let pattern: Vec<Vec<bool>> = (0..m).map(|i| (0..m).map(|j| s[(i, j)] > 0.into()).collect()).collect();
    let mut power = pattern.clone();
    let limit = (m - 1) * (m - 1) + 1;
    for e in 1..=limit {
        if power.iter().flatten().all(|&b| b) {
            return Primitivity { primitive: true, exponent: Some(e) };
        }
        power = (0..m)
            .map(|i| (0..m).map(|j| (0..m).any(|k| power[i][k] && pattern[k][j])).collect())
            .collect();
    }
    Primitivity { primitive: false, exponent: None }
}

/// Geometric constants of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryStats {
    /// Largest prototile diameter.
    pub d_max: f64,
    /// Diameter of the largest ball inscribed in every prototile.
    pub d_min: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Perron–Frobenius eigenvalue of the substitution matrix.
    pub theta: f64,
    pub det: f64,
    pub primitivity_exponent: Option<usize>,
}

/// Checks expansiveness, volume identities, primitivity, child
/// disjointness and containment, and computes [`GeometryStats`].
pub fn validate(rule: &SubstitutionRule) -> Result<GeometryStats> {
    let mut issues = Vec::new();
    for (id, p) in rule.prototiles.iter().enumerate() {
        if let Err(reason) = p.support.check_convex() {
            issues.push(ValidationIssue::BadPrototile { tile: id, reason });
        }
    }
    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }
    for ev in rule.expansion.eigenvalues() {
        if ev.norm() <= 1.0 {
            issues.push(ValidationIssue::NotExpansive { modulus: ev.norm() });
        }
    }
    let det = rule.expansion.det();
    for (j, list) in rule.children.iter().enumerate() {
        let expected = det.abs() * rule.prototiles[j].volume;
        let actual: f64 = list.iter().map(|c| rule.prototiles[c.kind].volume).sum();
        if (expected - actual).abs() > 1e-9 * expected.abs().max(actual.abs()) {
            issues.push(ValidationIssue::VolumeIdentity { parent: j, expected, actual });
        }
    }
    let s = rule.substitution_matrix();
    let prim = is_primitive(&s);
    if !prim.primitive {
        issues.push(ValidationIssue::NotPrimitive);
    }
    for (j, list) in rule.children.iter().enumerate() {
        let image = rule.prototiles[j].support.transform(&rule.expansion);
        let tol = 1e-9 * (1.0 + image.diameter());
        let placed: Vec<Support> = list
            .iter()
            .map(|c| rule.prototiles[c.kind].support.translate(c.displacement))
            .collect();
        for (l, sup) in placed.iter().enumerate() {
            if !image.contains_support(sup, tol) {
                issues.push(ValidationIssue::ChildOutside { parent: j, child: l });
            }
        }
        for a in 0..placed.len() {
            for b in a + 1..placed.len() {
                if interiors_overlap(&placed[a], &placed[b]) {
                    issues.push(ValidationIssue::Overlap { parent: j, first: a, second: b });
                }
            }
        }
    }
    let theta = if prim.primitive {
        let p = perron(&s.to_f64())?;
        if (p.eigenvalue - det.abs()).abs() > 1e-9 * det.abs() {
            issues.push(ValidationIssue::PerronMismatch { theta: p.eigenvalue, det: det.abs() });
        }
        p.eigenvalue
    } else {
        f64::NAN
    };
    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }
    let d_max = rule.prototiles.iter().map(|p| p.support.diameter()).fold(0.0, f64::max);
    let d_min = rule.prototiles.iter().map(|p| 2.0 * p.support.inradius()).fold(f64::INFINITY, f64::min);
    let v_min = rule.prototiles.iter().map(|p| p.volume).fold(f64::INFINITY, f64::min);
    let v_max = rule.prototiles.iter().map(|p| p.volume).fold(0.0, f64::max);
    Ok(GeometryStats { d_max, d_min, v_min, v_max, theta, det, primitivity_exponent: prim.exponent })
}

/// Sampled interior-overlap test: Halton points in the bounding box of the
/// smaller support that lie well inside it are tested against the other.
fn interiors_overlap(a: &Support, b: &Support) -> bool {
    let scale = a.diameter().max(b.diameter());
    if !a.intersects(b, -1e-9 * scale) {
        return false;
    }
    if a.dim == 1 {
        return true;
    }
    let (small, large) = if a.volume() <= b.volume() { (a, b) } else { (b, a) };
    let bb = small.bbox();
    let margin = 1e-9 * scale;
    (1..=256).any(|i| {
        let p = [
            bb.lo[0] + (bb.hi[0] - bb.lo[0]) * halton(i, 2),
            bb.lo[1] + (bb.hi[1] - bb.lo[1]) * halton(i, 3),
        ];
        small.margin(p) > margin && large.margin(p) > margin
    })
}

pub(crate) fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// The rule ζ^p: expansion L^p, children read off the order-p supertiles.
pub fn rule_power(rule: &SubstitutionRule, p: usize) -> Result<SubstitutionRule> {
    if p == 0 {
        return Err(Error::Domain("rule power must be at least 1".into()));
    }
    if p == 1 {
        return Ok(rule.clone());
    }
    let limits = GenerationLimits::default();
    let children = (0..rule.type_count())
        .map(|j| {
            let patch = supertile_with(rule, j, p, &limits, false)?;
            Ok(patch.tiles.iter().map(|t| Child { kind: t.kind, displacement: t.translation }).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SubstitutionRule {
        dim: rule.dim,
        expansion: rule.expansion.pow(p as u32),
        prototiles: rule.prototiles.clone(),
        children,
        seed: rule.seed,
    })
}

/// Control points p_j = L^{−1}(s*(j) + p_{t(j)}), where `choice[j]` selects
/// the child (t(j), s*(j)) of ζ(T_j). Coordinates are relative to the
/// current punctures.
pub fn control_points(rule: &SubstitutionRule, choice: &[usize]) -> Result<Vec<Point>> {
    let m = rule.type_count();
    if choice.len() != m {
        return Err(Error::Dimension(format!("need one child choice per prototile, got {}", choice.len())));
    }
    let d = rule.dim;
    let inv = rule.expansion.inverse()?;
    let n = m * d;
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for j in 0..m {
        let child = rule.children[j]
            .get(choice[j])
            .ok_or_else(|| Error::Domain(format!("prototile {j} has no child {}", choice[j])))?;
        let rhs = inv.apply(child.displacement);
        for r in 0..d {
            a[j * d + r][j * d + r] += 1.0;
            for c in 0..d {
                a[j * d + r][child.kind * d + c] -= inv.m[r][c];
            }
            b[j * d + r] = rhs[r];
        }
    }
    let x = crate::linalg::solve(&a, &b)?;
    Ok((0..m)
        .map(|j| if d == 1 { [x[j], 0.0] } else { [x[2 * j], x[2 * j + 1]] })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::fixtures;

    #[test]
    fn substitution_matrices() {
        let np13 = fixtures::np13();
        assert_eq!(np13.substitution_matrix(), IntMatrix::from_i64(&[vec![1, 1], vec![3, 0]]).unwrap());
        let fib = fixtures::fib();
        assert_eq!(fib.substitution_matrix(), IntMatrix::from_i64(&[vec![1, 1], vec![1, 0]]).unwrap());
        let prod = fixtures::npprod();
        let expected = np13.substitution_matrix().kron(&fixtures::np21().substitution_matrix());
        assert_eq!(prod.substitution_matrix(), expected);
    }

    #[test]
    fn primitivity_examples() {
        let p = is_primitive(&IntMatrix::from_i64(&[vec![1, 1], vec![3, 0]]).unwrap());
        assert_eq!(p, Primitivity { primitive: true, exponent: Some(2) });
        assert!(!is_primitive(&IntMatrix::identity(2)).primitive);
        assert!(!is_primitive(&IntMatrix::from_i64(&[vec![0, 1], vec![1, 0]]).unwrap()).primitive);
    }

    #[test]
    fn fixtures_validate() {
        for (name, rule) in fixtures::all() {
            let stats = validate(&rule).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!((stats.theta - stats.det.abs()).abs() < 1e-9 * stats.det.abs(), "{name}");
        }
    }

    #[test]
    fn broken_volume_is_reported_on_parent_a() {
        let err = validate(&fixtures::np13_with_b_length(1.1)).unwrap_err();
        let Error::Validation(issues) = err else { panic!("expected validation error") };
        assert!(issues.iter().any(|i| matches!(i, ValidationIssue::VolumeIdentity { parent: 0, .. })));
    }

    #[test]
    fn overlapping_children_are_caught() {
        let phi = fixtures::golden();
        let raw = vec![
            RawPrototile { name: "a".into(), vertices: vec![[0.0, 0.0], [phi, 0.0]], puncture: [0.0, 0.0] },
            RawPrototile { name: "b".into(), vertices: vec![[0.0, 0.0], [1.0, 0.0]], puncture: [0.0, 0.0] },
        ];
        let rule = SubstitutionRule::new(
            1,
            LinearMap::scalar(phi),
            raw,
            vec![vec![(0, [0.0, 0.0]), (1, [phi - 0.5, 0.0])], vec![(0, [0.0, 0.0])]],
            0,
        )
        .unwrap();
        let Error::Validation(issues) = validate(&rule).unwrap_err() else { panic!() };
        assert!(issues.iter().any(|i| matches!(i, ValidationIssue::Overlap { parent: 0, .. })));
    }

    #[test]
    fn power_of_fibonacci() {
        let phi = fixtures::golden();
        let r2 = rule_power(&fixtures::fib(), 2).unwrap();
        let a: Vec<(usize, f64)> = r2.children[0].iter().map(|c| (c.kind, c.displacement[0])).collect();
        assert_eq!(a.len(), 3);
        assert_eq!((a[0].0, a[1].0, a[2].0), (0, 1, 0));
        assert!(a[0].1.abs() < 1e-12 && (a[1].1 - phi).abs() < 1e-12 && (a[2].1 - phi - 1.0).abs() < 1e-12);
        assert_eq!(rule_power(&fixtures::fib(), 1).unwrap(), fixtures::fib());
        let s = rule_power(&fixtures::np13(), 2).unwrap().substitution_matrix();
        assert_eq!(s, IntMatrix::from_i64(&[vec![4, 1], vec![3, 3]]).unwrap());
    }

    #[test]
    fn control_point_examples() {
        let zero = control_points(&fixtures::np13(), &[0, 0]).unwrap();
        assert_eq!(zero, vec![[0.0, 0.0], [0.0, 0.0]]);
        let phi = fixtures::golden();
        let fib = fixtures::fib();
        let p = control_points(&fib, &[1, 0]).unwrap();
        let inv = 1.0 / phi;
        // Residual of the fixed-point system.
        let ra = p[0][0] - inv * (phi + p[1][0]);
        let rb = p[1][0] - inv * p[0][0];
        assert!(ra.abs() < 1e-12 && rb.abs() < 1e-12);
        assert!((p[0][0] - phi).abs() < 1e-12 && (p[1][0] - 1.0).abs() < 1e-12);
        assert_eq!(control_points(&fib, &[1, 0]).unwrap(), p);
    }
}
