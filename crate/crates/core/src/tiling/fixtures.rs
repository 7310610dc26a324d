//! Built-in substitution rules.

use crate::geometry::Point;
use crate::linalg::LinearMap;

use super::rule::{RawPrototile, SubstitutionRule};

pub fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

/// Largest root of x² − x − k, i.e. (1 + √(1 + 4k))/2.
pub fn quadratic_root(k: u32) -> f64 {
    (1.0 + (1.0 + 4.0 * k as f64).sqrt()) / 2.0
}

/// Two-letter interval rule a → a bᵏ, b → a with tile lengths (λ, 1), where
/// λ² = λ + k. Punctures sit at left endpoints.
fn one_dim(lambda: f64, b_length: f64, k: usize) -> SubstitutionRule {
    let raw = vec![
        RawPrototile { name: "a".into(), vertices: vec![[0.0, 0.0], [lambda, 0.0]], puncture: [0.0, 0.0] },
        RawPrototile { name: "b".into(), vertices: vec![[0.0, 0.0], [b_length, 0.0]], puncture: [0.0, 0.0] },
    ];
    let mut a_children = vec![(0, [0.0, 0.0])];
    for i in 0..k {
        a_children.push((1, [lambda + i as f64 * b_length, 0.0]));
    }
    SubstitutionRule::new(1, LinearMap::scalar(lambda), raw, vec![a_children, vec![(0, [0.0, 0.0])]], 0)
        .expect("fixture is well formed")
}

/// Fibonacci: a → ab, b → a.
pub fn fib() -> SubstitutionRule {
    one_dim(golden(), 1.0, 1)
}

/// a → abbb, b → a with λ = (1 + √13)/2.
pub fn np13() -> SubstitutionRule {
    one_dim(quadratic_root(3), 1.0, 3)
}

/// NP13 with the b tile stretched to `b_length`; breaks the volume identity
/// unless `b_length` is 1.
pub fn np13_with_b_length(b_length: f64) -> SubstitutionRule {
    one_dim(quadratic_root(3), b_length, 3)
}

/// a → abbbbb, b → a with λ = (1 + √21)/2.
pub fn np21() -> SubstitutionRule {
    one_dim(quadratic_root(5), 1.0, 5)
}

/// Fibonacci with expansion −φ: a → a b laid out right to left.
pub fn fib_reflected() -> SubstitutionRule {
    let phi = golden();
    let raw = vec![
        RawPrototile { name: "a".into(), vertices: vec![[0.0, 0.0], [phi, 0.0]], puncture: [0.0, 0.0] },
        RawPrototile { name: "b".into(), vertices: vec![[0.0, 0.0], [1.0, 0.0]], puncture: [0.0, 0.0] },
    ];
    SubstitutionRule::new(
        1,
        LinearMap::scalar(-phi),
        raw,
        vec![vec![(0, [-phi * phi, 0.0]), (1, [-1.0, 0.0])], vec![(0, [-phi, 0.0])]],
        0,
    )
    .expect("fixture is well formed")
}

/// Direct product of two interval rules: rectangles indexed by
/// `i₁·m₂ + i₂`, expansion diag(L₁, L₂).
pub fn product(first: &SubstitutionRule, second: &SubstitutionRule) -> SubstitutionRule {
    assert!(first.dim == 1 && second.dim == 1, "product takes two interval rules");
    let m2 = second.type_count();
    let mut raw = Vec::new();
    let mut children = Vec::new();
    for p in &first.prototiles {
        for q in &second.prototiles {
            let (x0, x1) = (p.support.vertices[0][0], p.support.vertices[1][0]);
            let (y0, y1) = (q.support.vertices[0][0], q.support.vertices[1][0]);
            raw.push(RawPrototile {
                name: format!("{}{}", p.name, q.name),
                vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
                puncture: [0.0, 0.0],
            });
            let mut list: Vec<(usize, Point)> = Vec::new();
            for c1 in &first.children[p.id] {
                for c2 in &second.children[q.id] {
                    list.push((c1.kind * m2 + c2.kind, [c1.displacement[0], c2.displacement[0]]));
                }
            }
            children.push(list);
        }
    }
    let expansion = LinearMap::diag(first.expansion.m[0][0], second.expansion.m[0][0]);
    let seed = first.seed * m2 + second.seed;
    SubstitutionRule::new(2, expansion, raw, children, seed).expect("product of valid rules")
}

/// NP13 × NP21 on rectangles, L = diag(λ₁₃, λ₂₁).
pub fn npprod() -> SubstitutionRule {
    product(&np13(), &np21())
}

/// Fibonacci × Fibonacci, an isotropic product with L = φ·I.
pub fn fibprod() -> SubstitutionRule {
    product(&fib(), &fib())
}

/// Fixture lookup by (case-insensitive) name.
pub fn by_name(name: &str) -> Option<SubstitutionRule> {
    match name.to_ascii_lowercase().as_str() {
        "fib" => Some(fib()),
        "np13" => Some(np13()),
        "np21" => Some(np21()),
        "npprod" => Some(npprod()),
        "fibprod" => Some(fibprod()),
        _ => None,
    }
}

pub const NAMES: [&str; 5] = ["fib", "np13", "np21", "npprod", "fibprod"];

/// All named fixtures in a fixed order.
pub fn all() -> Vec<(&'static str, SubstitutionRule)> {
    NAMES.iter().map(|&n| (n, by_name(n).expect("listed fixture"))).collect()
}
