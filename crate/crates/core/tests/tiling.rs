use std::collections::HashSet;

use aperiodic_spectra::geometry::{Aabb, Point};
use aperiodic_spectra::tiling::{
    fixtures, patch_covering_cube, patch_in_cube, rule_from_value, rule_power, rule_to_value, supertile,
    tower_decompose, validate, Patch, SubstitutionRule,
};
use aperiodic_spectra::weakmixing::rule_generator_data;
use num_complex::Complex64;
use proptest::prelude::*;

fn key(kind: usize, p: Point) -> (usize, i64, i64) {
    (kind, (p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64)
}

fn keys(patch: &Patch) -> HashSet<(usize, i64, i64)> {
    patch.tiles.iter().map(|t| key(t.kind, t.translation)).collect()
}

#[test]
fn supertile_sizes_follow_the_substitution_matrix() {
    for (name, rule) in fixtures::all() {
        let s = rule.substitution_matrix();
        let top = if rule.dim == 2 { 6 } else { 8 };
        for n in 0..=top {
            let counts = s.pow(n).to_i64().unwrap();
            for j in 0..rule.type_count() {
                let patch = supertile(&rule, j, n).unwrap();
                let want: i64 = (0..rule.type_count()).map(|i| counts[i][j]).sum();
                assert_eq!(patch.len() as i64, want, "{name} n={n} j={j}");
                assert_eq!(keys(&patch).len(), patch.len(), "{name}: repeated tile");
                let volume = patch.total_volume(&rule);
                let expected = rule.expansion.det().powi(n as i32) * rule.prototiles[j].volume;
                assert!((volume - expected).abs() <= 1e-9 * n.max(1) as f64 * expected, "{name} n={n}");
            }
        }
    }
}

#[test]
fn validation_constants() {
    for (name, rule) in fixtures::all() {
        let stats = validate(&rule).unwrap();
        assert!((stats.theta - stats.det).abs() <= 1e-9 * stats.det, "{name}");
        assert!(rule.expansion.eigenvalues().iter().all(|z| z.norm() > 1.0));
        for (j, children) in rule.children.iter().enumerate() {
            let sum: f64 = children.iter().map(|c| rule.prototiles[c.kind].volume).sum();
            let want = stats.det * rule.prototiles[j].volume;
            assert!((sum - want).abs() <= 1e-9 * want);
        }
        for p in &rule.prototiles {
            assert!(p.volume > 0.0);
            assert!(p.support.check_convex().is_ok());
            assert!(p.support.contains([0.0, 0.0], 1e-12), "{name}: puncture outside {}", p.name);
        }
    }
}

#[test]
fn cube_patches_hold_exactly_the_tiles_inside() {
    for (name, rule) in fixtures::all() {
        let radius = if rule.dim == 1 { 30.0 } else { 9.0 };
        let (inside, order) = patch_covering_cube(&rule, radius).unwrap();
        let cube = Aabb::cube(rule.dim, radius);
        for i in 0..inside.len() {
            assert!(cube.contains_box(&inside.support_of(&rule, i).bbox(), 1e-9), "{name}");
        }
        let ambient = patch_in_cube(&rule, order + 2, 3.0 * radius).unwrap();
        let fitting: HashSet<_> = ambient
            .tiles
            .iter()
            .enumerate()
            .filter(|(i, _)| cube.contains_box(&ambient.support_of(&rule, *i).bbox(), 1e-9))
            .map(|(_, t)| key(t.kind, t.translation))
            .collect();
        assert_eq!(fitting, keys(&inside), "{name}");
    }
}

#[test]
fn towers_partition_the_patch() {
    for (name, rule) in fixtures::all() {
        let radius = if rule.dim == 1 { 40.0 } else { 8.0 };
        let (patch, _) = patch_covering_cube(&rule, radius).unwrap();
        let tower = tower_decompose(&rule, &patch).unwrap();
        let mut seen = tower.tile_indices();
        seen.sort_unstable();
        assert_eq!(seen, (0..patch.len()).collect::<Vec<_>>(), "{name}");
        let blocks: usize = tower.layers.iter().map(Vec::len).sum();
        assert!(blocks <= patch.len());
    }
}

#[test]
fn generators_intertwine_the_expansion() {
    for (name, rule) in fixtures::all() {
        let data = rule_generator_data(&rule).unwrap();
        let v_max = data.vectors.iter().flat_map(|v| v.iter().map(|x| x.abs())).fold(0.0, f64::max);
        assert!(data.residual <= 1e-8 * rule.expansion.norm_inf() * v_max, "{name}");
        let rank = if rule.dim == 1 {
            data.vectors.iter().any(|v| v[0] != 0.0) as usize
        } else {
            let full = data.vectors.iter().enumerate().any(|(i, a)| {
                data.vectors[i + 1..].iter().any(|b| (a[0] * b[1] - a[1] * b[0]).abs() > 1e-9)
            });
            1 + full as usize
        };
        assert_eq!(rank, rule.dim, "{name}");
        let chi = data.m.char_poly().unwrap();
        for z in rule.expansion.eigenvalues() {
            let at: Complex64 = chi.eval_complex(z);
            assert!(at.norm() < 1e-8 * (1.0 + z.norm()).powi(chi.degree() as i32), "{name}: χ_M({z}) = {at}");
        }
    }
}

#[test]
fn json_round_trip() {
    for (name, rule) in fixtures::all() {
        let back = rule_from_value(&rule_to_value(&rule)).unwrap();
        assert_eq!(back.substitution_matrix(), rule.substitution_matrix(), "{name}");
        assert_eq!(back.expansion, rule.expansion);
        assert_eq!(supertile(&back, 0, 3).unwrap().tiles, supertile(&rule, 0, 3).unwrap().tiles);
    }
}

fn fixture() -> impl Strategy<Value = SubstitutionRule> {
    prop::sample::select(fixtures::NAMES.to_vec()).prop_map(|n| fixtures::by_name(n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn powers_multiply_substitution_matrices(rule in fixture(), p in 1usize..=4) {
        let powered = rule_power(&rule, p).unwrap();
        prop_assert_eq!(powered.substitution_matrix(), rule.substitution_matrix().pow(p));
        prop_assert!((powered.expansion.det() - rule.expansion.det().powi(p as i32)).abs() < 1e-9 * powered.expansion.det());
    }
}
