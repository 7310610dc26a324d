use aperiodic_spectra::cocycle::{
    cocycle_product, mass_constant, perron_sandwich, riesz_bound, step_matrix, structure_factor, supertile_counts,
};
use aperiodic_spectra::geometry::Point;
use aperiodic_spectra::tiling::{fixtures, good_return_vectors, rule_power, supertile, validate, SubstitutionRule};
use proptest::prelude::*;

/// Each fixture at the first power with good return vectors.
fn powered() -> Vec<(&'static str, SubstitutionRule)> {
    [("fib", 3), ("np13", 2), ("np21", 2), ("npprod", 2), ("fibprod", 3)]
        .into_iter()
        .map(|(name, p)| {
            let rule = rule_power(&fixtures::by_name(name).unwrap(), p).unwrap();
            assert!(!good_return_vectors(&rule).is_empty(), "{name}^{p}");
            (name, rule)
        })
        .collect()
}

fn omega_in(dim: usize) -> impl Strategy<Value = Point> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(move |(x, y)| if dim == 1 { [x, 0.0] } else { [x, y] })
}

fn fixture_and_omega() -> impl Strategy<Value = (SubstitutionRule, Point)> {
    prop::sample::select(fixtures::NAMES.to_vec())
        .prop_flat_map(|n| {
            let rule = fixtures::by_name(n).unwrap();
            let dim = rule.dim;
            (Just(rule), omega_in(dim))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn step_entries_are_dominated_by_counts((rule, w) in fixture_and_omega(), level in 0usize..6) {
        let step = step_matrix(&rule, level, w).unwrap();
        let st = rule.substitution_matrix().transpose().to_i64().unwrap();
        for (j, row) in st.iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                prop_assert!(step.matrix.get(j, k).norm() <= c as f64 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn structure_factor_modulus_ignores_translation(
        (rule, w) in fixture_and_omega(),
        shift in (-50.0..50.0f64, -50.0..50.0f64),
        n in 0usize..4,
    ) {
        let s = if rule.dim == 1 { [shift.0, 0.0] } else { [shift.0, shift.1] };
        let patch = supertile(&rule, 0, n).unwrap();
        let moved = patch.translate(s);
        for i in 0..rule.type_count() {
            let a = structure_factor(&patch, i, w).norm();
            let b = structure_factor(&moved, i, w).norm();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + patch.len() as f64));
        }
    }

    #[test]
    fn conjugate_frequency_conjugates_the_product((rule, w) in fixture_and_omega(), n in 0usize..6) {
        let plus = cocycle_product(&rule, n, w).unwrap();
        let minus = cocycle_product(&rule, n, [-w[0], -w[1]]).unwrap();
        for (a, b) in plus.matrix.data.iter().zip(&minus.matrix.data) {
            prop_assert!((a - b.conj()).norm() <= 1e-9 * (1.0 + a.norm()));
        }
    }
}

#[test]
fn step_at_zero_is_the_transposed_substitution_matrix() {
    for (name, rule) in fixtures::all() {
        let step = step_matrix(&rule, 0, [0.0, 0.0]).unwrap();
        let st = rule.substitution_matrix().transpose().to_i64().unwrap();
        for (j, row) in st.iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                let z = step.matrix.get(j, k);
                assert!(z.re == c as f64 && z.im == 0.0, "{name}");
            }
        }
    }
}

#[test]
fn riesz_factors_shrink() {
    for (name, rule) in powered() {
        let mass = mass_constant(&rule).unwrap().mass;
        assert!(mass > 0.0 && mass <= 1.0, "{name}: {mass}");
        let vectors: Vec<Point> = good_return_vectors(&rule).iter().map(|g| g.vector).collect();
        for k in 0..40 {
            let w = [0.173 * k as f64 - 3.1, if rule.dim == 2 { 2.9 - 0.151 * k as f64 } else { 0.0 }];
            let bound = riesz_bound(&rule, mass, 8, w, &vectors);
            assert!(bound.factors.iter().all(|&f| f > 0.0 && f <= 1.0), "{name}: {:?}", bound.factors);
            let partial = bound.partial_products();
            assert!(partial.windows(2).all(|p| p[1] <= p[0]));
        }
    }
}

#[test]
fn structure_factors_obey_the_riesz_bound() {
    for (name, rule) in powered() {
        let theta = validate(&rule).unwrap().theta;
        let (c1, c2) = perron_sandwich(&rule, theta, 10);
        let mass = mass_constant(&rule).unwrap().mass;
        let vectors: Vec<Point> = good_return_vectors(&rule).iter().map(|g| g.vector).collect();
        let top = if rule.dim == 2 { 6 } else { 10 };
        for k in 0..25 {
            let w = [0.417 * k as f64 - 4.9, if rule.dim == 2 { 0.389 * k as f64 - 4.7 } else { 0.0 }];
            for n in 0..=top {
                let product = cocycle_product(&rule, n, w).unwrap();
                let counts = supertile_counts(&rule, n);
                let riesz = riesz_bound(&rule, mass, n, w, &vectors).product;
                for j in 0..rule.type_count() {
                    for i in 0..rule.type_count() {
                        let phi = product.matrix.get(j, i).norm();
                        let allowed = counts[j] * riesz * c2 / c1;
                        assert!(phi <= allowed * (1.0 + 1e-9), "{name} n={n} ω={w:?}: {phi} > {allowed}");
                    }
                }
            }
        }
    }
}
