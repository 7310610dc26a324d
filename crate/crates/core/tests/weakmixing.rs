use aperiodic_spectra::geometry::Point;
use aperiodic_spectra::tiling::{fixtures, GeneratorData, SubstitutionRule};
use aperiodic_spectra::weakmixing::{
    centered_frac, delta0, eigenvalue_search, epsilon_trace, omega_v_norm, rule_generator_data, window_check,
    DEFAULT_WINDOW_RATIO, SEARCH_STEPS,
};
use proptest::prelude::*;

/// A double-double value hi + lo.
#[derive(Clone, Copy)]
struct Wide(f64, f64);

impl Wide {
    fn add(self, x: f64, err: f64) -> Self {
        let s = self.0 + x;
        let bb = s - self.0;
        let lo = (self.0 - (s - bb)) + (x - bb) + err + self.1;
        let hi = s + lo;
        Wide(hi, lo - (hi - s))
    }

    /// self + a·b with an error-free product.
    fn add_product(self, a: f64, b: Wide) -> Self {
        let p = a * b.0;
        self.add(p, a.mul_add(b.0, -p) + a * b.1)
    }
}

/// centered-frac((Mᵀ)ⁿVᵀω) from exact integer powers and compensated sums.
fn direct_eps(data: &GeneratorData, omega: Point, n: usize) -> Vec<f64> {
    let tilde: Vec<Wide> = data
        .vectors
        .iter()
        .map(|v| Wide(0.0, 0.0).add_product(omega[0], Wide(v[0], 0.0)).add_product(omega[1], Wide(v[1], 0.0)))
        .collect();
    let power = data.m.transpose().pow(n).to_i64().expect("small powers fit in 64 bits");
    power
        .iter()
        .map(|row| {
            let sum = row.iter().zip(&tilde).fold(Wide(0.0, 0.0), |acc, (&k, &x)| acc.add_product(k as f64, x));
            centered_frac(centered_frac(sum.0) + sum.1)
        })
        .collect()
}

fn circular_gap(a: f64, b: f64) -> f64 {
    centered_frac(a - b).abs()
}

fn generator_fixture() -> impl Strategy<Value = (&'static str, SubstitutionRule)> {
    prop::sample::select(fixtures::NAMES.to_vec()).prop_map(|n| (n, fixtures::by_name(n).unwrap()))
}

fn omega_for(rule: &SubstitutionRule, w: (f64, f64)) -> Point {
    if rule.dim == 1 {
        [w.0, 0.0]
    } else {
        [w.0, w.1]
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn iteration_matches_direct_powers((name, rule) in generator_fixture(), w in (-5.0..5.0f64, -5.0..5.0f64)) {
        let data = rule_generator_data(&rule).unwrap();
        let omega = omega_for(&rule, w);
        let trace = epsilon_trace(&data, omega, 25).unwrap();
        for n in 0..=25 {
            let direct = direct_eps(&data, omega, n);
            for (a, b) in trace.eps[n].iter().zip(&direct) {
                prop_assert!(circular_gap(*a, *b) <= 1e-6, "{name} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn residues_stay_centered_and_follow_the_recurrence(
        (_name, rule) in generator_fixture(),
        w in (-50.0..50.0f64, -50.0..50.0f64),
    ) {
        let data = rule_generator_data(&rule).unwrap();
        let trace = epsilon_trace(&data, omega_for(&rule, w), 200).unwrap();
        let mt = data.m.transpose().to_i64().unwrap();
        let envelope = 0.5 * data.count() as f64 * mt.iter().flatten().map(|x| x.abs()).max().unwrap() as f64;
        for n in 0..trace.eps.len() {
            prop_assert!(trace.eps[n].iter().all(|&e| e > -0.5 && e <= 0.5));
            let norm = trace.eps[n].iter().fold(0.0f64, |m, e| m.max(e.abs()));
            prop_assert_eq!(norm, trace.norms[n]);
            if n + 1 < trace.eps.len() {
                prop_assert!(trace.norms[n + 1] <= envelope);
                for (i, row) in mt.iter().enumerate() {
                    let raw: f64 = row.iter().zip(&trace.eps[n]).map(|(&k, &e)| k as f64 * e).sum();
                    // Residues carry a compensation term, so a plain f64 step
                    // agrees only to rounding.
                    prop_assert!(circular_gap(trace.eps[n + 1][i], centered_frac(raw)) <= 1e-12);
                }
            }
        }
    }
}

fn witnesses_within(name: &str, horizon: usize) {
    let data = rule_generator_data(&fixtures::by_name(name).unwrap()).unwrap();
    let threshold = delta0(&data).unwrap();
    let unit = omega_v_norm([1.0, 0.0], &data.vectors);
    for k in 0..100 {
        // ‖ω‖_V runs through [1, 10] along a golden-ratio sequence.
        let t = (0.5 + k as f64 * 0.618_033_988_749_895).fract();
        let w = [(1.0 + 9.0 * t) / unit, 0.0];
        assert!((omega_v_norm(w, &data.vectors) - (1.0 + 9.0 * t)).abs() < 1e-9);
        let trace = epsilon_trace(&data, w, horizon).unwrap();
        let hit = window_check(&trace, threshold, DEFAULT_WINDOW_RATIO);
        assert!(hit.is_some_and(|h| h.index <= horizon), "{name}: no witness for ω = {w:?}");
    }
}

#[test]
fn non_pisot_frequencies_leave_the_window() {
    witnesses_within("np13", 500);
    witnesses_within("np21", 500);
    let np21 = rule_generator_data(&fixtures::np21()).unwrap();
    assert_eq!(delta0(&np21).unwrap(), 1.0 / 7.0);
}

#[test]
fn eigenvalue_search_separates_pisot_from_non_pisot() {
    let grid: Vec<Point> = (0..=3000).map(|k| [k as f64 * 1e-3, 0.0]).collect();
    let np = rule_generator_data(&fixtures::np13()).unwrap();
    let hits = eigenvalue_search(&np, &grid, SEARCH_STEPS).unwrap();
    assert_eq!(hits.tested, grid.len());
    assert_eq!(hits.convergent.iter().map(|(w, _)| *w).collect::<Vec<_>>(), vec![[0.0, 0.0]]);
    let fib = rule_generator_data(&fixtures::fib()).unwrap();
    let found = eigenvalue_search(&fib, &grid, SEARCH_STEPS).unwrap();
    let nonzero: Vec<f64> = found.convergent.iter().map(|(w, _)| w[0]).filter(|&x| x != 0.0).collect();
    assert_eq!(nonzero.len(), 3, "{nonzero:?}");
}
