use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::*;
use crate::cocycle::expi;
use crate::tiling::{fixtures, patch_covering_cube, rule_power, supertile};

const B: usize = 1;

#[test]
fn fejer_examples() {
    assert_eq!(fejer(1, 7.5, [0.0, 0.0]).unwrap(), 7.5);
    assert!(fejer(1, 2.0, [0.5, 0.0]).unwrap().abs() < 1e-30);
    for radius in [1.0, 3.0, 10.0, 100.0] {
        for k in 0..=20 {
            let y = (k as f64 / 20.0) / (2.0 * radius);
            assert!(fejer_1d(radius, y) >= 4.0 * radius / (PI * PI) * (1.0 - 1e-12));
        }
    }
    assert!(fejer(2, 0.0, [0.0, 0.0]).is_err());
    assert_eq!(fejer(2, 3.0, [0.0, 0.0]).unwrap(), 9.0);
}

#[test]
fn psi_hat_of_unit_hat_and_indicator() {
    let rule = fixtures::np13();
    let hat = CylindricalFunction::hat_on(&rule, B, 1.0).unwrap();
    assert!((hat.psi_hat(B, [0.0, 0.0]).unwrap().re - 0.5).abs() < 1e-15);
    let ones = CylindricalFunction::new(&rule, vec![Profile::zero(), Profile::single(1.0, Shape::Constant)]).unwrap();
    for w in [0.3, 1.7, 12.25, 333.3] {
        let want = (expi(w) - 1.0) / Complex64::new(0.0, TAU * w);
        assert!((ones.psi_hat(B, [w, 0.0]).unwrap() - want).norm() < 1e-12, "ω = {w}");
    }
}

#[test]
fn psi_hat_decays_like_lipschitz_bound() {
    let rule = fixtures::np13();
    let f = CylindricalFunction::hats(&rule, &[1.0, -0.5]).unwrap();
    for k in 0..60 {
        let w = 10f64.powf(k as f64 / 20.0);
        for kind in 0..2 {
            let v = f.psi_hat(kind, [w, 0.0]).unwrap().norm();
            assert!(v <= 4.0 * f.lipschitz_norm / (1.0 + w), "ω = {w}: {v}");
        }
    }
}

#[test]
fn evaluation_reads_off_profiles() {
    let rule = fixtures::np13();
    let f = CylindricalFunction::hats(&rule, &[1.0, 2.0]).unwrap();
    let patch = supertile(&rule, 0, 2).unwrap();
    let t = patch.tiles.iter().find(|t| t.kind == 0).copied().unwrap();
    let delta = 0.3;
    let got = evaluate(&f, &rule, &patch, [t.translation[0] + delta, 0.0]).unwrap();
    assert!((got.re - f.profile_value(0, [delta, 0.0])).abs() < 1e-15);
    // A shared endpoint resolves to a tile whose profile vanishes there.
    let boundary = patch.tiles[1].translation;
    assert_eq!(evaluate(&f, &rule, &patch, boundary).unwrap().re, 0.0);
    let shift = [17.25, 0.0];
    let moved = patch.translate(shift);
    let a = evaluate(&f, &rule, &patch, [t.translation[0] + delta, 0.0]).unwrap();
    let b = evaluate(&f, &rule, &moved, [t.translation[0] + delta + shift[0], 0.0]).unwrap();
    assert!((a - b).norm() < 1e-12);
    assert!(matches!(evaluate(&f, &rule, &patch, [-1e6, 0.0]), Err(crate::Error::Domain(_))));
}

#[test]
fn means_and_projection() {
    let fib = fixtures::fib();
    let phi = fixtures::golden();
    assert_eq!(mean(&CylindricalFunction::zero(&fib), &fib).unwrap(), Complex64::new(0.0, 0.0));
    let hat_a = CylindricalFunction::hat_on(&fib, 0, 1.0).unwrap();
    let freq_a = phi / (phi * phi + 1.0);
    assert!((mean(&hat_a, &fib).unwrap().re - freq_a * phi / 2.0).abs() < 1e-12);
    assert!((mean(&CylindricalFunction::constant(&fib, 1.0), &fib).unwrap().re - 1.0).abs() < 1e-12);
    for (name, rule) in fixtures::all() {
        let f = CylindricalFunction::hats(&rule, &(0..rule.type_count()).map(|k| 1.0 + k as f64).collect::<Vec<_>>()).unwrap();
        let z = zero_mean_project(&f, &rule).unwrap();
        assert!(mean(&z, &rule).unwrap().norm() < 1e-12, "{name}");
    }
}

#[test]
fn twisted_integral_examples() {
    let rule = fixtures::np13();
    assert_eq!(twisted_integral(&rule, &CylindricalFunction::zero(&rule), 20.0, [0.37, 0.0]).unwrap(), Complex64::new(0.0, 0.0));
    let ones = CylindricalFunction::constant(&rule, 1.0);
    let (patch, _) = patch_covering_cube(&rule, 20.0).unwrap();
    let counts = patch.count_by_type(2);
    let want: f64 = counts.iter().zip(&rule.prototiles).map(|(c, p)| *c as f64 * p.volume).sum();
    assert!((twisted_integral(&rule, &ones, 20.0, [0.0, 0.0]).unwrap().re - want).abs() < 1e-9);
    let f = CylindricalFunction::hats(&rule, &[1.0, -0.7]).unwrap();
    let fast = twisted_integral(&rule, &f, 20.0, [0.37, 0.0]).unwrap();
    let slow = twisted_integral_oracle(&rule, &f, 20.0, [0.37, 0.0]).unwrap();
    assert!((fast - slow).norm() <= 1e-6 * slow.norm(), "{fast} vs {slow}");
}

#[test]
fn oracle_on_single_tile() {
    let rule = fixtures::np13();
    let f = CylindricalFunction::hats(&rule, &[1.0, 1.0]).unwrap();
    let patch = supertile(&rule, 0, 0).unwrap();
    let got = twisted_integral_oracle_on(&rule, &f, &patch, [0.0, 0.0]).unwrap();
    assert!((got.re - fixtures::quadratic_root(3) / 2.0).abs() < 1e-12);
    let zero = CylindricalFunction::zero(&rule);
    assert_eq!(twisted_integral_oracle_on(&rule, &zero, &patch, [0.4, 0.0]).unwrap(), Complex64::new(0.0, 0.0));
}

#[test]
fn g_r_of_constant_is_fejer() {
    let rule = fixtures::np13();
    let ones = CylindricalFunction::constant(&rule, 1.0);
    for w in [0.0, 0.3, 0.45] {
        let est = g_r_estimate(&rule, &ones, 10.0, [w, 0.0], 16).unwrap();
        let want = fejer(1, 10.0, [w, 0.0]).unwrap();
        assert!((est.estimate - want).abs() <= 1e-9 * want.max(1.0), "ω = {w}: {} vs {want}", est.estimate);
    }
    let zero = CylindricalFunction::zero(&rule);
    assert_eq!(g_r_estimate(&rule, &zero, 10.0, [0.3, 0.0], 8).unwrap().estimate, 0.0);
}

#[test]
fn sigma_bound_examples() {
    let rule = rule_power(&fixtures::np13(), 2).unwrap();
    let f = zero_mean_project(&CylindricalFunction::hat_on(&rule, 0, 1.0).unwrap(), &rule).unwrap();
    let s = sigma_box_bound(&rule, &f, [0.37, 0.0], 0.125, 32).unwrap();
    assert_eq!(s.radius, 4.0);
    assert!((s.bound - PI * PI / 16.0 * s.g_r).abs() < 1e-12 * s.bound.max(1.0));
    assert!(s.bound >= 0.0);
    let zero = CylindricalFunction::zero(&rule);
    assert_eq!(sigma_box_bound(&rule, &zero, [0.37, 0.0], 0.25, 8).unwrap().bound, 0.0);
    assert!(sigma_box_bound(&rule, &f, [0.37, 0.0], 0.75, 8).is_err());
}

#[test]
fn correlations_of_constants() {
    let rule = fixtures::np13();
    let ones = CylindricalFunction::constant(&rule, 1.0);
    let c = correlation(&rule, &ones, &ones, [3.3, 0.0], 20.0).unwrap();
    assert!((c.re - 1.0).abs() < 1e-12);
    let ces = cesaro_correlation(&rule, &ones, &ones, 8.0, 4).unwrap();
    assert!((ces.value - 2.0).abs() < 1e-9, "{}", ces.value);
    assert!(ces.pitch <= max_pitch(&rule));
}

#[test]
fn zero_shift_correlation_is_inner_product() {
    let rule = fixtures::np13();
    let f = CylindricalFunction::hats(&rule, &[1.0, 0.5]).unwrap();
    let c = correlation(&rule, &f, &f, [0.0, 0.0], 200.0).unwrap().re;
    // ⟨f, f⟩ = Σ freq_i ∫ψ_i², with ∫hat² = |T|/3.
    let freq = type_frequencies(&rule).unwrap();
    let want: f64 = freq
        .iter()
        .zip(&rule.prototiles)
        .zip([1.0, 0.25])
        .map(|((w, p), c2)| w * c2 * p.volume / 3.0)
        .sum();
    assert!((c - want).abs() < 0.02 * want, "{c} vs {want}");
}

#[test]
fn fft_cesaro_matches_direct_sum() {
    let rule = fixtures::np13();
    let f = zero_mean_project(&CylindricalFunction::hats(&rule, &[1.0, 0.0]).unwrap(), &rule).unwrap();
    let radius = 2.0;
    let ces = cesaro_correlation(&rule, &f, &f, radius, 4).unwrap();
    let h = ces.pitch;
    let shifts = (2.0 * radius / h).round() as usize;
    let mut direct = 0.0;
    for m in 0..shifts {
        let s = -radius + (m as f64 + 0.5) * h;
        direct += correlation(&rule, &f, &f, [s, 0.0], ces.horizon).unwrap().norm_sqr();
    }
    direct *= h / radius;
    assert!((direct - ces.value).abs() < 1e-9 * direct.max(1e-12), "{direct} vs {}", ces.value);
}
