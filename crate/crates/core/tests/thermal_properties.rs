use cryolink::constants::{BOLTZMANN, PLANCK};
use cryolink::thermal::{self, DissipationSpectrum};
use proptest::prelude::*;

fn theta(f: f64) -> f64 {
    PLANCK * f / BOLTZMANN
}

/// Third temperature derivative of `1/(e^{θ/T} − 1)` by a 7-point central
/// stencil, in units where the answer only needs the right sign.
fn third_derivative_fd(f: f64, t: f64) -> f64 {
    let n = |t: f64| 1.0 / ((theta(f) / t).exp_m1());
    let h = t * 1e-3;
    (-n(t - 3.0 * h) + 8.0 * n(t - 2.0 * h) - 13.0 * n(t - h) + 13.0 * n(t + h) - 8.0 * n(t + 2.0 * h)
        + n(t + 3.0 * h))
        / (8.0 * h.powi(3))
}

proptest! {
    #[test]
    fn planck_limits(f_ghz in 1.0..20.0f64) {
        let f = f_ghz * 1e9;
        prop_assert!(thermal::planck_occupation(f, 1e-4) < 1e-20);
        prop_assert_eq!(thermal::planck_occupation(f, 0.0), 0.0);
        let t = 100.0 * theta(f);
        let ratio = thermal::planck_occupation(f, t) / (t / theta(f));
        prop_assert!((ratio - 1.0).abs() < 0.01);
    }

    #[test]
    fn threshold_ordering(f_ghz in 0.5..50.0f64) {
        let f = f_ghz * 1e9;
        let tk = thermal::threshold_kappa(f).unwrap();
        let ln3 = thermal::max_input_temperature_for_squeezing(f);
        let ln2 = thermal::sudden_death_temperature(f);
        prop_assert!(tk < ln3 && ln3 < ln2);
    }

    #[test]
    fn occupation_inverse(f_ghz in 1.0..20.0f64, t in 0.01..5.0f64) {
        let f = f_ghz * 1e9;
        let n = thermal::planck_occupation(f, t);
        prop_assert!((thermal::temperature_for_occupation(f, n) - t).abs() < 1e-9 * t);
    }
}

#[test]
fn threshold_matches_brute_force_sign_scan() {
    for f_ghz in [1.0, 5.65, 12.0, 20.0] {
        let f = f_ghz * 1e9;
        let th = theta(f);
        let grid: Vec<f64> = (0..=20_000).map(|i| th * (0.05 + 0.95 * i as f64 / 20_000.0)).collect();
        let signs: Vec<f64> = grid.iter().map(|&t| third_derivative_fd(f, t)).collect();
        let k = signs.windows(2).position(|w| w[0] * w[1] < 0.0).expect("sign change");
        let scan = 0.5 * (grid[k] + grid[k + 1]);
        let tk = thermal::threshold_kappa(f).unwrap();
        assert!((tk - scan).abs() / scan < 1e-4, "{f_ghz} GHz: {tk} vs {scan}");
    }
}

#[test]
fn superconducting_spectrum_suppresses_fdt_noise() {
    let prefactor = 1e-3;
    let f0 = 5.65e9;
    let b = 0.5e9;
    let normal = thermal::fdt_voltage_variance(1.0, &DissipationSpectrum::Constant { epsilon: prefactor }, f0, b).unwrap();
    let sc = thermal::fdt_voltage_variance(1.0, &DissipationSpectrum::nbti(prefactor), f0, b).unwrap();
    assert!(normal / sc >= 1e3, "ratio {}", normal / sc);
}

#[test]
fn fdt_zero_temperature_closed_form() {
    let eps = 2e-3;
    let (f0, b) = (5.65e9, 0.1e9);
    let v = thermal::fdt_voltage_variance(0.0, &DissipationSpectrum::Constant { epsilon: eps }, f0, b).unwrap();
    let hbar = PLANCK / (2.0 * std::f64::consts::PI);
    let expected = 4.0 * hbar * eps * 2.0 * std::f64::consts::PI * b;
    assert!((v - expected).abs() < 1e-12 * expected);
}

#[test]
fn single_precision_threshold() {
    let t32 = thermal::threshold_kappa(5.65e9f32).unwrap();
    let t64 = thermal::threshold_kappa(5.65e9f64).unwrap();
    assert!((t32 as f64 - t64).abs() / t64 < 1e-5);
}
