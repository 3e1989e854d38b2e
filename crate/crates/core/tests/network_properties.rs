use cryolink::network::{
    self, BathMode, ExperimentConfig, LinkSpec, NodeLosses, NodeSpec, SqueezeSpec, Tap,
};
use cryolink::thermal;
use proptest::prelude::*;

const F_GHZ: f64 = 5.65;

fn config(r: f64, t_att_mk: f64, center_mk: f64, db_per_km: f64) -> ExperimentConfig {
    ExperimentConfig {
        signal_frequency_ghz: F_GHZ,
        nodes: vec![
            NodeSpec {
                name: "alice".into(),
                mc_temperature_mk: 25.0,
                attenuator_temperature_mk: Some(t_att_mk),
                losses: NodeLosses::default(),
            },
            NodeSpec {
                name: "bob".into(),
                mc_temperature_mk: 21.0,
                attenuator_temperature_mk: None,
                losses: NodeLosses::default(),
            },
        ],
        links: vec![LinkSpec {
            from: "alice".into(),
            to: "bob".into(),
            length_m: 6.0,
            attenuation_db_per_km: db_per_km,
            center_temperature_mk: center_mk,
            bath: BathMode::Uniform,
        }],
        squeeze: SqueezeSpec {
            factor: Some(r),
            level_db: None,
            angle_rad: 0.0,
            added_photons: 0.0,
        },
        taps: vec![Tap::HrInput, Tap::HrOutput, Tap::Receiver],
        sweep: None,
    }
}

fn lossless(r: f64, n_th: f64) -> ExperimentConfig {
    let t = if n_th == 0.0 {
        1e-6
    } else {
        thermal::temperature_for_occupation(F_GHZ * 1e9, n_th) * 1e3
    };
    config(r, t, 110.0, 0.0)
}

fn min_variance(cov: &[Vec<f64>], mode: usize) -> f64 {
    let (a, b, c) = (cov[2 * mode][2 * mode], cov[2 * mode][2 * mode + 1], cov[2 * mode + 1][2 * mode + 1]);
    0.5 * (a + c - ((a - c).powi(2) + 4.0 * b * b).sqrt())
}

#[test]
fn hr_output_variance_closed_form_over_grid() {
    for i in 0..=8 {
        let r = 0.25 * i as f64;
        for n in [0.0, 0.1, 0.5, 1.0] {
            let out = network::run_transfer(&lossless(r, n), None).unwrap();
            let v = min_variance(&out.tap(Tap::HrOutput).unwrap().covariance, 1);
            let expected = (1.0 + 2.0 * n) * ((-2.0 * r).exp() + 1.0) / 8.0;
            assert!((v - expected).abs() < 1e-12, "r={r} n={n}: {v} vs {expected}");
        }
    }
}

proptest! {
    #[test]
    fn hybrid_ring_output_below_three_db(r in 0.0..10.0f64) {
        let out = network::run_transfer(&lossless(r, 0.0), None).unwrap();
        prop_assert!(out.tap(Tap::HrOutput).unwrap().squeezing_db <= 3.0103);
    }

    #[test]
    fn lossless_receiver_negativity_from_amplitude_squeezing(r in 0.0..2.0f64) {
        let out = network::run_transfer(&lossless(r, 0.0), None).unwrap();
        let s_pre = out.tap(Tap::HrInput).unwrap().squeezing_db;
        let n = out.tap(Tap::Receiver).unwrap().report.negativity;
        prop_assert!((n - (10f64.powf(s_pre / 20.0) - 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn receiver_purity_falls_with_attenuator_temperature(r in 0.0..1.5f64, t1 in 1.0..400.0f64, dt in 0.0..400.0f64) {
        let mut lo = config(r, t1, 110.0, 1.01);
        lo.nodes[0].losses.link_arm_db = Some(0.2);
        let mut hi = lo.clone();
        hi.nodes[0].attenuator_temperature_mk = Some(t1 + dt);
        let p = |c: &ExperimentConfig| network::run_transfer(c, None).unwrap().tap(Tap::Receiver).unwrap().signal_purity;
        prop_assert!(p(&hi) <= p(&lo) + 1e-12);
    }
}

#[test]
fn superconducting_cable_escapes_sudden_death() {
    // 3.0103 dB over 6 m is a 50 % loss
    let normal_db_per_km = 10.0 * 2f64.log10() / 6e-3;
    let n_at = |db_per_km: f64, center_mk: f64| {
        let out = network::run_transfer(&config(0.8, 35.0, center_mk, db_per_km), None).unwrap();
        out.tap(Tap::Receiver).unwrap().report.negativity
    };
    assert!(n_at(normal_db_per_km, 20.0) > 0.0);
    assert_eq!(n_at(normal_db_per_km, 1000.0), 0.0);
    assert!(n_at(1.01, 1000.0) > 0.0);
}
