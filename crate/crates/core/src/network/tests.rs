use super::*;
use crate::heatprofile::HeatModel;

fn lossless(r: f64, t_att_mk: f64) -> ExperimentConfig {
    ExperimentConfig {
        signal_frequency_ghz: 5.65,
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
            attenuation_db_per_km: 0.0,
            center_temperature_mk: 110.0,
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

fn lossy() -> ExperimentConfig {
    let mut c = lossless(1.0, 35.0);
    c.nodes[0].losses = NodeLosses {
        squeezer_input_db: Some(0.05),
        squeezer_output_db: Some(0.2),
        local_arm_db: Some(0.4),
        link_arm_db: Some(0.1),
        receiver_db: None,
    };
    c.nodes[1].losses.receiver_db = Some(0.1);
    c.links[0].attenuation_db_per_km = 1.01;
    c
}

fn labels(chain: &[Stage]) -> Vec<&'static str> {
    chain.iter().map(|s| s.label).collect()
}

#[test]
fn zero_loss_chain_is_squeeze_then_splitter() {
    let chain = build_transfer_chain(&lossless(0.5, 35.0)).unwrap();
    assert_eq!(labels(&chain), ["S", "B"]);
}

#[test]
fn full_chain_order() {
    let chain = build_transfer_chain(&lossy()).unwrap();
    assert_eq!(labels(&chain), ["L1", "S", "L2", "B", "L3", "L3", "C", "L4"]);
    let ChannelElement::Loss { loss, .. } = chain[6].element else { panic!() };
    assert!((loss - 1.394e-3).abs() < 1e-6);
}

#[test]
fn chain_truncates_after_last_tap() {
    let mut c = lossy();
    c.taps = vec![Tap::HrInput];
    assert_eq!(labels(&build_transfer_chain(&c).unwrap()), ["L1", "S", "L2"]);
    c.taps = vec![Tap::HrOutput, Tap::HrInput];
    assert_eq!(labels(&build_transfer_chain(&c).unwrap()), ["L1", "S", "L2", "B"]);
}

#[test]
fn vacuum_through_lossless_chain() {
    let mut c = lossless(0.0, 35.0);
    c.nodes[0].attenuator_temperature_mk = Some(1e-6);
    let out = run_transfer(&c, None).unwrap();
    for tap in &out.taps {
        assert!(tap.squeezing_db.abs() < 1e-12);
        assert!((tap.report.purity - 1.0).abs() < 1e-12);
        assert_eq!(tap.report.negativity, 0.0);
    }
}

#[test]
fn hr_output_matches_closed_form() {
    let f = 5.65e9;
    for t_att in [1e-6, 60.0, 150.0] {
        let n = planck_occupation(f, t_att * 1e-3);
        for r in [0.0, 0.5, 1.3] {
            let out = run_transfer(&lossless(r, t_att), None).unwrap();
            let v = metrics::squeezed_variance(
                &GaussianState::from_covariance(crate::linalg::Matrix::from_rows(&out.tap(Tap::HrOutput).unwrap().covariance).unwrap())
                    .unwrap(),
                1,
            )
            .unwrap();
            let expected = (1.0 + 2.0 * n) * ((-2.0 * r).exp() + 1.0) / 8.0;
            assert!((v - expected).abs() < 1e-12, "r={r} n={n}: {v} vs {expected}");
        }
    }
}

#[test]
fn tap_order_follows_request() {
    let mut c = lossy();
    c.taps = vec![Tap::Receiver, Tap::HrInput];
    let out = run_transfer(&c, None).unwrap();
    assert_eq!(out.taps[0].tap, Tap::Receiver);
    assert_eq!(out.taps[1].tap, Tap::HrInput);
}

#[test]
fn validation_errors_carry_paths() {
    let mut c = lossless(0.5, 35.0);
    c.nodes[1].losses.squeezer_input_db = Some(0.1);
    assert!(matches!(c.validate(), Err(Error::Config { path, .. }) if path.contains("nodes[1].losses.squeezer_input_db")));

    let mut c = lossless(0.5, 35.0);
    c.squeeze.level_db = Some(3.0);
    assert!(c.validate().is_err());

    let mut c = lossless(0.5, 35.0);
    c.taps.clear();
    assert!(c.validate().is_err());

    let mut c = lossless(0.5, 35.0);
    c.links[0].to = "carol".into();
    assert!(matches!(c.validate(), Err(Error::Topology(_))));

    let mut c = lossless(0.5, 35.0);
    c.nodes.pop();
    assert!(matches!(build_transfer_chain(&c), Err(Error::Topology(_))));
}

#[test]
fn level_db_sets_squeeze_factor() {
    let sq = SqueezeSpec {
        factor: None,
        level_db: Some(6.70),
        angle_rad: 0.0,
        added_photons: 0.0,
    };
    assert!((sq.r() - 0.7713).abs() < 1e-4);
}

#[test]
fn sweep_requires_coupling_in_full_heating() {
    let mut c = lossy();
    c.sweep = Some(SweepSpec {
        mode: SweepMode::FullHeating,
        center_temperatures_k: vec![0.1, 0.2],
        coupling: None,
    });
    assert!(sweep_center_temperature(&c, &[0.1], None).is_err());
}

#[test]
fn sweep_rows_follow_input_order() {
    let mut c = lossy();
    let values: Vec<f64> = (1..=10).map(|i| 0.1 * i as f64).collect();
    c.sweep = Some(SweepSpec {
        mode: SweepMode::CenterOnly,
        center_temperatures_k: values.clone(),
        coupling: None,
    });
    let res = sweep_center_temperature(&c, &values, None).unwrap();
    let got: Vec<f64> = res.rows.iter().map(|r| r.t_center_k).collect();
    assert_eq!(got, values);
    assert!(sweep_center_temperature(&c, &[], None).is_err());
    assert!(sweep_center_temperature(&c, &[0.3, 0.2], None).is_err());
}

#[test]
fn uniform_profile_gives_uniform_photons() {
    let p = crate::heatprofile::TemperatureProfile {
        positions: vec![0.0, 1.0, 2.0, 3.0],
        temperatures: vec![0.2; 4],
        converged: true,
        iterations: 1,
    };
    let n = profile_photons(&p, 1.4e-3, 5.65e9).unwrap();
    assert!((n - planck_occupation(5.65e9, 0.2)).abs() < 1e-9);
}

#[test]
fn profile_is_driven_to_center_target() {
    let model = HeatModel::<f64>::default();
    for target in [0.09, 0.110, 0.3] {
        let p = profile_at_center(&model, target).unwrap();
        assert!((p.center_temperature() - target).abs() < 1e-6, "{target}");
    }
}

#[test]
fn calibration_hits_targets() {
    let mut c = lossy();
    c.squeeze.added_photons = 0.05;
    let cal = calibrate_squeezer(&c, None, 2.10, 0.501).unwrap();
    assert!((cal.squeezing_db - 2.10).abs() < 1e-9);
    assert!((cal.negativity - 0.501).abs() < 1e-9);
    assert!(cal.local_arm_db > 0.0);
    assert_eq!(cal.added_photons, 0.05);
    assert!(calibrate_squeezer(&c, None, 2.9, 0.5).is_err());
}
