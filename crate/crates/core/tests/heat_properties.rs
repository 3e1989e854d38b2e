use cryolink::heatprofile::{self, ConductivityModel, HeatModel, Heater, ResponseFit};
use cryolink::HeatModel64;
use proptest::prelude::*;

fn symmetric(t_b: f64, power: f64) -> HeatModel64 {
    HeatModel {
        boundary_left: t_b,
        boundary_right: t_b,
        heater: Some(Heater {
            position: 3.0,
            power,
            width: 0.05,
        }),
        ..HeatModel::default()
    }
}

#[test]
fn grid_refinement_barely_moves_the_centre() {
    let coarse = heatprofile::solve_profile(&HeatModel64::default()).unwrap().center_temperature();
    let fine = heatprofile::solve_profile(&HeatModel64 {
        grid_points: 1201,
        ..HeatModel::default()
    })
    .unwrap()
    .center_temperature();
    assert!((fine - coarse).abs() / coarse < 5e-3);
}

#[test]
fn symmetric_model_gives_symmetric_profile() {
    let p = heatprofile::solve_profile(&symmetric(0.03, 1e-7)).unwrap();
    let n = p.temperatures.len();
    for i in 0..n {
        assert!((p.temperatures[i] - p.temperatures[n - 1 - i]).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn maximum_principle(t_b in 0.01..0.06f64, power in 0.0..1e-6f64) {
        let mut m = symmetric(t_b, power);
        // sources must be non-negative: keep the tube and radiation warmer than the ends
        m.tube_temperature = t_b.max(m.tube_temperature);
        let p = heatprofile::solve_profile(&m).unwrap();
        for &t in &p.temperatures {
            prop_assert!(t >= t_b - 1e-12);
        }
    }

    #[test]
    fn centre_rises_with_heater_power(p1 in 0.0..1e-6f64, dp in 0.0..1e-6f64) {
        let a = heatprofile::solve_profile(&symmetric(0.03, p1)).unwrap().center_temperature();
        let b = heatprofile::solve_profile(&symmetric(0.03, p1 + dp)).unwrap().center_temperature();
        prop_assert!(b >= a - 1e-9);
    }

    #[test]
    fn boundaries_are_exact(left in 0.01..0.2f64, right in 0.01..0.2f64, n in 3usize..200) {
        let m = HeatModel64 {
            grid_points: n,
            boundary_left: left,
            boundary_right: right,
            ..HeatModel::default()
        };
        let p = heatprofile::solve_profile(&m).unwrap();
        prop_assert_eq!(p.temperatures[0], left);
        prop_assert_eq!(*p.temperatures.last().unwrap(), right);
    }

    #[test]
    fn source_free_constant_conductivity_is_linear(left in 0.01..1.0f64, right in 0.01..1.0f64) {
        let mut m = HeatModel::source_free(6.0, 61, left, right);
        m.conductivity = ConductivityModel::Constant { lambda: 3.0 };
        let p = heatprofile::solve_profile(&m).unwrap();
        for (x, t) in p.positions.iter().zip(&p.temperatures) {
            prop_assert!((t - (left + (right - left) * x / 6.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_round_trip(a in -0.5..0.5f64, b in -0.2..0.2f64, c in -0.5..0.5f64) {
        let truth = ResponseFit::new(a, b, c);
        let ts: Vec<f64> = (0..40).map(|i| 0.05 + 0.025 * i as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|&t| heatprofile::evaluate_fit(&truth, t)).collect();
        let fit = heatprofile::fit_response(&ts, &ys).unwrap();
        prop_assert!((fit.a - a).abs() < 1e-6 && (fit.b - b).abs() < 1e-6 && (fit.c - c).abs() < 1e-6);
        prop_assert_eq!(heatprofile::evaluate_fit(&truth, 0.4), 0.4 * a + b);
    }
}
