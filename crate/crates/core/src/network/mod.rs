//! Squeezer → hybrid ring → cable → receiver transfer chain.
//!
//! Mode 0 carries the squeezed signal and stays at the sending node after the
//! hybrid ring; mode 1 enters the second hybrid-ring port and travels through
//! the cable to the receiver. Both inputs are thermal at the attenuator
//! temperature. Every segment loss couples to the mixing-chamber temperature
//! of the node it sits on; the cable couples to its centre temperature or,
//! with a profile bath, to the solved temperature profile.

mod config;
pub mod topology;

pub use config::*;
pub use topology::{
    compose_losses, compose_multihop, merge_equal_baths, square_lattice, LinkParams, Topology, TopologyLink,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{ChannelElement, GaussianState};
use crate::heatprofile::{self, HeatModel, Heater, TemperatureProfile};
use crate::metrics::{self, MetricReport};
use crate::thermal::planck_occupation;

/// One labelled step of the chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub label: &'static str,
    pub element: ChannelElement<f64>,
}

/// Temperatures (K) at which a chain is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Temperatures {
    pub center: f64,
    pub attenuator: f64,
    pub sender_mc: f64,
    pub receiver_mc: f64,
}

impl Temperatures {
    pub fn base(config: &ExperimentConfig) -> Result<Self> {
        let (sender, receiver) = config.endpoints()?;
        Ok(Self {
            center: config.link().center_temperature_mk * 1e-3,
            attenuator: sender.attenuator_temperature_mk.unwrap_or(0.0) * 1e-3,
            sender_mc: sender.mc_temperature_mk * 1e-3,
            receiver_mc: receiver.mc_temperature_mk * 1e-3,
        })
    }
}

/// Cable bath: a uniform temperature, or an effective photon number obtained
/// from a temperature profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CableBath {
    Uniform(f64),
    Photons(f64),
}

/// The last tap requested, which fixes where the chain is truncated.
fn last_tap(taps: &[Tap]) -> Tap {
    taps.iter().copied().max().unwrap_or(Tap::Receiver)
}

fn push_loss(stages: &mut Vec<Stage>, label: &'static str, mode: usize, loss: f64, photons: f64) {
    if loss > 0.0 {
        stages.push(Stage {
            label,
            element: ChannelElement::Loss {
                mode,
                loss,
                env_photons: photons,
            },
        });
    }
}

/// Chain for explicit temperatures and cable bath; zero losses are omitted
/// and the chain stops after the last requested tap.
pub fn build_chain_at(
    config: &ExperimentConfig,
    temps: &Temperatures,
    cable: CableBath,
    taps: &[Tap],
) -> Result<Vec<Stage>> {
    config.validate()?;
    let f = config.frequency_hz();
    let (sender, receiver) = config.endpoints()?;
    let n_sender = planck_occupation(f, temps.sender_mc);
    let n_receiver = planck_occupation(f, temps.receiver_mc);
    let loss = |db: Option<f64>| db_to_loss(db.unwrap_or(0.0));
    let last = last_tap(taps);

    let mut stages = Vec::new();
    push_loss(&mut stages, "L1", 0, loss(sender.losses.squeezer_input_db), n_sender);
    let sq = config.squeeze;
    stages.push(Stage {
        label: "S",
        element: ChannelElement::Squeeze {
            mode: 0,
            r: sq.r(),
            theta: sq.angle_rad,
            added_photons: sq.added_photons,
        },
    });
    push_loss(&mut stages, "L2", 0, loss(sender.losses.squeezer_output_db), n_sender);
    if last == Tap::HrInput {
        return Ok(stages);
    }
    stages.push(Stage {
        label: "B",
        element: ChannelElement::BeamSplitter {
            mode_i: 0,
            mode_j: 1,
            transmissivity: 0.5,
        },
    });
    if last == Tap::HrOutput {
        return Ok(stages);
    }
    push_loss(&mut stages, "L3", 0, loss(sender.losses.local_arm_db), n_sender);
    push_loss(&mut stages, "L3", 1, loss(sender.losses.link_arm_db), n_sender);
    let n_cable = match cable {
        CableBath::Uniform(t) => planck_occupation(f, t),
        CableBath::Photons(n) => n,
    };
    push_loss(&mut stages, "C", 1, config.link().loss(), n_cable);
    push_loss(&mut stages, "L4", 1, loss(receiver.losses.receiver_db), n_receiver);
    Ok(stages)
}

/// Chain at the configured base temperatures with a uniform cable bath.
pub fn build_transfer_chain(config: &ExperimentConfig) -> Result<Vec<Stage>> {
    let temps = Temperatures::base(config)?;
    build_chain_at(config, &temps, CableBath::Uniform(temps.center), &config.taps)
}

/// Two-mode thermal input at the attenuator temperature.
pub fn input_state(config: &ExperimentConfig, temps: &Temperatures) -> Result<GaussianState<f64>> {
    let n = planck_occupation(config.frequency_hz(), temps.attenuator);
    GaussianState::thermal(2, &[n, n])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TapResult {
    pub tap: Tap,
    /// Mode carrying the transferred signal at this tap.
    pub signal_mode: usize,
    pub squeezing_db: f64,
    pub signal_purity: f64,
    pub report: MetricReport<f64>,
    pub displacement: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferResult {
    pub temperatures: Temperatures,
    pub cable_photons: f64,
    pub chain: Vec<Stage>,
    pub taps: Vec<TapResult>,
}

impl TransferResult {
    pub fn tap(&self, tap: Tap) -> Option<&TapResult> {
        self.taps.iter().find(|t| t.tap == tap)
    }
}

fn tap_position(tap: Tap, chain: &[Stage]) -> usize {
    let after = |label: &str| chain.iter().rposition(|s| s.label == label);
    let pos = match tap {
        Tap::HrInput => after("L2").or_else(|| after("S")),
        Tap::HrOutput => after("B"),
        Tap::Receiver => Some(chain.len() - 1),
    };
    pos.map_or(chain.len(), |p| p + 1)
}

fn tap_result(tap: Tap, state: &GaussianState<f64>) -> Result<TapResult> {
    let signal_mode = if tap == Tap::HrInput { 0 } else { 1 };
    let report = MetricReport::compute(state)?;
    Ok(TapResult {
        tap,
        signal_mode,
        squeezing_db: metrics::squeezing_level(state, signal_mode)?,
        signal_purity: metrics::mode_purity(state, signal_mode)?,
        report,
        displacement: state.displacement().to_vec(),
        covariance: state.covariance().to_rows(),
    })
}

/// Propagates the input through the chain and evaluates each requested tap.
pub fn run_transfer_at(
    config: &ExperimentConfig,
    temps: &Temperatures,
    cable: CableBath,
    taps: &[Tap],
) -> Result<TransferResult> {
    let chain = build_chain_at(config, temps, cable, taps)?;
    let mut wanted: Vec<(usize, Tap)> = taps.iter().map(|&t| (tap_position(t, &chain), t)).collect();
    wanted.sort();
    let mut state = input_state(config, temps)?;
    let mut applied = 0;
    let mut results = Vec::with_capacity(wanted.len());
    for (pos, tap) in wanted {
        for stage in &chain[applied..pos] {
            state = state.apply(&stage.element)?;
        }
        applied = pos;
        results.push(tap_result(tap, &state)?);
    }
    results.sort_by_key(|r| taps.iter().position(|&t| t == r.tap));
    let cable_photons = match cable {
        CableBath::Uniform(t) => planck_occupation(config.frequency_hz(), t),
        CableBath::Photons(n) => n,
    };
    Ok(TransferResult {
        temperatures: *temps,
        cable_photons,
        chain,
        taps: results,
    })
}

/// Transfer at the configured base temperatures.
pub fn run_transfer(config: &ExperimentConfig, heat: Option<&HeatModel<f64>>) -> Result<TransferResult> {
    let temps = Temperatures::base(config)?;
    let cable = cable_bath(config, &temps, heat, None)?;
    run_transfer_at(config, &temps, cable, &config.taps)
}

/// Cable bath for the given temperatures. With a profile bath the heat model
/// is re-solved with the current boundary temperatures and driven to the
/// centre temperature.
pub fn cable_bath(
    config: &ExperimentConfig,
    temps: &Temperatures,
    heat: Option<&HeatModel<f64>>,
    tube_temperature: Option<f64>,
) -> Result<CableBath> {
    match config.link().bath {
        BathMode::Uniform => Ok(CableBath::Uniform(temps.center)),
        BathMode::Profile => {
            let heat = heat.ok_or_else(|| {
                Error::config("experiment.links.bath", "\"profile\" bath requires a heat model")
            })?;
            let mut model = heat.clone();
            model.length = config.link().length_m;
            model.boundary_left = temps.attenuator;
            model.boundary_right = temps.receiver_mc;
            if let Some(t) = tube_temperature {
                model.tube_temperature = t;
            }
            let profile = profile_at_center(&model, temps.center)?;
            Ok(CableBath::Photons(profile_photons(
                &profile,
                config.link().loss(),
                config.frequency_hz(),
            )?))
        }
    }
}

/// Solves `model` with its centre driven to `target`: by a centred heater
/// when the unheated centre is colder than the target, otherwise by scaling
/// the radiative load down.
pub fn profile_at_center(model: &HeatModel<f64>, target: f64) -> Result<TemperatureProfile<f64>> {
    let solve = |m: &HeatModel<f64>| heatprofile::solve_profile(m);
    let mut base = model.clone();
    base.heater = None;
    let unheated = solve(&base)?;
    let center = unheated.center_temperature();
    if (center - target).abs() <= 1e-9 {
        return Ok(unheated);
    }
    let bisect = |mut lo: f64, mut hi: f64, build: &dyn Fn(f64) -> HeatModel<f64>| -> Result<TemperatureProfile<f64>> {
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if solve(&build(mid))?.center_temperature() < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        solve(&build(0.5 * (lo + hi)))
    };
    if center < target {
        let heated = |p: f64| {
            let mut m = base.clone();
            m.heater = Some(Heater {
                position: 0.5 * m.length,
                power: p,
                width: heatprofile::DEFAULT_HEATER_WIDTH,
            });
            m
        };
        let mut hi = 1e-9;
        let mut grow = 0;
        while solve(&heated(hi))?.center_temperature() < target {
            hi *= 4.0;
            grow += 1;
            if grow > 60 {
                return Err(Error::NonConvergence {
                    what: "profile heater bracket",
                    iterations: grow,
                    residual: hi,
                });
            }
        }
        bisect(0.0, hi, &heated)
    } else {
        let scaled = |s: f64| {
            let mut m = base.clone();
            m.emissivity_perimeter *= s;
            m
        };
        if solve(&scaled(0.0))?.center_temperature() > target {
            return Err(Error::domain(
                "center temperature",
                format!("{target} K lies below the source-free profile of this heat model"),
            ));
        }
        bisect(0.0, 1.0, &scaled)
    }
}

/// Effective environment photon number of a cable whose total `loss` is spread
/// uniformly over the profile; exact composition of the per-cell losses.
pub fn profile_photons(profile: &TemperatureProfile<f64>, loss: f64, frequency: f64) -> Result<f64> {
    let cells = profile.temperatures.len() - 1;
    if loss <= 0.0 {
        return Ok(0.0);
    }
    let cell_loss = -(((1.0 - loss).ln()) / cells as f64).exp_m1();
    let mut acc = (0.0, 0.0);
    for w in profile.temperatures.windows(2) {
        let n = planck_occupation(frequency, 0.5 * (w[0] + w[1]));
        acc = if acc.0 == 0.0 {
            (cell_loss, n)
        } else {
            compose_losses(acc, (cell_loss, n))
        };
    }
    Ok(acc.1)
}

/// One row of a centre-temperature sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub t_center_k: f64,
    pub t_att_k: f64,
    pub t_alice_mc_k: f64,
    pub t_bob_mc_k: f64,
    pub s_hr_in_db: f64,
    pub s_hr_out_db: f64,
    pub s_receiver_db: f64,
    pub purity_receiver: f64,
    pub negativity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub mode: SweepMode,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub const COLUMNS: [&'static str; 9] = [
        "t_center_K",
        "t_att_K",
        "t_alice_mc_K",
        "t_bob_mc_K",
        "s_hr_in_dB",
        "s_hr_out_dB",
        "s_receiver_dB",
        "purity_receiver",
        "negativity",
    ];
}

impl SweepRow {
    pub fn values(&self) -> [f64; 9] {
        [
            self.t_center_k,
            self.t_att_k,
            self.t_alice_mc_k,
            self.t_bob_mc_k,
            self.s_hr_in_db,
            self.s_hr_out_db,
            self.s_receiver_db,
            self.purity_receiver,
            self.negativity,
        ]
    }
}

/// Temperatures at a sweep point.
pub fn sweep_temperatures(config: &ExperimentConfig, sweep: &SweepSpec, t_center: f64) -> Result<Temperatures> {
    let base = Temperatures::base(config)?;
    match sweep.mode {
        SweepMode::CenterOnly => Ok(Temperatures {
            center: t_center,
            ..base
        }),
        SweepMode::FullHeating => {
            let c = sweep.coupling.ok_or_else(|| {
                Error::config(
                    "experiment.sweep.coupling",
                    "full_heating mode needs fitted coupling parameters",
                )
            })?;
            Ok(Temperatures {
                center: t_center,
                attenuator: c.attenuator.evaluate(t_center),
                sender_mc: c.alice_mc.evaluate(t_center),
                receiver_mc: c.bob_mc.evaluate(t_center),
            })
        }
    }
}

/// Evaluates every centre temperature in `values` (in parallel, results in
/// input order). The full chain is always run so all columns are filled.
pub fn sweep_center_temperature(
    config: &ExperimentConfig,
    values: &[f64],
    heat: Option<&HeatModel<f64>>,
) -> Result<SweepResult> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("experiment.sweep", "missing [experiment.sweep] section"))?;
    validate_center_temperatures(values, "center temperatures")?;
    let all_taps = [Tap::HrInput, Tap::HrOutput, Tap::Receiver];
    let rows = values
        .par_iter()
        .map(|&t_center| -> Result<SweepRow> {
            let temps = sweep_temperatures(config, sweep, t_center)?;
            if !(temps.attenuator > 0.0 && temps.sender_mc > 0.0 && temps.receiver_mc > 0.0) {
                return Err(Error::domain(
                    "coupling fit",
                    format!("non-positive stage temperature at T_center = {t_center} K"),
                ));
            }
            let tube = match (sweep.mode, sweep.coupling.and_then(|c| c.mc_tube)) {
                (SweepMode::FullHeating, Some(fit)) => Some(fit.evaluate(t_center)),
                _ => None,
            };
            let cable = cable_bath(config, &temps, heat, tube)?;
            let out = run_transfer_at(config, &temps, cable, &all_taps)?;
            let get = |tap| out.tap(tap).expect("all taps evaluated");
            let rx = get(Tap::Receiver);
            Ok(SweepRow {
                t_center_k: t_center,
                t_att_k: temps.attenuator,
                t_alice_mc_k: temps.sender_mc,
                t_bob_mc_k: temps.receiver_mc,
                s_hr_in_db: get(Tap::HrInput).squeezing_db,
                s_hr_out_db: get(Tap::HrOutput).squeezing_db,
                s_receiver_db: rx.squeezing_db,
                purity_receiver: rx.signal_purity,
                negativity: rx.report.negativity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        mode: sweep.mode,
        rows,
    })
}

/// Outcome of [`calibrate_squeezer`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub factor: f64,
    pub local_arm_db: f64,
    pub added_photons: f64,
    pub squeezing_db: f64,
    pub negativity: f64,
    pub evaluations: usize,
}

fn bisect_increasing(mut lo: f64, mut hi: f64, target: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fits the squeeze factor and the sender's local-arm loss so that the
/// receiver reaches `target_squeezing_db` and the pair `target_negativity` at
/// base temperature.
///
/// The receiver's reduced state does not depend on the local-arm loss, so the
/// two one-dimensional solves decouple: `r` from the squeezing target, then the
/// local-arm loss from the negativity target. The added squeezer noise is an
/// input; at fixed receiver squeezing it barely moves the negativity, so the
/// two targets cannot identify it.
pub fn calibrate_squeezer(
    config: &ExperimentConfig,
    heat: Option<&HeatModel<f64>>,
    target_squeezing_db: f64,
    target_negativity: f64,
) -> Result<Calibration> {
    config.validate()?;
    let temps = Temperatures::base(config)?;
    let cable = cable_bath(config, &temps, heat, None)?;
    let sender_idx = config
        .nodes
        .iter()
        .position(|n| n.name == config.link().from)
        .ok_or_else(|| Error::Topology("sending node missing".into()))?;
    let mut evaluations = 0usize;
    let mut eval = |r: f64, local_db: f64| -> Result<[f64; 2]> {
        evaluations += 1;
        let mut cfg = config.clone();
        cfg.squeeze.factor = Some(r);
        cfg.squeeze.level_db = None;
        cfg.nodes[sender_idx].losses.local_arm_db = Some(local_db);
        let out = run_transfer_at(&cfg, &temps, cable, &[Tap::Receiver])?;
        let rx = &out.taps[0];
        Ok([rx.squeezing_db, rx.report.negativity])
    };
    const R_MAX: f64 = 10.0;
    const LOCAL_MAX_DB: f64 = 30.0;
    let reachable = eval(R_MAX, 0.0)?;
    if reachable[0] < target_squeezing_db {
        return Err(Error::NonConvergence {
            what: "squeezer calibration (squeezing target above the loss-limited maximum)",
            iterations: 1,
            residual: target_squeezing_db - reachable[0],
        });
    }
    let r = bisect_increasing(0.0, R_MAX, target_squeezing_db, |r| Ok(eval(r, 0.0)?[0]))?;
    let n_max = eval(r, 0.0)?[1];
    if n_max < target_negativity {
        return Err(Error::NonConvergence {
            what: "squeezer calibration (negativity target above the lossless-arm value)",
            iterations: 1,
            residual: target_negativity - n_max,
        });
    }
    // negativity falls with the local-arm loss; bisect on its negative
    let local_db = bisect_increasing(0.0, LOCAL_MAX_DB, -target_negativity, |db| Ok(-eval(r, db)?[1]))?;
    let f = eval(r, local_db)?;
    Ok(Calibration {
        factor: r,
        local_arm_db: local_db,
        added_photons: config.squeeze.added_photons,
        squeezing_db: f[0],
        negativity: f[1],
        evaluations,
    })
}

#[cfg(test)]
mod tests;
