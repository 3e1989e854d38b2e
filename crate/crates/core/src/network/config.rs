//! Declarative experiment and heat-model configuration.
//!
//! Units are part of every key name. Unknown keys are rejected by the
//! deserializer; [`ConfigFile::validate`] checks ranges and cross-references
//! and reports the dotted path of the offending key.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heatprofile::{self, ConductivityModel, HeatModel, Heater, ResponseFit};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat: Option<HeatSpec>,
}

impl ConfigFile {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.experiment.is_none() && self.heat.is_none() {
            return Err(Error::config("", "config needs an [experiment] or [heat] section"));
        }
        if let Some(heat) = &self.heat {
            heat.to_model().map_err(|e| Error::config("heat", e.to_string()))?;
        }
        if let Some(exp) = &self.experiment {
            exp.validate()?;
            if exp.links.iter().any(|l| l.bath == BathMode::Profile) && self.heat.is_none() {
                return Err(Error::config(
                    "experiment.links.bath",
                    "\"profile\" bath requires a [heat] section",
                ));
            }
        }
        Ok(())
    }

    pub fn experiment(&self) -> Result<&ExperimentConfig> {
        self.experiment
            .as_ref()
            .ok_or_else(|| Error::config("experiment", "missing [experiment] section"))
    }

    pub fn heat(&self) -> Result<&HeatSpec> {
        self.heat
            .as_ref()
            .ok_or_else(|| Error::config("heat", "missing [heat] section"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub signal_frequency_ghz: f64,
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
    pub squeeze: SqueezeSpec,
    pub taps: Vec<Tap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

/// Segment losses in dB. The sender uses the first four, the receiver only
/// `receiver_db`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeLosses {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeezer_input_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeezer_output_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_arm_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_arm_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receiver_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    pub mc_temperature_mk: f64,
    /// Temperature of the attenuators feeding the squeezer and the second
    /// hybrid-ring port; sender only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attenuator_temperature_mk: Option<f64>,
    #[serde(default)]
    pub losses: NodeLosses,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathMode {
    /// Whole cable at its centre temperature.
    #[default]
    Uniform,
    /// Loss distributed over the solved temperature profile.
    Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub from: String,
    pub to: String,
    pub length_m: f64,
    pub attenuation_db_per_km: f64,
    pub center_temperature_mk: f64,
    #[serde(default)]
    pub bath: BathMode,
}

impl LinkSpec {
    /// Linear cable loss `1 − 10^(−αℓ/10⁴)`.
    pub fn loss(&self) -> f64 {
        db_to_loss(self.attenuation_db_per_km * self.length_m / 1000.0)
    }
}

/// Linear loss of an attenuation given in dB.
pub fn db_to_loss(db: f64) -> f64 {
    -(-db / 10.0 * std::f64::consts::LN_10).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeSpec {
    /// Squeeze factor r.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    /// Ideal squeezing level on vacuum; sets `r = S·ln10/20`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_db: Option<f64>,
    #[serde(default)]
    pub angle_rad: f64,
    #[serde(default)]
    pub added_photons: f64,
}

impl SqueezeSpec {
    pub fn r(&self) -> f64 {
        match (self.factor, self.level_db) {
            (Some(r), _) => r,
            (None, Some(db)) => db * std::f64::consts::LN_10 / 20.0,
            (None, None) => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tap {
    HrInput,
    HrOutput,
    Receiver,
}

impl Tap {
    pub fn name(self) -> &'static str {
        match self {
            Tap::HrInput => "hr_input",
            Tap::HrOutput => "hr_output",
            Tap::Receiver => "receiver",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    FullHeating,
    CenterOnly,
}

/// Fitted response `T(T_center)` of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub a: f64,
    pub b_k: f64,
    pub c: f64,
}

impl FitSpec {
    pub fn to_fit(self) -> ResponseFit<f64> {
        ResponseFit::new(self.a, self.b_k, self.c)
    }

    pub fn evaluate(self, t_center: f64) -> f64 {
        heatprofile::evaluate_fit(&self.to_fit(), t_center)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub attenuator: FitSpec,
    pub alice_mc: FitSpec,
    pub bob_mc: FitSpec,
    /// Only used with a profile bath.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_tube: Option<FitSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub center_temperatures_k: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSpec>,
}

fn check(cond: bool, path: impl Into<String>, message: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::config(path, message))
    }
}

fn finite_positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn finite_non_negative(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

/// Validates a list of sweep temperatures.
pub fn validate_center_temperatures(values: &[f64], path: &str) -> Result<()> {
    check(!values.is_empty(), path, "temperature list is empty")?;
    for (i, &t) in values.iter().enumerate() {
        check(finite_positive(t), format!("{path}[{i}]"), format!("must be > 0 K, got {t}"))?;
    }
    check(
        values.windows(2).all(|w| w[0] < w[1]),
        path,
        "values must be strictly ascending",
    )
}

impl ExperimentConfig {
    pub fn frequency_hz(&self) -> f64 {
        self.signal_frequency_ghz * 1e9
    }

    pub fn link(&self) -> &LinkSpec {
        &self.links[0]
    }

    /// Sending (squeezer) and receiving node, in that order.
    pub fn endpoints(&self) -> Result<(&NodeSpec, &NodeSpec)> {
        let link = self.links.first().ok_or_else(|| Error::Topology("no link defined".into()))?;
        let find = |name: &str| {
            self.nodes
                .iter()
                .find(|n| n.name == name)
                .ok_or_else(|| Error::Topology(format!("link endpoint {name:?} is not a node")))
        };
        Ok((find(&link.from)?, find(&link.to)?))
    }

    pub fn validate(&self) -> Result<()> {
        check(
            finite_positive(self.signal_frequency_ghz),
            "experiment.signal_frequency_ghz",
            "must be > 0",
        )?;
        if self.nodes.len() != 2 || self.links.len() != 1 {
            return Err(Error::Topology(format!(
                "a transfer needs exactly two nodes and one link, got {} nodes and {} links",
                self.nodes.len(),
                self.links.len()
            )));
        }
        if self.nodes[0].name == self.nodes[1].name {
            return Err(Error::Topology("node names must be distinct".into()));
        }
        let link = &self.links[0];
        if link.from == link.to {
            return Err(Error::Topology("link must join two distinct nodes".into()));
        }
        let (sender, receiver) = self.endpoints()?;

        for (i, node) in self.nodes.iter().enumerate() {
            let p = format!("experiment.nodes[{i}]");
            check(
                finite_positive(node.mc_temperature_mk),
                format!("{p}.mc_temperature_mk"),
                "must be > 0",
            )?;
            let l = node.losses;
            for (key, v) in [
                ("squeezer_input_db", l.squeezer_input_db),
                ("squeezer_output_db", l.squeezer_output_db),
                ("local_arm_db", l.local_arm_db),
                ("link_arm_db", l.link_arm_db),
                ("receiver_db", l.receiver_db),
            ] {
                if let Some(v) = v {
                    check(finite_non_negative(v), format!("{p}.losses.{key}"), "must be ≥ 0 dB")?;
                }
            }
        }
        let sender_idx = self.nodes.iter().position(|n| n.name == sender.name).unwrap_or(0);
        let receiver_idx = 1 - sender_idx;
        let sp = format!("experiment.nodes[{sender_idx}]");
        let rp = format!("experiment.nodes[{receiver_idx}]");
        match sender.attenuator_temperature_mk {
            Some(t) => check(finite_positive(t), format!("{sp}.attenuator_temperature_mk"), "must be > 0")?,
            None => {
                return Err(Error::config(
                    format!("{sp}.attenuator_temperature_mk"),
                    "required on the sending node",
                ))
            }
        }
        check(
            receiver.attenuator_temperature_mk.is_none(),
            format!("{rp}.attenuator_temperature_mk"),
            "only the sending node has attenuators in the chain",
        )?;
        check(
            sender.losses.receiver_db.is_none(),
            format!("{sp}.losses.receiver_db"),
            "belongs on the receiving node",
        )?;
        let r = receiver.losses;
        for (key, v) in [
            ("squeezer_input_db", r.squeezer_input_db),
            ("squeezer_output_db", r.squeezer_output_db),
            ("local_arm_db", r.local_arm_db),
            ("link_arm_db", r.link_arm_db),
        ] {
            check(v.is_none(), format!("{rp}.losses.{key}"), "belongs on the sending node")?;
        }

        check(finite_positive(link.length_m), "experiment.links[0].length_m", "must be > 0")?;
        check(
            finite_non_negative(link.attenuation_db_per_km),
            "experiment.links[0].attenuation_db_per_km",
            "must be ≥ 0",
        )?;
        check(
            finite_positive(link.center_temperature_mk),
            "experiment.links[0].center_temperature_mk",
            "must be > 0",
        )?;

        let sq = &self.squeeze;
        match (sq.factor, sq.level_db) {
            (Some(_), Some(_)) => {
                return Err(Error::config("experiment.squeeze", "give either factor or level_db, not both"))
            }
            (None, None) => return Err(Error::config("experiment.squeeze", "factor or level_db is required")),
            (Some(r), None) => check(finite_non_negative(r), "experiment.squeeze.factor", "must be ≥ 0")?,
            (None, Some(s)) => check(finite_non_negative(s), "experiment.squeeze.level_db", "must be ≥ 0")?,
        }
        check(sq.angle_rad.is_finite(), "experiment.squeeze.angle_rad", "must be finite")?;
        check(
            finite_non_negative(sq.added_photons),
            "experiment.squeeze.added_photons",
            "must be ≥ 0",
        )?;

        check(!self.taps.is_empty(), "experiment.taps", "at least one tap is required")?;
        let mut seen = self.taps.clone();
        seen.sort();
        seen.dedup();
        check(seen.len() == self.taps.len(), "experiment.taps", "duplicate tap")?;

        if let Some(sweep) = &self.sweep {
            validate_center_temperatures(&sweep.center_temperatures_k, "experiment.sweep.center_temperatures_k")?;
            if sweep.mode == SweepMode::FullHeating {
                check(
                    sweep.coupling.is_some(),
                    "experiment.sweep.coupling",
                    "full_heating mode needs fitted coupling parameters",
                )?;
            }
            if let Some(c) = &sweep.coupling {
                let fits = [
                    ("attenuator", Some(c.attenuator)),
                    ("alice_mc", Some(c.alice_mc)),
                    ("bob_mc", Some(c.bob_mc)),
                    ("mc_tube", c.mc_tube),
                ];
                for (key, fit) in fits {
                    if let Some(f) = fit {
                        check(
                            f.a.is_finite() && f.b_k.is_finite() && f.c.is_finite(),
                            format!("experiment.sweep.coupling.{key}"),
                            "parameters must be finite",
                        )?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConductivitySpec {
    Linear { kappa0_w_per_m_k2: f64 },
    Constant { lambda_w_per_m_k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeaterSpec {
    pub position_m: f64,
    pub power_w: f64,
    #[serde(default = "default_heater_width")]
    pub width_m: f64,
}

fn default_heater_width() -> f64 {
    heatprofile::DEFAULT_HEATER_WIDTH
}

/// Heat-model parameters; every key defaults to the calibrated model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatSpec {
    pub length_m: f64,
    pub grid_points: usize,
    pub boundary_left_mk: f64,
    pub boundary_right_mk: f64,
    pub conductivity: ConductivitySpec,
    pub cross_section_m2: f64,
    pub emissivity_perimeter_m: f64,
    pub radiation_temperature_k: f64,
    pub coupling_w_per_m_k: f64,
    pub tube_temperature_mk: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heater: Option<HeaterSpec>,
    pub tolerance_k: f64,
    pub max_iterations: usize,
    pub relaxation: f64,
}

impl Default for HeatSpec {
    fn default() -> Self {
        Self::from_model(&HeatModel::default())
    }
}

impl HeatSpec {
    pub fn from_model(m: &HeatModel<f64>) -> Self {
        Self {
            length_m: m.length,
            grid_points: m.grid_points,
            boundary_left_mk: m.boundary_left * 1e3,
            boundary_right_mk: m.boundary_right * 1e3,
            conductivity: match m.conductivity {
                ConductivityModel::Linear { kappa0 } => ConductivitySpec::Linear {
                    kappa0_w_per_m_k2: kappa0,
                },
                ConductivityModel::Constant { lambda } => ConductivitySpec::Constant {
                    lambda_w_per_m_k: lambda,
                },
            },
            cross_section_m2: m.cross_section,
            emissivity_perimeter_m: m.emissivity_perimeter,
            radiation_temperature_k: m.radiation_temperature,
            coupling_w_per_m_k: m.coupling,
            tube_temperature_mk: m.tube_temperature * 1e3,
            heater: m.heater.map(|h| HeaterSpec {
                position_m: h.position,
                power_w: h.power,
                width_m: h.width,
            }),
            tolerance_k: m.tolerance,
            max_iterations: m.max_iterations,
            relaxation: m.relaxation,
        }
    }

    pub fn to_model(&self) -> Result<HeatModel<f64>> {
        let model = HeatModel {
            length: self.length_m,
            grid_points: self.grid_points,
            boundary_left: self.boundary_left_mk * 1e-3,
            boundary_right: self.boundary_right_mk * 1e-3,
            conductivity: match self.conductivity {
                ConductivitySpec::Linear { kappa0_w_per_m_k2 } => ConductivityModel::Linear {
                    kappa0: kappa0_w_per_m_k2,
                },
                ConductivitySpec::Constant { lambda_w_per_m_k } => ConductivityModel::Constant {
                    lambda: lambda_w_per_m_k,
                },
            },
            cross_section: self.cross_section_m2,
            emissivity_perimeter: self.emissivity_perimeter_m,
            radiation_temperature: self.radiation_temperature_k,
            coupling: self.coupling_w_per_m_k,
            tube_temperature: self.tube_temperature_mk * 1e-3,
            heater: self.heater.map(|h| Heater {
                position: h.position_m,
                power: h.power_w,
                width: h.width_m,
            }),
            tolerance: self.tolerance_k,
            max_iterations: self.max_iterations,
            relaxation: self.relaxation,
        };
        model.validate()?;
        Ok(model)
    }
}
