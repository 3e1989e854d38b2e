//! CODATA 2018 physical constants (SI). h, k_B are exact by definition of the SI.

/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant ħ = h/2π (J·s).
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Stefan–Boltzmann constant (W·m⁻²·K⁻⁴).
pub const STEFAN_BOLTZMANN: f64 = 5.670_374_419e-8;

/// h/k_B (K·s): multiply by a frequency in Hz to get the photon energy in kelvin.
pub const PLANCK_OVER_BOLTZMANN: f64 = PLANCK / BOLTZMANN;
