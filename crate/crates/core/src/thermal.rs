//! Thermal photon statistics of a microwave mode and the threshold
//! temperatures derived from them.
//!
//! Frequencies are ordinary frequencies in Hz (`ω = 2πf`), temperatures in K.
//! Every threshold scales linearly with frequency through `hf/k_B`.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, PLANCK_OVER_BOLTZMANN};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::scalar::Scalar;

/// Superconducting gap frequency ω_Δ/2π of NbTi (Hz).
pub const NBTI_GAP_FREQUENCY: f64 = 370e9;

/// Relative tolerance of the fluctuation–dissipation band integral.
pub const FDT_REL_TOL: f64 = 1e-8;

/// Photon energy `hf/k_B` in kelvin.
#[inline]
pub fn photon_temperature<T: Scalar>(frequency: T) -> T {
    T::lit(PLANCK_OVER_BOLTZMANN) * frequency
}

/// Mode frequency and bath temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalContext<T> {
    pub frequency: T,
    pub temperature: T,
}

impl<T: Scalar> ThermalContext<T> {
    pub fn new(frequency: T, temperature: T) -> Result<Self> {
        if !(frequency > T::zero()) || !frequency.is_finite() {
            return Err(Error::domain("frequency", format!("must be > 0, got {frequency}")));
        }
        if !(temperature >= T::zero()) || !temperature.is_finite() {
            return Err(Error::domain(
                "temperature",
                format!("must be ≥ 0, got {temperature}"),
            ));
        }
        Ok(Self {
            frequency,
            temperature,
        })
    }

    pub fn occupation(&self) -> T {
        planck_occupation(self.frequency, self.temperature)
    }
}

/// Mean thermal photon number `1/(e^{hf/k_BT} − 1)`; zero at `T ≤ 0`.
pub fn planck_occupation<T: Scalar>(frequency: T, temperature: T) -> T {
    if !(temperature > T::zero()) {
        return T::zero();
    }
    let x = photon_temperature(frequency) / temperature;
    T::one() / x.exp_m1()
}

/// Temperature at which the mode carries `photons` thermal photons.
pub fn temperature_for_occupation<T: Scalar>(frequency: T, photons: T) -> T {
    photon_temperature(frequency) / (T::one() / photons).ln_1p()
}

/// Dimensionless `∂³n/∂T³` scaled by `(hf/k_B)³`, as a function of `x = hf/k_BT`.
///
/// With `D = x² d/dx` one has `∂_T = −D/θ`, hence
/// `θ³ ∂³_T n = −(6x⁴g' + 6x⁵g'' + x⁶g''')` for `g(x) = 1/(eˣ − 1)`.
pub fn planck_third_derivative_scaled<T: Scalar>(x: T) -> T {
    let u = x.exp();
    let m = x.exp_m1();
    let g1 = -u / (m * m);
    let g2 = u * (u + T::one()) / (m * m * m);
    let g3 = -u * (u * u + T::lit(4.0) * u + T::one()) / (m * m * m * m);
    let x4 = x.powi(4);
    -(T::lit(6.0) * x4 * g1 + T::lit(6.0) * x4 * x * g2 + x4 * x * x * g3)
}

/// Sign-carrying factor of the third derivative with the positive prefactor
/// `x⁴ u/(eˣ−1)⁴` removed; well-conditioned for the root search.
fn third_derivative_kernel<T: Scalar>(x: T) -> T {
    let u = x.exp();
    let m = x.exp_m1();
    let six = T::lit(6.0);
    six * m * m - six * x * m * (u + T::one()) + x * x * (u * u + T::lit(4.0) * u + T::one())
}

/// Maximal-curvature temperature `T_κ`: the root of `∂³_T n_th(f, T) = 0`.
///
/// Bisection on `x = hf/k_BT` over the bracket `T ∈ [0.05, 1.0]·hf/k_B`.
pub fn threshold_kappa<T: Scalar>(frequency: T) -> Result<T> {
    if !(frequency > T::zero()) || !frequency.is_finite() {
        return Err(Error::domain("frequency", format!("must be > 0, got {frequency}")));
    }
    // x = 1/(T/θ): bracket T/θ ∈ [0.05, 1] ↔ x ∈ [1, 20]
    let (mut lo, mut hi) = (T::one(), T::lit(20.0));
    let (f_lo, f_hi) = (third_derivative_kernel(lo), third_derivative_kernel(hi));
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NonConvergence {
            what: "threshold_kappa bracket",
            iterations: 0,
            residual: f_lo.to_f64_lossy(),
        });
    }
    let max_iter = 200;
    for _ in 0..max_iter {
        let mid = (lo + hi) * T::half();
        let f_mid = third_derivative_kernel(mid);
        if f_mid == T::zero() {
            return Ok(photon_temperature(frequency) / mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= T::epsilon() * T::two() * mid {
            return Ok(photon_temperature(frequency) / ((lo + hi) * T::half()));
        }
    }
    Err(Error::NonConvergence {
        what: "threshold_kappa bisection",
        iterations: max_iter,
        residual: (hi - lo).to_f64_lossy(),
    })
}

/// Quantum–classical crossover `T_cr = hf/(2k_B)`.
pub fn crossover_temperature<T: Scalar>(frequency: T) -> T {
    photon_temperature(frequency) * T::half()
}

/// Temperature at which one thermal photon is present, `hf/(k_B ln 2)`.
pub fn sudden_death_temperature<T: Scalar>(frequency: T) -> T {
    photon_temperature(frequency) / T::LN_2()
}

/// Input temperature at which `n_th = 1/2`, `hf/(k_B ln 3)`; above it the
/// hybrid-ring output cannot show squeezing.
pub fn max_input_temperature_for_squeezing<T: Scalar>(frequency: T) -> T {
    photon_temperature(frequency) / T::lit(3.0).ln()
}

/// Dissipation spectrum `ε(ω)` of the transmission line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DissipationSpectrum<T> {
    Constant { epsilon: T },
    /// `prefactor·exp(−hf_Δ/(2k_BT))`, evaluated at the cable temperature.
    Superconducting { prefactor: T, gap_frequency: T },
}

impl<T: Scalar> DissipationSpectrum<T> {
    pub fn nbti(prefactor: T) -> Self {
        DissipationSpectrum::Superconducting {
            prefactor,
            gap_frequency: T::lit(NBTI_GAP_FREQUENCY),
        }
    }

    pub fn evaluate(&self, frequency: T, temperature: T) -> Result<T> {
        match *self {
            DissipationSpectrum::Constant { epsilon } => Ok(epsilon),
            DissipationSpectrum::Superconducting {
                prefactor,
                gap_frequency,
            } => superconducting_dissipation(frequency, temperature, gap_frequency, prefactor),
        }
    }
}

/// Exponentially suppressed dissipation of a superconductor well below its
/// gap, with a temperature-independent gap `Δ = hf_Δ/2`.
pub fn superconducting_dissipation<T: Scalar>(
    frequency: T,
    temperature: T,
    gap_frequency: T,
    prefactor: T,
) -> Result<T> {
    if !(frequency < gap_frequency) {
        return Err(Error::domain(
            "frequency",
            format!("{frequency} Hz is not below the gap frequency {gap_frequency} Hz"),
        ));
    }
    if !(prefactor >= T::zero()) {
        return Err(Error::domain("prefactor", "must be ≥ 0"));
    }
    if !(temperature > T::zero()) {
        return Ok(T::zero());
    }
    let gap_over_kt = photon_temperature(gap_frequency) / (T::two() * temperature);
    Ok(prefactor * (-gap_over_kt).exp())
}

/// Voltage-fluctuation variance `2ħ ∫ coth(ħω/2k_BT) ε(ω) dω` over
/// `ω ∈ 2π[f₀ − B, f₀ + B]`, in units set by the normalisation of `ε`.
pub fn fdt_voltage_variance<T: Scalar>(
    center_temperature: T,
    spectrum: &DissipationSpectrum<T>,
    center_frequency: T,
    half_bandwidth: T,
) -> Result<T> {
    if !(half_bandwidth > T::zero()) {
        return Err(Error::domain("half bandwidth", "must be > 0"));
    }
    if !(center_frequency - half_bandwidth > T::zero()) {
        return Err(Error::domain("band", "lower band edge must be positive"));
    }
    if !(center_temperature >= T::zero()) {
        return Err(Error::domain("temperature", "must be ≥ 0"));
    }
    let two_pi = T::TAU();
    let lo = two_pi * (center_frequency - half_bandwidth);
    let hi = two_pi * (center_frequency + half_bandwidth);
    // ħω/(2k_BT) = (h/k_B)·(ω/2π)/(2T)
    let theta = T::lit(PLANCK_OVER_BOLTZMANN) / two_pi;
    let coth_factor = |omega: T| {
        if center_temperature > T::zero() {
            let arg = theta * omega / (T::two() * center_temperature);
            T::one() / arg.tanh()
        } else {
            T::one()
        }
    };
    // evaluate ε once up front so domain errors surface before integrating
    spectrum.evaluate(center_frequency, center_temperature)?;
    let integrand = |omega: T| {
        let eps = spectrum
            .evaluate(omega / two_pi, center_temperature)
            .unwrap_or_else(|_| T::nan());
        coth_factor(omega) * eps
    };
    let integral = quadrature::integrate(integrand, lo, hi, T::lit(FDT_REL_TOL), 1000)?;
    Ok(T::two() * T::lit(HBAR) * integral)
}
