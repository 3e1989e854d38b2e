//! Steady-state temperature profile of the cable between two cryostats and the
//! sigmoid-smoothed piecewise-linear temperature response fit.
//!
//! The cable obeys `−d/dx(λ(T)A dT/dx) = q_c + q_r + q_h` with Dirichlet ends,
//! where `q_c = g(T_tube − T)` is the conductive coupling to the mixing-chamber
//! tube, `q_r = σ·eP·(T_rad⁴ − T⁴)` the radiative exchange with surroundings at
//! `T_rad`, and `q_h` an optional Gaussian heater.

use serde::{Deserialize, Serialize};

use crate::constants::STEFAN_BOLTZMANN;
use crate::error::{Error, Result};
use crate::linalg::{solve_tridiagonal, Matrix};
use crate::scalar::Scalar;

pub const DEFAULT_LENGTH: f64 = 6.0;
pub const DEFAULT_GRID_POINTS: usize = 601;
pub const DEFAULT_BOUNDARY_LEFT: f64 = 0.035;
pub const DEFAULT_BOUNDARY_RIGHT: f64 = 0.021;
/// Silver wire bundle cross-section (m²).
pub const DEFAULT_CROSS_SECTION: f64 = 2e-7;
/// Low-temperature silver conductivity coefficient κ₀ in W/(m·K²).
pub const DEFAULT_KAPPA0: f64 = 500.0;
/// Distributed holder conductance to the tube (W/(m·K)).
pub const DEFAULT_COUPLING: f64 = 5e-7;
pub const DEFAULT_TUBE_TEMPERATURE: f64 = 0.052;
/// Temperature of the radiating surroundings (K).
pub const DEFAULT_RADIATION_TEMPERATURE: f64 = 4.0;
/// Emissivity × perimeter (m), calibrated so the default centre sits at 110 mK.
pub const DEFAULT_EMISSIVITY_PERIMETER: f64 = 1.029_697_6e-2;
pub const DEFAULT_HEATER_WIDTH: f64 = 0.05;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 500;
pub const DEFAULT_RELAXATION: f64 = 0.7;

/// Low-temperature metallic conductivity `κ₀·T`.
#[inline]
pub fn silver_conductivity<T: Scalar>(kappa0: T, temperature: T) -> T {
    kappa0 * temperature
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConductivityModel<T> {
    Linear { kappa0: T },
    Constant { lambda: T },
}

impl<T: Scalar> ConductivityModel<T> {
    pub fn at(&self, temperature: T) -> T {
        match *self {
            ConductivityModel::Linear { kappa0 } => silver_conductivity(kappa0, temperature),
            ConductivityModel::Constant { lambda } => lambda,
        }
    }
}

/// Gaussian heater with standard deviation `width`, normalised on the grid to
/// deliver exactly `power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Heater<T> {
    pub position: T,
    pub power: T,
    pub width: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatModel<T> {
    pub length: T,
    pub grid_points: usize,
    pub boundary_left: T,
    pub boundary_right: T,
    pub conductivity: ConductivityModel<T>,
    pub cross_section: T,
    pub emissivity_perimeter: T,
    pub radiation_temperature: T,
    pub coupling: T,
    pub tube_temperature: T,
    pub heater: Option<Heater<T>>,
    pub tolerance: T,
    pub max_iterations: usize,
    pub relaxation: T,
}

impl<T: Scalar> Default for HeatModel<T> {
    fn default() -> Self {
        Self {
            length: T::lit(DEFAULT_LENGTH),
            grid_points: DEFAULT_GRID_POINTS,
            boundary_left: T::lit(DEFAULT_BOUNDARY_LEFT),
            boundary_right: T::lit(DEFAULT_BOUNDARY_RIGHT),
            conductivity: ConductivityModel::Linear {
                kappa0: T::lit(DEFAULT_KAPPA0),
            },
            cross_section: T::lit(DEFAULT_CROSS_SECTION),
            emissivity_perimeter: T::lit(DEFAULT_EMISSIVITY_PERIMETER),
            radiation_temperature: T::lit(DEFAULT_RADIATION_TEMPERATURE),
            coupling: T::lit(DEFAULT_COUPLING),
            tube_temperature: T::lit(DEFAULT_TUBE_TEMPERATURE),
            heater: None,
            tolerance: T::lit(DEFAULT_TOLERANCE),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            relaxation: T::lit(DEFAULT_RELAXATION),
        }
    }
}

impl<T: Scalar> HeatModel<T> {
    /// Model with no sources and constant conductivity.
    pub fn source_free(length: T, grid_points: usize, left: T, right: T) -> Self {
        Self {
            length,
            grid_points,
            boundary_left: left,
            boundary_right: right,
            conductivity: ConductivityModel::Constant { lambda: T::one() },
            cross_section: T::one(),
            emissivity_perimeter: T::zero(),
            coupling: T::zero(),
            heater: None,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: T| x > T::zero() && x.is_finite();
        let non_negative = |x: T| x >= T::zero() && x.is_finite();
        if !positive(self.length) {
            return Err(Error::domain("length", "must be > 0"));
        }
        if self.grid_points < 3 {
            return Err(Error::domain("grid points", format!("need ≥ 3, got {}", self.grid_points)));
        }
        if !positive(self.boundary_left) || !positive(self.boundary_right) {
            return Err(Error::domain("boundary temperature", "must be > 0"));
        }
        let lambda_ok = match self.conductivity {
            ConductivityModel::Linear { kappa0 } => positive(kappa0),
            ConductivityModel::Constant { lambda } => positive(lambda),
        };
        if !lambda_ok {
            return Err(Error::domain("conductivity", "must be > 0"));
        }
        if !positive(self.cross_section) {
            return Err(Error::domain("cross section", "must be > 0"));
        }
        if !non_negative(self.emissivity_perimeter)
            || !non_negative(self.radiation_temperature)
            || !non_negative(self.coupling)
            || !non_negative(self.tube_temperature)
        {
            return Err(Error::domain("loads", "must be finite and ≥ 0"));
        }
        if let Some(h) = &self.heater {
            if !non_negative(h.power) || !positive(h.width) || !h.position.is_finite() {
                return Err(Error::domain("heater", "power ≥ 0, width > 0 required"));
            }
            if h.position < T::zero() || h.position > self.length {
                return Err(Error::domain("heater", "position must lie on the cable"));
            }
        }
        if !(self.relaxation > T::zero() && self.relaxation <= T::one()) {
            return Err(Error::domain("relaxation", "must lie in (0, 1]"));
        }
        if !positive(self.tolerance) || self.max_iterations == 0 {
            return Err(Error::domain("solver settings", "tolerance > 0 and max_iterations ≥ 1"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> T {
        self.length / T::from_usize_lossy(self.grid_points - 1)
    }

    pub fn positions(&self) -> Vec<T> {
        let h = self.spacing();
        (0..self.grid_points)
            .map(|i| if i + 1 == self.grid_points { self.length } else { h * T::from_usize_lossy(i) })
            .collect()
    }

    /// Heater power per unit length at every node (zero at the ends).
    pub fn heater_density(&self) -> Vec<T> {
        let n = self.grid_points;
        let mut q = vec![T::zero(); n];
        let Some(heater) = self.heater else { return q };
        if heater.power == T::zero() {
            return q;
        }
        let x = self.positions();
        let h = self.spacing();
        let two_var = T::two() * heater.width * heater.width;
        let mut total = T::zero();
        for i in 1..n - 1 {
            let d = x[i] - heater.position;
            q[i] = (-(d * d) / two_var).exp();
            total += q[i];
        }
        if total > T::zero() {
            let norm = heater.power / (total * h);
            q.iter_mut().for_each(|v| *v *= norm);
        } else {
            // bump narrower than the grid: deposit on the nearest interior node
            let idx = ((heater.position / h).round().to_f64_lossy() as usize).clamp(1, n - 2);
            q[idx] = heater.power / h;
        }
        q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureProfile<T> {
    pub positions: Vec<T>,
    pub temperatures: Vec<T>,
    pub converged: bool,
    pub iterations: usize,
}

impl<T: Scalar> TemperatureProfile<T> {
    /// Linearly interpolated temperature at `x`.
    pub fn temperature_at(&self, x: T) -> T {
        let p = &self.positions;
        let n = p.len();
        if x <= p[0] {
            return self.temperatures[0];
        }
        if x >= p[n - 1] {
            return self.temperatures[n - 1];
        }
        let k = p.partition_point(|&v| v <= x).min(n - 1);
        let (x0, x1) = (p[k - 1], p[k]);
        let w = (x - x0) / (x1 - x0);
        self.temperatures[k - 1] * (T::one() - w) + self.temperatures[k] * w
    }

    pub fn center_temperature(&self) -> T {
        let mid = (self.positions[0] + self.positions[self.positions.len() - 1]) * T::half();
        self.temperature_at(mid)
    }

    pub fn max_temperature(&self) -> T {
        self.temperatures.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// Picard iteration on the finite-volume discretisation; the `T⁴` term is
/// linearised about the previous iterate.
pub fn solve_profile<T: Scalar>(model: &HeatModel<T>) -> Result<TemperatureProfile<T>> {
    model.validate()?;
    let n = model.grid_points;
    let h = model.spacing();
    let h2 = h * h;
    let positions = model.positions();
    let heater = model.heater_density();
    let sigma_ep = T::lit(STEFAN_BOLTZMANN) * model.emissivity_perimeter;
    let rad4 = model.radiation_temperature.powi(4);
    let (tl, tr) = (model.boundary_left, model.boundary_right);

    let mut temps: Vec<T> = positions
        .iter()
        .map(|&x| tl + (tr - tl) * (x / model.length))
        .collect();
    temps[n - 1] = tr;

    let m = n - 2;
    let mut lower = vec![T::zero(); m];
    let mut diag = vec![T::zero(); m];
    let mut upper = vec![T::zero(); m];
    let mut rhs = vec![T::zero(); m];
    let mut last_change = T::infinity();

    for iteration in 1..=model.max_iterations {
        let face = |i: usize| {
            let tf = (temps[i] + temps[i + 1]) * T::half();
            model.conductivity.at(tf) * model.cross_section / h2
        };
        for k in 0..m {
            let i = k + 1;
            let (kw, ke) = (face(i - 1), face(i));
            let t_old = temps[i];
            let t3 = t_old * t_old * t_old;
            lower[k] = -kw;
            upper[k] = -ke;
            diag[k] = kw + ke + model.coupling + T::lit(4.0) * sigma_ep * t3;
            rhs[k] = heater[i]
                + model.coupling * model.tube_temperature
                + sigma_ep * (rad4 + T::lit(3.0) * t3 * t_old);
        }
        rhs[0] += -lower[0] * tl;
        rhs[m - 1] += -upper[m - 1] * tr;
        lower[0] = T::zero();
        upper[m - 1] = T::zero();

        let solution = solve_tridiagonal(&lower, &diag, &upper, &rhs)
            .ok_or_else(|| Error::IllConditioned("singular heat-equation system".into()))?;

        let mut change = T::zero();
        for (k, &t_new) in solution.iter().enumerate() {
            let i = k + 1;
            let next = temps[i] + model.relaxation * (t_new - temps[i]);
            if !(next > T::zero()) || !next.is_finite() {
                return Err(Error::NonConvergence {
                    what: "heat solver (non-positive temperature iterate)",
                    iterations: iteration,
                    residual: next.to_f64_lossy(),
                });
            }
            change = change.max((next - temps[i]).abs());
            temps[i] = next;
        }
        last_change = change;
        if change < model.tolerance {
            return Ok(TemperatureProfile {
                positions,
                temperatures: temps,
                converged: true,
                iterations: iteration,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "heat solver",
        iterations: model.max_iterations,
        residual: last_change.to_f64_lossy(),
    })
}

/// Bisection on the emissivity–perimeter product so that the solved centre
/// temperature hits `target_center`. Returns the adjusted model.
pub fn calibrate_radiative_load<T: Scalar>(model: &HeatModel<T>, target_center: T) -> Result<HeatModel<T>> {
    let center_for = |ep: T| -> Result<T> {
        let mut m = model.clone();
        m.emissivity_perimeter = ep;
        Ok(solve_profile(&m)?.center_temperature())
    };
    let mut lo = T::zero();
    if center_for(lo)? > target_center {
        return Err(Error::domain(
            "calibration target",
            "centre already above target without radiative load",
        ));
    }
    let mut hi = T::lit(1e-3);
    let mut expansions = 0;
    while center_for(hi)? < target_center {
        lo = hi;
        hi *= T::lit(4.0);
        expansions += 1;
        if expansions > 40 {
            return Err(Error::NonConvergence {
                what: "radiative calibration bracket",
                iterations: expansions,
                residual: hi.to_f64_lossy(),
            });
        }
    }
    for _ in 0..60 {
        let mid = (lo + hi) * T::half();
        if center_for(mid)? < target_center {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= hi * T::lit(1e-10) {
            break;
        }
    }
    let mut out = model.clone();
    out.emissivity_perimeter = (lo + hi) * T::half();
    Ok(out)
}

/// Sigmoid-smoothed piecewise-linear response with the knee at 0.4 K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseFit<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    #[serde(default)]
    pub residual: T,
}

pub const FIT_KNEE: f64 = 0.4;
pub const FIT_STEEPNESS: f64 = 4.0;

fn sigmoid<T: Scalar>(t: T) -> T {
    (T::one() + (T::lit(FIT_STEEPNESS) * (t - T::lit(FIT_KNEE))).tanh()) * T::half()
}

impl<T: Scalar> ResponseFit<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self {
            a,
            b,
            c,
            residual: T::zero(),
        }
    }

    pub fn evaluate(&self, t: T) -> T {
        evaluate_fit(self, t)
    }
}

/// `f(T) = aT + b + s(T)(c − a)(T − 0.4)` with `s(T) = (1 + tanh 4(T − 0.4))/2`.
pub fn evaluate_fit<T: Scalar>(fit: &ResponseFit<T>, t: T) -> T {
    let knee = T::lit(FIT_KNEE);
    fit.a * t + fit.b + sigmoid(t) * (fit.c - fit.a) * (t - knee)
}

/// Least-squares `(a, b, c)`; the model is linear in the parameters with basis
/// `[T − s(T)(T − 0.4), 1, s(T)(T − 0.4)]`.
pub fn fit_response<T: Scalar>(center_temps: &[T], measured: &[T]) -> Result<ResponseFit<T>> {
    if center_temps.len() != measured.len() {
        return Err(Error::domain("fit data", "column lengths differ"));
    }
    if center_temps.len() < 4 {
        return Err(Error::domain(
            "fit data",
            format!("need at least 4 points, got {}", center_temps.len()),
        ));
    }
    if center_temps.iter().chain(measured).any(|v| !v.is_finite()) {
        return Err(Error::domain("fit data", "non-finite value"));
    }
    let knee = T::lit(FIT_KNEE);
    let below = center_temps.iter().any(|&t| t < knee);
    let above = center_temps.iter().any(|&t| t > knee);
    if !(below && above) {
        return Err(Error::IllConditioned(
            "fit data must lie on both sides of 0.4 K".into(),
        ));
    }
    let basis = |t: T| {
        let hinge = sigmoid(t) * (t - knee);
        [t - hinge, T::one(), hinge]
    };
    let mut normal = Matrix::<T>::zeros(3, 3);
    let mut rhs = [T::zero(); 3];
    for (&t, &y) in center_temps.iter().zip(measured) {
        let phi = basis(t);
        for r in 0..3 {
            rhs[r] += phi[r] * y;
            for c in 0..3 {
                normal[(r, c)] += phi[r] * phi[c];
            }
        }
    }
    let scale = normal.max_abs();
    let p = normal
        .solve(&rhs, scale * T::epsilon() * T::lit(1e3))
        .ok_or_else(|| Error::IllConditioned("singular normal equations".into()))?;
    let mut fit = ResponseFit::new(p[0], p[1], p[2]);
    let sse = center_temps
        .iter()
        .zip(measured)
        .fold(T::zero(), |s, (&t, &y)| {
            let e = evaluate_fit(&fit, t) - y;
            s + e * e
        });
    fit.residual = (sse / T::from_usize_lossy(center_temps.len())).sqrt();
    Ok(fit)
}
