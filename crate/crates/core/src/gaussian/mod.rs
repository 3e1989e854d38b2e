//! N-mode Gaussian states in the interleaved quadrature ordering
//! `(I₁, Q₁, …, I_N, Q_N)` with vacuum variance 1/4.

mod channel;
mod sampling;

pub use channel::{omega, ChannelElement, SymplecticMatrix};
pub use sampling::{
    estimate_moments, fourth_order_cumulants, sample_quadratures, Cumulants, MomentTable,
    QuadratureSamples,
};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Vacuum variance of a single quadrature.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Symmetry tolerance enforced on covariance matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Slack allowed below 1/4 when checking symplectic eigenvalues.
pub const UNCERTAINTY_TOLERANCE: f64 = 1e-9;

/// Displacement vector plus covariance matrix of an N-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T> {
    n_modes: usize,
    displacement: Vec<T>,
    covariance: Matrix<T>,
}

impl<T: Scalar> GaussianState<T> {
    /// Validates and wraps a displacement and covariance.
    ///
    /// The covariance must be square of size `2·n`, finite, symmetric to
    /// [`SYMMETRY_TOLERANCE`] and satisfy the uncertainty principle. It is
    /// symmetrized exactly before being stored.
    pub fn new(displacement: Vec<T>, mut covariance: Matrix<T>) -> Result<Self> {
        let dim = covariance.rows();
        if dim == 0 || !dim.is_multiple_of(2) || !covariance.is_square() {
            return Err(Error::InvalidState(format!(
                "covariance must be 2N×2N, got {}×{}",
                covariance.rows(),
                covariance.cols()
            )));
        }
        if displacement.len() != dim {
            return Err(Error::InvalidState(format!(
                "displacement has length {}, expected {dim}",
                displacement.len()
            )));
        }
        if !covariance.is_finite() || displacement.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let asym = covariance.max_asymmetry();
        let scale = covariance.max_abs().max(T::one());
        if asym > T::lit(SYMMETRY_TOLERANCE) * scale {
            return Err(Error::InvalidState(format!(
                "covariance not symmetric (max |V - Vᵀ| = {asym})"
            )));
        }
        covariance.symmetrize();
        let state = Self {
            n_modes: dim / 2,
            displacement,
            covariance,
        };
        let nu_min = state.min_symplectic_eigenvalue();
        if !(nu_min >= T::quarter() - uncertainty_slack::<T>()) {
            return Err(Error::InvalidState(format!(
                "violates the uncertainty principle (smallest symplectic eigenvalue {nu_min})"
            )));
        }
        Ok(state)
    }

    /// Zero-mean state from a covariance matrix.
    pub fn from_covariance(covariance: Matrix<T>) -> Result<Self> {
        let dim = covariance.rows();
        Self::new(vec![T::zero(); dim], covariance)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        assert!(n_modes > 0, "a state needs at least one mode");
        Self {
            n_modes,
            displacement: vec![T::zero(); 2 * n_modes],
            covariance: Matrix::identity(2 * n_modes).scale(T::quarter()),
        }
    }

    /// Product of thermal states; mode `k` carries `photons_per_mode[k]` photons.
    pub fn thermal(n_modes: usize, photons_per_mode: &[T]) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::domain("n_modes", "must be positive"));
        }
        if photons_per_mode.len() != n_modes {
            return Err(Error::domain(
                "photons_per_mode",
                format!("expected {n_modes} entries, got {}", photons_per_mode.len()),
            ));
        }
        let mut diag = Vec::with_capacity(2 * n_modes);
        for &n in photons_per_mode {
            if !(n >= T::zero()) || !n.is_finite() {
                return Err(Error::domain(
                    "thermal photon number",
                    format!("must be finite and ≥ 0, got {n}"),
                ));
            }
            let v = thermal_variance(n);
            diag.push(v);
            diag.push(v);
        }
        Ok(Self {
            n_modes,
            displacement: vec![T::zero(); 2 * n_modes],
            covariance: Matrix::from_diagonal(&diag),
        })
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn displacement(&self) -> &[T] {
        &self.displacement
    }

    pub fn covariance(&self) -> &Matrix<T> {
        &self.covariance
    }

    /// Same covariance, new displacement.
    pub fn with_displacement(&self, displacement: Vec<T>) -> Result<Self> {
        if displacement.len() != 2 * self.n_modes || displacement.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("bad displacement vector".into()));
        }
        Ok(Self {
            displacement,
            ..self.clone()
        })
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.n_modes {
            Ok(())
        } else {
            Err(Error::InvalidMode {
                index: mode,
                n_modes: self.n_modes,
            })
        }
    }

    /// 2×2 covariance block of one mode.
    pub fn mode_block(&self, mode: usize) -> Result<Matrix<T>> {
        self.check_mode(mode)?;
        let idx = [2 * mode, 2 * mode + 1];
        Ok(self.covariance.select(&idx, &idx))
    }

    /// Symplectic eigenvalues in ascending order (one per mode).
    ///
    /// Uses `−(V^{1/2} Ω V^{1/2})²`, which is symmetric with each ν² appearing
    /// twice, so only symmetric eigen-solves are needed.
    pub fn symplectic_eigenvalues(&self) -> Vec<T> {
        let root = self.covariance.sqrt_psd();
        let k = root.matmul(&omega(self.n_modes)).matmul(&root);
        let neg_k2 = k.matmul(&k).scale(-T::one());
        let (values, _) = neg_k2.symmetric_eigen();
        values
            .chunks(2)
            .map(|pair| {
                let mean = (pair[0] + pair[1]) * T::half();
                mean.max(T::zero()).sqrt()
            })
            .collect()
    }

    pub fn min_symplectic_eigenvalue(&self) -> T {
        self.symplectic_eigenvalues()
            .into_iter()
            .fold(T::infinity(), T::min)
    }

    /// True if every symplectic eigenvalue is at least `1/4 − 1e-9`.
    pub fn is_physical(&self) -> bool {
        self.min_symplectic_eigenvalue() >= T::quarter() - uncertainty_slack::<T>()
    }

    /// Applies a symplectic map `x → M x`, `V → M V Mᵀ`.
    pub fn apply_symplectic(&self, map: &SymplecticMatrix<T>) -> Result<Self> {
        if map.dim() != 2 * self.n_modes {
            return Err(Error::domain(
                "symplectic map",
                format!(
                    "acts on {} quadratures, state has {}",
                    map.dim(),
                    2 * self.n_modes
                ),
            ));
        }
        let mut covariance = map.matrix().congruence(&self.covariance);
        covariance.symmetrize();
        Ok(Self {
            n_modes: self.n_modes,
            displacement: map.matrix().mat_vec(&self.displacement),
            covariance,
        })
    }

    /// Ideal squeeze of strength `r` along the axis at angle `theta` in the
    /// I–Q plane, followed by `added_photons` of symmetric noise.
    pub fn apply_squeeze(&self, mode: usize, r: T, theta: T, added_photons: T) -> Result<Self> {
        self.check_mode(mode)?;
        if !(r >= T::zero()) || !r.is_finite() {
            return Err(Error::domain("squeeze factor", format!("must be ≥ 0, got {r}")));
        }
        if !(added_photons >= T::zero()) || !added_photons.is_finite() {
            return Err(Error::domain(
                "added photons",
                format!("must be ≥ 0, got {added_photons}"),
            ));
        }
        let map = SymplecticMatrix::squeeze(self.n_modes, mode, r, theta)?;
        let mut out = self.apply_symplectic(&map)?;
        if added_photons > T::zero() {
            let extra = added_photons * T::half();
            out.covariance[(2 * mode, 2 * mode)] += extra;
            out.covariance[(2 * mode + 1, 2 * mode + 1)] += extra;
        }
        Ok(out)
    }

    /// Beam splitter of power transmissivity `transmissivity` between two modes.
    pub fn apply_beam_splitter(&self, mode_i: usize, mode_j: usize, transmissivity: T) -> Result<Self> {
        self.check_mode(mode_i)?;
        self.check_mode(mode_j)?;
        let map = SymplecticMatrix::beam_splitter(self.n_modes, mode_i, mode_j, transmissivity)?;
        self.apply_symplectic(&map)
    }

    /// Phase rotation of one mode by `angle`.
    pub fn apply_rotation(&self, mode: usize, angle: T) -> Result<Self> {
        self.check_mode(mode)?;
        let map = SymplecticMatrix::rotation(self.n_modes, mode, angle)?;
        self.apply_symplectic(&map)
    }

    /// Beam-splitter coupling of `mode` to a thermal bath with `env_photons`.
    ///
    /// Variances go to `(1−ε)v + ε(1+2n)/4`; correlations with the mode and
    /// its displacement scale by `√(1−ε)`.
    pub fn apply_loss(&self, mode: usize, loss: T, env_photons: T) -> Result<Self> {
        self.check_mode(mode)?;
        if !(loss >= T::zero() && loss <= T::one()) {
            return Err(Error::domain("loss", format!("must lie in [0, 1], got {loss}")));
        }
        if !(env_photons >= T::zero()) || !env_photons.is_finite() {
            return Err(Error::domain(
                "environment photons",
                format!("must be ≥ 0, got {env_photons}"),
            ));
        }
        let keep = (T::one() - loss).sqrt();
        let dim = 2 * self.n_modes;
        let in_mode = |k: usize| k / 2 == mode;
        let mut covariance = self.covariance.clone();
        for i in 0..dim {
            for j in 0..dim {
                let factor = match (in_mode(i), in_mode(j)) {
                    (true, true) => T::one() - loss,
                    (true, false) | (false, true) => keep,
                    (false, false) => continue,
                };
                covariance[(i, j)] *= factor;
            }
        }
        let bath = loss * thermal_variance(env_photons);
        covariance[(2 * mode, 2 * mode)] += bath;
        covariance[(2 * mode + 1, 2 * mode + 1)] += bath;
        covariance.symmetrize();
        let mut displacement = self.displacement.clone();
        displacement[2 * mode] *= keep;
        displacement[2 * mode + 1] *= keep;
        Ok(Self {
            n_modes: self.n_modes,
            displacement,
            covariance,
        })
    }

    pub fn apply(&self, element: &ChannelElement<T>) -> Result<Self> {
        element.apply(self)
    }

    /// Applies a chain of channel elements in order.
    pub fn apply_all<'a>(&self, elements: impl IntoIterator<Item = &'a ChannelElement<T>>) -> Result<Self> {
        elements
            .into_iter()
            .try_fold(self.clone(), |state, element| element.apply(&state))
    }

    /// Reduced state on `keep_modes`, in the order given.
    pub fn partial_trace(&self, keep_modes: &[usize]) -> Result<Self> {
        if keep_modes.is_empty() {
            return Err(Error::domain("keep_modes", "must not be empty"));
        }
        for (k, &m) in keep_modes.iter().enumerate() {
            self.check_mode(m)?;
            if keep_modes[..k].contains(&m) {
                return Err(Error::domain("keep_modes", format!("mode {m} listed twice")));
            }
        }
        let idx: Vec<usize> = keep_modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        Ok(Self {
            n_modes: keep_modes.len(),
            displacement: idx.iter().map(|&i| self.displacement[i]).collect(),
            covariance: self.covariance.select(&idx, &idx),
        })
    }
}

/// [`UNCERTAINTY_TOLERANCE`], widened to a few ulps for single precision.
fn uncertainty_slack<T: Scalar>() -> T {
    T::lit(UNCERTAINTY_TOLERANCE).max(T::epsilon() * T::lit(16.0))
}

/// Quadrature variance `(1 + 2n)/4` of a thermal mode with `n` photons.
#[inline]
pub fn thermal_variance<T: Scalar>(photons: T) -> T {
    (T::one() + T::two() * photons) * T::quarter()
}

/// Builds a product thermal state (`make_thermal_state`).
pub fn make_thermal_state<T: Scalar>(n_modes: usize, photons_per_mode: &[T]) -> Result<GaussianState<T>> {
    GaussianState::thermal(n_modes, photons_per_mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn thermal_state_variances() {
        let vac = GaussianState::<f64>::thermal(1, &[0.0]).unwrap();
        assert_eq!(vac.covariance().as_slice(), &[0.25, 0.0, 0.0, 0.25]);
        let warm = GaussianState::<f64>::thermal(1, &[0.5]).unwrap();
        assert_eq!(warm.covariance().as_slice(), &[0.5, 0.0, 0.0, 0.5]);
        assert!(GaussianState::<f64>::thermal(1, &[-0.1]).is_err());
        assert!(GaussianState::<f64>::thermal(2, &[0.1]).is_err());
    }

    #[test]
    fn new_rejects_unphysical_and_asymmetric() {
        let too_small = Matrix::from_diagonal(&[0.1, 0.1]);
        assert!(matches!(
            GaussianState::from_covariance(too_small),
            Err(Error::InvalidState(_))
        ));
        let asym = Matrix::from_rows(&[vec![0.3, 0.01], vec![0.0, 0.3]]).unwrap();
        assert!(GaussianState::from_covariance(asym).is_err());
        let odd = Matrix::<f64>::identity(3);
        assert!(GaussianState::from_covariance(odd).is_err());
        // squeezed but pure: allowed
        let sq = Matrix::from_diagonal(&[0.25 * 0.5, 0.25 * 2.0]);
        assert!(GaussianState::from_covariance(sq).is_ok());
    }

    #[test]
    fn squeeze_examples() {
        let vac = GaussianState::<f64>::vacuum(1);
        assert_eq!(vac.apply_squeeze(0, 0.0, 0.0, 0.0).unwrap(), vac);

        let r = 6.70 / 10.0 * std::f64::consts::LN_10 / 2.0;
        let sq = vac.apply_squeeze(0, r, 0.0, 0.0).unwrap();
        assert!(close(sq.covariance()[(0, 0)], 0.25 * 10f64.powf(-0.67), 1e-15));

        let warm = GaussianState::<f64>::thermal(1, &[0.5]).unwrap();
        let sq = warm.apply_squeeze(0, 1.0, 0.0, 0.0).unwrap();
        assert!(close(sq.covariance()[(0, 0)], 0.5 * (-2.0f64).exp(), 1e-15));
        assert!(close(sq.covariance()[(1, 1)], 0.5 * 2.0f64.exp(), 1e-12));

        assert!(matches!(
            vac.apply_squeeze(1, 0.1, 0.0, 0.0),
            Err(Error::InvalidMode { index: 1, n_modes: 1 })
        ));
        assert!(vac.apply_squeeze(0, -0.1, 0.0, 0.0).is_err());
        assert!(vac.apply_squeeze(0, 0.1, 0.0, -1.0).is_err());
    }

    #[test]
    fn noisy_squeeze_adds_half_photon_number() {
        let vac = GaussianState::<f64>::vacuum(1);
        let sq = vac.apply_squeeze(0, 0.3, 0.0, 0.2).unwrap();
        assert!(close(sq.covariance()[(0, 0)], 0.25 * (-0.6f64).exp() + 0.1, 1e-15));
        assert!(close(sq.covariance()[(1, 1)], 0.25 * 0.6f64.exp() + 0.1, 1e-15));
    }

    #[test]
    fn squeeze_axis_rotates_with_theta() {
        let vac = GaussianState::<f64>::vacuum(1);
        let sq = vac
            .apply_squeeze(0, 0.5, std::f64::consts::FRAC_PI_2, 0.0)
            .unwrap();
        // θ = π/2 squeezes Q instead of I
        assert!(close(sq.covariance()[(1, 1)], 0.25 * (-1.0f64).exp(), 1e-15));
        assert!(close(sq.covariance()[(0, 1)], 0.0, 1e-15));
    }

    #[test]
    fn beam_splitter_examples() {
        let r: f64 = 0.8;
        let input = GaussianState::vacuum(2).apply_squeeze(0, r, 0.0, 0.0).unwrap();
        assert_eq!(input.apply_beam_splitter(0, 1, 1.0).unwrap(), input);

        let out = input.apply_beam_splitter(0, 1, 0.5).unwrap();
        let expected = ((-2.0 * r).exp() + 1.0) / 8.0;
        assert!(close(out.covariance()[(0, 0)], expected, 1e-15));
        assert!(close(out.covariance()[(2, 2)], expected, 1e-15));

        let thermal = GaussianState::<f64>::thermal(2, &[0.7, 0.7]).unwrap();
        for tau in [0.0, 0.2, 0.5, 0.9] {
            let mixed = thermal.apply_beam_splitter(0, 1, tau).unwrap();
            assert!(mixed.covariance().max_abs_diff(thermal.covariance()) < 1e-15);
        }

        assert!(input.apply_beam_splitter(0, 0, 0.5).is_err());
        assert!(input.apply_beam_splitter(0, 1, 1.5).is_err());
        assert!(input.apply_beam_splitter(0, 2, 0.5).is_err());
    }

    #[test]
    fn loss_examples() {
        let r = 6.70 / 10.0 * std::f64::consts::LN_10 / 2.0;
        let sq = GaussianState::<f64>::vacuum(1).apply_squeeze(0, r, 0.0, 0.0).unwrap();
        assert_eq!(sq.apply_loss(0, 0.0, 3.0).unwrap(), sq);

        let gone = sq.apply_loss(0, 1.0, 2.0).unwrap();
        assert!(gone
            .covariance()
            .max_abs_diff(GaussianState::thermal(1, &[2.0]).unwrap().covariance())
            < 1e-15);

        // 1.01 dB/km over 6 m, bath at 1 K (3.21 photons)
        let eps = 1.0 - 10f64.powf(-1.01 * 6.0 / 10_000.0);
        let n_env = 3.2104659839748906;
        let out = sq.apply_loss(0, eps, n_env).unwrap();
        let v0 = 0.25 * 10f64.powf(-0.67);
        let expected = v0 * (1.0 - eps) + eps * (1.0 + 2.0 * n_env) / 4.0;
        assert!(close(out.covariance()[(0, 0)], expected, 1e-15));
        assert!(close(out.covariance()[(0, 0)], 0.05585, 2e-4));

        assert!(sq.apply_loss(0, -0.1, 0.0).is_err());
        assert!(sq.apply_loss(0, 1.1, 0.0).is_err());
        assert!(sq.apply_loss(0, 0.1, -1.0).is_err());
    }

    #[test]
    fn loss_scales_correlations_and_displacement() {
        let tms = GaussianState::<f64>::vacuum(2)
            .apply_squeeze(0, 0.6, 0.0, 0.0)
            .unwrap()
            .apply_beam_splitter(0, 1, 0.5)
            .unwrap()
            .with_displacement(vec![1.0, -2.0, 0.5, 0.25])
            .unwrap();
        let eps = 0.3;
        let out = tms.apply_loss(1, eps, 0.0).unwrap();
        let keep = (1.0f64 - eps).sqrt();
        assert!(close(out.covariance()[(0, 2)], tms.covariance()[(0, 2)] * keep, 1e-15));
        assert!(close(out.displacement()[2], 0.5 * keep, 1e-15));
        assert!(close(out.displacement()[0], 1.0, 0.0));
    }

    #[test]
    fn partial_trace_examples() {
        let vac2 = GaussianState::<f64>::vacuum(2);
        assert_eq!(vac2.partial_trace(&[1]).unwrap(), GaussianState::vacuum(1));
        assert_eq!(vac2.partial_trace(&[0, 1]).unwrap(), vac2);

        let r: f64 = 0.9;
        let tms = vac2
            .apply_squeeze(0, r, 0.0, 0.0)
            .unwrap()
            .apply_beam_splitter(0, 1, 0.5)
            .unwrap();
        let reduced = tms.partial_trace(&[1]).unwrap();
        let c = reduced.covariance();
        assert!(close(c[(0, 0)], ((-2.0 * r).exp() + 1.0) / 8.0, 1e-15));
        assert!(close(c[(1, 1)], ((2.0 * r).exp() + 1.0) / 8.0, 1e-15));
        assert!(close(c[(0, 1)], 0.0, 1e-15));

        assert!(vac2.partial_trace(&[]).is_err());
        assert!(vac2.partial_trace(&[2]).is_err());
        assert!(vac2.partial_trace(&[0, 0]).is_err());
    }

    #[test]
    fn symplectic_eigenvalues_of_thermal_product() {
        let s = GaussianState::<f64>::thermal(3, &[1.0, 0.0, 2.5]).unwrap();
        let nu = s.symplectic_eigenvalues();
        for (got, want) in nu.iter().zip([0.25, 0.75, 1.5]) {
            assert!(close(*got, want, 1e-12), "{nu:?}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let s = GaussianState::<f32>::vacuum(2)
            .apply_squeeze(0, 0.5, 0.0, 0.0)
            .unwrap()
            .apply_beam_splitter(0, 1, 0.5)
            .unwrap()
            .apply_loss(1, 0.1, 0.2)
            .unwrap();
        assert!(s.is_physical());
        let expected = (((-1.0f64).exp() + 1.0) / 8.0) as f32;
        assert!((s.covariance()[(0, 0)] - expected).abs() < 1e-6);
    }
}
