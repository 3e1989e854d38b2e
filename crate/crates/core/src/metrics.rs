//! Figures of merit of Gaussian states: squeezing level, purity, two-mode
//! symplectic spectra and negativity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Floor applied to the partially transposed symplectic eigenvalue.
pub const NU_FLOOR: f64 = 1e-12;

/// Squeezing level in dB of the angle-optimal quadrature of `mode`:
/// `−10·log₁₀(σ_s²/0.25)` with `σ_s²` the smaller eigenvalue of the mode block.
pub fn squeezing_level<T: Scalar>(state: &GaussianState<T>, mode: usize) -> Result<T> {
    let block = state.mode_block(mode)?;
    let variance = min_eigenvalue_2x2(&block);
    if !(variance > T::zero()) {
        return Err(Error::InvalidState(format!(
            "non-positive squeezed variance {variance} in mode {mode}"
        )));
    }
    Ok(-T::lit(10.0) * (variance / T::quarter()).log10())
}

/// Smallest quadrature variance over all measurement angles.
pub fn squeezed_variance<T: Scalar>(state: &GaussianState<T>, mode: usize) -> Result<T> {
    Ok(min_eigenvalue_2x2(&state.mode_block(mode)?))
}

fn min_eigenvalue_2x2<T: Scalar>(m: &Matrix<T>) -> T {
    let (a, b, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let mean = (a + d) * T::half();
    let half_diff = (a - d) * T::half();
    let max = mean + (half_diff * half_diff + b * b).sqrt();
    // det/λ_max avoids cancellation for strongly squeezed blocks
    if max > T::zero() {
        (a * d - b * b) / max
    } else {
        max
    }
}

/// `Tr ρ² = (4^{2N} det V)^{-1/2}`; for one mode this is `1/√(16 det V)`.
pub fn purity<T: Scalar>(state: &GaussianState<T>) -> Result<T> {
    let det = state.covariance().determinant();
    if !(det > T::zero()) {
        return Err(Error::InvalidState(format!(
            "covariance determinant {det} is not positive"
        )));
    }
    let n = state.n_modes() as i32;
    let scaled = det * T::lit(4.0).powi(2 * n);
    Ok(T::one() / scaled.sqrt())
}

/// Purity of the reduced state of one mode.
pub fn mode_purity<T: Scalar>(state: &GaussianState<T>, mode: usize) -> Result<T> {
    purity(&state.partial_trace(&[mode])?)
}

/// 2×2 blocks of a two-mode covariance `[[A, C], [Cᵀ, B]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeBlocks<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub c: Matrix<T>,
}

impl<T: Scalar> TwoModeBlocks<T> {
    pub fn from_state(state: &GaussianState<T>) -> Result<Self> {
        if state.n_modes() != 2 {
            return Err(Error::domain(
                "two-mode state",
                format!("expected 2 modes, got {}", state.n_modes()),
            ));
        }
        let v = state.covariance();
        Ok(Self {
            a: v.select(&[0, 1], &[0, 1]),
            b: v.select(&[2, 3], &[2, 3]),
            c: v.select(&[0, 1], &[2, 3]),
        })
    }

    pub fn assemble(&self) -> Matrix<T> {
        Matrix::from_fn(4, 4, |i, j| match (i < 2, j < 2) {
            (true, true) => self.a[(i, j)],
            (false, false) => self.b[(i - 2, j - 2)],
            (true, false) => self.c[(i, j - 2)],
            (false, true) => self.c[(j, i - 2)],
        })
    }

    /// `Δ = det A + det B + 2 det C`.
    pub fn delta(&self) -> T {
        self.a.determinant() + self.b.determinant() + T::two() * self.c.determinant()
    }

    /// Partially transposed invariant `Δ̃ = det A + det B − 2 det C`.
    pub fn delta_pt(&self) -> T {
        self.a.determinant() + self.b.determinant() - T::two() * self.c.determinant()
    }
}

/// `scale` is the largest covariance entry; the 2×2 determinants entering
/// `Δ` carry absolute rounding errors of order `ε·scale²`.
fn eigen_pair<T: Scalar>(delta: T, det_v: T, scale: T) -> Result<(T, T)> {
    let mut disc = delta * delta - T::lit(4.0) * det_v;
    if disc < T::zero() {
        let s2 = scale * scale;
        let slack = T::lit(1e-12).max(T::epsilon() * T::lit(64.0) * (delta.abs() + s2) * s2);
        if disc < -slack {
            return Err(Error::InvalidState(format!(
                "negative discriminant {disc} in symplectic spectrum"
            )));
        }
        disc = T::zero();
    }
    let root = disc.sqrt();
    let plus = ((delta + root) * T::half()).max(T::zero()).sqrt();
    let minus = ((delta - root) * T::half()).max(T::zero()).sqrt();
    Ok((plus, minus))
}

/// Two-mode symplectic eigenvalues `(ν₊, ν₋)` from `Δ` and `det V`.
pub fn symplectic_eigenvalues<T: Scalar>(state: &GaussianState<T>) -> Result<(T, T)> {
    let blocks = TwoModeBlocks::from_state(state)?;
    eigen_pair(blocks.delta(), state.covariance().determinant(), state.covariance().max_abs())
}

/// Smallest symplectic eigenvalue of the partially transposed state.
///
/// The second element is `true` when the value had to be floored at
/// [`NU_FLOOR`], which only happens for numerically degenerate input.
pub fn pt_symplectic_min<T: Scalar>(state: &GaussianState<T>) -> Result<(T, bool)> {
    let blocks = TwoModeBlocks::from_state(state)?;
    let (_, minus) = eigen_pair(blocks.delta_pt(), state.covariance().determinant(), state.covariance().max_abs())?;
    let floor = T::lit(NU_FLOOR);
    if minus < floor {
        Ok((floor, true))
    } else {
        Ok((minus, false))
    }
}

/// `N = max[0, (1 − 4ν̃₋)/(8ν̃₋)]` for a two-mode state.
pub fn negativity<T: Scalar>(state: &GaussianState<T>) -> Result<T> {
    let (nu, _) = pt_symplectic_min(state)?;
    Ok(negativity_from_nu(nu))
}

fn negativity_from_nu<T: Scalar>(nu: T) -> T {
    ((T::one() - T::lit(4.0) * nu) / (T::lit(8.0) * nu)).max(T::zero())
}

/// Lossless, noiseless relation `N = max[(10^{S/10} − 1)/2, 0]`.
pub fn negativity_from_squeezing<T: Scalar>(squeezing_db: T) -> T {
    ((T::lit(10.0).powf(squeezing_db / T::lit(10.0)) - T::one()) * T::half()).max(T::zero())
}

/// All figures of merit of a two-mode state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport<T> {
    pub squeezing_db: [T; 2],
    pub purity: T,
    pub mode_purity: [T; 2],
    /// `(ν₊, ν₋)`.
    pub symplectic_eigenvalues: (T, T),
    pub pt_symplectic_min: T,
    pub negativity: T,
    /// Set when `ν̃₋` was floored.
    pub degenerate: bool,
}

impl<T: Scalar> MetricReport<T> {
    pub fn compute(state: &GaussianState<T>) -> Result<Self> {
        let (nu_pt, degenerate) = pt_symplectic_min(state)?;
        Ok(Self {
            squeezing_db: [squeezing_level(state, 0)?, squeezing_level(state, 1)?],
            purity: purity(state)?,
            mode_purity: [mode_purity(state, 0)?, mode_purity(state, 1)?],
            symplectic_eigenvalues: symplectic_eigenvalues(state)?,
            pt_symplectic_min: nu_pt,
            negativity: negativity_from_nu(nu_pt),
            degenerate,
        })
    }
}
