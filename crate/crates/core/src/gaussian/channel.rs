use serde::{Deserialize, Serialize};

use super::GaussianState;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Tolerance on `M Ω Mᵀ = Ω` accepted by [`SymplecticMatrix::new`].
pub const SYMPLECTIC_TOLERANCE: f64 = 1e-10;

/// Block-diagonal symplectic form with 2×2 blocks `[[0, 1], [−1, 0]]`.
pub fn omega<T: Scalar>(n_modes: usize) -> Matrix<T> {
    let mut m = Matrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        m[(2 * k, 2 * k + 1)] = T::one();
        m[(2 * k + 1, 2 * k)] = -T::one();
    }
    m
}

/// Real 2N×2N matrix preserving the symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix<T> {
    matrix: Matrix<T>,
}

impl<T: Scalar> SymplecticMatrix<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        let dim = matrix.rows();
        if !matrix.is_square() || dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::domain("symplectic matrix", "must be 2N×2N"));
        }
        let form = omega::<T>(dim / 2);
        let err = matrix.congruence(&form).max_abs_diff(&form);
        let tol = T::lit(SYMPLECTIC_TOLERANCE).max(T::epsilon() * T::lit(64.0));
        if !(err <= tol * matrix.max_abs().powi(2).max(T::one())) {
            return Err(Error::domain(
                "symplectic matrix",
                format!("M Ω Mᵀ differs from Ω by {err}"),
            ));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: Matrix::identity(2 * n_modes),
        }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn compose(&self, then: &Self) -> Self {
        Self {
            matrix: then.matrix.matmul(&self.matrix),
        }
    }

    /// Single-mode squeeze: variance scaled by `e^{−2r}` along the axis at
    /// angle `theta`, by `e^{2r}` along the orthogonal axis.
    pub fn squeeze(n_modes: usize, mode: usize, r: T, theta: T) -> Result<Self> {
        check_mode(n_modes, mode)?;
        let (s, c) = theta.sin_cos();
        let (shrink, grow) = ((-r).exp(), r.exp());
        // R(θ) diag(e^{-r}, e^{r}) R(θ)ᵀ
        let a = c * c * shrink + s * s * grow;
        let b = c * s * (shrink - grow);
        let d = s * s * shrink + c * c * grow;
        let mut m = Matrix::identity(2 * n_modes);
        let (i, q) = (2 * mode, 2 * mode + 1);
        m[(i, i)] = a;
        m[(i, q)] = b;
        m[(q, i)] = b;
        m[(q, q)] = d;
        Ok(Self { matrix: m })
    }

    /// Phase-space rotation of one mode by `angle`.
    pub fn rotation(n_modes: usize, mode: usize, angle: T) -> Result<Self> {
        check_mode(n_modes, mode)?;
        let (s, c) = angle.sin_cos();
        let mut m = Matrix::identity(2 * n_modes);
        let (i, q) = (2 * mode, 2 * mode + 1);
        m[(i, i)] = c;
        m[(i, q)] = -s;
        m[(q, i)] = s;
        m[(q, q)] = c;
        Ok(Self { matrix: m })
    }

    /// Two-mode mixing rotation by `angle`: amplitude coefficients
    /// `cos(angle)` and `sin(angle)` applied identically to I and Q.
    pub fn mixing(n_modes: usize, mode_i: usize, mode_j: usize, angle: T) -> Result<Self> {
        check_mode(n_modes, mode_i)?;
        check_mode(n_modes, mode_j)?;
        if mode_i == mode_j {
            return Err(Error::domain("beam splitter", "modes must be distinct"));
        }
        let (s, c) = angle.sin_cos();
        let mut m = Matrix::identity(2 * n_modes);
        for quad in 0..2 {
            let (a, b) = (2 * mode_i + quad, 2 * mode_j + quad);
            m[(a, a)] = c;
            m[(a, b)] = s;
            m[(b, a)] = -s;
            m[(b, b)] = c;
        }
        Ok(Self { matrix: m })
    }

    /// Beam splitter with power transmissivity `τ ∈ [0, 1]`
    /// (amplitudes `√τ` and `√(1−τ)`).
    pub fn beam_splitter(n_modes: usize, mode_i: usize, mode_j: usize, transmissivity: T) -> Result<Self> {
        if !(transmissivity >= T::zero() && transmissivity <= T::one()) {
            return Err(Error::domain(
                "transmissivity",
                format!("must lie in [0, 1], got {transmissivity}"),
            ));
        }
        Self::mixing(n_modes, mode_i, mode_j, transmissivity.sqrt().acos())
    }
}

fn check_mode(n_modes: usize, mode: usize) -> Result<()> {
    if mode < n_modes {
        Ok(())
    } else {
        Err(Error::InvalidMode {
            index: mode,
            n_modes,
        })
    }
}

/// One step of a transfer chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelElement<T> {
    /// Noisy squeezer: ideal squeeze followed by symmetric added noise.
    Squeeze {
        mode: usize,
        r: T,
        theta: T,
        added_photons: T,
    },
    BeamSplitter {
        mode_i: usize,
        mode_j: usize,
        transmissivity: T,
    },
    /// Beam-splitter coupling to a thermal environment; `loss` is linear.
    Loss {
        mode: usize,
        loss: T,
        env_photons: T,
    },
}

impl<T: Scalar> ChannelElement<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: T| x >= T::zero() && x <= T::one();
        let non_negative = |x: T| x >= T::zero() && x.is_finite();
        match *self {
            ChannelElement::Squeeze { r, added_photons, .. } => {
                if !non_negative(r) {
                    return Err(Error::domain("squeeze factor", format!("must be ≥ 0, got {r}")));
                }
                if !non_negative(added_photons) {
                    return Err(Error::domain(
                        "added photons",
                        format!("must be ≥ 0, got {added_photons}"),
                    ));
                }
            }
            ChannelElement::BeamSplitter {
                mode_i,
                mode_j,
                transmissivity,
            } => {
                if mode_i == mode_j {
                    return Err(Error::domain("beam splitter", "modes must be distinct"));
                }
                if !unit(transmissivity) {
                    return Err(Error::domain(
                        "transmissivity",
                        format!("must lie in [0, 1], got {transmissivity}"),
                    ));
                }
            }
            ChannelElement::Loss { loss, env_photons, .. } => {
                if !unit(loss) {
                    return Err(Error::domain("loss", format!("must lie in [0, 1], got {loss}")));
                }
                if !non_negative(env_photons) {
                    return Err(Error::domain(
                        "environment photons",
                        format!("must be ≥ 0, got {env_photons}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, state: &GaussianState<T>) -> Result<GaussianState<T>> {
        match *self {
            ChannelElement::Squeeze {
                mode,
                r,
                theta,
                added_photons,
            } => state.apply_squeeze(mode, r, theta, added_photons),
            ChannelElement::BeamSplitter {
                mode_i,
                mode_j,
                transmissivity,
            } => state.apply_beam_splitter(mode_i, mode_j, transmissivity),
            ChannelElement::Loss {
                mode,
                loss,
                env_photons,
            } => state.apply_loss(mode, loss, env_photons),
        }
    }

    /// True when the element leaves every state unchanged.
    pub fn is_identity(&self) -> bool {
        match *self {
            ChannelElement::Squeeze { r, added_photons, .. } => {
                r == T::zero() && added_photons == T::zero()
            }
            ChannelElement::BeamSplitter { transmissivity, .. } => transmissivity == T::one(),
            ChannelElement::Loss { loss, .. } => loss == T::zero(),
        }
    }

    /// Mode indices the element acts on.
    pub fn modes(&self) -> Vec<usize> {
        match *self {
            ChannelElement::Squeeze { mode, .. } | ChannelElement::Loss { mode, .. } => vec![mode],
            ChannelElement::BeamSplitter { mode_i, mode_j, .. } => vec![mode_i, mode_j],
        }
    }
}
