//! Simulation of Gaussian microwave states distributed over a superconducting
//! cryogenic link.
//!
//! The crate is organised bottom-up:
//!
//! * [`gaussian`] — N-mode Gaussian states, symplectic maps, loss channels,
//!   sampling and moment estimation.
//! * [`metrics`] — squeezing level, purity, symplectic spectra, negativity.
//! * [`thermal`] — Planck occupation, threshold temperatures and the
//!   fluctuation–dissipation voltage variance.
//! * [`heatprofile`] — steady-state temperature profile of the cable and the
//!   sigmoid-smoothed piecewise-linear temperature response fit.
//! * [`network`] — the transfer chain from squeezer to receiver, temperature
//!   sweeps, calibration and multi-hop composition.
//!
//! The numerical modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the network layer uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod gaussian;
pub mod heatprofile;
pub mod linalg;
pub mod metrics;
pub mod network;
pub mod quadrature;
pub mod scalar;
pub mod thermal;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type GaussianState64 = gaussian::GaussianState<f64>;
pub type GaussianState32 = gaussian::GaussianState<f32>;
pub type ChannelElement64 = gaussian::ChannelElement<f64>;
pub type SymplecticMatrix64 = gaussian::SymplecticMatrix<f64>;
pub type QuadratureSamples64 = gaussian::QuadratureSamples<f64>;
pub type MetricReport64 = metrics::MetricReport<f64>;
pub type HeatModel64 = heatprofile::HeatModel<f64>;
pub type TemperatureProfile64 = heatprofile::TemperatureProfile<f64>;
pub type ResponseFit64 = heatprofile::ResponseFit<f64>;
