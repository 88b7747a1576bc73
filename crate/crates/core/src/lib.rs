//! Stochastic dynamics of a bolometrically driven optomechanical cavity near
//! its self-excited oscillation threshold.
//!
//! The crate is `no_std` (with `alloc`). It covers the static cavity optics
//! and thermal response, the amplitude-flow coefficients of the slow complex
//! amplitude, an ensemble Langevin integrator, the analytic steady-state
//! phase-space density, characteristic-function/Hankel tomography, and
//! sweep fitting of reduced device parameters.
//!
//! Amplitudes are usually handled in reduced units: lengths in units of the
//! optical wavelength λ and time in units of 1/γ₀. [`flow::ReducedCoeffs`]
//! converts to and from SI.
//!
//! The `parallel` feature (default) runs ensemble trajectories, characteristic
//! function chunks and fit seeding on rayon. Results are merged in index order
//! so they do not depend on the thread count.
#![no_std]
// With std linked, float methods resolve to the inherent impls instead of libm.
#![cfg_attr(feature = "std", allow(unused_imports))]
// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cavity;
pub mod device;
pub mod error;
pub mod fitting;
pub mod flow;
pub mod langevin;
mod par;
pub mod quadrature;
pub mod special;
pub mod steady_state;
pub mod tomography;

pub use cavity::CavityOptics;
pub use device::{DeviceParams, OperatingPoint};
pub use error::{Error, Result};
pub use flow::{FlowCoeffs, ReducedCoeffs};
pub use num_complex::Complex64;
pub use steady_state::{RadialDistribution, SteadyState};

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380_649e-23;
