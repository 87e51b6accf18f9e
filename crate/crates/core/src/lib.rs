// SPDX-License-Identifier: Apache-2.0

//! Decoherence and relaxation of C3v spin-1 (qutrit) defect centers near a
//! crystal surface.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] – defect constants, the ground-state Hamiltonian, transition
//!   frequencies and the surface/defect frame rotation.
//! * [`noise`] – analytic spectral densities of surface and bulk charge noise
//!   and of magnetic noise.
//! * [`lindblad`] – channel rates, the eight Lindblad operators, the 9×9
//!   Liouvillian, closed-form relaxation/dephasing and a numerical integrator.
//! * [`montecarlo`] – brute-force oracles: fluctuator ensembles, PSD
//!   estimation, surface quadrature and stochastic-Hamiltonian averaging.
//! * [`fitting`] – power-law fits of coherence time versus depth.
//! * [`pipeline`] – parameter sweeps shared by the CLI.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
mod error;
pub mod fitting;
pub mod lindblad;
pub mod model;
pub mod montecarlo;
pub mod noise;
pub mod par;
pub mod pipeline;
pub mod quadrature;

pub use error::{Error, Result};
