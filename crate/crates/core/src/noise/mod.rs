// SPDX-License-Identifier: Apache-2.0

//! Analytic spectral densities of surface/bulk electric and magnetic noise.
//!
//! Spectra are two-sided, `⟨X(t)X(0)⟩ = ∫ dω/2π S(ω) e^{iωt}`, in units of
//! field² · s, and always given per axis in the defect frame.

mod electric;
mod magnetic;
mod one_over_f;

pub use electric::*;
pub use magnetic::*;
pub use one_over_f::*;

use crate::constants::coulomb_prefactor;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::model::FrameRotation;
use crate::par::Execution;

/// A per-axis spectral density `S(ω)` in the defect frame.
pub trait Spectrum: Send + Sync {
    /// `(S_x, S_y, S_z)` at angular frequency `omega` (rad/s).
    fn density(&self, omega: f64) -> [f64; 3];

    /// Batch evaluation over a frequency grid, in grid order.
    fn density_grid(&self, omegas: &[f64], exec: Execution) -> Vec<[f64; 3]> {
        exec.map_slice(omegas, |&w| self.density(w))
    }
}

impl<S: Spectrum + ?Sized> Spectrum for &S {
    fn density(&self, omega: f64) -> [f64; 3] {
        (**self).density(omega)
    }
}

impl<S: Spectrum + ?Sized> Spectrum for Box<S> {
    fn density(&self, omega: f64) -> [f64; 3] {
        (**self).density(omega)
    }
}

/// No noise.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSpectrum;

impl Spectrum for ZeroSpectrum {
    fn density(&self, _omega: f64) -> [f64; 3] {
        [0.0; 3]
    }
}

/// Frequency-independent (white) noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatSpectrum(pub [f64; 3]);

impl Spectrum for FlatSpectrum {
    fn density(&self, _omega: f64) -> [f64; 3] {
        self.0
    }
}

/// Sum of independent sources.
#[derive(Default)]
pub struct SpectrumSum {
    parts: Vec<Box<dyn Spectrum>>,
}

impl SpectrumSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, s: impl Spectrum + 'static) {
        self.parts.push(Box::new(s));
    }

    pub fn with(mut self, s: impl Spectrum + 'static) -> Self {
        self.push(s);
        self
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

impl Spectrum for SpectrumSum {
    fn density(&self, omega: f64) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for p in &self.parts {
            let s = p.density(omega);
            for k in 0..3 {
                acc[k] += s[k];
            }
        }
        acc
    }
}

/// Single-time-constant Lorentzian `S(ω) = σ² · 2τ / (1 + (ω − ω_c)²τ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianSpectrum {
    variance: f64,
    tau: f64,
    omega_center: f64,
}

impl LorentzianSpectrum {
    pub fn new(variance: f64, tau: f64) -> Result<Self> {
        Self::centered(variance, tau, 0.0)
    }

    pub fn centered(variance: f64, tau: f64, omega_center: f64) -> Result<Self> {
        ensure_non_negative("variance", variance)?;
        ensure_positive("tau", tau)?;
        if !omega_center.is_finite() {
            return Err(Error::param("omega_center", "must be finite"));
        }
        Ok(LorentzianSpectrum { variance, tau, omega_center })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn omega_center(&self) -> f64 {
        self.omega_center
    }

    #[inline]
    pub fn at(&self, omega: f64) -> f64 {
        let x = (omega - self.omega_center) * self.tau;
        self.variance * 2.0 * self.tau / (1.0 + x * x)
    }
}

/// Unit-variance Lorentzian shape `2τ / (1 + ω²τ²)`.
#[inline]
pub(crate) fn lorentz_shape(omega: f64, tau: f64) -> f64 {
    let x = omega * tau;
    2.0 * tau / (1.0 + x * x)
}

/// Defect depth, tilt and dielectric environment shared by the surface
/// sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceGeometry {
    z_def: f64,
    rotation: FrameRotation,
    epsilon_r: f64,
    epsilon_ext: Option<f64>,
}

impl SurfaceGeometry {
    /// Depth `z_def` (m) below the surface, tilt `theta` (rad), diamond host.
    pub fn new(z_def: f64, theta: f64) -> Result<Self> {
        ensure_positive("z_def", z_def)?;
        Ok(SurfaceGeometry {
            z_def,
            rotation: FrameRotation::new(theta)?,
            epsilon_r: crate::constants::DIAMOND_EPSILON_R,
            epsilon_ext: None,
        })
    }

    pub fn with_epsilon_r(mut self, epsilon_r: f64) -> Result<Self> {
        ensure_positive("epsilon_r", epsilon_r)?;
        self.epsilon_r = epsilon_r;
        Ok(self)
    }

    /// Places the surface at an interface with a medium of relative
    /// permittivity `epsilon_ext`.
    pub fn with_interface(mut self, epsilon_ext: f64) -> Result<Self> {
        ensure_positive("epsilon_ext", epsilon_ext)?;
        self.epsilon_ext = Some(epsilon_ext);
        Ok(self)
    }

    pub fn with_depth(mut self, z_def: f64) -> Result<Self> {
        ensure_positive("z_def", z_def)?;
        self.z_def = z_def;
        Ok(self)
    }

    pub fn z_def(&self) -> f64 {
        self.z_def
    }

    pub fn theta(&self) -> f64 {
        self.rotation.theta()
    }

    pub fn rotation(&self) -> FrameRotation {
        self.rotation
    }

    pub fn epsilon_r(&self) -> f64 {
        self.epsilon_r
    }

    pub fn epsilon_ext(&self) -> Option<f64> {
        self.epsilon_ext
    }

    /// `(e/4πε)²`, with the interface substitution when configured.
    pub fn coulomb_squared(&self) -> f64 {
        let k = coulomb_prefactor(self.epsilon_r);
        let f = match self.epsilon_ext {
            Some(ext) => interface_factor(self.epsilon_r, ext),
            None => 1.0,
        };
        k * k * f
    }

    /// Axis factors `(1, (3 − cos2θ)/2, (3 + cos2θ)/2)` relative to x.
    pub fn axis_factors(&self) -> [f64; 3] {
        let c = (2.0 * self.theta()).cos();
        [1.0, 0.5 * (3.0 - c), 0.5 * (3.0 + c)]
    }
}

fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn div3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] / b[0], a[1] / b[1], a[2] / b[2]]
}
