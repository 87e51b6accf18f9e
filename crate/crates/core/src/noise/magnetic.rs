// SPDX-License-Identifier: Apache-2.0

//! Magnetic noise: fluctuating surface spins and the Biot–Savart field of
//! mobile surface charges.

use std::f64::consts::PI;

use super::{div3, lorentz_shape, scale3, Spectrum, SurfaceGeometry};
use crate::constants::{spin_half_moment, BOLTZMANN, ELEMENTARY_CHARGE, VACUUM_PERMEABILITY};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Surface spin-1/2 moments (areal density `n_sd`) flipping with correlation
/// time `tau`, precessing at `delta_omega_mu` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticDipoleNoise {
    geometry: SurfaceGeometry,
    n_sd: f64,
    tau: f64,
    delta_omega_mu: f64,
    gamma_bath: f64,
}

impl MagneticDipoleNoise {
    /// `gamma_bath` is the bath gyromagnetic ratio in Hz/T.
    pub fn new(
        geometry: SurfaceGeometry,
        n_sd: f64,
        tau: f64,
        delta_omega_mu: f64,
        gamma_bath: f64,
    ) -> Result<Self> {
        ensure_non_negative("n_sd", n_sd)?;
        ensure_positive("tau", tau)?;
        ensure_non_negative("gamma_bath", gamma_bath)?;
        if !delta_omega_mu.is_finite() {
            return Err(Error::param("delta_omega_mu", "must be finite"));
        }
        Ok(MagneticDipoleNoise { geometry, n_sd, tau, delta_omega_mu, gamma_bath })
    }

    pub fn geometry(&self) -> &SurfaceGeometry {
        &self.geometry
    }

    pub fn n_sd(&self) -> f64 {
        self.n_sd
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn delta_omega_mu(&self) -> f64 {
        self.delta_omega_mu
    }

    pub fn gamma_bath(&self) -> f64 {
        self.gamma_bath
    }

    pub fn with_geometry(mut self, geometry: SurfaceGeometry) -> Self {
        self.geometry = geometry;
        self
    }

    /// Bath splitting following a static field `bz`: `Δω_μ = 2π γ_bath B_z`.
    pub fn tracking_field(mut self, bz: f64) -> Self {
        self.delta_omega_mu = 2.0 * PI * self.gamma_bath * bz;
        self
    }

    /// Moment magnitude `h γ_bath / 2` (J/T).
    pub fn moment(&self) -> f64 {
        spin_half_moment(self.gamma_bath)
    }

    /// Moment spectrum `S_μ(ω)` (J²/T² · s).
    pub fn moment_spectrum(&self, omega: f64) -> f64 {
        self.moment().powi(2) * lorentz_shape(omega - self.delta_omega_mu, self.tau)
    }

    fn geometric(&self) -> [f64; 3] {
        let z2 = self.geometry.z_def().powi(2);
        let k = VACUUM_PERMEABILITY / (4.0 * PI);
        scale3(self.geometry.axis_factors(), k * k * PI * self.n_sd / (4.0 * z2 * z2))
    }

    /// Per-axis field variance (T²).
    pub fn variance(&self) -> [f64; 3] {
        scale3(self.geometric(), self.moment().powi(2))
    }
}

impl Spectrum for MagneticDipoleNoise {
    fn density(&self, omega: f64) -> [f64; 3] {
        scale3(self.geometric(), self.moment_spectrum(omega))
    }
}

pub fn magnetic_dipole_spectrum(cfg: &MagneticDipoleNoise, omega: f64) -> [f64; 3] {
    cfg.density(omega)
}

/// Drude gas of mobile surface charges (areal density `n_s`, effective mass
/// `m_star`, momentum relaxation time `tau`) at temperature `temperature`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargedMotionNoise {
    z_def: f64,
    n_s: f64,
    temperature: f64,
    m_star: f64,
    tau: f64,
}

impl ChargedMotionNoise {
    pub fn new(z_def: f64, n_s: f64, temperature: f64, m_star: f64, tau: f64) -> Result<Self> {
        ensure_positive("z_def", z_def)?;
        ensure_positive("n_s", n_s)?;
        ensure_positive("temperature", temperature)?;
        ensure_positive("m_star", m_star)?;
        ensure_positive("tau", tau)?;
        Ok(ChargedMotionNoise { z_def, n_s, temperature, m_star, tau })
    }

    pub fn z_def(&self) -> f64 {
        self.z_def
    }

    pub fn n_s(&self) -> f64 {
        self.n_s
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn m_star(&self) -> f64 {
        self.m_star
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn with_depth(mut self, z_def: f64) -> Result<Self> {
        ensure_positive("z_def", z_def)?;
        self.z_def = z_def;
        Ok(self)
    }

    /// `σ_2D(ω) = n e² τ / (m (1 + ω²τ²))` (S).
    pub fn conductivity(&self, omega: f64) -> f64 {
        let x = omega * self.tau;
        self.n_s * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * self.tau / (self.m_star * (1.0 + x * x))
    }

    /// Per-axis field variance (T²), the Lorentzian weight of the spectrum.
    pub fn variance(&self) -> [f64; 3] {
        let s0 = self.density(0.0)[0];
        [s0 / (2.0 * self.tau); 3]
    }
}

impl Spectrum for ChargedMotionNoise {
    fn density(&self, omega: f64) -> [f64; 3] {
        let mu2 = VACUUM_PERMEABILITY * VACUUM_PERMEABILITY;
        let s = mu2 * BOLTZMANN * self.temperature * self.conductivity(omega)
            / (16.0 * PI * self.z_def * self.z_def);
        [s; 3]
    }
}

pub fn charged_motion_spectrum(cfg: &ChargedMotionNoise, omega: f64) -> [f64; 3] {
    cfg.density(omega)
}

/// Per-axis `S_motion(ω) / S_magnetic_dipole(ω)`.
pub fn ratio_motion_vs_magdipole(q: &ChargedMotionNoise, m: &MagneticDipoleNoise, omega: f64) -> [f64; 3] {
    div3(q.density(omega), m.density(omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ELECTRON_MASS;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spins(z: f64, theta: f64, dw: f64) -> MagneticDipoleNoise {
        MagneticDipoleNoise::new(SurfaceGeometry::new(z, theta).unwrap(), 5e16, 0.24e-9, dw, 28e9).unwrap()
    }

    fn drude(z: f64) -> ChargedMotionNoise {
        ChargedMotionNoise::new(z, 1e17, 300.0, ELECTRON_MASS, 10e-15).unwrap()
    }

    #[test]
    fn spin_spectrum_peaks_at_bath_splitting() {
        let m = spins(5e-9, 0.0, 3e9);
        let peak = m.density(3e9)[2];
        for &w in &[0.0, 2.9e9, 3.1e9, -3e9] {
            assert!(m.density(w)[2] < peak);
        }
        assert_relative_eq!(peak, m.variance()[2] * 2.0 * m.tau(), max_relative = 1e-14);
    }

    #[test]
    fn spin_spectrum_depth_law() {
        let a = spins(5e-9, 0.3, 0.0).density(1e8);
        let b = spins(10e-9, 0.3, 0.0).density(1e8);
        for k in 0..3 {
            assert_relative_eq!(b[k], a[k] / 16.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn spin_axis_factors_at_zero_tilt() {
        let s = spins(5e-9, 0.0, 0.0).density(0.0);
        assert_relative_eq!(s[1], s[0], max_relative = 1e-15);
        assert_relative_eq!(s[2], 2.0 * s[0], max_relative = 1e-15);
        let mu0 = VACUUM_PERMEABILITY;
        let mu = spin_half_moment(28e9);
        let want = (mu0 / (4.0 * PI)).powi(2) * PI * 5e16 / (4.0 * 5e-9f64.powi(4)) * 2.0 * mu * mu * 0.24e-9;
        assert_relative_eq!(s[0], want, max_relative = 1e-14);
    }

    #[test]
    fn tracking_field_sets_splitting() {
        let m = spins(5e-9, 0.0, 0.0).tracking_field(0.05);
        assert_relative_eq!(m.delta_omega_mu(), 2.0 * PI * 28e9 * 0.05, max_relative = 1e-15);
    }

    #[test]
    fn drude_reference_value() {
        let s = drude(10e-9).density(0.0);
        assert_relative_eq!(s[0], 3.666_791_375_822_954e-23, max_relative = 1e-12);
        assert_eq!(s[0], s[1]);
        assert_eq!(s[1], s[2]);
        let want = VACUUM_PERMEABILITY.powi(2) * BOLTZMANN * 300.0 * 1e17 * ELEMENTARY_CHARGE.powi(2) * 10e-15
            / (ELECTRON_MASS * 16.0 * PI * 1e-16);
        assert_relative_eq!(s[0], want, max_relative = 1e-14);
        let near = drude(5e-9).density(0.0);
        assert_relative_eq!(near[0], 4.0 * s[0], max_relative = 1e-14);
        assert!(ChargedMotionNoise::new(1e-9, 1e17, 0.0, ELECTRON_MASS, 1e-14).is_err());
    }

    #[test]
    fn motion_ratio_is_quotient() {
        let q = drude(5e-9);
        let m = spins(5e-9, 0.0, 0.0);
        for &w in &[0.0, 1e9, 1e13] {
            let r = ratio_motion_vs_magdipole(&q, &m, w);
            let sq = q.density(w);
            let sm = m.density(w);
            for k in 0..3 {
                assert_relative_eq!(r[k], sq[k] / sm[k], max_relative = 1e-12);
            }
            // The compact form k_B T σ z² / (n S_μ) omits the x-axis geometric
            // factor 4 (and 2 along z at zero tilt).
            let compact = BOLTZMANN * q.temperature() * q.conductivity(w) * 25e-18 / (m.n_sd() * m.moment_spectrum(w));
            assert_relative_eq!(r[0], 4.0 * compact, max_relative = 1e-12);
            assert_relative_eq!(r[2], 2.0 * compact, max_relative = 1e-12);
        }
        // z² scaling at fixed spectra
        let r1 = ratio_motion_vs_magdipole(&drude(10e-9), &spins(10e-9, 0.0, 0.0), 0.0)[0];
        let r0 = ratio_motion_vs_magdipole(&q, &m, 0.0)[0];
        assert_relative_eq!(r1 / r0, 4.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn magnetic_spectra_nonnegative_and_even(w in 0.0..1e13f64, theta in 0.0..PI) {
            let m = spins(5e-9, theta, 0.0);
            let q = drude(5e-9);
            let a = m.density(w);
            let b = m.density(-w);
            for k in 0..3 {
                prop_assert_eq!(a[k], b[k]);
                prop_assert!(a[k] >= 0.0);
            }
            prop_assert_eq!(q.density(w), q.density(-w));
        }
    }
}
