// SPDX-License-Identifier: Apache-2.0

//! Surface point-charge and dipole noise, bulk near noise, and the quantities
//! derived from them.

use std::f64::consts::{PI, SQRT_2};

use super::{div3, lorentz_shape, scale3, Spectrum, SurfaceGeometry};
use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE, HBAR, VACUUM_PERMITTIVITY};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Fluctuating point-like surface charges with areal density `n_s` (m⁻²) and
/// correlation time `tau_p` (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePointChargeNoise {
    geometry: SurfaceGeometry,
    n_s: f64,
    tau_p: f64,
}

impl SurfacePointChargeNoise {
    pub fn new(geometry: SurfaceGeometry, n_s: f64, tau_p: f64) -> Result<Self> {
        ensure_non_negative("n_s", n_s)?;
        ensure_positive("tau_p", tau_p)?;
        Ok(SurfacePointChargeNoise { geometry, n_s, tau_p })
    }

    pub fn geometry(&self) -> &SurfaceGeometry {
        &self.geometry
    }

    pub fn n_s(&self) -> f64 {
        self.n_s
    }

    pub fn tau_p(&self) -> f64 {
        self.tau_p
    }

    pub fn with_geometry(mut self, geometry: SurfaceGeometry) -> Self {
        self.geometry = geometry;
        self
    }

    /// Per-axis field variance (V²/m²).
    pub fn variance(&self) -> [f64; 3] {
        let z = self.geometry.z_def();
        let x = self.geometry.coulomb_squared() * PI * self.n_s / (4.0 * z * z);
        scale3(self.geometry.axis_factors(), x)
    }
}

impl Spectrum for SurfacePointChargeNoise {
    fn density(&self, omega: f64) -> [f64; 3] {
        scale3(self.variance(), lorentz_shape(omega, self.tau_p))
    }
}

pub fn point_charge_variance(cfg: &SurfacePointChargeNoise) -> [f64; 3] {
    cfg.variance()
}

pub fn point_charge_spectrum(cfg: &SurfacePointChargeNoise, omega: f64) -> [f64; 3] {
    cfg.density(omega)
}

/// Resolved dipole-length spectrum
/// `S_d(ω) = ⟨d²⟩ Γ_d / ((ω − ω_d)² + (Γ_d/2)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSpectrum {
    mean_square_d: f64,
    omega_d: f64,
    gamma_d: f64,
}

impl DipoleSpectrum {
    pub fn new(mean_square_d: f64, omega_d: f64, gamma_d: f64) -> Result<Self> {
        ensure_non_negative("mean_square_d", mean_square_d)?;
        ensure_non_negative("omega_d", omega_d)?;
        ensure_positive("gamma_d", gamma_d)?;
        Ok(DipoleSpectrum { mean_square_d, omega_d, gamma_d })
    }

    /// Trapped charge in a harmonic well: `⟨d²⟩` from equipartition.
    pub fn equipartition(temperature: f64, m_star: f64, omega_d: f64, gamma_d: f64) -> Result<Self> {
        Self::new(dipole_mean_square_length(temperature, m_star, omega_d)?, omega_d, gamma_d)
    }

    pub fn mean_square_d(&self) -> f64 {
        self.mean_square_d
    }

    pub fn omega_d(&self) -> f64 {
        self.omega_d
    }

    pub fn gamma_d(&self) -> f64 {
        self.gamma_d
    }

    /// `S_d(ω) / ⟨d²⟩`.
    #[inline]
    pub fn shape(&self, omega: f64) -> f64 {
        let dw = omega - self.omega_d;
        let hw = 0.5 * self.gamma_d;
        self.gamma_d / (dw * dw + hw * hw)
    }

    #[inline]
    pub fn at(&self, omega: f64) -> f64 {
        self.mean_square_d * self.shape(omega)
    }
}

/// Fluctuating surface electric dipoles with areal density `n_sd` (m⁻²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceDipoleNoise {
    geometry: SurfaceGeometry,
    n_sd: f64,
    dipole: DipoleSpectrum,
}

impl SurfaceDipoleNoise {
    pub fn new(geometry: SurfaceGeometry, n_sd: f64, dipole: DipoleSpectrum) -> Result<Self> {
        ensure_non_negative("n_sd", n_sd)?;
        Ok(SurfaceDipoleNoise { geometry, n_sd, dipole })
    }

    pub fn geometry(&self) -> &SurfaceGeometry {
        &self.geometry
    }

    pub fn n_sd(&self) -> f64 {
        self.n_sd
    }

    pub fn dipole(&self) -> &DipoleSpectrum {
        &self.dipole
    }

    pub fn with_geometry(mut self, geometry: SurfaceGeometry) -> Self {
        self.geometry = geometry;
        self
    }

    /// Geometric factor multiplying `⟨d²⟩` (x, y, z), in V²/m⁴.
    fn geometric(&self) -> [f64; 3] {
        let z2 = self.geometry.z_def().powi(2);
        let x = self.geometry.coulomb_squared() * PI * self.n_sd / (4.0 * z2 * z2);
        scale3(self.geometry.axis_factors(), x)
    }

    /// Per-axis field variance (V²/m²).
    pub fn variance(&self) -> [f64; 3] {
        scale3(self.geometric(), self.dipole.mean_square_d)
    }
}

impl Spectrum for SurfaceDipoleNoise {
    fn density(&self, omega: f64) -> [f64; 3] {
        scale3(self.geometric(), self.dipole.at(omega))
    }
}

pub fn dipole_variance(cfg: &SurfaceDipoleNoise) -> [f64; 3] {
    cfg.variance()
}

pub fn dipole_spectrum(cfg: &SurfaceDipoleNoise, omega: f64) -> [f64; 3] {
    cfg.density(omega)
}

/// `⟨d²⟩ = 3 k_B T / (m ω_d²)` (m²).
pub fn dipole_mean_square_length(temperature: f64, m_star: f64, omega_d: f64) -> Result<f64> {
    ensure_non_negative("temperature", temperature)?;
    ensure_positive("m_star", m_star)?;
    if !(omega_d.is_finite() && omega_d > 0.0) {
        return Err(Error::param("omega_d", "unbound oscillator (omega_d must be > 0)"));
    }
    Ok(3.0 * BOLTZMANN * temperature / (m_star * omega_d * omega_d))
}

/// Escape rate Γ0 (1/s) of a charge from a parabolic well of depth `e_b` (J)
/// and half-width `b` (m).
pub fn tunneling_rate(e_b: f64, b: f64, m_star: f64) -> Result<f64> {
    ensure_positive("e_b", e_b)?;
    ensure_positive("b", b)?;
    ensure_positive("m_star", m_star)?;
    let omega_d = (2.0 * e_b / (m_star * b * b)).sqrt();
    let x = 2.0 * e_b / (HBAR * omega_d);
    Ok(2.0 * omega_d / PI.powf(1.5) * x.sqrt() * (-x).exp())
}

/// Volume fluctuators near the defect; isotropic, depth independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkNearNoise {
    n_v: f64,
    epsilon_r: f64,
}

impl BulkNearNoise {
    pub fn new(n_v: f64, epsilon_r: f64) -> Result<Self> {
        ensure_non_negative("n_v", n_v)?;
        ensure_positive("epsilon_r", epsilon_r)?;
        Ok(BulkNearNoise { n_v, epsilon_r })
    }

    pub fn n_v(&self) -> f64 {
        self.n_v
    }

    /// Per-axis variance `|δE_b|²/3`.
    pub fn variance(&self) -> [f64; 3] {
        [bulk_near_field(self).powi(2) / 3.0; 3]
    }
}

/// `|δE_b| = e n_v^{2/3} / (√2 π ε)` (V/m).
pub fn bulk_near_field(cfg: &BulkNearNoise) -> f64 {
    let eps = VACUUM_PERMITTIVITY * cfg.epsilon_r;
    ELEMENTARY_CHARGE * cfg.n_v.powf(2.0 / 3.0) / (SQRT_2 * PI * eps)
}

/// Depth (m) at which the total point-charge variance equals the bulk one.
pub fn optimal_depth_point(n_s: f64, n_v: f64) -> Result<f64> {
    ensure_non_negative("n_s", n_s)?;
    ensure_positive("n_v", n_v)?;
    Ok((PI / 8.0).sqrt() * n_s.sqrt() / n_v.powf(2.0 / 3.0))
}

/// Depth (m) at which the total dipole variance, with rms dipole length
/// `d_bar`, equals the bulk one.
pub fn optimal_depth_dipole(n_sd: f64, d_bar: f64, n_v: f64) -> Result<f64> {
    ensure_non_negative("n_sd", n_sd)?;
    ensure_non_negative("d_bar", d_bar)?;
    ensure_positive("n_v", n_v)?;
    let z2 = PI.sqrt() * d_bar * n_sd.sqrt() / (2f64.powf(1.5) * n_v.powf(2.0 / 3.0));
    Ok(z2.sqrt())
}

/// Variance enhancement `(2ε / (ε + ε_ext))²` of a surface source when the
/// half-space above has relative permittivity `epsilon_ext`.
pub fn interface_factor(epsilon_r: f64, epsilon_ext: f64) -> f64 {
    let f = 2.0 * epsilon_r / (epsilon_r + epsilon_ext);
    f * f
}

pub fn interface_rescale(epsilon_r: f64, epsilon_ext: f64) -> Result<f64> {
    ensure_positive("epsilon_r", epsilon_r)?;
    ensure_non_negative("epsilon_ext", epsilon_ext)?;
    Ok(interface_factor(epsilon_r, epsilon_ext))
}

/// Per-axis `S_point(ω) / S_dipole(ω)`.
pub fn ratio_point_vs_dipole(p: &SurfacePointChargeNoise, d: &SurfaceDipoleNoise, omega: f64) -> [f64; 3] {
    div3(p.density(omega), d.density(omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ELECTRON_MASS, ELECTRON_VOLT};
    use crate::quadrature::{integrate_sinh, QuadOptions};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const CM2: f64 = 1e4;
    const CM3: f64 = 1e6;

    fn geom(z: f64, theta: f64) -> SurfaceGeometry {
        SurfaceGeometry::new(z, theta).unwrap()
    }

    fn point(n_s: f64, z: f64, theta: f64) -> SurfacePointChargeNoise {
        SurfacePointChargeNoise::new(geom(z, theta), n_s, 5e-9).unwrap()
    }

    fn dipole(n_sd: f64, z: f64, theta: f64, d_bar: f64) -> SurfaceDipoleNoise {
        let ds = DipoleSpectrum::new(d_bar * d_bar, 0.0, 1e9).unwrap();
        SurfaceDipoleNoise::new(geom(z, theta), n_sd, ds).unwrap()
    }

    #[test]
    fn point_variance_reference_value() {
        let v = point(1e11 * CM2, 5e-9, 0.0).variance();
        assert_relative_eq!(v[0], 2.004_950_987_393_132_3e12, max_relative = 1e-12);
        assert_relative_eq!(v[0].sqrt(), 1_415_962.918_791_707_8, max_relative = 1e-12);
        assert_relative_eq!(v[1], v[0], max_relative = 1e-15);
        assert_relative_eq!(v[2], 2.0 * v[0], max_relative = 1e-15);
    }

    #[test]
    fn point_variance_depth_law() {
        let a = point(1e15, 5e-9, 0.4).variance();
        let b = point(1e15, 10e-9, 0.4).variance();
        for k in 0..3 {
            assert_relative_eq!(b[k], a[k] / 4.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn point_spectrum_examples() {
        let p = point(1e15, 5e-9, 0.0);
        let v = p.variance();
        let s0 = p.density(0.0);
        let s1 = p.density(1.0 / p.tau_p());
        for k in 0..3 {
            assert_relative_eq!(s0[k], 2.0 * p.tau_p() * v[k], max_relative = 1e-15);
            assert_relative_eq!(s1[k], p.tau_p() * v[k], max_relative = 1e-15);
        }
        let big = 1e7 / p.tau_p();
        let r = integrate_sinh(|w| p.density(w)[0], -big, big, 1.0 / p.tau_p(), QuadOptions::default())
            .unwrap();
        assert_relative_eq!(r.value / (2.0 * PI), v[0], max_relative = 1e-3);
    }

    #[test]
    fn dipole_variance_reference_value() {
        let d = dipole(1e12 * CM2, 5e-9, 0.0, 0.5e-9);
        let v = d.variance();
        assert_relative_eq!(v[0], 2.004_950_987_393_133e11, max_relative = 1e-12);
        assert_relative_eq!(v[2], 2.0 * v[0], max_relative = 1e-15);
        let far = d.with_geometry(geom(10e-9, 0.0)).variance();
        for k in 0..3 {
            assert_relative_eq!(far[k], v[k] / 16.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn dipole_spectrum_examples() {
        let ds = DipoleSpectrum::new(2.5e-19, 3e9, 1e8).unwrap();
        assert_relative_eq!(ds.at(3e9), 4.0 * 2.5e-19 / 1e8, max_relative = 1e-15);
        let g = ds.gamma_d();
        let r = integrate_sinh(|w| ds.at(w + 3e9), -50.0 * g, 50.0 * g, g, QuadOptions::default()).unwrap();
        assert_relative_eq!(r.value / (2.0 * PI), 2.5e-19, max_relative = 1e-2);
        // ω⁻² tail at ω_d = 0
        let tail = DipoleSpectrum::new(1.0, 0.0, 1e3).unwrap();
        let slope = (tail.at(2e8) / tail.at(1e8)).ln() / 2f64.ln();
        assert!((slope + 2.0).abs() < 1e-9);
        assert!(DipoleSpectrum::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn equipartition_length() {
        let d2 = dipole_mean_square_length(300.0, ELECTRON_MASS, 1e14).unwrap();
        assert_relative_eq!(d2, 1.364_070_434_428_996_7e-18, max_relative = 1e-12);
        let d2x2 = dipole_mean_square_length(600.0, ELECTRON_MASS, 1e14).unwrap();
        assert_relative_eq!(d2x2, 2.0 * d2, max_relative = 1e-15);
        assert_eq!(dipole_mean_square_length(0.0, ELECTRON_MASS, 1e14).unwrap(), 0.0);
        assert!(dipole_mean_square_length(300.0, ELECTRON_MASS, 0.0).is_err());
        let eq = DipoleSpectrum::equipartition(300.0, ELECTRON_MASS, 1e14, 1e9).unwrap();
        assert_eq!(eq.mean_square_d(), d2);
    }

    fn tunneling_reference(e_b: f64, b: f64, m: f64) -> f64 {
        // Second path: written in terms of the oscillator quantum ħω_d.
        let quantum = HBAR * (2.0 * e_b / (m * b * b)).sqrt();
        let w = quantum / HBAR;
        let ratio = e_b / quantum;
        (2.0 * w / (PI * PI.sqrt())) * (2.0 * ratio).sqrt() / (2.0 * ratio).exp()
    }

    #[test]
    fn tunneling_rate_examples() {
        let g = tunneling_rate(0.1 * ELECTRON_VOLT, 1e-9, ELECTRON_MASS).unwrap();
        assert_relative_eq!(g, 1.696_699_725_263_499_4e13, max_relative = 1e-12);
        assert_relative_eq!(g, tunneling_reference(0.1 * ELECTRON_VOLT, 1e-9, ELECTRON_MASS), max_relative = 1e-13);
        // 2E_b/ħω_d = 1 ⇔ E_b = ħ²/(2 m b²)
        let m = ELECTRON_MASS;
        let b = 1e-9;
        let e_b = HBAR * HBAR / (2.0 * m * b * b);
        let w = (2.0 * e_b / (m * b * b)).sqrt();
        assert_relative_eq!(
            tunneling_rate(e_b, b, m).unwrap(),
            2.0 * w / PI.powf(1.5) * (-1.0f64).exp(),
            max_relative = 1e-13
        );
        let deep = tunneling_rate(1e3 * ELECTRON_VOLT, b, m).unwrap();
        assert!(deep < 1e-50 && deep < tunneling_rate(10.0 * ELECTRON_VOLT, b, m).unwrap());
        assert!(tunneling_rate(0.0, b, m).is_err());
        assert!(tunneling_rate(1.0, -b, m).is_err());
    }

    #[test]
    fn bulk_near_field_examples() {
        let b = BulkNearNoise::new(1e15 * CM3, 5.7).unwrap();
        assert_relative_eq!(bulk_near_field(&b), 71_453.241_807_558_85, max_relative = 1e-12);
        let b8 = BulkNearNoise::new(8e15 * CM3, 5.7).unwrap();
        assert_relative_eq!(bulk_near_field(&b8), 4.0 * bulk_near_field(&b), max_relative = 1e-13);
        assert_eq!(bulk_near_field(&BulkNearNoise::new(0.0, 5.7).unwrap()), 0.0);
        let v = b.variance();
        assert_relative_eq!(v.iter().sum::<f64>(), bulk_near_field(&b).powi(2), max_relative = 1e-15);
    }

    #[test]
    fn optimal_depths() {
        let (n_s, n_v) = (1e12 * CM2, 1e15 * CM3);
        let z = optimal_depth_point(n_s, n_v).unwrap();
        assert_relative_eq!(z, 6.266_570_686_577_511e-7, max_relative = 1e-12);
        // the closed form with √(2π) is exactly four times deeper
        let printed = (2.0 * PI).sqrt() * n_s.sqrt() / n_v.powf(2.0 / 3.0);
        assert_relative_eq!(printed / z, 4.0, max_relative = 1e-14);

        let bulk = bulk_near_field(&BulkNearNoise::new(n_v, 5.7).unwrap()).powi(2);
        let surf: f64 = point(n_s, z, 0.7).variance().iter().sum();
        assert_relative_eq!(surf, bulk, max_relative = 1e-9);

        let zd = optimal_depth_dipole(1e12 * CM2, 0.5e-9, n_v).unwrap();
        assert_relative_eq!(zd, 1.770_108_850_689_345_6e-8, max_relative = 1e-12);
        let surf: f64 = dipole(1e12 * CM2, zd, 1.1, 0.5e-9).variance().iter().sum();
        assert_relative_eq!(surf, bulk, max_relative = 1e-9);
        assert!(optimal_depth_point(n_s, 0.0).is_err());
        assert!(optimal_depth_dipole(n_s, 0.5e-9, 0.0).is_err());
    }

    #[test]
    fn interface_examples() {
        assert_eq!(interface_rescale(5.7, 5.7).unwrap(), 1.0);
        assert_relative_eq!(interface_rescale(5.7, 1.0).unwrap(), 2.895_076_854_533_303_7, max_relative = 1e-14);
        assert!(interface_rescale(5.7, 1e12).unwrap() < 1e-21);
        let bare = point(1e15, 5e-9, 0.3);
        let wet = bare.with_geometry(bare.geometry().with_interface(1.0).unwrap());
        for k in 0..3 {
            assert_relative_eq!(
                wet.variance()[k] / bare.variance()[k],
                interface_rescale(5.7, 1.0).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    fn printed_point_dipole_ratio(p: &SurfacePointChargeNoise, d: &SurfaceDipoleNoise, omega: f64) -> f64 {
        let ds = d.dipole();
        let z = p.geometry().z_def();
        let tau = p.tau_p();
        let g = ds.gamma_d();
        (p.n_s() / d.n_sd()) * z * z / ds.mean_square_d() * (2.0 * tau / g)
            * ((omega - ds.omega_d()).powi(2) + (g / 2.0).powi(2))
            / (1.0 + omega * omega * tau * tau)
    }

    #[test]
    fn point_dipole_ratio_matches_quotient_and_printed_form() {
        let p = point(1e15, 7e-9, 0.9);
        let ds = DipoleSpectrum::new(0.25e-18, 2e8, 1.0 / p.tau_p()).unwrap();
        let d = SurfaceDipoleNoise::new(geom(7e-9, 0.9), 1e16, ds).unwrap();
        for &w in &[0.0, 1e7, 2e8, 3e9] {
            let r = ratio_point_vs_dipole(&p, &d, w);
            let q = div3(p.density(w), d.density(w));
            for k in 0..3 {
                assert_relative_eq!(r[k], q[k], max_relative = 1e-12);
                assert_relative_eq!(r[k], printed_point_dipole_ratio(&p, &d, w), max_relative = 1e-12);
            }
        }
        // τ_p = 1/Γ_d, ω = ω_d = 0: ratio reduces to n_s z² / (2 n_sd d̄²)
        let ds0 = DipoleSpectrum::new(0.25e-18, 0.0, 1.0 / p.tau_p()).unwrap();
        let d0 = SurfaceDipoleNoise::new(geom(7e-9, 0.9), 1e16, ds0).unwrap();
        let r = ratio_point_vs_dipole(&p, &d0, 0.0);
        assert_relative_eq!(r[0], 0.5 * 1e15 * 49e-18 / (1e16 * 0.25e-18), max_relative = 1e-12);
    }

    #[test]
    fn point_charges_dominate_deep() {
        let d_bar: f64 = 0.5e-9;
        let mut prev = 0.0;
        for &z in &[2e-9, 5e-9, 2e-8, 1e-7] {
            let ds = DipoleSpectrum::new(d_bar * d_bar, 0.0, 1e9).unwrap();
            let p = SurfacePointChargeNoise::new(geom(z, 0.0), 1e15, 1e-9).unwrap();
            let d = SurfaceDipoleNoise::new(geom(z, 0.0), 1e15, ds).unwrap();
            let r = ratio_point_vs_dipole(&p, &d, 0.0)[0];
            assert_relative_eq!(r, 0.5 * z * z / (d_bar * d_bar), max_relative = 1e-12);
            assert!(r > prev);
            prev = r;
        }
        assert!(prev > 1.0);
    }

    proptest! {
        #[test]
        fn angular_sum_rule(theta in 0.0..PI, z in 1e-9..1e-7f64) {
            let ref_p = point(1e15, z, 0.0).variance();
            let p = point(1e15, z, theta).variance();
            prop_assert!(((p[1] + p[2]) - (ref_p[1] + ref_p[2])).abs() <= 1e-13 * (ref_p[1] + ref_p[2]));
            let ref_d = dipole(1e16, z, 0.0, 0.4e-9).variance();
            let d = dipole(1e16, z, theta, 0.4e-9).variance();
            prop_assert!(((d[1] + d[2]) - (ref_d[1] + ref_d[2])).abs() <= 1e-13 * (ref_d[1] + ref_d[2]));
        }

        #[test]
        fn spectra_even_and_nonnegative(w in 0.0..1e12f64, theta in 0.0..PI) {
            let p = point(1e15, 5e-9, theta);
            let a = p.density(w);
            let b = p.density(-w);
            let ds = DipoleSpectrum::new(1e-19, 0.0, 1e9).unwrap();
            let d = SurfaceDipoleNoise::new(geom(5e-9, theta), 1e16, ds).unwrap();
            let c = d.density(w);
            let e = d.density(-w);
            for k in 0..3 {
                prop_assert_eq!(a[k], b[k]);
                prop_assert_eq!(c[k], e[k]);
                prop_assert!(a[k] >= 0.0 && c[k] >= 0.0);
            }
        }
    }
}
