// SPDX-License-Identifier: Apache-2.0

//! Lorentzians with activated correlation times `τ = τ0 e^{E/k_BT}`,
//! averaged over a flat band `E1 < E < E2`.

use super::{scale3, Spectrum};
use crate::constants::BOLTZMANN;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Below this value of `ω τ_max` the closed form is replaced by its series.
const SERIES_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivatedEnergyBand {
    e1: f64,
    e2: f64,
    tau_0: f64,
    temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneOverFRegime {
    /// `ω τ_max ≪ 1`: white.
    Flat,
    /// `τ_min⁻¹ ≫ ω ≫ τ_max⁻¹`: `1/ω`.
    InverseOmega,
    /// `ω τ_min ≫ 1`: `1/ω²`.
    InverseOmegaSquared,
}

impl ActivatedEnergyBand {
    /// Energies in J, attempt time in s, temperature in K.
    pub fn new(e1: f64, e2: f64, tau_0: f64, temperature: f64) -> Result<Self> {
        ensure_positive("e1", e1)?;
        ensure_positive("tau_0", tau_0)?;
        ensure_positive("temperature", temperature)?;
        if !(e2 > e1) || !e2.is_finite() {
            return Err(Error::param("e2", format!("must exceed e1 = {e1:e}, got {e2:e}")));
        }
        let band = ActivatedEnergyBand { e1, e2, tau_0, temperature };
        if !band.tau_max().is_finite() {
            return Err(Error::param("e2", "activation time overflows at this temperature"));
        }
        Ok(band)
    }

    fn kt(&self) -> f64 {
        BOLTZMANN * self.temperature
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_0 * (self.e1 / self.kt()).exp()
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_0 * (self.e2 / self.kt()).exp()
    }

    fn prefactor(&self) -> f64 {
        2.0 * self.kt() / (self.e2 - self.e1)
    }

    /// `ω → 0` value `(2k_BT/ΔE) τ0 (e^{E2/kT} − e^{E1/kT})`.
    pub fn low_frequency_limit(&self) -> f64 {
        self.prefactor() * (self.tau_max() - self.tau_min())
    }

    /// Mid-band asymptote `π k_BT / (ΔE ω)`.
    pub fn mid_band_asymptote(&self, omega: f64) -> f64 {
        std::f64::consts::PI * self.kt() / ((self.e2 - self.e1) * omega.abs())
    }

    /// High-band asymptote `(2k_BT/ΔE) (e^{−E1/kT} − e^{−E2/kT}) / (τ0 ω²)`.
    pub fn high_band_asymptote(&self, omega: f64) -> f64 {
        self.prefactor() * (1.0 / self.tau_min() - 1.0 / self.tau_max()) / (omega * omega)
    }

    pub fn regime(&self, omega: f64) -> OneOverFRegime {
        let w = omega.abs();
        if w * self.tau_max() < 1.0 {
            OneOverFRegime::Flat
        } else if w * self.tau_min() > 1.0 {
            OneOverFRegime::InverseOmegaSquared
        } else {
            OneOverFRegime::InverseOmega
        }
    }
}

/// Dimensionless-normalised shape (s): integrates to 1 over `dω/2π`.
pub fn one_over_f_spectrum(band: &ActivatedEnergyBand, omega: f64) -> f64 {
    let w = omega.abs();
    let (t1, t2) = (band.tau_min(), band.tau_max());
    let x2 = w * t2;
    if x2 < SERIES_THRESHOLD {
        // atan(x)/ω = τ (1 − x²/3 + x⁴/5 − …)
        let series = |t: f64| {
            let x = w * t;
            let x2 = x * x;
            t * (1.0 - x2 / 3.0 + x2 * x2 / 5.0)
        };
        return band.prefactor() * (series(t2) - series(t1));
    }
    band.prefactor() * ((w * t2).atan() - (w * t1).atan()) / w
}

pub fn one_over_f_regime(band: &ActivatedEnergyBand, omega: f64) -> OneOverFRegime {
    band.regime(omega)
}

/// Per-axis variances distributed with the band shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneOverFSpectrum {
    variance: [f64; 3],
    band: ActivatedEnergyBand,
}

impl OneOverFSpectrum {
    pub fn new(variance: [f64; 3], band: ActivatedEnergyBand) -> Result<Self> {
        for v in variance {
            ensure_non_negative("variance", v)?;
        }
        Ok(OneOverFSpectrum { variance, band })
    }
}

impl Spectrum for OneOverFSpectrum {
    fn density(&self, omega: f64) -> [f64; 3] {
        scale3(self.variance, one_over_f_spectrum(&self.band, omega))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ELECTRON_VOLT;
    use crate::quadrature::{integrate, QuadOptions};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn band() -> ActivatedEnergyBand {
        // τ spans roughly 1e-10 s to 1e-3 s at room temperature.
        ActivatedEnergyBand::new(0.06 * ELECTRON_VOLT, 0.48 * ELECTRON_VOLT, 1e-11, 300.0).unwrap()
    }

    fn slope(b: &ActivatedEnergyBand, w: f64) -> f64 {
        let h = 1e-3;
        let up = one_over_f_spectrum(b, w * (1.0 + h));
        let dn = one_over_f_spectrum(b, w / (1.0 + h));
        (up / dn).ln() / (2.0 * (1.0 + h).ln())
    }

    #[test]
    fn zero_frequency_is_analytic_limit() {
        let b = band();
        assert_relative_eq!(one_over_f_spectrum(&b, 0.0), b.low_frequency_limit(), max_relative = 1e-15);
        let w = 1e-6 / b.tau_max();
        assert_relative_eq!(one_over_f_spectrum(&b, w), b.low_frequency_limit(), max_relative = 1e-11);
        // continuity across the series switch-over
        let edge = SERIES_THRESHOLD / b.tau_max();
        let lo = one_over_f_spectrum(&b, edge * (1.0 - 1e-9));
        let hi = one_over_f_spectrum(&b, edge * (1.0 + 1e-9));
        assert_relative_eq!(lo, hi, max_relative = 1e-8);
    }

    #[test]
    fn three_regimes() {
        let b = band();
        let w_lo = 1e-2 / b.tau_max();
        let w_hi = 1e2 / b.tau_min();
        let w_mid = (1.0 / (b.tau_min() * b.tau_max())).sqrt();
        assert_eq!(b.regime(w_lo), OneOverFRegime::Flat);
        assert_eq!(b.regime(w_mid), OneOverFRegime::InverseOmega);
        assert_eq!(b.regime(w_hi), OneOverFRegime::InverseOmegaSquared);
        assert_relative_eq!(one_over_f_spectrum(&b, w_lo), b.low_frequency_limit(), max_relative = 1e-2);
        assert_relative_eq!(one_over_f_spectrum(&b, w_mid), b.mid_band_asymptote(w_mid), max_relative = 1e-2);
        assert_relative_eq!(one_over_f_spectrum(&b, w_hi), b.high_band_asymptote(w_hi), max_relative = 1e-2);
        assert!((slope(&b, w_mid) + 1.0).abs() < 0.05);
        assert!((slope(&b, w_hi) + 2.0).abs() < 0.05);
        assert!(slope(&b, w_lo).abs() < 0.01);
    }

    #[test]
    fn shape_is_normalised() {
        let b = ActivatedEnergyBand::new(0.1 * ELECTRON_VOLT, 0.2 * ELECTRON_VOLT, 1e-9, 300.0).unwrap();
        // integrate over u = ln ω; the remainder outside is closed form
        let (lo, hi) = (1e-6 / b.tau_max(), 1e6 / b.tau_min());
        let opts = QuadOptions { rel_tol: 1e-10, ..Default::default() };
        let mid = integrate(|u| {
            let w = u.exp();
            w * one_over_f_spectrum(&b, w)
        }, lo.ln(), hi.ln(), opts)
        .unwrap()
        .value;
        let tails = lo * b.low_frequency_limit() + b.high_band_asymptote(hi) * hi;
        assert_relative_eq!(2.0 * (mid + tails) / (2.0 * PI), 1.0, max_relative = 1e-5);
    }

    #[test]
    fn rejects_bad_band() {
        assert!(ActivatedEnergyBand::new(0.2, 0.1, 1e-9, 300.0).is_err());
        assert!(ActivatedEnergyBand::new(0.1 * ELECTRON_VOLT, 0.2 * ELECTRON_VOLT, 0.0, 300.0).is_err());
        assert!(ActivatedEnergyBand::new(0.1 * ELECTRON_VOLT, 30.0 * ELECTRON_VOLT, 1e-9, 300.0).is_err());
    }
}
