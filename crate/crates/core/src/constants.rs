// SPDX-License-Identifier: Apache-2.0

//! Physical constants (CODATA 2022, SI units).

use std::f64::consts::PI;

/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity (F/m).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_818_8e-12;
/// Vacuum permeability (N/A²).
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_061_27e-6;
/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bohr magneton (J/T).
pub const BOHR_MAGNETON: f64 = 9.274_010_065_7e-24;
/// Free-electron g factor (magnitude).
pub const ELECTRON_G: f64 = 2.002_319_304_360_92;
/// Electron rest mass (kg).
pub const ELECTRON_MASS: f64 = 9.109_383_713_9e-31;

/// Default host relative permittivity (diamond).
pub const DIAMOND_EPSILON_R: f64 = 5.7;

/// Coulomb prefactor `e / (4π ε0 εr)` in V·m.
pub fn coulomb_prefactor(epsilon_r: f64) -> f64 {
    ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY * epsilon_r)
}

/// Magnetic-moment magnitude `|μ| = h γ / 2` of a spin-1/2 bath particle
/// whose gyromagnetic ratio `gamma_hz_per_t` is given in Hz/T.
pub fn spin_half_moment(gamma_hz_per_t: f64) -> f64 {
    PLANCK * gamma_hz_per_t / 2.0
}

/// Converts a frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    2.0 * PI * f
}

/// Electron-volt in joules.
pub const ELECTRON_VOLT: f64 = ELEMENTARY_CHARGE;
