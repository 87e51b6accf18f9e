// SPDX-License-Identifier: Apache-2.0

//! Run configuration. Every dimensional key carries its unit as a suffix
//! (`tau_p_ns`, `n_s_cm2`, ...); values are converted to SI when the core
//! objects are built.

use std::fmt;

use qutrit_noise::constants::{ELECTRON_MASS, ELECTRON_VOLT};
use qutrit_noise::model::SpinCenterParams;
use qutrit_noise::noise::{
    ActivatedEnergyBand, ChargedMotionNoise, DipoleSpectrum, MagneticDipoleNoise, OneOverFSpectrum, Spectrum,
    SpectrumSum, SurfaceDipoleNoise, SurfaceGeometry, SurfacePointChargeNoise, ZeroSpectrum,
};
use serde::Deserialize;

pub const CONFIG_VERSION: u32 = 1;

const NM: f64 = 1e-9;
const NS: f64 = 1e-9;
const US: f64 = 1e-6;
const FS: f64 = 1e-15;
const PER_CM2: f64 = 1e4;
const PER_CM3: f64 = 1e6;

/// A configuration problem, tagged with the offending key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError { field: field.into(), reason: reason.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.reason)
        } else {
            write!(f, "{}: {}", self.field, self.reason)
        }
    }
}

type CResult<T> = Result<T, ConfigError>;

fn core<T>(field: &str, r: qutrit_noise::Result<T>) -> CResult<T> {
    r.map_err(|e| ConfigError::new(field, e.to_string()))
}

pub fn positive(field: &str, v: f64) -> CResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be a positive number, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> CResult<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be a non-negative number, got {v}")))
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub seed: Option<u64>,
    #[serde(default)]
    pub defect: DefectConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub noise: Vec<NoiseSource>,
    pub sweep: Option<SweepConfig>,
    pub populations: Option<PopulationsConfig>,
    pub rates: Option<RatesConfig>,
    pub fit: Option<FitConfig>,
    pub mc_verify: Option<McVerifyConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DefectConfig {
    pub zero_field_splitting_hz: f64,
    pub gamma_par_hz_per_t: f64,
    pub gamma_perp_hz_per_t: f64,
    pub d_par_hz_m_per_v: f64,
    pub d_perp_hz_m_per_v: f64,
    pub d_prime_hz_m_per_v: f64,
}

impl Default for DefectConfig {
    fn default() -> Self {
        let p = SpinCenterParams::nv();
        DefectConfig {
            zero_field_splitting_hz: p.zero_field_splitting,
            gamma_par_hz_per_t: p.gamma_par,
            gamma_perp_hz_per_t: p.gamma_perp,
            d_par_hz_m_per_v: p.d_par,
            d_perp_hz_m_per_v: p.d_perp,
            d_prime_hz_m_per_v: p.d_prime,
        }
    }
}

impl DefectConfig {
    pub fn params(&self) -> CResult<SpinCenterParams> {
        core(
            "defect",
            SpinCenterParams::new(
                self.zero_field_splitting_hz,
                self.gamma_par_hz_per_t,
                self.gamma_perp_hz_per_t,
                self.d_par_hz_m_per_v,
                self.d_perp_hz_m_per_v,
                self.d_prime_hz_m_per_v,
            ),
        )
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub z_def_nm: f64,
    pub theta_rad: f64,
    pub epsilon_r: f64,
    pub epsilon_ext: Option<f64>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { z_def_nm: 5.0, theta_rad: 0.0, epsilon_r: 5.7, epsilon_ext: None }
    }
}

impl GeometryConfig {
    pub fn at_depth(&self, z: f64) -> CResult<SurfaceGeometry> {
        let g = core("geometry.z_def_nm", SurfaceGeometry::new(z, self.theta_rad))?;
        let g = core("geometry.epsilon_r", g.with_epsilon_r(self.epsilon_r))?;
        match self.epsilon_ext {
            Some(e) => core("geometry.epsilon_ext", g.with_interface(e)),
            None => Ok(g),
        }
    }

    pub fn surface(&self) -> CResult<SurfaceGeometry> {
        self.at_depth(positive("geometry.z_def_nm", self.z_def_nm)? * NM)
    }
}

fn default_m_star() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSource {
    PointCharge {
        n_s_cm2: f64,
        tau_p_ns: f64,
    },
    Dipole {
        n_sd_cm2: f64,
        d_bar_nm: f64,
        #[serde(default)]
        omega_d_rad_per_s: f64,
        gamma_d_per_s: f64,
    },
    MagneticDipole {
        n_sd_cm2: f64,
        tau_ns: f64,
        #[serde(default)]
        delta_omega_rad_per_s: f64,
        gamma_bath_hz_per_t: f64,
        /// Bath Larmor frequency follows the static field.
        #[serde(default)]
        track_bz: bool,
    },
    ChargedMotion {
        n_s_cm2: f64,
        temperature_k: f64,
        #[serde(default = "default_m_star")]
        m_star_me: f64,
        tau_fs: f64,
    },
    OneOverF {
        variance_v2_per_m2: [f64; 3],
        e1_ev: f64,
        e2_ev: f64,
        tau0_s: f64,
        temperature_k: f64,
    },
    Bulk {
        n_v_cm3: f64,
    },
}

/// Built noise model at one static field.
pub struct BuiltSpectra {
    pub electric: Box<dyn Spectrum>,
    pub magnetic: Box<dyn Spectrum>,
}

impl NoiseSource {
    pub fn kind(&self) -> &'static str {
        match self {
            NoiseSource::PointCharge { .. } => "point_charge",
            NoiseSource::Dipole { .. } => "dipole",
            NoiseSource::MagneticDipole { .. } => "magnetic_dipole",
            NoiseSource::ChargedMotion { .. } => "charged_motion",
            NoiseSource::OneOverF { .. } => "one_over_f",
            NoiseSource::Bulk { .. } => "bulk",
        }
    }
}

/// Sums the configured spectra for a static field `bz` (T). Bulk sources
/// only contribute a variance level and are skipped here.
pub fn build_spectra(sources: &[NoiseSource], geom: &SurfaceGeometry, bz: f64) -> CResult<BuiltSpectra> {
    let mut electric = SpectrumSum::new();
    let mut magnetic = SpectrumSum::new();
    for (i, src) in sources.iter().enumerate() {
        let at = |key: &str| format!("noise[{i}].{key}");
        match *src {
            NoiseSource::PointCharge { n_s_cm2, tau_p_ns } => {
                let s = SurfacePointChargeNoise::new(
                    *geom,
                    non_negative(&at("n_s_cm2"), n_s_cm2)? * PER_CM2,
                    positive(&at("tau_p_ns"), tau_p_ns)? * NS,
                );
                electric.push(core(&at("n_s_cm2"), s)?);
            }
            NoiseSource::Dipole { n_sd_cm2, d_bar_nm, omega_d_rad_per_s, gamma_d_per_s } => {
                let d = positive(&at("d_bar_nm"), d_bar_nm)? * NM;
                let ds = core(&at("gamma_d_per_s"), DipoleSpectrum::new(d * d, omega_d_rad_per_s, gamma_d_per_s))?;
                let s = SurfaceDipoleNoise::new(*geom, non_negative(&at("n_sd_cm2"), n_sd_cm2)? * PER_CM2, ds);
                electric.push(core(&at("n_sd_cm2"), s)?);
            }
            NoiseSource::MagneticDipole { n_sd_cm2, tau_ns, delta_omega_rad_per_s, gamma_bath_hz_per_t, track_bz } => {
                let s = MagneticDipoleNoise::new(
                    *geom,
                    non_negative(&at("n_sd_cm2"), n_sd_cm2)? * PER_CM2,
                    positive(&at("tau_ns"), tau_ns)? * NS,
                    delta_omega_rad_per_s,
                    gamma_bath_hz_per_t,
                );
                let s = core(&at("gamma_bath_hz_per_t"), s)?;
                magnetic.push(if track_bz { s.tracking_field(bz) } else { s });
            }
            NoiseSource::ChargedMotion { n_s_cm2, temperature_k, m_star_me, tau_fs } => {
                let s = ChargedMotionNoise::new(
                    geom.z_def(),
                    positive(&at("n_s_cm2"), n_s_cm2)? * PER_CM2,
                    positive(&at("temperature_k"), temperature_k)?,
                    positive(&at("m_star_me"), m_star_me)? * ELECTRON_MASS,
                    positive(&at("tau_fs"), tau_fs)? * FS,
                );
                magnetic.push(core(&at("tau_fs"), s)?);
            }
            NoiseSource::OneOverF { variance_v2_per_m2, e1_ev, e2_ev, tau0_s, temperature_k } => {
                let band = core(
                    &at("e2_ev"),
                    ActivatedEnergyBand::new(e1_ev * ELECTRON_VOLT, e2_ev * ELECTRON_VOLT, tau0_s, temperature_k),
                )?;
                electric.push(core(&at("variance_v2_per_m2"), OneOverFSpectrum::new(variance_v2_per_m2, band))?);
            }
            NoiseSource::Bulk { .. } => {}
        }
    }
    let boxed = |s: SpectrumSum| -> Box<dyn Spectrum> {
        if s.is_empty() {
            Box::new(ZeroSpectrum)
        } else {
            Box::new(s)
        }
    };
    Ok(BuiltSpectra { electric: boxed(electric), magnetic: boxed(magnetic) })
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl Range {
    pub fn grid(&self, field: &str, scale: f64) -> CResult<Vec<f64>> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(ConfigError::new(field, "start and stop must be finite"));
        }
        if self.points < 2 {
            return Err(ConfigError::new(format!("{field}.points"), "need at least 2"));
        }
        if self.stop <= self.start {
            return Err(ConfigError::new(format!("{field}.stop"), "must exceed start"));
        }
        let n = self.points - 1;
        if self.log {
            if self.start <= 0.0 {
                return Err(ConfigError::new(format!("{field}.start"), "must be positive for a log grid"));
            }
            let (a, b) = (self.start.ln(), self.stop.ln());
            Ok((0..=n).map(|i| scale * (a + (b - a) * i as f64 / n as f64).exp()).collect())
        } else {
            Ok((0..=n).map(|i| scale * (self.start + (self.stop - self.start) * i as f64 / n as f64)).collect())
        }
    }
}

/// Exactly one sweep variable may be set; its key names the unit.
#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub bz_t: Option<Range>,
    pub z_nm: Option<Range>,
    pub t_us: Option<Range>,
    pub omega_rad_per_s: Option<Range>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Bz,
    Depth,
    Time,
    Omega,
}

impl SweepVariable {
    pub fn key(self) -> &'static str {
        match self {
            SweepVariable::Bz => "sweep.bz_t",
            SweepVariable::Depth => "sweep.z_nm",
            SweepVariable::Time => "sweep.t_us",
            SweepVariable::Omega => "sweep.omega_rad_per_s",
        }
    }
}

impl SweepConfig {
    pub fn single(&self) -> CResult<(SweepVariable, Range)> {
        let set: Vec<(SweepVariable, Range)> = [
            (SweepVariable::Bz, self.bz_t),
            (SweepVariable::Depth, self.z_nm),
            (SweepVariable::Time, self.t_us),
            (SweepVariable::Omega, self.omega_rad_per_s),
        ]
        .into_iter()
        .filter_map(|(v, r)| r.map(|r| (v, r)))
        .collect();
        match set.as_slice() {
            [one] => Ok(*one),
            [] => Err(ConfigError::new("sweep", "no sweep variable set")),
            _ => Err(ConfigError::new("sweep", "set exactly one of bz_t, z_nm, t_us, omega_rad_per_s")),
        }
    }

    /// Grid in SI units for the variable a command expects.
    pub fn grid_for(&self, want: SweepVariable) -> CResult<Vec<f64>> {
        let (var, range) = self.single()?;
        if var != want {
            return Err(ConfigError::new(
                var.key(),
                format!("this command sweeps {}", want.key()),
            ));
        }
        let scale = match var {
            SweepVariable::Bz | SweepVariable::Omega => 1.0,
            SweepVariable::Depth => NM,
            SweepVariable::Time => US,
        };
        range.grid(var.key(), scale)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PopulationsConfig {
    /// Give the three relaxation rates directly ...
    pub gamma_per_s: Option<f64>,
    pub omega_plus_per_s: Option<f64>,
    pub omega_minus_per_s: Option<f64>,
    /// ... or derive them from the noise sources at this field.
    pub bz_t: Option<f64>,
    #[serde(default = "default_initial")]
    pub initial_populations: [f64; 3],
    /// Step used with `--fixed-step`; defaults to 1/2000 of the window.
    pub fixed_dt_us: Option<f64>,
}

fn default_initial() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    pub guard_mhz: f64,
}

impl Default for RatesConfig {
    fn default() -> Self {
        RatesConfig { guard_mhz: 10.0 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub input: Option<String>,
    /// Fixed exponent; free when absent.
    pub exponent: Option<f64>,
    pub constant_rate: bool,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct McVerifyConfig {
    /// Fluctuator correlation time used in the simulation.
    pub tau_ns: f64,
    /// Correlation time the PSD is checked against; equal to `tau_ns`
    /// unless deliberately mismatched.
    pub reference_tau_ns: Option<f64>,
    pub configurations: usize,
    pub realizations: usize,
    pub psd_tolerance: f64,
    pub variance_tolerance: f64,
}

impl Default for McVerifyConfig {
    fn default() -> Self {
        McVerifyConfig {
            tau_ns: 10.0,
            reference_tau_ns: None,
            configurations: 2000,
            realizations: 200,
            psd_tolerance: 0.1,
            variance_tolerance: 0.05,
        }
    }
}

impl RunConfig {
    /// Parses and checks the version. TOML syntax and schema errors carry
    /// line and column.
    pub fn parse(text: &str) -> CResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::new("", e.to_string().trim_end()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(ConfigError::new(
                "version",
                format!("unsupported config version {} (expected {CONFIG_VERSION})", cfg.version),
            ));
        }
        Ok(cfg)
    }

    pub fn empty() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            seed: None,
            defect: DefectConfig::default(),
            geometry: GeometryConfig::default(),
            noise: Vec::new(),
            sweep: None,
            populations: None,
            rates: None,
            fit: None,
            mc_verify: None,
        }
    }
}

pub fn nm(v: f64) -> f64 {
    v * NM
}

pub fn ns(v: f64) -> f64 {
    v * NS
}

pub fn us(v: f64) -> f64 {
    v * US
}

pub fn per_cm2(v: f64) -> f64 {
    v * PER_CM2
}

pub fn per_cm3(v: f64) -> f64 {
    v * PER_CM3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal() {
        let c = RunConfig::parse("version = 1\n").unwrap();
        assert_eq!(c.geometry.z_def_nm, 5.0);
        assert!(c.noise.is_empty());
    }

    #[test]
    fn rejects_wrong_version() {
        let e = RunConfig::parse("version = 7\n").unwrap_err();
        assert_eq!(e.field, "version");
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = RunConfig::parse("version = 1\n[geometry]\nz_def = 5\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("z_def"), "{msg}");
    }

    #[test]
    fn noise_table_parses() {
        let text = "version = 1\n[[noise]]\nkind = \"point_charge\"\nn_s_cm2 = 1e11\ntau_p_ns = 5\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.noise, vec![NoiseSource::PointCharge { n_s_cm2: 1e11, tau_p_ns: 5.0 }]);
        let bad = "version = 1\n[[noise]]\nkind = \"point_charge\"\nn_s_cm2 = 1e11\ntau_p = 5\n";
        assert!(RunConfig::parse(bad).is_err());
    }

    #[test]
    fn validation_names_field() {
        let src = [NoiseSource::PointCharge { n_s_cm2: 1e11, tau_p_ns: -1.0 }];
        let geom = GeometryConfig::default().surface().unwrap();
        let e = build_spectra(&src, &geom, 0.0).err().unwrap();
        assert_eq!(e.field, "noise[0].tau_p_ns");
    }

    #[test]
    fn sweep_requires_one_variable() {
        let r = Range { start: 0.0, stop: 1.0, points: 3, log: false };
        let s = SweepConfig { bz_t: Some(r), t_us: Some(r), ..Default::default() };
        assert!(s.single().is_err());
        let s = SweepConfig { bz_t: Some(r), ..Default::default() };
        assert_eq!(s.grid_for(SweepVariable::Bz).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(s.grid_for(SweepVariable::Depth).unwrap_err().field, "sweep.bz_t");
    }

    #[test]
    fn log_grid_endpoints() {
        let r = Range { start: 2.0, stop: 100.0, points: 5, log: true };
        let g = r.grid("sweep.z_nm", 1e-9).unwrap();
        assert!((g[0] - 2e-9).abs() < 1e-22 && (g[4] - 100e-9).abs() < 1e-20);
    }
}
