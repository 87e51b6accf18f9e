// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps behind the command-line tools. Each sweep evaluates
//! independent points through [`Execution`] and returns them in input order.

use crate::error::{ensure_positive, Error, Result};
use crate::lindblad::{
    dephasing_rates, evolve_numeric, population_dynamics, rates_from_spectra, relaxation_rates, DephasingTimes,
    RateSet, StepControl,
};
use crate::model::{transition_frequencies, DensityMatrix3, SpinCenterParams, TransitionFrequencies};
use crate::noise::{
    bulk_near_field, optimal_depth_dipole, optimal_depth_point, BulkNearNoise, DipoleSpectrum, Spectrum,
    SurfaceDipoleNoise, SurfaceGeometry, SurfacePointChargeNoise,
};
use crate::par::Execution;

/// Everything derived at one static field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatesPoint {
    pub bz: f64,
    pub freqs: TransitionFrequencies,
    pub rates: RateSet,
    /// Fast and slow population relaxation rates `1/T1⁺`, `1/T1⁻` (1/s).
    pub rate_plus: f64,
    pub rate_minus: f64,
    pub dephasing: DephasingTimes,
}

/// Spectra `(electric, magnetic)` to use at a given `B_z`.
pub type SpectraAt<'a> = dyn Fn(f64) -> Result<(Box<dyn Spectrum>, Box<dyn Spectrum>)> + Sync + 'a;

/// Rates, relaxation and dephasing over a `B_z` grid. Points closer to a
/// level crossing than `guard` (rad/s) are kept and flagged invalid.
pub fn rates_sweep(
    params: &SpinCenterParams,
    bz_grid: &[f64],
    guard: f64,
    exec: Execution,
    spectra: &SpectraAt<'_>,
) -> Result<Vec<RatesPoint>> {
    params.validate()?;
    let pts = exec.map_slice(bz_grid, |&bz| -> Result<RatesPoint> {
        if !bz.is_finite() {
            return Err(Error::param("bz", "must be finite"));
        }
        let (e, b) = spectra(bz)?;
        let freqs = transition_frequencies(params, bz);
        let rates = rates_from_spectra(&*e, &*b, &freqs, params, guard)?;
        let sol = relaxation_rates(&rates);
        Ok(RatesPoint {
            bz,
            freqs,
            rates,
            rate_plus: sol.rate_plus(),
            rate_minus: sol.rate_minus(),
            dephasing: dephasing_rates(&rates),
        })
    });
    pts.into_iter().collect()
}

/// Surface and bulk electric sources for a depth sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthSources {
    pub theta: f64,
    pub epsilon_r: f64,
    /// Point-charge density (m⁻²).
    pub n_s: Option<f64>,
    /// Dipole density (m⁻²) and rms dipole length (m).
    pub dipole: Option<(f64, f64)>,
    /// Bulk fluctuator density (m⁻³).
    pub n_v: Option<f64>,
}

/// Field magnitudes `sqrt(Σ_k σ_k²)` (V/m) at one depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthRow {
    pub z: f64,
    pub point: Option<f64>,
    pub dipole: Option<f64>,
    pub bulk: Option<f64>,
}

/// Depths at which each surface source equals the bulk level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthMarkers {
    pub z_opt_point: Option<f64>,
    pub z_opt_dipole: Option<f64>,
}

fn magnitude(v: [f64; 3]) -> f64 {
    (v[0] + v[1] + v[2]).sqrt()
}

pub fn noise_vs_depth(src: &DepthSources, z_grid: &[f64], exec: Execution) -> Result<(Vec<DepthRow>, DepthMarkers)> {
    ensure_positive("epsilon_r", src.epsilon_r)?;
    let bulk = match src.n_v {
        Some(n_v) => Some(bulk_near_field(&BulkNearNoise::new(n_v, src.epsilon_r)?)),
        None => None,
    };
    let rows = exec.map_slice(z_grid, |&z| -> Result<DepthRow> {
        let geom = SurfaceGeometry::new(z, src.theta)?.with_epsilon_r(src.epsilon_r)?;
        let point = match src.n_s {
            Some(n) => Some(magnitude(SurfacePointChargeNoise::new(geom, n, 1.0)?.variance())),
            None => None,
        };
        let dipole = match src.dipole {
            Some((n, d)) => {
                let ds = DipoleSpectrum::new(d * d, 0.0, 1.0)?;
                Some(magnitude(SurfaceDipoleNoise::new(geom, n, ds)?.variance()))
            }
            None => None,
        };
        Ok(DepthRow { z, point, dipole, bulk })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let markers = match src.n_v {
        Some(n_v) => DepthMarkers {
            z_opt_point: src.n_s.map(|n| optimal_depth_point(n, n_v)).transpose()?,
            z_opt_dipole: src.dipole.map(|(n, d)| optimal_depth_dipole(n, d, n_v)).transpose()?,
        },
        None => DepthMarkers { z_opt_point: None, z_opt_dipole: None },
    };
    Ok((rows, markers))
}

/// Closed-form and integrated populations on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationRow {
    pub t: f64,
    pub analytic: [f64; 3],
    pub numeric: [f64; 3],
}

pub fn population_comparison(
    rates: &RateSet,
    rho0: &DensityMatrix3,
    t_grid: &[f64],
    control: StepControl,
) -> Result<Vec<PopulationRow>> {
    let analytic = population_dynamics(rates, rho0, t_grid)?;
    let numeric = evolve_numeric(rates, rho0, t_grid, control)?;
    Ok(t_grid
        .iter()
        .zip(analytic)
        .zip(&numeric.states)
        .map(|((&t, a), s)| PopulationRow { t, analytic: a, numeric: s.populations() })
        .collect())
}
