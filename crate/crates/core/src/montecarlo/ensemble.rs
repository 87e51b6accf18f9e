// SPDX-License-Identifier: Apache-2.0

//! Explicit fluctuator ensembles on a finite square patch of surface.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::{stream_rng, TimeSeries};
use crate::constants::{ELEMENTARY_CHARGE, VACUUM_PERMEABILITY};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::model::FrameRotation;
use crate::noise::SurfaceGeometry;
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluctuatorKind {
    PointCharge,
    ElectricDipole,
    MagneticMoment,
    DriftCurrent,
}

/// What sits at each surface site, with its amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    /// Charge `charge` (C) switching sign.
    PointCharge { charge: f64 },
    /// Dipole `e·d` with rms length `rms_length` (m) along a random surface axis.
    ElectricDipole { rms_length: f64 },
    /// Magnetic moment `moment` (J/T) along a random surface axis.
    MagneticMoment { moment: f64 },
    /// Mobile charge with in-plane velocity components of rms `rms_velocity`
    /// (m/s), e.g. `sqrt(k_B T / m*)`.
    DriftCurrent { charge: f64, rms_velocity: f64 },
}

impl Source {
    pub fn kind(&self) -> FluctuatorKind {
        match self {
            Source::PointCharge { .. } => FluctuatorKind::PointCharge,
            Source::ElectricDipole { .. } => FluctuatorKind::ElectricDipole,
            Source::MagneticMoment { .. } => FluctuatorKind::MagneticMoment,
            Source::DriftCurrent { .. } => FluctuatorKind::DriftCurrent,
        }
    }

    /// Elementary point charge.
    pub fn elementary_charge() -> Self {
        Source::PointCharge { charge: ELEMENTARY_CHARGE }
    }

    /// True when the source produces a magnetic (T) rather than electric
    /// (V/m) field.
    pub fn is_magnetic(&self) -> bool {
        matches!(self, Source::MagneticMoment { .. } | Source::DriftCurrent { .. })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Source::PointCharge { charge } => ensure_positive("charge", charge),
            Source::ElectricDipole { rms_length } => ensure_positive("rms_length", rms_length),
            Source::MagneticMoment { moment } => ensure_positive("moment", moment),
            Source::DriftCurrent { charge, rms_velocity } => {
                ensure_positive("charge", charge)?;
                ensure_positive("rms_velocity", rms_velocity)
            }
        }
    }

    /// Independent unit processes per fluctuator.
    fn channels(&self) -> usize {
        match self {
            Source::DriftCurrent { .. } => 2,
            _ => 1,
        }
    }

    fn has_axis(&self) -> bool {
        matches!(self, Source::ElectricDipole { .. } | Source::MagneticMoment { .. })
    }
}

/// Time dependence of each unit-variance amplitude process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dynamics {
    /// ±1 switching at `rate` flips per second.
    Telegraph { rate: f64 },
    /// Gaussian Ornstein–Uhlenbeck process with correlation time `tau`.
    OrnsteinUhlenbeck { tau: f64 },
}

impl Dynamics {
    /// Telegraph process with autocorrelation `e^{−|t|/tau}`.
    pub fn telegraph_with_tau(tau: f64) -> Result<Self> {
        ensure_positive("tau", tau)?;
        Ok(Dynamics::Telegraph { rate: 0.5 / tau })
    }

    pub fn correlation_time(&self) -> f64 {
        match *self {
            Dynamics::Telegraph { rate } => 0.5 / rate,
            Dynamics::OrnsteinUhlenbeck { tau } => tau,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Dynamics::Telegraph { rate } => ensure_non_negative("rate", rate),
            Dynamics::OrnsteinUhlenbeck { tau } => ensure_positive("tau", tau),
        }
    }
}

/// Everything needed to draw an ensemble except the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub source: Source,
    pub dynamics: Dynamics,
    /// Areal density (m⁻²).
    pub n_areal: f64,
    /// Side `L` (m) of the square patch centred above the defect.
    pub side: f64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.dynamics.validate()?;
        ensure_non_negative("n_areal", self.n_areal)?;
        ensure_positive("side", self.side)
    }

    /// Patch side defaulting to `200 z_def`.
    pub fn default_side(z_def: f64) -> f64 {
        200.0 * z_def
    }
}

/// Poisson number (mean `n_areal·L²`) of uniform positions in
/// `[−L/2, L/2]²`.
pub fn sample_surface_positions(n_areal: f64, side: f64, seed: u64) -> Result<Vec<(f64, f64)>> {
    ensure_non_negative("n_areal", n_areal)?;
    ensure_positive("side", side)?;
    Ok(positions_from(&mut stream_rng(seed, 0), n_areal, side))
}

fn positions_from(rng: &mut ChaCha8Rng, n_areal: f64, side: f64) -> Vec<(f64, f64)> {
    let mean = n_areal * side * side;
    if mean == 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).map(|p| p.sample(rng)).unwrap_or(0.0) as usize;
    let h = 0.5 * side;
    (0..count).map(|_| (rng.random_range(-h..h), rng.random_range(-h..h))).collect()
}

/// A drawn configuration: positions and, for oriented sources, a fixed axis
/// (0, 1, 2 = x′, y′, z′) per fluctuator.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuatorEnsemble {
    spec: EnsembleSpec,
    positions: Vec<(f64, f64)>,
    axes: Vec<u8>,
    seed: u64,
    stream: u64,
}

impl FluctuatorEnsemble {
    pub fn generate(spec: EnsembleSpec, seed: u64) -> Result<Self> {
        Self::generate_stream(spec, seed, 0)
    }

    /// Configuration number `stream` of `seed`; distinct streams are
    /// statistically independent.
    pub fn generate_stream(spec: EnsembleSpec, seed: u64, stream: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = stream_rng(seed, 2 * stream);
        let positions = positions_from(&mut rng, spec.n_areal, spec.side);
        let axes = if spec.source.has_axis() {
            positions.iter().map(|_| rng.random_range(0..3u8)).collect()
        } else {
            vec![0; positions.len()]
        };
        Ok(FluctuatorEnsemble { spec, positions, axes, seed, stream })
    }

    /// Explicit placement; `axes` defaults to z′ for oriented sources.
    pub fn from_positions(spec: EnsembleSpec, positions: Vec<(f64, f64)>, axes: Option<Vec<u8>>, seed: u64) -> Result<Self> {
        spec.validate()?;
        let h = 0.5 * spec.side;
        if positions.iter().any(|&(x, y)| !(x.abs() <= h && y.abs() <= h)) {
            return Err(Error::param("positions", "must lie inside the patch"));
        }
        let axes = axes.unwrap_or_else(|| vec![2; positions.len()]);
        if axes.len() != positions.len() || axes.iter().any(|&a| a > 2) {
            return Err(Error::param("axes", "one axis index in 0..3 per position"));
        }
        Ok(FluctuatorEnsemble { spec, positions, axes, seed, stream: 0 })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn kind(&self) -> FluctuatorKind {
        self.spec.source.kind()
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn axes(&self) -> &[u8] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Field constants shared by the response functions.
#[derive(Clone, Copy)]
pub(crate) struct FieldFrame {
    /// `1/(4πε)` including the interface factor (V·m/C).
    k_e: f64,
    rot: FrameRotation,
    z: f64,
}

impl FieldFrame {
    pub(crate) fn new(geom: &SurfaceGeometry) -> Self {
        FieldFrame {
            k_e: geom.coulomb_squared().sqrt() / ELEMENTARY_CHARGE,
            rot: geom.rotation(),
            z: geom.z_def(),
        }
    }
}

const MU0_4PI: f64 = VACUUM_PERMEABILITY / (4.0 * PI);

fn unit(axis: usize) -> [f64; 3] {
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    a
}

fn dipole_field(m: [f64; 3], r: [f64; 3], r2: f64) -> [f64; 3] {
    let rr = r2.sqrt();
    let inv3 = 1.0 / (r2 * rr);
    let dot = (m[0] * r[0] + m[1] * r[1] + m[2] * r[2]) / r2;
    [
        (3.0 * dot * r[0] - m[0]) * inv3,
        (3.0 * dot * r[1] - m[1]) * inv3,
        (3.0 * dot * r[2] - m[2]) * inv3,
    ]
}

/// Defect-frame field per unit amplitude of `channel` for a source at
/// surface point `(x, y)` oriented along `axis`.
pub(crate) fn response(source: &Source, f: &FieldFrame, x: f64, y: f64, axis: usize, channel: usize) -> [f64; 3] {
    // r points from the defect to the source, surface frame
    let r = [x, y, f.z];
    let r2 = x * x + y * y + f.z * f.z;
    let v = match *source {
        Source::PointCharge { charge } => {
            let s = -f.k_e * charge / (r2 * r2.sqrt());
            [s * r[0], s * r[1], s * r[2]]
        }
        Source::ElectricDipole { rms_length } => {
            let p = f.k_e * ELEMENTARY_CHARGE * rms_length;
            dipole_field(unit(axis), r, r2).map(|c| p * c)
        }
        Source::MagneticMoment { moment } => dipole_field(unit(axis), r, r2).map(|c| MU0_4PI * moment * c),
        Source::DriftCurrent { charge, rms_velocity } => {
            // B = μ0/4π q (r × v)/r³ with v along x′ or y′
            let s = MU0_4PI * charge * rms_velocity / (r2 * r2.sqrt());
            if channel == 0 {
                [0.0, s * r[2], -s * r[1]]
            } else {
                [-s * r[2], 0.0, s * r[0]]
            }
        }
    };
    f.rot.to_defect(v)
}

/// Configuration-averaged squared response at `(x, y)`, per defect axis.
pub(crate) fn mean_square_response(source: &Source, f: &FieldFrame, x: f64, y: f64) -> [f64; 3] {
    let mut acc = [0.0; 3];
    let mut add = |g: [f64; 3], w: f64| {
        for k in 0..3 {
            acc[k] += w * g[k] * g[k];
        }
    };
    if source.has_axis() {
        for a in 0..3 {
            add(response(source, f, x, y, a, 0), 1.0 / 3.0);
        }
    } else {
        for c in 0..source.channels() {
            add(response(source, f, x, y, 0, c), 1.0);
        }
    }
    acc
}

/// Superposed field of every fluctuator, sampled `n` times at spacing `dt`
/// from the stationary state.
pub fn simulate_field_series(ens: &FluctuatorEnsemble, geom: &SurfaceGeometry, dt: f64, n: usize) -> Result<TimeSeries> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    if n < 2 {
        return Err(Error::param("n", "need at least two samples"));
    }
    let frame = FieldFrame::new(geom);
    let source = ens.spec.source;
    let channels = source.channels();
    let mut gains = Vec::with_capacity(ens.len() * channels);
    for (&(x, y), &a) in ens.positions.iter().zip(&ens.axes) {
        for c in 0..channels {
            gains.push(response(&source, &frame, x, y, a as usize, c));
        }
    }
    let mut rng = stream_rng(ens.seed, 2 * ens.stream + 1);
    let mut state: Vec<f64> = match ens.spec.dynamics {
        Dynamics::Telegraph { .. } => gains.iter().map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
        Dynamics::OrnsteinUhlenbeck { .. } => gains.iter().map(|_| rng.sample(StandardNormal)).collect(),
    };
    let mut samples = Vec::with_capacity(n);
    match ens.spec.dynamics {
        Dynamics::Telegraph { rate } => {
            let p_flip = 0.5 * (-(-2.0 * rate * dt).exp_m1());
            for _ in 0..n {
                let mut e = [0.0; 3];
                for (s, g) in state.iter_mut().zip(&gains) {
                    for k in 0..3 {
                        e[k] += *s * g[k];
                    }
                    if rng.random::<f64>() < p_flip {
                        *s = -*s;
                    }
                }
                samples.push(e);
            }
        }
        Dynamics::OrnsteinUhlenbeck { tau } => {
            let a = (-dt / tau).exp();
            let b = (-(-2.0 * dt / tau).exp_m1()).sqrt();
            for _ in 0..n {
                let mut e = [0.0; 3];
                for (s, g) in state.iter_mut().zip(&gains) {
                    for k in 0..3 {
                        e[k] += *s * g[k];
                    }
                    let xi: f64 = rng.sample(StandardNormal);
                    *s = a * *s + b * xi;
                }
                samples.push(e);
            }
        }
    }
    TimeSeries::new(dt, samples)
}

/// Pooled mean-square field over independent configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub mean: [f64; 3],
    pub std_err: [f64; 3],
    pub configurations: usize,
}

impl VarianceEstimate {
    /// Relative deviation from `reference` and its one-sigma width, per axis.
    pub fn relative_to(&self, reference: [f64; 3]) -> [(f64, f64); 3] {
        std::array::from_fn(|k| (self.mean[k] / reference[k] - 1.0, self.std_err[k] / reference[k]))
    }
}

/// Draws `configurations` independent ensembles (streams `0..configurations`
/// of `seed`), simulates each for `n` samples and averages the per-axis mean
/// square. Results do not depend on `exec`.
pub fn ensemble_variance(
    spec: &EnsembleSpec,
    geom: &SurfaceGeometry,
    dt: f64,
    n: usize,
    configurations: usize,
    seed: u64,
    exec: Execution,
) -> Result<VarianceEstimate> {
    if configurations < 2 {
        return Err(Error::param("configurations", "need at least two"));
    }
    let per: Vec<Result<[f64; 3]>> = exec.map_range(configurations, |c| {
        let ens = FluctuatorEnsemble::generate_stream(*spec, seed, c as u64)?;
        Ok(simulate_field_series(&ens, geom, dt, n)?.mean_square())
    });
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    let m = configurations as f64;
    let mut mean = [0.0; 3];
    for v in &per {
        for k in 0..3 {
            mean[k] += v[k];
        }
    }
    mean = mean.map(|s| s / m);
    let mut var = [0.0; 3];
    for v in &per {
        for k in 0..3 {
            var[k] += (v[k] - mean[k]).powi(2);
        }
    }
    let std_err = var.map(|s| (s / (m - 1.0) / m).sqrt());
    Ok(VarianceEstimate { mean, std_err, configurations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::coulomb_prefactor;
    use approx::assert_relative_eq;

    fn spec(source: Source, n: f64, side: f64) -> EnsembleSpec {
        EnsembleSpec { source, dynamics: Dynamics::Telegraph { rate: 1e6 }, n_areal: n, side }
    }

    #[test]
    fn empty_density_gives_no_sites() {
        assert!(sample_surface_positions(0.0, 1e-6, 3).unwrap().is_empty());
        assert!(sample_surface_positions(-1.0, 1e-6, 3).is_err());
    }

    #[test]
    fn poisson_count_statistics() {
        let (n, side) = (1e15, 1e-6);
        let lambda = n * side * side;
        let counts: Vec<f64> = (0..1000).map(|s| sample_surface_positions(n, side, s).unwrap().len() as f64).collect();
        let mean = counts.iter().sum::<f64>() / 1000.0;
        assert!((mean - lambda).abs() < 3.0 * (lambda / 1000.0).sqrt(), "mean count {mean}");
        assert_eq!(sample_surface_positions(n, side, 5).unwrap(), sample_surface_positions(n, side, 5).unwrap());
    }

    #[test]
    fn positions_uniform_chi_square() {
        let side = 1.0;
        let mut bins = [0usize; 100];
        let mut total = 0;
        for s in 0..20 {
            for (x, y) in sample_surface_positions(500.0, side, s).unwrap() {
                assert!(x.abs() <= 0.5 && y.abs() <= 0.5);
                let i = (((x + 0.5) * 10.0) as usize).min(9);
                let j = (((y + 0.5) * 10.0) as usize).min(9);
                bins[10 * i + j] += 1;
                total += 1;
            }
        }
        let expect = total as f64 / 100.0;
        let chi2: f64 = bins.iter().map(|&b| (b as f64 - expect).powi(2) / expect).sum();
        // χ²(99) upper 1% point
        assert!(chi2 < 134.6, "chi2 = {chi2}");
    }

    #[test]
    fn single_static_charge_is_coulomb() {
        let z = 5e-9;
        let geom = SurfaceGeometry::new(z, 0.0).unwrap();
        let mut sp = spec(Source::elementary_charge(), 0.0, 1e-7);
        sp.dynamics = Dynamics::Telegraph { rate: 0.0 };
        let ens = FluctuatorEnsemble::from_positions(sp, vec![(3e-9, -4e-9)], None, 1).unwrap();
        let ts = simulate_field_series(&ens, &geom, 1e-9, 10).unwrap();
        let r2 = 9e-18 + 16e-18 + 25e-18;
        let e = coulomb_prefactor(5.7) / r2;
        for s in ts.samples() {
            assert_eq!(*s, ts.samples()[0]);
            assert_relative_eq!((s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt(), e, max_relative = 1e-12);
            assert_relative_eq!(s[2].abs() / e, z / r2.sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn seeded_series_are_bitwise_reproducible() {
        let geom = SurfaceGeometry::new(5e-9, 0.4).unwrap();
        let sp = spec(Source::ElectricDipole { rms_length: 0.5e-9 }, 1e16, 1e-7);
        let a = FluctuatorEnsemble::generate(sp, 11).unwrap();
        let b = FluctuatorEnsemble::generate(sp, 11).unwrap();
        assert_eq!(a, b);
        let ta = simulate_field_series(&a, &geom, 1e-7, 64).unwrap();
        let tb = simulate_field_series(&b, &geom, 1e-7, 64).unwrap();
        assert_eq!(ta, tb);
        let c = FluctuatorEnsemble::generate(sp, 12).unwrap();
        assert_ne!(a.positions(), c.positions());
        assert!(simulate_field_series(&a, &geom, 0.0, 64).is_err());
        assert!(simulate_field_series(&a, &geom, 1e-7, 1).is_err());
    }

    #[test]
    fn execution_policy_does_not_change_estimate() {
        let geom = SurfaceGeometry::new(5e-9, 0.0).unwrap();
        let sp = spec(Source::elementary_charge(), 4e16, 2e-7);
        let a = ensemble_variance(&sp, &geom, 1e-6, 16, 6, 9, Execution::Sequential).unwrap();
        let b = ensemble_variance(&sp, &geom, 1e-6, 16, 6, 9, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn drift_response_is_biot_savart() {
        let geom = SurfaceGeometry::new(2e-9, 0.0).unwrap();
        let f = FieldFrame::new(&geom);
        let src = Source::DriftCurrent { charge: ELEMENTARY_CHARGE, rms_velocity: 1e5 };
        // directly above the defect the field is in-plane and ⟂ to v
        let b = response(&src, &f, 0.0, 0.0, 0, 0);
        let want = MU0_4PI * ELEMENTARY_CHARGE * 1e5 / 4e-18;
        assert_relative_eq!(b[1], want, max_relative = 1e-12);
        assert_eq!(b[0], 0.0);
        assert_eq!(b[2], 0.0);
    }
}
