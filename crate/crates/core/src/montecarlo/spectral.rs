// SPDX-License-Identifier: Apache-2.0

//! Empirical correlation functions and spectral densities of a
//! [`TimeSeries`], plus the small fits used to read τ back off them.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::TimeSeries;
use crate::error::{Error, Result};

/// `C(k·dt)` per axis, for lags `0..=max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    pub dt: f64,
    pub values: Vec<[f64; 3]>,
}

impl Autocorrelation {
    pub fn lag(&self, k: usize) -> f64 {
        self.dt * k as f64
    }
}

/// Unbiased estimator `C(k) = Σ (x_i − x̄)(x_{i+k} − x̄) / (N − k)`,
/// evaluated with zero-padded FFTs.
pub fn estimate_autocorrelation(ts: &TimeSeries, max_lag: usize) -> Result<Autocorrelation> {
    let n = ts.len();
    if max_lag >= n {
        return Err(Error::param("max_lag", format!("series of {n} samples is too short for lag {max_lag}")));
    }
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mean = ts.mean();
    let mut values = vec![[0.0; 3]; max_lag + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); size];
    for k in 0..3 {
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (b, s) in buf.iter_mut().zip(ts.samples()) {
            b.re = s[k] - mean[k];
        }
        fwd.process(&mut buf);
        for c in buf.iter_mut() {
            *c = Complex::new(c.norm_sqr(), 0.0);
        }
        inv.process(&mut buf);
        for (lag, v) in values.iter_mut().enumerate() {
            v[k] = buf[lag].re / size as f64 / (n - lag) as f64;
        }
    }
    Ok(Autocorrelation { dt: ts.dt(), values })
}

/// Two-sided density `S(ω)` (units² · s) on `ω_j = 2πj/(M dt)`, `j = 0..=M/2`,
/// normalised so that `∫ S dω/2π` over all frequencies is the variance.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub omega: Vec<f64>,
    pub density: Vec<[f64; 3]>,
    pub segments: usize,
}

impl PowerSpectrum {
    /// `∫ S dω/2π` over `(−ω_max, ω_max]`, per axis.
    pub fn integral(&self) -> [f64; 3] {
        let m = 2 * (self.omega.len() - 1);
        let d_omega = self.omega[1] - self.omega[0];
        let mut acc = [0.0; 3];
        for (j, s) in self.density.iter().enumerate() {
            // interior bins appear at ±ω_j
            let w = if j == 0 || 2 * j == m { 1.0 } else { 2.0 };
            for k in 0..3 {
                acc[k] += w * s[k];
            }
        }
        acc.map(|a| a * d_omega / (2.0 * PI))
    }
}

/// Default segment length for [`estimate_psd`].
pub const DEFAULT_SEGMENT: usize = 1024;

/// Welch estimate with the default segment length (or the whole series if
/// shorter), Hann window and 50% overlap.
pub fn estimate_psd(ts: &TimeSeries) -> Result<PowerSpectrum> {
    let seg = DEFAULT_SEGMENT.min(ts.len() & !1);
    estimate_psd_with(ts, seg)
}

/// Welch estimate with Hann-windowed segments of `segment` samples (even),
/// 50% overlap and removal of the series mean. The window broadens features
/// narrower than a few `2π/(segment·dt)`.
pub fn estimate_psd_with(ts: &TimeSeries, segment: usize) -> Result<PowerSpectrum> {
    if segment < 4 || !segment.is_multiple_of(2) {
        return Err(Error::param("segment", "must be even and at least 4"));
    }
    if ts.len() < segment {
        return Err(Error::param("segment", format!("longer than the series ({} samples)", ts.len())));
    }
    let window: Vec<f64> = (0..segment).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / segment as f64).cos()).collect();
    let w2: f64 = window.iter().map(|w| w * w).sum();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(segment);
    let half = segment / 2;
    let step = half;
    let starts: Vec<usize> = (0..=(ts.len() - segment) / step).map(|i| i * step).collect();
    let mut density = vec![[0.0; 3]; half + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); segment];
    let mean = ts.mean();
    for &s0 in &starts {
        let seg = &ts.samples()[s0..s0 + segment];
        for k in 0..3 {
            for ((b, s), w) in buf.iter_mut().zip(seg).zip(&window) {
                *b = Complex::new((s[k] - mean[k]) * w, 0.0);
            }
            fft.process(&mut buf);
            for (d, c) in density.iter_mut().zip(&buf) {
                d[k] += c.norm_sqr();
            }
        }
    }
    let norm = ts.dt() / (w2 * starts.len() as f64);
    for d in &mut density {
        for v in d.iter_mut() {
            *v *= norm;
        }
    }
    let d_omega = 2.0 * PI / (segment as f64 * ts.dt());
    let omega = (0..=half).map(|j| j as f64 * d_omega).collect();
    Ok(PowerSpectrum { omega, density, segments: starts.len() })
}

/// Lorentzian `σ² 2τ/(1 + ω²τ²)` fitted to one axis of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub variance: f64,
    pub tau: f64,
}

/// Fits `1/S = a + b ω²` by least squares weighted with `S²`, using bins up
/// to `omega_max`, skipping the DC bin.
pub fn fit_lorentzian(psd: &PowerSpectrum, axis: usize, omega_max: f64) -> Result<LorentzianFit> {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut used = 0;
    for (w, d) in psd.omega.iter().zip(&psd.density).skip(1) {
        if *w > omega_max {
            break;
        }
        let s = d[axis];
        if s <= 0.0 {
            continue;
        }
        let (x, y, wt) = (w * w, 1.0 / s, s * s);
        sw += wt;
        sx += wt * x;
        sy += wt * y;
        sxx += wt * x * x;
        sxy += wt * x * y;
        used += 1;
    }
    if used < 3 {
        return Err(Error::DegenerateData("fewer than three usable spectral bins".into()));
    }
    let det = sw * sxx - sx * sx;
    let b = (sw * sxy - sx * sy) / det;
    let a = (sy - b * sx) / sw;
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::DegenerateData(format!("spectrum is not Lorentzian (a = {a:e}, b = {b:e})")));
    }
    let tau = (b / a).sqrt();
    Ok(LorentzianFit { variance: 1.0 / (2.0 * tau * a), tau })
}

/// Decay time of `C(t) ∝ e^{−t/τ}` from a least-squares line through
/// `ln C` over the leading lags with `C > floor·C(0)`.
pub fn fit_exponential_decay(acf: &Autocorrelation, axis: usize, floor: f64) -> Result<f64> {
    let c0 = acf.values[0][axis];
    if !(c0 > 0.0) {
        return Err(Error::DegenerateData("zero-lag correlation is not positive".into()));
    }
    let pts: Vec<(f64, f64)> = acf
        .values
        .iter()
        .enumerate()
        .take_while(|(_, v)| v[axis] > floor * c0)
        .map(|(k, v)| (acf.lag(k), (v[axis] / c0).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateData("correlation decays within two lags".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::DegenerateData("correlation does not decay".into()));
    }
    Ok(-1.0 / slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{simulate_field_series, stream_rng, Dynamics, EnsembleSpec, FluctuatorEnsemble, Source};
    use crate::noise::SurfaceGeometry;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn white(n: usize, sigma: f64, dt: f64) -> TimeSeries {
        let mut rng = stream_rng(1, 0);
        let s = (0..n)
            .map(|_| {
                let v: [f64; 3] = std::array::from_fn(|_| sigma * rng.sample::<f64, _>(StandardNormal));
                v
            })
            .collect();
        TimeSeries::new(dt, s).unwrap()
    }

    fn single(dynamics: Dynamics, dt: f64, n: usize) -> TimeSeries {
        let geom = SurfaceGeometry::new(5e-9, 0.0).unwrap();
        let spec = EnsembleSpec { source: Source::elementary_charge(), dynamics, n_areal: 0.0, side: 1e-7 };
        let ens = FluctuatorEnsemble::from_positions(spec, vec![(3e-9, -2e-9)], None, 21).unwrap();
        simulate_field_series(&ens, &geom, dt, n).unwrap()
    }

    #[test]
    fn white_noise_is_flat() {
        let dt = 1e-3;
        let ts = white(1 << 16, 2.0, dt);
        let psd = estimate_psd_with(&ts, 256).unwrap();
        let level = 4.0 * dt;
        // Welch bins are χ² with ~2K dof; 9σ bands over the whole grid.
        let tol = 9.0 / (psd.segments as f64).sqrt();
        for d in psd.density.iter().skip(1) {
            for v in d {
                assert!((v / level - 1.0).abs() < tol, "{v} vs {level}");
            }
        }
        let mean = psd.density.iter().skip(1).map(|d| d[0]).sum::<f64>() / (psd.density.len() - 1) as f64;
        assert!((mean / level - 1.0).abs() < 0.02);
    }

    #[test]
    fn parseval_between_psd_and_autocorrelation() {
        let ts = single(Dynamics::OrnsteinUhlenbeck { tau: 20e-9 }, 1e-9, 1 << 16);
        let acf = estimate_autocorrelation(&ts, 10).unwrap();
        let psd = estimate_psd(&ts).unwrap();
        let integ = psd.integral();
        for k in 0..3 {
            assert!((integ[k] / acf.values[0][k] - 1.0).abs() < 0.02, "axis {k}");
        }
    }

    #[test]
    fn telegraph_psd_is_lorentzian() {
        let tau = 50e-9;
        let dt = 5e-9;
        let ts = single(Dynamics::telegraph_with_tau(tau).unwrap(), dt, 1 << 18);
        let psd = estimate_psd_with(&ts, 2048).unwrap();
        let fit = fit_lorentzian(&psd, 2, 5.0 / tau).unwrap();
        assert!((fit.tau / tau - 1.0).abs() < 0.1, "tau fit {}", fit.tau);
        let var = ts.mean_square()[2];
        assert!((fit.variance / var - 1.0).abs() < 0.1);
    }

    #[test]
    fn ou_autocorrelation_decays_at_tau() {
        let tau = 10e-9;
        let ts = single(Dynamics::OrnsteinUhlenbeck { tau }, 1e-9, 1 << 18);
        let acf = estimate_autocorrelation(&ts, 60).unwrap();
        let fit = fit_exponential_decay(&acf, 2, 0.2).unwrap();
        assert!((fit / tau - 1.0).abs() < 0.05, "tau fit {fit}");
    }

    #[test]
    fn rejects_short_series() {
        let ts = white(16, 1.0, 1.0);
        assert!(estimate_autocorrelation(&ts, 16).is_err());
        assert!(estimate_psd_with(&ts, 32).is_err());
        assert!(estimate_psd_with(&ts, 7).is_err());
    }
}
